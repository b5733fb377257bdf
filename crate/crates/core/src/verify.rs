//! Independent checkers for emitted witnesses, and a simulator for
//! deterministic loops. Nothing here looks at engine intermediates: MLRFs
//! are checked phase by phase with strict LPs, recurrent sets through
//! Fourier-Motzkin projections.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::engine::Mlrf;
use crate::linalg::{strict_feasible, LinalgError, LinearConstraint, Rational, Vector};
use crate::loops::TransitionPoly;
use crate::polyhedron::{Polyhedron, Row};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("component {index} has {found} coefficients, the loop has {expected} variables")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("start state has {found} entries, the loop has {expected} variables")]
    StateDimension { expected: usize, found: usize },
    #[error("the update is not deterministic and affine")]
    Nondeterministic,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlrfFailure {
    /// Some remaining transition decreases component `i` (1-based) by less than 1.
    Decrease(usize),
    /// Transitions with every component negative remain.
    Residual,
}

impl fmt::Display for MlrfFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlrfFailure::Decrease(i) => write!(f, "phase {i}: a remaining transition decreases by less than 1"),
            MlrfFailure::Residual => write!(f, "residual: a transition with every component negative remains"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlrfCheck {
    pub first_failure: Option<MlrfFailure>,
}

impl MlrfCheck {
    pub fn accepted(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Phase `i` must decrease by at least 1 on every transition not yet ranked
/// by an earlier phase; a transition counts as ranked at phase `i` once
/// `ρ_i(x) >= 0`.
pub fn check_mlrf(q: &TransitionPoly, tau: &Mlrf) -> Result<MlrfCheck, VerifyError> {
    let n = q.n();
    for (index, f) in tau.components.iter().enumerate() {
        if f.dim() != n {
            return Err(VerifyError::Dimension {
                index: index + 1,
                expected: n,
                found: f.dim(),
            });
        }
    }
    let dim = 2 * n;
    let mut remaining = q.poly().constraints();
    for (i, f) in tau.components.iter().enumerate() {
        // a·x - a·x' < 1
        let delta: Vector = f.coeffs.iter().cloned().chain(f.coeffs.iter().map(|c| -c)).collect();
        let mut probe = remaining.clone();
        probe.push(LinearConstraint::lt(delta, Rational::one()));
        if strict_feasible(dim, &probe)? {
            return Ok(MlrfCheck {
                first_failure: Some(MlrfFailure::Decrease(i + 1)),
            });
        }
        // keep ρ_i(x) < 0
        let lifted: Vector = f.coeffs.iter().cloned().chain(vec![Rational::zero(); n]).collect();
        remaining.push(LinearConstraint::lt(lifted, -f.constant.clone()));
    }
    let first_failure = strict_feasible(dim, &remaining)?.then_some(MlrfFailure::Residual);
    Ok(MlrfCheck { first_failure })
}

/// `proj_x'(S) ⊆ proj_x(S)`.
pub fn check_recurrent(s: &TransitionPoly) -> bool {
    if s.is_empty() {
        return true;
    }
    s.states().includes(&s.targets())
}

/// Whether `F(S) = S`: every function nonnegative on `proj_x(S)` must be
/// non-decreasing along every transition of `S`. It suffices to test the
/// rows of `proj_x(S)` itself.
pub fn check_monotonic_recurrent(s: &TransitionPoly) -> bool {
    if s.is_empty() {
        return true;
    }
    let n = s.n();
    let states = s.states();
    let mut required = Vec::new();
    let mut push = |c: &[Rational]| {
        // c·x <= m on states; ρ = m - c·x, so Δρ <= 0 reads c·x' - c·x <= 0.
        let coeffs: Vector = c.iter().map(|v| -v).chain(c.iter().cloned()).collect();
        required.push(Row::new(coeffs, Rational::zero()));
    };
    for r in states.ineqs() {
        push(&r.coeffs);
    }
    for r in states.eqs() {
        push(&r.coeffs);
        push(&r.coeffs.iter().map(|v| -v).collect::<Vector>());
    }
    debug_assert!(required.iter().all(|r| r.coeffs.len() == 2 * n));
    s.poly().with_rows(required, vec![]).includes(s.poly())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<Vector>,
    /// The last state does not satisfy the guard.
    pub exited: bool,
}

impl Trace {
    pub fn stays_within(&self, set: &Polyhedron) -> bool {
        self.states.iter().all(|x| set.contains(x))
    }
}

/// Runs a deterministic loop for up to `steps` transitions.
pub fn simulate(q: &TransitionPoly, x0: &[Rational], steps: usize) -> Result<Trace, VerifyError> {
    if x0.len() != q.n() {
        return Err(VerifyError::StateDimension {
            expected: q.n(),
            found: x0.len(),
        });
    }
    let update = q.extract_affine_update().ok_or(VerifyError::Nondeterministic)?;
    let enabled = q.states();
    let mut states = vec![x0.to_vec()];
    for _ in 0..steps {
        let x = states.last().unwrap();
        if !enabled.contains(x) {
            break;
        }
        let next = update.apply(x);
        states.push(next);
    }
    let exited = !enabled.contains(states.last().unwrap());
    Ok(Trace { states, exited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};
    use crate::loops::{LoopRow, RowRel, SlcLoop};
    use crate::polyhedron::AffineFunc;

    fn countdown() -> TransitionPoly {
        SlcLoop::new(
            vec!["x".into()],
            vec![LoopRow::guard(rvec(&[-1]), RowRel::Le, rat(0))],
            vec![LoopRow::update(rvec(&[-1]), rvec(&[1]), RowRel::Eq, rat(-1))],
        )
        .unwrap()
        .transition()
    }

    #[test]
    fn lrf_checks() {
        let q = countdown();
        let good = Mlrf::new(vec![AffineFunc::new(rvec(&[1]), rat(0))]);
        assert!(check_mlrf(&q, &good).unwrap().accepted());
        let flat = Mlrf::new(vec![AffineFunc::constant_fn(1, rat(5))]);
        assert_eq!(
            check_mlrf(&q, &flat).unwrap().first_failure,
            Some(MlrfFailure::Decrease(1))
        );
        // -x - 1 increases by 1
        let wrong = Mlrf::new(vec![AffineFunc::new(rvec(&[-1]), rat(-1))]);
        assert!(!check_mlrf(&q, &wrong).unwrap().accepted());
        assert!(check_mlrf(&q, &Mlrf::new(vec![AffineFunc::new(rvec(&[1, 0]), rat(0))])).is_err());
    }

    #[test]
    fn empty_relation_accepts_empty_tuple() {
        let q = TransitionPoly::new(vec!["x".into()], Polyhedron::empty(2)).unwrap();
        assert!(check_mlrf(&q, &Mlrf::new(vec![])).unwrap().accepted());
        assert!(!check_mlrf(&countdown(), &Mlrf::new(vec![])).unwrap().accepted());
    }

    #[test]
    fn recurrence_checks() {
        // {x = 0, x' = 1}: nothing leaves 1
        let s = TransitionPoly::new(
            vec!["x".into()],
            Polyhedron::new(2, vec![], vec![Row::new(rvec(&[1, 0]), rat(0)), Row::new(rvec(&[0, 1]), rat(1))]),
        )
        .unwrap();
        assert!(!check_recurrent(&s));
        let fixed = TransitionPoly::identity(vec!["x".into()]);
        assert!(check_recurrent(&fixed));
        assert!(check_monotonic_recurrent(&fixed));
    }

    #[test]
    fn simulation() {
        let q = countdown();
        let t = simulate(&q, &rvec(&[2]), 10).unwrap();
        assert_eq!(t.states, vec![rvec(&[2]), rvec(&[1]), rvec(&[0]), rvec(&[-1])]);
        assert!(t.exited);
        assert_eq!(simulate(&q, &rvec(&[2]), 0).unwrap().states, vec![rvec(&[2])]);
    }
}
