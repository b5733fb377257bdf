//! Depth decisions through the displacement polyhedron. With `y = x' - x`
//! the relation becomes `D(x, y) <= c''`; stacking `k` homogeneous copies
//! `D(y_{i-1}, y_i) <= 0` gives a system that is infeasible exactly when an
//! MLRF of depth `k` exists, so each depth costs one LP.

use num_traits::Zero;
use rayon::prelude::*;

use crate::engine::{synthesize_nested, EngineError, Mlrf, Outcome, RecurrentSet, Verdict};
use crate::linalg::{Matrix, Rational};
use crate::loops::TransitionPoly;
use crate::polyhedron::{Polyhedron, Row};

/// `D(x, y0) <= c'' ∧ D(y0, y1) <= 0 ∧ … ∧ D(y_{k-1}, y_k) <= 0` over
/// `n(k+2)` variables ordered `x, y0, …, yk`.
#[derive(Debug, Clone)]
pub struct StackedSystem {
    pub n: usize,
    pub blocks: usize,
    pub poly: Polyhedron,
}

impl StackedSystem {
    pub fn dim(&self) -> usize {
        self.n * (self.blocks + 2)
    }
}

pub fn build_stacked(q: &TransitionPoly, k: usize) -> StackedSystem {
    let n = q.n();
    let r = q.displacement();
    let dim = n * (k + 2);
    let homogeneous = |rows: &[Row]| -> Vec<Row> {
        rows.iter()
            .map(|row| Row::new(row.coeffs.clone(), Rational::zero()))
            .collect()
    };
    let hom = Polyhedron::new(2 * n, homogeneous(r.ineqs()), homogeneous(r.eqs()));
    let mut poly = r.embed(dim, &(0..2 * n).collect::<Vec<_>>());
    for i in 1..=k {
        let coords: Vec<usize> = (i * n..(i + 2) * n).collect();
        poly = poly.intersect(&hom.embed(dim, &coords));
    }
    StackedSystem { n, blocks: k, poly }
}

/// Whether an MLRF of depth `d` exists.
pub fn depth_decision(q: &TransitionPoly, d: usize) -> bool {
    build_stacked(q, d).poly.is_empty()
}

/// `depth_decision` for `d = 0..=d_max`.
pub fn depth_profile(q: &TransitionPoly, d_max: usize) -> Vec<bool> {
    (0..=d_max).into_par_iter().map(|d| depth_decision(q, d)).collect()
}

pub fn min_depth(q: &TransitionPoly, d_max: usize) -> Option<usize> {
    (0..=d_max).find(|&d| depth_decision(q, d))
}

/// Bounded relations either have a fixpoint (nontermination) or an LRF.
/// Returns `None` when `Q` is unbounded.
pub fn bounded_loop_analyze(q: &TransitionPoly) -> Result<Option<Verdict>, EngineError> {
    let done = |outcome| Verdict {
        outcome,
        iterations: 0,
        trace: vec![],
    };
    if q.is_empty() {
        return Ok(Some(done(Outcome::Mlrf(Mlrf::new(vec![])))));
    }
    if !q.poly().generators().is_bounded() {
        return Ok(None);
    }
    let diagonal = TransitionPoly::identity(q.names().to_vec());
    let fixed = q.with_poly(q.poly().intersect(diagonal.poly()));
    if !fixed.is_empty() {
        return Ok(Some(done(Outcome::Nonterminating {
            set: RecurrentSet::new(fixed),
            stabilized_at: 0,
            witness: None,
        })));
    }
    Ok(Some(done(Outcome::Mlrf(synthesize_nested(q, 1)?))))
}

/// Least `N <= n` with `(U - I)^N = 0` for a deterministic affine update.
pub fn nilpotency_certificate(q: &TransitionPoly) -> Option<usize> {
    let upd = q.extract_affine_update()?;
    let n = q.n();
    let m = upd.u.sub(&Matrix::identity(n)).ok()?;
    let mut power = m.clone();
    for k in 1..=n {
        if power.is_zero() {
            return Some(k);
        }
        power = power.mul(&m).ok()?;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};
    use crate::loops::{LoopRow, RowRel, SlcLoop};

    fn interval(update_rhs: i64, xp_coeff: i64) -> TransitionPoly {
        // 0 <= x <= 1; x' = ±x + k, encoded as -x·s + x' = k
        SlcLoop::new(
            vec!["x".into()],
            vec![
                LoopRow::guard(rvec(&[-1]), RowRel::Le, rat(0)),
                LoopRow::guard(rvec(&[1]), RowRel::Le, rat(1)),
            ],
            vec![LoopRow::update(rvec(&[xp_coeff]), rvec(&[1]), RowRel::Eq, rat(update_rhs))],
        )
        .unwrap()
        .transition()
    }

    #[test]
    fn bounded_swap_has_fixpoint() {
        let q = interval(1, 1); // x' = 1 - x
        let v = bounded_loop_analyze(&q).unwrap().unwrap();
        let set = v.recurrent_set().unwrap();
        assert!(set.states.contains(&[crate::linalg::ratio(1, 2)]));
        assert_eq!(set.states.feasible_point(), Some(vec![crate::linalg::ratio(1, 2)]));
    }

    #[test]
    fn bounded_decrement_has_lrf() {
        let q = interval(-1, -1); // x' = x - 1
        let v = bounded_loop_analyze(&q).unwrap().unwrap();
        assert_eq!(v.mlrf().unwrap().depth(), 1);
        assert_eq!(min_depth(&q, 3), Some(1));
    }

    #[test]
    fn stacked_dimensions() {
        let q = interval(-1, -1);
        assert_eq!(build_stacked(&q, 0).dim(), 2);
        assert_eq!(build_stacked(&q, 3).poly.dim(), 5);
        assert!(build_stacked(&q, 0).poly.set_equals(&q.displacement()));
    }

    #[test]
    fn identity_update_is_nilpotent_of_index_one() {
        let q = interval(0, -1);
        assert_eq!(nilpotency_certificate(&q), Some(1));
        assert_eq!(nilpotency_certificate(&interval(1, 1)), None);
    }
}
