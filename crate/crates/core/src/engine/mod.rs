//! The operator F, the fixpoint iteration deciding bounded-depth MLRF
//! existence, witness synthesis and the conservative integer mode.

mod farkas;
mod synth;

pub use synth::{conic_strengthen, dellrf_membership, restrict_to_pre, synthesize_nested};

use std::collections::HashSet;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{primitive, LinalgError, Rational, Vector};
use crate::loops::TransitionPoly;
use crate::polyhedron::{integer_point, AffineFunc, IntegerSearch, Polyhedron, Row};

/// Branch-and-bound budget for integer witnesses.
const INTEGER_NODE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("no nested ranking function of depth {depth} exists, although F^{depth}(Q) is empty")]
    SynthesisInfeasible { depth: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(&'static str),
    #[error("internal inconsistency: {0}")]
    Internal(&'static str),
    #[error("invalid limits: depth bound {depth_bound} exceeds iteration cap {max_iterations}")]
    Limits {
        depth_bound: usize,
        max_iterations: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A multiphase ranking function `⟨ρ1, …, ρd⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlrf {
    pub components: Vec<AffineFunc>,
}

impl Mlrf {
    pub fn new(components: Vec<AffineFunc>) -> Self {
        Self { components }
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentSet {
    pub transitions: TransitionPoly,
    pub states: Polyhedron,
}

impl RecurrentSet {
    pub fn new(transitions: TransitionPoly) -> Self {
        let states = transitions.states();
        Self { transitions, states }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    DepthBound,
    IterationCap,
    IntegerHullRequired,
    RationalRecurrentSet,
}

impl UnknownReason {
    pub fn code(self) -> &'static str {
        match self {
            UnknownReason::DepthBound => "depth-bound",
            UnknownReason::IterationCap => "iteration-cap",
            UnknownReason::IntegerHullRequired => "integer-hull-required",
            UnknownReason::RationalRecurrentSet => "rational-recurrent-set",
        }
    }
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::DepthBound => "depth bound reached",
            UnknownReason::IterationCap => "iteration cap reached",
            UnknownReason::IntegerHullRequired => "integer hull required",
            UnknownReason::RationalRecurrentSet => {
                "rational recurrent set; integer nontermination not established"
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Mlrf(Mlrf),
    /// `set` is `Q_i` for the index `stabilized_at` at which `F(Q_i) = Q_i`.
    /// `witness` is an integer start state, filled in by integer mode.
    Nonterminating {
        set: RecurrentSet,
        stabilized_at: usize,
        witness: Option<Vector>,
    },
    Unknown(UnknownReason),
}

/// Sizes seen while computing `Q_{i+1} = F(Q_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationInfo {
    pub index: usize,
    pub generators: usize,
    pub new_generators: usize,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Number of applications of F.
    pub iterations: usize,
    pub trace: Vec<IterationInfo>,
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self.outcome {
            Outcome::Mlrf(_) => "MLRF",
            Outcome::Nonterminating { .. } => "NONTERMINATING",
            Outcome::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn mlrf(&self) -> Option<&Mlrf> {
        match &self.outcome {
            Outcome::Mlrf(m) => Some(m),
            _ => None,
        }
    }

    pub fn recurrent_set(&self) -> Option<&RecurrentSet> {
        match &self.outcome {
            Outcome::Nonterminating { set, .. } => Some(set),
            _ => None,
        }
    }

    pub fn unknown_reason(&self) -> Option<UnknownReason> {
        match self.outcome {
            Outcome::Unknown(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub depth_bound: Option<usize>,
    pub max_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            depth_bound: Some(10),
            max_iterations: 50,
        }
    }
}

impl Limits {
    pub fn new(depth_bound: Option<usize>, max_iterations: usize) -> Result<Self, EngineError> {
        match depth_bound {
            Some(d) if d > max_iterations => Err(EngineError::Limits {
                depth_bound: d,
                max_iterations,
            }),
            _ => Ok(Self {
                depth_bound,
                max_iterations,
            }),
        }
    }
}

/// Conjoins `a·x - a·x' <= 0` for each nonnegative function over the states
/// whose linear part was not used before. Returns the new relation, the
/// generator count and how many of them were new.
fn f_step_tracked(q: &TransitionPoly, used: &mut HashSet<Vector>) -> (TransitionPoly, usize, usize) {
    let n = q.n();
    if q.is_empty() {
        return (q.with_poly(Polyhedron::empty(2 * n)), 0, 0);
    }
    let gens = q.poly().nonneg_cone(n);
    let mut rows = Vec::new();
    for g in &gens {
        if g.coeffs.iter().all(Zero::is_zero) {
            continue;
        }
        let key = primitive(&g.coeffs);
        if !used.insert(key.clone()) {
            continue;
        }
        let coeffs = key.iter().cloned().chain(key.iter().map(|c| -c)).collect();
        rows.push(Row::new(coeffs, Rational::zero()));
    }
    let fresh = rows.len();
    let next = if fresh == 0 {
        q.clone()
    } else {
        q.with_poly(q.poly().with_rows(rows, vec![]).remove_redundant())
    };
    (next, gens.len(), fresh)
}

/// One application of F.
pub fn f_step(q: &TransitionPoly) -> TransitionPoly {
    f_step_tracked(q, &mut HashSet::new()).0
}

/// `[Q_0, Q_1, …, Q_k]` with `Q_{i+1} = F(Q_i)`.
pub fn iterate_f(q: &TransitionPoly, k: usize) -> Vec<TransitionPoly> {
    let mut used = HashSet::new();
    let mut out = vec![q.clone()];
    for _ in 0..k {
        let next = f_step_tracked(out.last().unwrap(), &mut used).0;
        out.push(next);
    }
    out
}

/// Iterates F until the relation is empty (MLRF of optimal depth), a fixpoint
/// is reached (recurrent set) or a limit fires.
pub fn find_mlrf(q: &TransitionPoly, limits: Limits) -> Result<Verdict, EngineError> {
    let mut used = HashSet::new();
    let mut trace = Vec::new();
    let mut current = q.clone();
    let mut i = 0;
    loop {
        if current.is_empty() {
            let mlrf = synthesize_nested(q, i)?;
            return Ok(Verdict {
                outcome: Outcome::Mlrf(mlrf),
                iterations: trace.len(),
                trace,
            });
        }
        if trace.len() == limits.max_iterations {
            let reason = if limits.depth_bound == Some(i) {
                UnknownReason::DepthBound
            } else {
                UnknownReason::IterationCap
            };
            return Ok(Verdict {
                outcome: Outcome::Unknown(reason),
                iterations: trace.len(),
                trace,
            });
        }
        let (next, generators, new_generators) = f_step_tracked(&current, &mut used);
        trace.push(IterationInfo {
            index: i,
            generators,
            new_generators,
            rows: next.poly().row_count(),
        });
        if new_generators == 0 || next.poly().set_equals(current.poly()) {
            return Ok(Verdict {
                outcome: Outcome::Nonterminating {
                    set: RecurrentSet::new(current),
                    stabilized_at: i,
                    witness: None,
                },
                iterations: trace.len(),
                trace,
            });
        }
        if limits.depth_bound == Some(i) {
            return Ok(Verdict {
                outcome: Outcome::Unknown(UnknownReason::DepthBound),
                iterations: trace.len(),
                trace,
            });
        }
        current = next;
        i += 1;
    }
}

/// Integer semantics. Only integral relations are analysed; a rational
/// recurrent set is kept only when the update is integer and deterministic
/// and an integer start state exists in it.
pub fn analyze_integer(q: &TransitionPoly, limits: Limits) -> Result<Verdict, EngineError> {
    if !q.poly().is_integral() {
        return Ok(Verdict {
            outcome: Outcome::Unknown(UnknownReason::IntegerHullRequired),
            iterations: 0,
            trace: vec![],
        });
    }
    let mut verdict = find_mlrf(q, limits)?;
    if let Outcome::Nonterminating { set, stabilized_at, .. } = &verdict.outcome {
        let integer_update = q.extract_affine_update().is_some_and(|u| u.is_integer());
        let witness = if integer_update {
            match integer_point(&set.states, INTEGER_NODE_LIMIT) {
                IntegerSearch::Found(x) => Some(x),
                _ => None,
            }
        } else {
            None
        };
        verdict.outcome = match witness {
            Some(x) => Outcome::Nonterminating {
                set: set.clone(),
                stabilized_at: *stabilized_at,
                witness: Some(x),
            },
            None => Outcome::Unknown(UnknownReason::RationalRecurrentSet),
        };
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};
    use crate::loops::{LoopRow, RowRel, SlcLoop};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn countdown_has_lrf() {
        // x >= 0; x' = x - 1
        let l = SlcLoop::new(
            names(&["x"]),
            vec![LoopRow::guard(rvec(&[-1]), RowRel::Le, rat(0))],
            vec![LoopRow::update(rvec(&[-1]), rvec(&[1]), RowRel::Eq, rat(-1))],
        )
        .unwrap();
        let v = find_mlrf(&l.transition(), Limits::default()).unwrap();
        assert_eq!(v.mlrf().unwrap().depth(), 1);
        assert_eq!(v.iterations, 1);
    }

    #[test]
    fn identity_update_is_a_fixpoint() {
        let l = SlcLoop::new(
            names(&["x"]),
            vec![LoopRow::guard(rvec(&[-1]), RowRel::Le, rat(0))],
            vec![LoopRow::update(rvec(&[-1]), rvec(&[1]), RowRel::Eq, rat(0))],
        )
        .unwrap();
        let v = find_mlrf(&l.transition(), Limits::default()).unwrap();
        match v.outcome {
            Outcome::Nonterminating { stabilized_at, .. } => assert_eq!(stabilized_at, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_relation_has_depth_zero() {
        let t = TransitionPoly::new(names(&["x"]), Polyhedron::empty(2)).unwrap();
        let v = find_mlrf(&t, Limits::default()).unwrap();
        assert_eq!(v.mlrf().unwrap().depth(), 0);
        assert_eq!(v.iterations, 0);
    }

    #[test]
    fn limits_are_validated() {
        assert!(Limits::new(Some(5), 3).is_err());
        assert!(Limits::new(None, 3).is_ok());
    }
}
