//! The end-to-end pipeline used by the CLI and the bindings: bounded fast
//! path, F iteration (or the displacement decision), cross-check between the
//! two engines, and independent re-verification of the witness.

use std::str::FromStr;

use rand::Rng;

use crate::displacement::{bounded_loop_analyze, depth_decision, min_depth};
use crate::engine::{analyze_integer, find_mlrf, synthesize_nested, EngineError, Limits, Outcome, UnknownReason, Verdict};
use crate::linalg::{rat, Rational};
use crate::loops::{LoopRow, RowRel, SlcLoop, TransitionPoly};
use crate::parse::Mode;
use crate::verify::{check_mlrf, check_monotonic_recurrent, check_recurrent, simulate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    FStep,
    Displacement,
    #[default]
    Both,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::FStep => "f-step",
            Engine::Displacement => "displacement",
            Engine::Both => "both",
        }
    }
}

impl FromStr for Engine {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "f-step" => Ok(Engine::FStep),
            "displacement" => Ok(Engine::Displacement),
            "both" => Ok(Engine::Both),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    pub limits: Limits,
    pub mode: Mode,
    pub engine: Engine,
}

/// Results of re-checking a witness; `None` where a check does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Checks {
    pub mlrf: Option<bool>,
    pub recurrent: Option<bool>,
    pub monotonic: Option<bool>,
    pub witness: Option<bool>,
}

impl Checks {
    pub fn all_passed(&self) -> bool {
        [self.mlrf, self.recurrent, self.monotonic, self.witness]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub verdict: Verdict,
    /// Which route produced the verdict: `bounded`, `f-step` or `displacement`.
    pub route: &'static str,
    pub checks: Checks,
    /// Whether the displacement decision agrees with the F iteration.
    pub engines_agree: Option<bool>,
}

fn depth_scan(limits: &Limits) -> usize {
    limits.depth_bound.unwrap_or(limits.max_iterations)
}

fn displacement_only(q: &TransitionPoly, limits: &Limits) -> Result<Verdict, EngineError> {
    let scan = depth_scan(limits);
    let outcome = match min_depth(q, scan) {
        Some(d) => Outcome::Mlrf(synthesize_nested(q, d)?),
        None if limits.depth_bound.is_some() => Outcome::Unknown(UnknownReason::DepthBound),
        None => Outcome::Unknown(UnknownReason::IterationCap),
    };
    Ok(Verdict {
        outcome,
        iterations: 0,
        trace: vec![],
    })
}

/// Compares an F-step verdict with the LP decision on the stacked system.
fn cross_check(q: &TransitionPoly, v: &Verdict, limits: &Limits) -> Option<bool> {
    match &v.outcome {
        Outcome::Mlrf(m) => {
            let d = m.depth();
            Some(depth_decision(q, d) && (d == 0 || !depth_decision(q, d - 1)))
        }
        Outcome::Nonterminating { .. } => Some(!depth_decision(q, depth_scan(limits))),
        Outcome::Unknown(UnknownReason::DepthBound) => Some(!depth_decision(q, depth_scan(limits))),
        Outcome::Unknown(UnknownReason::IterationCap) => Some(!depth_decision(q, v.iterations)),
        Outcome::Unknown(UnknownReason::RationalRecurrentSet) => Some(!depth_decision(q, depth_scan(limits))),
        Outcome::Unknown(UnknownReason::IntegerHullRequired) => None,
    }
}

/// Re-verifies whatever witness the verdict carries.
pub fn check_verdict(q: &TransitionPoly, v: &Verdict) -> Checks {
    let mut checks = Checks::default();
    match &v.outcome {
        Outcome::Mlrf(m) => {
            checks.mlrf = Some(check_mlrf(q, m).is_ok_and(|c| c.accepted()));
        }
        Outcome::Nonterminating { set, witness, .. } => {
            let inside = q.poly().includes(set.transitions.poly()) && !set.transitions.is_empty();
            checks.recurrent = Some(inside && check_recurrent(&set.transitions));
            checks.monotonic = Some(inside && check_monotonic_recurrent(&set.transitions));
            if let Some(x) = witness {
                let stays = simulate(q, x, q.n() + 3).is_ok_and(|t| !t.exited && t.stays_within(&set.states));
                checks.witness = Some(x.iter().all(|c| c.is_integer()) && stays);
            }
        }
        Outcome::Unknown(_) => {}
    }
    checks
}

pub fn analyze(q: &TransitionPoly, opts: &Options) -> Result<Analysis, EngineError> {
    let (verdict, route) = match (opts.mode, opts.engine) {
        (Mode::Integer, _) => (analyze_integer(q, opts.limits)?, "f-step"),
        (Mode::Rational, Engine::Displacement) => match bounded_loop_analyze(q)? {
            Some(v) => (v, "bounded"),
            None => (displacement_only(q, &opts.limits)?, "displacement"),
        },
        (Mode::Rational, _) => match bounded_loop_analyze(q)? {
            Some(v) => (v, "bounded"),
            None => (find_mlrf(q, opts.limits)?, "f-step"),
        },
    };
    let engines_agree = match opts.engine {
        Engine::Both => cross_check(q, &verdict, &opts.limits),
        _ => None,
    };
    let checks = check_verdict(q, &verdict);
    Ok(Analysis {
        verdict,
        route,
        checks,
        engines_agree,
    })
}

fn coeff<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rational {
    rat(rng.gen_range(lo..=hi))
}

fn coeffs<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..n).map(|_| coeff(rng, lo, hi)).collect()
}

/// A random loop with small integer coefficients: `guard_rows` guard
/// constraints and either `x' = Ux + c` or `n` relational update rows.
pub fn random_loop<R: Rng>(rng: &mut R, n: usize, guard_rows: usize, deterministic: bool) -> SlcLoop {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let guard = (0..guard_rows)
        .map(|_| {
            let a = coeffs(rng, n, -3, 3);
            LoopRow::guard(a, RowRel::Le, coeff(rng, -3, 3))
        })
        .collect();
    let update = (0..n)
        .map(|i| {
            if deterministic {
                let mut xp = vec![rat(0); n];
                xp[i] = rat(1);
                let x = coeffs(rng, n, -2, 2);
                LoopRow::update(x, xp, RowRel::Eq, coeff(rng, -2, 2))
            } else {
                let x = coeffs(rng, n, -2, 2);
                let xp = coeffs(rng, n, -2, 2);
                LoopRow::update(x, xp, RowRel::Le, coeff(rng, -2, 2))
            }
        })
        .collect();
    SlcLoop::new(names, guard, update).expect("generated rows match the dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_loops_are_analysable() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let l = random_loop(&mut rng, 2, 2, true);
            let a = analyze(&l.transition(), &Options::default()).unwrap();
            assert!(a.checks.all_passed());
            assert_ne!(a.engines_agree, Some(false));
        }
    }
}
