//! Witness synthesis: nested ranking functions, conic strengthening of a
//! disjunctive nonnegativity condition, and the restricted LRF test.

use num_traits::Zero;

use super::farkas::{LinExpr, LpBuilder};
use super::{EngineError, Mlrf};
use crate::linalg::{strict_feasible, LinearConstraint, LpResult, Rational};
use crate::loops::TransitionPoly;
use crate::polyhedron::{AffineFunc, Polyhedron};

fn one() -> Rational {
    Rational::from_integer(1.into())
}

/// Nested template of depth `d`, or `None` when the LP is infeasible.
pub(crate) fn try_nested(q: &TransitionPoly, d: usize) -> Option<Mlrf> {
    let n = q.n();
    if d == 0 {
        return q.is_empty().then(|| Mlrf::new(vec![]));
    }
    if q.is_empty() {
        // Anything ranks the empty relation; report zero functions.
        return Some(Mlrf::new(vec![AffineFunc::constant_fn(n, Rational::zero()); d]));
    }
    let p = q.poly();
    let mut lp = LpBuilder::new();
    // Component i uses columns a_i (n of them) then b_i.
    let comps: Vec<(Vec<usize>, usize)> = (0..d)
        .map(|_| (lp.add_vars(n, false), lp.add_var(false)))
        .collect();
    let a = |i: usize, k: usize| LinExpr::var(comps[i].0[k]);
    let zero = || LinExpr::constant(Rational::zero());

    // Δρ_1 - 1 >= 0, then ρ_{i-1}(x) + Δρ_i - 1 >= 0.
    for i in 0..d {
        let g: Vec<LinExpr> = (0..2 * n)
            .map(|k| {
                if k < n {
                    let e = a(i, k);
                    if i > 0 {
                        e.plus(&a(i - 1, k))
                    } else {
                        e
                    }
                } else {
                    a(i, k - n).neg()
                }
            })
            .collect();
        let mut h = LinExpr::constant(-one());
        if i > 0 {
            h = h.plus(&LinExpr::var(comps[i - 1].1));
        }
        lp.require_nonneg_on(p, &g, &h);
    }
    // ρ_d(x) >= 0.
    let g: Vec<LinExpr> = (0..2 * n)
        .map(|k| if k < n { a(d - 1, k) } else { zero() })
        .collect();
    lp.require_nonneg_on(p, &g, &LinExpr::var(comps[d - 1].1));

    let sol = lp.solve()?;
    let components = comps
        .iter()
        .map(|(av, bv)| {
            AffineFunc::new(
                av.iter().map(|&i| sol[i].clone()).collect(),
                sol[*bv].clone(),
            )
        })
        .collect();
    Some(Mlrf::new(components))
}

/// Synthesizes a nested MLRF of depth exactly `d`. Intended to be called
/// once `F^d(Q)` is known to be empty, so infeasibility is an error.
pub fn synthesize_nested(q: &TransitionPoly, d: usize) -> Result<Mlrf, EngineError> {
    try_nested(q, d).ok_or(EngineError::SynthesisInfeasible { depth: d })
}

fn le(f: &AffineFunc) -> LinearConstraint {
    // f(x) <= 0
    LinearConstraint::le(f.coeffs.clone(), -f.constant.clone())
}

/// Nonnegative `μ` with `Σ μ_i ρ_i + ρ_k >= 0` on `p`, given that on `p` some
/// `ρ_i` (i < k) is positive or `ρ_k` is nonnegative, and that the `ρ_i`
/// (i < k) are not jointly covering `p`.
pub fn conic_strengthen(
    p: &Polyhedron,
    earlier: &[AffineFunc],
    last: &AffineFunc,
) -> Result<Vec<Rational>, EngineError> {
    let dim = p.dim();
    for f in earlier.iter().chain(std::iter::once(last)) {
        assert_eq!(f.dim(), dim, "function dimension differs from polyhedron");
    }
    let mut base = p.constraints();
    base.extend(earlier.iter().map(le));
    let mut violating = base.clone();
    violating.push(LinearConstraint::lt(last.coeffs.clone(), -last.constant.clone()));
    if strict_feasible(dim, &violating)? {
        return Err(EngineError::Hypothesis(
            "some point of P has every earlier function nonpositive and the last one negative",
        ));
    }
    if !strict_feasible(dim, &base)? {
        return Err(EngineError::Hypothesis(
            "every point of P makes some earlier function positive",
        ));
    }

    let mut lp = LpBuilder::new();
    let mu = lp.add_vars(earlier.len(), true);
    let g: Vec<LinExpr> = (0..dim)
        .map(|k| {
            mu.iter().zip(earlier).fold(
                LinExpr::constant(last.coeffs[k].clone()),
                |acc, (&m, f)| acc.plus(&LinExpr::var(m).scaled(&f.coeffs[k])),
            )
        })
        .collect();
    let h = mu.iter().zip(earlier).fold(
        LinExpr::constant(last.constant.clone()),
        |acc, (&m, f)| acc.plus(&LinExpr::var(m).scaled(&f.constant)),
    );
    lp.require_nonneg_on(p, &g, &h);
    let sol = lp.solve().ok_or(EngineError::Hypothesis(
        "no nonnegative combination found despite the hypotheses",
    ))?;
    let mus: Vec<Rational> = mu.iter().map(|&i| sol[i].clone()).collect();

    let combined = AffineFunc::new(
        g.iter().map(|e| e.eval(&sol)).collect(),
        h.eval(&sol),
    );
    match p.minimize(&combined.coeffs) {
        LpResult::Optimal { value, .. } if &value + &combined.constant >= Rational::zero() => Ok(mus),
        _ => Err(EngineError::Internal("strengthened function is negative on P")),
    }
}

/// An LRF for `Q` restricted to states with runs of length at least `b`.
pub fn dellrf_membership(q: &TransitionPoly, b: usize) -> Option<AffineFunc> {
    assert!(b >= 1, "b must be positive");
    let restricted = restrict_to_pre(q, b);
    try_nested(&restricted, 1).map(|m| m.components.into_iter().next().unwrap())
}

/// `Q ∧ x ∈ pre_b(Q)`.
pub fn restrict_to_pre(q: &TransitionPoly, b: usize) -> TransitionPoly {
    let n = q.n();
    let pre = q.pre(b).embed(2 * n, &(0..n).collect::<Vec<_>>());
    q.with_poly(q.poly().intersect(&pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};
    use crate::polyhedron::Row;

    #[test]
    fn strengthening_examples() {
        // 0 <= x <= 2, ρ1 = x - 1, ρ2 = 1 - x
        let p = Polyhedron::new(1, vec![Row::new(rvec(&[-1]), rat(0)), Row::new(rvec(&[1]), rat(2))], vec![]);
        let mu = conic_strengthen(
            &p,
            &[AffineFunc::new(rvec(&[1]), rat(-1))],
            &AffineFunc::new(rvec(&[-1]), rat(1)),
        )
        .unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu[0], rat(1));

        let nonneg = conic_strengthen(&p, &[], &AffineFunc::new(rvec(&[1]), rat(0))).unwrap();
        assert!(nonneg.is_empty());

        let half = Polyhedron::new(1, vec![Row::new(rvec(&[-1]), rat(0))], vec![]);
        let err = conic_strengthen(
            &half,
            &[AffineFunc::new(rvec(&[1]), rat(0))],
            &AffineFunc::constant_fn(1, rat(-1)),
        );
        assert!(matches!(err, Err(EngineError::Hypothesis(_))));
    }
}
