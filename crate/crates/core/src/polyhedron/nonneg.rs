//! The cone of affine functions that are nonnegative on a polyhedron.
//!
//! By the affine Farkas lemma, `a·x + b >= 0` holds on a nonempty
//! `{A z <= c, E z = e}` (with `x` the leading coordinates of `z`) iff some
//! `λ >= 0` and `μ` satisfy `λA + μE + (a, 0) = 0` and `λc + μe <= b`. The
//! cone of such `(λ, μ, a, b)` is generated by double description and its
//! generators are projected onto `(a, b)`.

use num_traits::{One, Zero};

use super::{dd, AffineFunc, Polyhedron};
use crate::linalg::{
    is_zero_vec, lp_solve, primitive, LinearConstraint, LpProblem, Rational, Vector,
};

/// Whether `v` is a nonnegative combination of `gens`.
pub fn cone_contains(gens: &[Vector], v: &[Rational]) -> bool {
    if is_zero_vec(v) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let dim = v.len();
    let cs = (0..dim)
        .map(|k| {
            let coeffs = gens.iter().map(|g| g[k].clone()).collect();
            LinearConstraint::eq(coeffs, v[k].clone())
        })
        .collect();
    let mut lp = LpProblem::feasibility(gens.len()).with_constraints(cs);
    lp.nonneg = vec![true; gens.len()];
    lp_solve(&lp).expect("consistent dimensions").is_feasible()
}

/// Whether two finite generator lists span the same cone.
pub fn cone_equal(a: &[Vector], b: &[Vector]) -> bool {
    a.iter().all(|v| cone_contains(b, v)) && b.iter().all(|v| cone_contains(a, v))
}

/// Removes generators that are implied by the remaining ones.
pub(crate) fn minimize_generators(mut gens: Vec<Vector>) -> Vec<Vector> {
    let mut i = 0;
    while i < gens.len() {
        let g = gens.remove(i);
        if !cone_contains(&gens, &g) {
            gens.insert(i, g);
            i += 1;
        }
    }
    gens
}

fn unit(dim: usize, k: usize, sign: i32) -> Vector {
    let mut v = vec![Rational::zero(); dim];
    v[k] = Rational::from_integer(sign.into());
    v
}

pub(crate) fn nonneg_cone(p: &Polyhedron, n: usize) -> Vec<AffineFunc> {
    let m = p.dim();
    assert!(n <= m);
    if p.is_empty() {
        // Every function is nonnegative on the empty set.
        let mut all: Vec<Vector> = (0..=n).flat_map(|k| [unit(n + 1, k, 1), unit(n + 1, k, -1)]).collect();
        all.sort();
        return all.into_iter().map(AffineFunc::from_vector).collect();
    }
    let ni = p.ineqs().len();
    let ne = p.eqs().len();
    let width = ni + ne + n + 1;
    let (a_off, b_idx) = (ni + ne, ni + ne + n);

    let mut eqs = Vec::with_capacity(m);
    for k in 0..m {
        let mut row = vec![Rational::zero(); width];
        for (i, r) in p.ineqs().iter().enumerate() {
            row[i] = r.coeffs[k].clone();
        }
        for (j, r) in p.eqs().iter().enumerate() {
            row[ni + j] = r.coeffs[k].clone();
        }
        if k < n {
            row[a_off + k] = Rational::one();
        }
        eqs.push(row);
    }
    let mut ineqs: Vec<Vector> = (0..ni).map(|i| unit(width, i, -1)).collect();
    let mut rhs_row = vec![Rational::zero(); width];
    for (i, r) in p.ineqs().iter().enumerate() {
        rhs_row[i] = r.rhs.clone();
    }
    for (j, r) in p.eqs().iter().enumerate() {
        rhs_row[ni + j] = r.rhs.clone();
    }
    rhs_row[b_idx] = -Rational::one();
    ineqs.push(rhs_row);

    let cone = dd::cone_generators(width, &ineqs, &eqs);
    let take = |v: &[num_bigint::BigInt]| -> Vector {
        v[a_off..]
            .iter()
            .cloned()
            .map(Rational::from_integer)
            .collect()
    };
    let mut gens: Vec<Vector> = Vec::new();
    for r in &cone.rays {
        gens.push(take(r));
    }
    for l in &cone.lines {
        let v = take(l);
        gens.push(v.iter().map(|x| -x).collect());
        gens.push(v);
    }
    let mut gens: Vec<Vector> = gens
        .into_iter()
        .filter(|g| !is_zero_vec(g))
        .map(|g| primitive(&g))
        .collect();
    gens.sort();
    gens.dedup();
    let mut gens = minimize_generators(gens);
    gens.sort();
    gens.into_iter().map(AffineFunc::from_vector).collect()
}
