//! Double description method for polyhedral cones.
//!
//! Constraints are added one at a time to the whole space. The current cone
//! is kept as a lineality basis plus extreme rays (modulo lineality). A
//! constraint that cuts the lineality space consumes one basis vector;
//! otherwise rays are split into positive/zero/negative sides and adjacent
//! pairs across the hyperplane are combined (combinatorial adjacency test).
//! All arithmetic is on primitive integer vectors.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Polyhedron, Row};
use crate::linalg::{primitive_integer, Rational, Vector};

/// `P = convhull(vertices) + cone(rays)`. Lineality directions appear as a
/// pair of opposite rays. No vertices means the empty set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneratorRep {
    pub vertices: Vec<Vector>,
    pub rays: Vec<Vector>,
}

impl GeneratorRep {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }
}

#[derive(Debug, Default)]
pub(crate) struct ConeGens {
    pub lines: Vec<Vec<BigInt>>,
    pub rays: Vec<Vec<BigInt>>,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: Vec<BigInt>,
    zero: Bits,
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

fn normalize(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// `alpha*u + beta*w` for integer scalars.
fn combine(alpha: &BigInt, u: &[BigInt], beta: &BigInt, w: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = u.iter().zip(w).map(|(x, y)| alpha * x + beta * y).collect();
    normalize(&mut out);
    out
}

struct DoubleDescription {
    dim: usize,
    lines: Vec<Vec<BigInt>>,
    rays: Vec<Ray>,
    num_ineqs: usize,
}

impl DoubleDescription {
    fn new(dim: usize, num_ineqs: usize) -> Self {
        let lines = (0..dim)
            .map(|i| {
                let mut e = vec![BigInt::zero(); dim];
                e[i] = BigInt::from(1);
                e
            })
            .collect();
        Self {
            dim,
            lines,
            rays: Vec::new(),
            num_ineqs,
        }
    }

    /// Adds `a·z <= 0` (when `index` is set) or `a·z = 0`.
    fn add(&mut self, a: &[BigInt], index: Option<usize>) {
        debug_assert_eq!(a.len(), self.dim);
        if let Some(p) = self.lines.iter().position(|l| !idot(a, l).is_zero()) {
            let l0 = self.lines.remove(p);
            let al0 = idot(a, &l0);
            for l in self.lines.iter_mut() {
                let al = idot(a, l);
                if !al.is_zero() {
                    *l = combine(&al0, l, &(-al), &l0);
                }
            }
            let s0 = al0.abs();
            let sign0 = if al0.is_positive() { BigInt::from(1) } else { BigInt::from(-1) };
            for r in self.rays.iter_mut() {
                let ar = idot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&s0, &r.v, &(-(ar * &sign0)), &l0);
                }
                if let Some(k) = index {
                    r.zero.set(k);
                }
            }
            if let Some(k) = index {
                let v = if al0.is_negative() {
                    l0
                } else {
                    l0.into_iter().map(|x| -x).collect()
                };
                let mut zero = Bits::new(self.num_ineqs);
                for j in 0..k {
                    zero.set(j);
                }
                self.rays.push(Ray { v, zero });
            }
            return;
        }

        let vals: Vec<BigInt> = self.rays.iter().map(|r| idot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_negative()).collect();
        if pos.is_empty() && (index.is_some() || neg.is_empty()) {
            if let Some(k) = index {
                for (r, v) in self.rays.iter_mut().zip(&vals) {
                    if v.is_zero() {
                        r.zero.set(k);
                    }
                }
            }
            return;
        }

        let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = self.rays[p].zero.and(&self.rays[q].zero);
                let adjacent = self
                    .rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == q || !common.subset_of(&r.zero));
                if !adjacent {
                    continue;
                }
                // vals[p] > 0 > vals[q]: the combination lies on the hyperplane.
                let v = combine(&vals[p], &self.rays[q].v, &(-&vals[q]), &self.rays[p].v);
                if seen.insert(v.clone()) {
                    let mut zero = common;
                    if let Some(k) = index {
                        zero.set(k);
                    }
                    next.push(Ray { v, zero });
                }
            }
        }
        let old = std::mem::take(&mut self.rays);
        for (mut r, v) in old.into_iter().zip(vals) {
            if v.is_zero() {
                if let Some(k) = index {
                    r.zero.set(k);
                }
                if seen.insert(r.v.clone()) {
                    next.push(r);
                }
            } else if v.is_negative() && index.is_some() && seen.insert(r.v.clone()) {
                next.push(r);
            }
        }
        self.rays = next;
    }
}

fn to_integer_rows(rows: &[Vector]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| primitive_integer(r)).collect()
}

/// Generators of `{z | A z <= 0, E z = 0}`.
pub(crate) fn cone_generators(dim: usize, ineqs: &[Vector], eqs: &[Vector]) -> ConeGens {
    let mut dd = DoubleDescription::new(dim, ineqs.len());
    for e in to_integer_rows(eqs) {
        dd.add(&e, None);
    }
    for (k, a) in to_integer_rows(ineqs).iter().enumerate() {
        dd.add(a, Some(k));
    }
    ConeGens {
        lines: dd.lines,
        rays: dd.rays.into_iter().map(|r| r.v).collect(),
    }
}

fn to_rational(v: &[BigInt]) -> Vector {
    v.iter().cloned().map(Rational::from_integer).collect()
}

fn sorted_unique(mut vs: Vec<Vector>) -> Vec<Vector> {
    vs.sort();
    vs.dedup();
    vs
}

pub(crate) fn polyhedron_generators(p: &Polyhedron) -> GeneratorRep {
    let n = p.dim();
    if p.is_trivially_empty() {
        return GeneratorRep::default();
    }
    let lift = |r: &Row| {
        let mut v = r.coeffs.clone();
        v.push(-r.rhs.clone());
        v
    };
    let mut ineqs: Vec<Vector> = vec![{
        let mut t = vec![Rational::zero(); n + 1];
        t[n] = -Rational::from_integer(1.into());
        t
    }];
    ineqs.extend(p.ineqs().iter().map(lift));
    let eqs: Vec<Vector> = p.eqs().iter().map(lift).collect();
    let cone = cone_generators(n + 1, &ineqs, &eqs);

    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in &cone.rays {
        let t = &r[n];
        if t.is_positive() {
            let t = Rational::from_integer(t.clone());
            vertices.push(r[..n].iter().map(|x| Rational::from_integer(x.clone()) / &t).collect());
        } else {
            rays.push(to_rational(&r[..n]));
        }
    }
    if vertices.is_empty() {
        return GeneratorRep::default();
    }
    for l in &cone.lines {
        let mut v = l[..n].to_vec();
        normalize(&mut v);
        rays.push(to_rational(&v));
        rays.push(to_rational(&v.iter().map(|x| -x).collect::<Vec<_>>()));
    }
    GeneratorRep {
        vertices: sorted_unique(vertices),
        rays: sorted_unique(rays),
    }
}

pub(crate) fn polyhedron_from_generators(dim: usize, g: &GeneratorRep) -> Polyhedron {
    if g.vertices.is_empty() {
        return Polyhedron::empty(dim);
    }
    // Polar: (a, beta) with a·v <= beta for vertices and a·r <= 0 for rays.
    let mut rows: Vec<Vector> = Vec::new();
    for v in &g.vertices {
        let mut r = v.clone();
        r.push(-Rational::from_integer(1.into()));
        rows.push(r);
    }
    for ray in &g.rays {
        let mut r = ray.clone();
        r.push(Rational::zero());
        rows.push(r);
    }
    let polar = cone_generators(dim + 1, &rows, &[]);
    let split = |v: &[BigInt]| {
        let r = to_rational(v);
        Row::new(r[..dim].to_vec(), r[dim].clone())
    };
    let ineqs = polar.rays.iter().map(|r| split(r)).collect();
    let eqs = polar.lines.iter().map(|l| split(l)).collect();
    Polyhedron::new(dim, ineqs, eqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};

    fn le(c: &[i64], b: i64) -> Row {
        Row::new(rvec(c), rat(b))
    }

    #[test]
    fn interval_vertices() {
        let p = Polyhedron::new(1, vec![le(&[1], 1), le(&[-1], 0)], vec![]);
        let g = p.generators();
        assert_eq!(g.vertices, vec![rvec(&[0]), rvec(&[1])]);
        assert!(g.rays.is_empty());
        assert!(Polyhedron::from_generators(1, g).set_equals(&p));
    }

    #[test]
    fn homogeneous_update_ray() {
        // {x >= 2, 2x' = 3x}
        let p = Polyhedron::new(2, vec![le(&[-1, 0], -2)], vec![le(&[-3, 2], 0)]);
        let g = p.generators();
        assert_eq!(g.vertices, vec![rvec(&[2, 3])]);
        assert_eq!(g.rays, vec![rvec(&[2, 3])]);
        assert!(Polyhedron::from_generators(2, g).set_equals(&p));
        let cone = p.recession_cone();
        assert_eq!(cone.generators().rays, vec![rvec(&[2, 3])]);
    }

    #[test]
    fn empty_has_no_generators() {
        let p = Polyhedron::new(2, vec![le(&[1, 0], 0), le(&[-1, 0], -1)], vec![]);
        let g = p.generators();
        assert!(g.vertices.is_empty() && g.rays.is_empty());
        assert!(Polyhedron::from_generators(2, g).is_empty());
    }

    #[test]
    fn halfspace_with_lineality() {
        // x1 + x3 >= 0 in three dimensions
        let p = Polyhedron::new(3, vec![le(&[-1, 0, -1], 0)], vec![]);
        let g = p.generators();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.rays.len(), 5);
        assert!(Polyhedron::from_generators(3, g).set_equals(&p));
    }

    #[test]
    fn universe_and_point() {
        let u = Polyhedron::universe(2);
        assert_eq!(u.generators().vertices, vec![rvec(&[0, 0])]);
        assert!(Polyhedron::from_generators(2, u.generators()).set_equals(&u));
        let pt = Polyhedron::new(2, vec![], vec![le(&[1, 0], 3), le(&[0, 1], -1)]);
        assert_eq!(pt.generators().vertices, vec![rvec(&[3, -1])]);
    }
}
