//! Integer points: exact solving of integer linear systems via a column
//! Hermite reduction, an integrality test on minimal faces, and a small
//! branch-and-bound search.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Polyhedron, Row};
use crate::linalg::{dot, primitive_integer, Rational, Vector};

/// Outcome of [`integer_point`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerSearch {
    Found(Vector),
    Infeasible,
    /// The node budget ran out before the search closed.
    Exhausted,
}

/// Some integer `x` with `a·x = b` for every row, if one exists.
pub fn integer_point_in_affine(dim: usize, eqs: &[Row]) -> Option<Vector> {
    let mut h: Vec<Vec<BigInt>> = Vec::with_capacity(eqs.len());
    let mut rhs: Vec<BigInt> = Vec::with_capacity(eqs.len());
    for r in eqs {
        assert_eq!(r.coeffs.len(), dim);
        let mut all = r.coeffs.clone();
        all.push(r.rhs.clone());
        let mut ints = primitive_integer(&all);
        rhs.push(ints.pop().unwrap());
        h.push(ints);
    }
    let m = h.len();
    let mut u: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| (0..dim).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();

    let col_op = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, dst: usize, q: &BigInt, src: usize| {
        // column dst -= q * column src
        for row in h.iter_mut().chain(u.iter_mut()) {
            if !row[src].is_zero() {
                let t = q * &row[src];
                row[dst] -= t;
            }
        }
    };
    let swap = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, a: usize, b: usize| {
        for row in h.iter_mut().chain(u.iter_mut()) {
            row.swap(a, b);
        }
    };

    let mut pivots: Vec<Option<usize>> = vec![None; m];
    let mut c = 0;
    for i in 0..m {
        if c == dim {
            break;
        }
        loop {
            // Smallest nonzero entry of row i among columns c.. goes to column c.
            let best = (c..dim)
                .filter(|&j| !h[i][j].is_zero())
                .min_by(|&a, &b| h[i][a].abs().cmp(&h[i][b].abs()));
            let Some(best) = best else { break };
            swap(&mut h, &mut u, c, best);
            let mut done = true;
            for j in c + 1..dim {
                if !h[i][j].is_zero() {
                    let q = &h[i][j] / &h[i][c];
                    col_op(&mut h, &mut u, j, &q, c);
                    done &= h[i][j].is_zero();
                }
            }
            if done {
                pivots[i] = Some(c);
                c += 1;
                break;
            }
        }
    }

    let mut y = vec![BigInt::zero(); dim];
    for i in 0..m {
        let mut s = rhs[i].clone();
        for (j, yj) in y.iter().enumerate() {
            if !h[i][j].is_zero() && !yj.is_zero() && Some(j) != pivots[i] {
                s -= &h[i][j] * yj;
            }
        }
        match pivots[i] {
            Some(p) => {
                let (q, r) = s.div_rem(&h[i][p]);
                if !r.is_zero() {
                    return None;
                }
                y[p] = q;
            }
            None if !s.is_zero() => return None,
            None => {}
        }
    }
    Some(
        (0..dim)
            .map(|i| {
                let v: BigInt = u[i].iter().zip(&y).map(|(a, b)| a * b).sum();
                Rational::from_integer(v)
            })
            .collect(),
    )
}

/// The minimal face of `p` through vertex `v`, as the affine set where the
/// tight rows hold with equality.
fn minimal_face(p: &Polyhedron, v: &[Rational]) -> Vec<Row> {
    p.ineqs()
        .iter()
        .filter(|r| dot(&r.coeffs, v) == r.rhs)
        .chain(p.eqs())
        .cloned()
        .collect()
}

pub(crate) fn is_integral(p: &Polyhedron) -> bool {
    p.generators()
        .vertices
        .iter()
        .all(|v| integer_point_in_affine(p.dim(), &minimal_face(p, v)).is_some())
}

/// Looks for an integer point of `p`, exploring at most `node_limit` LP nodes.
pub fn integer_point(p: &Polyhedron, node_limit: usize) -> IntegerSearch {
    let g = p.generators();
    if g.is_empty() || integer_point_in_affine(p.dim(), p.eqs()).is_none() {
        return IntegerSearch::Infeasible;
    }
    for v in &g.vertices {
        if let Some(x) = integer_point_in_affine(p.dim(), &minimal_face(p, v)) {
            return IntegerSearch::Found(x);
        }
    }

    // Each node keeps one lower and one upper bound per variable, so node
    // LPs never grow beyond the rows of `p` plus 2n.
    type Bounds = Vec<(Option<BigInt>, Option<BigInt>)>;
    let unit = |j: usize, s: i64| -> Vector {
        let mut u = vec![Rational::zero(); p.dim()];
        u[j] = Rational::from_integer(s.into());
        u
    };
    let node_poly = |b: &Bounds| -> Polyhedron {
        let mut rows = Vec::new();
        for (j, (lo, hi)) in b.iter().enumerate() {
            if let Some(lo) = lo {
                rows.push(Row::new(unit(j, -1), Rational::from_integer(-lo)));
            }
            if let Some(hi) = hi {
                rows.push(Row::new(unit(j, 1), Rational::from_integer(hi.clone())));
            }
        }
        p.with_rows(rows, vec![])
    };
    let mut stack: Vec<Bounds> = vec![vec![(None, None); p.dim()]];
    let mut nodes = 0;
    while let Some(bounds) = stack.pop() {
        if nodes == node_limit {
            return IntegerSearch::Exhausted;
        }
        nodes += 1;
        let Some(x) = node_poly(&bounds).feasible_point() else { continue };
        let Some(j) = x.iter().position(|c| !c.is_integer()) else {
            return IntegerSearch::Found(x);
        };
        let mut down = bounds.clone();
        down[j].1 = Some(x[j].floor().to_integer());
        let mut up = bounds;
        up[j].0 = Some(x[j].ceil().to_integer());
        stack.push(up);
        stack.push(down);
    }
    IntegerSearch::Infeasible
}
