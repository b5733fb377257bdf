//! Projection by equality substitution followed by Fourier-Motzkin
//! elimination with LP-based redundancy pruning.

use num_traits::{Signed, Zero};

use super::{Polyhedron, Row};
use crate::linalg::Rational;

fn axpy(dst: &Row, f: &Rational, src: &Row) -> Row {
    Row::new(
        dst.coeffs.iter().zip(&src.coeffs).map(|(d, s)| d - f * s).collect(),
        &dst.rhs - f * &src.rhs,
    )
}

/// Eliminates `v` from `rows` using the equality `pivot` (with `pivot[v] != 0`).
fn substitute(rows: &[Row], pivot: &Row, v: usize) -> Vec<Row> {
    rows.iter()
        .map(|r| {
            if r.coeffs[v].is_zero() {
                r.clone()
            } else {
                axpy(r, &(&r.coeffs[v] / &pivot.coeffs[v]), pivot)
            }
        })
        .collect()
}

fn eliminate_inequality_var(ineqs: &[Row], v: usize) -> Vec<Row> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for r in ineqs {
        if r.coeffs[v].is_positive() {
            pos.push(r);
        } else if r.coeffs[v].is_negative() {
            neg.push(r);
        } else {
            out.push(r.clone());
        }
    }
    for p in &pos {
        for q in &neg {
            // p/p_v - q/q_v has a zero v-coefficient and positive weights.
            let a = p.coeffs[v].clone();
            let b = -q.coeffs[v].clone();
            out.push(Row::new(
                p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x * &b + y * &a).collect(),
                &p.rhs * &b + &q.rhs * &a,
            ));
        }
    }
    out
}

pub(crate) fn project(p: &Polyhedron, coords: &[usize]) -> Polyhedron {
    let n = p.dim();
    assert!(coords.iter().all(|&c| c < n), "projection coordinate out of range");
    let k = coords.len();
    if p.is_empty() {
        return Polyhedron::empty(k);
    }
    let keep: Vec<bool> = (0..n).map(|i| coords.contains(&i)).collect();
    let mut current = p.clone();
    loop {
        // Substitute away eliminated variables that occur in an equality.
        // Normalising can merge opposite rows into new equalities, so this
        // repeats until none mentions an eliminated variable.
        loop {
            let found = current.eqs().iter().enumerate().find_map(|(i, r)| {
                (0..n).find(|&v| !keep[v] && !r.coeffs[v].is_zero()).map(|v| (i, v))
            });
            let Some((i, v)) = found else { break };
            let mut eqs = current.eqs().to_vec();
            let pivot = eqs.remove(i);
            let eqs = substitute(&eqs, &pivot, v);
            let ineqs = substitute(current.ineqs(), &pivot, v);
            current = Polyhedron::new(n, ineqs, eqs);
        }

        let pending: Vec<usize> = (0..n)
            .filter(|&v| !keep[v] && current.ineqs().iter().any(|r| !r.coeffs[v].is_zero()))
            .collect();
        let Some(&v) = pending.iter().min_by_key(|&&v| {
            let pos = current.ineqs().iter().filter(|r| r.coeffs[v].is_positive()).count();
            let neg = current.ineqs().iter().filter(|r| r.coeffs[v].is_negative()).count();
            (pos * neg, v)
        }) else {
            break;
        };
        let ineqs = eliminate_inequality_var(current.ineqs(), v);
        current = Polyhedron::new(n, ineqs, current.eqs().to_vec()).remove_redundant();
    }

    let pick = |r: &Row| Row::new(coords.iter().map(|&c| r.coeffs[c].clone()).collect(), r.rhs.clone());
    Polyhedron::new(
        k,
        current.ineqs().iter().map(pick).collect(),
        current.eqs().iter().map(pick).collect(),
    )
    .remove_redundant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};

    fn le(c: &[i64], b: i64) -> Row {
        Row::new(rvec(c), rat(b))
    }

    #[test]
    fn triangle_shadow() {
        // 0 <= y <= x <= 2, projected to x and to y
        let p = Polyhedron::new(2, vec![le(&[0, -1], 0), le(&[-1, 1], 0), le(&[1, 0], 2)], vec![]);
        let px = p.project(&[0]);
        assert!(px.set_equals(&Polyhedron::new(1, vec![le(&[-1], 0), le(&[1], 2)], vec![])));
        let py = p.project(&[1]);
        assert!(py.set_equals(&Polyhedron::new(1, vec![le(&[-1], 0), le(&[1], 2)], vec![])));
    }

    #[test]
    fn equality_substitution() {
        // x' = 1 - x, x >= 0 projected onto x'
        let p = Polyhedron::new(2, vec![le(&[-1, 0], 0)], vec![le(&[1, 1], 1)]);
        let q = p.project(&[1]);
        assert_eq!(q, Polyhedron::new(1, vec![le(&[1], 1)], vec![]));
    }

    #[test]
    fn reorders_coordinates() {
        let p = Polyhedron::new(3, vec![le(&[1, 0, 0], 1)], vec![le(&[0, 1, 0], 5)]);
        let q = p.project(&[1, 0]);
        assert_eq!(q, Polyhedron::new(2, vec![le(&[0, 1], 1)], vec![le(&[1, 0], 5)]));
    }

    #[test]
    fn implicit_equality_from_elimination() {
        // x <= z <= w <= x with 0 <= w <= 1, over (x, w, z). Eliminating z
        // exposes x = w, which still mentions w.
        let p = Polyhedron::new(
            3,
            vec![
                le(&[0, -1, 1], 0),
                le(&[1, 0, -1], 0),
                le(&[-1, 1, 0], 0),
                le(&[0, 1, 0], 1),
                le(&[0, -1, 0], 0),
            ],
            vec![],
        );
        let q = p.project(&[0]);
        assert!(q.set_equals(&Polyhedron::new(1, vec![le(&[-1], 0), le(&[1], 1)], vec![])));
    }

    #[test]
    fn equality_exposed_by_substitution() {
        // y = x, y <= z <= x, 0 <= z <= 1, w <= z over (x, y, z, w).
        // Substituting y turns the pair into z = x, which must be used for z.
        let p = Polyhedron::new(
            4,
            vec![
                le(&[0, 1, -1, 0], 0),
                le(&[-1, 0, 1, 0], 0),
                le(&[0, 0, 1, 0], 1),
                le(&[0, 0, -1, 0], 0),
                le(&[0, 0, -1, 1], 0),
            ],
            vec![le(&[1, -1, 0, 0], 0)],
        );
        let q = p.project(&[0, 3]);
        let expected = Polyhedron::new(2, vec![le(&[-1, 0], 0), le(&[1, 0], 1), le(&[-1, 1], 0)], vec![]);
        assert!(q.set_equals(&expected));
    }

    #[test]
    fn empty_stays_empty() {
        let p = Polyhedron::new(2, vec![le(&[1, 1], 0), le(&[-1, -1], -1)], vec![]);
        assert!(p.project(&[0]).is_trivially_empty());
    }
}
