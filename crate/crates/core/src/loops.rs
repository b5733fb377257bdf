//! Single-path linear-constraint loops `while (Bx <= b) do Ax + A'x' <= c`
//! and their transition polyhedra over `(x, x')`.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{is_zero_vec, rref, Matrix, Rational, Vector};
use crate::polyhedron::{Polyhedron, Row};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("row {row}: expected {expected} coefficients, found {found}")]
    Dimension {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("guard row {0} mentions primed variables")]
    PrimedGuard(usize),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("transition polyhedron has dimension {found}, expected {expected}")]
    PolyDimension { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowRel {
    Le,
    Eq,
}

impl RowRel {
    pub fn symbol(self) -> &'static str {
        match self {
            RowRel::Le => "<=",
            RowRel::Eq => "=",
        }
    }
}

/// `x·coeffs + xp·coeffs' rel rhs`. Guard rows have `xp = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopRow {
    pub x: Vector,
    pub xp: Vector,
    pub rel: RowRel,
    pub rhs: Rational,
}

impl LoopRow {
    pub fn guard(x: Vector, rel: RowRel, rhs: Rational) -> Self {
        let xp = vec![Rational::zero(); x.len()];
        Self { x, xp, rel, rhs }
    }

    pub fn update(x: Vector, xp: Vector, rel: RowRel, rhs: Rational) -> Self {
        Self { x, xp, rel, rhs }
    }

    fn joined(&self) -> Vector {
        self.x.iter().chain(&self.xp).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlcLoop {
    names: Vec<String>,
    guard: Vec<LoopRow>,
    update: Vec<LoopRow>,
}

impl SlcLoop {
    pub fn new(names: Vec<String>, guard: Vec<LoopRow>, update: Vec<LoopRow>) -> Result<Self, LoopError> {
        let n = names.len();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(LoopError::DuplicateName(name.clone()));
            }
        }
        for (row, r) in guard.iter().chain(&update).enumerate() {
            for len in [r.x.len(), r.xp.len()] {
                if len != n {
                    return Err(LoopError::Dimension {
                        row,
                        expected: n,
                        found: len,
                    });
                }
            }
        }
        if let Some(i) = guard.iter().position(|r| !is_zero_vec(&r.xp)) {
            return Err(LoopError::PrimedGuard(i));
        }
        Ok(Self { names, guard, update })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn guard(&self) -> &[LoopRow] {
        &self.guard
    }

    pub fn update(&self) -> &[LoopRow] {
        &self.update
    }

    fn rows(&self) -> impl Iterator<Item = &LoopRow> {
        self.guard.iter().chain(&self.update)
    }

    /// `A''` and `c''`: guard rows first, each equality split into two rows.
    pub fn block_matrix(&self) -> (Matrix, Vector) {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for r in self.rows() {
            rows.push(r.joined());
            rhs.push(r.rhs.clone());
            if r.rel == RowRel::Eq {
                rows.push(r.joined().iter().map(|c| -c).collect());
                rhs.push(-r.rhs.clone());
            }
        }
        (Matrix::from_rows(rows).expect("rows share a width"), rhs)
    }

    /// `D = (B 0; A+A' A')` over `(x, y)` with the same right-hand side as
    /// [`SlcLoop::block_matrix`].
    pub fn displacement_matrix(&self) -> (Matrix, Vector) {
        let (mut m, c) = self.block_matrix();
        let n = self.n();
        for i in 0..m.rows() {
            for j in 0..n {
                let shift = m[(i, n + j)].clone();
                m[(i, j)] += shift;
            }
        }
        (m, c)
    }

    pub fn transition(&self) -> TransitionPoly {
        let n = self.n();
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        for r in self.rows() {
            let row = Row::new(r.joined(), r.rhs.clone());
            match r.rel {
                RowRel::Le => ineqs.push(row),
                RowRel::Eq => eqs.push(row),
            }
        }
        TransitionPoly {
            names: self.names.clone(),
            poly: Polyhedron::new(2 * n, ineqs, eqs),
        }
    }
}

/// A deterministic update `x' = Ux + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineUpdate {
    pub u: Matrix,
    pub c: Vector,
}

impl AffineUpdate {
    pub fn apply(&self, x: &[Rational]) -> Vector {
        self.u
            .mul_vec(x)
            .expect("state has the loop dimension")
            .into_iter()
            .zip(&self.c)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn is_integer(&self) -> bool {
        self.u.is_integer() && self.c.iter().all(|v| v.is_integer())
    }
}

/// A transition relation over `(x, x')`, with the names of `x`.
#[derive(Clone, PartialEq)]
pub struct TransitionPoly {
    names: Vec<String>,
    poly: Polyhedron,
}

impl TransitionPoly {
    pub fn new(names: Vec<String>, poly: Polyhedron) -> Result<Self, LoopError> {
        if poly.dim() != 2 * names.len() {
            return Err(LoopError::PolyDimension {
                expected: 2 * names.len(),
                found: poly.dim(),
            });
        }
        Ok(Self { names, poly })
    }

    /// `{x' = x}`.
    pub fn identity(names: Vec<String>) -> Self {
        let n = names.len();
        let eqs = (0..n)
            .map(|i| {
                let mut c = vec![Rational::zero(); 2 * n];
                c[i] = Rational::one();
                c[n + i] = -Rational::one();
                Row::new(c, Rational::zero())
            })
            .collect();
        Self {
            names,
            poly: Polyhedron::new(2 * n, vec![], eqs),
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Names for `(x, x')`, priming the second half.
    pub fn all_names(&self) -> Vec<String> {
        self.names
            .iter()
            .cloned()
            .chain(self.names.iter().map(|s| format!("{s}'")))
            .collect()
    }

    pub fn poly(&self) -> &Polyhedron {
        &self.poly
    }

    pub fn with_poly(&self, poly: Polyhedron) -> Self {
        assert_eq!(poly.dim(), self.poly.dim());
        Self {
            names: self.names.clone(),
            poly,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_empty()
    }

    /// Enabled states, `proj_x`.
    pub fn states(&self) -> Polyhedron {
        self.poly.project(&(0..self.n()).collect::<Vec<_>>())
    }

    /// Successor states, `proj_x'`.
    pub fn targets(&self) -> Polyhedron {
        let n = self.n();
        self.poly.project(&(n..2 * n).collect::<Vec<_>>())
    }

    /// `{(x, z) | ∃y. (x, y) ∈ self ∧ (y, z) ∈ other}`.
    pub fn compose(&self, other: &TransitionPoly) -> TransitionPoly {
        let n = self.n();
        assert_eq!(n, other.n(), "composing relations of different dimension");
        let first: Vec<usize> = (0..2 * n).collect();
        let second: Vec<usize> = (n..3 * n).collect();
        let joint = self
            .poly
            .embed(3 * n, &first)
            .intersect(&other.poly.embed(3 * n, &second));
        let keep: Vec<usize> = (0..n).chain(2 * n..3 * n).collect();
        self.with_poly(joint.project(&keep))
    }

    pub fn power(&self, k: usize) -> TransitionPoly {
        let mut acc = TransitionPoly::identity(self.names.clone());
        for _ in 0..k {
            acc = acc.compose(self);
        }
        acc
    }

    /// States from which a run of at least `k` transitions exists.
    pub fn pre(&self, k: usize) -> Polyhedron {
        assert!(k >= 1, "pre needs k >= 1");
        self.power(k).states()
    }

    /// The same relation in coordinates `(x, y)` with `y = x' - x`.
    pub fn displacement(&self) -> Polyhedron {
        let n = self.n();
        self.poly.map_rows(2 * n, |c| {
            (0..2 * n)
                .map(|j| if j < n { &c[j] + &c[n + j] } else { c[j].clone() })
                .collect()
        })
    }

    /// `x' = Ux + c` when the equality rows pin every primed variable.
    pub fn extract_affine_update(&self) -> Option<AffineUpdate> {
        let n = self.n();
        if self.poly.is_empty() {
            return None;
        }
        let eqs = self.poly.eqs();
        if eqs.len() < n {
            return None;
        }
        // Columns: x' first so that pivots land on primed variables.
        let rows: Vec<Vector> = eqs
            .iter()
            .map(|r| {
                r.coeffs[n..]
                    .iter()
                    .chain(&r.coeffs[..n])
                    .chain(std::iter::once(&r.rhs))
                    .cloned()
                    .collect()
            })
            .collect();
        let (red, pivots) = rref(&Matrix::from_rows(rows).expect("uniform rows"));
        if (0..n).any(|j| !pivots.contains(&j)) {
            return None;
        }
        let mut u = Matrix::zeros(n, n);
        let mut c = vec![Rational::zero(); n];
        for (r, &j) in pivots.iter().enumerate().take(n) {
            for k in 0..n {
                u[(j, k)] = -red[(r, n + k)].clone();
            }
            c[j] = red[(r, 2 * n)].clone();
        }
        Some(AffineUpdate { u, c })
    }
}

impl fmt::Debug for TransitionPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.all_names();
        write!(f, "{}", self.poly.display_with(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// x >= 0; x' = 1 - x
    fn flip() -> SlcLoop {
        SlcLoop::new(
            names(&["x"]),
            vec![LoopRow::guard(rvec(&[-1]), RowRel::Le, rat(0))],
            vec![LoopRow::update(rvec(&[1]), rvec(&[1]), RowRel::Eq, rat(1))],
        )
        .unwrap()
    }

    #[test]
    fn rejects_malformed_loops() {
        let bad = SlcLoop::new(
            names(&["x"]),
            vec![LoopRow::update(rvec(&[1]), rvec(&[1]), RowRel::Le, rat(0))],
            vec![],
        );
        assert_eq!(bad, Err(LoopError::PrimedGuard(0)));
        let short = SlcLoop::new(names(&["x", "y"]), vec![LoopRow::guard(rvec(&[1]), RowRel::Le, rat(0))], vec![]);
        assert!(matches!(short, Err(LoopError::Dimension { .. })));
    }

    #[test]
    fn transition_and_update() {
        let t = flip().transition();
        assert_eq!(format!("{t:?}"), "{x + x' = 1, -x <= 0}");
        let upd = t.extract_affine_update().unwrap();
        assert_eq!(upd.u, Matrix::from_i64(&[&[-1]]));
        assert_eq!(upd.c, rvec(&[1]));
        assert_eq!(upd.apply(&rvec(&[3])), rvec(&[-2]));
    }

    #[test]
    fn powers_and_pre() {
        let t = flip().transition();
        assert!(t.power(1).poly().set_equals(t.poly()));
        // two steps need x >= 0 and 1 - x >= 0
        let p2 = t.pre(2);
        assert!(p2.set_equals(&Polyhedron::new(
            1,
            vec![Row::new(rvec(&[-1]), rat(0)), Row::new(rvec(&[1]), rat(1))],
            vec![]
        )));
        let id = TransitionPoly::identity(names(&["x"]));
        assert!(t.compose(&id).poly().set_equals(t.poly()));
    }

    #[test]
    fn displacement_matches_substitution() {
        let l = flip();
        let r = l.transition().displacement();
        // y = x' - x = 1 - 2x
        assert!(r.set_equals(&Polyhedron::new(
            2,
            vec![Row::new(rvec(&[-1, 0]), rat(0))],
            vec![Row::new(rvec(&[2, 1]), rat(1))]
        )));
        let (d, c) = l.displacement_matrix();
        assert_eq!(d, Matrix::from_i64(&[&[-1, 0], &[2, 1], &[-2, -1]]));
        assert_eq!(c, rvec(&[0, 1, -1]));
    }

    #[test]
    fn nondeterministic_update_has_no_affine_form() {
        let l = SlcLoop::new(
            names(&["x"]),
            vec![],
            vec![LoopRow::update(rvec(&[-1]), rvec(&[1]), RowRel::Le, rat(0))],
        )
        .unwrap();
        assert!(l.transition().extract_affine_update().is_none());
    }
}
