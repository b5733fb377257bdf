//! Convex rational polyhedra in constraint form, with a lazily computed
//! generator form.
//!
//! A [`Polyhedron`] stores inequality rows `a·x <= b` and equality rows
//! `a·x = b` separately. Rows are kept in a canonical form (coprime integer
//! coefficients, equalities with a positive leading coefficient, sorted and
//! deduplicated) so that printing and comparison are deterministic. All
//! semantic questions (emptiness, inclusion, redundancy) are decided with
//! the exact LP solver.

mod dd;
mod fm;
mod integer;
mod nonneg;

pub use dd::GeneratorRep;
pub use integer::{integer_point, integer_point_in_affine, IntegerSearch};
pub use nonneg::{cone_contains, cone_equal};

use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use crate::linalg::{
    dot, fmt_rational, is_zero_vec, lp_solve, primitive, LinearConstraint, LpProblem, LpResult,
    Rational, Relation, Sense, Vector,
};

/// One row of a constraint system; whether it means `<=` or `=` depends on
/// which list of the polyhedron holds it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Row {
    pub coeffs: Vector,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vector, rhs: Rational) -> Self {
        Self { coeffs, rhs }
    }

    fn scaled_to_integers(&self) -> Row {
        let mut all = self.coeffs.clone();
        all.push(self.rhs.clone());
        let mut p = primitive(&all);
        let rhs = p.pop().unwrap();
        Row { coeffs: p, rhs }
    }

    fn negated(&self) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rhs: -self.rhs.clone(),
        }
    }

    fn canonical_eq(&self) -> Row {
        let r = self.scaled_to_integers();
        match r.coeffs.iter().find(|c| !c.is_zero()) {
            Some(c) if c.is_negative() => r.negated(),
            _ => r,
        }
    }
}

/// An affine function `a·x + b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineFunc {
    pub coeffs: Vector,
    pub constant: Rational,
}

impl AffineFunc {
    pub fn new(coeffs: Vector, constant: Rational) -> Self {
        Self { coeffs, constant }
    }

    pub fn constant_fn(dim: usize, c: Rational) -> Self {
        Self::new(vec![Rational::zero(); dim], c)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) + &self.constant
    }

    /// Coefficients followed by the constant, i.e. the `(a, b)` vector.
    pub fn as_vector(&self) -> Vector {
        let mut v = self.coeffs.clone();
        v.push(self.constant.clone());
        v
    }

    pub fn from_vector(mut v: Vector) -> Self {
        let constant = v.pop().expect("affine vector needs a constant");
        Self::new(v, constant)
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> AffineDisplay<'a> {
        AffineDisplay { f: self, names }
    }
}

pub struct AffineDisplay<'a> {
    f: &'a AffineFunc,
    names: &'a [String],
}

impl fmt::Display for AffineDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(f, &self.f.coeffs, self.names, Some(&self.f.constant))
    }
}

/// Writes `c1*x1 + c2*x2 + k`, skipping zero terms.
pub(crate) fn write_linear(
    f: &mut dyn fmt::Write,
    coeffs: &[Rational],
    names: &[String],
    constant: Option<&Rational>,
) -> fmt::Result {
    let mut first = true;
    for (c, name) in coeffs.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sep = match (first, c.is_negative()) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        if mag.is_one() {
            write!(f, "{sep}{name}")?;
        } else {
            write!(f, "{sep}{}*{name}", fmt_rational(&mag))?;
        }
        first = false;
    }
    if let Some(k) = constant {
        if first {
            write!(f, "{}", fmt_rational(k))?;
        } else if !k.is_zero() {
            let sep = if k.is_negative() { " - " } else { " + " };
            write!(f, "{sep}{}", fmt_rational(&k.abs()))?;
        }
    } else if first {
        write!(f, "0")?;
    }
    Ok(())
}

#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    ineqs: Vec<Row>,
    eqs: Vec<Row>,
    gens: OnceLock<GeneratorRep>,
}

impl PartialEq for Polyhedron {
    /// Syntactic equality of the canonical rows; use [`Polyhedron::set_equals`]
    /// for the semantic question.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.ineqs == other.ineqs && self.eqs == other.eqs
    }
}

impl Polyhedron {
    /// Builds a polyhedron from `ineqs` (`a·x <= b`) and `eqs` (`a·x = b`).
    pub fn new(dim: usize, ineqs: Vec<Row>, eqs: Vec<Row>) -> Self {
        for r in ineqs.iter().chain(&eqs) {
            assert_eq!(r.coeffs.len(), dim, "row dimension mismatch");
        }
        let mut ineqs: Vec<Row> = ineqs.iter().map(Row::scaled_to_integers).collect();
        let mut eqs: Vec<Row> = eqs.iter().map(Row::canonical_eq).collect();

        let mut infeasible = false;
        ineqs.retain(|r| {
            if is_zero_vec(&r.coeffs) {
                infeasible |= r.rhs.is_negative();
                false
            } else {
                true
            }
        });
        eqs.retain(|r| {
            if is_zero_vec(&r.coeffs) {
                infeasible |= !r.rhs.is_zero();
                false
            } else {
                true
            }
        });
        if infeasible {
            return Self::empty(dim);
        }

        ineqs.sort();
        ineqs.dedup();
        // a·x <= b together with -a·x <= -b is an equality.
        let mut paired = vec![false; ineqs.len()];
        for i in 0..ineqs.len() {
            if paired[i] {
                continue;
            }
            let neg = ineqs[i].negated();
            if let Ok(j) = ineqs.binary_search(&neg) {
                if !paired[j] && j != i {
                    paired[i] = true;
                    paired[j] = true;
                    eqs.push(ineqs[i].canonical_eq());
                }
            }
        }
        let ineqs: Vec<Row> = ineqs
            .into_iter()
            .zip(paired)
            .filter_map(|(r, p)| (!p).then_some(r))
            .collect();
        eqs.sort();
        eqs.dedup();
        Self {
            dim,
            ineqs,
            eqs,
            gens: OnceLock::new(),
        }
    }

    pub fn universe(dim: usize) -> Self {
        Self::new(dim, vec![], vec![])
    }

    /// Canonical empty polyhedron, written as the single row `0 <= -1`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            ineqs: vec![Row::new(vec![Rational::zero(); dim], -Rational::one())],
            eqs: vec![],
            gens: OnceLock::new(),
        }
    }

    /// Builds from general constraints; strict relations are rejected.
    pub fn from_constraints(dim: usize, cs: &[LinearConstraint]) -> Self {
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        for c in cs {
            let row = Row::new(c.coeffs.clone(), c.rhs.clone());
            match c.rel {
                Relation::Le => ineqs.push(row),
                Relation::Ge => ineqs.push(row.negated()),
                Relation::Eq => eqs.push(row),
                Relation::Lt | Relation::Gt => panic!("polyhedra are closed"),
            }
        }
        Self::new(dim, ineqs, eqs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineqs(&self) -> &[Row] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[Row] {
        &self.eqs
    }

    pub fn row_count(&self) -> usize {
        self.ineqs.len() + self.eqs.len()
    }

    /// True when the rows are the canonical `0 <= -1`.
    pub fn is_trivially_empty(&self) -> bool {
        self.ineqs.len() == 1
            && self.eqs.is_empty()
            && is_zero_vec(&self.ineqs[0].coeffs)
            && self.ineqs[0].rhs.is_negative()
    }

    pub fn constraints(&self) -> Vec<LinearConstraint> {
        self.ineqs
            .iter()
            .map(|r| LinearConstraint::le(r.coeffs.clone(), r.rhs.clone()))
            .chain(
                self.eqs
                    .iter()
                    .map(|r| LinearConstraint::eq(r.coeffs.clone(), r.rhs.clone())),
            )
            .collect()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.ineqs.iter().all(|r| dot(&r.coeffs, x) <= r.rhs)
            && self.eqs.iter().all(|r| dot(&r.coeffs, x) == r.rhs)
    }

    fn optimize(&self, objective: &[Rational], sense: Sense) -> LpResult {
        let lp = LpProblem::new(self.dim, objective.to_vec(), sense)
            .with_constraints(self.constraints());
        lp_solve(&lp).expect("rows match polyhedron dimension")
    }

    pub fn maximize(&self, objective: &[Rational]) -> LpResult {
        self.optimize(objective, Sense::Max)
    }

    pub fn minimize(&self, objective: &[Rational]) -> LpResult {
        self.optimize(objective, Sense::Min)
    }

    pub fn feasible_point(&self) -> Option<Vector> {
        if self.is_trivially_empty() {
            return None;
        }
        self.maximize(&vec![Rational::zero(); self.dim]).point().cloned()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// Whether `a·x <= b` holds everywhere on this (nonempty) polyhedron.
    fn entails_le(&self, row: &Row) -> bool {
        match self.maximize(&row.coeffs) {
            LpResult::Optimal { value, .. } => value <= row.rhs,
            LpResult::Unbounded => false,
            LpResult::Infeasible => true,
        }
    }

    fn entails_eq(&self, row: &Row) -> bool {
        self.entails_le(row) && self.entails_le(&row.negated())
    }

    /// `self ⊇ other`, decided by checking every row of `self` over `other`.
    pub fn includes(&self, other: &Polyhedron) -> bool {
        assert_eq!(self.dim, other.dim);
        if other.is_empty() {
            return true;
        }
        self.ineqs.iter().all(|r| other.entails_le(r))
            && self.eqs.iter().all(|r| other.entails_eq(r))
    }

    pub fn set_equals(&self, other: &Polyhedron) -> bool {
        self.includes(other) && other.includes(self)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        let ineqs = self.ineqs.iter().chain(&other.ineqs).cloned().collect();
        let eqs = self.eqs.iter().chain(&other.eqs).cloned().collect();
        Polyhedron::new(self.dim, ineqs, eqs)
    }

    pub fn with_rows(&self, ineqs: Vec<Row>, eqs: Vec<Row>) -> Polyhedron {
        self.intersect(&Polyhedron::new(self.dim, ineqs, eqs))
    }

    /// Drops every row whose removal leaves the set unchanged.
    pub fn remove_redundant(&self) -> Polyhedron {
        if self.is_empty() {
            return Polyhedron::empty(self.dim);
        }
        let mut ineqs = self.ineqs.clone();
        let mut i = 0;
        while i < ineqs.len() {
            let row = ineqs.remove(i);
            let rest = Polyhedron::raw(self.dim, ineqs.clone(), self.eqs.clone());
            if !rest.entails_le(&row) {
                ineqs.insert(i, row);
                i += 1;
            }
        }
        let mut eqs = self.eqs.clone();
        let mut i = 0;
        while i < eqs.len() {
            let row = eqs.remove(i);
            let rest = Polyhedron::raw(self.dim, ineqs.clone(), eqs.clone());
            if !rest.entails_eq(&row) {
                eqs.insert(i, row);
                i += 1;
            }
        }
        Polyhedron::new(self.dim, ineqs, eqs)
    }

    /// Assembles rows that are already canonical, skipping normalisation.
    fn raw(dim: usize, ineqs: Vec<Row>, eqs: Vec<Row>) -> Polyhedron {
        Polyhedron {
            dim,
            ineqs,
            eqs,
            gens: OnceLock::new(),
        }
    }

    /// `{y | A y <= 0}` with equalities homogenised. The empty set maps to itself.
    pub fn recession_cone(&self) -> Polyhedron {
        if self.is_empty() {
            return Polyhedron::empty(self.dim);
        }
        let zero = |r: &Row| Row::new(r.coeffs.clone(), Rational::zero());
        Polyhedron::new(
            self.dim,
            self.ineqs.iter().map(zero).collect(),
            self.eqs.iter().map(zero).collect(),
        )
    }

    /// Re-embeds into a space of dimension `new_dim`, sending coordinate `i`
    /// to `mapping[i]`.
    pub fn embed(&self, new_dim: usize, mapping: &[usize]) -> Polyhedron {
        assert_eq!(mapping.len(), self.dim);
        let lift = |r: &Row| {
            let mut coeffs = vec![Rational::zero(); new_dim];
            for (i, c) in r.coeffs.iter().enumerate() {
                coeffs[mapping[i]] = c.clone();
            }
            Row::new(coeffs, r.rhs.clone())
        };
        Polyhedron::new(
            new_dim,
            self.ineqs.iter().map(lift).collect(),
            self.eqs.iter().map(lift).collect(),
        )
    }

    /// Applies a linear map to every coefficient vector (rhs untouched).
    pub fn map_rows(&self, new_dim: usize, f: impl Fn(&[Rational]) -> Vector) -> Polyhedron {
        let m = |r: &Row| Row::new(f(&r.coeffs), r.rhs.clone());
        Polyhedron::new(
            new_dim,
            self.ineqs.iter().map(m).collect(),
            self.eqs.iter().map(m).collect(),
        )
    }

    pub fn generators(&self) -> &GeneratorRep {
        self.gens.get_or_init(|| dd::polyhedron_generators(self))
    }

    pub fn from_generators(dim: usize, g: &GeneratorRep) -> Polyhedron {
        dd::polyhedron_from_generators(dim, g)
    }

    /// Orthogonal projection onto `coords` (in that order), by Fourier-Motzkin.
    pub fn project(&self, coords: &[usize]) -> Polyhedron {
        fm::project(self, coords)
    }

    /// Every minimal face contains an integer point.
    pub fn is_integral(&self) -> bool {
        integer::is_integral(self)
    }

    /// Generators of the cone of affine functions nonnegative on the
    /// projection onto the first `n` coordinates.
    pub fn nonneg_cone(&self, n: usize) -> Vec<AffineFunc> {
        nonneg::nonneg_cone(self, n)
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { p: self, names }
    }

    pub fn default_names(dim: usize) -> Vec<String> {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }
}

pub struct PolyDisplay<'a> {
    p: &'a Polyhedron,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_trivially_empty() {
            return write!(f, "{{false}}");
        }
        let mut parts = Vec::new();
        for (rows, op) in [(&self.p.eqs, "="), (&self.p.ineqs, "<=")] {
            for r in rows.iter() {
                let mut s = String::new();
                write_linear(&mut s, &r.coeffs, self.names, None)?;
                parts.push(format!("{s} {op} {}", fmt_rational(&r.rhs)));
            }
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Polyhedron::default_names(self.dim);
        write!(f, "Polyhedron[{}]{}", self.dim, self.display_with(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};

    fn le(c: &[i64], b: i64) -> Row {
        Row::new(rvec(c), rat(b))
    }

    #[test]
    fn emptiness() {
        let p = Polyhedron::new(1, vec![le(&[1], 0), le(&[-1], -1)], vec![]);
        assert!(p.is_empty());
        assert!(!Polyhedron::new(1, vec![le(&[-1], 0)], vec![]).is_empty());
        assert!(Polyhedron::new(1, vec![le(&[0], -1)], vec![]).is_trivially_empty());
    }

    #[test]
    fn inclusion_and_intersection() {
        let x_ge_0 = Polyhedron::new(1, vec![le(&[-1], 0)], vec![]);
        let x_ge_1 = Polyhedron::new(1, vec![le(&[-1], -1)], vec![]);
        assert!(x_ge_0.includes(&x_ge_1));
        assert!(!x_ge_1.includes(&x_ge_0));
        let x_le_1 = Polyhedron::new(1, vec![le(&[1], 1)], vec![]);
        let meet = x_le_1.intersect(&x_ge_1);
        assert_eq!(meet.eqs(), &[le(&[1], 1)]);
        assert!(meet.ineqs().is_empty());
    }

    #[test]
    fn redundancy_removal() {
        let p = Polyhedron::new(1, vec![le(&[1], 1), le(&[1], 2)], vec![]);
        let r = p.remove_redundant();
        assert_eq!(r.ineqs(), &[le(&[1], 1)]);
        assert!(r.set_equals(&p));
        let q = Polyhedron::new(1, vec![le(&[1], 1)], vec![]);
        assert_eq!(q.remove_redundant(), q);
    }

    #[test]
    fn recession_cones() {
        let p = Polyhedron::new(1, vec![le(&[1], 1)], vec![]);
        assert_eq!(
            p.recession_cone(),
            Polyhedron::new(1, vec![le(&[1], 0)], vec![])
        );
        let square = Polyhedron::new(
            2,
            vec![le(&[1, 0], 1), le(&[-1, 0], 0), le(&[0, 1], 1), le(&[0, -1], 0)],
            vec![],
        );
        let cone = square.recession_cone();
        assert!(cone.set_equals(&Polyhedron::new(2, vec![], vec![le(&[1, 0], 0), le(&[0, 1], 0)])));
    }

    #[test]
    fn display_rows() {
        let p = Polyhedron::new(2, vec![le(&[-1, 0], -1)], vec![le(&[2, -1], 0)]);
        let names = vec!["x1".to_string(), "x2".to_string()];
        assert_eq!(p.display_with(&names).to_string(), "{2*x1 - x2 = 0, -x1 <= -1}");
        let f = AffineFunc::new(rvec(&[0, -1]), rat(3));
        assert_eq!(f.display_with(&names).to_string(), "-x2 + 3");
    }
}
