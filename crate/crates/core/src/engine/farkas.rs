//! LP assembly for template synthesis. Unknown coefficients live in LP
//! columns; "this affine function is nonnegative on P" is encoded with
//! Farkas multipliers so the whole query stays a single linear program.

use num_traits::Zero;

use crate::linalg::{lp_solve, LinearConstraint, LpProblem, LpResult, Rational, Sense, Vector};
use crate::polyhedron::Polyhedron;

/// `Σ coeff·column + constant`, sparse.
#[derive(Clone, Debug, Default)]
pub(crate) struct LinExpr {
    pub terms: Vec<(usize, Rational)>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn var(i: usize) -> Self {
        Self {
            terms: vec![(i, Rational::from_integer(1.into()))],
            constant: Rational::zero(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self {
            terms: vec![],
            constant: c,
        }
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self.constant += &other.constant;
        self
    }

    pub fn scaled(mut self, k: &Rational) -> Self {
        for t in self.terms.iter_mut() {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }

    pub fn neg(self) -> Self {
        self.scaled(&-Rational::from_integer(1.into()))
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (i, c)| acc + c * &point[*i])
    }
}

#[derive(Default)]
pub(crate) struct LpBuilder {
    nonneg: Vec<bool>,
    rows: Vec<(LinExpr, bool)>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, nonneg: bool) -> usize {
        self.nonneg.push(nonneg);
        self.nonneg.len() - 1
    }

    pub fn add_vars(&mut self, count: usize, nonneg: bool) -> Vec<usize> {
        (0..count).map(|_| self.add_var(nonneg)).collect()
    }

    /// `e = 0`
    pub fn zero(&mut self, e: LinExpr) {
        self.rows.push((e, true));
    }

    /// `e <= 0`
    pub fn nonpos(&mut self, e: LinExpr) {
        self.rows.push((e, false));
    }

    /// `g·z + h >= 0` for all `z` in `p`, where the entries of `g` and `h`
    /// are expressions in the unknowns. `p` must be nonempty.
    pub fn require_nonneg_on(&mut self, p: &Polyhedron, g: &[LinExpr], h: &LinExpr) {
        assert_eq!(g.len(), p.dim());
        let lambda = self.add_vars(p.ineqs().len(), true);
        let nu = self.add_vars(p.eqs().len(), false);
        let rows: Vec<_> = p
            .ineqs()
            .iter()
            .zip(&lambda)
            .chain(p.eqs().iter().zip(&nu))
            .collect();
        for (k, gk) in g.iter().enumerate() {
            let mut e = gk.clone();
            for (r, &v) in &rows {
                if !r.coeffs[k].is_zero() {
                    e.terms.push((v, r.coeffs[k].clone()));
                }
            }
            self.zero(e);
        }
        let mut e = h.clone().neg();
        for (r, &v) in &rows {
            if !r.rhs.is_zero() {
                e.terms.push((v, r.rhs.clone()));
            }
        }
        self.nonpos(e);
    }

    /// A feasible point, if any.
    pub fn solve(&self) -> Option<Vector> {
        let n = self.nonneg.len();
        let dense = |e: &LinExpr| {
            let mut v = vec![Rational::zero(); n];
            for (i, c) in &e.terms {
                v[*i] += c;
            }
            v
        };
        let constraints = self
            .rows
            .iter()
            .map(|(e, is_eq)| {
                let rhs = -e.constant.clone();
                if *is_eq {
                    LinearConstraint::eq(dense(e), rhs)
                } else {
                    LinearConstraint::le(dense(e), rhs)
                }
            })
            .collect();
        let mut lp = LpProblem::new(n, vec![Rational::zero(); n], Sense::Min).with_constraints(constraints);
        lp.nonneg = self.nonneg.clone();
        match lp_solve(&lp).expect("builder keeps dimensions consistent") {
            LpResult::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}
