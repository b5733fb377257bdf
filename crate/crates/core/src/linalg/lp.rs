//! Dense two-phase simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable on ratio ties), so degenerate problems cannot cycle.

use num_traits::{One, Signed, Zero};

use super::{dot, LinalgError, Rational, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
    /// Strict relations are only accepted by [`strict_feasible`].
    Lt,
    Gt,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vector,
    pub rel: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vector, rel: Relation, rhs: Rational) -> Self {
        Self { coeffs, rel, rhs }
    }

    pub fn le(coeffs: Vector, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn ge(coeffs: Vector, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(coeffs: Vector, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn lt(coeffs: Vector, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Lt, rhs)
    }

    pub fn gt(coeffs: Vector, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Gt, rhs)
    }

    pub fn holds_at(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.rel {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Gt => lhs > self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<LinearConstraint>,
    /// Per-variable sign restriction; variables beyond its length are free.
    pub nonneg: Vec<bool>,
    pub objective: Vector,
    pub sense: Sense,
}

impl LpProblem {
    pub fn new(num_vars: usize, objective: Vector, sense: Sense) -> Self {
        Self {
            num_vars,
            constraints: Vec::new(),
            nonneg: Vec::new(),
            objective,
            sense,
        }
    }

    pub fn feasibility(num_vars: usize) -> Self {
        Self::new(num_vars, vec![Rational::zero(); num_vars], Sense::Max)
    }

    pub fn with_constraints(mut self, constraints: Vec<LinearConstraint>) -> Self {
        self.constraints = constraints;
        self
    }

    fn is_nonneg(&self, j: usize) -> bool {
        self.nonneg.get(j).copied().unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { point: Vector, value: Rational },
    Unbounded,
    Infeasible,
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpResult::Infeasible)
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&Vector> {
        match self {
            LpResult::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

fn check_dims(p: &LpProblem) -> Result<(), LinalgError> {
    if p.objective.len() != p.num_vars {
        return Err(LinalgError::DimensionMismatch {
            expected: p.num_vars,
            found: p.objective.len(),
        });
    }
    for c in &p.constraints {
        if c.coeffs.len() != p.num_vars {
            return Err(LinalgError::DimensionMismatch {
                expected: p.num_vars,
                found: c.coeffs.len(),
            });
        }
    }
    Ok(())
}

pub fn lp_solve(problem: &LpProblem) -> Result<LpResult, LinalgError> {
    check_dims(problem)?;
    assert!(
        problem.constraints.iter().all(|c| !c.rel.is_strict()),
        "strict constraints must go through strict_feasible"
    );
    Ok(Tableau::build(problem).solve(problem))
}

/// Decides whether some rational point satisfies every constraint, with the
/// strict ones holding strictly.
pub fn strict_feasible(
    num_vars: usize,
    constraints: &[LinearConstraint],
) -> Result<bool, LinalgError> {
    Ok(strict_witness(num_vars, constraints)?.is_some())
}

/// Like [`strict_feasible`] but returns a witness point.
///
/// A shared slack `eps` in `[0, 1]` is subtracted from every strict row and
/// maximised; the strict system is feasible iff the optimum is positive.
pub fn strict_witness(
    num_vars: usize,
    constraints: &[LinearConstraint],
) -> Result<Option<Vector>, LinalgError> {
    for c in constraints {
        if c.coeffs.len() != num_vars {
            return Err(LinalgError::DimensionMismatch {
                expected: num_vars,
                found: c.coeffs.len(),
            });
        }
    }
    let has_strict = constraints.iter().any(|c| c.rel.is_strict());
    if !has_strict {
        let lp = LpProblem::feasibility(num_vars).with_constraints(constraints.to_vec());
        return Ok(lp_solve(&lp)?.point().cloned());
    }
    let eps = num_vars;
    let mut rows = Vec::with_capacity(constraints.len() + 1);
    for c in constraints {
        let mut coeffs = c.coeffs.clone();
        let (rel, e) = match c.rel {
            Relation::Lt => (Relation::Le, Rational::one()),
            Relation::Gt => (Relation::Ge, -Rational::one()),
            r => (r, Rational::zero()),
        };
        coeffs.push(e);
        rows.push(LinearConstraint::new(coeffs, rel, c.rhs.clone()));
    }
    let mut cap = vec![Rational::zero(); num_vars + 1];
    cap[eps] = Rational::one();
    rows.push(LinearConstraint::le(cap.clone(), Rational::one()));
    let mut nonneg = vec![false; num_vars + 1];
    nonneg[eps] = true;
    let lp = LpProblem {
        num_vars: num_vars + 1,
        constraints: rows,
        nonneg,
        objective: cap,
        sense: Sense::Max,
    };
    match lp_solve(&lp)? {
        LpResult::Optimal { mut point, value } if value.is_positive() => {
            point.truncate(num_vars);
            Ok(Some(point))
        }
        _ => Ok(None),
    }
}

/// Column bookkeeping: how an original variable maps onto tableau columns.
#[derive(Clone, Copy)]
enum VarCols {
    NonNeg(usize),
    Split(usize, usize),
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    first_artificial: usize,
    var_cols: Vec<VarCols>,
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let mut next = 0;
        let var_cols: Vec<VarCols> = (0..p.num_vars)
            .map(|j| {
                if p.is_nonneg(j) {
                    next += 1;
                    VarCols::NonNeg(next - 1)
                } else {
                    next += 2;
                    VarCols::Split(next - 2, next - 1)
                }
            })
            .collect();
        let structural = next;

        // Normalise right-hand sides to be nonnegative.
        let rows: Vec<(Vec<Rational>, Relation, Rational)> = p
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = vec![Rational::zero(); structural];
                for (j, a) in c.coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    match var_cols[j] {
                        VarCols::NonNeg(k) => coeffs[k] = a.clone(),
                        VarCols::Split(k, l) => {
                            coeffs[k] = a.clone();
                            coeffs[l] = -a.clone();
                        }
                    }
                }
                if c.rhs.is_negative() {
                    let rel = match c.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        r => r,
                    };
                    (coeffs.into_iter().map(|a| -a).collect(), rel, -c.rhs.clone())
                } else {
                    (coeffs, c.rel, c.rhs.clone())
                }
            })
            .collect();

        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = structural + slacks + artificials;
        let first_artificial = structural + slacks;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut a) = (structural, first_artificial);
        for (coeffs, rel, rhs) in rows {
            let mut row = coeffs;
            row.resize(cols + 1, Rational::zero());
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = Rational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Rational::one();
                    s += 1;
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Lt | Relation::Gt => unreachable!(),
            }
            t.push(row);
        }
        Self {
            t,
            basis,
            cols,
            first_artificial,
            var_cols,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational]) {
        let inv = Rational::one() / &self.t[r][c];
        for v in self.t[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = self.t[r].clone();
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                obj[j] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for minimising `cost` under the current basis.
    fn objective_row(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            let f = cost[b].clone();
            for j in 0..=self.cols {
                if !self.t[i][j].is_zero() {
                    let delta = &f * &self.t[i][j];
                    obj[j] -= delta;
                }
            }
        }
        obj
    }

    /// Runs simplex iterations minimising `obj`; returns false if unbounded.
    fn run(&mut self, obj: &mut [Rational], allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c, obj),
                None => return false,
            }
        }
    }

    fn solve(mut self, p: &LpProblem) -> LpResult {
        if self.first_artificial < self.cols {
            let mut cost = vec![Rational::zero(); self.cols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = Rational::one();
            }
            let mut obj = self.objective_row(&cost);
            let bounded = self.run(&mut obj, self.cols);
            debug_assert!(bounded, "phase one is bounded below by zero");
            if !obj[self.cols].is_zero() {
                return LpResult::Infeasible;
            }
            self.drive_out_artificials(&mut obj);
        }

        let mut cost = vec![Rational::zero(); self.cols];
        for (j, c) in p.objective.iter().enumerate() {
            let c = match p.sense {
                Sense::Min => c.clone(),
                Sense::Max => -c.clone(),
            };
            match self.var_cols[j] {
                VarCols::NonNeg(k) => cost[k] = c,
                VarCols::Split(k, l) => {
                    cost[l] = -c.clone();
                    cost[k] = c;
                }
            }
        }
        let mut obj = self.objective_row(&cost);
        if !self.run(&mut obj, self.first_artificial) {
            return LpResult::Unbounded;
        }

        let mut col_values = vec![Rational::zero(); self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            col_values[b] = self.t[i][self.cols].clone();
        }
        let point: Vector = self
            .var_cols
            .iter()
            .map(|vc| match *vc {
                VarCols::NonNeg(k) => col_values[k].clone(),
                VarCols::Split(k, l) => &col_values[k] - &col_values[l],
            })
            .collect();
        let value = dot(&p.objective, &point);
        LpResult::Optimal { point, value }
    }

    fn drive_out_artificials(&mut self, obj: &mut [Rational]) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.t[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j, obj);
                    i += 1;
                }
                None => {
                    // Row is a combination of the others.
                    self.t.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio, rvec};

    fn solve_1d(rows: Vec<LinearConstraint>, sense: Sense) -> LpResult {
        let lp = LpProblem::new(1, rvec(&[1]), sense).with_constraints(rows);
        lp_solve(&lp).unwrap()
    }

    #[test]
    fn single_upper_bound() {
        let r = solve_1d(vec![LinearConstraint::le(rvec(&[1]), rat(1))], Sense::Max);
        assert_eq!(
            r,
            LpResult::Optimal {
                point: rvec(&[1]),
                value: rat(1)
            }
        );
    }

    #[test]
    fn unbounded_and_infeasible() {
        let r = solve_1d(vec![LinearConstraint::ge(rvec(&[1]), rat(0))], Sense::Max);
        assert_eq!(r, LpResult::Unbounded);
        let r = solve_1d(
            vec![
                LinearConstraint::le(rvec(&[1]), rat(0)),
                LinearConstraint::ge(rvec(&[1]), rat(1)),
            ],
            Sense::Max,
        );
        assert_eq!(r, LpResult::Infeasible);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let lp = LpProblem::new(2, rvec(&[1, 0]), Sense::Max)
            .with_constraints(vec![LinearConstraint::le(rvec(&[1]), rat(1))]);
        assert!(lp_solve(&lp).is_err());
    }

    #[test]
    fn strict_systems() {
        let x_lt_1 = LinearConstraint::lt(rvec(&[1]), rat(1));
        assert!(strict_feasible(1, &[x_lt_1.clone(), LinearConstraint::gt(rvec(&[1]), rat(0))]).unwrap());
        assert!(!strict_feasible(
            1,
            &[
                LinearConstraint::lt(rvec(&[1]), rat(0)),
                LinearConstraint::ge(rvec(&[1]), rat(0))
            ]
        )
        .unwrap());
        let half = LinearConstraint::ge(rvec(&[1]), ratio(1, 2));
        let w = strict_witness(1, &[x_lt_1.clone(), half.clone()]).unwrap().unwrap();
        assert!(x_lt_1.holds_at(&w) && half.holds_at(&w));
        let hand = vec![ratio(3, 4)];
        assert!(x_lt_1.holds_at(&hand) && half.holds_at(&hand));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example under the largest-coefficient rule (Beale).
        let rows = vec![
            LinearConstraint::le(vec![ratio(1, 4), rat(-60), ratio(-1, 25), rat(9)], rat(0)),
            LinearConstraint::le(vec![ratio(1, 2), rat(-90), ratio(-1, 50), rat(3)], rat(0)),
            LinearConstraint::le(rvec(&[0, 0, 1, 0]), rat(1)),
        ];
        let mut lp = LpProblem::new(4, vec![ratio(3, 4), rat(-150), ratio(1, 50), rat(-6)], Sense::Max)
            .with_constraints(rows);
        lp.nonneg = vec![true; 4];
        let r = lp_solve(&lp).unwrap();
        assert_eq!(r.value(), Some(&ratio(1, 20)));
    }

    #[test]
    fn redundant_equalities() {
        let rows = vec![
            LinearConstraint::eq(rvec(&[1, 1]), rat(2)),
            LinearConstraint::eq(rvec(&[2, 2]), rat(4)),
            LinearConstraint::le(rvec(&[1, 0]), rat(5)),
        ];
        let lp = LpProblem::new(2, rvec(&[1, 0]), Sense::Max).with_constraints(rows);
        let r = lp_solve(&lp).unwrap();
        assert_eq!(r.value(), Some(&rat(5)));
        assert_eq!(r.point(), Some(&rvec(&[5, -3])));
    }
}
