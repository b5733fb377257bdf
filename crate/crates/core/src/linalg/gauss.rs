use num_traits::{One, Zero};

use super::{LinalgError, Matrix, Rational, Vector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaussSolution {
    Unique(Vector),
    /// `particular + span(kernel)`; the kernel basis is non-empty.
    Parametric {
        particular: Vector,
        kernel: Vec<Vector>,
    },
    Inconsistent,
}

/// Reduced row echelon form. Returns the reduced matrix and its pivot columns.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = Rational::one() / &a[(r, c)];
        for j in c..cols {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                if !a[(r, j)].is_zero() {
                    let delta = &f * &a[(r, j)];
                    a[(i, j)] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).1.len()
}

/// Solves `m x = v` exactly.
pub fn gaussian_solve(m: &Matrix, v: &[Rational]) -> Result<GaussSolution, LinalgError> {
    if m.rows() != v.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            found: v.len(),
        });
    }
    let n = m.cols();
    let mut aug = Matrix::zeros(m.rows(), n + 1);
    for i in 0..m.rows() {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, n)] = v[i].clone();
    }
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&n) {
        return Ok(GaussSolution::Inconsistent);
    }
    let mut particular = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = red[(r, n)].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Ok(GaussSolution::Unique(particular));
    }
    let kernel = free
        .iter()
        .map(|&f| {
            let mut k = vec![Rational::zero(); n];
            k[f] = Rational::one();
            for (r, &c) in pivots.iter().enumerate() {
                k[c] = -red[(r, f)].clone();
            }
            k
        })
        .collect();
    Ok(GaussSolution::Parametric { particular, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, rvec};

    #[test]
    fn identity_system_is_unique() {
        let v = rvec(&[3, -1, 2]);
        assert_eq!(
            gaussian_solve(&Matrix::identity(3), &v).unwrap(),
            GaussSolution::Unique(v)
        );
    }

    #[test]
    fn underdetermined_system_is_parametric() {
        let m = Matrix::from_i64(&[&[1, 1]]);
        match gaussian_solve(&m, &rvec(&[1])).unwrap() {
            GaussSolution::Parametric { particular, kernel } => {
                assert_eq!(kernel.len(), 1);
                assert_eq!(dot(m.row(0), &particular), crate::linalg::rat(1));
                assert!(dot(m.row(0), &kernel[0]).is_zero());
            }
            other => panic!("expected parametric, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_system_is_inconsistent() {
        let m = Matrix::from_i64(&[&[1], &[1]]);
        assert_eq!(
            gaussian_solve(&m, &rvec(&[0, 1])).unwrap(),
            GaussSolution::Inconsistent
        );
    }

    #[test]
    fn rejects_bad_rhs_length() {
        assert!(gaussian_solve(&Matrix::identity(2), &rvec(&[1])).is_err());
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = Matrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&m), 2);
    }
}
