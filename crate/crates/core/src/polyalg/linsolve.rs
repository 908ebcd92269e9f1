use num_complex::Complex64;

use super::matrix::{cnorm2, ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `pivot_tol * max|A|` is reported as singularity.
pub fn solve_complex(a: &ComplexMatrix, b: &[Complex64], pivot_tol: f64) -> Result<Vec<Complex64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            b.len()
        )));
    }
    let scale = a.max_abs();
    let mut m: Vec<Complex64> = a.data().to_vec();
    let mut x: Vec<Complex64> = b.to_vec();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap_or(col);
        let pivot = m[p * n + col].norm();
        if pivot <= pivot_tol * scale || pivot == 0.0 {
            return Err(Error::Singular { pivot, column: col });
        }
        if p != col {
            for j in 0..n {
                m.swap(col * n + j, p * n + j);
            }
            x.swap(col, p);
        }
        let inv = m[col * n + col].inv();
        for r in col + 1..n {
            let f = m[r * n + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..n {
                let v = m[col * n + j];
                m[r * n + j] -= f * v;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s -= m[col * n + j] * x[j];
        }
        x[col] = s / m[col * n + col];
    }
    Ok(x)
}

/// Relative residual `||Ax - b|| / ||b||` (absolute when `b = 0`).
pub fn complex_residual(a: &ComplexMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<Complex64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = cnorm2(b);
    if nb == 0.0 {
        cnorm2(&r)
    } else {
        cnorm2(&r) / nb
    }
}

/// Real counterpart of [`solve_complex`].
pub fn solve_real(a: &RealMatrix, b: &[f64], pivot_tol: f64) -> Result<Vec<f64>> {
    let ca = ComplexMatrix::from_real(a);
    let cb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(solve_complex(&ca, &cb, pivot_tol)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_returns_rhs() {
        let a = ComplexMatrix::from_real(&RealMatrix::identity(3));
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0)];
        assert_eq!(solve_complex(&a, &b, 1e-14).unwrap(), b);
    }

    #[test]
    fn scalar_imaginary_division() {
        // (i) x = b  =>  x = -i b
        let a = ComplexMatrix::from_row_major(1, vec![c(0.0, 1.0)]).unwrap();
        let b = vec![c(2.0, 3.0)];
        let x = solve_complex(&a, &b, 1e-14).unwrap();
        assert!((x[0] - c(0.0, -1.0) * b[0]).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = ComplexMatrix::from_real(
            &RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap(),
        );
        match solve_complex(&a, &[c(1.0, 0.0), c(0.0, 0.0)], 1e-14) {
            Err(Error::Singular { column, pivot }) => {
                assert_eq!(column, 1);
                assert!(pivot < 1e-14);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(solve_real(&a, &[3.0, 4.0], 1e-14).unwrap(), vec![4.0, 3.0]);
    }
}
