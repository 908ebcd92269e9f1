//! Characteristic polynomials `det(zI - M)` from exact coefficient recurrences.

use super::matrix::RealMatrix;
use super::poly::RealPolynomial;
use crate::error::Result;

/// Reduces `m` to upper Hessenberg form by Householder similarity transforms.
pub fn hessenberg(m: &RealMatrix) -> RealMatrix {
    let n = m.dim();
    let mut h = m.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let alpha_sq: f64 = (k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = if x0 >= 0.0 {
            -alpha_sq.sqrt()
        } else {
            alpha_sq.sqrt()
        };
        v.iter_mut().for_each(|x| *x = 0.0);
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vnorm_sq: f64 = v[k + 1..].iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // H <- (I - beta v v^T) H
        for j in 0..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * h[(i, j)]).sum();
            let s = s * beta;
            for i in k + 1..n {
                h[(i, j)] -= s * v[i];
            }
        }
        // H <- H (I - beta v v^T)
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            let s = s * beta;
            for j in k + 1..n {
                h[(i, j)] -= s * v[j];
            }
        }
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

/// Characteristic polynomial `det(zI - M)`.
///
/// The matrix is first brought to Hessenberg form by orthogonal similarity;
/// the coefficients then follow from La Budde's recurrence over the leading
/// principal submatrices. No eigenvalues are computed.
pub fn char_poly(m: &RealMatrix) -> Result<RealPolynomial> {
    let h = hessenberg(m);
    let n = h.dim();
    // p[k] holds det(zI - H_k) for the leading k x k block, highest degree first.
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    p.push(vec![1.0]);
    for k in 1..=n {
        let prev = &p[k - 1];
        let mut pk = vec![0.0; k + 1];
        let hkk = h[(k - 1, k - 1)];
        for (i, &c) in prev.iter().enumerate() {
            pk[i] += c;
            pk[i + 1] -= hkk * c;
        }
        let mut prod = 1.0;
        for i in (1..k).rev() {
            prod *= h[(i, i - 1)];
            let w = h[(i - 1, k - 1)] * prod;
            if w == 0.0 {
                continue;
            }
            let q = &p[i - 1];
            let off = k + 1 - q.len();
            for (j, &c) in q.iter().enumerate() {
                pk[off + j] -= w * c;
            }
        }
        p.push(pk);
    }
    RealPolynomial::new(p.pop().unwrap_or_else(|| vec![1.0]))
}

/// Faddeev–LeVerrier trace recurrence for `det(zI - M)`.
///
/// Numerically fragile once the spectrum has a dominant eigenvalue; kept as an
/// independent route for small, well-conditioned matrices.
pub fn char_poly_faddeev_leverrier(m: &RealMatrix) -> Result<RealPolynomial> {
    let n = m.dim();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut mk = RealMatrix::zeros(n);
    let eye = RealMatrix::identity(n);
    for k in 1..=n {
        mk = m.matmul(&mk).add(&eye.scale(coeffs[k - 1]));
        let c = -m.matmul(&mk).trace() / k as f64;
        coeffs.push(c);
    }
    RealPolynomial::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_coeffs(p: &RealPolynomial, expected: &[f64], tol: f64) {
        assert_eq!(p.coeffs().len(), expected.len());
        for (a, b) in p.coeffs().iter().zip(expected) {
            assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{:?} vs {expected:?}", p.coeffs());
        }
    }

    #[test]
    fn identity_2x2() {
        let p = char_poly(&RealMatrix::identity(2)).unwrap();
        assert_coeffs(&p, &[1.0, -2.0, 1.0], 1e-15);
    }

    #[test]
    fn three_cycle() {
        let c = RealMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_coeffs(&char_poly(&c).unwrap(), &[1.0, 0.0, 0.0, -1.0], 1e-15);
        assert_coeffs(&char_poly_faddeev_leverrier(&c).unwrap(), &[1.0, 0.0, 0.0, -1.0], 1e-15);
    }

    #[test]
    fn conjugated_diagonal_with_integer_spectrum() {
        // S diag(1,2,3,4) S^{-1} with a unimodular integer S, so the product is
        // an integer matrix with spectrum {1,2,3,4}.
        let s = RealMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let s_inv = RealMatrix::from_rows(&[
            vec![1.0, -1.0, 1.0, -1.0],
            vec![0.0, 1.0, -1.0, 1.0],
            vec![0.0, 0.0, 1.0, -1.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(s.matmul(&s_inv), RealMatrix::identity(4));
        let m = s.matmul(&RealMatrix::diag(&[1.0, 2.0, 3.0, 4.0])).matmul(&s_inv);
        let expected = [1.0, -10.0, 35.0, -50.0, 24.0];
        assert_coeffs(&char_poly(&m).unwrap(), &expected, 1e-13);
        assert_coeffs(&char_poly_faddeev_leverrier(&m).unwrap(), &expected, 1e-13);
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let m = RealMatrix::from_fn(6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let h = hessenberg(&m);
        assert!((h.trace() - m.trace()).abs() < 1e-12);
        for i in 0..6usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn empty_matrix_has_unit_polynomial() {
        assert_eq!(char_poly(&RealMatrix::zeros(0)).unwrap().coeffs(), &[1.0]);
    }
}
