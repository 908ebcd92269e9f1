//! Hurwitz matrices and the Routh–Hurwitz test.

use super::matrix::RealMatrix;
use super::poly::RealPolynomial;

fn coeff(a: &[f64], j: isize) -> f64 {
    if j < 0 {
        0.0
    } else {
        a.get(j as usize).copied().unwrap_or(0.0)
    }
}

/// Leading `k x k` Hurwitz matrix `[a_{2j-i}]_{i,j=1..k}` of a coefficient
/// list `[a_0, ..., a_n]`; `a_0` need not be 1.
pub fn hurwitz_matrix_of(a: &[f64], k: usize) -> RealMatrix {
    RealMatrix::from_fn(k, |i, j| coeff(a, 2 * (j as isize + 1) - (i as isize + 1)))
}

pub fn hurwitz_matrix(p: &RealPolynomial, k: usize) -> RealMatrix {
    hurwitz_matrix_of(p.coeffs(), k)
}

/// `[Δ_1, ..., Δ_n]` for a coefficient list, each an explicit determinant.
pub fn hurwitz_determinants_of(a: &[f64]) -> Vec<f64> {
    let n = a.len().saturating_sub(1);
    (1..=n).map(|k| hurwitz_matrix_of(a, k).det()).collect()
}

/// Hurwitz determinants together with their elimination scales (see
/// [`RealMatrix::det_with_scale`]).
pub fn hurwitz_determinants_with_scales(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len().saturating_sub(1);
    (1..=n).map(|k| hurwitz_matrix_of(a, k).det_with_scale()).unzip()
}

pub fn hurwitz_determinants(p: &RealPolynomial) -> Vec<f64> {
    hurwitz_determinants_of(p.coeffs())
}

/// A monic real polynomial is Hurwitz iff every Hurwitz determinant is
/// strictly positive.
pub fn is_hurwitz(p: &RealPolynomial) -> bool {
    hurwitz_determinants(p).iter().all(|&d| d > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec()).unwrap()
    }

    #[test]
    fn cubic_closed_form() {
        let (a, b, c) = (2.5, 3.0, 1.25);
        let d = hurwitz_determinants(&poly(&[1.0, a, b, c]));
        assert_eq!(d.len(), 3);
        assert!((d[0] - a).abs() < 1e-14);
        assert!((d[1] - (a * b - c)).abs() < 1e-13);
        assert!((d[2] - c * (a * b - c)).abs() < 1e-13);
    }

    #[test]
    fn reduced_block_at_t2_is_not_hurwitz() {
        let p = poly(&[1.0, 5.0, 9.0, 48.0]);
        let d = hurwitz_determinants(&p);
        assert!((d[1] + 3.0).abs() < 1e-12);
        assert!(!is_hurwitz(&p));
    }

    #[test]
    fn boundary_at_t1_is_not_strictly_hurwitz() {
        let p = poly(&[1.0, 4.0, 6.0, 24.0]);
        assert_eq!(hurwitz_determinants(&p)[1], 0.0);
        assert!(!is_hurwitz(&p));
    }

    #[test]
    fn stable_at_half() {
        let t = 0.5;
        assert!(is_hurwitz(&poly(&[1.0, t + 3.0, 3.0 * t + 3.0, 24.0 * t])));
    }

    #[test]
    fn linear_case() {
        assert_eq!(hurwitz_determinants(&poly(&[1.0, 1.0])), vec![1.0]);
    }

    #[test]
    fn matrix_layout() {
        let h = hurwitz_matrix(&poly(&[1.0, 2.0, 3.0, 4.0]), 3);
        let expected = [[2.0, 4.0, 0.0], [1.0, 3.0, 0.0], [0.0, 2.0, 4.0]];
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(h.row(i), row);
        }
    }
}
