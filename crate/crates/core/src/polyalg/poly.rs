use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monic real polynomial `z^n + a_1 z^{n-1} + ... + a_n`, stored as
/// `[1, a_1, ..., a_n]` (highest degree first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            None => return Err(Error::Polynomial("empty coefficient list".into())),
            Some(&lead) if lead != 1.0 => {
                return Err(Error::Polynomial(format!(
                    "leading coefficient must be exactly 1, got {lead}"
                )))
            }
            _ => {}
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient a_{k}")));
        }
        Ok(Self { coeffs })
    }

    /// Monic polynomial with the given roots; imaginary parts of the
    /// expanded coefficients are dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * r;
            }
            c = next;
        }
        Self {
            coeffs: c.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `a_j` with the convention `a_j = 0` outside `0..=n`.
    pub fn a(&self, j: isize) -> f64 {
        if j < 0 {
            0.0
        } else {
            self.coeffs.get(j as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `Σ |a_j| |z|^{n-j}`, the natural scale of a computed residual at `z`.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(0.0, |acc, &c| acc * r + c.abs())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Value and derivative at `z` by Horner's rule.
    pub(crate) fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monic_invariant() {
        assert!(RealPolynomial::new(vec![1.0, -2.0, 1.0]).is_ok());
        assert!(matches!(
            RealPolynomial::new(vec![2.0, 1.0]),
            Err(Error::Polynomial(_))
        ));
        assert!(RealPolynomial::new(vec![]).is_err());
        assert!(RealPolynomial::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn from_roots_expands_product() {
        let roots: Vec<_> = (1..=4).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let p = RealPolynomial::from_roots(&roots);
        assert_eq!(p.coeffs(), &[1.0, -10.0, 35.0, -50.0, 24.0]);
        assert_eq!(p.degree(), 4);
        assert_eq!(p.a(-1), 0.0);
        assert_eq!(p.a(7), 0.0);
    }

    #[test]
    fn horner_derivative() {
        let p = RealPolynomial::new(vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        let (v, d) = p.eval_with_derivative(Complex64::new(2.0, 0.0));
        assert_eq!(v, Complex64::new(7.0, 0.0));
        assert_eq!(d, Complex64::new(12.0, 0.0));
    }
}
