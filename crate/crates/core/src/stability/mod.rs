//! Positive stability of `A_η = L + η d_μ eᵀ` with `L = D_μ(I − P_π)`.

mod region;
mod threshold;
mod trajectory;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{
    char_poly, check_row_stochastic, cnorm2, eigenvalues, eigvec_for_eigenvalue, is_hurwitz,
    is_irreducible, solve_complex, stationary_distribution, ComplexMatrix, RealMatrix,
};
use crate::tolerance::Tolerances;

pub use region::{stability_region, Interval, StabilityRegion};
pub use threshold::{eta_star, EtaStarOptions, EtaStarResult, Witness};
pub use trajectory::{eigen_trajectory, AxisCrossing, EigenTrajectory, TrajectoryPoint};

/// A behaviour weighting `d_μ` together with a target transition matrix `P_π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityInstance {
    d_mu: Vec<f64>,
    p_pi: RealMatrix,
    normalized: bool,
}

impl StabilityInstance {
    /// Validates positivity of `d_mu`, stochasticity and irreducibility of
    /// `p_pi`. `d_mu` need not sum to one.
    pub fn new(d_mu: Vec<f64>, p_pi: RealMatrix) -> Result<Self> {
        Self::with_tolerances(d_mu, p_pi, &Tolerances::default())
    }

    pub fn with_tolerances(d_mu: Vec<f64>, p_pi: RealMatrix, tol: &Tolerances) -> Result<Self> {
        let n = p_pi.dim();
        if n == 0 {
            return Err(Error::Validation("instance has no states".into()));
        }
        if d_mu.len() != n {
            return Err(Error::Dimension(format!(
                "d_mu has length {} but P_pi is {n}x{n}",
                d_mu.len()
            )));
        }
        if let Some(i) = d_mu.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Validation(format!(
                "d_mu[{i}] = {} is not strictly positive",
                d_mu[i]
            )));
        }
        check_row_stochastic(&p_pi, tol.stochastic)?;
        if !is_irreducible(&p_pi) {
            return Err(Error::Validation("P_pi is reducible".into()));
        }
        let s: f64 = d_mu.iter().sum();
        let normalized = (s - 1.0).abs() <= tol.normalization;
        Ok(Self {
            d_mu,
            p_pi,
            normalized,
        })
    }

    /// Like [`StabilityInstance::new`] but additionally requires `Σ d_mu = 1`.
    pub fn new_normalized(d_mu: Vec<f64>, p_pi: RealMatrix) -> Result<Self> {
        let inst = Self::new(d_mu, p_pi)?;
        if !inst.normalized {
            let s: f64 = inst.d_mu.iter().sum();
            return Err(Error::Validation(format!("d_mu sums to {s}, not 1")));
        }
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.d_mu.len()
    }

    pub fn d_mu(&self) -> &[f64] {
        &self.d_mu
    }

    pub fn p_pi(&self) -> &RealMatrix {
        &self.p_pi
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Scale used to normalize `A_η` before forming characteristic
    /// polynomials: the mean diagonal of `L`, or the mean of `d_μ` when `L`
    /// has zero trace.
    pub fn scale(&self) -> f64 {
        let n = self.n() as f64;
        let s = build_l(self).trace() / n;
        if s > 0.0 {
            s
        } else {
            self.d_mu.iter().sum::<f64>() / n
        }
    }
}

pub fn build_l(inst: &StabilityInstance) -> RealMatrix {
    let p = inst.p_pi();
    let d = inst.d_mu();
    RealMatrix::from_fn(inst.n(), |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        d[i] * (delta - p[(i, j)])
    })
}

/// `A_η = L + η d_μ eᵀ`, for `η ≥ 0`.
pub fn build_a(inst: &StabilityInstance, eta: f64) -> Result<RealMatrix> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be a finite value >= 0, got {eta}")));
    }
    Ok(rank_one_shift(&build_l(inst), inst.d_mu(), eta))
}

pub(crate) fn rank_one_shift(l: &RealMatrix, d: &[f64], eta: f64) -> RealMatrix {
    RealMatrix::from_fn(l.dim(), |i, j| l[(i, j)] + eta * d[i])
}

/// Tolerances for the spectral inequalities of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaTolerances {
    /// Slack on `Re λ ≥ 0`.
    pub real_part: f64,
    /// Slack on `2 max(d_μ) Re λ ≥ |λ|²`.
    pub inequality: f64,
    /// Radius within which an eigenvalue counts as zero.
    pub zero: f64,
}

impl Default for LemmaTolerances {
    fn default() -> Self {
        Self {
            real_part: 1e-9,
            inequality: 1e-8,
            zero: 1e-9,
        }
    }
}

impl LemmaTolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            real_part: tol,
            inequality: tol,
            zero: tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub kernel_eigenvalue: Complex64,
    /// `|⟨v, e⟩| / (‖v‖ ‖e‖)` for the kernel eigenvector `v`.
    pub kernel_alignment: f64,
    pub min_real_part: f64,
    /// Smallest value of `2 max(d_μ) Re λ − |λ|²` over the spectrum.
    pub min_inequality_margin: f64,
}

/// Checks that the spectrum of `L` lies in the closed right half plane, in
/// the disc `2 max(d_μ) Re λ ≥ |λ|²`, and that zero is a simple eigenvalue
/// with eigenvector along `e`.
pub fn lemma_spectrum_check(inst: &StabilityInstance, tol: &LemmaTolerances) -> Result<SpectrumReport> {
    let l = build_l(inst);
    let ev = eigenvalues(&l)?;
    let dmax = inst.d_mu().iter().copied().fold(0.0, f64::max);
    let mut min_re = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for &lambda in &ev {
        min_re = min_re.min(lambda.re);
        if lambda.re < -tol.real_part {
            return Err(Error::LemmaViolation {
                lambda,
                check: format!("real part {:e} < -{:e}", lambda.re, tol.real_part),
            });
        }
        let margin = 2.0 * dmax * lambda.re - lambda.norm_sqr();
        min_margin = min_margin.min(margin);
        if margin < -tol.inequality {
            return Err(Error::LemmaViolation {
                lambda,
                check: format!("2 max(d) Re(lambda) - |lambda|^2 = {margin:e}"),
            });
        }
    }
    let zeros: Vec<Complex64> = ev.iter().copied().filter(|z| z.norm() <= tol.zero).collect();
    if zeros.len() != 1 {
        let lambda = zeros
            .first()
            .copied()
            .unwrap_or_else(|| *ev.iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap());
        return Err(Error::LemmaViolation {
            lambda,
            check: format!("{} eigenvalues within {:e} of zero, expected 1", zeros.len(), tol.zero),
        });
    }
    let kernel = zeros[0];
    let v = eigvec_for_eigenvalue(&l, kernel, &Tolerances::default())?;
    let n = inst.n() as f64;
    let sum: Complex64 = v.iter().sum();
    let alignment = sum.norm() / (cnorm2(&v) * n.sqrt());
    if (1.0 - alignment).abs() > 1e-8 {
        return Err(Error::LemmaViolation {
            lambda: kernel,
            check: format!("kernel eigenvector not parallel to e (alignment {alignment})"),
        });
    }
    Ok(SpectrumReport {
        eigenvalues: ev,
        kernel_eigenvalue: kernel,
        kernel_alignment: alignment,
        min_real_part: min_re,
        min_inequality_margin: min_margin,
    })
}

/// Evaluator for `g(z) = eᵀ (zI − L)⁻¹ d_μ` that caches the spectrum of `L`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    l: RealMatrix,
    d_mu: Vec<f64>,
    spectrum: Vec<Complex64>,
    gap: f64,
    pivot: f64,
}

impl Resolvent {
    pub fn new(inst: &StabilityInstance, tol: &Tolerances) -> Result<Self> {
        let l = build_l(inst);
        let spectrum = eigenvalues(&l)?;
        Ok(Self {
            l,
            d_mu: inst.d_mu().to_vec(),
            spectrum,
            gap: tol.resolvent_gap,
            pivot: tol.pivot,
        })
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        let distance = self
            .spectrum
            .iter()
            .map(|l| (z - l).norm())
            .fold(f64::INFINITY, f64::min);
        if distance <= self.gap {
            return Err(Error::NearSpectrum { z, distance });
        }
        let a = ComplexMatrix::shifted(z, &self.l);
        let b: Vec<Complex64> = self.d_mu.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let x = solve_complex(&a, &b, self.pivot)?;
        Ok(x.iter().sum())
    }
}

pub fn g_eval(inst: &StabilityInstance, z: Complex64) -> Result<Complex64> {
    Resolvent::new(inst, &Tolerances::default())?.g(z)
}

/// Routh–Hurwitz test of positive stability: `A` is positive stable iff
/// the characteristic polynomial of `−A` is Hurwitz. The matrix is first
/// divided by its mean diagonal so that the determinants stay in range.
pub fn is_positive_stable(a: &RealMatrix) -> Result<bool> {
    let n = a.dim();
    if n == 0 {
        return Ok(true);
    }
    let s = a.trace() / n as f64;
    if !(s > 0.0 && s.is_finite()) {
        // The eigenvalue sum is the trace.
        return Ok(false);
    }
    let q = char_poly(&a.scale(-1.0 / s))?;
    Ok(is_hurwitz(&q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonsingularityReport {
    pub determinant: f64,
    /// `|det A| / ∏ ‖row_i‖₂`, which is 1 for orthogonal rows and 0 for
    /// singular matrices.
    pub hadamard_ratio: f64,
    /// `‖ℓᵀL‖_∞ / (‖ℓ‖_∞ ‖L‖_∞)` with `ℓᵀ = d_πᵀ D_μ⁻¹`.
    pub left_null_residual: f64,
    pub nonsingular: bool,
}

/// Numerical nonsingularity of `A_η`. Also confirms that `ℓᵀ = d_πᵀ D_μ⁻¹`
/// annihilates `L`.
pub fn nonsingularity_check(
    inst: &StabilityInstance,
    eta: f64,
    tol: &Tolerances,
) -> Result<NonsingularityReport> {
    let l = build_l(inst);
    let a = build_a(inst, eta)?;
    let d_pi = stationary_distribution(inst.p_pi(), tol)?;
    let ell: Vec<f64> = d_pi.iter().zip(inst.d_mu()).map(|(p, d)| p / d).collect();
    let ell_l = l.vecmat(&ell);
    let ell_inf = ell.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let res = ell_l.iter().fold(0.0f64, |m, x| m.max(x.abs())) / (ell_inf * l.inf_norm().max(f64::MIN_POSITIVE));
    if res > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "left null vector residual {res:e} for d_pi^T D_mu^-1 L"
        )));
    }
    let det = a.det();
    let ratio = det.abs() / a.hadamard_bound();
    Ok(NonsingularityReport {
        determinant: det,
        hadamard_ratio: ratio,
        left_null_residual: res,
        nonsingular: ratio > tol.nonsingular,
    })
}

/// Intercepts and slopes of `a_j(η)`, `j = 1..n`, the coefficients of
/// `det(zI + A_η)`, which are affine in `η`.
pub fn coefficient_lines(inst: &StabilityInstance, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    lines_at_scale(inst, 1.0, tol)
}

/// Coefficient lines of `det(zI + A_{sτ}/s)` as functions of `τ`.
pub(crate) fn lines_at_scale(inst: &StabilityInstance, s: f64, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    let l = build_l(inst).scale(1.0 / s);
    let d = inst.d_mu();
    let coeffs = |tau: f64| -> Result<Vec<f64>> {
        Ok(char_poly(&rank_one_shift(&l, d, tau).scale(-1.0))?.coeffs()[1..].to_vec())
    };
    let c0 = coeffs(0.0)?;
    let c1 = coeffs(1.0)?;
    let ch = coeffs(0.5)?;
    let lines: Vec<(f64, f64)> = c0.iter().zip(&c1).map(|(a, b)| (*a, b - a)).collect();
    for (j, ((a, b), h)) in lines.iter().zip(&ch).enumerate() {
        let predicted = a + 0.5 * b;
        let scale = a.abs().max(b.abs()).max(h.abs()).max(f64::MIN_POSITIVE);
        if (predicted - h).abs() > tol.linearity * scale {
            return Err(Error::Inconsistent(format!(
                "coefficient a_{} is not affine in eta: midpoint {h:e} vs line {predicted:e}",
                j + 1
            )));
        }
    }
    Ok(lines)
}

/// Closed-form derivative at `η = 0` of the eigenvalue of `A_η` that starts
/// at zero: `n / (d_πᵀ D_μ⁻¹ e)`.
pub fn zero_eig_derivative(inst: &StabilityInstance, tol: &Tolerances) -> Result<f64> {
    let d_pi = stationary_distribution(inst.p_pi(), tol)?;
    let denom: f64 = d_pi.iter().zip(inst.d_mu()).map(|(p, d)| p / d).sum();
    Ok(inst.n() as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state() -> StabilityInstance {
        StabilityInstance::new(vec![1.0], RealMatrix::identity(1)).unwrap()
    }

    fn swap() -> StabilityInstance {
        let p = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        StabilityInstance::new(vec![0.5, 0.5], p).unwrap()
    }

    #[test]
    fn validation() {
        let p = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(StabilityInstance::new(vec![0.5, 0.0], p.clone()).is_err());
        assert!(StabilityInstance::new(vec![0.5], p.clone()).is_err());
        assert!(StabilityInstance::new(vec![1.0, 1.0], RealMatrix::identity(2)).is_err());
        let unnormalized = StabilityInstance::new(vec![1.0, 3.0], p.clone()).unwrap();
        assert!(!unnormalized.is_normalized());
        assert!(StabilityInstance::new_normalized(vec![1.0, 3.0], p).is_err());
    }

    #[test]
    fn builders_on_small_chains() {
        assert_eq!(build_l(&one_state()).as_slice(), &[0.0]);
        assert_eq!(build_a(&one_state(), 0.3).unwrap().as_slice(), &[0.3]);
        assert_eq!(build_l(&swap()).as_slice(), &[0.5, -0.5, -0.5, 0.5]);
        assert_eq!(build_a(&swap(), 0.0).unwrap(), build_l(&swap()));
        assert!(matches!(build_a(&swap(), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn one_state_resolvent() {
        let g = g_eval(&one_state(), Complex64::new(0.0, 1.0)).unwrap();
        assert!((g - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(
            g_eval(&one_state(), Complex64::new(1e-12, 0.0)),
            Err(Error::NearSpectrum { .. })
        ));
    }

    #[test]
    fn lemma_on_small_chains() {
        let r = lemma_spectrum_check(&one_state(), &LemmaTolerances::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 1);
        lemma_spectrum_check(&swap(), &LemmaTolerances::default()).unwrap();
    }

    #[test]
    fn positive_stability_basics() {
        assert!(is_positive_stable(&RealMatrix::identity(3)).unwrap());
        assert!(!is_positive_stable(&RealMatrix::identity(3).scale(-1.0)).unwrap());
        assert!(!is_positive_stable(&RealMatrix::zeros(2)).unwrap());
    }

    #[test]
    fn nonsingularity_small() {
        let tol = Tolerances::default();
        let r = nonsingularity_check(&one_state(), 1.0, &tol).unwrap();
        assert_eq!(r.determinant, 1.0);
        assert!(r.nonsingular);
        assert!(!nonsingularity_check(&swap(), 0.0, &tol).unwrap().nonsingular);
        assert!(nonsingularity_check(&swap(), 0.1, &tol).unwrap().nonsingular);
    }

    #[test]
    fn one_state_lines_and_derivative() {
        let tol = Tolerances::default();
        let lines = coefficient_lines(&one_state(), &tol).unwrap();
        assert_eq!(lines, vec![(0.0, 1.0)]);
        assert_eq!(zero_eig_derivative(&one_state(), &tol).unwrap(), 1.0);
    }

    #[test]
    fn uniform_weights_give_unit_derivative() {
        let p = RealMatrix::from_rows(&[
            vec![0.2, 0.5, 0.3],
            vec![0.6, 0.0, 0.4],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let inst = StabilityInstance::new(vec![1.0 / 3.0; 3], p).unwrap();
        let d = zero_eig_derivative(&inst, &Tolerances::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
    }
}
