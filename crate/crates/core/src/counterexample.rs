//! A family of instances, indexed by an integer `m > 22`, whose stability
//! region in `η` is `(0, α) ∪ (3α, ∞)`.
//!
//! States are ordered `a_1, …, a_m, b, c`. The base chain `Q` moves every
//! `a_i` to `b`, `b` to `c`, and `c` uniformly back to the `a_i`.

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{
    char_poly, cluster, eigenvalues, is_irreducible, RealMatrix, RealPolynomial,
};
use crate::stability::{Interval, StabilityInstance, StabilityRegion};

fn check_m(m: usize) -> Result<()> {
    if m <= 22 {
        return Err(Error::Domain(format!("family requires m > 22, got {m}")));
    }
    Ok(())
}

/// `α = (m − 22) / (m² + m − 2)`.
pub fn alpha_of(m: usize) -> Result<f64> {
    check_m(m)?;
    let m = m as f64;
    Ok((m - 22.0) / (m * m + m - 2.0))
}

/// Constants of the family in exact rational arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactConstants {
    pub alpha: Ratio<i128>,
    pub d_c: Ratio<i128>,
    /// `m − α(m² + m − 2)`, which equals 22 for every `m`.
    pub identity: Ratio<i128>,
}

pub fn exact_constants(m: usize) -> Result<ExactConstants> {
    check_m(m)?;
    let mi = m as i128;
    let denom = mi * mi + mi - 2;
    let alpha = Ratio::new(mi - 22, denom);
    let d_c = Ratio::from_integer(1) - Ratio::from_integer(mi + 1) * alpha;
    let identity = Ratio::from_integer(mi) - alpha * Ratio::from_integer(denom);
    Ok(ExactConstants {
        alpha,
        d_c,
        identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleFamily {
    pub m: usize,
    pub alpha: f64,
    pub d_mu: Vec<f64>,
    pub q: RealMatrix,
    pub p_pi: RealMatrix,
}

impl CounterexampleFamily {
    pub fn n(&self) -> usize {
        self.m + 2
    }

    pub fn b(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> usize {
        self.m + 1
    }

    pub fn labels(&self) -> Vec<String> {
        (1..=self.m)
            .map(|i| format!("a{i}"))
            .chain(["b".to_string(), "c".to_string()])
            .collect()
    }

    pub fn instance(&self) -> Result<StabilityInstance> {
        StabilityInstance::new_normalized(self.d_mu.clone(), self.p_pi.clone())
    }

    /// `B_t x` evaluated as `x − Qx + t d_μ (eᵀx)`.
    pub fn b_apply(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let qx = self.q.matvec(x);
        let sum: f64 = x.iter().sum();
        x.iter()
            .zip(&qx)
            .zip(&self.d_mu)
            .map(|((xi, qi), di)| xi - qi + t * di * sum)
            .collect()
    }

    /// `B_t = I − Q + t d_μ eᵀ`, so that `A_{tα} = α B_t`.
    pub fn b_matrix(&self, t: f64) -> RealMatrix {
        let n = self.n();
        RealMatrix::from_fn(n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - self.q[(i, j)] + t * self.d_mu[i]
        })
    }
}

fn invariant(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Inconsistent(format!("family construction: {}", what())))
    }
}

pub fn build_family(m: usize) -> Result<CounterexampleFamily> {
    let alpha = alpha_of(m)?;
    let n = m + 2;
    let (b, c) = (m, m + 1);
    let mut d_mu = vec![alpha; n];
    d_mu[c] = 1.0 - (m as f64 + 1.0) * alpha;

    let mut q = RealMatrix::zeros(n);
    for i in 0..m {
        q[(i, b)] = 1.0;
        q[(c, i)] = 1.0 / m as f64;
    }
    q[(b, c)] = 1.0;

    let p_pi = RealMatrix::from_fn(n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + alpha / d_mu[i] * (q[(i, j)] - delta)
    });

    invariant(alpha > 0.0, || format!("alpha = {alpha}"))?;
    invariant(d_mu[c] > 0.0 && d_mu[c] - alpha > 0.0, || format!("d_mu[c] = {}", d_mu[c]))?;
    let total: f64 = d_mu.iter().sum();
    invariant((total - 1.0).abs() <= 1e-15, || format!("d_mu sums to {total}"))?;
    for (i, row) in p_pi.rows().enumerate() {
        let s: f64 = row.iter().sum();
        invariant((s - 1.0).abs() <= 1e-12, || format!("row {i} of P_pi sums to {s}"))?;
        invariant(row.iter().all(|&x| x >= 0.0), || format!("row {i} of P_pi has a negative entry"))?;
    }
    invariant(is_irreducible(&p_pi), || "P_pi is reducible".into())?;
    invariant(p_pi[(c, c)] > 0.0, || "P_pi[c, c] is not positive".into())?;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let lhs = d_mu[i] * (delta - p_pi[(i, j)]);
            let rhs = alpha * (delta - q[(i, j)]);
            invariant((lhs - rhs).abs() <= 1e-15, || {
                format!("D_mu(I - P_pi) differs from alpha(I - Q) at ({i}, {j})")
            })?;
        }
    }
    Ok(CounterexampleFamily {
        m,
        alpha,
        d_mu,
        q,
        p_pi,
    })
}

/// The action of `B_t` on the span of `(Σ a_i, b, c)` indicator vectors is
/// `I − M_t` with `M_t = C − t d̄ rᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedBlock {
    pub t: f64,
    pub m_t: RealMatrix,
}

impl ReducedBlock {
    /// `det(zI − M_t)`, computed from the matrix.
    pub fn char_poly(&self) -> Result<RealPolynomial> {
        char_poly(&self.m_t)
    }

    /// `det(sI + I − M_t)`, computed from the matrix.
    pub fn hurwitz_poly(&self) -> Result<RealPolynomial> {
        let i_minus_m = RealMatrix::identity(3).sub(&self.m_t);
        char_poly(&i_minus_m.scale(-1.0))
    }

    /// `z³ − 1 + t(z² + z + 22)`.
    pub fn closed_form_char_poly(&self) -> RealPolynomial {
        let t = self.t;
        RealPolynomial::new(vec![1.0, t, t, 22.0 * t - 1.0]).expect("monic")
    }

    /// `s³ + (t+3)s² + (3t+3)s + 24t`.
    pub fn closed_form_hurwitz_poly(&self) -> RealPolynomial {
        let t = self.t;
        RealPolynomial::new(vec![1.0, t + 3.0, 3.0 * t + 3.0, 24.0 * t]).expect("monic")
    }
}

pub fn reduced_block(fam: &CounterexampleFamily, t: f64) -> Result<ReducedBlock> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let alpha = fam.alpha;
    let m = fam.m as f64;
    let d_bar = [alpha, alpha, 1.0 - (m + 1.0) * alpha];
    let r = [m, 1.0, 1.0];
    let cyc = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
    let m_t = RealMatrix::from_fn(3, |i, j| cyc[i][j] - t * d_bar[i] * r[j]);
    let block = ReducedBlock { t, m_t };

    let identity = m - alpha * (m * m + m - 2.0);
    if (identity - 22.0).abs() > 1e-12 {
        return Err(Error::Inconsistent(format!(
            "m - alpha(m^2+m-2) = {identity}, expected 22"
        )));
    }
    let computed = block.char_poly()?;
    let expected = block.closed_form_char_poly();
    for (a, b) in computed.coeffs().iter().zip(expected.coeffs()) {
        if (a - b).abs() > 1e-10 * (1.0 + t) {
            return Err(Error::Inconsistent(format!(
                "reduced block char poly {:?} differs from closed form {:?}",
                computed.coeffs(),
                expected.coeffs()
            )));
        }
    }
    Ok(block)
}

/// `(0, α) ∪ (3α, ∞)`.
pub fn predicted_region(fam: &CounterexampleFamily) -> StabilityRegion {
    let a = fam.alpha;
    StabilityRegion {
        intervals: vec![
            Interval { lo: 0.0, hi: a },
            Interval {
                lo: 3.0 * a,
                hi: f64::INFINITY,
            },
        ],
        boundary_roots: vec![a, 3.0 * a],
        determinant_roots: Vec::new(),
        empty_reason: None,
        eta_cap: f64::INFINITY,
        scale: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStructureReport {
    pub eigenvalues: Vec<Complex64>,
    /// Size of the cluster at 1.
    pub unit_multiplicity: usize,
    /// Largest distance of a cluster member from 1.
    pub unit_spread: f64,
    /// Eigenvalues of `I − M_t`.
    pub block_eigenvalues: Vec<Complex64>,
    /// Largest distance from a block eigenvalue to its match in the spectrum.
    pub block_mismatch: f64,
    /// Largest `‖B_t x − x‖_∞` over the sampled `x` in the fixed subspace.
    pub fixed_subspace_residual: f64,
}

const BLOCK_TOL: f64 = 1e-8;

/// Checks that `B_t` is similar to `diag(I_{m−1}, I − M_t)`: the spectrum is
/// 1 repeated `m − 1` times plus the spectrum of `I − M_t`, and vectors
/// supported on the `a_i` with zero sum are fixed.
pub fn verify_block_structure(fam: &CounterexampleFamily, t: f64, seed: u64) -> Result<BlockStructureReport> {
    let b_t = fam.b_matrix(t);
    let ev = eigenvalues(&b_t)?;
    let one = Complex64::new(1.0, 0.0);
    let block = reduced_block(fam, t)?;
    let block_ev = eigenvalues(&RealMatrix::identity(3).sub(&block.m_t))?;

    // Remove the three block eigenvalues by nearest matching; what remains
    // must be the unit cluster.
    let mut remaining = ev.clone();
    let mut mismatch = 0.0f64;
    for &z in &block_ev {
        let (idx, d) = remaining
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("spectrum has at least 3 entries");
        mismatch = mismatch.max(d);
        remaining.remove(idx);
    }
    let spread = remaining.iter().map(|w| (w - one).norm()).fold(0.0, f64::max);
    let unit = cluster(&ev, BLOCK_TOL)
        .into_iter()
        .filter(|c| (c.center - one).norm() <= BLOCK_TOL)
        .map(|c| c.multiplicity)
        .max()
        .unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fixed_res = 0.0f64;
    for _ in 0..3 {
        let mut x = vec![0.0; fam.n()];
        for xi in x.iter_mut().take(fam.m) {
            *xi = rng.random::<f64>() * 2.0 - 1.0;
        }
        let mean = x[..fam.m].iter().sum::<f64>() / fam.m as f64;
        x[..fam.m].iter_mut().for_each(|xi| *xi -= mean);
        let bx = fam.b_apply(t, &x);
        fixed_res = fixed_res.max(bx.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    if mismatch > BLOCK_TOL || spread > BLOCK_TOL || unit != fam.m - 1 || fixed_res > 1e-12 {
        return Err(Error::Inconsistent(format!(
            "block structure of B_t at t = {t}: unit cluster {unit} (spread {spread:e}), block mismatch {mismatch:e}, fixed-subspace residual {fixed_res:e}"
        )));
    }
    Ok(BlockStructureReport {
        eigenvalues: ev,
        unit_multiplicity: unit,
        unit_spread: spread,
        block_eigenvalues: block_ev,
        block_mismatch: mismatch,
        fixed_subspace_residual: fixed_res,
    })
}
