use num_complex::Complex64;
use serde::Serialize;

use super::{Resolvent, StabilityInstance};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Scan parameters for [`eta_star`]. Unset bounds default to
/// `ω_max = 4 max(d_μ) n` and `ω_min = 1e-9 ω_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaStarOptions {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub grid: usize,
}

impl Default for EtaStarOptions {
    fn default() -> Self {
        Self {
            omega_min: None,
            omega_max: None,
            grid: 4000,
        }
    }
}

/// A crossing `1 − η g(iω) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub omega: f64,
    pub eta: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaStarResult {
    /// Smallest crossing `η`, or `+∞` when none was found.
    pub eta_star: f64,
    /// Every crossing with `Re g(iω) > 0`, in increasing `ω`.
    pub witnesses: Vec<Witness>,
    /// Frequency range actually scanned.
    pub omega_range: (f64, f64),
}

const WITNESS_RESIDUAL: f64 = 1e-7;

/// Smallest `η > 0` for which `1 − η g(iω)` vanishes at some scanned `ω > 0`.
///
/// Sign changes of `Im g(iω)` on a log-uniform grid are bisected; each root
/// with `Re g > 0` yields `η = 1 / Re g`.
pub fn eta_star(inst: &StabilityInstance, opts: &EtaStarOptions, tol: &Tolerances) -> Result<EtaStarResult> {
    let dmax = inst.d_mu().iter().copied().fold(0.0, f64::max);
    let omega_max = opts.omega_max.unwrap_or(4.0 * dmax * inst.n() as f64);
    let omega_min = opts.omega_min.unwrap_or(omega_max * 1e-9);
    if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
        return Err(Error::Domain(format!(
            "invalid frequency range [{omega_min}, {omega_max}]"
        )));
    }
    if opts.grid < 2 {
        return Err(Error::Domain("frequency grid needs at least 2 points".into()));
    }
    let res = Resolvent::new(inst, tol)?;
    let g = |w: f64| res.g(Complex64::new(0.0, w));

    let ratio = (omega_max / omega_min).ln();
    let grid: Vec<f64> = (0..opts.grid)
        .map(|k| omega_min * (ratio * k as f64 / (opts.grid - 1) as f64).exp())
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &w in &grid {
        values.push(g(w)?.im);
    }

    let mut roots = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            roots.push(grid[k]);
            continue;
        }
        if k + 1 < grid.len() && values[k] * values[k + 1] < 0.0 {
            let (mut lo, mut hi) = (grid[k], grid[k + 1]);
            let mut flo = values[k];
            while hi - lo > 1e-12 * hi {
                let mid = 0.5 * (lo + hi);
                let fm = g(mid)?.im;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm * flo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }

    let mut witnesses = Vec::new();
    for w in roots {
        let gw = g(w)?;
        if gw.re > 0.0 {
            let eta = 1.0 / gw.re;
            let residual = (Complex64::new(1.0, 0.0) - eta * gw).norm();
            if residual > WITNESS_RESIDUAL {
                return Err(Error::Convergence {
                    what: "crossing bisection",
                    iterations: 0,
                    residual,
                });
            }
            witnesses.push(Witness {
                omega: w,
                eta,
                residual,
            });
        }
    }
    let eta_star = witnesses.iter().map(|w| w.eta).fold(f64::INFINITY, f64::min);
    Ok(EtaStarResult {
        eta_star,
        witnesses,
        omega_range: (omega_min, omega_max),
    })
}
