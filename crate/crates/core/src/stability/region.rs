//! Exact stability region in `η` from the signs of the Hurwitz determinants.
//!
//! Each `Δ_k(η)` is a polynomial of degree at most `k`. It is interpolated
//! panel by panel at Chebyshev–Lobatto nodes, the real roots of every panel
//! interpolant are located with a colleague matrix, and each candidate is
//! polished by bisection on directly evaluated determinants. Beyond `η_cap`
//! the substitution `u = η_cap / η` turns `u^k Δ_k(η_cap / u)` into a
//! polynomial on `(0, 1]` whose value at `u = 0` carries the sign of the
//! leading coefficient.

use serde::Serialize;

use super::{build_l, lines_at_scale, rank_one_shift, StabilityInstance};
use crate::error::{Error, Result};
use crate::polyalg::{
    char_poly, eigenvalues, hurwitz_determinants_of, hurwitz_determinants_with_scales, hurwitz_matrix_of,
    RealMatrix,
};
use crate::tolerance::Tolerances;

/// Open interval `(lo, hi)`; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// A sign-changing root of one Hurwitz determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantRoot {
    pub k: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRegion {
    pub intervals: Vec<Interval>,
    /// Points where the stability classification changes.
    pub boundary_roots: Vec<f64>,
    /// All sign-changing roots of every `Δ_k`, including those that do not
    /// change the classification.
    pub determinant_roots: Vec<DeterminantRoot>,
    pub empty_reason: Option<String>,
    pub eta_cap: f64,
    /// Normalization applied to `A_η` before forming polynomials.
    pub scale: f64,
}

impl StabilityRegion {
    pub fn contains(&self, eta: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(eta))
    }
}

const DYADIC_LEVELS: usize = 20;
/// Smallest resolvable root, relative to `η_cap`.
const RESOLUTION: f64 = 1e-12;

struct Evaluator {
    l: RealMatrix,
    d: Vec<f64>,
    lines: Vec<(f64, f64)>,
    tau_cap: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    /// `τ = η / s` on `[0, τ_cap]`.
    Head,
    /// `u = τ_cap / τ` on `[0, 1]`.
    Tail,
}

impl Evaluator {
    fn coeffs(&self, side: Side, x: f64) -> Result<Vec<f64>> {
        match side {
            Side::Head => {
                let a = rank_one_shift(&self.l, &self.d, x).scale(-1.0);
                Ok(char_poly(&a)?.coeffs().to_vec())
            }
            Side::Tail => {
                let mut a = Vec::with_capacity(self.lines.len() + 1);
                a.push(x);
                a.extend(self.lines.iter().map(|(c, e)| x * c + self.tau_cap * e));
                Ok(a)
            }
        }
    }

    fn eval(&self, side: Side, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok(hurwitz_determinants_with_scales(&self.coeffs(side, x)?))
    }

    fn eval_k(&self, side: Side, x: f64, k: usize) -> Result<f64> {
        Ok(hurwitz_matrix_of(&self.coeffs(side, x)?, k + 1).det())
    }

    fn signs(&self, side: Side, x: f64) -> Result<Vec<f64>> {
        Ok(hurwitz_determinants_of(&self.coeffs(side, x)?))
    }
}

/// Chebyshev coefficients of the interpolant through Lobatto-node values
/// `f_j = f(cos(πj/M))`, `j = 0..=M`.
fn chebyshev_coefficients(f: &[f64]) -> Vec<f64> {
    let m = f.len() - 1;
    if m == 0 {
        return vec![f[0]];
    }
    let mf = m as f64;
    (0..=m)
        .map(|k| {
            let mut s = 0.0;
            for (j, &fj) in f.iter().enumerate() {
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                s += w * fj * (std::f64::consts::PI * (k * j) as f64 / mf).cos();
            }
            let c = 2.0 * s / mf;
            if k == 0 || k == m {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Real roots in `[-1, 1]` of `Σ c_j T_j(x)` from the colleague matrix.
fn chebyshev_real_roots(c: &[f64]) -> Vec<f64> {
    let cmax = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if cmax == 0.0 {
        return Vec::new();
    }
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-13 * cmax {
        deg -= 1;
    }
    let candidates: Vec<f64> = match deg {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        _ => {
            let mut m = RealMatrix::zeros(deg);
            m[(0, 1)] = 1.0;
            for i in 1..deg {
                m[(i, i - 1)] = 0.5;
                if i + 1 < deg {
                    m[(i, i + 1)] = 0.5;
                }
            }
            for j in 0..deg {
                m[(deg - 1, j)] -= c[j] / (2.0 * c[deg]);
            }
            match eigenvalues(&m) {
                Ok(ev) => ev.into_iter().filter(|z| z.im.abs() <= 1e-3).map(|z| z.re).collect(),
                Err(_) => Vec::new(),
            }
        }
    };
    candidates
        .into_iter()
        .filter(|x| x.is_finite() && x.abs() <= 1.0 + 1e-9)
        .map(|x| x.clamp(-1.0, 1.0))
        .collect()
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Bisects a sign change of `f` on `[lo, hi]` to rounding precision.
fn bisect(mut lo: f64, mut hi: f64, mut flo: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if sign(fm) == sign(flo) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct PanelScan {
    /// Sign-changing roots per determinant index, in the panel variable.
    roots: Vec<Vec<f64>>,
    /// Largest `|Δ_k|` relative to its elimination scale seen at the nodes.
    max_ratio: Vec<f64>,
}

fn scan_panel(ev: &Evaluator, side: Side, a: f64, b: f64, scan: &mut PanelScan) -> Result<()> {
    let n = scan.roots.len();
    let m = n.max(1);
    let nodes: Vec<f64> = (0..=m)
        .map(|j| {
            let x = (std::f64::consts::PI * j as f64 / m as f64).cos();
            a + (b - a) * (x + 1.0) * 0.5
        })
        .collect();
    let mut vals = Vec::with_capacity(nodes.len());
    for &x in &nodes {
        vals.push(ev.eval(side, x)?);
    }
    for k in 0..n {
        let f: Vec<f64> = vals.iter().map(|v| v.0[k]).collect();
        for (v, b) in &vals {
            if b[k] > 0.0 {
                scan.max_ratio[k] = scan.max_ratio[k].max(v[k].abs() / b[k]);
            }
        }
        let fk = |x: f64| ev.eval_k(side, x, k);
        let mut brackets: Vec<(f64, f64, f64)> = Vec::new();
        // Nodes run from b down to a.
        for j in 0..m {
            let (hi, lo) = (nodes[j], nodes[j + 1]);
            if f[j + 1] == 0.0 && lo > 0.0 {
                scan.roots[k].push(lo);
            }
            if sign(f[j]) * sign(f[j + 1]) < 0 {
                brackets.push((lo, hi, f[j + 1]));
            }
        }
        let coeffs = chebyshev_coefficients(&f);
        for xr in chebyshev_real_roots(&coeffs) {
            let x = a + (b - a) * (xr + 1.0) * 0.5;
            if brackets.iter().any(|&(lo, hi, _)| lo <= x && x <= hi) {
                continue;
            }
            if let Some(br) = find_bracket(x, a, b, &fk)? {
                brackets.push(br);
            }
        }
        for (lo, hi, flo) in brackets {
            let r = bisect(lo, hi, flo, fk)?;
            if r > 0.0 {
                scan.roots[k].push(r);
            }
        }
    }
    Ok(())
}

fn find_bracket(x: f64, a: f64, b: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<Option<(f64, f64, f64)>> {
    let fx = f(x)?;
    if fx == 0.0 {
        let h = (b - a) * 1e-15;
        return Ok(Some(((x - h).max(a), (x + h).min(b), f((x - h).max(a))?)));
    }
    let mut h = (b - a) * 1e-12;
    while h <= (b - a) * 0.125 {
        let lo = (x - h).max(a);
        let hi = (x + h).min(b);
        let (flo, fhi) = (f(lo)?, f(hi)?);
        if sign(flo) * sign(fx) < 0 {
            return Ok(Some((lo, x, flo)));
        }
        if sign(fhi) * sign(fx) < 0 {
            return Ok(Some((x, hi, fx)));
        }
        h *= 10.0;
    }
    Ok(None)
}

fn dyadic_panels(top: f64) -> Vec<(f64, f64)> {
    let mut panels = Vec::with_capacity(DYADIC_LEVELS + 1);
    let mut hi = top;
    for _ in 0..DYADIC_LEVELS {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    panels.push((0.0, hi));
    panels
}

fn dedupe(xs: &mut Vec<f64>) {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()));
}

/// Set of `η > 0` for which `A_η` is positive stable, as a union of open
/// intervals. Roots are resolved explicitly on `(0, η_cap]`; the part above
/// `η_cap` is handled through the reciprocal variable.
pub fn stability_region(inst: &StabilityInstance, eta_cap: f64, tol: &Tolerances) -> Result<StabilityRegion> {
    if !(eta_cap > 0.0 && eta_cap.is_finite()) {
        return Err(Error::Domain(format!("eta_cap must be positive and finite, got {eta_cap}")));
    }
    let s = inst.scale();
    let tau_cap = eta_cap / s;
    let n = inst.n();
    let ev = Evaluator {
        l: build_l(inst).scale(1.0 / s),
        d: inst.d_mu().to_vec(),
        lines: lines_at_scale(inst, s, tol)?,
        tau_cap,
    };

    let mut head = PanelScan {
        roots: vec![Vec::new(); n],
        max_ratio: vec![0.0; n],
    };
    for (a, b) in dyadic_panels(tau_cap) {
        scan_panel(&ev, Side::Head, a, b, &mut head)?;
    }
    let mut tail = PanelScan {
        roots: vec![Vec::new(); n],
        max_ratio: vec![0.0; n],
    };
    for (a, b) in dyadic_panels(1.0) {
        scan_panel(&ev, Side::Tail, a, b, &mut tail)?;
    }

    if let Some(k) = (0..n).find(|&k| head.max_ratio[k].max(tail.max_ratio[k]) <= tol.zero_polynomial) {
        return Ok(StabilityRegion {
            intervals: Vec::new(),
            boundary_roots: Vec::new(),
            determinant_roots: Vec::new(),
            empty_reason: Some(format!(
                "Hurwitz determinant {} vanishes identically; the stability region is empty",
                k + 1
            )),
            eta_cap,
            scale: s,
        });
    }

    // Roots this close to zero are rounding artefacts of `det L = 0`; the
    // tail is cut at the same relative level.
    let floor = tau_cap * RESOLUTION;
    let mut determinant_roots = Vec::new();
    let mut all_tau = Vec::new();
    for k in 0..n {
        let mut taus: Vec<f64> = head.roots[k].iter().copied().filter(|&t| t > floor).collect();
        taus.extend(tail.roots[k].iter().filter(|&&u| u > RESOLUTION).map(|&u| tau_cap / u));
        dedupe(&mut taus);
        for &t in &taus {
            determinant_roots.push(DeterminantRoot { k: k + 1, eta: t * s });
        }
        all_tau.extend(taus);
    }
    dedupe(&mut all_tau);
    determinant_roots.sort_by(|a, b| a.eta.total_cmp(&b.eta).then(a.k.cmp(&b.k)));

    let stable_at = |tau: f64| -> Result<bool> {
        let deltas = if tau <= tau_cap {
            ev.signs(Side::Head, tau)?
        } else {
            ev.signs(Side::Tail, tau_cap / tau)?
        };
        Ok(deltas.iter().all(|&d| d > 0.0))
    };

    let mut edges = vec![0.0];
    edges.extend(all_tau.iter().copied());
    let mut cells: Vec<(f64, f64, bool)> = Vec::with_capacity(edges.len());
    for (i, &lo) in edges.iter().enumerate() {
        let (hi, probe) = match edges.get(i + 1) {
            Some(&hi) => (hi, 0.5 * (lo + hi)),
            None => {
                let u = 0.5 * (tau_cap / lo.max(tau_cap)).min(1.0);
                (f64::INFINITY, tau_cap / u)
            }
        };
        cells.push((lo, hi, stable_at(probe)?));
    }

    let mut intervals: Vec<Interval> = Vec::new();
    for (lo, hi, stable) in cells {
        if !stable {
            continue;
        }
        let (lo, hi) = (lo * s, hi * s);
        match intervals.last_mut() {
            Some(last) if last.hi == lo => last.hi = hi,
            _ => intervals.push(Interval { lo, hi }),
        }
    }
    let mut boundary_roots: Vec<f64> = intervals
        .iter()
        .flat_map(|i| [i.lo, i.hi])
        .filter(|x| *x > 0.0 && x.is_finite())
        .collect();
    dedupe(&mut boundary_roots);
    let empty_reason = intervals
        .is_empty()
        .then(|| "no eta with all Hurwitz determinants positive".to_string());
    Ok(StabilityRegion {
        intervals,
        boundary_roots,
        determinant_roots,
        empty_reason,
        eta_cap,
        scale: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_roundtrip_and_roots() {
        // (x - 0.3)(x + 0.5) = x^2 + 0.2x - 0.15
        let m = 4;
        let f: Vec<f64> = (0..=m)
            .map(|j| {
                let x = (std::f64::consts::PI * j as f64 / m as f64).cos();
                x * x + 0.2 * x - 0.15
            })
            .collect();
        let c = chebyshev_coefficients(&f);
        // x^2 = (T0 + T2)/2
        assert!((c[0] - (0.5 - 0.15)).abs() < 1e-15);
        assert!((c[1] - 0.2).abs() < 1e-15);
        assert!((c[2] - 0.5).abs() < 1e-15);
        let mut r = chebyshev_real_roots(&c);
        r.sort_by(f64::total_cmp);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.5).abs() < 1e-12 && (r[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn one_state_region_is_half_line() {
        let inst = StabilityInstance::new(vec![1.0], RealMatrix::identity(1)).unwrap();
        let r = stability_region(&inst, 10.0, &Tolerances::default()).unwrap();
        assert_eq!(r.intervals, vec![Interval { lo: 0.0, hi: f64::INFINITY }]);
        assert!(r.boundary_roots.is_empty());
        assert!(r.empty_reason.is_none());
    }
}
