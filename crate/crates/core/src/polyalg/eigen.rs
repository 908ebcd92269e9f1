use nalgebra::Schur;
use num_complex::Complex64;

use super::linsolve::solve_complex;
use super::matrix::{cnorm2, ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a real square matrix from its real Schur form, sorted by
/// real part then imaginary part.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex64>> {
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    // A deflation threshold of exactly one ulp can stall on clustered
    // spectra, so a few slightly looser thresholds are tried in turn.
    let schur = [4.0, 64.0, 1024.0]
        .iter()
        .find_map(|f| Schur::try_new(m.to_nalgebra(), f * f64::EPSILON, SCHUR_MAX_ITER))
        .ok_or(Error::Convergence {
            what: "real Schur decomposition",
            iterations: SCHUR_MAX_ITER,
            residual: f64::NAN,
        })?;
    let mut ev: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// Unit eigenvector for an approximate eigenvalue by shifted inverse
/// iteration. The phase is fixed so that the entry of largest modulus is
/// real and positive.
pub fn eigvec_for_eigenvalue(
    m: &RealMatrix,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let scale = 1.0 + m.inf_norm();
    let shift = lambda + Complex64::new(1e-11, 1e-11) * scale;
    let a = ComplexMatrix::shifted(shift, m);
    // Deterministic, non-degenerate start vector.
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.01 * (i % 3) as f64))
        .collect();
    let nv = cnorm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut last = f64::INFINITY;
    for it in 0..60 {
        let mut w = match solve_complex(&a, &v, 0.0) {
            Ok(w) => w,
            // An exactly singular shifted matrix means the shift hit an
            // eigenvalue; the current iterate is then already an eigenvector.
            Err(Error::Singular { .. }) => v.clone(),
            Err(e) => return Err(e),
        };
        let nw = cnorm2(&w);
        if !(nw.is_finite() && nw > 0.0) {
            return Err(Error::Convergence {
                what: "inverse iteration",
                iterations: it,
                residual: f64::NAN,
            });
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        let res = eig_residual(m, lambda, &v);
        if res <= tol.eigvec_residual && it >= 1 {
            return Ok(canonical_phase(v));
        }
        if it > 8 && res >= 0.999 * last {
            return Err(Error::Convergence {
                what: "inverse iteration",
                iterations: it,
                residual: res,
            });
        }
        last = res;
    }
    Err(Error::Convergence {
        what: "inverse iteration",
        iterations: 60,
        residual: last,
    })
}

pub fn eig_residual(m: &RealMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.complex_matvec(v);
    let r: Vec<Complex64> = mv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    cnorm2(&r)
}

fn canonical_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let k = (0..v.len())
        .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    v.iter_mut().for_each(|x| *x *= phase);
    v
}
