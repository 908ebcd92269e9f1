//! Simultaneous polynomial root iteration (Aberth–Ehrlich).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::RealPolynomial;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Group of roots lying within the cluster tolerance of each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// All `n` roots with multiplicity, conjugate pairs adjacent.
    pub roots: Vec<Complex64>,
    pub clusters: Vec<RootCluster>,
    pub iterations: usize,
    pub max_residual: f64,
}

impl RootSet {
    pub fn max_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).max().unwrap_or(0)
    }
}

fn residual_ok(p: &RealPolynomial, z: Complex64, tol: f64) -> (bool, f64) {
    let r = p.eval(z).norm();
    let scale = (1.0 + p.max_abs_coeff()).max(p.abs_scale(z));
    (r <= tol * scale, r / scale)
}

/// All roots of `p`, counted with multiplicity.
pub fn poly_roots(p: &RealPolynomial, tol: &Tolerances) -> Result<RootSet> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::Polynomial("degree 0 polynomial has no roots".into()));
    }
    let c = p.coeffs();
    if n == 1 {
        let z = Complex64::new(-c[1], 0.0);
        return Ok(finish(p, vec![z], 0, tol));
    }

    // Initial circle about the centroid; radius from the coefficient bound of
    // the shifted polynomial, angles jittered deterministically.
    let center = -c[1] / n as f64;
    let radius = (1..=n)
        .map(|k| c[k].abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut rng = ChaCha8Rng::seed_from_u64(tol.root_seed);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = (2.0 * std::f64::consts::PI * k as f64 + rng.random::<f64>()) / n as f64
                + 0.4;
            let r = radius * (0.5 + 0.5 * rng.random::<f64>());
            Complex64::new(center, 0.0) + Complex64::from_polar(r, theta)
        })
        .collect();

    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < tol.root_max_iter {
        iterations += 1;
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dp) = p.eval_with_derivative(z[i]);
            if pv == Complex64::new(0.0, 0.0) {
                done[i] = true;
                continue;
            }
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d == Complex64::new(0.0, 0.0) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = if dp == Complex64::new(0.0, 0.0) {
                Complex64::new(radius * 1e-3, radius * 1e-3)
            } else {
                let ratio = pv / dp;
                let denom = Complex64::new(1.0, 0.0) - ratio * sum;
                if denom.norm() == 0.0 {
                    ratio
                } else {
                    ratio / denom
                }
            };
            z[i] -= step;
            let (ok, _) = residual_ok(p, z[i], tol.root_residual);
            if ok && step.norm() <= 1e-14 * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
        // A root whose residual is at the rounding floor stops moving
        // meaningfully even if the step test above has not fired.
        if iterations % 25 == 0 && z.iter().all(|&zi| residual_ok(p, zi, tol.root_residual).0) {
            break;
        }
    }

    let worst = z
        .iter()
        .map(|&zi| residual_ok(p, zi, tol.root_residual))
        .fold((true, 0.0f64), |(a, m), (ok, r)| (a && ok, m.max(r)));
    if !worst.0 {
        return Err(Error::Convergence {
            what: "polynomial root iteration",
            iterations,
            residual: worst.1,
        });
    }
    Ok(finish(p, z, iterations, tol))
}

fn finish(p: &RealPolynomial, z: Vec<Complex64>, iterations: usize, tol: &Tolerances) -> RootSet {
    let roots = pair_conjugates(z);
    let clusters = cluster(&roots, tol.root_cluster);
    let max_residual = roots
        .iter()
        .map(|&r| residual_ok(p, r, tol.root_residual).1)
        .fold(0.0, f64::max);
    RootSet {
        roots,
        clusters,
        iterations,
        max_residual,
    }
}

/// Snaps nearly conjugate roots of a real polynomial onto exact pairs and
/// nearly real roots onto the real axis.
fn pair_conjugates(mut z: Vec<Complex64>) -> Vec<Complex64> {
    const PAIR_TOL: f64 = 1e-6;
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
    let n = z.len();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if used[i] || z[i].im <= 0.0 {
            continue;
        }
        let target = z[i].conj();
        let partner = (0..n)
            .filter(|&j| j != i && !used[j] && z[j].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
        if let Some(j) = partner {
            if (z[j] - target).norm() <= PAIR_TOL * (1.0 + z[i].norm()) {
                used[i] = true;
                used[j] = true;
                let avg = (z[i] + z[j].conj()) * 0.5;
                if avg.im.abs() <= PAIR_TOL * 1e-3 * (1.0 + avg.norm()) {
                    out.push(Complex64::new(avg.re, 0.0));
                    out.push(Complex64::new(avg.re, 0.0));
                } else {
                    out.push(avg);
                    out.push(avg.conj());
                }
            }
        }
    }
    for i in 0..n {
        if used[i] {
            continue;
        }
        let zi = z[i];
        if zi.im.abs() <= PAIR_TOL * (1.0 + zi.norm()) {
            out.push(Complex64::new(zi.re, 0.0));
        } else {
            out.push(zi);
        }
    }
    out
}

/// Single-linkage clustering of points within `tol` of each other.
pub fn cluster(points: &[Complex64], tol: f64) -> Vec<RootCluster> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut k = i;
        while label[k] != r {
            let next = label[k];
            label[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += points[i];
                g.2 += 1;
            }
            None => groups.push((r, points[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, m)| RootCluster {
            center: sum / m as f64,
            multiplicity: m,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_root(set: &RootSet, z: Complex64, tol: f64) -> bool {
        set.roots.iter().any(|r| (r - z).norm() <= tol)
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = RealPolynomial::new(vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        let set = poly_roots(&p, &Tolerances::default()).unwrap();
        assert_eq!(set.roots.len(), 3);
        for k in 0..3 {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            assert!(has_root(&set, w, 1e-12), "{:?}", set.roots);
        }
    }

    #[test]
    fn hurwitz_boundary_cubics() {
        // (s+4)(s^2+6) and (s+6)(s^2+12)
        let tol = Tolerances::default();
        let p1 = RealPolynomial::new(vec![1.0, 4.0, 6.0, 24.0]).unwrap();
        let s1 = poly_roots(&p1, &tol).unwrap();
        assert!(has_root(&s1, Complex64::new(-4.0, 0.0), 1e-12));
        assert!(has_root(&s1, Complex64::new(0.0, 6f64.sqrt()), 1e-12));
        assert!(has_root(&s1, Complex64::new(0.0, -(6f64.sqrt())), 1e-12));

        let p3 = RealPolynomial::new(vec![1.0, 6.0, 12.0, 72.0]).unwrap();
        let s3 = poly_roots(&p3, &tol).unwrap();
        assert!(has_root(&s3, Complex64::new(-6.0, 0.0), 1e-12));
        assert!(has_root(&s3, Complex64::new(0.0, 12f64.sqrt()), 1e-12));
    }

    #[test]
    fn conjugate_pairs_are_exact() {
        let p = RealPolynomial::new(vec![1.0, 4.0, 6.0, 24.0]).unwrap();
        let set = poly_roots(&p, &Tolerances::default()).unwrap();
        for r in set.roots.iter().filter(|r| r.im != 0.0) {
            assert!(set.roots.contains(&r.conj()));
        }
    }

    #[test]
    fn double_root_is_clustered() {
        let p = RealPolynomial::new(vec![1.0, -2.0, 1.0]).unwrap();
        let set = poly_roots(&p, &Tolerances::default()).unwrap();
        assert_eq!(set.max_multiplicity(), 2);
        assert!((set.clusters[0].center - Complex64::new(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn degree_zero_rejected() {
        let p = RealPolynomial::new(vec![1.0]).unwrap();
        assert!(poly_roots(&p, &Tolerances::default()).is_err());
    }

    #[test]
    fn tiny_budget_reports_convergence_error() {
        let p = RealPolynomial::from_roots(
            &(1..=8).map(|k| Complex64::new(k as f64, 0.0)).collect::<Vec<_>>(),
        );
        let tol = Tolerances {
            root_max_iter: 1,
            ..Tolerances::default()
        };
        assert!(matches!(poly_roots(&p, &tol), Err(Error::Convergence { .. })));
    }
}
