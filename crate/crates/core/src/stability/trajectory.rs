use num_complex::Complex64;
use serde::Serialize;

use super::{build_a, StabilityInstance};
use crate::error::{Error, Result};
use crate::polyalg::eigenvalues;
use crate::tolerance::Tolerances;

const TIE_COST: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub eta: f64,
    /// Eigenvalues of `A_η`, entry `i` continuing track `i`.
    pub eigenvalues: Vec<Complex64>,
    /// Member of a repeated eigenvalue cluster.
    pub trivial: Vec<bool>,
}

/// A nontrivial track crossing the imaginary axis, refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisCrossing {
    pub track: usize,
    pub eta: f64,
    pub ordinate: f64,
    /// `-1` when the real part turns negative with increasing `η`, `+1`
    /// when it turns positive.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenTrajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Grid indices whose pairing with the previous point involved a tie.
    pub ambiguous: Vec<usize>,
    pub crossings: Vec<AxisCrossing>,
}

fn trivial_flags(ev: &[Complex64], tol: f64) -> Vec<bool> {
    (0..ev.len())
        .map(|i| (0..ev.len()).any(|j| j != i && (ev[i] - ev[j]).norm() <= tol))
        .collect()
}

/// Greedy nearest-neighbour assignment of `next` onto the tracks `prev`.
/// Returns the reordered `next` and whether a tie was broken.
fn pair(prev: &[Complex64], next: &[Complex64], cluster_tol: f64) -> (Vec<Complex64>, bool) {
    let n = prev.len();
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cand.push(((prev[i] - next[j]).norm(), i, j));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut track_of = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut tie = false;
    for (pos, &(cost, i, j)) in cand.iter().enumerate() {
        if track_of[i] != usize::MAX || used[j] {
            continue;
        }
        for &(c2, i2, j2) in &cand[pos + 1..] {
            if c2 - cost > TIE_COST {
                break;
            }
            let competing = (i2 == i && !used[j2] && j2 != j) || (j2 == j && track_of[i2] == usize::MAX && i2 != i);
            if competing {
                let distinct = if i2 == i {
                    (next[j2] - next[j]).norm() > cluster_tol
                } else {
                    (prev[i2] - prev[i]).norm() > cluster_tol
                };
                tie |= distinct;
            }
        }
        track_of[i] = j;
        used[j] = true;
    }
    (track_of.iter().map(|&j| next[j]).collect(), tie)
}

/// Eigenvalues of `A_η` along an increasing grid, matched into continuous
/// tracks, with imaginary-axis crossings of nontrivial tracks located.
pub fn eigen_trajectory(inst: &StabilityInstance, grid: &[f64], tol: &Tolerances) -> Result<EigenTrajectory> {
    if grid.is_empty() {
        return Err(Error::Domain("eta grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("eta grid must be strictly increasing".into()));
    }
    let mut points: Vec<TrajectoryPoint> = Vec::with_capacity(grid.len());
    let mut ambiguous = Vec::new();
    for (g, &eta) in grid.iter().enumerate() {
        let ev = eigenvalues(&build_a(inst, eta)?)?;
        let ev = match points.last() {
            None => ev,
            Some(prev) => {
                let (ordered, tie) = pair(&prev.eigenvalues, &ev, tol.eig_cluster);
                if tie {
                    ambiguous.push(g);
                }
                ordered
            }
        };
        let trivial = trivial_flags(&ev, tol.eig_cluster);
        points.push(TrajectoryPoint {
            eta,
            eigenvalues: ev,
            trivial,
        });
    }

    let mut crossings = Vec::new();
    for w in points.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        for k in 0..p.eigenvalues.len() {
            if p.trivial[k] || q.trivial[k] {
                continue;
            }
            let (a, b) = (p.eigenvalues[k], q.eigenvalues[k]);
            if a.re == 0.0 || a.re * b.re >= 0.0 {
                continue;
            }
            crossings.push(refine_crossing(inst, k, (p.eta, a), (q.eta, b))?);
        }
    }
    Ok(EigenTrajectory {
        points,
        ambiguous,
        crossings,
    })
}

fn refine_crossing(
    inst: &StabilityInstance,
    track: usize,
    (mut lo, mut zlo): (f64, Complex64),
    (mut hi, mut zhi): (f64, Complex64),
) -> Result<AxisCrossing> {
    let direction = if zhi.re < 0.0 { -1 } else { 1 };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let guess = zlo + (zhi - zlo) * 0.5;
        let ev = eigenvalues(&build_a(inst, mid)?)?;
        let z = ev
            .into_iter()
            .min_by(|x, y| (x - guess).norm().total_cmp(&(y - guess).norm()))
            .expect("nonempty spectrum");
        if z.re * zlo.re > 0.0 {
            lo = mid;
            zlo = z;
        } else {
            hi = mid;
            zhi = z;
        }
    }
    let z = if zlo.re.abs() <= zhi.re.abs() { zlo } else { zhi };
    Ok(AxisCrossing {
        track,
        eta: 0.5 * (lo + hi),
        ordinate: z.im,
        direction,
    })
}
