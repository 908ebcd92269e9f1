//! Discounted and differential TD(0) under global and local learning-rate
//! clocks, and the deterministic expected-update recursion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{PolicyPair, Sampler, TabularMdp, Transition};
use crate::polyalg::{eigenvalues, eigvec_for_eigenvalue, norm2, RealMatrix};
use crate::stability::{build_a, build_l, StabilityInstance};
use crate::tolerance::Tolerances;

/// `α_n = c / (n0 + n)^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub c: f64,
    pub n0: f64,
    pub beta: f64,
}

impl Schedule {
    /// `0.45 / (10⁴ + n)^0.6`.
    pub const PAPER: Schedule = Schedule {
        c: 0.45,
        n0: 1e4,
        beta: 0.6,
    };

    pub fn new(c: f64, n0: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(n0 >= 0.0 && n0.is_finite()) || !(beta > 0.5 && beta <= 1.0) {
            return Err(Error::Domain(format!(
                "schedule needs c > 0, n0 >= 0, beta in (0.5, 1]; got c={c}, n0={n0}, beta={beta}"
            )));
        }
        Ok(Self { c, n0, beta })
    }

    pub fn lr(&self, n: u64) -> f64 {
        self.c / (self.n0 + n as f64).powf(self.beta)
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::PAPER
    }
}

/// Which counter indexes the learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// `n = t + 1`.
    Global,
    /// `n = ν(S_t, t)`, the visit count of the current state including the
    /// current visit.
    Local,
}

impl Clock {
    pub fn name(self) -> &'static str {
        match self {
            Clock::Global => "global",
            Clock::Local => "local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Algorithm {
    Discounted { gamma: f64 },
    Differential { eta: f64 },
}

impl Algorithm {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::Discounted { gamma } if !(0.0..1.0).contains(&gamma) => {
                Err(Error::Domain(format!("gamma = {gamma} must lie in [0, 1)")))
            }
            Algorithm::Differential { eta } if !(eta > 0.0 && eta.is_finite()) => {
                Err(Error::Domain(format!("eta = {eta} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdState {
    pub v: Vec<f64>,
    pub j_hat: f64,
    pub visits: Vec<u64>,
    pub t: u64,
}

impl TdState {
    pub fn new(v: Vec<f64>, j_hat: f64) -> Self {
        let n = v.len();
        Self {
            v,
            j_hat,
            visits: vec![0; n],
            t: 0,
        }
    }

    fn rate(&mut self, s: usize, sched: &Schedule, clock: Clock) -> f64 {
        self.visits[s] += 1;
        let n = match clock {
            Clock::Global => self.t + 1,
            Clock::Local => self.visits[s],
        };
        sched.lr(n)
    }

    /// `δ = r − Ĵ + v(s') − v(s)`, `v(s) += α ρ δ`, `Ĵ += α η ρ δ`, with the
    /// same `α` in both updates.
    pub fn differential_step(&mut self, s: usize, tr: &Transition, eta: f64, sched: &Schedule, clock: Clock) {
        let alpha = self.rate(s, sched, clock);
        let delta = tr.r - self.j_hat + self.v[tr.s_next] - self.v[s];
        let inc = alpha * tr.rho * delta;
        self.v[s] += inc;
        self.j_hat += eta * inc;
        self.t += 1;
    }

    /// `δ = r + γ v(s') − v(s)`, `v(s) += α ρ δ`.
    pub fn discounted_step(&mut self, s: usize, tr: &Transition, gamma: f64, sched: &Schedule, clock: Clock) {
        let alpha = self.rate(s, sched, clock);
        let delta = tr.r + gamma * self.v[tr.s_next] - self.v[s];
        self.v[s] += alpha * tr.rho * delta;
        self.t += 1;
    }

    pub fn step(&mut self, s: usize, tr: &Transition, algo: Algorithm, sched: &Schedule, clock: Clock) {
        match algo {
            Algorithm::Discounted { gamma } => self.discounted_step(s, tr, gamma, sched, clock),
            Algorithm::Differential { eta } => self.differential_step(s, tr, eta, sched, clock),
        }
    }
}

pub fn dist_to_span_e(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>().sqrt()
}

/// Initial values: the real part of an eigenvector of `A_η` for its
/// eigenvalue of smallest real part (ties: smaller `|Im|`, then order),
/// normalized to unit length with its largest-magnitude entry positive, and
/// `Ĵ₀ = η eᵀv₀`.
pub fn init_v0(a_eta: &RealMatrix, eta: f64, tol: &Tolerances) -> Result<(Vec<f64>, f64)> {
    let ev = eigenvalues(a_eta)?;
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tie = 1e-12 * scale;
    let mut best = 0;
    for i in 1..ev.len() {
        let (a, b) = (ev[i], ev[best]);
        if a.re < b.re - tie || ((a.re - b.re).abs() <= tie && a.im.abs() < b.im.abs() - tie) {
            best = i;
        }
    }
    let w = eigvec_for_eigenvalue(a_eta, ev[best], tol)?;
    let mut v: Vec<f64> = w.iter().map(|z| z.re).collect();
    let nv = norm2(&v);
    if !(nv > 0.0) {
        return Err(Error::Inconsistent("eigenvector has zero real part".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let k = (0..v.len())
        .max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()))
        .unwrap_or(0);
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let j0 = eta * v.iter().sum::<f64>();
    Ok((v, j0))
}

/// Above this magnitude metrics are reported as capped and the run is
/// flagged as diverged.
pub const METRIC_CAP: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: u64,
    pub norm_v: f64,
    pub dist_e: f64,
    pub j_hat: f64,
    pub diverged: bool,
}

fn cap(x: f64) -> (f64, bool) {
    if x.is_nan() || x.abs() > METRIC_CAP {
        (if x < 0.0 { -METRIC_CAP } else { METRIC_CAP }, true)
    } else {
        (x, false)
    }
}

impl Checkpoint {
    fn measure(t: u64, v: &[f64], j_hat: f64) -> Self {
        let (norm_v, a) = cap(norm2(v));
        let (dist_e, b) = cap(dist_to_span_e(v));
        let (j_hat, c) = cap(j_hat);
        Self {
            t,
            norm_v,
            dist_e,
            j_hat,
            diverged: a || b || c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdTrajectory {
    pub checkpoints: Vec<Checkpoint>,
}

impl TdTrajectory {
    pub fn first(&self) -> &Checkpoint {
        &self.checkpoints[0]
    }

    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("trajectory has a checkpoint at t = 0")
    }

    pub fn diverged(&self) -> bool {
        self.checkpoints.iter().any(|c| c.diverged)
    }
}

/// `0`, then `⌈r^k⌉` for `k = 1, 2, …` (deduplicated), then `steps`.
pub fn checkpoint_times(steps: u64, ratio: f64) -> Result<Vec<u64>> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::Domain(format!("checkpoint ratio {ratio} must exceed 1")));
    }
    let mut times = vec![0];
    let mut x = 1.0f64;
    while x < steps as f64 {
        let t = x.ceil() as u64;
        if t > *times.last().unwrap() && t < steps {
            times.push(t);
        }
        x *= ratio;
    }
    if steps > 0 {
        times.push(steps);
    }
    Ok(times)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdRun {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    pub clock: Clock,
    pub steps: u64,
    pub seed: u64,
    pub checkpoint_ratio: f64,
    pub v0: Vec<f64>,
    pub j0: f64,
}

/// Simulates the TD recursion along one behaviour trajectory. Deterministic
/// given the seed; the generator is ChaCha8.
pub fn run_td(mdp: &TabularMdp, pol: &PolicyPair, run: &TdRun) -> Result<TdTrajectory> {
    run.algorithm.validate()?;
    if run.v0.len() != mdp.n_states {
        return Err(Error::Dimension(format!(
            "v0 has length {}, MDP has {} states",
            run.v0.len(),
            mdp.n_states
        )));
    }
    let sampler = Sampler::new(mdp, pol)?;
    let times = checkpoint_times(run.steps, run.checkpoint_ratio)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut state = TdState::new(run.v0.clone(), run.j0);
    let mut s = sampler.initial_state(&mut rng);
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut next = 0;
    loop {
        while next < times.len() && times[next] == state.t {
            checkpoints.push(Checkpoint::measure(state.t, &state.v, state.j_hat));
            next += 1;
        }
        if next == times.len() {
            break;
        }
        if !state.v.iter().all(|x| x.is_finite()) || !state.j_hat.is_finite() {
            // Nothing further is informative once the state overflowed.
            for &t in &times[next..] {
                checkpoints.push(Checkpoint::measure(t, &state.v, state.j_hat));
            }
            break;
        }
        let tr = sampler.step(s, &mut rng);
        state.step(s, &tr, run.algorithm, &run.schedule, run.clock);
        s = tr.s_next;
    }
    Ok(TdTrajectory { checkpoints })
}

/// Noiseless mean recursion of differential TD under the global clock with
/// zero rewards: `g = L v + Ĵ d_μ`, `v ← v − α_t g`, `Ĵ ← Ĵ − α_t η eᵀg`.
/// With `Ĵ₀ = η eᵀv₀` this is `v ← v − α_t A_η v`.
pub fn expected_update_run(
    inst: &StabilityInstance,
    eta: f64,
    sched: &Schedule,
    steps: u64,
    v0: &[f64],
    j0: f64,
    checkpoint_ratio: f64,
) -> Result<TdTrajectory> {
    build_a(inst, eta)?;
    if v0.len() != inst.n() {
        return Err(Error::Dimension("v0 length".into()));
    }
    let l = build_l(inst);
    let d = inst.d_mu();
    let n = inst.n();
    let times = checkpoint_times(steps, checkpoint_ratio)?;
    let mut v = v0.to_vec();
    let mut j = j0;
    let mut g = vec![0.0; n];
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut t = 0u64;
    for &target in &times {
        while t < target {
            let alpha = sched.lr(t + 1);
            for i in 0..n {
                let row = l.row(i);
                let mut acc = j * d[i];
                for k in 0..n {
                    acc += row[k] * v[k];
                }
                g[i] = acc;
            }
            let sum_g: f64 = g.iter().sum();
            for i in 0..n {
                v[i] -= alpha * g[i];
            }
            j -= alpha * eta * sum_g;
            t += 1;
        }
        checkpoints.push(Checkpoint::measure(t, &v, j));
    }
    Ok(TdTrajectory { checkpoints })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert!((Schedule::PAPER.lr(0) - 0.45 * 10f64.powf(-2.4)).abs() < 1e-15);
        assert_eq!(Schedule::new(1.0, 0.0, 1.0).unwrap().lr(1), 1.0);
        assert!(Schedule::new(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn span_distance() {
        assert_eq!(dist_to_span_e(&[7.0; 4]), 0.0);
        assert!((dist_to_span_e(&[1.0, -1.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(checkpoint_times(0, 1.2).unwrap(), vec![0]);
        let t = checkpoint_times(100, 1.2).unwrap();
        assert_eq!(t[0], 0);
        assert_eq!(*t.last().unwrap(), 100);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(checkpoint_times(10, 1.0).is_err());
    }

    #[test]
    fn local_clock_counts_current_visit() {
        let sched = Schedule::new(1.0, 0.0, 1.0).unwrap();
        let tr = Transition {
            a: 0,
            r: 1.0,
            s_next: 1,
            rho: 1.0,
        };
        let mut g = TdState::new(vec![0.0, 0.0], 0.0);
        let mut l = g.clone();
        g.t = 9;
        l.t = 9;
        g.differential_step(0, &tr, 1.0, &sched, Clock::Global);
        l.differential_step(0, &tr, 1.0, &sched, Clock::Local);
        assert_eq!(g.v[0], 0.1);
        assert_eq!(l.v[0], 1.0);
        assert_eq!(l.visits, vec![1, 0]);
        assert_eq!(l.j_hat, 1.0);
    }
}
