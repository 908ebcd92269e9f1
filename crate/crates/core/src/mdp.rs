//! Tabular MDPs, target/behaviour policy pairs and the two-action
//! experiment construction.

use rand::Rng;
use serde::Serialize;

use crate::counterexample::CounterexampleFamily;
use crate::error::{Error, Result};
use crate::polyalg::{check_row_stochastic, RealMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transition[a][(s, s')] = p(s' | s, a)`.
    pub transition: Vec<RealMatrix>,
    /// `reward[s][a] = r(s, a)`.
    pub reward: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

fn check_distribution(p: &[f64], what: &str, tol: f64) -> Result<()> {
    if let Some(j) = p.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Validation(format!("{what}[{j}] = {} is not a probability", p[j])));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::Validation(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

impl TabularMdp {
    pub fn new(
        transition: Vec<RealMatrix>,
        reward: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let n_actions = transition.len();
        if n_actions == 0 {
            return Err(Error::Validation("MDP has no actions".into()));
        }
        let n_states = transition[0].dim();
        if n_states == 0 {
            return Err(Error::Validation("MDP has no states".into()));
        }
        for (a, p) in transition.iter().enumerate() {
            if p.dim() != n_states {
                return Err(Error::Dimension(format!(
                    "transition matrix of action {a} is {0}x{0}, expected {n_states}",
                    p.dim()
                )));
            }
            check_row_stochastic(p, 1e-12)
                .map_err(|e| Error::Validation(format!("action {a}: {e}")))?;
        }
        if reward.len() != n_states || reward.iter().any(|r| r.len() != n_actions) {
            return Err(Error::Dimension(format!(
                "reward table must be {n_states}x{n_actions}"
            )));
        }
        if reward.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("reward table".into()));
        }
        if initial.len() != n_states {
            return Err(Error::Dimension("initial distribution length".into()));
        }
        check_distribution(&initial, "initial", 1e-12)?;
        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            initial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyPair {
    /// `pi[s][a] = π(a | s)`.
    pub pi: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    /// `rho[s][a] = π(a|s) / μ(a|s)`, zero where `μ(a|s) = 0`.
    pub rho: Vec<Vec<f64>>,
}

impl PolicyPair {
    pub fn new(pi: Vec<Vec<f64>>, mu: Vec<Vec<f64>>) -> Result<Self> {
        if pi.len() != mu.len() || pi.iter().zip(&mu).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Dimension("policy tables differ in shape".into()));
        }
        for (s, (p, m)) in pi.iter().zip(&mu).enumerate() {
            check_distribution(p, &format!("pi[{s}]"), 1e-12)?;
            check_distribution(m, &format!("mu[{s}]"), 1e-12)?;
            if let Some(a) = (0..p.len()).find(|&a| p[a] > 0.0 && m[a] == 0.0) {
                return Err(Error::Validation(format!(
                    "pi(a{a}|s{s}) > 0 but mu(a{a}|s{s}) = 0"
                )));
            }
        }
        let rho = pi
            .iter()
            .zip(&mu)
            .map(|(p, m)| {
                p.iter()
                    .zip(m)
                    .map(|(&p, &m)| if m > 0.0 { p / m } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self { pi, mu, rho })
    }

    pub fn check_against(&self, mdp: &TabularMdp) -> Result<()> {
        if self.pi.len() != mdp.n_states || self.pi.iter().any(|r| r.len() != mdp.n_actions) {
            return Err(Error::Dimension(format!(
                "policy tables must be {}x{}",
                mdp.n_states, mdp.n_actions
            )));
        }
        Ok(())
    }
}

/// Largest mixing weight for which `(e d_μᵀ − κ P_π) / (1 − κ)` stays
/// nonnegative: `min d_μ[j] / P_π[i, j]` over positive entries, capped just
/// below 1.
pub fn kappa_max(p_pi: &RealMatrix, d_mu: &[f64]) -> Result<f64> {
    let n = p_pi.dim();
    if d_mu.len() != n {
        return Err(Error::Dimension("d_mu length".into()));
    }
    let mut k = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if p_pi[(i, j)] > 0.0 {
                k = k.min(d_mu[j] / p_pi[(i, j)]);
            }
        }
    }
    let k = k.min(1.0 - 1e-9);
    if !(k > 0.0) {
        return Err(Error::Structure(format!("kappa_max = {k} is not positive")));
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentMdp {
    pub mdp: TabularMdp,
    pub policies: PolicyPair,
    pub kappa: f64,
    pub kappa_max: f64,
    /// The behaviour transition matrix `κ P_π + (1 − κ) R`.
    pub p_mu: RealMatrix,
}

const CLAMP: f64 = 1e-14;

/// Two-action MDP with zero reward: action 0 follows `P_π`, action 1
/// follows `R = (e d_μᵀ − κ P_π) / (1 − κ)`. The target policy always picks
/// action 0; the behaviour policy picks it with probability `κ`, so that
/// behaviour transitions are `e d_μᵀ`.
pub fn build_experiment_mdp_from(
    d_mu: &[f64],
    p_pi: &RealMatrix,
    initial_state: usize,
    kappa: Option<f64>,
) -> Result<ExperimentMdp> {
    let n = p_pi.dim();
    check_distribution(d_mu, "d_mu", 1e-12)?;
    if initial_state >= n {
        return Err(Error::Domain(format!("initial state {initial_state} out of range")));
    }
    let kmax = kappa_max(p_pi, d_mu)?;
    let kappa = kappa.unwrap_or(kmax.min(0.5));
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("kappa = {kappa} must lie in (0, 1)")));
    }
    if kappa > kmax {
        let (i, j) = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| kappa * p_pi[(i, j)] > d_mu[j])
            .unwrap_or((0, 0));
        return Err(Error::Domain(format!(
            "kappa = {kappa} exceeds kappa_max = {kmax}: kappa * P_pi[{i},{j}] = {} > d_mu[{j}] = {}",
            kappa * p_pi[(i, j)],
            d_mu[j]
        )));
    }

    let mut r = RealMatrix::from_fn(n, |i, j| (d_mu[j] - kappa * p_pi[(i, j)]) / (1.0 - kappa));
    for i in 0..n {
        for j in 0..n {
            let x = r[(i, j)];
            if x < -CLAMP {
                return Err(Error::Inconsistent(format!("R[{i},{j}] = {x:e} is negative")));
            }
            if x < 0.0 {
                r[(i, j)] = 0.0;
            }
        }
        let s: f64 = r.row(i).iter().sum();
        for j in 0..n {
            r[(i, j)] /= s;
        }
    }
    let p_mu = p_pi.scale(kappa).add(&r.scale(1.0 - kappa));
    for i in 0..n {
        for j in 0..n {
            if (p_mu[(i, j)] - d_mu[j]).abs() > 1e-12 {
                return Err(Error::Inconsistent(format!(
                    "behaviour transition P_mu[{i},{j}] = {} differs from d_mu[{j}] = {}",
                    p_mu[(i, j)],
                    d_mu[j]
                )));
            }
        }
    }

    let mut initial = vec![0.0; n];
    initial[initial_state] = 1.0;
    let mdp = TabularMdp::new(vec![p_pi.clone(), r], vec![vec![0.0; 2]; n], initial)?;
    let policies = PolicyPair::new(vec![vec![1.0, 0.0]; n], vec![vec![kappa, 1.0 - kappa]; n])?;
    Ok(ExperimentMdp {
        mdp,
        policies,
        kappa,
        kappa_max: kmax,
        p_mu,
    })
}

/// The experiment MDP on a counterexample family, started in `a_1`.
pub fn build_experiment_mdp(fam: &CounterexampleFamily, kappa: Option<f64>) -> Result<ExperimentMdp> {
    build_experiment_mdp_from(&fam.d_mu, &fam.p_pi, 0, kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
    pub rho: f64,
}

/// Precomputed cumulative tables for fast sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    mu_cum: Vec<Vec<f64>>,
    /// `p_cum[s * n_actions + a]`.
    p_cum: Vec<Vec<f64>>,
    initial_cum: Vec<f64>,
    reward: Vec<Vec<f64>>,
    rho: Vec<Vec<f64>>,
    n_actions: usize,
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut c: Vec<f64> = p
        .iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect();
    // Pin the top of the table so a uniform draw in [0, 1) always lands on a
    // positive-probability entry.
    if let Some(last) = p.iter().rposition(|&x| x > 0.0) {
        for v in c.iter_mut().skip(last) {
            *v = 1.0;
        }
    }
    c
}

fn draw(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

impl Sampler {
    pub fn new(mdp: &TabularMdp, pol: &PolicyPair) -> Result<Self> {
        pol.check_against(mdp)?;
        let mut p_cum = Vec::with_capacity(mdp.n_states * mdp.n_actions);
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                p_cum.push(cumulative(mdp.transition[a].row(s)));
            }
        }
        Ok(Self {
            mu_cum: pol.mu.iter().map(|r| cumulative(r)).collect(),
            p_cum,
            initial_cum: cumulative(&mdp.initial),
            reward: mdp.reward.clone(),
            rho: pol.rho.clone(),
            n_actions: mdp.n_actions,
        })
    }

    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        draw(&self.initial_cum, rng.random::<f64>())
    }

    /// One behaviour step from `s`: `A ~ μ(·|s)`, `S' ~ p(·|s, A)`.
    pub fn step<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> Transition {
        let a = draw(&self.mu_cum[s], rng.random::<f64>());
        let s_next = draw(&self.p_cum[s * self.n_actions + a], rng.random::<f64>());
        Transition {
            a,
            r: self.reward[s][a],
            s_next,
            rho: self.rho[s][a],
        }
    }
}

/// Convenience wrapper around [`Sampler::step`].
pub fn sample_step<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    pol: &PolicyPair,
    s: usize,
    rng: &mut R,
) -> Result<Transition> {
    Ok(Sampler::new(mdp, pol)?.step(s, rng))
}
