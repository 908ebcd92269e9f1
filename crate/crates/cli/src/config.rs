use difftd::counterexample::{alpha_of, build_family};
use difftd::instance::InstanceFile;
use difftd::mdp::{build_experiment_mdp_from, ExperimentMdp};
use difftd::polyalg::RealMatrix;
use difftd::stability::StabilityInstance;
use difftd::td::{Algorithm, Clock, Schedule};
use difftd::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Where the instance comes from. Dense data is stored inline so a config
/// does not depend on the file it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Family { m: usize },
    Dense { d_mu: Vec<f64>, p_pi: Vec<Vec<f64>> },
}

impl Source {
    pub fn from_file(f: InstanceFile) -> Self {
        match f {
            InstanceFile::Family { m } => Source::Family { m },
            InstanceFile::Dense { d_mu, p_pi } => Source::Dense {
                d_mu,
                p_pi: p_pi.rows().map(|r| r.to_vec()).collect(),
            },
        }
    }

    pub fn instance(&self, tol: &Tolerances) -> Result<StabilityInstance, CliError> {
        Ok(match self {
            Source::Family { m } => build_family(*m)?.instance()?,
            Source::Dense { d_mu, p_pi } => {
                StabilityInstance::with_tolerances(d_mu.clone(), RealMatrix::from_rows(p_pi)?, tol)?
            }
        })
    }

    /// `α` for the family, the instance scale otherwise. Used for `t = η / η_ref`.
    pub fn eta_ref(&self, tol: &Tolerances) -> Result<f64, CliError> {
        match self {
            Source::Family { m } => Ok(alpha_of(*m)?),
            Source::Dense { .. } => Ok(self.instance(tol)?.scale()),
        }
    }

    pub fn experiment_mdp(&self, kappa: Option<f64>, initial_state: usize) -> Result<ExperimentMdp, CliError> {
        let (d, p) = match self {
            Source::Family { m } => {
                let fam = build_family(*m)?;
                (fam.d_mu.clone(), fam.p_pi.clone())
            }
            Source::Dense { d_mu, p_pi } => (d_mu.clone(), RealMatrix::from_rows(p_pi)?),
        };
        Ok(build_experiment_mdp_from(&d, &p, initial_state, kappa)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub source: Source,
    pub eta_cap: f64,
    pub verify_samples: usize,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaStarConfig {
    pub source: Source,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub grid: usize,
    pub tolerances: Tolerances,
}

/// `η = t · eta_ref` for `points` values of `t` evenly spaced on
/// `[t_min, t_max]`. Eigenvalues are reported for `A_η / eta_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub source: Source,
    pub eta_ref: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub tolerances: Tolerances,
}

impl TrajectoryConfig {
    pub fn grid(&self) -> Vec<f64> {
        let k = self.points;
        (0..k)
            .map(|i| {
                let t = if k == 1 {
                    self.t_min
                } else {
                    self.t_min + (self.t_max - self.t_min) * i as f64 / (k - 1) as f64
                };
                t * self.eta_ref
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub source: Source,
    pub algorithm: Algorithm,
    /// `η` of the matrix whose eigenvector initializes `v₀`.
    pub init_eta: f64,
    pub schedule: Schedule,
    pub steps: u64,
    pub checkpoint_ratio: f64,
    pub seeds: Vec<u64>,
    pub clocks: Vec<Clock>,
    pub kappa: Option<f64>,
    pub initial_state: usize,
    pub expected_update: bool,
    /// Step count of the runs being reproduced, when this is a scaled-down
    /// reproduction.
    pub reference_steps: Option<u64>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    StabilityRegion(RegionConfig),
    EtaStar(EtaStarConfig),
    EigenTrajectory(TrajectoryConfig),
    Simulate(SimulateConfig),
}
