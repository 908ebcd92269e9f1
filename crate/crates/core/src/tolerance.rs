//! Numerical tolerances used throughout the crate.
//!
//! None of these come from the underlying theory; they are choices of this
//! implementation and every one of them can be overridden per call.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative residual accepted by the polynomial root finder.
    pub root_residual: f64,
    /// Iteration budget for the simultaneous root iteration.
    pub root_max_iter: usize,
    /// Seed for the perturbed initial circle of the root finder.
    pub root_seed: u64,
    /// Roots closer than this are reported as one cluster.
    pub root_cluster: f64,
    /// Relative pivot threshold below which elimination reports singularity.
    pub pivot: f64,
    /// Row-sum tolerance for stochastic matrices.
    pub stochastic: f64,
    /// Normalization tolerance for probability vectors.
    pub normalization: f64,
    /// Fixed-point residual for stationary distributions.
    pub stationary_residual: f64,
    /// Residual accepted by inverse iteration.
    pub eigvec_residual: f64,
    /// Eigenvalues within this distance of each other form a cluster.
    pub eig_cluster: f64,
    /// Minimum distance between a resolvent point and the spectrum.
    pub resolvent_gap: f64,
    /// Relative threshold for a Hurwitz determinant to count as identically zero.
    pub zero_polynomial: f64,
    /// Hadamard-ratio threshold used by the nonsingularity check.
    pub nonsingular: f64,
    /// Relative tolerance of the coefficient-linearity check.
    pub linearity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_residual: 1e-10,
            root_max_iter: 500,
            root_seed: 0x005e_ed0f_c10c,
            root_cluster: 1e-7,
            pivot: 1e-14,
            stochastic: 1e-12,
            normalization: 1e-12,
            stationary_residual: 1e-10,
            eigvec_residual: 1e-8,
            eig_cluster: 1e-7,
            resolvent_gap: 1e-9,
            zero_polynomial: 1e-12,
            nonsingular: 1e-12,
            linearity: 1e-8,
        }
    }
}
