//! Stability analysis of differential temporal-difference learning.
//!
//! The average-reward TD recursion with a global learning-rate clock has
//! mean dynamics governed by `A_η = D_μ(I − P_π) + η d_μ eᵀ`. This crate
//! computes where that matrix is positive stable, builds an instance family
//! on which it fails, and simulates the recursion under global and local
//! clocks.

pub mod counterexample;
pub mod error;
pub mod instance;
pub mod mdp;
pub mod polyalg;
pub mod random;
pub mod stability;
pub mod td;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
