//! Stein Boltzmann Sampling (SBS).
//!
//! Deterministic particle-based global optimization: particles start
//! uniformly over a box and are transported by Stein Variational Gradient
//! Descent toward the Boltzmann distribution `exp(-kappa * f)`, whose mass
//! concentrates on the global minimizers of `f` as `kappa` grows.
//!
//! The crate is organized bottom-up:
//!
//! - [`objective`]: box domains, counted evaluations, finite-difference gradients
//! - [`benchmarks`]: the standard test-function registry
//! - [`kernel`]: the RBF kernel and bandwidth policies
//! - [`boltzmann`]: the Boltzmann target, grid quadrature and the KSD diagnostic
//! - [`svgd`]: the SVGD update direction, Adam stepping, force decomposition
//! - [`optimizers`]: SBS, SBS-PF, the hybrids and the baselines

pub mod benchmarks;
pub mod boltzmann;
mod error;
pub mod kernel;
pub mod objective;
pub mod optimizers;
pub mod rng;
pub mod svgd;

pub use error::{Error, Result};
pub use objective::{BoxDomain, EvalCounter, Objective};
