//! SBS variants and baseline optimizers behind a common result type.
//!
//! Every method draws its randomness from [`crate::rng`] streams keyed by the
//! run seed and spends evaluations only through counted calls, so a
//! `(config, seed)` pair always reproduces the same [`RunResult`].

mod cbo;
mod cmaes;
mod filter;
mod hybrid;
mod langevin;
mod method;
mod sbs;
mod woa;

use serde::{Deserialize, Serialize};

pub use cbo::{cbo_run, consensus_point, CboConfig};
pub use cmaes::{cmaes_run, CmaesConfig, CmaesOutcome, FinalGaussian};
pub use filter::{percentile, pf_filter, FilterConfig};
pub use hybrid::{hybrid_init, hybrid_run, sbs_hybrid_run, sbs_pf_hybrid_run, HybridConfig, HybridInit, InitBranch, InnerVariant};
pub use langevin::{langevin_run, LangevinConfig};
pub use method::MethodConfig;
pub use sbs::{sbs_pf_run, sbs_run, SbsConfig, HYBRID_PARTICLES, HYBRID_STEP_SIZE};
pub use woa::{woa_run, WoaConfig, WoaOutcome};

/// One row of the per-iteration diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub live_particles: usize,
    /// Minimum objective value over the current particles.
    pub min_f: f64,
    /// Running minimum of `min_f`.
    pub best_so_far: f64,
    /// KSD of the particle set the iteration started from, when requested.
    pub ksd: Option<f64>,
    pub sigma: f64,
}

/// Particle positions at one logged iteration. `ids` identify particles
/// across snapshots; filtered particles simply stop appearing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub sigma: f64,
    pub ids: Vec<usize>,
    pub positions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kappa: f64,
    pub snapshots: Vec<Snapshot>,
}

/// Outcome of a single optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evals_used: u64,
    pub iterations_done: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

/// Best point seen so far. Strict improvement only, so the earliest of equal
/// values wins.
#[derive(Debug, Clone)]
pub(crate) struct Incumbent {
    pub x: Vec<f64>,
    pub f: f64,
}

impl Incumbent {
    pub fn empty() -> Self {
        Self {
            x: Vec::new(),
            f: f64::INFINITY,
        }
    }

    pub fn offer(&mut self, x: &[f64], f: f64) {
        if f < self.f || self.x.is_empty() {
            self.f = f;
            self.x = x.to_vec();
        }
    }
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}
