//! Unadjusted Langevin chains on the Boltzmann density.
//!
//! Each chain moves by `x <- project(x - eta kappa grad f(x) + sqrt(2 eta) xi)`
//! with a finite-difference gradient and is evaluated after every move. The
//! best evaluated point over all chains is returned.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Incumbent, RunResult};
use crate::boltzmann::DEFAULT_KAPPA;
use crate::objective::{EvalCounter, Objective, FD_STEP};
use crate::rng::{stream_rng, Stream};
use crate::svgd::ParticleSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LangevinConfig {
    pub n_chains: usize,
    pub kappa: f64,
    pub eta: f64,
    pub fd_step: f64,
}

impl Default for LangevinConfig {
    fn default() -> Self {
        Self {
            n_chains: 10,
            kappa: DEFAULT_KAPPA,
            eta: 1e-5,
            fd_step: FD_STEP,
        }
    }
}

/// Runs full sweeps over the chains while one fits in the budget. A sweep
/// costs `2d + 1` evaluations per chain, after `n_chains` for the start.
pub fn langevin_run(obj: &Objective, cfg: &LangevinConfig, budget: u64, seed: u64) -> Result<RunResult> {
    let n = cfg.n_chains;
    if n == 0 {
        return Err(Error::invalid("n_chains", "must be at least 1"));
    }
    if !(cfg.eta >= 0.0 && cfg.eta.is_finite()) {
        return Err(Error::invalid("eta", "must be finite and nonnegative"));
    }
    if !(cfg.kappa > 0.0 && cfg.kappa.is_finite()) {
        return Err(Error::invalid("kappa", "must be positive"));
    }
    let d = obj.dim();
    let required = (2 * d).max(n) as u64;
    if budget < required {
        return Err(Error::BudgetTooSmall { budget, required });
    }
    let domain = obj.domain();
    let mut rng = stream_rng(seed, Stream::Langevin);
    let mut counter = EvalCounter::new();
    let mut chains = ParticleSet::uniform(domain, n, &mut rng)?.to_rows();
    let mut incumbent = Incumbent::empty();
    for x in &chains {
        let f = obj.evaluate(x, &mut counter)?;
        incumbent.offer(x, f);
    }

    let sweep = (n * (2 * d + 1)) as u64;
    let drift = cfg.eta * cfg.kappa;
    let diffusion = (2.0 * cfg.eta).sqrt();
    let mut sweeps = 0usize;
    while counter.count() + sweep <= budget {
        for x in chains.iter_mut() {
            let g = obj.fd_gradient(x, cfg.fd_step, &mut counter)?;
            for (xj, gj) in x.iter_mut().zip(&g) {
                let xi: f64 = rng.sample(StandardNormal);
                *xj += -drift * gj + diffusion * xi;
            }
            domain.project_in_place(x);
            let f = obj.evaluate(x, &mut counter)?;
            incumbent.offer(x, f);
        }
        sweeps += 1;
    }

    Ok(RunResult {
        best_x: incumbent.x,
        best_f: incumbent.f,
        evals_used: counter.count(),
        iterations_done: sweeps,
        diagnostics: Vec::new(),
        trajectory: None,
    })
}
