//! Hybrid initialization and SBS continuation.
//!
//! CMA-ES runs first on a fixed evaluation budget, then WOA runs with as many
//! whales as there are particles. The particles for SBS are drawn from the
//! final CMA-ES Gaussian when CMA-ES found the strictly better value, and are
//! WOA's final population otherwise. SBS then continues from there with the
//! tiny hybrid bandwidth, so each particle effectively descends on its own.

use serde::{Deserialize, Serialize};

use super::{cmaes_run, sbs_pf_run, sbs_run, woa_run, CmaesConfig, FilterConfig, Incumbent, RunResult, SbsConfig, WoaConfig};
use crate::kernel::BandwidthPolicy;
use crate::objective::{EvalCounter, Objective};
use crate::rng::{stream_rng, Stream};
use crate::svgd::ParticleSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    /// Evaluations given to CMA-ES.
    pub cmaes_budget: u64,
    pub woa_iterations: usize,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            cmaes_budget: 1000,
            woa_iterations: 1000,
        }
    }
}

impl HybridConfig {
    fn woa(&self, n: usize) -> WoaConfig {
        WoaConfig {
            n_agents: n.max(2),
            iterations: self.woa_iterations,
        }
    }

    /// Upper bound on the evaluations spent by [`hybrid_init`] with `n`
    /// particles.
    pub fn init_cost(&self, n: usize) -> u64 {
        self.cmaes_budget + self.woa(n).cost()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cmaes_budget == 0 {
            return Err(Error::invalid("cmaes_budget", "must be positive"));
        }
        if self.woa_iterations == 0 {
            return Err(Error::invalid("woa_iterations", "must be positive"));
        }
        Ok(())
    }
}

/// Which SBS variant continues after the initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerVariant {
    Plain,
    Pf(FilterConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitBranch {
    CmaEs,
    Woa,
}

#[derive(Debug, Clone)]
pub struct HybridInit {
    pub particles: ParticleSet,
    pub branch: InitBranch,
    pub cmaes_best_f: f64,
    pub woa_best_f: f64,
    /// Best point evaluated during initialization.
    pub best_x: Vec<f64>,
    pub best_f: f64,
}

/// Runs CMA-ES for `cmaes_budget` evaluations and WOA with `n` whales, then
/// returns `n` starting particles from the better of the two. WOA needs two
/// whales, so with `n = 1` it runs two and the better one is kept.
pub fn hybrid_init(
    obj: &Objective,
    n: usize,
    cfg: &HybridConfig,
    seed: u64,
    counter: &mut EvalCounter,
) -> Result<HybridInit> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::invalid("n_particles", "must be at least 1"));
    }
    let cma = cmaes_run(obj, &CmaesConfig::default(), cfg.cmaes_budget, seed)?;
    counter.add(cma.result.evals_used);
    let woa = woa_run(obj, &cfg.woa(n), seed)?;
    counter.add(woa.result.evals_used);

    let mut best = Incumbent::empty();
    best.offer(&cma.result.best_x, cma.result.best_f);
    best.offer(&woa.result.best_x, woa.result.best_f);

    let (branch, rows) = if cma.result.best_f < woa.result.best_f {
        let mut rng = stream_rng(seed, Stream::HybridSample);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| cma.gaussian.sample(&mut rng)).collect();
        (InitBranch::CmaEs, rows)
    } else {
        let mut order: Vec<usize> = (0..woa.population.len()).collect();
        order.sort_by(|&a, &b| woa.values[a].total_cmp(&woa.values[b]).then(a.cmp(&b)));
        let rows = if n < woa.population.len() {
            order[..n].iter().map(|&i| woa.population[i].clone()).collect()
        } else {
            woa.population
        };
        (InitBranch::Woa, rows)
    };

    Ok(HybridInit {
        particles: ParticleSet::from_rows(&rows)?,
        branch,
        cmaes_best_f: cma.result.best_f,
        woa_best_f: woa.result.best_f,
        best_x: best.x,
        best_f: best.f,
    })
}

/// SBS-HYBRID: [`hybrid_init`] followed by plain SBS on the remaining budget.
pub fn sbs_hybrid_run(obj: &Objective, cfg: &SbsConfig, hybrid: &HybridConfig, budget: u64, seed: u64) -> Result<RunResult> {
    hybrid_run(obj, cfg, hybrid, InnerVariant::Plain, budget, seed)
}

/// SBS-PF-HYBRID: [`hybrid_init`] followed by SBS-PF on the remaining budget.
pub fn sbs_pf_hybrid_run(
    obj: &Objective,
    cfg: &SbsConfig,
    filter: &FilterConfig,
    hybrid: &HybridConfig,
    budget: u64,
    seed: u64,
) -> Result<RunResult> {
    hybrid_run(obj, cfg, hybrid, InnerVariant::Pf(*filter), budget, seed)
}

/// Shared driver. The continuation always uses the hybrid bandwidth whatever
/// `cfg.bandwidth` says; the other SBS settings are taken from `cfg`. When the
/// budget left after initialization cannot pay for one iteration plus the
/// final evaluation, the initialization incumbent is returned.
pub fn hybrid_run(
    obj: &Objective,
    cfg: &SbsConfig,
    hybrid: &HybridConfig,
    inner: InnerVariant,
    budget: u64,
    seed: u64,
) -> Result<RunResult> {
    cfg.validate()?;
    let n = cfg.n_particles;
    let required = hybrid.init_cost(n);
    if budget < required {
        return Err(Error::BudgetTooSmall { budget, required });
    }
    let mut counter = EvalCounter::new();
    let init = hybrid_init(obj, n, hybrid, seed, &mut counter)?;
    let remaining = budget - counter.count();
    let d = obj.dim() as u64;
    let mut best = Incumbent::empty();
    best.offer(&init.best_x, init.best_f);

    if remaining < (2 * d + 1) * n as u64 {
        return Ok(RunResult {
            best_x: best.x,
            best_f: best.f,
            evals_used: counter.count(),
            iterations_done: 0,
            diagnostics: Vec::new(),
            trajectory: None,
        });
    }

    let continuation = SbsConfig {
        bandwidth: BandwidthPolicy::HybridSmall,
        ..*cfg
    };
    let run = match inner {
        InnerVariant::Plain => sbs_run(obj, &continuation, remaining, seed, Some(init.particles))?,
        InnerVariant::Pf(filter) => sbs_pf_run(obj, &continuation, &filter, remaining, seed, Some(init.particles))?,
    };
    best.offer(&run.best_x, run.best_f);
    Ok(RunResult {
        best_x: best.x,
        best_f: best.f,
        evals_used: counter.count() + run.evals_used,
        iterations_done: run.iterations_done,
        diagnostics: run.diagnostics,
        trajectory: run.trajectory,
    })
}
