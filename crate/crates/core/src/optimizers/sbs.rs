//! SBS and SBS-PF.

use serde::{Deserialize, Serialize};

use super::{argmin, FilterConfig, IterationRecord, RunResult, Snapshot, Trajectory};
use crate::boltzmann::{ksd_from_scores, BoltzmannTarget, DEFAULT_KAPPA};
use crate::kernel::BandwidthPolicy;
use crate::objective::{EvalCounter, Objective, FD_STEP};
use crate::rng::{stream_rng, Stream};
use crate::svgd::{svgd_iterate, AdamState, ParticleSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbsConfig {
    pub n_particles: usize,
    pub kappa: f64,
    /// Adam learning rate at the first iteration.
    pub step_size: f64,
    /// When set, the learning rate decays geometrically from `step_size` to
    /// this value over the planned iterations and stays there afterwards.
    /// `None` keeps it constant.
    pub final_step_size: Option<f64>,
    pub bandwidth: BandwidthPolicy,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Stop after this many iterations even if budget remains.
    pub max_iterations: Option<usize>,
    /// Record a trajectory snapshot every this many iterations.
    pub log_every: Option<usize>,
    /// Record per-iteration diagnostics (uncounted evaluations).
    pub diagnostics: bool,
    /// Include the KSD in the diagnostics.
    pub track_ksd: bool,
}

impl Default for SbsConfig {
    fn default() -> Self {
        Self {
            n_particles: 100,
            kappa: DEFAULT_KAPPA,
            step_size: 0.5,
            final_step_size: Some(1e-3),
            bandwidth: BandwidthPolicy::InverseNSquared,
            fd_step: FD_STEP,
            max_iterations: None,
            log_every: None,
            diagnostics: false,
            track_ksd: false,
        }
    }
}

/// Step size of the SBS stage of the hybrids.
pub const HYBRID_STEP_SIZE: f64 = 1e-3;

/// Particle count of the hybrids. WOA runs one whale per particle, so the
/// initialization costs about `20 * 1001` evaluations at the default
/// 1000 WOA iterations.
pub const HYBRID_PARTICLES: usize = 20;

impl SbsConfig {
    /// Defaults for the SBS stage of SBS-HYBRID and SBS-PF-HYBRID.
    pub fn hybrid_default() -> Self {
        Self {
            n_particles: HYBRID_PARTICLES,
            step_size: HYBRID_STEP_SIZE,
            bandwidth: BandwidthPolicy::HybridSmall,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::invalid("n_particles", "must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size", "must be positive"));
        }
        if let Some(s) = self.final_step_size {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("final_step_size", "must be positive"));
            }
        }
        if let BandwidthPolicy::Fixed(s) = self.bandwidth {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("bandwidth", "fixed sigma must be positive"));
            }
        }
        if self.log_every == Some(0) {
            return Err(Error::invalid("log_every", "must be positive"));
        }
        Ok(())
    }

    /// Learning rate of the 0-based `iteration` of a run planned to last
    /// `planned` iterations.
    pub fn step_size_at(&self, iteration: usize, planned: usize) -> f64 {
        match self.final_step_size {
            Some(last) if planned > 1 => {
                let t = iteration.min(planned - 1) as f64 / (planned - 1) as f64;
                self.step_size * (last / self.step_size).powf(t)
            }
            Some(last) if iteration > 0 => last,
            _ => self.step_size,
        }
    }

    /// Iterations a plain SBS run of `n` particles in dimension `d` completes
    /// on `budget`, capped by `max_iterations`. This is the horizon of the
    /// step-size schedule for every variant.
    pub fn planned_iterations(&self, n: usize, d: usize, budget: u64) -> usize {
        let per_iteration = 2 * d as u64 * n as u64;
        let by_budget = (budget.saturating_sub(n as u64) / per_iteration.max(1)) as usize;
        self.max_iterations.map_or(by_budget, |m| m.min(by_budget))
    }
}

/// Plain SBS: uniform particles (or `init`) moved by Adam-preconditioned SVGD
/// until the next iteration plus the final evaluation of all particles would
/// exceed the budget. Returns the best final particle.
pub fn sbs_run(
    obj: &Objective,
    cfg: &SbsConfig,
    budget: u64,
    seed: u64,
    init: Option<ParticleSet>,
) -> Result<RunResult> {
    run_particles(obj, cfg, None, budget, seed, init)
}

/// SBS with particle filtering after every iteration from
/// `filter.start_iteration` on. Removed particles are not replaced; the Adam
/// moments and the bandwidth follow the live set.
pub fn sbs_pf_run(
    obj: &Objective,
    cfg: &SbsConfig,
    filter: &FilterConfig,
    budget: u64,
    seed: u64,
    init: Option<ParticleSet>,
) -> Result<RunResult> {
    filter.validate()?;
    run_particles(obj, cfg, Some(filter), budget, seed, init)
}

fn evaluate_all(obj: &Objective, particles: &ParticleSet, counter: &mut EvalCounter) -> Result<Vec<f64>> {
    particles.rows().map(|x| obj.evaluate(x, counter)).collect()
}

fn run_particles(
    obj: &Objective,
    cfg: &SbsConfig,
    filter: Option<&FilterConfig>,
    budget: u64,
    seed: u64,
    init: Option<ParticleSet>,
) -> Result<RunResult> {
    cfg.validate()?;
    let d = obj.dim();
    let mut particles = match init {
        Some(p) => {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: p.dim(),
                });
            }
            p
        }
        None => ParticleSet::uniform(obj.domain(), cfg.n_particles, &mut stream_rng(seed, Stream::ParticleInit))?,
    };
    let n0 = particles.len();
    let per_particle = 2 * d as u64;
    let required = per_particle * n0 as u64;
    if budget < required {
        return Err(Error::BudgetTooSmall { budget, required });
    }

    let target = BoltzmannTarget::with_fd_step(obj.clone(), cfg.kappa, cfg.fd_step)?;
    let floor = filter.map_or(0, |f| f.min_particles_for(n0));
    let planned = cfg.planned_iterations(n0, d, budget);
    let mut adam = AdamState::new(n0, d);
    let mut ids: Vec<usize> = (0..n0).collect();
    let mut counter = EvalCounter::new();
    // objective values at the current positions, when known
    let mut cached: Option<Vec<f64>> = None;
    let mut iterations = 0usize;
    let mut diagnostics = Vec::new();
    let mut best_so_far = f64::INFINITY;
    let mut trajectory = cfg.log_every.map(|_| Trajectory {
        kappa: cfg.kappa,
        snapshots: Vec::new(),
    });
    let snapshot = |iteration: usize, sigma: f64, particles: &ParticleSet, ids: &[usize]| Snapshot {
        iteration,
        sigma,
        ids: ids.to_vec(),
        positions: particles.to_rows(),
        values: particles.rows().map(|x| obj.value(x)).collect(),
    };
    if let Some(t) = trajectory.as_mut() {
        t.snapshots
            .push(snapshot(0, cfg.bandwidth.resolve(particles.len()), &particles, &ids));
    }

    loop {
        if cfg.max_iterations.is_some_and(|m| iterations >= m) {
            break;
        }
        let live = particles.len() as u64;
        let filtering = filter.is_some_and(|f| f.can_act(iterations + 1, particles.len(), floor));
        // gradient probes, then either the filter evaluations or the final
        // evaluation; both cost one evaluation per live particle
        if counter.count() + per_particle * live + live > budget {
            break;
        }
        let sigma = cfg.bandwidth.resolve(particles.len());
        let kernel = cfg.bandwidth.kernel(particles.len())?;
        let previous = filtering.then(|| particles.clone());
        let info = svgd_iterate(
            &mut particles,
            &target,
            &kernel,
            cfg.step_size_at(iterations, planned),
            &mut adam,
            &mut counter,
        )?;
        cached = None;
        iterations += 1;

        if let (Some(prev), Some(fc)) = (previous, filter) {
            let values = evaluate_all(obj, &particles, &mut counter)?;
            let moves: Vec<f64> = particles
                .rows()
                .zip(prev.rows())
                .map(|(a, b)| crate::kernel::sq_dist(a, b).sqrt())
                .collect();
            let keep = super::pf_filter(&values, &moves, fc, floor);
            if keep.len() < particles.len() {
                particles.retain_rows(&keep);
                adam.retain_rows(&keep);
                ids = keep.iter().map(|&i| ids[i]).collect();
                cached = Some(keep.iter().map(|&i| values[i]).collect());
            } else {
                cached = Some(values);
            }
        }

        if cfg.diagnostics {
            let min_f = match &cached {
                Some(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
                None => particles.rows().map(|x| obj.value(x)).fold(f64::INFINITY, f64::min),
            };
            best_so_far = best_so_far.min(min_f);
            let ksd = cfg
                .track_ksd
                .then(|| ksd_from_scores(info.positions.view(), info.scores.view(), &kernel));
            diagnostics.push(IterationRecord {
                iteration: iterations,
                live_particles: particles.len(),
                min_f,
                best_so_far,
                ksd,
                sigma,
            });
        }
        if let (Some(t), Some(every)) = (trajectory.as_mut(), cfg.log_every) {
            if iterations % every == 0 {
                t.snapshots.push(snapshot(iterations, sigma, &particles, &ids));
            }
        }
    }

    if let Some(t) = trajectory.as_mut() {
        if t.snapshots.last().is_none_or(|s| s.iteration != iterations) {
            t.snapshots
                .push(snapshot(iterations, cfg.bandwidth.resolve(particles.len()), &particles, &ids));
        }
    }

    let values = match cached {
        Some(v) => v,
        None => evaluate_all(obj, &particles, &mut counter)?,
    };
    let best = argmin(&values);
    debug_assert!(counter.count() <= budget);
    Ok(RunResult {
        best_x: particles.row(best).to_vec(),
        best_f: values[best],
        evals_used: counter.count(),
        iterations_done: iterations,
        diagnostics,
        trajectory,
    })
}
