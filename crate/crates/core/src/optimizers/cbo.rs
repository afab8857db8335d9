//! Consensus-based optimization.
//!
//! Particles drift toward the consensus point, a Gibbs-weighted mean of the
//! current positions, and diffuse with noise proportional to their distance
//! from it:
//! `x <- x - lambda (x - v) dt + sigma |x - v| sqrt(dt) xi`, clamped to the box.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Incumbent, RunResult};
use crate::objective::{EvalCounter, Objective};
use crate::rng::{stream_rng, Stream};
use crate::svgd::ParticleSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CboConfig {
    pub n_particles: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub drift: f64,
    pub noise: f64,
    pub dt: f64,
}

impl Default for CboConfig {
    fn default() -> Self {
        Self {
            n_particles: 100,
            iterations: 2000,
            alpha: 30.0,
            drift: 1.0,
            noise: 0.7,
            dt: 0.1,
        }
    }
}

impl CboConfig {
    pub fn cost(&self) -> u64 {
        self.n_particles as u64 * (self.iterations as u64 + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::invalid("n_particles", "CBO needs at least 2 particles"));
        }
        for (name, v) in [("alpha", self.alpha), ("drift", self.drift), ("noise", self.noise), ("dt", self.dt)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Weighted mean of the rows of `positions` with weights
/// `exp(-alpha (f - min f))`. Shifting by the minimum keeps the largest weight
/// at 1, so the softmax limit of large `alpha` selects the best row.
pub fn consensus_point(positions: &Array2<f64>, values: &[f64], alpha: f64) -> Vec<f64> {
    let f_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut v = vec![0.0; positions.ncols()];
    let mut total = 0.0;
    for (row, &f) in positions.rows().into_iter().zip(values) {
        let w = (-alpha * (f - f_min)).exp();
        total += w;
        for (vj, xj) in v.iter_mut().zip(row) {
            *vj += w * xj;
        }
    }
    v.iter_mut().for_each(|vj| *vj /= total);
    v
}

pub fn cbo_run(obj: &Objective, cfg: &CboConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let n = cfg.n_particles;
    let d = obj.dim();
    let domain = obj.domain();
    let mut rng = stream_rng(seed, Stream::Cbo);
    let mut counter = EvalCounter::new();
    let mut x = ParticleSet::uniform(domain, n, &mut rng)?.positions().to_owned();
    let mut incumbent = Incumbent::empty();
    let mut values = Vec::with_capacity(n);
    for row in x.rows() {
        let p = row.as_slice().expect("standard layout");
        let f = obj.evaluate(p, &mut counter)?;
        incumbent.offer(p, f);
        values.push(f);
    }

    let sqrt_dt = cfg.dt.sqrt();
    for _ in 0..cfg.iterations {
        let v = consensus_point(&x, &values, cfg.alpha);
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            let dist = row.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            for j in 0..d {
                let xi: f64 = rng.sample(StandardNormal);
                row[j] += -cfg.drift * (row[j] - v[j]) * cfg.dt + cfg.noise * dist * sqrt_dt * xi;
            }
            let p = row.as_slice_mut().expect("standard layout");
            domain.project_in_place(p);
            let f = obj.evaluate(p, &mut counter)?;
            incumbent.offer(p, f);
            values[i] = f;
        }
    }

    Ok(RunResult {
        best_x: incumbent.x,
        best_f: incumbent.f,
        evals_used: counter.count(),
        iterations_done: cfg.iterations,
        diagnostics: Vec::new(),
        trajectory: None,
    })
}
