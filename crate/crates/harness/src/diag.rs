//! Diagnostics recomputed from trajectory logs.

use sbs_core::benchmarks::make_benchmark;
use sbs_core::boltzmann::{ksd, BoltzmannTarget};
use sbs_core::kernel::RbfKernel;
use sbs_core::svgd::ParticleSet;
use sbs_core::EvalCounter;

use crate::error::Result;
use crate::trajectory::TrajectoryLog;

/// KSD of every logged particle set against the run's Boltzmann target, using
/// the bandwidth recorded in each snapshot. Returns `(iteration, ksd)` pairs.
pub fn ksd_per_snapshot(log: &TrajectoryLog) -> Result<Vec<(usize, f64)>> {
    let obj = make_benchmark(&log.header.function, log.header.dim)?;
    let target = BoltzmannTarget::new(obj, log.header.kappa)?;
    let mut counter = EvalCounter::new();
    log.snapshots
        .iter()
        .map(|s| {
            let particles = ParticleSet::from_rows(&s.positions)?;
            let kernel = RbfKernel::new(s.sigma)?;
            Ok((s.iteration, ksd(&particles, &target, &kernel, &mut counter)?))
        })
        .collect()
}
