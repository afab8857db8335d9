use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Particle filtering rule: a particle is removed when its value is above
/// the `q`-th percentile of values *and* its last displacement is below the
/// `p`-th percentile of displacements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub q_value_percentile: f64,
    pub p_move_percentile: f64,
    /// Filtering starts once this many iterations have completed.
    pub start_iteration: usize,
    /// Floor on the live particle count; `None` means `max(5, N / 20)`.
    pub min_particles: Option<usize>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            q_value_percentile: 90.0,
            p_move_percentile: 10.0,
            start_iteration: 10,
            min_particles: None,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=100.0).contains(&p);
        if !ok(self.q_value_percentile) {
            return Err(Error::invalid("q_value_percentile", "must lie in [0, 100]"));
        }
        if !ok(self.p_move_percentile) {
            return Err(Error::invalid("p_move_percentile", "must lie in [0, 100]"));
        }
        if self.min_particles == Some(0) {
            return Err(Error::invalid("min_particles", "must be positive"));
        }
        Ok(())
    }

    pub fn min_particles_for(&self, initial_n: usize) -> usize {
        self.min_particles.unwrap_or_else(|| (initial_n / 20).max(5))
    }

    /// Whether the rule can remove anything. `f > P100` and `move < P0` are
    /// unsatisfiable, and nothing is removed at or below the floor.
    pub(crate) fn can_act(&self, completed_iterations: usize, live: usize, floor: usize) -> bool {
        completed_iterations >= self.start_iteration
            && self.q_value_percentile < 100.0
            && self.p_move_percentile > 0.0
            && live > floor
    }
}

/// Percentile with linear interpolation between closest ranks:
/// position `p/100 * (n - 1)` in the sorted sample.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Indices (ascending) of the particles that survive the filter.
///
/// The best-valued particle always survives. If fewer than `min_particles`
/// would survive, the `min_particles` best-valued particles are kept instead.
pub fn pf_filter(f_values: &[f64], displacements: &[f64], cfg: &FilterConfig, min_particles: usize) -> Vec<usize> {
    assert_eq!(f_values.len(), displacements.len());
    let n = f_values.len();
    if n == 0 {
        return Vec::new();
    }
    let f_cut = percentile(f_values, cfg.q_value_percentile);
    let move_cut = percentile(displacements, cfg.p_move_percentile);
    let best = super::argmin(f_values);
    let mut keep: Vec<usize> = (0..n)
        .filter(|&i| i == best || !(f_values[i] > f_cut && displacements[i] < move_cut))
        .collect();
    if keep.len() < min_particles.min(n) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| f_values[a].total_cmp(&f_values[b]).then(a.cmp(&b)));
        keep = order[..min_particles.min(n)].to_vec();
        keep.sort_unstable();
    }
    keep
}
