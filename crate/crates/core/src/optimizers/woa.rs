//! Whale optimization algorithm.
//!
//! Each whale draws scalar `A = 2a r1 - a`, `C = 2 r2`, a branch coin `p` and
//! a spiral parameter `l ~ U[-1, 1]`, with `a` decaying linearly from 2 to 0.
//! With `p < 0.5` it encircles the leader (`|A| < 1`) or a random whale
//! (`|A| >= 1`); otherwise it follows a logarithmic spiral with shape `b = 1`
//! around the leader. Whales are updated in place, one after another, and
//! each new position is clamped to the box and evaluated immediately.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{Incumbent, RunResult};
use crate::objective::{EvalCounter, Objective};
use crate::rng::{stream_rng, Stream};
use crate::svgd::ParticleSet;
use crate::{Error, Result};

const SPIRAL_SHAPE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WoaConfig {
    pub n_agents: usize,
    pub iterations: usize,
}

impl Default for WoaConfig {
    fn default() -> Self {
        Self {
            n_agents: 30,
            iterations: 1000,
        }
    }
}

impl WoaConfig {
    /// Evaluations spent by a run: the initial population plus one per whale
    /// per iteration.
    pub fn cost(&self) -> u64 {
        self.n_agents as u64 * (self.iterations as u64 + 1)
    }

    /// Largest iteration count whose cost fits in `budget`.
    pub fn iterations_for_budget(n_agents: usize, budget: u64) -> usize {
        (budget / n_agents.max(1) as u64).saturating_sub(1) as usize
    }
}

#[derive(Debug, Clone)]
pub struct WoaOutcome {
    pub result: RunResult,
    /// Final whale positions and their objective values.
    pub population: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

pub fn woa_run(obj: &Objective, cfg: &WoaConfig, seed: u64) -> Result<WoaOutcome> {
    let n = cfg.n_agents;
    if n < 2 {
        return Err(Error::invalid("n_agents", "WOA needs at least 2 whales"));
    }
    let d = obj.dim();
    let domain = obj.domain();
    let mut rng = stream_rng(seed, Stream::Woa);
    let mut counter = EvalCounter::new();
    let mut whales = ParticleSet::uniform(domain, n, &mut rng)?.to_rows();
    let mut values = Vec::with_capacity(n);
    let mut leader = Incumbent::empty();
    for x in &whales {
        let f = obj.evaluate(x, &mut counter)?;
        leader.offer(x, f);
        values.push(f);
    }

    let iterations = cfg.iterations;
    let mut next = vec![0.0; d];
    for t in 0..iterations {
        let a = 2.0 - 2.0 * t as f64 / iterations as f64;
        for i in 0..n {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let big_a = 2.0 * a * r1 - a;
            let big_c = 2.0 * r2;
            let p: f64 = rng.random();
            let l: f64 = rng.random_range(-1.0..=1.0);
            if p < 0.5 {
                let anchor = if big_a.abs() < 1.0 {
                    leader.x.clone()
                } else {
                    whales[rng.random_range(0..n)].clone()
                };
                for j in 0..d {
                    let dist = (big_c * anchor[j] - whales[i][j]).abs();
                    next[j] = anchor[j] - big_a * dist;
                }
            } else {
                let spiral = (SPIRAL_SHAPE * l).exp() * (2.0 * PI * l).cos();
                for j in 0..d {
                    let dist = (leader.x[j] - whales[i][j]).abs();
                    next[j] = dist * spiral + leader.x[j];
                }
            }
            domain.project_in_place(&mut next);
            let f = obj.evaluate(&next, &mut counter)?;
            leader.offer(&next, f);
            whales[i].copy_from_slice(&next);
            values[i] = f;
        }
    }

    Ok(WoaOutcome {
        result: RunResult {
            best_x: leader.x,
            best_f: leader.f,
            evals_used: counter.count(),
            iterations_done: iterations,
            diagnostics: Vec::new(),
            trajectory: None,
        },
        population: whales,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_benchmark;

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        0.5 * (v[(v.len() - 1) / 2] + v[v.len() / 2])
    }

    fn cfg(n_agents: usize, iterations: usize) -> WoaConfig {
        WoaConfig { n_agents, iterations }
    }

    #[test]
    fn zero_iterations_returns_best_initial_whale() {
        let obj = make_benchmark("Ackley", 2).unwrap();
        let out = woa_run(&obj, &cfg(12, 0), 4).unwrap();
        let best = out.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(out.result.best_f, best);
        assert_eq!(out.result.evals_used, 12);
        let mut rng = stream_rng(4, Stream::Woa);
        let init = ParticleSet::uniform(obj.domain(), 12, &mut rng).unwrap();
        assert_eq!(out.population, init.to_rows());
    }

    #[test]
    fn cost_matches_accounting() {
        let obj = make_benchmark("Rastrigin", 3).unwrap();
        let c = cfg(7, 13);
        let out = woa_run(&obj, &c, 1).unwrap();
        assert_eq!(out.result.evals_used, c.cost());
        assert_eq!(WoaConfig::iterations_for_budget(7, c.cost()), 13);
        assert!(out.population.iter().all(|x| obj.domain().contains(x)));
        for (x, f) in out.population.iter().zip(&out.values) {
            assert_eq!(obj.value(x), *f);
        }
        assert_eq!(obj.value(&out.result.best_x), out.result.best_f);
    }

    #[test]
    fn rejects_single_whale() {
        let obj = make_benchmark("Sphere", 2).unwrap();
        assert!(woa_run(&obj, &cfg(1, 10), 0).is_err());
    }

    #[test]
    fn solves_sphere() {
        let obj = make_benchmark("Sphere", 2).unwrap();
        let bests: Vec<f64> = (0..10).map(|s| woa_run(&obj, &cfg(30, 500), s).unwrap().result.best_f).collect();
        assert!(median(bests) < 1e-8);
    }

    #[test]
    fn deterministic() {
        let obj = make_benchmark("Levy", 2).unwrap();
        let a = woa_run(&obj, &cfg(10, 50), 77).unwrap();
        let b = woa_run(&obj, &cfg(10, 50), 77).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.population, b.population);
    }
}
