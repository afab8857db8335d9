//! (mu/mu_w, lambda)-CMA-ES with the default strategy parameters: weighted
//! recombination, rank-one plus rank-mu covariance update and cumulative
//! step-size adaptation.
//!
//! The search runs in box-normalized coordinates `u = (x - lower) / width`,
//! starting from a uniform random mean with `sigma = 0.3`. Offspring outside
//! the unit box are resampled up to 100 times, then clamped.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Incumbent, RunResult};
use crate::objective::{BoxDomain, EvalCounter, Objective};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

const INITIAL_SIGMA: f64 = 0.3;
const MAX_RESAMPLES: usize = 100;
const TOL_X: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesConfig {
    /// Offspring per generation; defaults to `4 + floor(3 ln d)`.
    pub population: Option<usize>,
}

/// The search distribution `N(mean, sigma^2 C)` in normalized coordinates.
#[derive(Debug, Clone)]
pub struct FinalGaussian {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub covariance: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    domain: BoxDomain,
}

impl FinalGaussian {
    fn new(mean: DVector<f64>, sigma: f64, covariance: DMatrix<f64>, domain: BoxDomain) -> Self {
        let (basis, scales) = decompose(&covariance);
        Self {
            mean,
            sigma,
            covariance,
            basis,
            scales,
            domain,
        }
    }

    fn to_box(&self, u: &DVector<f64>) -> Vec<f64> {
        let x: Vec<f64> = (0..u.len())
            .map(|i| self.domain.lower()[i] + u[i] * self.domain.width(i))
            .collect();
        self.domain.project(&x)
    }

    /// Mean in the original coordinates.
    pub fn mean_point(&self) -> Vec<f64> {
        self.to_box(&self.mean)
    }

    /// One draw, mapped back to the box and projected into it.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let z = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let u = &self.mean + self.sigma * (&self.basis * z.component_mul(&self.scales));
        self.to_box(&u)
    }

    /// Distance of `x` from the mean in units of the search distribution,
    /// `|(sigma^2 C)^{-1/2} (u - mean)|`.
    pub fn mahalanobis(&self, x: &[f64]) -> f64 {
        let u = DVector::from_fn(x.len(), |i, _| (x[i] - self.domain.lower()[i]) / self.domain.width(i));
        let y = self.basis.transpose() * (u - &self.mean);
        y.component_div(&self.scales).norm() / self.sigma
    }
}

#[derive(Debug, Clone)]
pub struct CmaesOutcome {
    pub result: RunResult,
    pub gaussian: FinalGaussian,
}

/// Eigenbasis `B` and axis lengths `D` with `C = B diag(D^2) B^T`.
fn decompose(c: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let eig = SymmetricEigen::new(c.clone());
    let scales = eig.eigenvalues.map(|l| l.max(1e-300).sqrt());
    (eig.eigenvectors, scales)
}

struct Params {
    mu: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Params {
    fn new(d: usize, lambda: usize) -> Self {
        let n = d as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Self {
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

pub fn default_population(d: usize) -> usize {
    4 + (3.0 * (d as f64).ln()).floor() as usize
}

fn sample_offspring(
    rng: &mut ChaCha8Rng,
    mean: &DVector<f64>,
    sigma: f64,
    basis: &DMatrix<f64>,
    scales: &DVector<f64>,
) -> DVector<f64> {
    let d = mean.len();
    let draw = |rng: &mut ChaCha8Rng| {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        mean + sigma * (basis * z.component_mul(scales))
    };
    let mut u = draw(rng);
    for _ in 0..MAX_RESAMPLES {
        if u.iter().all(|&v| (0.0..=1.0).contains(&v)) {
            return u;
        }
        u = draw(rng);
    }
    u.map(|v| v.clamp(0.0, 1.0))
}

/// Runs generations while a full generation fits in the budget, or until the
/// distribution degenerates (step below `1e-12` or condition number above
/// `1e14`).
pub fn cmaes_run(obj: &Objective, cfg: &CmaesConfig, budget: u64, seed: u64) -> Result<CmaesOutcome> {
    let d = obj.dim();
    let lambda = cfg.population.unwrap_or_else(|| default_population(d));
    if lambda < 2 {
        return Err(Error::invalid("population", "must be at least 2"));
    }
    if budget < lambda as u64 {
        return Err(Error::BudgetTooSmall {
            budget,
            required: lambda as u64,
        });
    }
    let p = Params::new(d, lambda);
    let domain = obj.domain();
    let mut rng = stream_rng(seed, Stream::CmaEs);
    let mut mean = DVector::from_fn(d, |_, _| rng.random::<f64>());
    let mut sigma = INITIAL_SIGMA;
    let mut c = DMatrix::<f64>::identity(d, d);
    let mut p_sigma = DVector::<f64>::zeros(d);
    let mut p_c = DVector::<f64>::zeros(d);
    let mut counter = EvalCounter::new();
    let mut incumbent = Incumbent::empty();
    let mut generation = 0usize;
    let to_box = |u: &DVector<f64>| -> Vec<f64> {
        let x: Vec<f64> = (0..d).map(|i| domain.lower()[i] + u[i] * domain.width(i)).collect();
        domain.project(&x)
    };

    while counter.count() + lambda as u64 <= budget {
        let (basis, scales) = decompose(&c);
        let max_scale = scales.max();
        let min_scale = scales.min();
        if generation > 0
            && (sigma * max_scale < TOL_X
                || (max_scale / min_scale).powi(2) > MAX_CONDITION
                || !sigma.is_finite())
        {
            break;
        }

        let mut offspring: Vec<(DVector<f64>, f64)> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let u = sample_offspring(&mut rng, &mean, sigma, &basis, &scales);
            let x = to_box(&u);
            let f = obj.evaluate(&x, &mut counter)?;
            incumbent.offer(&x, f);
            offspring.push((u, f));
        }
        // NaN sorts last
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| offspring[a].1.total_cmp(&offspring[b].1).then(a.cmp(&b)));

        let old_mean = mean.clone();
        mean = DVector::zeros(d);
        for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
            mean += *w * &offspring[i].0;
        }
        let y_w = (&mean - &old_mean) / sigma;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let c_inv_sqrt_y = &basis * (basis.transpose() * &y_w).component_div(&scales);
        p_sigma = (1.0 - p.c_sigma) * &p_sigma + (p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff).sqrt() * c_inv_sqrt_y;
        let ps_norm = p_sigma.norm();
        let decay = 1.0 - (1.0 - p.c_sigma).powi(2 * (generation as i32 + 1));
        let h_sigma = if ps_norm / decay.sqrt() < (1.4 + 2.0 / (d as f64 + 1.0)) * p.chi_n {
            1.0
        } else {
            0.0
        };
        p_c = (1.0 - p.c_c) * &p_c + h_sigma * (p.c_c * (2.0 - p.c_c) * p.mu_eff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::<f64>::zeros(d, d);
        for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
            let y = (&offspring[i].0 - &old_mean) / sigma;
            rank_mu += *w * &y * y.transpose();
        }
        let rank_one = &p_c * p_c.transpose() + (1.0 - h_sigma) * p.c_c * (2.0 - p.c_c) * &c;
        c = (1.0 - p.c_1 - p.c_mu) * &c + p.c_1 * rank_one + p.c_mu * rank_mu;
        // keep C exactly symmetric
        c = 0.5 * (&c + c.transpose());
        sigma *= ((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0)).exp();
        generation += 1;
    }

    let gaussian = FinalGaussian::new(mean, sigma, c, domain.clone());
    Ok(CmaesOutcome {
        result: RunResult {
            best_x: incumbent.x,
            best_f: incumbent.f,
            evals_used: counter.count(),
            iterations_done: generation,
            diagnostics: Vec::new(),
            trajectory: None,
        },
        gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_benchmark;

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
    }

    #[test]
    fn default_parameters() {
        assert_eq!(default_population(2), 6);
        assert_eq!(default_population(10), 10);
        let p = Params::new(2, 6);
        assert_eq!(p.mu, 3);
        assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.weights.windows(2).all(|w| w[0] > w[1]));
        assert!(p.mu_eff > 1.0 && p.mu_eff < 3.0);
    }

    #[test]
    fn solves_sphere() {
        let obj = make_benchmark("Sphere", 2).unwrap();
        let bests: Vec<f64> = (0..10)
            .map(|s| cmaes_run(&obj, &CmaesConfig::default(), 10_000, s).unwrap().result.best_f)
            .collect();
        assert!(median(bests) < 1e-10);
    }

    #[test]
    fn solves_rosenbrock() {
        let obj = make_benchmark("Rosenbrock", 2).unwrap();
        let bests: Vec<f64> = (0..10)
            .map(|s| cmaes_run(&obj, &CmaesConfig::default(), 50_000, s).unwrap().result.best_f)
            .collect();
        assert!(median(bests.clone()) < 1e-6, "{bests:?}");
    }

    #[test]
    fn single_generation_budget() {
        let obj = make_benchmark("Ackley", 2).unwrap();
        let out = cmaes_run(&obj, &CmaesConfig::default(), 6, 3).unwrap();
        assert_eq!(out.result.evals_used, 6);
        assert_eq!(out.result.iterations_done, 1);
        assert!(matches!(
            cmaes_run(&obj, &CmaesConfig::default(), 5, 3),
            Err(Error::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn budget_and_incumbent_consistency() {
        let obj = make_benchmark("Rastrigin", 3).unwrap();
        for budget in [7, 100, 1234] {
            let out = cmaes_run(&obj, &CmaesConfig::default(), budget, 9).unwrap();
            assert!(out.result.evals_used <= budget);
            assert_eq!(obj.value(&out.result.best_x), out.result.best_f);
        }
    }

    #[test]
    fn gaussian_samples_stay_near_mean() {
        let obj = make_benchmark("Rosenbrock", 2).unwrap();
        let out = cmaes_run(&obj, &CmaesConfig::default(), 1000, 1).unwrap();
        let mut rng = stream_rng(5, Stream::HybridSample);
        for _ in 0..200 {
            let x = out.gaussian.sample(&mut rng);
            assert!(obj.domain().contains(&x));
            assert!(out.gaussian.mahalanobis(&x) < 6.0);
        }
    }
}
