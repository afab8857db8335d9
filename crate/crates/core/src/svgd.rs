//! Stein Variational Gradient Descent on a Boltzmann target.
//!
//! For particles `x_1..x_N` with scores `s_j = grad log pi(x_j)` the update
//! direction is
//!
//! ```text
//! phi(x_i) = (1/N) sum_j [ s_j k(x_i, x_j) + grad_{x_j} k(x_i, x_j) ]
//!          =        attraction(x_i)       +      repulsion(x_i)
//! ```
//!
//! The direction is preconditioned by Adam and the particles are projected
//! back into the box after each displacement.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::boltzmann::BoltzmannTarget;
use crate::kernel::{sq_dist, BandwidthPolicy, RbfKernel};
use crate::objective::{BoxDomain, EvalCounter};
use crate::{Error, Result};

/// `N` particle positions in `R^d`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    positions: Array2<f64>,
}

impl ParticleSet {
    pub fn new(positions: Array2<f64>) -> Result<Self> {
        let (n, d) = positions.dim();
        if n == 0 || d == 0 {
            return Err(Error::invalid("particles", "need at least one particle of dimension >= 1"));
        }
        Ok(Self {
            positions: positions.as_standard_layout().into_owned(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let positions = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::invalid("particles", e.to_string()))?;
        Self::new(positions)
    }

    /// `n` points drawn independently and uniformly from the box.
    pub fn uniform<R: Rng>(domain: &BoxDomain, n: usize, rng: &mut R) -> Result<Self> {
        let d = domain.dim();
        let mut positions = Array2::zeros((n, d));
        for mut row in positions.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let u: f64 = rng.random();
                *v = domain.lower()[j] + u * domain.width(j);
            }
        }
        Self::new(positions)
    }

    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> ArrayView2<'_, f64> {
        self.positions.view()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.as_slice().expect("standard layout").chunks(self.dim())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Keeps only the listed rows, in the given order.
    pub fn retain_rows(&mut self, keep: &[usize]) {
        self.positions = self.positions.select(Axis(0), keep);
    }

    pub(crate) fn apply_displacement(&mut self, displacement: &Array2<f64>, domain: &BoxDomain) {
        self.positions += displacement;
        let d = self.dim();
        for row in self.positions.as_slice_mut().expect("standard layout").chunks_mut(d) {
            domain.project_in_place(row);
        }
    }

    fn check_shape(&self, other: (usize, usize)) -> Result<()> {
        if self.positions.dim() == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.positions.dim(),
                actual: other,
            })
        }
    }
}

/// Per-coordinate Adam moments for every particle.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Array2<f64>,
    v: Array2<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            m: Array2::zeros((n, d)),
            v: Array2::zeros((n, d)),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn shape(&self) -> (usize, usize) {
        self.m.dim()
    }

    /// Drops the moments of filtered particles.
    pub fn retain_rows(&mut self, keep: &[usize]) {
        self.m = self.m.select(Axis(0), keep);
        self.v = self.v.select(Axis(0), keep);
    }

    /// One bias-corrected Adam step on the ascent direction `g`; returns the
    /// displacement `lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, direction: &Array2<f64>, lr: f64) -> Result<Array2<f64>> {
        if direction.dim() != self.m.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.m.dim(),
                actual: direction.dim(),
            });
        }
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let mut out = Array2::zeros(direction.dim());
        ndarray::Zip::from(&mut out)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(direction)
            .for_each(|o, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *o = lr * m_hat / (v_hat.sqrt() + eps);
            });
        Ok(out)
    }
}

pub fn adam_step(state: &mut AdamState, direction: &Array2<f64>, lr: f64) -> Result<Array2<f64>> {
    state.step(direction, lr)
}

/// Step size and iteration count of a plain SVGD run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgdConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub bandwidth: BandwidthPolicy,
}

impl SvgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size", "must be positive"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Attraction and repulsion terms of the update direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Forces {
    pub attraction: Array2<f64>,
    pub repulsion: Array2<f64>,
}

impl Forces {
    /// `attraction + repulsion`, the SVGD direction.
    pub fn total(&self) -> Array2<f64> {
        &self.attraction + &self.repulsion
    }
}

/// Force decomposition from precomputed scores.
pub fn forces_from_scores(positions: ArrayView2<'_, f64>, scores: ArrayView2<'_, f64>, kernel: &RbfKernel) -> Forces {
    let (n, d) = positions.dim();
    let s2 = kernel.sigma() * kernel.sigma();
    let n_f = n as f64;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .with_min_len(8)
        .map(|i| {
            let xi = positions.row(i);
            let xi = xi.as_slice().expect("standard layout");
            let mut attr = vec![0.0; d];
            let mut rep = vec![0.0; d];
            for j in 0..n {
                let xj = positions.row(j);
                let sj = scores.row(j);
                let xj = xj.as_slice().expect("standard layout");
                let sj = sj.as_slice().expect("standard layout");
                let k = kernel.from_sq_dist(sq_dist(xi, xj));
                for a in 0..d {
                    attr[a] += sj[a] * k;
                    rep[a] += k * (xi[a] - xj[a]) / s2;
                }
            }
            for a in 0..d {
                attr[a] /= n_f;
                rep[a] /= n_f;
            }
            (attr, rep)
        })
        .collect();
    let mut attraction = Array2::zeros((n, d));
    let mut repulsion = Array2::zeros((n, d));
    for (i, (a, r)) in rows.into_iter().enumerate() {
        attraction.row_mut(i).assign(&ndarray::ArrayView1::from(&a));
        repulsion.row_mut(i).assign(&ndarray::ArrayView1::from(&r));
    }
    Forces {
        attraction,
        repulsion,
    }
}

/// `attr(x) = E[s(x') k(x, x')]` and `rep(x) = E[grad_{x'} k(x, x')]` over the
/// empirical measure. Costs `2dN` evaluations.
pub fn force_decomposition(
    particles: &ParticleSet,
    target: &BoltzmannTarget,
    kernel: &RbfKernel,
    counter: &mut EvalCounter,
) -> Result<Forces> {
    let scores = target.scores(particles.positions(), counter)?;
    Ok(forces_from_scores(particles.positions(), scores.view(), kernel))
}

/// The empirical SVGD direction, one row per particle.
pub fn phi_star(
    particles: &ParticleSet,
    target: &BoltzmannTarget,
    kernel: &RbfKernel,
    counter: &mut EvalCounter,
) -> Result<Array2<f64>> {
    Ok(force_decomposition(particles, target, kernel, counter)?.total())
}

/// What one SVGD iteration computed, for diagnostics.
#[derive(Debug, Clone)]
pub struct IterationInfo {
    /// Positions the iteration started from.
    pub positions: Array2<f64>,
    pub scores: Array2<f64>,
    pub direction: Array2<f64>,
}

/// One iteration: direction, Adam displacement, projection into the box.
pub fn svgd_iterate(
    particles: &mut ParticleSet,
    target: &BoltzmannTarget,
    kernel: &RbfKernel,
    step_size: f64,
    adam: &mut AdamState,
    counter: &mut EvalCounter,
) -> Result<IterationInfo> {
    particles.check_shape(adam.shape())?;
    let scores = target.scores(particles.positions(), counter)?;
    let direction = forces_from_scores(particles.positions(), scores.view(), kernel).total();
    let displacement = adam.step(&direction, step_size)?;
    let positions = particles.positions().to_owned();
    particles.apply_displacement(&displacement, target.objective().domain());
    Ok(IterationInfo {
        positions,
        scores,
        direction,
    })
}
