//! The Boltzmann target `m(x) = exp(-kappa f(x)) / Z` on the objective's box.
//!
//! SVGD only needs the score `grad log m = -kappa grad f`, in which the
//! normalizer `Z` cancels. The grid utilities compute `Z` explicitly and exist
//! for checking the limit behaviour of `m` numerically in one or two
//! dimensions.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::kernel::{sq_dist, RbfKernel};
use crate::objective::{EvalCounter, Objective, FD_STEP};
use crate::svgd::ParticleSet;
use crate::{Error, Result};

/// Default inverse temperature.
pub const DEFAULT_KAPPA: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct BoltzmannTarget {
    objective: Objective,
    kappa: f64,
    fd_step: f64,
}

impl BoltzmannTarget {
    pub fn new(objective: Objective, kappa: f64) -> Result<Self> {
        Self::with_fd_step(objective, kappa, FD_STEP)
    }

    pub fn with_fd_step(objective: Objective, kappa: f64, fd_step: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid("kappa", format!("must be positive and finite, got {kappa}")));
        }
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::invalid("fd_step", format!("must be positive, got {fd_step}")));
        }
        Ok(Self {
            objective,
            kappa,
            fd_step,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    /// `grad log m(x) = -kappa * grad f(x)`, with a finite-difference gradient
    /// (`2d` evaluations).
    pub fn score(&self, x: &[f64], counter: &mut EvalCounter) -> Result<Vec<f64>> {
        let mut g = self.objective.fd_gradient(x, self.fd_step, counter)?;
        for v in &mut g {
            *v *= -self.kappa;
        }
        Ok(g)
    }

    /// Scores of every row, computed in parallel. Row order and the counter
    /// total do not depend on scheduling.
    pub fn scores(&self, positions: ArrayView2<'_, f64>, counter: &mut EvalCounter) -> Result<Array2<f64>> {
        let (n, d) = positions.dim();
        let rows: Vec<Result<(Vec<f64>, EvalCounter)>> = (0..n)
            .into_par_iter()
            .with_min_len(16)
            .map(|i| {
                let mut local = EvalCounter::new();
                let x = positions.row(i).to_vec();
                self.score(&x, &mut local).map(|s| (s, local))
            })
            .collect();
        let mut out = Array2::zeros((n, d));
        for (i, row) in rows.into_iter().enumerate() {
            let (s, local) = row?;
            counter.merge(local);
            out.row_mut(i).assign(&ndarray::ArrayView1::from(&s));
        }
        Ok(out)
    }
}

/// A tensor-product grid in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::DegenerateGrid(format!(
                "only 1-d and 2-d grids are supported, got {} axes",
                axes.len()
            )));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::DegenerateGrid(format!("axis {i} has fewer than 2 points")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::DegenerateGrid(format!("axis {i} is not strictly increasing")));
            }
        }
        Ok(Self { axes })
    }

    /// Uniform grid spanning the whole box with `points` nodes per axis.
    pub fn covering(domain: &crate::BoxDomain, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::DegenerateGrid("need at least 2 points per axis".into()));
        }
        let axes = (0..domain.dim())
            .map(|i| {
                let (lo, hi) = (domain.lower()[i], domain.upper()[i]);
                (0..points)
                    .map(|k| {
                        if k + 1 == points {
                            hi
                        } else {
                            lo + (hi - lo) * k as f64 / (points - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Grid nodes in row-major order with their trapezoid weights.
    fn nodes(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let w: Vec<Vec<f64>> = self.axes.iter().map(|a| trapezoid_weights(a)).collect();
        match self.axes.as_slice() {
            [a] => (a.iter().map(|&x| vec![x]).collect(), w[0].clone()),
            [a, b] => {
                let mut pts = Vec::with_capacity(a.len() * b.len());
                let mut wts = Vec::with_capacity(a.len() * b.len());
                for (i, &x) in a.iter().enumerate() {
                    for (j, &y) in b.iter().enumerate() {
                        pts.push(vec![x, y]);
                        wts.push(w[0][i] * w[1][j]);
                    }
                }
                (pts, wts)
            }
            _ => unreachable!("validated in TensorGrid::new"),
        }
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Normalized density values on a grid.
#[derive(Debug, Clone)]
pub struct GridDensity {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridDensity {
    /// Quadrature of `g` against the density.
    pub fn expectation<G: Fn(&[f64]) -> f64>(&self, g: G) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter().zip(&self.values))
            .map(|(p, (w, v))| g(p) * w * v)
            .sum()
    }

    /// Probability mass of the nodes satisfying `pred`.
    pub fn mass_where<P: Fn(&[f64]) -> bool>(&self, pred: P) -> f64 {
        self.expectation(|x| if pred(x) { 1.0 } else { 0.0 })
    }
}

/// Trapezoid-normalized `exp(-kappa f)` on a grid. The exponent is shifted by
/// its minimum before exponentiating, so large `kappa` does not underflow the
/// whole grid. Evaluations are uncounted.
pub fn density_on_grid(target: &BoltzmannTarget, grid: &TensorGrid) -> Result<GridDensity> {
    let obj = target.objective();
    if grid.dim() != obj.dim() {
        return Err(Error::DegenerateGrid(format!(
            "grid has {} axes but the objective is {}-dimensional",
            grid.dim(),
            obj.dim()
        )));
    }
    let (points, weights) = grid.nodes();
    let energies: Vec<f64> = points.iter().map(|p| target.kappa() * obj.value(p)).collect();
    if let Some(bad) = energies.iter().position(|e| !e.is_finite()) {
        return Err(Error::NonFiniteValue {
            value: energies[bad],
            point: points[bad].clone(),
        });
    }
    let shift = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values: Vec<f64> = energies.iter().map(|e| (shift - e).exp()).collect();
    let z: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
    for v in &mut values {
        *v /= z;
    }
    Ok(GridDensity {
        points,
        weights,
        values,
    })
}

pub fn expectation_on_grid<G: Fn(&[f64]) -> f64>(density: &GridDensity, g: G) -> f64 {
    density.expectation(g)
}

/// Kernelized Stein discrepancy of the particles' empirical measure, as the
/// V-statistic `(1/N^2) sum_ij u(x_i, x_j)` with the RBF Stein kernel
///
/// `u = s_i.s_j k + s_i.grad_{x_j} k + grad_{x_i} k.s_j + tr(grad_{x_i} grad_{x_j} k)`.
///
/// Scores are computed once per particle (`2dN` evaluations).
pub fn ksd(
    particles: &ParticleSet,
    target: &BoltzmannTarget,
    kernel: &RbfKernel,
    counter: &mut EvalCounter,
) -> Result<f64> {
    let scores = target.scores(particles.positions(), counter)?;
    Ok(ksd_from_scores(particles.positions(), scores.view(), kernel))
}

/// KSD from already computed scores.
pub fn ksd_from_scores(positions: ArrayView2<'_, f64>, scores: ArrayView2<'_, f64>, kernel: &RbfKernel) -> f64 {
    let (n, d) = positions.dim();
    let s2 = kernel.sigma() * kernel.sigma();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .with_min_len(16)
        .map(|i| {
            let xi = positions.row(i);
            let si = scores.row(i);
            let xi = xi.as_slice().expect("standard layout");
            let si = si.as_slice().expect("standard layout");
            let mut acc = 0.0;
            for j in 0..n {
                let xj = positions.row(j);
                let sj = scores.row(j);
                let xj = xj.as_slice().expect("standard layout");
                let sj = sj.as_slice().expect("standard layout");
                let r2 = sq_dist(xi, xj);
                let k = kernel.from_sq_dist(r2);
                let mut ss = 0.0;
                let mut cross = 0.0;
                for a in 0..d {
                    let diff = xi[a] - xj[a];
                    ss += si[a] * sj[a];
                    // s_i . grad_{x_j} k + grad_{x_i} k . s_j with
                    // grad_{x_j} k = k (x_i - x_j) / s2 = -grad_{x_i} k
                    cross += (si[a] - sj[a]) * diff;
                }
                let trace = d as f64 / s2 - r2 / (s2 * s2);
                acc += k * (ss + cross / s2 + trace);
            }
            acc
        })
        .collect();
    let total: f64 = rows.iter().sum();
    total / (n as f64 * n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_benchmark;
    use crate::BoxDomain;
    use ndarray::array;

    fn linear_unit() -> Objective {
        Objective::new("x", BoxDomain::cube(0.0, 1.0, 1).unwrap(), |x: &[f64]| x[0])
    }

    fn closed_form_mean(kappa: f64) -> f64 {
        1.0 / kappa - (-kappa).exp() / (1.0 - (-kappa).exp())
    }

    fn fine_grid() -> TensorGrid {
        TensorGrid::covering(&BoxDomain::cube(0.0, 1.0, 1).unwrap(), 10_001).unwrap()
    }

    #[test]
    fn kappa_must_be_positive() {
        let obj = linear_unit();
        assert!(BoltzmannTarget::new(obj.clone(), 0.0).is_err());
        assert!(BoltzmannTarget::new(obj.clone(), -1.0).is_err());
        assert!(BoltzmannTarget::new(obj, f64::NAN).is_err());
    }

    #[test]
    fn score_examples() {
        let c = Objective::new("c", BoxDomain::cube(-1.0, 1.0, 2).unwrap(), |_: &[f64]| 1.5);
        let t = BoltzmannTarget::new(c, 7.0).unwrap();
        let mut cnt = EvalCounter::new();
        assert!(t.score(&[0.2, 0.3], &mut cnt).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(cnt.count(), 4);

        let s = make_benchmark("Sphere", 2).unwrap();
        let t1 = BoltzmannTarget::new(s.clone(), 1.0).unwrap();
        let g = t1.score(&[1.0, 2.0], &mut cnt).unwrap();
        assert!((g[0] + 2.0).abs() < 1e-5 && (g[1] + 4.0).abs() < 1e-5);
        let t2 = BoltzmannTarget::new(s, 1000.0).unwrap();
        let g = t2.score(&[1.0, 2.0], &mut cnt).unwrap();
        assert!((g[0] + 2000.0).abs() < 1e-2 && (g[1] + 4000.0).abs() < 1e-2);
    }

    #[test]
    fn score_is_linear_in_kappa() {
        let s = make_benchmark("Rosenbrock", 2).unwrap();
        let mut cnt = EvalCounter::new();
        let base = BoltzmannTarget::new(s.clone(), 2.0).unwrap().score(&[0.3, -0.7], &mut cnt).unwrap();
        let scaled = BoltzmannTarget::new(s, 50.0).unwrap().score(&[0.3, -0.7], &mut cnt).unwrap();
        for (b, sc) in base.iter().zip(&scaled) {
            assert!((sc - 25.0 * b).abs() <= 1e-6 * sc.abs());
        }
    }

    #[test]
    fn constant_function_gives_uniform_density() {
        let c = Objective::new("c", BoxDomain::cube(0.0, 1.0, 1).unwrap(), |_: &[f64]| 3.0);
        let t = BoltzmannTarget::new(c, 1e3).unwrap();
        let dens = density_on_grid(&t, &fine_grid()).unwrap();
        assert!(dens.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!((expectation_on_grid(&dens, |_| 1.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn small_kappa_is_nearly_uniform() {
        let t = BoltzmannTarget::new(linear_unit(), 1e-9).unwrap();
        let dens = density_on_grid(&t, &fine_grid()).unwrap();
        assert!(dens.values.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn density_ratio_matches_closed_form() {
        // m(x) = kappa e^{-kappa x} / (1 - e^{-kappa}) so m(0)/m(1) = e^kappa
        let t = BoltzmannTarget::new(linear_unit(), 10.0).unwrap();
        let dens = density_on_grid(&t, &fine_grid()).unwrap();
        let ratio = dens.values[0] / dens.values[dens.values.len() - 1];
        assert!((ratio / 10f64.exp() - 1.0).abs() < 1e-3);
        let m0 = 10.0 / (1.0 - (-10f64).exp());
        assert!((dens.values[0] / m0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn expectation_matches_closed_form_and_decreases() {
        let mut prev = f64::INFINITY;
        for kappa in [1.0, 10.0, 100.0, 1000.0] {
            let t = BoltzmannTarget::new(linear_unit(), kappa).unwrap();
            let dens = density_on_grid(&t, &fine_grid()).unwrap();
            assert!((expectation_on_grid(&dens, |_| 1.0) - 1.0).abs() < 1e-6);
            let e = expectation_on_grid(&dens, |x| x[0]);
            if kappa <= 100.0 {
                assert!((e - closed_form_mean(kappa)).abs() < 1e-4, "kappa={kappa}: {e}");
            }
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 0.01);
        assert!((closed_form_mean(10.0) - 0.09995).abs() < 1e-5);
    }

    #[test]
    fn mass_concentrates_near_global_minimizer() {
        let f = |x: &[f64]| (5.0 * x[0]).cos() + x[0] / 5.0 + 1.0;
        let obj = Objective::new("wave", BoxDomain::cube(-5.0, 5.0, 1).unwrap(), f);
        let grid = TensorGrid::covering(obj.domain(), 10_000).unwrap();
        // grid argmin as the minimizer oracle
        let (x_star, _) = (0..10_000)
            .map(|k| -5.0 + 10.0 * k as f64 / 9_999.0)
            .map(|x| (x, f(&[x])))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!((x_star + 4.406).abs() < 1e-2);
        let mut prev = 0.0;
        for kappa in [1.0, 10.0, 100.0] {
            let t = BoltzmannTarget::new(obj.clone(), kappa).unwrap();
            let dens = density_on_grid(&t, &grid).unwrap();
            let mass = dens.mass_where(|x| (x[0] - x_star).abs() <= 0.3);
            assert!(mass > prev, "kappa={kappa}: {mass} <= {prev}");
            prev = mass;
        }
    }

    #[test]
    fn two_dimensional_density_normalizes() {
        let obj = make_benchmark("Himmelblau", 2).unwrap();
        let t = BoltzmannTarget::new(obj.clone(), 5.0).unwrap();
        let dens = density_on_grid(&t, &TensorGrid::covering(obj.domain(), 301).unwrap()).unwrap();
        assert!((expectation_on_grid(&dens, |_| 1.0) - 1.0).abs() < 1e-6);
        assert!(dens.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn degenerate_grids() {
        assert!(TensorGrid::new(vec![vec![0.0]]).is_err());
        assert!(TensorGrid::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(TensorGrid::new(vec![vec![0.0, 1.0]; 3]).is_err());
        let t = BoltzmannTarget::new(linear_unit(), 1.0).unwrap();
        let g2 = TensorGrid::new(vec![vec![0.0, 1.0]; 2]).unwrap();
        assert!(matches!(density_on_grid(&t, &g2), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn ksd_closed_forms() {
        let c = Objective::new("c", BoxDomain::cube(-1.0, 1.0, 2).unwrap(), |_: &[f64]| 0.0);
        let t = BoltzmannTarget::new(c, 1.0).unwrap();
        let k = RbfKernel::new(1.0).unwrap();
        let mut cnt = EvalCounter::new();
        let one = ParticleSet::new(array![[0.1, 0.2]]).unwrap();
        assert!((ksd(&one, &t, &k, &mut cnt).unwrap() - 2.0).abs() < 1e-12);

        let c1 = Objective::new("c", BoxDomain::cube(-1.0, 1.0, 1).unwrap(), |_: &[f64]| 0.0);
        let t1 = BoltzmannTarget::new(c1, 1.0).unwrap();
        let two = ParticleSet::new(array![[0.4], [0.4]]).unwrap();
        assert!((ksd(&two, &t1, &k, &mut cnt).unwrap() - 1.0).abs() < 1e-12);

        // N=1 on Sphere: |s(x)|^2 + d / sigma^2
        let s = make_benchmark("Sphere", 2).unwrap();
        let ts = BoltzmannTarget::new(s, 3.0).unwrap();
        let k = RbfKernel::new(0.5).unwrap();
        let x = [1.0, -2.0];
        let sc = ts.score(&x, &mut cnt).unwrap();
        let expected = sc.iter().map(|v| v * v).sum::<f64>() + 2.0 / 0.25;
        let p = ParticleSet::new(array![[1.0, -2.0]]).unwrap();
        let before = cnt.count();
        let got = ksd(&p, &ts, &k, &mut cnt).unwrap();
        assert_eq!(cnt.count() - before, 4);
        assert!((got - expected).abs() <= 1e-10 * expected);
    }
}
