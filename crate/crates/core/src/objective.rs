//! Box-constrained black-box objectives.
//!
//! Every optimizer spends its budget through [`Objective::evaluate`], which
//! increments an [`EvalCounter`] once per scalar evaluation. Finite-difference
//! probes go through the same path, so a gradient costs `2d` evaluations.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Axis-aligned box `[lower, upper]` (closed on both sides).
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidDomain(format!("bound {i} is not finite")));
            }
            if lo >= hi {
                return Err(Error::InvalidDomain(format!(
                    "lower[{i}] = {lo} is not below upper[{i}] = {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` on every axis.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        for (index, (&value, (&lower, &upper))) in
            x.iter().zip(self.lower.iter().zip(&self.upper)).enumerate()
        {
            // NaN fails both comparisons and is reported here as well.
            if !(value >= lower && value <= upper) {
                return Err(Error::OutOfDomain {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Componentwise clamp into the box.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(lo, hi);
        }
    }
}

/// Number of scalar objective evaluations spent so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct EvalCounter {
    count: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn add(&mut self, n: u64) {
        self.count += n;
    }

    /// Folds in a counter used by a worker.
    pub fn merge(&mut self, other: EvalCounter) {
        self.count += other.count;
    }
}

/// Known optimum of an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub f_star: f64,
    pub minimizers: Vec<Vec<f64>>,
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A named scalar function on a box. Cheap to clone.
#[derive(Clone)]
pub struct Objective {
    name: String,
    domain: BoxDomain,
    evaluator: Arc<Evaluator>,
    reference: Option<Reference>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

/// Default relative finite-difference step: the probe offset on axis `i` is
/// `FD_STEP * max(1, |x_i|)`.
pub const FD_STEP: f64 = 1e-6;

/// Tolerance for reference minimizers evaluating to `f_star`.
const REFERENCE_TOL: f64 = 1e-9;

impl Objective {
    pub fn new<F>(name: impl Into<String>, domain: BoxDomain, evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            domain,
            evaluator: Arc::new(evaluator),
            reference: None,
        }
    }

    /// Attaches a known optimum. Every minimizer must lie in the domain and
    /// evaluate to `f_star` within `1e-9`.
    pub fn with_reference(mut self, f_star: f64, minimizers: Vec<Vec<f64>>) -> Result<Self> {
        for m in &minimizers {
            self.domain.check(m)?;
            let v = self.value(m);
            if (v - f_star).abs() > REFERENCE_TOL {
                return Err(Error::invalid(
                    "reference",
                    format!("minimizer {m:?} evaluates to {v}, expected {f_star}"),
                ));
            }
        }
        self.reference = Some(Reference { f_star, minimizers });
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    /// Uncounted raw evaluation, for instrumentation and plotting only.
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    /// Counted evaluation. The point must lie in the closed box.
    pub fn evaluate(&self, x: &[f64], counter: &mut EvalCounter) -> Result<f64> {
        self.domain.check(x)?;
        counter.add(1);
        Ok(self.value(x))
    }

    /// Counted evaluation that rejects NaN and infinities.
    pub fn evaluate_finite(&self, x: &[f64], counter: &mut EvalCounter) -> Result<f64> {
        let v = self.evaluate(x, counter)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue {
                value: v,
                point: x.to_vec(),
            })
        }
    }

    /// Central-difference gradient. Probe offsets are `rel_step * max(1, |x_i|)`
    /// and probe points are clamped into the box; the quotient divides by the
    /// actual probe spacing. Costs exactly `2d` evaluations.
    pub fn fd_gradient(&self, x: &[f64], rel_step: f64, counter: &mut EvalCounter) -> Result<Vec<f64>> {
        if !(rel_step > 0.0) {
            return Err(Error::invalid("rel_step", "must be positive"));
        }
        self.domain.check(x)?;
        let (lower, upper) = (self.domain.lower(), self.domain.upper());
        let mut probe = x.to_vec();
        let mut grad = vec![0.0; x.len()];
        for i in 0..x.len() {
            let h = rel_step * x[i].abs().max(1.0);
            let hi = (x[i] + h).min(upper[i]);
            let lo = (x[i] - h).max(lower[i]);
            probe[i] = hi;
            let f_hi = self.evaluate_finite(&probe, counter)?;
            probe[i] = lo;
            let f_lo = self.evaluate_finite(&probe, counter)?;
            probe[i] = x[i];
            grad[i] = (f_hi - f_lo) / (hi - lo);
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sphere(dim: usize) -> Objective {
        Objective::new("sphere", BoxDomain::cube(-5.12, 5.12, dim).unwrap(), |x: &[f64]| {
            x.iter().map(|v| v * v).sum()
        })
    }

    fn rosenbrock() -> Objective {
        Objective::new("rosenbrock", BoxDomain::cube(-5.0, 10.0, 2).unwrap(), |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        })
    }

    #[test]
    fn domain_validation() {
        assert!(BoxDomain::new(vec![], vec![]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn evaluate_counts_and_checks_bounds() {
        let obj = sphere(2);
        let mut c = EvalCounter::new();
        assert_eq!(obj.evaluate(&[0.0, 0.0], &mut c).unwrap(), 0.0);
        assert_eq!(obj.evaluate(&[1.0, 2.0], &mut c).unwrap(), 5.0);
        assert_eq!(c.count(), 2);
        // closed interval: the bound itself is legal
        assert!(obj.evaluate(&[5.12, -5.12], &mut c).is_ok());
        let err = obj.evaluate(&[6.0, 0.0], &mut c).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { index: 0, .. }));
        assert!(obj.evaluate(&[f64::NAN, 0.0], &mut c).is_err());
        assert_eq!(c.count(), 3);
    }

    #[test]
    fn himmelblau_zero() {
        let obj = Objective::new("h", BoxDomain::cube(-5.0, 5.0, 2).unwrap(), |x: &[f64]| {
            (x[0] * x[0] + x[1] - 11.0).powi(2) + (x[0] + x[1] * x[1] - 7.0).powi(2)
        });
        let mut c = EvalCounter::new();
        assert_eq!(obj.evaluate(&[3.0, 2.0], &mut c).unwrap(), 0.0);
    }

    #[test]
    fn fd_gradient_sphere_and_cost() {
        let obj = sphere(2);
        let mut c = EvalCounter::new();
        let g = obj.fd_gradient(&[1.0, 2.0], 1e-6, &mut c).unwrap();
        assert_relative_eq!(g[0], 2.0, max_relative = 1e-5);
        assert_relative_eq!(g[1], 4.0, max_relative = 1e-5);
        assert_eq!(c.count(), 4);
    }

    #[test]
    fn fd_gradient_constant_is_exactly_zero() {
        let obj = Objective::new("c", BoxDomain::cube(-1.0, 1.0, 3).unwrap(), |_: &[f64]| 4.25);
        let mut c = EvalCounter::new();
        let g = obj.fd_gradient(&[0.3, -0.2, 1.0], 1e-6, &mut c).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn fd_gradient_rosenbrock_at_origin() {
        // analytic: (-2(1-x) - 400x(y - x^2), 200(y - x^2)) = (-2, 0) at the origin
        let obj = rosenbrock();
        let mut c = EvalCounter::new();
        let g = obj.fd_gradient(&[0.0, 0.0], 1e-6, &mut c).unwrap();
        assert!((g[0] + 2.0).abs() < 1e-4);
        assert!(g[1].abs() < 1e-4);
    }

    #[test]
    fn fd_gradient_on_boundary_stays_in_box() {
        let obj = sphere(1);
        let mut c = EvalCounter::new();
        let g = obj.fd_gradient(&[5.12], 1e-6, &mut c).unwrap();
        assert_relative_eq!(g[0], 2.0 * 5.12, max_relative = 1e-5);
    }

    #[test]
    fn fd_gradient_rejects_non_finite() {
        let obj = Objective::new("nan", BoxDomain::cube(-1.0, 1.0, 1).unwrap(), |x: &[f64]| {
            if x[0] > 0.0 { f64::NAN } else { 0.0 }
        });
        let mut c = EvalCounter::new();
        let err = obj.fd_gradient(&[0.0], 1e-6, &mut c).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn projection_examples() {
        let b = BoxDomain::cube(-1.0, 1.0, 2).unwrap();
        assert_eq!(b.project(&[0.5, -0.5]), vec![0.5, -0.5]);
        assert_eq!(b.project(&[2.0, -3.0]), vec![1.0, -1.0]);
        let b1 = BoxDomain::cube(0.0, 5.0, 1).unwrap();
        assert_eq!(b1.project(&[5.0]), vec![5.0]);
    }

    #[test]
    fn reference_is_validated() {
        let obj = sphere(2);
        assert!(obj.clone().with_reference(0.0, vec![vec![0.0, 0.0]]).is_ok());
        assert!(obj.clone().with_reference(1.0, vec![vec![0.0, 0.0]]).is_err());
        assert!(obj.with_reference(0.0, vec![vec![9.0, 0.0]]).is_err());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_inside(x in proptest::collection::vec(-100.0f64..100.0, 3)) {
            let b = BoxDomain::new(vec![-1.0, 0.0, 2.0], vec![1.0, 5.0, 3.0]).unwrap();
            let p = b.project(&x);
            prop_assert!(b.contains(&p));
            prop_assert_eq!(b.project(&p), p);
        }

        #[test]
        fn fd_gradient_of_quadratic(
            a in proptest::collection::vec(-2.0f64..2.0, 4),
            bvec in proptest::collection::vec(-2.0f64..2.0, 2),
            x in proptest::collection::vec(-3.0f64..3.0, 2),
        ) {
            // q(x) = x^T A x + b^T x with symmetric A, gradient 2Ax + b
            let s = [[a[0], 0.5 * (a[1] + a[2])], [0.5 * (a[1] + a[2]), a[3]]];
            let bb = bvec.clone();
            let obj = Objective::new("q", BoxDomain::cube(-5.0, 5.0, 2).unwrap(), move |x: &[f64]| {
                let ax = [s[0][0] * x[0] + s[0][1] * x[1], s[1][0] * x[0] + s[1][1] * x[1]];
                x[0] * ax[0] + x[1] * ax[1] + bb[0] * x[0] + bb[1] * x[1]
            });
            let mut c = EvalCounter::new();
            let g = obj.fd_gradient(&x, 1e-6, &mut c).unwrap();
            prop_assert_eq!(c.count(), 4);
            for i in 0..2 {
                let exact = 2.0 * (s[i][0] * x[0] + s[i][1] * x[1]) + bvec[i];
                let scale = exact.abs().max(1.0);
                prop_assert!((g[i] - exact).abs() / scale < 1e-5, "{} vs {}", g[i], exact);
            }
        }
    }
}
