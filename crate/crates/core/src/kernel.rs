//! Gaussian RBF kernel `k(x, y) = exp(-|x - y|^2 / (2 sigma^2))` and the
//! bandwidth policies used by the SBS variants.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    sigma: f64,
}

impl RbfKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(Error::invalid("sigma", format!("must be positive and finite, got {sigma}")))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn check(x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() == y.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            })
        }
    }

    /// Kernel value from a precomputed squared distance.
    #[inline]
    pub fn from_sq_dist(&self, sq_dist: f64) -> f64 {
        (-sq_dist / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn k(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Self::check(x, y)?;
        Ok(self.from_sq_dist(sq_dist(x, y)))
    }

    /// Gradient in the second argument: `k(x, y) (x - y) / sigma^2`.
    pub fn grad_second_arg(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let k = self.k(x, y)?;
        let s2 = self.sigma * self.sigma;
        Ok(x.iter().zip(y).map(|(a, b)| k * (a - b) / s2).collect())
    }

    /// `trace(grad_x grad_y k(x, y)) = k (d / sigma^2 - |x - y|^2 / sigma^4)`.
    pub fn trace_cross_hessian(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Self::check(x, y)?;
        let r2 = sq_dist(x, y);
        let s2 = self.sigma * self.sigma;
        Ok(self.from_sq_dist(r2) * (x.len() as f64 / s2 - r2 / (s2 * s2)))
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// How the bandwidth is chosen from the live particle count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "sigma")]
pub enum BandwidthPolicy {
    Fixed(f64),
    /// `sigma = 1 / N^2`.
    InverseNSquared,
    /// `sigma = 1e-10`, for particles that start near a good region.
    HybridSmall,
}

pub const HYBRID_SIGMA: f64 = 1e-10;

impl BandwidthPolicy {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            BandwidthPolicy::Fixed(s) => s,
            BandwidthPolicy::InverseNSquared => {
                let n = n.max(1) as f64;
                1.0 / (n * n)
            }
            BandwidthPolicy::HybridSmall => HYBRID_SIGMA,
        }
    }

    pub fn kernel(self, n: usize) -> Result<RbfKernel> {
        RbfKernel::new(self.resolve(n))
    }
}

impl Default for BandwidthPolicy {
    fn default() -> Self {
        BandwidthPolicy::InverseNSquared
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn kernel_values() {
        let k = RbfKernel::new(1.0).unwrap();
        assert_eq!(k.k(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 1.0);
        assert!((k.k(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - (-12.5f64).exp()).abs() < 1e-18);
        let s = 0.7;
        let k = RbfKernel::new(s).unwrap();
        let r = s * 2f64.sqrt();
        assert!((k.k(&[0.0], &[r]).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(k.k(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_sigma() {
        assert!(RbfKernel::new(0.0).is_err());
        assert!(RbfKernel::new(-1.0).is_err());
        assert!(RbfKernel::new(f64::NAN).is_err());
        assert!(RbfKernel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn gradient_examples() {
        let k = RbfKernel::new(1.0).unwrap();
        assert_eq!(k.grad_second_arg(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        let g = k.grad_second_arg(&[1.0], &[0.0]).unwrap();
        assert!((g[0] - (-0.5f64).exp()).abs() < 1e-15);

        let k2 = RbfKernel::new(2.0).unwrap();
        let a = k2.grad_second_arg(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let b = k2.grad_second_arg(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(a[0], -b[0]);
        assert_eq!(a[1], -b[1]);
    }

    #[test]
    fn bandwidth_policies() {
        assert!((BandwidthPolicy::InverseNSquared.resolve(10) - 0.01).abs() < 1e-18);
        assert_eq!(BandwidthPolicy::HybridSmall.resolve(1), 1e-10);
        assert_eq!(BandwidthPolicy::HybridSmall.resolve(1000), 1e-10);
        assert_eq!(BandwidthPolicy::Fixed(0.5).resolve(99), 0.5);
    }

    #[test]
    fn gram_matrix_is_psd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 2 + trial * 2;
            let d = 1 + trial % 4;
            let k = RbfKernel::new(rng.random_range(0.1..3.0)).unwrap();
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let gram = DMatrix::from_fn(n, n, |i, j| k.k(&pts[i], &pts[j]).unwrap());
            let eig = gram.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l >= -1e-10), "{eig:?}");
        }
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric_bounded_positive(
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            y in proptest::collection::vec(-3.0f64..3.0, 3),
            sigma in 0.05f64..5.0,
        ) {
            let k = RbfKernel::new(sigma).unwrap();
            let kxy = k.k(&x, &y).unwrap();
            prop_assert_eq!(kxy, k.k(&y, &x).unwrap());
            prop_assert!(kxy <= 1.0 && kxy >= 0.0);
            prop_assert_eq!(k.k(&x, &x).unwrap(), 1.0);
        }

        #[test]
        fn gradient_matches_finite_differences(
            x in proptest::collection::vec(-2.0f64..2.0, 2),
            y in proptest::collection::vec(-2.0f64..2.0, 2),
            sigma in 0.5f64..3.0,
        ) {
            let k = RbfKernel::new(sigma).unwrap();
            let g = k.grad_second_arg(&x, &y).unwrap();
            let h = 1e-6;
            for i in 0..2 {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[i] += h;
                ym[i] -= h;
                let fd = (k.k(&x, &yp).unwrap() - k.k(&x, &ym).unwrap()) / (2.0 * h);
                let scale = g[i].abs().max(1e-3);
                prop_assert!((fd - g[i]).abs() / scale < 1e-6, "{} vs {}", fd, g[i]);
            }
        }
    }
}
