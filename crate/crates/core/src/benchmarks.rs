//! Standard global-optimization test functions.
//!
//! Definitions, domains and optima follow the usual virtual-library
//! conventions. Six functions generalize to any dimension (Ackley, Levy,
//! Michalewicz, Rastrigin, Rosenbrock, Sphere); the rest are two-dimensional.

use std::f64::consts::{E, PI};

use crate::objective::{BoxDomain, Objective};
use crate::{Error, Result};

/// Which dimensions a benchmark can be instantiated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    /// Only this dimension.
    Fixed(usize),
    /// Any dimension at or above the given minimum.
    AtLeast(usize),
}

impl Dims {
    pub fn supports(self, d: usize) -> bool {
        match self {
            Dims::Fixed(n) => d == n,
            Dims::AtLeast(n) => d >= n,
        }
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dims::Fixed(n) => write!(f, "{n}"),
            Dims::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// One entry of the registry.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkEntry {
    pub name: &'static str,
    pub default_dim: usize,
    pub dims: Dims,
    aliases: &'static [&'static str],
    bounds: fn(usize) -> (Vec<f64>, Vec<f64>),
    func: fn(&[f64]) -> f64,
    optimum: fn(usize) -> (f64, Vec<Vec<f64>>),
}

impl BenchmarkEntry {
    pub fn domain_for(&self, d: usize) -> Result<BoxDomain> {
        self.check_dim(d)?;
        let (lo, hi) = (self.bounds)(d);
        BoxDomain::new(lo, hi)
    }

    pub fn f_star(&self, d: usize) -> Result<f64> {
        self.check_dim(d)?;
        Ok((self.optimum)(d).0)
    }

    /// Known global minimizers (possibly a single representative).
    pub fn minimizers(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        self.check_dim(d)?;
        Ok((self.optimum)(d).1)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.func)(x)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.dims.supports(d) {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension {
                name: self.name.to_string(),
                dim: d,
            })
        }
    }

    fn matches(&self, name: &str) -> bool {
        let key = normalize(name);
        normalize(self.name) == key || self.aliases.iter().any(|a| normalize(a) == key)
    }

    /// Builds the objective with domain and reference optimum attached.
    pub fn objective(&self, d: usize) -> Result<Objective> {
        let domain = self.domain_for(d)?;
        let (f_star, minimizers) = (self.optimum)(d);
        Objective::new(self.name, domain, self.func).with_reference(f_star, minimizers)
    }
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn cube(lo: f64, hi: f64) -> impl Fn(usize) -> (Vec<f64>, Vec<f64>) {
    move |d| (vec![lo; d], vec![hi; d])
}

pub fn ackley(x: &[f64]) -> f64 {
    let (a, b, c) = (20.0, 0.2, 2.0 * PI);
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (c * v).cos()).sum::<f64>() / n;
    -a * (-b * sq.sqrt()).exp() - cs.exp() + a + E
}

pub fn branin(x: &[f64]) -> f64 {
    let (a, b, c, r, s, t) = (
        1.0,
        5.1 / (4.0 * PI * PI),
        5.0 / PI,
        6.0,
        10.0,
        1.0 / (8.0 * PI),
    );
    a * (x[1] - b * x[0] * x[0] + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s
}

pub fn drop_wave(x: &[f64]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -(1.0 + (12.0 * r2.sqrt()).cos()) / (0.5 * r2 + 2.0)
}

pub fn egg_holder(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    -(x2 + 47.0) * (x2 + x1 / 2.0 + 47.0).abs().sqrt().sin()
        - x1 * (x1 - (x2 + 47.0)).abs().sqrt().sin()
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let a = 1.0
        + (x1 + x2 + 1.0).powi(2)
            * (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2);
    let b = 30.0
        + (2.0 * x1 - 3.0 * x2).powi(2)
            * (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2);
    a * b
}

pub fn himmelblau(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] - 11.0).powi(2) + (x[0] + x[1] * x[1] - 7.0).powi(2)
}

pub fn holder_table(x: &[f64]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    -(x[0].sin() * x[1].cos() * (1.0 - r / PI).abs().exp()).abs()
}

const MICHALEWICZ_M: i32 = 10;

fn michalewicz_term(i: usize, xi: f64) -> f64 {
    -xi.sin() * ((i as f64) * xi * xi / PI).sin().powi(2 * MICHALEWICZ_M)
}

pub fn michalewicz(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| michalewicz_term(i + 1, xi))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn six_hump_camel(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    (4.0 - 2.1 * x1 * x1 + x1.powi(4) / 3.0) * x1 * x1 + x1 * x2 + (-4.0 + 4.0 * x2 * x2) * x2 * x2
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let last = w[w.len() - 1];
    let head = (PI * w[0]).sin().powi(2);
    let mid: f64 = w[..w.len() - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    let tail = (last - 1.0).powi(2) * (1.0 + (2.0 * PI * last).sin().powi(2));
    head + mid + tail
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Per-axis minimizer of the separable Michalewicz sum: dense scan of
/// `[0, pi]` followed by golden-section refinement around the best sample.
fn michalewicz_axis_minimizer(i: usize) -> f64 {
    const SAMPLES: usize = 20_000;
    let step = PI / SAMPLES as f64;
    let (best, _) = (0..=SAMPLES)
        .map(|k| {
            let x = k as f64 * step;
            (x, michalewicz_term(i, x))
        })
        .fold((0.0, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc });

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best - step).max(0.0), (best + step).min(PI));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    while b - a > 1e-13 {
        if michalewicz_term(i, c) < michalewicz_term(i, d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    0.5 * (a + b)
}

fn michalewicz_optimum(d: usize) -> (f64, Vec<Vec<f64>>) {
    let x: Vec<f64> = (1..=d).map(michalewicz_axis_minimizer).collect();
    (michalewicz(&x), vec![x])
}

const HIMMELBLAU_MINIMA: [[f64; 2]; 4] = [
    [3.0, 2.0],
    [-2.8051180869527483, 3.1313125182505734],
    [-3.779310253377745, -3.283185991286169],
    [3.58442834033049, -1.8481265269644052],
];

static REGISTRY: [BenchmarkEntry; 13] = [
    BenchmarkEntry {
        name: "Ackley",
        default_dim: 2,
        dims: Dims::AtLeast(1),
        aliases: &[],
        bounds: |d| cube(-32.768, 32.768)(d),
        func: ackley,
        optimum: |d| (0.0, vec![vec![0.0; d]]),
    },
    BenchmarkEntry {
        name: "Branin",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["branin-hoo"],
        bounds: |_| (vec![-5.0, 0.0], vec![10.0, 15.0]),
        func: branin,
        optimum: |_| {
            (
                5.0 / (4.0 * PI),
                vec![
                    vec![-PI, 12.275],
                    vec![PI, 2.275],
                    vec![9.424777966481027, 2.4749999936500737],
                ],
            )
        },
    },
    BenchmarkEntry {
        name: "DropWave",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["drop-wave"],
        bounds: |d| cube(-5.12, 5.12)(d),
        func: drop_wave,
        optimum: |_| (-1.0, vec![vec![0.0, 0.0]]),
    },
    BenchmarkEntry {
        name: "EggHolder",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["egg-holder"],
        bounds: |d| cube(-512.0, 512.0)(d),
        func: egg_holder,
        optimum: |_| (-959.640662720851, vec![vec![512.0, 404.2318051252468]]),
    },
    BenchmarkEntry {
        name: "GoldsteinPrice",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["goldstein-price", "goldstein"],
        bounds: |d| cube(-2.0, 2.0)(d),
        func: goldstein_price,
        optimum: |_| (3.0, vec![vec![0.0, -1.0]]),
    },
    BenchmarkEntry {
        name: "Himmelblau",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &[],
        bounds: |d| cube(-5.0, 5.0)(d),
        func: himmelblau,
        optimum: |_| (0.0, HIMMELBLAU_MINIMA.iter().map(|m| m.to_vec()).collect()),
    },
    BenchmarkEntry {
        name: "HolderTable",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["holder-table", "holder"],
        bounds: |d| cube(-10.0, 10.0)(d),
        func: holder_table,
        optimum: |_| {
            let (a, b) = (8.055023466339607, 9.664590027738118);
            (
                -19.20850256788675,
                vec![vec![a, b], vec![-a, b], vec![a, -b], vec![-a, -b]],
            )
        },
    },
    BenchmarkEntry {
        name: "Michalewicz",
        default_dim: 2,
        dims: Dims::AtLeast(1),
        aliases: &[],
        bounds: |d| cube(0.0, PI)(d),
        func: michalewicz,
        optimum: michalewicz_optimum,
    },
    BenchmarkEntry {
        name: "Rastrigin",
        default_dim: 2,
        dims: Dims::AtLeast(1),
        aliases: &[],
        bounds: |d| cube(-5.12, 5.12)(d),
        func: rastrigin,
        optimum: |d| (0.0, vec![vec![0.0; d]]),
    },
    BenchmarkEntry {
        name: "Rosenbrock",
        default_dim: 2,
        dims: Dims::AtLeast(2),
        aliases: &[],
        bounds: |d| cube(-5.0, 10.0)(d),
        func: rosenbrock,
        optimum: |d| (0.0, vec![vec![1.0; d]]),
    },
    BenchmarkEntry {
        name: "Camel",
        default_dim: 2,
        dims: Dims::Fixed(2),
        aliases: &["six-hump-camel", "sixhumpcamel", "camel6"],
        bounds: |_| (vec![-3.0, -2.0], vec![3.0, 2.0]),
        func: six_hump_camel,
        optimum: |_| {
            let (a, b) = (0.08984200893527233, 0.712656403019058);
            (-1.0316284534898774, vec![vec![a, -b], vec![-a, b]])
        },
    },
    BenchmarkEntry {
        name: "Levy",
        default_dim: 2,
        dims: Dims::AtLeast(1),
        aliases: &[],
        bounds: |d| cube(-10.0, 10.0)(d),
        func: levy,
        optimum: |d| (0.0, vec![vec![1.0; d]]),
    },
    BenchmarkEntry {
        name: "Sphere",
        default_dim: 2,
        dims: Dims::AtLeast(1),
        aliases: &[],
        bounds: |d| cube(-5.12, 5.12)(d),
        func: sphere,
        optimum: |d| (0.0, vec![vec![0.0; d]]),
    },
];

/// All registered benchmarks, in a fixed order.
pub fn registry() -> &'static [BenchmarkEntry] {
    &REGISTRY
}

/// Case- and punctuation-insensitive lookup (`"goldstein-price"`,
/// `"GoldsteinPrice"` and `"goldsteinprice"` all resolve).
pub fn lookup(name: &str) -> Result<&'static BenchmarkEntry> {
    REGISTRY
        .iter()
        .find(|e| e.matches(name))
        .ok_or_else(|| Error::UnknownFunction(name.to_string()))
}

pub fn make_benchmark(name: &str, d: usize) -> Result<Objective> {
    lookup(name)?.objective(d)
}

/// The smooth two-dimensional subset.
pub const SMOOTH_2D: [&str; 6] = [
    "Branin",
    "GoldsteinPrice",
    "Himmelblau",
    "Rosenbrock",
    "Camel",
    "Sphere",
];

/// Distance to the optimum measured in objective value: `|f_found - f_star|`.
pub fn distance_to_minimum(f_star: f64, f_found: f64) -> f64 {
    (f_found - f_star).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::EvalCounter;
    use rand::{Rng, SeedableRng};

    #[test]
    fn registry_names() {
        let mut names: Vec<_> = registry().iter().map(|e| e.name).collect();
        names.sort();
        assert_eq!(
            names,
            [
                "Ackley", "Branin", "Camel", "DropWave", "EggHolder", "GoldsteinPrice",
                "Himmelblau", "HolderTable", "Levy", "Michalewicz", "Rastrigin", "Rosenbrock",
                "Sphere"
            ]
        );
    }

    #[test]
    fn every_entry_builds_at_default_dim() {
        for e in registry() {
            let obj = e.objective(e.default_dim).unwrap();
            let r = obj.reference().unwrap();
            for m in &r.minimizers {
                assert!((obj.value(m) - r.f_star).abs() < 1e-6, "{}", e.name);
            }
        }
    }

    #[test]
    fn generic_functions_across_dimensions() {
        for name in ["Sphere", "Ackley", "Rastrigin", "Rosenbrock", "Levy", "Michalewicz"] {
            for d in [2, 5, 10, 50] {
                let obj = make_benchmark(name, d).unwrap();
                let r = obj.reference().unwrap();
                assert!((obj.value(&r.minimizers[0]) - r.f_star).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn known_values() {
        let mut c = EvalCounter::new();
        let s = make_benchmark("sphere", 2).unwrap();
        assert_eq!(s.evaluate(&[0.0, 0.0], &mut c).unwrap(), 0.0);
        let a = make_benchmark("ackley", 2).unwrap();
        assert!(a.evaluate(&[0.0, 0.0], &mut c).unwrap().abs() < 1e-12);
        assert_eq!(make_benchmark("Branin", 2).unwrap().reference().unwrap().f_star, 5.0 / (4.0 * PI));
        assert_eq!(make_benchmark("goldstein-price", 2).unwrap().value(&[0.0, -1.0]), 3.0);
    }

    #[test]
    fn branin_grid_oracle() {
        // dense grid over the domain: min value agrees with the closed form
        let n = 2000;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let x = [-5.0 + 15.0 * i as f64 / n as f64, 15.0 * j as f64 / n as f64];
                best = best.min(branin(&x));
            }
        }
        assert!((best - 0.397887).abs() < 1e-4);
        assert!((best - 5.0 / (4.0 * PI)).abs() < 1e-4);
    }

    #[test]
    fn goldstein_price_grid_oracle() {
        let n = 1000;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let x = [-2.0 + 4.0 * i as f64 / n as f64, -2.0 + 4.0 * j as f64 / n as f64];
                best = best.min(goldstein_price(&x));
            }
        }
        assert!((best - 3.0).abs() < 1e-3);
    }

    #[test]
    fn michalewicz_known_minima() {
        let cases = [(2, -1.8013), (5, -4.687658), (10, -9.66015)];
        for (d, expected) in cases {
            let f = lookup("Michalewicz").unwrap().f_star(d).unwrap();
            assert!((f - expected).abs() < 1e-4, "d={d}: {f}");
        }
    }

    #[test]
    fn two_dimensional_only_functions_reject_other_dims() {
        for name in ["Branin", "DropWave", "EggHolder", "GoldsteinPrice", "Himmelblau", "HolderTable", "Camel"] {
            assert!(matches!(
                make_benchmark(name, 3),
                Err(Error::UnsupportedDimension { .. })
            ));
        }
        assert!(make_benchmark("Rosenbrock", 1).is_err());
        assert!(matches!(make_benchmark("nope", 2), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn finite_on_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for e in registry() {
            let dom = e.domain_for(e.default_dim).unwrap();
            for _ in 0..100_000 {
                let x: Vec<f64> = (0..dom.dim())
                    .map(|i| rng.random_range(dom.lower()[i]..=dom.upper()[i]))
                    .collect();
                assert!(e.eval(&x).is_finite(), "{} at {x:?}", e.name);
            }
        }
    }

    #[test]
    fn distances() {
        assert_eq!(distance_to_minimum(0.0, 0.0), 0.0);
        assert_eq!(distance_to_minimum(0.0, 5e-8), 5e-8);
        assert!((distance_to_minimum(3.0, 3.0004) - 4e-4).abs() < 1e-12);
    }
}
