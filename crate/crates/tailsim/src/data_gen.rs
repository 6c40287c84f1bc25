//! Synthetic data generation for the streaming linear-regression model.
//!
//! The generative model: a true parameter `x_true ~ N(0, sigma_x^2 I_d)`,
//! inputs `a_i ~ N(0, sigma^2 I_d)` and labels
//! `y_i | a_i ~ N(a_i . x_true, sigma_y^2)`. Batch `k` of the one-pass stream
//! is a pure function of `(seed, k)`, so chains can be replayed or run in
//! parallel without coordination.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::stream_rng;

/// Default cap on `n * d` for in-memory datasets (~0.8 GB of f64).
pub const DEFAULT_ELEMENT_CAP: usize = 100_000_000;

const SAS_BLOCK: usize = 4096;

#[derive(Debug, Error)]
pub enum DataGenError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dataset of {requested} elements exceeds the cap of {cap}")]
    MemoryCap { requested: usize, cap: usize },
    #[error("stable index must lie in (0, 2], got {0}")]
    AlphaOutOfRange(f64),
}

/// The synthetic generative model and its RNG seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GaussianStreamSpec {
    /// Problem dimension.
    pub d: usize,
    /// Minibatch size.
    pub b: usize,
    /// Stepsize (zero is allowed for degenerate frozen-chain checks).
    pub eta: f64,
    /// Input scale: `a_i ~ N(0, sigma^2 I_d)`.
    pub sigma: f64,
    /// True-parameter scale: `x_true ~ N(0, sigma_x^2 I_d)`.
    pub sigma_x: f64,
    /// Label-noise scale (strictly positive; labels need a continuous density).
    pub sigma_y: f64,
    /// Master seed for every stream derived from this spec.
    pub seed: u64,
}

impl GaussianStreamSpec {
    pub fn new(
        d: usize,
        b: usize,
        eta: f64,
        sigma: f64,
        sigma_x: f64,
        sigma_y: f64,
        seed: u64,
    ) -> Result<Self, DataGenError> {
        if d == 0 {
            return Err(DataGenError::InvalidParameter("d must be >= 1".into()));
        }
        if b == 0 {
            return Err(DataGenError::InvalidParameter("b must be >= 1".into()));
        }
        if !(eta >= 0.0) {
            return Err(DataGenError::InvalidParameter(format!(
                "eta must be >= 0, got {eta}"
            )));
        }
        if !(sigma > 0.0) {
            return Err(DataGenError::InvalidParameter(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        if !(sigma_x >= 0.0) {
            return Err(DataGenError::InvalidParameter(format!(
                "sigma_x must be >= 0, got {sigma_x}"
            )));
        }
        if !(sigma_y > 0.0) {
            return Err(DataGenError::InvalidParameter(format!(
                "sigma_y must be > 0, got {sigma_y}"
            )));
        }
        Ok(Self { d, b, eta, sigma, sigma_x, sigma_y, seed })
    }

    /// Same model, different seed. Used to give each replica its own stream.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Effective stepsize `a = eta * sigma^2`.
    pub fn effective_stepsize(&self) -> f64 {
        self.eta * self.sigma * self.sigma
    }
}

/// One minibatch: `b` input vectors in `R^d` and their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    d: usize,
    inputs: Vec<f64>, // b x d, row-major
    labels: Vec<f64>,
}

impl Minibatch {
    pub fn new(d: usize, inputs: Vec<f64>, labels: Vec<f64>) -> Result<Self, DataGenError> {
        if inputs.len() != labels.len() * d {
            return Err(DataGenError::DimensionMismatch {
                expected: labels.len() * d,
                got: inputs.len(),
            });
        }
        Ok(Self { d, inputs, labels })
    }

    pub fn b(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// Draws the model's true parameter `x_true ~ N(0, sigma_x^2 I_d)`.
pub fn draw_x_true(spec: &GaussianStreamSpec) -> Vec<f64> {
    let mut rng = stream_rng(spec.seed, "x-true", 0);
    (0..spec.d)
        .map(|_| spec.sigma_x * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Batch `k >= 1` of the one-pass stream. Deterministic in `(spec.seed, k)`;
/// batches for distinct `k` are independent draws.
pub fn gen_stream_batch(
    spec: &GaussianStreamSpec,
    x_true: &[f64],
    k: u64,
) -> Result<Minibatch, DataGenError> {
    if x_true.len() != spec.d {
        return Err(DataGenError::DimensionMismatch { expected: spec.d, got: x_true.len() });
    }
    if k == 0 {
        return Err(DataGenError::InvalidParameter("step index k must be >= 1".into()));
    }
    let mut rng = stream_rng(spec.seed, "batch", k);
    let mut inputs = Vec::with_capacity(spec.b * spec.d);
    let mut labels = Vec::with_capacity(spec.b);
    for _ in 0..spec.b {
        let start = inputs.len();
        let mut dot = 0.0;
        for j in 0..spec.d {
            let a = spec.sigma * rng.sample::<f64, _>(StandardNormal);
            inputs.push(a);
            dot += a * x_true[j];
        }
        debug_assert_eq!(inputs.len(), start + spec.d);
        let noise: f64 = rng.sample(StandardNormal);
        labels.push(dot + spec.sigma_y * noise);
    }
    Ok(Minibatch { d: spec.d, inputs, labels })
}

/// A fixed dataset drawn once from the generative model.
#[derive(Debug, Clone)]
pub struct FiniteDataset {
    pub n: usize,
    pub d: usize,
    /// n x d, row-major.
    pub inputs: Vec<f64>,
    pub labels: Vec<f64>,
    pub x_true: Vec<f64>,
}

impl FiniteDataset {
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d..(i + 1) * self.d]
    }
}

/// Generates an `n`-sample dataset. Rows are generated on independent
/// per-row streams, so the result does not depend on thread count.
pub fn gen_finite_dataset(spec: &GaussianStreamSpec, n: usize) -> Result<FiniteDataset, DataGenError> {
    gen_finite_dataset_capped(spec, n, DEFAULT_ELEMENT_CAP)
}

pub fn gen_finite_dataset_capped(
    spec: &GaussianStreamSpec,
    n: usize,
    cap: usize,
) -> Result<FiniteDataset, DataGenError> {
    if n == 0 {
        return Err(DataGenError::InvalidParameter("n must be >= 1".into()));
    }
    let elements = n.checked_mul(spec.d).ok_or(DataGenError::MemoryCap { requested: usize::MAX, cap })?;
    if elements > cap {
        return Err(DataGenError::MemoryCap { requested: elements, cap });
    }
    let x_true = draw_x_true(spec);
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, "dataset", i as u64);
            let mut row = Vec::with_capacity(spec.d);
            let mut dot = 0.0;
            for j in 0..spec.d {
                let a = spec.sigma * rng.sample::<f64, _>(StandardNormal);
                row.push(a);
                dot += a * x_true[j];
            }
            let noise: f64 = rng.sample(StandardNormal);
            (row, dot + spec.sigma_y * noise)
        })
        .collect();
    let mut inputs = Vec::with_capacity(elements);
    let mut labels = Vec::with_capacity(n);
    for (row, y) in rows {
        inputs.extend_from_slice(&row);
        labels.push(y);
    }
    Ok(FiniteDataset { n, d: spec.d, inputs, labels, x_true })
}

/// Samples `n` i.i.d. symmetric alpha-stable variates with characteristic
/// function `exp(-(scale |t|)^alpha)` via the Chambers–Mallows–Stuck method.
///
/// `alpha = 2` is `N(0, 2 scale^2)`; `alpha = 1` is Cauchy with the given
/// scale.
pub fn sample_sas(alpha: f64, scale: f64, n: usize, seed: u64) -> Result<Vec<f64>, DataGenError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(DataGenError::AlphaOutOfRange(alpha));
    }
    if !(scale > 0.0) {
        return Err(DataGenError::InvalidParameter(format!(
            "scale must be > 0, got {scale}"
        )));
    }
    let blocks = n.div_ceil(SAS_BLOCK);
    let out: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = stream_rng(seed, "sas", blk as u64);
            let count = SAS_BLOCK.min(n - blk * SAS_BLOCK);
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                v.push(scale * sas_standard(alpha, &mut rng));
            }
            v
        })
        .collect();
    Ok(out.concat())
}

fn sas_standard<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let v: f64 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    let t = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let s = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    t * s
}

/// Univariate input laws for the non-Gaussian bound machinery. Components of
/// an input vector are drawn i.i.d. from the chosen kind; every kind has all
/// moments finite.
#[derive(Debug, Clone, PartialEq)]
pub enum InputDistribution {
    Gaussian { sigma: f64 },
    Uniform { half_width: f64 },
    Laplace { scale: f64 },
    GaussianMixture { weights: Vec<f64>, scales: Vec<f64> },
}

impl InputDistribution {
    /// Per-component variance.
    pub fn variance(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } => sigma * sigma,
            Self::Uniform { half_width } => half_width * half_width / 3.0,
            Self::Laplace { scale } => 2.0 * scale * scale,
            Self::GaussianMixture { weights, scales } => {
                let wsum: f64 = weights.iter().sum();
                weights
                    .iter()
                    .zip(scales)
                    .map(|(w, s)| w / wsum * s * s)
                    .sum()
            }
        }
    }

    /// Rescales the kind to unit per-component variance, so different kinds
    /// are comparable at the same nominal `eta`.
    pub fn standardized(&self) -> Self {
        let s = self.variance().sqrt();
        match self {
            Self::Gaussian { sigma } => Self::Gaussian { sigma: sigma / s },
            Self::Uniform { half_width } => Self::Uniform { half_width: half_width / s },
            Self::Laplace { scale } => Self::Laplace { scale: scale / s },
            Self::GaussianMixture { weights, scales } => Self::GaussianMixture {
                weights: weights.clone(),
                scales: scales.iter().map(|x| x / s).collect(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), DataGenError> {
        let ok = match self {
            Self::Gaussian { sigma } => *sigma > 0.0,
            Self::Uniform { half_width } => *half_width > 0.0,
            Self::Laplace { scale } => *scale > 0.0,
            Self::GaussianMixture { weights, scales } => {
                !weights.is_empty()
                    && weights.len() == scales.len()
                    && weights.iter().all(|&w| w >= 0.0)
                    && weights.iter().sum::<f64>() > 0.0
                    && scales.iter().all(|&s| s > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DataGenError::InvalidParameter(format!("invalid input distribution {self:?}")))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Self::Uniform { half_width } => rng.random_range(-half_width..*half_width),
            Self::Laplace { scale } => {
                let u: f64 = rng.random_range(-0.5..0.5);
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Self::GaussianMixture { weights, scales } => {
                let wsum: f64 = weights.iter().sum();
                let mut pick: f64 = rng.random_range(0.0..wsum);
                let mut idx = 0;
                for (i, &w) in weights.iter().enumerate() {
                    if pick < w {
                        idx = i;
                        break;
                    }
                    pick -= w;
                    idx = i;
                }
                scales[idx] * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, mean_and_se};

    fn spec(d: usize, b: usize) -> GaussianStreamSpec {
        GaussianStreamSpec::new(d, b, 0.1, 1.0, 1.0, 1.0, 42).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianStreamSpec::new(0, 1, 0.1, 1.0, 1.0, 1.0, 0).is_err());
        assert!(GaussianStreamSpec::new(1, 0, 0.1, 1.0, 1.0, 1.0, 0).is_err());
        assert!(GaussianStreamSpec::new(1, 1, 0.0, 1.0, 1.0, 1.0, 0).is_err());
        assert!(GaussianStreamSpec::new(1, 1, 0.1, 0.0, 1.0, 1.0, 0).is_err());
        assert!(GaussianStreamSpec::new(1, 1, 0.1, 1.0, -1.0, 1.0, 0).is_err());
        assert!(GaussianStreamSpec::new(1, 1, 0.1, 1.0, 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn zero_parameter_vanishing_noise_gives_zero_labels() {
        // sigma_y -> 0+ limit probed at 1e-12
        let spec = GaussianStreamSpec::new(2, 1, 0.1, 1.0, 0.0, 1e-12, 7).unwrap();
        let x_true = vec![0.0, 0.0];
        for k in 1..50 {
            let batch = gen_stream_batch(&spec, &x_true, k).unwrap();
            assert!(batch.label(0).abs() < 1e-9);
        }
    }

    #[test]
    fn stream_batches_are_deterministic() {
        let spec = spec(3, 4);
        let x_true = draw_x_true(&spec);
        let b1 = gen_stream_batch(&spec, &x_true, 17).unwrap();
        let b2 = gen_stream_batch(&spec, &x_true, 17).unwrap();
        assert_eq!(b1, b2);
        let b3 = gen_stream_batch(&spec, &x_true, 18).unwrap();
        assert_ne!(b1, b3);
    }

    #[test]
    fn stream_batch_rejects_wrong_dimension() {
        let spec = spec(3, 1);
        assert!(matches!(
            gen_stream_batch(&spec, &[0.0; 2], 1),
            Err(DataGenError::DimensionMismatch { .. })
        ));
        assert!(gen_stream_batch(&spec, &[0.0; 3], 0).is_err());
    }

    #[test]
    fn input_second_moment_matches_sigma() {
        // E a^2 = sigma^2 for d=1, b=4, sigma=2; MC over 1e6 draws
        let spec = GaussianStreamSpec::new(1, 4, 0.1, 2.0, 1.0, 1.0, 3).unwrap();
        let x_true = draw_x_true(&spec);
        let mut sq = Vec::with_capacity(1_000_000);
        let mut k = 1u64;
        while sq.len() < 1_000_000 {
            let batch = gen_stream_batch(&spec, &x_true, k).unwrap();
            for i in 0..batch.b() {
                sq.push(batch.input(i)[0] * batch.input(i)[0]);
            }
            k += 1;
        }
        let (m, se) = mean_and_se(&sq);
        assert!((m - 4.0).abs() < 3.0 * se, "E a^2 = {m} +- {se}, want 4");
    }

    #[test]
    fn gaussian_norm_moment_sanity() {
        // E ||a||^2 = d sigma^2 within 4 std errors
        let spec = GaussianStreamSpec::new(8, 2, 0.1, 1.5, 1.0, 1.0, 5).unwrap();
        let x_true = draw_x_true(&spec);
        let mut sq = Vec::new();
        for k in 1..=20_000u64 {
            let batch = gen_stream_batch(&spec, &x_true, k).unwrap();
            for i in 0..batch.b() {
                sq.push(batch.input(i).iter().map(|a| a * a).sum());
            }
        }
        let (m, se) = mean_and_se(&sq);
        let want = 8.0 * 1.5 * 1.5;
        assert!((m - want).abs() < 4.0 * se, "E||a||^2 = {m} +- {se}, want {want}");
    }

    #[test]
    fn finite_dataset_zero_sigma_x() {
        let spec = GaussianStreamSpec::new(2, 1, 0.1, 1.0, 0.0, 1.0, 9).unwrap();
        let ds = gen_finite_dataset(&spec, 3).unwrap();
        assert_eq!(ds.x_true, vec![0.0, 0.0]);
        assert_eq!(ds.n, 3);
    }

    #[test]
    fn finite_dataset_is_deterministic_and_capped() {
        let spec = spec(4, 1);
        let d1 = gen_finite_dataset(&spec, 100).unwrap();
        let d2 = gen_finite_dataset(&spec, 100).unwrap();
        assert_eq!(d1.inputs, d2.inputs);
        assert_eq!(d1.labels, d2.labels);
        assert_eq!(d1.x_true, d2.x_true);
        assert!(matches!(
            gen_finite_dataset_capped(&spec, 1000, 100),
            Err(DataGenError::MemoryCap { .. })
        ));
    }

    #[test]
    fn finite_dataset_row_covariance_is_isotropic() {
        let spec = GaussianStreamSpec::new(5, 1, 0.1, 1.0, 1.0, 1.0, 11).unwrap();
        let ds = gen_finite_dataset(&spec, 10_000).unwrap();
        for p in 0..5 {
            for q in p..5 {
                let mut acc = 0.0;
                for i in 0..ds.n {
                    let row = ds.input(i);
                    acc += row[p] * row[q];
                }
                let got = acc / ds.n as f64;
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((got - want).abs() < 0.05, "cov[{p}][{q}] = {got}");
            }
        }
    }

    #[test]
    fn sas_rejects_bad_alpha() {
        assert!(sample_sas(0.0, 1.0, 10, 0).is_err());
        assert!(sample_sas(2.1, 1.0, 10, 0).is_err());
        assert!(sample_sas(1.0, 0.0, 10, 0).is_err());
    }

    #[test]
    fn sas_alpha2_is_gaussian_with_variance_two() {
        let scale = 0.7;
        let xs = sample_sas(2.0, scale, 1_000_000, 21).unwrap();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (m, se) = mean_and_se(&sq);
        let want = 2.0 * scale * scale;
        assert!((m - want).abs() < 3.0 * se, "variance {m} +- {se}, want {want}");
        // kurtosis within [2.9, 3.1]
        let m2 = mean(&sq);
        let m4 = mean(&xs.iter().map(|x| x.powi(4)).collect::<Vec<_>>());
        let kurt = m4 / (m2 * m2);
        assert!((2.9..3.1).contains(&kurt), "kurtosis {kurt}");
    }

    #[test]
    fn sas_alpha1_is_centered_cauchy() {
        let xs = sample_sas(1.0, 1.0, 1_000_000, 22).unwrap();
        let med = crate::stats::median(&xs);
        assert!(med.abs() < 0.01, "median {med}");
        // quartiles of a standard Cauchy sit at +-1
        let q3 = crate::stats::quantile(&xs, 0.75);
        assert!((q3 - 1.0).abs() < 0.01, "q3 {q3}");
    }

    #[test]
    fn sas_tail_decays_with_the_right_exponent() {
        // log-log slope of the survival function of |X| over t in [10, 1000]
        let alpha = 1.5;
        let xs = sample_sas(alpha, 1.0, 10_000_000, 23).unwrap();
        let ts: Vec<f64> = (0..9).map(|i| 10.0f64.powf(1.0 + 0.25 * i as f64)).collect();
        let mut logs_t = Vec::new();
        let mut logs_p = Vec::new();
        for &t in &ts {
            let count = xs.iter().filter(|x| x.abs() > t).count();
            if count >= 50 {
                logs_t.push(t.ln());
                logs_p.push((count as f64 / xs.len() as f64).ln());
            }
        }
        let slope = crate::stats::ols_slope(&logs_t, &logs_p);
        assert!((slope + alpha).abs() < 0.1, "tail slope {slope}, want {}", -alpha);
    }

    #[test]
    fn sas_is_deterministic_and_prefix_stable() {
        let a = sample_sas(1.7, 1.0, 10_000, 5).unwrap();
        let b = sample_sas(1.7, 1.0, 12_000, 5).unwrap();
        assert_eq!(a[..10_000], b[..10_000]);
    }

    #[test]
    fn input_distributions_standardize_to_unit_variance() {
        let kinds = [
            InputDistribution::Gaussian { sigma: 3.0 },
            InputDistribution::Uniform { half_width: 2.0 },
            InputDistribution::Laplace { scale: 0.4 },
            InputDistribution::GaussianMixture {
                weights: vec![0.3, 0.7],
                scales: vec![0.5, 2.0],
            },
        ];
        for kind in kinds {
            let std = kind.standardized();
            assert!((std.variance() - 1.0).abs() < 1e-12, "{std:?}");
            // empirical check
            let mut rng = stream_rng(1, "dist-test", 0);
            let n = 200_000;
            let sq: Vec<f64> = (0..n).map(|_| std.sample(&mut rng).powi(2)).collect();
            let (m, se) = mean_and_se(&sq);
            assert!((m - 1.0).abs() < 4.0 * se, "{std:?}: var {m} +- {se}");
        }
    }
}
