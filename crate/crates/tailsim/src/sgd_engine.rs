//! The affine SGD recursion: single chains, coupled pairs and replica
//! ensembles.
//!
//! One step is `x_k = (I - (eta/b) H_k) x_{k-1} + q_k` with
//! `H_k = sum a_i a_i^T` and `q_k = (eta/b) sum a_i y_i` over the minibatch.
//! The step is computed with `b` inner products; the `d x d` Gram matrix is
//! never materialized. Non-finite arithmetic or a norm above the overflow
//! threshold sets a sticky `diverged` flag instead of crashing.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::data_gen::{
    draw_x_true, gen_finite_dataset, gen_stream_batch, DataGenError, FiniteDataset,
    GaussianStreamSpec, Minibatch,
};
use crate::rng::{child_seed, stream_rng};
use crate::stats::bootstrap_se_of_mean;

/// Default overflow threshold on the infinity norm of the iterate; far above
/// any stationary scale at desk configurations, far below f64 overflow.
pub const DEFAULT_OVERFLOW_THRESHOLD: f64 = 1e300;

/// Default ensemble size.
pub const DEFAULT_REPLICAS: usize = 400;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("normal equations are singular; the dataset Gram matrix has no Cholesky factor")]
    SingularNormalEquations,
    #[error("all {0} replicas diverged; the configuration is in the non-stationary regime")]
    AllReplicasDiverged(usize),
    #[error(transparent)]
    DataGen(#[from] DataGenError),
}

/// One SGD iterate plus its step counter and divergence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub k: u64,
    pub diverged: bool,
}

impl ChainState {
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, k: 0, diverged: false }
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Data regime for a run: fresh one-pass batches, or minibatches resampled
/// from one fixed dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Mode {
    Streaming,
    FiniteSum { n: usize, with_replacement: bool },
}

/// Initial iterate policy. The default draws `x0 ~ N(0, sigma_x^2 I)` on a
/// per-replica stream.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    GaussianSigmaX,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Total iterations K.
    pub total_steps: u64,
    /// Burn-in iterations K0 (0 <= K0 < K); the ergodic window is (K0, K].
    pub burn_in: u64,
    pub replicas: usize,
    pub mode: Mode,
    pub overflow_threshold: f64,
    pub x0: InitialPoint,
}

impl RunConfig {
    pub fn streaming(total_steps: u64, burn_in: u64, replicas: usize) -> Self {
        Self {
            total_steps,
            burn_in,
            replicas,
            mode: Mode::Streaming,
            overflow_threshold: DEFAULT_OVERFLOW_THRESHOLD,
            x0: InitialPoint::GaussianSigmaX,
        }
    }

    fn validate(&self, d: usize) -> Result<(), EngineError> {
        if self.burn_in >= self.total_steps {
            return Err(EngineError::InvalidConfig(format!(
                "need burn_in < total_steps, got {} >= {}",
                self.burn_in, self.total_steps
            )));
        }
        if self.replicas == 0 {
            return Err(EngineError::InvalidConfig("replicas must be >= 1".into()));
        }
        if !(self.overflow_threshold > 0.0) {
            return Err(EngineError::InvalidConfig("overflow threshold must be > 0".into()));
        }
        if let Mode::FiniteSum { n, .. } = self.mode {
            if n == 0 {
                return Err(EngineError::InvalidConfig(
                    "finite-sum dataset size must be >= 1".into(),
                ));
            }
        }
        if let InitialPoint::Fixed(v) = &self.x0 {
            if v.len() != d {
                return Err(EngineError::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        Ok(())
    }
}

/// One generative-model instance: the true parameter and, in finite-sum
/// mode, the fixed dataset. Shared by every replica of a run.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: GaussianStreamSpec,
    pub x_true: Vec<f64>,
    pub dataset: Option<FiniteDataset>,
}

impl Model {
    pub fn new(spec: &GaussianStreamSpec, mode: &Mode) -> Result<Self, EngineError> {
        let (x_true, dataset) = match mode {
            Mode::Streaming => (draw_x_true(spec), None),
            Mode::FiniteSum { n, .. } => {
                let ds = gen_finite_dataset(spec, *n)?;
                (ds.x_true.clone(), Some(ds))
            }
        };
        Ok(Self { spec: spec.clone(), x_true, dataset })
    }

    /// Batch `k` for the chain stream `chain_seed`.
    pub fn batch(&self, mode: &Mode, chain_seed: u64, k: u64) -> Result<Minibatch, EngineError> {
        match (mode, &self.dataset) {
            (Mode::Streaming, _) => {
                Ok(gen_stream_batch(&self.spec.reseeded(chain_seed), &self.x_true, k)?)
            }
            (Mode::FiniteSum { with_replacement, .. }, Some(ds)) => {
                let mut rng = stream_rng(chain_seed, "omega", k);
                let b = self.spec.b;
                let mut inputs = Vec::with_capacity(b * ds.d);
                let mut labels = Vec::with_capacity(b);
                if *with_replacement {
                    for _ in 0..b {
                        let i = rng.random_range(0..ds.n);
                        inputs.extend_from_slice(ds.input(i));
                        labels.push(ds.labels[i]);
                    }
                } else {
                    let picks = rand::seq::index::sample(&mut rng, ds.n, b.min(ds.n));
                    for i in picks {
                        inputs.extend_from_slice(ds.input(i));
                        labels.push(ds.labels[i]);
                    }
                }
                Ok(Minibatch::new(ds.d, inputs, labels)?)
            }
            (Mode::FiniteSum { .. }, None) => Err(EngineError::InvalidConfig(
                "finite-sum batch requested without a dataset".into(),
            )),
        }
    }

    /// The stationary mean: `x_true` in the streaming regime, the least
    /// squares solution `(A^T A)^{-1} A^T y` over the fixed dataset.
    pub fn stationary_mean(&self) -> Result<Vec<f64>, EngineError> {
        match &self.dataset {
            None => Ok(self.x_true.clone()),
            Some(ds) => {
                let d = ds.d;
                let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
                let mut rhs = nalgebra::DVector::<f64>::zeros(d);
                for i in 0..ds.n {
                    let row = ds.input(i);
                    for p in 0..d {
                        rhs[p] += row[p] * ds.labels[i];
                        for q in 0..d {
                            gram[(p, q)] += row[p] * row[q];
                        }
                    }
                }
                let chol =
                    nalgebra::Cholesky::new(gram).ok_or(EngineError::SingularNormalEquations)?;
                Ok(chol.solve(&rhs).iter().copied().collect())
            }
        }
    }
}

/// One SGD step on a minibatch. Sticky on divergence: stepping a diverged
/// state returns it unchanged.
pub fn sgd_step(
    state: &ChainState,
    batch: &Minibatch,
    eta: f64,
    overflow_threshold: f64,
) -> Result<ChainState, EngineError> {
    if batch.dim() != state.x.len() {
        return Err(EngineError::DimensionMismatch { expected: state.x.len(), got: batch.dim() });
    }
    if state.diverged {
        return Ok(state.clone());
    }
    let b = batch.b();
    let scale = eta / b as f64;
    let mut x = state.x.clone();
    for i in 0..b {
        let a = batch.input(i);
        let residual: f64 =
            a.iter().zip(&state.x).map(|(ai, xi)| ai * xi).sum::<f64>() - batch.label(i);
        let w = scale * residual;
        for (xj, aj) in x.iter_mut().zip(a) {
            *xj -= w * aj;
        }
    }
    let diverged = x.iter().any(|v| !v.is_finite() || v.abs() > overflow_threshold);
    Ok(ChainState { x, k: state.k + 1, diverged })
}

/// Multiplicative-only step for a coupled difference vector: labels cancel
/// in the difference of two chains driven by the same batches, so only the
/// inputs enter.
fn coupled_step(delta: &mut [f64], batch: &Minibatch, eta: f64) {
    let b = batch.b();
    let scale = eta / b as f64;
    for i in 0..b {
        let a = batch.input(i);
        let dot: f64 = a.iter().zip(delta.iter()).map(|(ai, di)| ai * di).sum();
        let w = scale * dot;
        for (dj, aj) in delta.iter_mut().zip(a) {
            *dj -= w * aj;
        }
    }
}

/// Per-step iterate norms of one chain run.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    /// `||x_k||` for `k = 0..=K` (truncated at divergence).
    pub norms: Vec<f64>,
    /// First step at which the overflow threshold was crossed.
    pub diverged_at: Option<u64>,
}

/// Runs a single chain from `x0`. Batches come from the spec's own stream,
/// so two runs with the same spec see identical data.
pub fn run_chain(
    spec: &GaussianStreamSpec,
    cfg: &RunConfig,
    x0: &[f64],
) -> Result<(TrajectorySummary, ChainState), EngineError> {
    if x0.len() != spec.d {
        return Err(EngineError::DimensionMismatch { expected: spec.d, got: x0.len() });
    }
    cfg.validate(spec.d)?;
    let model = Model::new(spec, &cfg.mode)?;
    let mut state = ChainState::new(x0.to_vec());
    let mut norms = Vec::with_capacity(cfg.total_steps as usize + 1);
    norms.push(state.norm());
    let mut diverged_at = None;
    for k in 1..=cfg.total_steps {
        let batch = model.batch(&cfg.mode, spec.seed, k)?;
        state = sgd_step(&state, &batch, spec.eta, cfg.overflow_threshold)?;
        norms.push(state.norm());
        if state.diverged {
            diverged_at = Some(k);
            break;
        }
    }
    Ok((TrajectorySummary { norms, diverged_at }, state))
}

/// Runs two chains from `x0` and `x0_tilde` under identical batch draws and
/// returns `||x_k - x_tilde_k||` for `k = 0..=K`. The difference follows the
/// purely multiplicative recursion, so the labels never enter: the output is
/// bitwise independent of the label noise.
pub fn run_coupled_pair(
    spec: &GaussianStreamSpec,
    cfg: &RunConfig,
    x0: &[f64],
    x0_tilde: &[f64],
) -> Result<Vec<f64>, EngineError> {
    if x0.len() != spec.d || x0_tilde.len() != spec.d {
        return Err(EngineError::DimensionMismatch {
            expected: spec.d,
            got: if x0.len() != spec.d { x0.len() } else { x0_tilde.len() },
        });
    }
    cfg.validate(spec.d)?;
    let model = Model::new(spec, &cfg.mode)?;
    let mut delta: Vec<f64> = x0.iter().zip(x0_tilde).map(|(a, b)| a - b).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(cfg.total_steps as usize + 1);
    out.push(norm(&delta));
    for k in 1..=cfg.total_steps {
        let batch = model.batch(&cfg.mode, spec.seed, k)?;
        coupled_step(&mut delta, &batch, spec.eta);
        out.push(norm(&delta));
    }
    Ok(out)
}

/// Replica ergodic averages: one centered row per non-diverged replica.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    d: usize,
    rows: Vec<Vec<f64>>,
    diverged: usize,
}

impl SampleMatrix {
    pub fn from_rows(d: usize, rows: Vec<Vec<f64>>, diverged: usize) -> Self {
        Self { d, rows, diverged }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Replicas dropped because they crossed the overflow threshold.
    pub fn diverged_count(&self) -> usize {
        self.diverged
    }
}

fn draw_x0(spec: &GaussianStreamSpec, cfg: &RunConfig, chain_seed: u64) -> Vec<f64> {
    match &cfg.x0 {
        InitialPoint::Fixed(v) => v.clone(),
        InitialPoint::GaussianSigmaX => {
            let mut rng = stream_rng(chain_seed, "x0", 0);
            (0..spec.d).map(|_| spec.sigma_x * rng.sample::<f64, _>(StandardNormal)).collect()
        }
    }
}

/// Runs the replica ensemble and returns the centered ergodic averages
/// `(1/(K-K0)) sum_{k=K0+1}^{K} (x_k - xbar)`, one row per surviving
/// replica. `xbar` is the stationary mean from [`Model::stationary_mean`].
pub fn ergodic_averages(
    spec: &GaussianStreamSpec,
    cfg: &RunConfig,
) -> Result<SampleMatrix, EngineError> {
    cfg.validate(spec.d)?;
    let model = Model::new(spec, &cfg.mode)?;
    let center = model.stationary_mean()?;
    let sums: Vec<Option<Vec<f64>>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let chain_seed = child_seed(spec.seed, "replica", r as u64);
            let x0 = draw_x0(spec, cfg, chain_seed);
            let mut state = ChainState::new(x0);
            let mut acc = vec![0.0; spec.d];
            for k in 1..=cfg.total_steps {
                let batch = model
                    .batch(&cfg.mode, chain_seed, k)
                    .expect("batch generation cannot fail after validation");
                state = sgd_step(&state, &batch, spec.eta, cfg.overflow_threshold)
                    .expect("dimensions validated");
                if state.diverged {
                    return None;
                }
                if k > cfg.burn_in {
                    for (a, (xi, ci)) in acc.iter_mut().zip(state.x.iter().zip(&center)) {
                        *a += xi - ci;
                    }
                }
            }
            let window = (cfg.total_steps - cfg.burn_in) as f64;
            Some(acc.into_iter().map(|v| v / window).collect())
        })
        .collect();
    let mut rows = Vec::with_capacity(cfg.replicas);
    let mut diverged = 0;
    for s in sums {
        match s {
            Some(row) => rows.push(row),
            None => diverged += 1,
        }
    }
    if rows.is_empty() {
        return Err(EngineError::AllReplicasDiverged(cfg.replicas));
    }
    Ok(SampleMatrix { d: spec.d, rows, diverged })
}

/// Ensemble moment trajectory `E ||x_k||^p` with bootstrap standard errors.
#[derive(Debug, Clone)]
pub struct MomentTrajectory {
    pub p: f64,
    /// Ensemble mean of `||x_k||^p` for `k = 0..=K`.
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub diverged: usize,
}

pub fn moment_trajectory(
    spec: &GaussianStreamSpec,
    cfg: &RunConfig,
    p: f64,
) -> Result<MomentTrajectory, EngineError> {
    if !(p >= 0.0) {
        return Err(EngineError::InvalidConfig(format!("moment order must be >= 0, got {p}")));
    }
    cfg.validate(spec.d)?;
    if cfg.replicas < 100 {
        log::warn!("moment_trajectory with {} replicas; at least 100 recommended", cfg.replicas);
    }
    let model = Model::new(spec, &cfg.mode)?;
    let paths: Vec<Option<Vec<f64>>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let chain_seed = child_seed(spec.seed, "replica", r as u64);
            let mut state = ChainState::new(draw_x0(spec, cfg, chain_seed));
            let mut norms = Vec::with_capacity(cfg.total_steps as usize + 1);
            norms.push(state.norm().powf(p));
            for k in 1..=cfg.total_steps {
                let batch = model.batch(&cfg.mode, chain_seed, k).expect("validated");
                state =
                    sgd_step(&state, &batch, spec.eta, cfg.overflow_threshold).expect("validated");
                if state.diverged {
                    return None;
                }
                norms.push(state.norm().powf(p));
            }
            Some(norms)
        })
        .collect();
    let kept: Vec<&Vec<f64>> = paths.iter().flatten().collect();
    let diverged = cfg.replicas - kept.len();
    if kept.is_empty() {
        return Err(EngineError::AllReplicasDiverged(cfg.replicas));
    }
    let steps = cfg.total_steps as usize + 1;
    let boot_seed = child_seed(spec.seed, "moment-bootstrap", 0);
    let per_k: Vec<(f64, f64)> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let col: Vec<f64> = kept.iter().map(|path| path[k]).collect();
            let m = crate::stats::mean(&col);
            let se = bootstrap_se_of_mean(&col, 200, boot_seed.wrapping_add(k as u64));
            (m, se)
        })
        .collect();
    Ok(MomentTrajectory {
        p,
        values: per_k.iter().map(|x| x.0).collect(),
        std_errors: per_k.iter().map(|x| x.1).collect(),
        diverged,
    })
}
