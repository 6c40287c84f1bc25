//! The moment-growth function `h(s)`, the top Lyapunov exponent `rho`, and
//! the tail-index solver.
//!
//! For isotropic Gaussian inputs the per-step growth factor of the recursion
//! has the chi-square representation
//!
//! ```text
//! h(s)  = E[ ((1 - (a/b) X)^2 + (a^2/b^2) X Y)^{s/2} ],
//! rho   = (1/2) E[ log((1 - (a/b) X)^2 + (a^2/b^2) X Y) ],
//! ```
//!
//! with `a = eta sigma^2`, `X ~ chi^2_b`, `Y ~ chi^2_{d-1}` independent
//! (`Y = 0` when `d = 1`). `h` is strictly convex with `h(0) = 1` and
//! `h'(0) = rho`; when `rho < 0` the stationary tail-index is the second
//! root of `h(alpha) = 1`.
//!
//! Everything here works on a [`GrowthSample`]: a frozen vector of per-draw
//! log growth factors. Evaluating `h` at many `s` on one sample gives common
//! random numbers across the `s` axis for free, which makes bisection exact
//! on the empirical curve; reusing a seed across parameter grids gives
//! common random numbers across the grid.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::data_gen::InputDistribution;
use crate::quadrature::{integrate_with_knots, normal_pdf};
use crate::rng::{stream_rng_pair, stream_rng};
use crate::stats::{mean_and_se, sum_compensated};

/// Minimum Monte Carlo sample count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1_000;
/// Bracketing cap on `s`; beyond this the law is treated as light-tailed.
pub const S_CAP: f64 = 64.0;
/// Largest materialized sample during solve escalation.
const SOLVE_SAMPLE_CAP: u64 = 10_000_000;
/// Largest streamed sample for the sign decision on `rho`.
const RHO_ESCALATION_CAP: u64 = 100_000_000;
/// z-score for the sign decision on `rho`.
const RHO_Z: f64 = 2.0;
/// z-score for the bracketing test `h(s) > 1 + z se`.
const BRACKET_Z: f64 = 4.0;
/// Absolute tolerance of the d=1 quadrature oracle.
pub const QUAD_TOL: f64 = 1e-10;
const QUAD_RANGE: f64 = 12.0;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {min} Monte Carlo samples, got {got}")]
    TooFewSamples { got: u64, min: u64 },
    #[error("dense spectral norms are capped at d <= {cap}, got d = {d}")]
    DimensionCap { d: usize, cap: usize },
}

/// Effective-stepsize query: `a = eta sigma^2`, batch size, dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryQuery {
    pub a: f64,
    pub b: usize,
    pub d: usize,
}

impl TheoryQuery {
    pub fn new(a: f64, b: usize, d: usize) -> Result<Self, TheoryError> {
        if !(a > 0.0) {
            return Err(TheoryError::InvalidParameter(format!("a must be > 0, got {a}")));
        }
        if b == 0 || d == 0 {
            return Err(TheoryError::InvalidParameter("b and d must be >= 1".into()));
        }
        Ok(Self { a, b, d })
    }

    pub fn from_spec(spec: &crate::data_gen::GaussianStreamSpec) -> Self {
        Self { a: spec.effective_stepsize(), b: spec.b, d: spec.d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateMethod {
    MonteCarlo,
    Quadrature1d,
}

/// A Monte Carlo (or quadrature) estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: EstimateMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// `h(alpha) = 1` bracketed and bisected to tolerance.
    Solved,
    /// `rho >= 0`: no stationary distribution.
    NoStationary,
    /// `h` stayed at or below 1 up to `s = 64`; effectively light-tailed.
    BracketExhausted,
}

/// Stepsize regimes: (I) finite variance, (II) heavy-tailed with infinite
/// variance, (III) no stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    I,
    II,
    III,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::I => write!(f, "I"),
            Regime::II => write!(f, "II"),
            Regime::III => write!(f, "III"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailIndexResult {
    /// The solved tail-index, absent unless `status == Solved`.
    pub alpha: Option<f64>,
    /// Final bracket `(lo, hi)` around the root.
    pub bracket: (f64, f64),
    pub status: SolveStatus,
    /// The Lyapunov exponent estimate behind the regime decision.
    pub rho: HEstimate,
    pub regime: Regime,
}

/// Frozen per-draw log growth factors `log ||M u||` for unit `u`.
#[derive(Debug, Clone)]
pub struct GrowthSample {
    log_factors: Vec<f64>,
}

const BLOCK: u64 = 4096;

fn chi_square_pair(q: &TheoryQuery, seed: u64, index: u64) -> (f64, f64) {
    let (mut rng_x, mut rng_y) = stream_rng_pair(seed, "chi2", index);
    let mut x = 0.0;
    for _ in 0..q.b {
        let z: f64 = rng_x.sample(StandardNormal);
        x += z * z;
    }
    let mut y = 0.0;
    for _ in 0..q.d - 1 {
        let z: f64 = rng_y.sample(StandardNormal);
        y += z * z;
    }
    (x, y)
}

fn log_expr(q: &TheoryQuery, x: f64, y: f64) -> f64 {
    let c = q.a / q.b as f64;
    let base = 1.0 - c * x;
    let expr = base * base + c * c * x * y;
    expr.max(f64::MIN_POSITIVE).ln()
}

impl GrowthSample {
    /// Chi-square representation sample for Gaussian inputs. Draw `i` is a
    /// pure function of `(seed, i)`; the chi-square variates are nested sums
    /// of squared normals, so samples at the same seed are coupled across
    /// `b` and `d` grids (common random numbers).
    pub fn gaussian(q: &TheoryQuery, n: u64, seed: u64) -> Self {
        let blocks = n.div_ceil(BLOCK);
        let log_factors: Vec<f64> = (0..blocks)
            .into_par_iter()
            .flat_map_iter(|blk| {
                let start = blk * BLOCK;
                let end = (start + BLOCK).min(n);
                let q = *q;
                (start..end).map(move |i| {
                    let (x, y) = chi_square_pair(&q, seed, i);
                    0.5 * log_expr(&q, x, y)
                })
            })
            .collect();
        Self { log_factors }
    }

    /// Direct-simulation sample of `log ||(I - (eta/b) H) e1||` for an
    /// arbitrary input law; for Gaussian inputs this equals the chi-square
    /// route in distribution.
    pub fn input_first_column(
        dist: &InputDistribution,
        eta: f64,
        b: usize,
        d: usize,
        n: u64,
        seed: u64,
    ) -> Self {
        let c = eta / b as f64;
        let blocks = n.div_ceil(BLOCK);
        let log_factors: Vec<f64> = (0..blocks)
            .into_par_iter()
            .flat_map_iter(|blk| {
                let start = blk * BLOCK;
                let end = (start + BLOCK).min(n);
                let dist = dist.clone();
                (start..end).map(move |i| {
                    let mut rng = stream_rng(seed, "hdirect", i);
                    // v = e1 - c * sum_i a_i a_i[0]
                    let mut v = vec![0.0; d];
                    v[0] = 1.0;
                    let mut a = vec![0.0; d];
                    for _ in 0..b {
                        for aj in a.iter_mut() {
                            *aj = dist.sample(&mut rng);
                        }
                        let a0 = a[0];
                        for (vj, &aj) in v.iter_mut().zip(&a) {
                            *vj -= c * a0 * aj;
                        }
                    }
                    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    norm.max(f64::MIN_POSITIVE).ln()
                })
            })
            .collect();
        Self { log_factors }
    }

    /// Operator-norm sample `log ||I - (eta/b) H||` (dense symmetric
    /// eigensolve per draw, hence the dimension cap).
    pub fn input_operator_norm(
        dist: &InputDistribution,
        eta: f64,
        b: usize,
        d: usize,
        n: u64,
        seed: u64,
    ) -> Result<Self, TheoryError> {
        const CAP: usize = 64;
        if d > CAP {
            return Err(TheoryError::DimensionCap { d, cap: CAP });
        }
        let c = eta / b as f64;
        let blocks = n.div_ceil(BLOCK);
        let log_factors: Vec<f64> = (0..blocks)
            .into_par_iter()
            .flat_map_iter(|blk| {
                let start = blk * BLOCK;
                let end = (start + BLOCK).min(n);
                let dist = dist.clone();
                (start..end).map(move |i| {
                    let mut rng = stream_rng(seed, "hopnorm", i);
                    let mut m = nalgebra::DMatrix::<f64>::identity(d, d);
                    let mut a = vec![0.0; d];
                    for _ in 0..b {
                        for aj in a.iter_mut() {
                            *aj = dist.sample(&mut rng);
                        }
                        for r in 0..d {
                            for col in 0..d {
                                m[(r, col)] -= c * a[r] * a[col];
                            }
                        }
                    }
                    let eig = m.symmetric_eigenvalues();
                    let opnorm = eig.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
                    opnorm.max(f64::MIN_POSITIVE).ln()
                })
            })
            .collect();
        Ok(Self { log_factors })
    }

    pub fn len(&self) -> usize {
        self.log_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_factors.is_empty()
    }

    /// `rho` estimate: the mean log factor.
    pub fn rho(&self) -> HEstimate {
        let (value, std_error) = mean_and_se(&self.log_factors);
        HEstimate {
            value,
            std_error,
            n_samples: self.len() as u64,
            method: EstimateMethod::MonteCarlo,
        }
    }

    /// Shifted-exponential accumulation of `mean exp(s lf)` in log domain.
    /// Returns `(shift m, mean of exp(w - m), sd of exp(w - m))`.
    fn shifted_moments(&self, s: f64) -> (f64, f64, f64) {
        let m = self
            .log_factors
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &lf| acc.max(s * lf));
        let n = self.len() as f64;
        let sum = sum_compensated(self.log_factors.iter().map(|&lf| (s * lf - m).exp()));
        let mean = sum / n;
        let ss = sum_compensated(
            self.log_factors
                .iter()
                .map(|&lf| {
                    let w = (s * lf - m).exp() - mean;
                    w * w
                }),
        );
        let sd = (ss / (n - 1.0)).sqrt();
        (m, mean, sd)
    }

    /// `h(s)` on this sample. The value can overflow to `inf` for extreme
    /// `s`; use [`GrowthSample::log_h`] when only the position relative to 1
    /// matters.
    pub fn h(&self, s: f64) -> HEstimate {
        if s == 0.0 {
            return HEstimate {
                value: 1.0,
                std_error: 0.0,
                n_samples: self.len() as u64,
                method: EstimateMethod::MonteCarlo,
            };
        }
        let (m, mean, sd) = self.shifted_moments(s);
        let n = self.len() as f64;
        HEstimate {
            value: (m + mean.ln()).exp(),
            std_error: (m + (sd / n.sqrt()).ln()).exp(),
            n_samples: self.len() as u64,
            method: EstimateMethod::MonteCarlo,
        }
    }

    /// `log h(s)`, overflow-free.
    pub fn log_h(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let (m, mean, _) = self.shifted_moments(s);
        m + mean.ln()
    }

    /// Whether `h(s) - z se > 1` on this sample.
    fn h_exceeds_one(&self, s: f64, z: f64) -> bool {
        let (m, mean, sd) = self.shifted_moments(s);
        let n = self.len() as f64;
        let guarded = mean - z * sd / n.sqrt();
        guarded > 0.0 && m + guarded.ln() > 0.0
    }

    /// Standard error of the solved tail-index via the delta method:
    /// `se(h(alpha)) / h'(alpha)` evaluated on this sample.
    pub fn alpha_std_error(&self, alpha: f64) -> f64 {
        let (m, mean, sd) = self.shifted_moments(alpha);
        let n = self.len() as f64;
        // h'(alpha) = mean( lf exp(alpha lf) ), same shift
        let slope_shifted = sum_compensated(
            self.log_factors
                .iter()
                .map(|&lf| lf * (alpha * lf - m).exp()),
        ) / n;
        let _ = mean;
        (sd / n.sqrt()) / slope_shifted.abs()
    }

    /// Finds the positive root of the empirical `h(s) = 1` curve. The curve
    /// is exactly convex in `s` with `h(0) = 1`, so when its slope at zero
    /// is negative the second root is unique and bisection is exact.
    pub fn solve_alpha(&self, tol: f64) -> (Option<f64>, (f64, f64), SolveStatus) {
        if self.rho().value >= 0.0 {
            return (None, (0.0, 0.0), SolveStatus::NoStationary);
        }
        let mut lo = 0.0;
        let mut s = tol;
        let mut hi = None;
        while s <= S_CAP {
            if self.h_exceeds_one(s, BRACKET_Z) {
                hi = Some(s);
                break;
            }
            if self.log_h(s) <= 0.0 {
                lo = s;
            }
            s *= 2.0;
        }
        let Some(mut hi) = hi else {
            return (None, (lo, S_CAP), SolveStatus::BracketExhausted);
        };
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.log_h(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (Some(0.5 * (lo + hi)), (lo, hi), SolveStatus::Solved)
    }
}

fn validate_mc(s: f64, n: u64) -> Result<(), TheoryError> {
    if !(s >= 0.0) {
        return Err(TheoryError::InvalidParameter(format!("s must be >= 0, got {s}")));
    }
    if n < MIN_SAMPLES {
        return Err(TheoryError::TooFewSamples { got: n, min: MIN_SAMPLES });
    }
    Ok(())
}

/// Monte Carlo estimate of `h(s)` via the chi-square representation.
pub fn estimate_h(q: &TheoryQuery, s: f64, n: u64, seed: u64) -> Result<HEstimate, TheoryError> {
    validate_mc(s, n)?;
    if s == 0.0 {
        return Ok(HEstimate {
            value: 1.0,
            std_error: 0.0,
            n_samples: n,
            method: EstimateMethod::MonteCarlo,
        });
    }
    Ok(GrowthSample::gaussian(q, n, seed).h(s))
}

/// Monte Carlo estimate of the Lyapunov exponent `rho`.
pub fn estimate_rho(q: &TheoryQuery, n: u64, seed: u64) -> Result<HEstimate, TheoryError> {
    validate_mc(0.0, n)?;
    if n <= SOLVE_SAMPLE_CAP {
        return Ok(GrowthSample::gaussian(q, n, seed).rho());
    }
    Ok(rho_streaming(q, n, seed))
}

/// Streaming `rho` estimate that never materializes the sample.
fn rho_streaming(q: &TheoryQuery, n: u64, seed: u64) -> HEstimate {
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<(f64, f64, u64)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let start = blk * BLOCK;
            let end = (start + BLOCK).min(n);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in start..end {
                let (x, y) = chi_square_pair(q, seed, i);
                let t = 0.5 * log_expr(q, x, y);
                sum += t;
                sumsq += t * t;
            }
            (sum, sumsq, end - start)
        })
        .collect();
    let total = n as f64;
    let sum = sum_compensated(partials.iter().map(|p| p.0));
    let sumsq = sum_compensated(partials.iter().map(|p| p.1));
    let mean = sum / total;
    let var = (sumsq - total * mean * mean).max(0.0) / (total - 1.0);
    HEstimate {
        value: mean,
        std_error: (var / total).sqrt(),
        n_samples: n,
        method: EstimateMethod::MonteCarlo,
    }
}

/// Closed form `h(2) = 1 - 2a + (a^2/b)(d + b + 1)`.
pub fn h2_closed_form(q: &TheoryQuery) -> f64 {
    h2_closed_form_at(q.a, q.b, q.d)
}

pub fn h2_closed_form_at(a: f64, b: usize, d: usize) -> f64 {
    1.0 - 2.0 * a + a * a / b as f64 * (d + b + 1) as f64
}

/// The stepsize at which the stationary tail-index equals exactly 2:
/// `eta_crit = 2b / (sigma^2 (d + b + 1))`.
pub fn critical_stepsize(b: usize, d: usize, sigma2: f64) -> f64 {
    2.0 * b as f64 / (sigma2 * (d + b + 1) as f64)
}

/// Quadrature oracle for the scalar case (`d = 1`, `b = 1`):
/// `h(s) = E |1 - a Z^2|^s` with `Z` standard normal.
pub fn h_quad1d(a: f64, s: f64) -> Result<HEstimate, TheoryError> {
    if !(a > 0.0) || !(s >= 0.0) {
        return Err(TheoryError::InvalidParameter(format!("need a > 0, s >= 0; got a={a}, s={s}")));
    }
    let f = move |z: f64| (1.0 - a * z * z).abs().powf(s) * normal_pdf(z);
    let knot = (1.0 / a).sqrt();
    let value = 2.0 * integrate_with_knots(&f, 0.0, QUAD_RANGE, &[knot], 0.5 * QUAD_TOL);
    Ok(HEstimate { value, std_error: QUAD_TOL, n_samples: 0, method: EstimateMethod::Quadrature1d })
}

/// Quadrature oracle for the scalar case: `rho = E log |1 - a Z^2|`.
pub fn rho_quad1d(a: f64) -> Result<HEstimate, TheoryError> {
    if !(a > 0.0) {
        return Err(TheoryError::InvalidParameter(format!("need a > 0, got {a}")));
    }
    let f = move |z: f64| {
        let v = (1.0 - a * z * z).abs();
        if v == 0.0 {
            0.0
        } else {
            v.ln() * normal_pdf(z)
        }
    };
    let knot = (1.0 / a).sqrt();
    let value = 2.0 * integrate_with_knots(&f, 0.0, QUAD_RANGE, &[knot], 0.5 * QUAD_TOL);
    Ok(HEstimate { value, std_error: QUAD_TOL, n_samples: 0, method: EstimateMethod::Quadrature1d })
}

/// Quadrature root of `h(alpha) = 1` for the scalar case, used as an
/// MC-free cross-check of the solver.
pub fn alpha_quad1d(a: f64, tol: f64) -> Result<Option<f64>, TheoryError> {
    if rho_quad1d(a)?.value >= 0.0 {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut s = tol;
    let mut hi = None;
    while s <= S_CAP {
        if h_quad1d(a, s)?.value > 1.0 {
            hi = Some(s);
            break;
        }
        lo = s;
        s *= 2.0;
    }
    let Some(mut hi) = hi else { return Ok(None) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if h_quad1d(a, mid)?.value > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Solves for the stationary tail-index at query `q`.
///
/// The sign of `rho` is decided at the 2-standard-error level, escalating
/// the sample size tenfold (up to 1e8 streamed draws) while the sign is
/// ambiguous. Root finding runs on one frozen sample, so all `h(s)`
/// evaluations share random numbers and bisection is exact on the empirical
/// curve.
pub fn solve_tail_index(
    q: &TheoryQuery,
    tol: f64,
    n: u64,
    seed: u64,
) -> Result<TailIndexResult, TheoryError> {
    if !(tol > 0.0) {
        return Err(TheoryError::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    validate_mc(0.0, n)?;

    let mut n_cur = n;
    let mut sample = GrowthSample::gaussian(q, n_cur.min(SOLVE_SAMPLE_CAP), seed);
    let mut rho = if n_cur <= SOLVE_SAMPLE_CAP { sample.rho() } else { rho_streaming(q, n_cur, seed) };
    while rho.value.abs() < RHO_Z * rho.std_error && n_cur < RHO_ESCALATION_CAP {
        n_cur = (n_cur * 10).min(RHO_ESCALATION_CAP);
        if n_cur <= SOLVE_SAMPLE_CAP {
            sample = GrowthSample::gaussian(q, n_cur, seed);
            rho = sample.rho();
        } else {
            rho = rho_streaming(q, n_cur, seed);
        }
    }

    if rho.value >= 0.0 {
        return Ok(TailIndexResult {
            alpha: None,
            bracket: (0.0, 0.0),
            status: SolveStatus::NoStationary,
            rho,
            regime: Regime::III,
        });
    }

    // The materialized sample can disagree with an escalated streamed
    // decision right at the boundary; grow it until its own slope at zero
    // is negative (cap at SOLVE_SAMPLE_CAP, then report no stationary law).
    while sample.rho().value >= 0.0 {
        let next = (sample.len() as u64 * 10).min(SOLVE_SAMPLE_CAP);
        if next == sample.len() as u64 {
            return Ok(TailIndexResult {
                alpha: None,
                bracket: (0.0, 0.0),
                status: SolveStatus::NoStationary,
                rho,
                regime: Regime::III,
            });
        }
        sample = GrowthSample::gaussian(q, next, seed);
    }

    let (alpha, bracket, status) = sample.solve_alpha(tol);
    let regime = match (status, alpha) {
        (SolveStatus::Solved, Some(a)) if a < 2.0 => Regime::II,
        _ => Regime::I,
    };
    Ok(TailIndexResult { alpha, bracket, status, rho, regime })
}

/// Monte Carlo estimate of the operator-norm bound
/// `h_hat(s) = E ||I - (eta/b) H||^s` for an arbitrary input law.
///
/// This dominates `h(s)` for any input satisfying the moment assumptions;
/// the root of `h_hat = 1` is a lower bound on the tail-index. Note the
/// bound carries information only when `b >= d`: for `b < d` the Gram matrix
/// is rank-deficient, `||I - (eta/b) H|| >= 1` almost surely and the root
/// degenerates.
pub fn estimate_h_hat(
    dist: &InputDistribution,
    eta: f64,
    b: usize,
    d: usize,
    s: f64,
    n: u64,
    seed: u64,
) -> Result<HEstimate, TheoryError> {
    validate_mc(s, n)?;
    dist.validate().map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
    if s == 0.0 {
        return Ok(HEstimate { value: 1.0, std_error: 0.0, n_samples: n, method: EstimateMethod::MonteCarlo });
    }
    Ok(GrowthSample::input_operator_norm(dist, eta, b, d, n, seed)?.h(s))
}

/// Monte Carlo estimate of `rho_hat = E log ||I - (eta/b) H||`.
pub fn estimate_rho_hat(
    dist: &InputDistribution,
    eta: f64,
    b: usize,
    d: usize,
    n: u64,
    seed: u64,
) -> Result<HEstimate, TheoryError> {
    validate_mc(0.0, n)?;
    dist.validate().map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
    Ok(GrowthSample::input_operator_norm(dist, eta, b, d, n, seed)?.rho())
}

/// Direct-simulation estimate of `E ||(I - (eta/b) H) e1||^s`. For Gaussian
/// inputs this is a second, independent route to `h(s)`.
pub fn estimate_h_direct(
    dist: &InputDistribution,
    eta: f64,
    b: usize,
    d: usize,
    s: f64,
    n: u64,
    seed: u64,
) -> Result<HEstimate, TheoryError> {
    validate_mc(s, n)?;
    dist.validate().map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
    if s == 0.0 {
        return Ok(HEstimate { value: 1.0, std_error: 0.0, n_samples: n, method: EstimateMethod::MonteCarlo });
    }
    Ok(GrowthSample::input_first_column(dist, eta, b, d, n, seed).h(s))
}

/// Classifies the stepsize regime at `(eta, b, d, sigma2)`.
pub fn classify_regime(
    eta: f64,
    b: usize,
    d: usize,
    sigma2: f64,
    n: u64,
    seed: u64,
) -> Result<Regime, TheoryError> {
    if !(eta > 0.0 && sigma2 > 0.0) {
        return Err(TheoryError::InvalidParameter(format!(
            "eta and sigma2 must be > 0, got eta={eta}, sigma2={sigma2}"
        )));
    }
    let q = TheoryQuery::new(eta * sigma2, b, d)?;
    Ok(solve_tail_index(&q, 1e-3, n, seed)?.regime)
}
