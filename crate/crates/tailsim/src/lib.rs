//! Simulation and theory engine for the stationary tails of constant-stepsize
//! SGD on streaming linear regression with isotropic Gaussian inputs.
//!
//! The iterates follow the affine random recursion
//! `x_k = (I - (eta/b) H_k) x_{k-1} + q_k` where `H_k` is the minibatch Gram
//! matrix and `q_k` the minibatch cross term. Depending on the stepsize `eta`,
//! batch size `b`, dimension `d` and input scale `sigma`, the stationary law
//! is light-tailed, heavy-tailed with a power-law index `alpha`, or does not
//! exist at all. This crate provides:
//!
//! * [`data_gen`] — reproducible generators for the synthetic regression
//!   stream, finite datasets and ground-truth symmetric alpha-stable samples;
//! * [`sgd_engine`] — single chains, coupled chain pairs and replica
//!   ensembles with burn-in and centered ergodic averages;
//! * [`tail_theory`] — the moment-growth function `h(s)`, the top Lyapunov
//!   exponent `rho`, the tail-index solver and the stepsize regime
//!   classifier;
//! * [`stable_estim`] — the block-sum log-moment tail-index estimator for
//!   stable samples;
//! * [`convergence`] — moment bound curves, the Wasserstein contraction rate
//!   and scaling diagnostics for ergodic sums;
//! * [`config`] — the sectioned key-value run configuration format used by
//!   the CLI;
//! * [`verify`] — the end-to-end verification suite run by `tailsim verify`
//!   and by the acceptance tests.
//!
//! All randomness is counter-based: every sample is a pure function of a
//! `(seed, stream tag, index)` triple, so ensembles are bit-reproducible
//! regardless of thread count.

pub mod config;
pub mod convergence;
pub mod data_gen;
pub mod rng;
pub mod sgd_engine;
pub mod stable_estim;
pub mod stats;
pub mod tail_theory;
pub mod verify;

mod quadrature;

pub use data_gen::{GaussianStreamSpec, InputDistribution, Minibatch};
pub use sgd_engine::{ChainState, Mode, RunConfig, SampleMatrix};
pub use stable_estim::{AlphaEstimate, EstimatorConfig};
pub use tail_theory::{HEstimate, Regime, SolveStatus, TailIndexResult, TheoryQuery};
