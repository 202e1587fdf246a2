//! Exact numerics for a central spin `S0` coupled to `N` independent
//! environment spins by `H = 1/2 sigma_z(S0) sum_i g_i sigma_z(i)`.
//!
//! - [`model`]: the closed system, product observables, trajectories.
//! - [`analytic`]: `O(N)` closed forms for expectation values, the bath
//!   overlap `r(t)` and the reduced state of `S0`.
//! - [`oracle`]: the full `2^(N+1)` state vector, used to check [`analytic`].
//! - [`ensemble`]: seeded random models and observables.
//! - [`analysis`]: decoherence verdicts, fluctuations, recurrences, sweeps,
//!   and the `hbar / V` timescale rule.
//! - [`cli`]: experiment configs and the command runner.

pub mod analysis;
pub mod analytic;
pub mod cli;
pub mod crosscheck;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod oracle;
pub mod product;

pub use error::{Error, Result};
pub use model::{Hermitian2, RelevantObservable, Site, SpinBathModel, Trajectory};
