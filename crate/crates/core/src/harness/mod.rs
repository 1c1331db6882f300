//! Experiment harness: configs, Monte Carlo error trials, bound
//! calculators, statistical lemma checks and the command-line front end.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod lemmas;
pub mod trials;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::codec::CodecError;
use crate::gf::FieldError;
use crate::linalg::LinalgError;
use crate::network::NetworkError;
use crate::qcheck::QcheckError;

pub use bounds::{binary_entropy, fidelity_bound, leakage_bound, leakage_bound_log2, rate_accounting, wilson_interval, RateReport};
pub use config::{ExperimentConfig, NetworkSource, ParamsSpec};
pub use trials::{run_error_trials, Basis, ExperimentOutcome, FailureClass, TrialRecord};

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.96;
/// Default multiplier on asymptotic bounds whose constants are hidden.
pub const DEFAULT_MARGIN: f64 = 10.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Precondition(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Qcheck(#[from] QcheckError),
}

impl HarnessError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

/// SplitMix64 output function, used to derive per-trial seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for stream `index` under `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root) ^ index)
}
