//! Laplace noise, sparse exponential sampling, AboveThreshold, privacy
//! accounting and a Monte-Carlo privacy auditor.
//!
//! All logarithms in privacy formulas are natural.

mod audit;
mod ledger;
mod sparse;
mod threshold;

pub use audit::{audit_noiseless_argmax, audit_sparse_sampler, dp_audit, AuditReport};
pub use ledger::{ledger_compose, BudgetLedger, EntryKind, LedgerEntry};
pub use sparse::{
    check_sparse_privacy_precondition, sparse_distribution, sparse_sample, CandidateList,
    SparseSampleOutcome,
};
pub use threshold::{above_threshold, CountMode, ThresholdNoise, ThresholdOutcome, ThresholdState};

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Parameter(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(PrivacyParams { epsilon, delta })
    }

    /// Both coordinates at most those of `target`.
    pub fn within(&self, target: &PrivacyParams) -> bool {
        self.epsilon <= target.epsilon && self.delta <= target.delta
    }
}

/// One Laplace draw with scale `b`, by inverting the CDF at a single uniform.
///
/// # Panics
/// If `scale` is not a positive finite number.
pub fn laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    assert!(scale > 0.0 && scale.is_finite(), "Laplace scale must be positive");
    let u: f64 = rng.sample(Open01);
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}
