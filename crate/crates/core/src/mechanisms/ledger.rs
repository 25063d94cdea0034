use serde::{Deserialize, Serialize};

use super::{check_sparse_privacy_precondition, PrivacyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EntryKind {
    Generic,
    /// An AboveThreshold block of noise level `noise_epsilon` and `max_count` counted outcomes.
    ThresholdBlock { noise_epsilon: f64, max_count: u64 },
    /// A sparse sampler at noise level `epsilon`; `certified` records the `B` precondition.
    Sparse { certified: bool, cap: u64, bottom_score: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tag: String,
    pub kind: EntryKind,
    pub epsilon: f64,
    pub delta: f64,
    pub count: u64,
}

/// Privacy accounting. Totals are pure functions of the entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub entries: Vec<LedgerEntry>,
    pub target: PrivacyParams,
    /// Slack `δ'` for advanced composition.
    pub delta_prime: f64,
    /// Constant `c` in a threshold block's cost `ε(√(c·K·ln(2/δ)) + ln(2/δ))`.
    pub threshold_constant: f64,
}

impl BudgetLedger {
    pub fn new(target: PrivacyParams) -> Self {
        BudgetLedger {
            entries: Vec::new(),
            target,
            delta_prime: 1e-6,
            threshold_constant: 8.0,
        }
    }

    pub fn with_delta_prime(mut self, delta_prime: f64) -> Self {
        self.delta_prime = delta_prime;
        self
    }

    pub fn record(&mut self, tag: impl Into<String>, epsilon: f64, delta: f64, count: u64) {
        self.entries.push(LedgerEntry {
            tag: tag.into(),
            kind: EntryKind::Generic,
            epsilon,
            delta,
            count,
        });
    }

    /// Cost of an AboveThreshold block with `max_count` counted outcomes at
    /// failure probability `delta`.
    pub fn threshold_block_cost(&self, noise_epsilon: f64, max_count: u64, delta: f64) -> f64 {
        let log_term = (2.0 / delta).ln();
        noise_epsilon * ((self.threshold_constant * max_count as f64 * log_term).sqrt() + log_term)
    }

    /// Noise level that makes a block cost exactly `epsilon`.
    pub fn threshold_noise_for(&self, epsilon: f64, max_count: u64, delta: f64) -> f64 {
        epsilon / self.threshold_block_cost(1.0, max_count, delta)
    }

    /// Records a block and returns its `ε` cost.
    pub fn record_threshold_block(
        &mut self,
        tag: impl Into<String>,
        noise_epsilon: f64,
        max_count: u64,
        delta: f64,
    ) -> f64 {
        let epsilon = self.threshold_block_cost(noise_epsilon, max_count, delta);
        self.entries.push(LedgerEntry {
            tag: tag.into(),
            kind: EntryKind::ThresholdBlock {
                noise_epsilon,
                max_count,
            },
            epsilon,
            delta,
            count: 1,
        });
        epsilon
    }

    /// Records `count` sampler calls at noise level `epsilon`, each costing
    /// `(2ε, δ)`. Returns whether the `B` precondition held; if not, the
    /// ledger is no longer certified.
    pub fn record_sparse(
        &mut self,
        tag: impl Into<String>,
        epsilon: f64,
        delta: f64,
        cap: u64,
        bottom_score: f64,
        count: u64,
    ) -> bool {
        let certified = check_sparse_privacy_precondition(cap, epsilon, delta, bottom_score);
        self.entries.push(LedgerEntry {
            tag: tag.into(),
            kind: EntryKind::Sparse {
                certified,
                cap,
                bottom_score,
            },
            epsilon: 2.0 * epsilon,
            delta,
            count,
        });
        certified
    }

    /// Entries whose stated cost is not backed by its precondition.
    pub fn uncertified(&self) -> Vec<&LedgerEntry> {
        self.entries
            .iter()
            .filter(|e| matches!(e.kind, EntryKind::Sparse { certified: false, .. }))
            .collect()
    }

    pub fn is_certified(&self) -> bool {
        self.uncertified().is_empty()
    }

    /// Sum of epsilons and deltas.
    pub fn basic(&self) -> PrivacyParams {
        let (mut epsilon, mut delta) = (0.0, 0.0);
        for e in &self.entries {
            epsilon += e.epsilon * e.count as f64;
            delta += e.delta * e.count as f64;
        }
        PrivacyParams { epsilon, delta }
    }

    /// Advanced composition over all mechanism invocations:
    /// `√(2 ln(1/δ') Σ εᵢ²) + Σ εᵢ(e^{εᵢ} − 1)` and `Σ δᵢ + δ'`.
    pub fn advanced(&self) -> PrivacyParams {
        let (mut squares, mut drift, mut delta) = (0.0, 0.0, self.delta_prime);
        for e in &self.entries {
            let n = e.count as f64;
            squares += n * e.epsilon * e.epsilon;
            drift += n * e.epsilon * e.epsilon.exp_m1();
            delta += n * e.delta;
        }
        PrivacyParams {
            epsilon: (2.0 * (1.0 / self.delta_prime).ln() * squares).sqrt() + drift,
            delta,
        }
    }

    /// Certified, and either composition bound fits the target.
    pub fn within_target(&self) -> bool {
        self.is_certified() && (self.basic().within(&self.target) || self.advanced().within(&self.target))
    }
}

/// `(basic, advanced)` totals.
pub fn ledger_compose(ledger: &BudgetLedger) -> (PrivacyParams, PrivacyParams) {
    (ledger.basic(), ledger.advanced())
}
