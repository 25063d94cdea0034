use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::Rng;
use serde::Serialize;

use super::{check_sparse_privacy_precondition, sparse_distribution, sparse_sample, CandidateList};
use crate::error::{Error, Result};
use crate::hypothesis::{Domain, Hypothesis};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub mechanism: String,
    pub trials: u64,
    pub epsilon_claim: f64,
    pub delta_claim: f64,
    /// Largest `p̂(S) − e^ε q̂(S) − δ − slack` over buckets and both directions.
    pub max_violation: f64,
    /// The bucket achieving `max_violation`.
    pub bucket: String,
}

impl AuditReport {
    pub fn violated(&self) -> bool {
        self.max_violation > 0.0
    }
}

fn sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

/// Runs `mechanism` `trials` times on each neighbor and checks
/// `p̂(S) ≤ e^ε q̂(S) + δ + slack` for every single-outcome bucket and for the
/// likelihood-ratio set `{o : p̂(o) > e^ε q̂(o)}`, in both directions. The
/// slack is three standard errors on each estimate.
pub fn dp_audit<D, O, R, F>(
    name: &str,
    mut mechanism: F,
    neighbors: (&D, &D),
    trials: u64,
    epsilon_claim: f64,
    delta_claim: f64,
    rng: &mut R,
) -> AuditReport
where
    O: Ord + Debug,
    R: Rng + ?Sized,
    F: FnMut(&D, &mut R) -> O,
{
    let mut counts: BTreeMap<O, [u64; 2]> = BTreeMap::new();
    for (side, data) in [neighbors.0, neighbors.1].into_iter().enumerate() {
        for _ in 0..trials {
            counts.entry(mechanism(data, rng)).or_insert([0, 0])[side] += 1;
        }
    }
    let n = trials as f64;
    let factor = epsilon_claim.exp();
    let mut worst = (f64::NEG_INFINITY, String::new());
    let mut check = |p: f64, q: f64, label: String| {
        let slack = 3.0 * sigma(p, n) + factor * 3.0 * sigma(q, n);
        let v = p - factor * q - delta_claim - slack;
        if v > worst.0 {
            worst = (v, label);
        }
    };
    for (a, b) in [(0, 1), (1, 0)] {
        let (mut p_set, mut q_set, mut members) = (0.0, 0.0, 0);
        for (outcome, c) in &counts {
            let (p, q) = (c[a] as f64 / n, c[b] as f64 / n);
            check(p, q, format!("{outcome:?} [{a}->{b}]"));
            if p > factor * q {
                p_set += p;
                q_set += q;
                members += 1;
            }
        }
        if members > 1 {
            check(p_set, q_set, format!("ratio set of {members} outcomes [{a}->{b}]"));
        }
    }
    AuditReport {
        mechanism: name.to_string(),
        trials,
        epsilon_claim,
        delta_claim,
        max_violation: worst.0,
        bucket: worst.1,
    }
}

fn small(bits: u64) -> Hypothesis {
    Hypothesis::from_bits(Domain::new(2).expect("two points"), bits)
}

/// Audits the sparse sampler at `(ε, δ)` meeting its precondition, with the
/// smallest admissible `B`, on 14 lists over three hypotheses against the
/// same lists with one removed. The claim checked is `(2ε, δ)`.
pub fn audit_sparse_sampler<R: Rng + ?Sized>(trials: u64, epsilon: f64, delta: f64, rng: &mut R) -> Result<AuditReport> {
    let cap = 2u64;
    if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter("audit needs epsilon > 0 and delta in (0, 1)".into()));
    }
    let b = 10.0 * (cap as f64 / delta).ln() / epsilon;
    debug_assert!(check_sparse_privacy_precondition(cap, epsilon, delta, b));
    let full: Vec<CandidateList> = (0..14)
        .map(|i| CandidateList::new([small(1), small(2 + (i % 2))], cap as usize))
        .collect();
    let fewer = full[1..].to_vec();
    let sampler = |l: &Vec<CandidateList>, r: &mut R| {
        sparse_sample(l, epsilon, b, r).map(|o| o.choice.map(|h| h.bits())).unwrap_or(None)
    };
    Ok(dp_audit("sparse_sample", sampler, (&full, &fewer), trials, 2.0 * epsilon, delta, rng))
}

/// Control: a noiseless argmax over the same scores, on neighbors that swap
/// one list and so flip the leader. Any sound audit must flag it.
pub fn audit_noiseless_argmax<R: Rng + ?Sized>(trials: u64, epsilon: f64, delta: f64, rng: &mut R) -> AuditReport {
    let a = vec![
        CandidateList::new([small(1)], 1),
        CandidateList::new([small(1)], 1),
        CandidateList::new([small(2)], 1),
    ];
    let mut b = a.clone();
    b[1] = CandidateList::new([small(2)], 1);
    let argmax = |l: &Vec<CandidateList>, _: &mut R| {
        let law = sparse_distribution(l, 1.0, f64::NEG_INFINITY).expect("non-empty support");
        law.iter().max_by(|x, y| x.1.total_cmp(&y.1)).and_then(|o| o.0.map(|h| h.bits()))
    };
    dp_audit("noiseless_argmax", argmax, (&a, &b), trials, epsilon, delta, rng)
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "mechanism: {}", self.mechanism)?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "epsilon_claim: {}", self.epsilon_claim)?;
        writeln!(f, "delta_claim: {}", self.delta_claim)?;
        writeln!(f, "max_ratio_violation: {}", self.max_violation)?;
        writeln!(f, "bucket: {}", self.bucket)?;
        write!(f, "violated: {}", self.violated())
    }
}
