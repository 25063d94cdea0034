use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// One teacher's candidate set, deduplicated and kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList {
    items: Vec<Hypothesis>,
    cap: usize,
    truncated: bool,
}

impl CandidateList {
    /// Keeps the first `cap` distinct items in canonical hypothesis order.
    pub fn new(items: impl IntoIterator<Item = Hypothesis>, cap: usize) -> Self {
        let mut items: Vec<Hypothesis> = items.into_iter().collect();
        items.sort();
        items.dedup();
        let truncated = items.len() > cap;
        items.truncate(cap);
        CandidateList {
            items,
            cap,
            truncated,
        }
    }

    pub fn empty(cap: usize) -> Self {
        Self::new([], cap)
    }

    pub fn items(&self) -> &[Hypothesis] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Whether items were dropped to meet the cap.
    pub fn was_truncated(&self) -> bool {
        self.truncated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSampleOutcome {
    /// `None` is the failure symbol.
    pub choice: Option<Hypothesis>,
    pub score: f64,
}

impl SparseSampleOutcome {
    pub fn is_bottom(&self) -> bool {
        self.choice.is_none()
    }
}

fn scores(lists: &[CandidateList]) -> BTreeMap<Hypothesis, u32> {
    let mut scores = BTreeMap::new();
    for list in lists {
        for h in list.items() {
            *scores.entry(*h).or_insert(0) += 1;
        }
    }
    scores
}

/// The exact output law: candidates in canonical order, then the failure symbol.
pub fn sparse_distribution(
    lists: &[CandidateList],
    epsilon: f64,
    bottom_score: f64,
) -> Result<Vec<(Option<Hypothesis>, f64, f64)>> {
    let mut support: Vec<(Option<Hypothesis>, f64)> = scores(lists)
        .into_iter()
        .map(|(h, s)| (Some(h), s as f64))
        .collect();
    if bottom_score > f64::NEG_INFINITY {
        support.push((None, bottom_score));
    }
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let top = support
        .iter()
        .map(|(_, s)| epsilon * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_norm = top
        + support
            .iter()
            .map(|(_, s)| (epsilon * s - top).exp())
            .sum::<f64>()
            .ln();
    Ok(support
        .into_iter()
        .map(|(c, s)| (c, s, (epsilon * s - log_norm).exp()))
        .collect())
}

/// Draws `v` with probability proportional to `exp(ε·score(v))`, where a
/// hypothesis scores the number of lists containing it and the failure
/// symbol scores `bottom_score`. Pass `f64::NEG_INFINITY` to drop the
/// failure symbol from the support.
pub fn sparse_sample<R: Rng + ?Sized>(
    lists: &[CandidateList],
    epsilon: f64,
    bottom_score: f64,
    rng: &mut R,
) -> Result<SparseSampleOutcome> {
    let law = sparse_distribution(lists, epsilon, bottom_score)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (choice, score, p) in &law {
        acc += p;
        if u < acc {
            return Ok(SparseSampleOutcome {
                choice: *choice,
                score: *score,
            });
        }
    }
    // Rounding left a sliver past the last cumulative weight.
    let (choice, score, _) = law.last().expect("non-empty support");
    Ok(SparseSampleOutcome {
        choice: *choice,
        score: *score,
    })
}

/// `B ≥ 10·ln(L/δ)/ε`, the condition under which the sampler is `(2ε, δ)`-private.
pub fn check_sparse_privacy_precondition(cap: u64, epsilon: f64, delta: f64, bottom_score: f64) -> bool {
    if !(epsilon > 0.0) || !(delta > 0.0) || cap == 0 {
        return false;
    }
    bottom_score >= 10.0 * (cap as f64 / delta).ln() / epsilon
}
