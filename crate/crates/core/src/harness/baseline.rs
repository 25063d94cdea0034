use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{ClassOracle, HypothesisClass, LabeledSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub mistakes: usize,
    /// The proven mistake bound for this learner and class.
    pub bound: usize,
}

/// Predicts with the SOA of the version space and restricts on every example.
/// Errors if the version space empties or the bound `ldim(H)` is exceeded.
pub fn run_soa_baseline(class: &HypothesisClass, stream: &LabeledSequence) -> Result<BaselineRun> {
    stream.check_domain(class.domain())?;
    let mut oracle = ClassOracle::new(class.domain());
    let mut id = oracle.intern(class)?;
    let bound = oracle.ldim(id).max(0) as usize;
    let mut mistakes = 0;
    for (t, e) in stream.iter().enumerate() {
        if oracle.size(id) == 0 {
            return Err(Error::NotRealizable { step: t });
        }
        if oracle.soa_at(id, e.point)? != e.label {
            mistakes += 1;
        }
        id = oracle.restrict(id, e.point.0, e.label);
    }
    if oracle.size(id) == 0 {
        return Err(Error::NotRealizable { step: stream.len() });
    }
    if mistakes > bound {
        return Err(Error::Assertion(format!("SOA made {mistakes} mistakes, above ldim {bound}")));
    }
    Ok(BaselineRun { mistakes, bound })
}

/// Majority vote over the version space (ties predict 0). Errors if the
/// version space empties or the bound `⌊log₂|H|⌋` is exceeded.
pub fn run_halving_baseline(class: &HypothesisClass, stream: &LabeledSequence) -> Result<BaselineRun> {
    stream.check_domain(class.domain())?;
    if class.is_empty() {
        return Err(Error::NotRealizable { step: 0 });
    }
    let bound = class.len().ilog2() as usize;
    let mut alive: Vec<u64> = class.iter().map(|h| h.bits()).collect();
    let mut mistakes = 0;
    for (t, e) in stream.iter().enumerate() {
        let bit = 1u64 << e.point.0;
        let ones = alive.iter().filter(|&&b| b & bit != 0).count();
        let prediction = 2 * ones > alive.len();
        if prediction != e.label {
            mistakes += 1;
        }
        alive.retain(|&b| (b & bit != 0) == e.label);
        if alive.is_empty() {
            return Err(Error::NotRealizable { step: t + 1 });
        }
    }
    if mistakes > bound {
        return Err(Error::Assertion(format!("halving made {mistakes} mistakes, above log2|H| = {bound}")));
    }
    Ok(BaselineRun { mistakes, bound })
}
