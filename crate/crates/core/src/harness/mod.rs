//! Experiment harness: class and stream generators, non-private baselines,
//! split-quality checks and the experiment runner.

mod baseline;
mod experiment;
mod split;

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Domain, DomainPoint, Hypothesis, HypothesisClass, LabeledExample, LabeledSequence};
use crate::rng::{derive_seed, stream};

pub use baseline::{run_halving_baseline, run_soa_baseline, BaselineRun};
pub use experiment::{
    run_experiment, Aggregate, ExperimentConfig, ExperimentResult, LearnerKind, ResultRecord, CSV_HEADER,
};
pub use split::{chernoff_without_replacement, max_pairwise_deviation, max_relative_deviation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassFamily {
    Thresholds,
    Intervals,
    /// `m` distinct uniform bit-vectors.
    Random { m: usize },
    FromFile { path: PathBuf },
}

/// Which member labels the stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetSelector {
    /// Uniform over the class.
    Random,
    /// Index into the sorted member list.
    Index { index: usize },
    /// The class's SOA hypothesis, when it is a member; otherwise the first member.
    Soa,
    Given { hypothesis: Hypothesis },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdversaryOrder {
    /// `x_t = t mod n`.
    Natural,
    /// Consecutive fresh permutations of the domain.
    RandomPerm,
    /// Independent uniform points.
    Uniform,
    /// Points read from a file (`point_index` or `point_index label` per
    /// line), relabeled by the target and truncated at the horizon.
    Crafted { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub family: ClassFamily,
    pub domain_size: usize,
    pub target: TargetSelector,
    pub order: AdversaryOrder,
    pub horizon: usize,
    pub seed: u64,
}

impl StreamSpec {
    pub fn new(family: ClassFamily, domain_size: usize, horizon: usize, seed: u64) -> Self {
        StreamSpec {
            family,
            domain_size,
            target: TargetSelector::Random,
            order: AdversaryOrder::Uniform,
            horizon,
            seed,
        }
    }
}

/// A class, the labeling member and a realizable stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub class: HypothesisClass,
    pub target: Hypothesis,
    pub stream: LabeledSequence,
}

pub fn intervals(domain: Domain) -> HypothesisClass {
    let n = domain.size();
    let members = (0..n).flat_map(|a| {
        (a..n).map(move |b| {
            let width = b - a + 1;
            let bits = if width == 64 { u64::MAX } else { ((1u64 << width) - 1) << a };
            Hypothesis::from_bits(domain, bits)
        })
    });
    HypothesisClass::new(domain, members).expect("intervals share the domain")
}

pub fn random_class(domain: Domain, m: usize, seed: u64) -> Result<HypothesisClass> {
    let n = domain.size();
    if n < 64 && m as u128 > 1u128 << n {
        return Err(Error::Infeasible(format!(
            "{m} distinct hypotheses over {n} points"
        )));
    }
    let mut rng = stream(seed);
    let mask = domain.full_mask();
    let mut seen = BTreeSet::new();
    // Sample the complement when asked for most of the cube.
    if n < 64 && (m as u128) * 2 > 1u128 << n {
        let total = 1u64 << n;
        let mut all: Vec<u64> = (0..total).collect();
        all.shuffle(&mut rng);
        all.truncate(m);
        seen.extend(all);
    } else {
        while seen.len() < m {
            seen.insert(rng.gen::<u64>() & mask);
        }
    }
    HypothesisClass::new(domain, seen.into_iter().map(|b| Hypothesis::from_bits(domain, b)))
}

/// Deterministic given `seed` (only `Random` uses it).
pub fn generate_class(family: &ClassFamily, domain_size: usize, seed: u64) -> Result<HypothesisClass> {
    match family {
        ClassFamily::Thresholds => Ok(HypothesisClass::thresholds(Domain::new(domain_size)?)),
        ClassFamily::Intervals => Ok(intervals(Domain::new(domain_size)?)),
        ClassFamily::Random { m } => random_class(Domain::new(domain_size)?, *m, seed),
        ClassFamily::FromFile { path } => HypothesisClass::parse(&std::fs::read_to_string(path)?),
    }
}

pub fn select_target<R: Rng + ?Sized>(
    class: &HypothesisClass,
    selector: &TargetSelector,
    rng: &mut R,
) -> Result<Hypothesis> {
    if class.is_empty() {
        return Err(Error::Parameter("cannot pick a target from an empty class".into()));
    }
    match selector {
        TargetSelector::Random => Ok(class.members()[rng.gen_range(0..class.len())]),
        TargetSelector::Index { index } => class
            .members()
            .get(*index)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("target index {index} out of range"))),
        TargetSelector::Soa => {
            let soa = crate::hypothesis::soa_hypothesis(class)?;
            Ok(if class.contains(&soa) { soa } else { class.members()[0] })
        }
        TargetSelector::Given { hypothesis } => {
            if class.contains(hypothesis) {
                Ok(*hypothesis)
            } else {
                Err(Error::Parameter(format!("target {hypothesis} is not in the class")))
            }
        }
    }
}

fn read_points(path: &PathBuf, domain: Domain) -> Result<Vec<DomainPoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split_whitespace().next().unwrap_or_default();
        let x: usize = first.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("expected a point index, found {first:?}"),
        })?;
        domain.check(DomainPoint(x))?;
        points.push(DomainPoint(x));
    }
    Ok(points)
}

/// Labels the adversary's points with `target`. The result is checked to
/// be consistent with `target` at every index.
pub fn generate_stream<R: Rng + ?Sized>(
    target: &Hypothesis,
    order: &AdversaryOrder,
    horizon: usize,
    rng: &mut R,
) -> Result<LabeledSequence> {
    let domain = target.domain();
    let n = domain.size();
    let points: Vec<usize> = match order {
        AdversaryOrder::Natural => (0..horizon).map(|t| t % n).collect(),
        AdversaryOrder::Uniform => (0..horizon).map(|_| rng.gen_range(0..n)).collect(),
        AdversaryOrder::RandomPerm => {
            let mut out = Vec::with_capacity(horizon + n);
            let mut perm: Vec<usize> = (0..n).collect();
            while out.len() < horizon {
                perm.shuffle(rng);
                out.extend_from_slice(&perm);
            }
            out.truncate(horizon);
            out
        }
        AdversaryOrder::Crafted { path } => read_points(path, domain)?
            .into_iter()
            .take(horizon)
            .map(|p| p.0)
            .collect(),
    };
    let seq: LabeledSequence = points
        .into_iter()
        .map(|x| LabeledExample::new(x, target.value(x)))
        .collect();
    if let Some(t) = seq.iter().position(|e| target.value(e.point.0) != e.label) {
        return Err(Error::Assertion(format!("stream disagrees with its target at step {}", t + 1)));
    }
    Ok(seq)
}

/// Class, target and stream from independent seed-derived streams.
pub fn generate_instance(spec: &StreamSpec) -> Result<Instance> {
    let class = generate_class(&spec.family, spec.domain_size, derive_seed(spec.seed, 0))?;
    let target = select_target(&class, &spec.target, &mut stream(derive_seed(spec.seed, 1)))?;
    let stream = generate_stream(&target, &spec.order, spec.horizon, &mut stream(derive_seed(spec.seed, 2)))?;
    Ok(Instance { class, target, stream })
}
