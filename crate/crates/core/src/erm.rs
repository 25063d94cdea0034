//! Private empirical risk minimization over a finite Littlestone class, and a
//! PAC wrapper that draws the sample itself.
//!
//! The learner splits the sample into `k` equal chunks, and at stage
//! `j = 1..=d+1` each chunk's teacher keeps the hypotheses whose chunk error is
//! at most `γ^j α`, then lists the essential hypotheses of that class at
//! `p_j = 2^j·n·d`. A private threshold test asks whether one hypothesis sits
//! on at least `k/2` lists; if so, sparse sampling releases it.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposer, DecompositionParams, EssentialMode, SearchBudget};
use crate::error::{Error, Result};
use crate::hypothesis::{
    ClassOracle, DomainPoint, Hypothesis, HypothesisClass, LabeledExample, LabeledSequence,
};
use crate::mechanisms::{
    sparse_sample, BudgetLedger, CandidateList, CountMode, PrivacyParams, SparseSampleOutcome,
    ThresholdNoise, ThresholdOutcome, ThresholdState,
};
use crate::rational::{pow, rate_at_most, ratio};

#[derive(Debug, Clone)]
pub struct ErmConfig {
    /// Target error. Internals run at half of it.
    pub alpha: BigRational,
    pub privacy: PrivacyParams,
    pub d: u32,
    /// Number of chunks (teachers).
    pub k: usize,
    /// Stage test threshold as a fraction of `k`.
    pub stage_fraction: f64,
    /// Per-stage error shrink; defaults to `1 − 1/(2d)`.
    pub gamma: Option<BigRational>,
    /// Relative slack of the good-split event; defaults to `1/(5d)`.
    pub egood_slack: Option<BigRational>,
    /// Replaces `n·d` in `p_j = 2^j·n·d`.
    pub p_base: Option<u64>,
    pub mode: EssentialMode,
    pub budget: SearchBudget,
    /// Constant inside the threshold block cost.
    pub threshold_constant: f64,
    /// `None` runs the threshold test without noise (diagnostics only).
    pub noise: ThresholdNoise,
}

impl ErmConfig {
    pub fn new(alpha: BigRational, privacy: PrivacyParams, d: u32, k: usize) -> Self {
        ErmConfig {
            alpha,
            privacy,
            d,
            k,
            stage_fraction: 0.5,
            gamma: None,
            egood_slack: None,
            p_base: None,
            mode: EssentialMode::Exact,
            budget: SearchBudget::default(),
            threshold_constant: 8.0,
            noise: ThresholdNoise::Laplace,
        }
    }

    /// Desk-scale defaults: `α = 1/5`, `ε = 2`, `δ = 0.01`, 300 chunks.
    pub fn desk(d: u32) -> Self {
        Self::new(
            ratio(1, 5),
            PrivacyParams::new(2.0, 0.01).expect("valid constants"),
            d,
            300,
        )
    }

    /// The error level the stages run at.
    pub fn internal_alpha(&self) -> BigRational {
        &self.alpha / BigRational::from_integer(2.into())
    }

    pub fn gamma(&self) -> BigRational {
        self.gamma
            .clone()
            .unwrap_or_else(|| BigRational::one() - ratio(1, 2 * self.d.max(1) as i64))
    }

    pub fn egood_slack(&self) -> BigRational {
        self.egood_slack
            .clone()
            .unwrap_or_else(|| ratio(1, 5 * self.d.max(1) as i64))
    }

    pub fn p_at(&self, n: usize, j: u32) -> u64 {
        let base = self
            .p_base
            .unwrap_or_else(|| (n as u64).saturating_mul(self.d.max(1) as u64));
        base.max(1).saturating_mul(1u64.checked_shl(j).unwrap_or(u64::MAX))
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > BigRational::zero() && self.alpha < BigRational::one()) {
            return Err(Error::Parameter("alpha must lie in (0, 1)".into()));
        }
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.privacy.delta <= 0.0 {
            return Err(Error::Parameter("sparse sampling needs delta > 0".into()));
        }
        let gamma = self.gamma();
        if !(gamma > BigRational::zero() && gamma <= BigRational::one()) {
            return Err(Error::Parameter("gamma must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// `k` equal chunks of a shuffled sample; the remainder is discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPartition {
    pub chunks: Vec<LabeledSequence>,
    /// Sample indices in chunk order; only the first `k·m` were retained.
    pub permutation: Vec<usize>,
}

impl ChunkPartition {
    pub fn random<R: Rng + ?Sized>(sample: &LabeledSequence, k: usize, rng: &mut R) -> Result<Self> {
        let mut perm: Vec<usize> = (0..sample.len()).collect();
        perm.shuffle(rng);
        Self::from_permutation(sample, perm, k)
    }

    pub fn from_permutation(sample: &LabeledSequence, permutation: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 || sample.len() < k {
            return Err(Error::SplitTooSmall {
                available: sample.len(),
                parts: k,
            });
        }
        let m = sample.len() / k;
        let chunks = permutation[..k * m]
            .chunks(m)
            .map(|idx| idx.iter().map(|&i| sample.as_slice()[i]).collect())
            .collect();
        Ok(ChunkPartition { chunks, permutation })
    }

    pub fn k(&self) -> usize {
        self.chunks.len()
    }

    pub fn chunk_size(&self) -> usize {
        self.chunks.first().map_or(0, |c| c.len())
    }
}

/// Stage threshold `γ^j α`.
pub fn stage_threshold(alpha: &BigRational, gamma: &BigRational, j: u32) -> BigRational {
    pow(gamma, j) * alpha
}

/// `H_i^j = {h ∈ H : err_{S_i}(h) ≤ γ^j α}` for every chunk, by exact comparison.
pub fn define_threshold_classes(
    class: &HypothesisClass,
    partition: &ChunkPartition,
    j: u32,
    alpha: &BigRational,
    gamma: &BigRational,
) -> Vec<HypothesisClass> {
    let bound = stage_threshold(alpha, gamma, j);
    partition
        .chunks
        .iter()
        .map(|chunk| class.filter(|h| rate_at_most(h.mistakes_on(chunk), chunk.len(), &bound)))
        .collect()
}

/// Whether every chunk error tracks the full-sample error: within relative
/// `slack` when `err_S(h) > α/3`, and at most `α/2` otherwise.
pub fn check_egood(
    class: &HypothesisClass,
    sample: &LabeledSequence,
    partition: &ChunkPartition,
    alpha: &BigRational,
    slack: &BigRational,
) -> bool {
    let n = BigInt::from(sample.len());
    let third = alpha / BigRational::from_integer(3.into());
    let half = alpha / BigRational::from_integer(2.into());
    class.iter().all(|h| {
        let err = BigRational::new(BigInt::from(h.mistakes_on(sample)), n.clone());
        partition.chunks.iter().all(|chunk| {
            let e = BigRational::new(BigInt::from(h.mistakes_on(chunk)), BigInt::from(chunk.len()));
            if err > third {
                let lo = (BigRational::one() - slack) * &err;
                let hi = (BigRational::one() + slack) * &err;
                e >= lo && e <= hi
            } else {
                e <= half
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub j: u32,
    pub p: u64,
    /// `γ^j α` as an exact fraction.
    pub threshold: String,
    pub class_sizes: Vec<usize>,
    /// Largest essential-set size across teachers.
    pub max_list: usize,
    /// Largest decomposition dimension across teachers.
    pub max_ddim: i32,
    pub max_frequency: usize,
    pub outcome: ThresholdOutcome,
}

/// Evidence that the output is the SOA of an irreducible subclass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub teacher: usize,
    pub stage: u32,
    pub class: Vec<Hypothesis>,
    /// Leaf dimension `t` of the witness class.
    pub ldim: i32,
    /// The irreducibility parameter `p_j·2^{d−t}` the decomposition guarantees.
    pub irreducibility: u64,
    /// The teacher's chunk and its stage bound, to recheck membership.
    pub chunk: LabeledSequence,
    pub threshold: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmTranscript {
    pub n: usize,
    pub k: usize,
    pub chunk_size: usize,
    pub threshold_noise_epsilon: f64,
    pub sparse_epsilon: f64,
    pub bottom_score: f64,
    pub list_cap: u64,
    pub stages: Vec<StageRecord>,
    pub sample: Option<SparseSampleOutcome>,
    pub witness: Option<WitnessRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ErmOutput {
    Hypothesis(Hypothesis),
    /// Sparse sampling returned the failure symbol.
    Bottom,
    /// Every stage tested below threshold.
    Exhausted,
}

impl ErmOutput {
    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match self {
            ErmOutput::Hypothesis(h) => Some(h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErmRun {
    pub output: ErmOutput,
    pub transcript: ErmTranscript,
    pub ledger: BudgetLedger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    /// `G` is non-empty, inside `H`, and inside the teacher's stage class.
    pub subset: bool,
    /// `SOA_G` equals the output.
    pub soa: bool,
    /// `G` is `(d+1)`-irreducible.
    pub irreducible: bool,
    /// Restricting `G` by the output's labels on every sample point keeps it
    /// non-empty. Checked only when the recorded parameter covers them.
    pub replay: Option<bool>,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.subset && self.soa && self.irreducible && self.replay != Some(false)
    }
}

impl ErmTranscript {
    /// Re-derives the witness claims from scratch. `None` without a witness.
    pub fn verify_witness(
        &self,
        output: &Hypothesis,
        class: &HypothesisClass,
        sample: &LabeledSequence,
        d: u32,
    ) -> Result<Option<WitnessCheck>> {
        let Some(w) = &self.witness else {
            return Ok(None);
        };
        let g = HypothesisClass::new(class.domain(), w.class.iter().copied())?;
        let bound = crate::rational::parse_rational(&w.threshold)?;
        let subset = !g.is_empty()
            && g.is_subset_of(class)
            && g.iter()
                .all(|h| rate_at_most(h.mistakes_on(&w.chunk), w.chunk.len(), &bound));
        let mut oracle = ClassOracle::new(class.domain());
        let id = oracle.intern(&g)?;
        let soa = !g.is_empty() && oracle.soa(id)? == *output;
        let irreducible = oracle.is_irreducible(id, d as u64 + 1);
        let mut points: Vec<DomainPoint> = sample.iter().map(|e| e.point).collect();
        points.sort();
        points.dedup();
        let replay = (w.irreducibility >= points.len() as u64).then(|| {
            let labels: Vec<(usize, bool)> = points.iter().map(|x| (x.0, output.value(x.0))).collect();
            let end = oracle.restrict_labeled(id, &labels);
            oracle.size(end) > 0
        });
        Ok(Some(WitnessCheck {
            subset,
            soa,
            irreducible,
            replay,
        }))
    }
}

/// Runs the staged private learner on `sample`.
pub fn erm_learn<R: Rng + ?Sized>(
    class: &HypothesisClass,
    sample: &LabeledSequence,
    config: &ErmConfig,
    rng: &mut R,
) -> Result<ErmRun> {
    config.validate()?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.check_domain(class.domain())?;
    if class.is_empty() {
        return Err(Error::Parameter("hypothesis class is empty".into()));
    }
    let mut decomposer = Decomposer::with_budget(class.domain(), config.budget);
    let root = decomposer.oracle().intern(class)?;
    let l = decomposer.oracle().ldim(root);
    if l > config.d as i32 {
        return Err(Error::Parameter(format!(
            "class has Littlestone dimension {l} above d = {}",
            config.d
        )));
    }

    let n = sample.len();
    let partition = ChunkPartition::random(sample, config.k, rng)?;
    let k = partition.k();
    let alpha = config.internal_alpha();
    let gamma = config.gamma();
    let stages = config.d + 1;

    let eps = config.privacy.epsilon;
    let delta = config.privacy.delta;
    let mut ledger = BudgetLedger::new(config.privacy);
    ledger.threshold_constant = config.threshold_constant;
    let max_count = stages as u64;
    let noise_epsilon = ledger.threshold_noise_for(eps / 2.0, max_count, delta / 2.0);
    ledger.record_threshold_block("erm/stage-test", noise_epsilon, max_count, delta / 2.0);
    let (sparse_epsilon, sparse_delta) = (eps / 4.0, delta / 2.0);
    let leaf_bound = DecompositionParams::new(config.p_at(n, stages), config.d)?.leaf_count_bound();
    let list_cap = leaf_bound.min(class.len() as u64).max(1);
    let bottom_score = 10.0 * (list_cap as f64 / sparse_delta).ln() / sparse_epsilon;

    let mut test = ThresholdState::new(config.stage_fraction * k as f64, noise_epsilon, max_count, CountMode::Below);
    test.noise = config.noise;

    let mut transcript = ErmTranscript {
        n,
        k,
        chunk_size: partition.chunk_size(),
        threshold_noise_epsilon: noise_epsilon,
        sparse_epsilon,
        bottom_score,
        list_cap,
        stages: Vec::new(),
        sample: None,
        witness: None,
    };

    for j in 1..=stages {
        let p = config.p_at(n, j);
        let params = DecompositionParams::new(p, config.d)?;
        let classes = define_threshold_classes(class, &partition, j, &alpha, &gamma);
        let mut sets = Vec::with_capacity(k);
        for c in &classes {
            let set = decomposer.essential(c, params, config.mode).map_err(|e| match e {
                Error::BudgetExceeded { what, .. } => Error::InstanceTooLarge(what),
                other => other,
            })?;
            sets.push(set);
        }
        let mut freq: BTreeMap<Hypothesis, usize> = BTreeMap::new();
        for set in &sets {
            for h in &set.hypotheses {
                *freq.entry(*h).or_default() += 1;
            }
        }
        let max_frequency = freq.values().copied().max().unwrap_or(0);
        let outcome = test.test(max_frequency as f64, rng);
        let threshold = stage_threshold(&alpha, &gamma, j);
        transcript.stages.push(StageRecord {
            j,
            p,
            threshold: threshold.to_string(),
            class_sizes: classes.iter().map(|c| c.len()).collect(),
            max_list: sets.iter().map(|s| s.len()).max().unwrap_or(0),
            max_ddim: sets.iter().map(|s| s.t).max().unwrap_or(-1),
            max_frequency,
            outcome,
        });
        match outcome {
            ThresholdOutcome::Below => continue,
            ThresholdOutcome::Halted => break,
            ThresholdOutcome::Above => {}
        }
        let lists: Vec<CandidateList> = sets
            .iter()
            .map(|s| CandidateList::new(s.hypotheses.iter().copied(), list_cap as usize))
            .collect();
        ledger.record_sparse("erm/select", sparse_epsilon, sparse_delta, list_cap, bottom_score, 1);
        let drawn = sparse_sample(&lists, sparse_epsilon, bottom_score, rng)?;
        transcript.sample = Some(drawn.clone());
        let Some(h) = drawn.choice else {
            return Ok(ErmRun {
                output: ErmOutput::Bottom,
                transcript,
                ledger,
            });
        };
        let teacher = lists
            .iter()
            .position(|l| l.items().binary_search(&h).is_ok())
            .expect("sampled hypotheses come from some list");
        let set = &sets[teacher];
        transcript.witness = Some(WitnessRecord {
            teacher,
            stage: j,
            class: set.witness(&h).expect("listed").members().to_vec(),
            ldim: set.t,
            irreducibility: params.irreducibility_budget(set.t),
            chunk: partition.chunks[teacher].clone(),
            threshold: threshold.to_string(),
        });
        return Ok(ErmRun {
            output: ErmOutput::Hypothesis(h),
            transcript,
            ledger,
        });
    }
    Ok(ErmRun {
        output: ErmOutput::Exhausted,
        transcript,
        ledger,
    })
}

/// A distribution over the domain with a deterministic labeling.
#[derive(Debug, Clone)]
pub struct LabeledDistribution {
    pub weights: Vec<f64>,
    pub target: Hypothesis,
}

impl LabeledDistribution {
    pub fn uniform(target: Hypothesis) -> Self {
        LabeledDistribution {
            weights: vec![1.0; target.len()],
            target,
        }
    }

    pub fn point_mass(target: Hypothesis, x: DomainPoint) -> Self {
        let mut weights = vec![0.0; target.len()];
        weights[x.0] = 1.0;
        LabeledDistribution { weights, target }
    }

    fn index(&self) -> Result<WeightedIndex<f64>> {
        if self.weights.len() != self.target.len() {
            return Err(Error::LengthMismatch {
                expected: self.target.len(),
                found: self.weights.len(),
            });
        }
        WeightedIndex::new(&self.weights).map_err(|e| Error::Parameter(e.to_string()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledSequence> {
        let index = self.index()?;
        Ok((0..n)
            .map(|_| {
                let x = index.sample(rng);
                LabeledExample::new(x, self.target.value(x))
            })
            .collect())
    }

    /// Exact error of `h` under this distribution.
    pub fn error(&self, h: &Hypothesis) -> f64 {
        let total: f64 = self.weights.iter().sum();
        (0..self.weights.len())
            .filter(|&x| h.value(x) != self.target.value(x))
            .map(|x| self.weights[x])
            .sum::<f64>()
            / total
    }

    /// Monte-Carlo error estimate from `draws` fresh samples.
    pub fn estimate_error<R: Rng + ?Sized>(&self, h: &Hypothesis, draws: usize, rng: &mut R) -> Result<f64> {
        let fresh = self.sample(draws, rng)?;
        Ok(h.mistakes_on(&fresh) as f64 / draws.max(1) as f64)
    }
}

#[derive(Debug, Clone)]
pub struct PacConfig {
    pub erm: ErmConfig,
    /// `C` in `n = C·d⁵·ln(1/δ)/(ε α)`.
    pub sample_constant: f64,
    /// Fixed sample size, bypassing the formula.
    pub n: Option<usize>,
}

impl PacConfig {
    pub fn sample_size(&self) -> usize {
        if let Some(n) = self.n {
            return n;
        }
        let e = &self.erm;
        let d = e.d.max(1) as f64;
        let alpha = e.alpha.to_f64().unwrap_or(1.0);
        let n = self.sample_constant * d.powi(5) * (1.0 / e.privacy.delta).ln() / (e.privacy.epsilon * alpha);
        (n.ceil() as usize).max(e.k)
    }
}

/// Draws a sample of the configured size, then runs [`erm_learn`].
pub fn pac_learn<R: Rng + ?Sized>(
    class: &HypothesisClass,
    source: &LabeledDistribution,
    config: &PacConfig,
    rng: &mut R,
) -> Result<(ErmRun, LabeledSequence)> {
    let sample = source.sample(config.sample_size(), rng)?;
    let run = erm_learn(class, &sample, &config.erm, rng)?;
    Ok((run, sample))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::hypothesis::{empirical_error, Domain};

    fn thresholds(n: usize) -> HypothesisClass {
        HypothesisClass::thresholds(Domain::new(n).unwrap())
    }

    fn seq(pairs: &[(usize, bool)]) -> LabeledSequence {
        pairs.iter().map(|&(x, y)| LabeledExample::new(x, y)).collect()
    }

    #[test]
    fn partition_is_equal_and_discards_remainder() {
        let s: LabeledSequence = (0..23).map(|i| LabeledExample::new(i % 4, false)).collect();
        let p = ChunkPartition::random(&s, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(p.k(), 5);
        assert!(p.chunks.iter().all(|c| c.len() == 4));
        let mut seen = p.permutation.clone();
        seen.sort();
        assert_eq!(seen, (0..23).collect::<Vec<_>>());
        assert!(matches!(
            ChunkPartition::random(&s, 24, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(Error::SplitTooSmall { .. })
        ));
    }

    #[test]
    fn threshold_classes_use_exact_bounds() {
        let h = thresholds(4);
        let s = seq(&[(0, false), (1, false), (2, true), (3, true)]);
        let p = ChunkPartition::from_permutation(&s, vec![0, 1, 2, 3], 1).unwrap();
        // γ α = 1/4 exactly: one mistake in four is allowed.
        let classes = define_threshold_classes(&h, &p, 1, &ratio(1, 2), &ratio(1, 2));
        let members: Vec<String> = classes[0].iter().map(|h| h.to_string()).collect();
        assert_eq!(members, ["0001", "0011", "0111"]);
        // A large stage index leaves only consistent hypotheses.
        let tight = define_threshold_classes(&h, &p, 10, &ratio(1, 2), &ratio(1, 2));
        assert_eq!(tight[0].len(), 1);
    }

    #[test]
    fn realizable_target_survives_every_stage() {
        let h = thresholds(8);
        let target = h.members()[3];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = LabeledDistribution::uniform(target).sample(200, &mut rng).unwrap();
        let p = ChunkPartition::random(&s, 10, &mut rng).unwrap();
        for j in 1..=6 {
            for c in define_threshold_classes(&h, &p, j, &ratio(1, 10), &ratio(5, 6)) {
                assert!(c.contains(&target));
            }
        }
    }

    #[test]
    fn egood_cases() {
        let h = thresholds(4);
        let s = seq(&[(0, false), (1, true), (2, true), (3, true), (0, false), (1, true)]);
        let one = ChunkPartition::from_permutation(&s, (0..6).collect(), 1).unwrap();
        assert!(check_egood(&h, &s, &one, &ratio(1, 5), &ratio(1, 10)));
        // Put both x1 examples in one chunk: the all-zero-beyond-x1 hypothesis errs only there.
        let skew = ChunkPartition::from_permutation(&s, vec![1, 5, 0, 2, 3, 4], 2).unwrap();
        assert!(!check_egood(&h, &s, &skew, &ratio(1, 5), &ratio(1, 10)));
    }

    #[test]
    fn singleton_class_returns_at_stage_one() {
        let dom = Domain::new(3).unwrap();
        let only = Hypothesis::threshold(dom, 1);
        let h = HypothesisClass::new(dom, [only]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = LabeledDistribution::uniform(only).sample(400, &mut rng).unwrap();
        let cfg = ErmConfig::desk(1);
        let run = erm_learn(&h, &s, &cfg, &mut rng).unwrap();
        assert_eq!(run.output, ErmOutput::Hypothesis(only));
        assert_eq!(run.transcript.stages.len(), 1);
        assert!(run.ledger.within_target());
    }

    #[test]
    fn desk_run_on_thresholds() {
        let h = thresholds(8);
        let d = crate::hypothesis::ldim(&h) as u32;
        let cfg = ErmConfig::desk(d);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let target = h.members()[5];
        let s = LabeledDistribution::uniform(target).sample(12_000, &mut rng).unwrap();
        let run = erm_learn(&h, &s, &cfg, &mut rng).unwrap();
        let out = *run.output.hypothesis().expect("desk run succeeds");
        let err = empirical_error(&out, &s).unwrap();
        assert!(*err.numer() as f64 / *err.denom() as f64 <= 0.4);
        let check = run.transcript.verify_witness(&out, &h, &s, d).unwrap().unwrap();
        assert!(check.holds(), "{check:?}");
        assert!(run.ledger.within_target());
        assert!(run.ledger.basic().epsilon <= 2.0 + 1e-9);
    }

    #[test]
    fn exhausted_when_nothing_is_common() {
        // Noise-free test with an unreachable stage fraction.
        let h = thresholds(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = LabeledDistribution::uniform(h.members()[2]).sample(100, &mut rng).unwrap();
        let mut cfg = ErmConfig::desk(2);
        cfg.k = 10;
        cfg.stage_fraction = 2.0;
        cfg.noise = ThresholdNoise::None;
        let run = erm_learn(&h, &s, &cfg, &mut rng).unwrap();
        assert_eq!(run.output, ErmOutput::Exhausted);
        assert_eq!(run.transcript.stages.len(), 3);
    }

    #[test]
    fn pac_point_mass() {
        let h = thresholds(6);
        let target = h.members()[2];
        let src = LabeledDistribution::point_mass(target, DomainPoint(4));
        let mut cfg = PacConfig {
            erm: ErmConfig::desk(2),
            sample_constant: 1.0,
            n: Some(3000),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (run, _) = pac_learn(&h, &src, &cfg, &mut rng).unwrap();
        let out = run.output.hypothesis().unwrap();
        assert_eq!(out.value(4), target.value(4));
        assert_eq!(src.error(out), 0.0);
        cfg.n = None;
        let expected = (32.0 * 100f64.ln() / (2.0 * 0.2)).ceil() as usize;
        assert_eq!(cfg.sample_size(), expected);
    }

    #[test]
    fn rejects_bad_configs() {
        let h = thresholds(4);
        let s = seq(&[(0, false)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cfg = ErmConfig::desk(2);
        cfg.k = 1;
        cfg.alpha = ratio(3, 2);
        assert!(erm_learn(&h, &s, &cfg, &mut rng).is_err());
        let mut cfg = ErmConfig::desk(1);
        cfg.k = 1;
        assert!(matches!(erm_learn(&h, &s, &cfg, &mut rng), Err(Error::Parameter(_))));
        let cfg = ErmConfig::desk(2);
        assert!(matches!(erm_learn(&h, &LabeledSequence::new(), &cfg, &mut rng), Err(Error::EmptySample)));
    }
}
