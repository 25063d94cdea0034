//! Private online learning with `k` teachers.
//!
//! The learner publishes a hypothesis, buffers its mistakes, and once a noisy
//! count of the buffer passes `U` it deals the buffer out to the teachers and
//! retrains. Each teacher keeps the hypotheses with small error on every batch
//! it has received; the teachers' essential hypotheses are pooled and a
//! majority of sparse samples becomes the next published hypothesis.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposer, DecompositionParams, EssentialMode, SearchBudget};
use crate::erm::ChunkPartition;
use crate::error::{Error, Result};
use crate::hypothesis::{DomainPoint, Hypothesis, HypothesisClass, LabeledExample, LabeledSequence};
use crate::mechanisms::{
    sparse_distribution, sparse_sample, BudgetLedger, CandidateList, CountMode, PrivacyParams,
    ThresholdNoise, ThresholdOutcome, ThresholdState,
};
use crate::rational::{pow, rate_at_most, ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OnlineMode {
    /// Sizes from the asymptotic formulas with named constants.
    Paper,
    /// Small explicit sizes for desk-scale runs.
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub horizon: usize,
    pub privacy: PrivacyParams,
    pub d: u32,
    pub mode: OnlineMode,
    /// Teachers.
    pub k: usize,
    /// Buffer size that triggers a retrain.
    pub u: f64,
    /// Retrains allowed before the learner halts.
    pub k_budget: u64,
    /// Sparse samples per retrain; odd.
    pub repetitions: usize,
    pub epsilon_sparse: f64,
    pub bottom_score: f64,
    /// Laplace scale of the buffer-size test.
    pub retrain_noise_scale: f64,
    /// Laplace scale of the stage test.
    pub stage_noise_scale: f64,
    /// Stage test passes at this fraction of `k`.
    pub stage_fraction: f64,
    /// Teacher classes keep errors up to `class_base·(1 − 1/d)^j`.
    pub class_base: (i64, i64),
    /// Replaces `d³` in the decomposition parameter `p = 2^j·d³`.
    pub p_scale: Option<u64>,
    pub essential_mode: EssentialMode,
    /// Run both threshold tests without noise (diagnostics, not private).
    pub noise_free_tests: bool,
    /// Per-call failure probability charged to each sparse sample.
    pub sparse_delta: f64,
}

fn odd_at_least(x: f64) -> usize {
    let r = (x.ceil() as usize).max(1);
    if r % 2 == 0 {
        r + 1
    } else {
        r
    }
}

impl OnlineConfig {
    /// Sizes from the formulas, with `C` for the budget and buffer size and
    /// `c` for the repetition count.
    pub fn paper_with(horizon: usize, privacy: PrivacyParams, d: u32, c_big: f64, c_rep: f64) -> Self {
        let df = d.max(1) as f64;
        let log_t = (horizon.max(2) as f64).ln();
        let log_delta = (1.0 / privacy.delta).ln();
        let eps = privacy.epsilon;
        let k = (df.powf(3.5) * log_t * log_delta / eps).ceil().max(1.0);
        let u = c_big * df.powi(3) * (df * log_t).ln().max(1.0) * k;
        let log_td = (horizon.max(2) as f64 / privacy.delta).ln();
        OnlineConfig {
            horizon,
            privacy,
            d,
            mode: OnlineMode::Paper,
            k: k as usize,
            u,
            k_budget: (c_big * df.powi(3)).ceil() as u64,
            repetitions: odd_at_least(c_rep * log_t),
            epsilon_sparse: eps / (df.powf(1.5) * log_t * log_delta),
            bottom_score: k / 10.0,
            retrain_noise_scale: log_td * df.powi(3) / eps,
            stage_noise_scale: log_td * df / eps,
            stage_fraction: 0.8,
            class_base: (1, 10),
            p_scale: None,
            essential_mode: EssentialMode::Exact,
            noise_free_tests: false,
            sparse_delta: privacy.delta * privacy.delta / df.powi(10),
        }
    }

    pub fn paper(horizon: usize, privacy: PrivacyParams, d: u32) -> Self {
        Self::paper_with(horizon, privacy, d, 4.0, 3.0)
    }

    /// Small teacher pool and buffer, tuned so desk runs converge within a
    /// few thousand steps. Privacy totals are still computed, not certified.
    pub fn desk(horizon: usize, privacy: PrivacyParams, d: u32) -> Self {
        let k = 10;
        OnlineConfig {
            mode: OnlineMode::Desk,
            k,
            u: 20.0,
            k_budget: 20,
            repetitions: 7,
            epsilon_sparse: 1.0,
            bottom_score: k as f64 / 10.0,
            retrain_noise_scale: 1.0,
            stage_noise_scale: 0.5,
            ..Self::paper(horizon, privacy, d)
        }
    }

    /// `(K_budget + 1)·⌈3U/2⌉`.
    pub fn mistake_budget(&self) -> u64 {
        (self.k_budget + 1) * (1.5 * self.u).ceil() as u64
    }

    pub fn p_at(&self, j: u32) -> u64 {
        let d = self.d.max(1) as u64;
        let scale = self.p_scale.unwrap_or(d * d * d).max(1);
        scale.saturating_mul(1u64.checked_shl(j).unwrap_or(u64::MAX))
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.repetitions == 0 || self.repetitions % 2 == 0 {
            return Err(Error::Parameter("repetitions must be odd".into()));
        }
        if !(self.u > 0.0 && self.epsilon_sparse > 0.0) {
            return Err(Error::Parameter("U and the sparse epsilon must be positive".into()));
        }
        if !(self.retrain_noise_scale > 0.0 && self.stage_noise_scale > 0.0) {
            return Err(Error::Parameter("noise scales must be positive".into()));
        }
        if self.class_base.0 <= 0 || self.class_base.1 <= 0 {
            return Err(Error::Parameter("class base must be positive".into()));
        }
        Ok(())
    }
}

/// The sub-datasets each teacher has received, one per successful split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherCollection {
    sets: Vec<Vec<LabeledSequence>>,
}

impl TeacherCollection {
    pub fn new(k: usize) -> Self {
        TeacherCollection {
            sets: vec![Vec::new(); k],
        }
    }

    pub fn k(&self) -> usize {
        self.sets.len()
    }

    pub fn rounds(&self) -> usize {
        self.sets.first().map_or(0, |s| s.len())
    }

    pub fn teacher(&self, i: usize) -> &[LabeledSequence] {
        &self.sets[i]
    }

    pub fn push_round(&mut self, blocks: Vec<LabeledSequence>) -> Result<()> {
        if blocks.len() != self.sets.len() {
            return Err(Error::LengthMismatch {
                expected: self.sets.len(),
                found: blocks.len(),
            });
        }
        for (set, block) in self.sets.iter_mut().zip(blocks) {
            set.push(block);
        }
        Ok(())
    }
}

/// `(1 − 1/d)^j · base`.
pub fn class_threshold(base: &BigRational, d: u32, j: u32) -> BigRational {
    let d = d.max(1) as i64;
    pow(&(BigRational::one() - ratio(1, d)), j) * base
}

/// Hypotheses whose error on every sub-dataset is at most the stage bound.
/// Empty sub-datasets are skipped.
pub fn define_class(
    class: &HypothesisClass,
    collection: &[LabeledSequence],
    j: u32,
    d: u32,
    base: &BigRational,
) -> HypothesisClass {
    let bound = class_threshold(base, d, j);
    class.filter(|h| {
        collection
            .iter()
            .filter(|t| !t.is_empty())
            .all(|t| rate_at_most(h.mistakes_on(t), t.len(), &bound))
    })
}

/// Uniformly permutes `buffer` and cuts it into `k` blocks of `⌊|E|/k⌋`.
pub fn split_counterexamples<R: Rng + ?Sized>(
    buffer: &LabeledSequence,
    k: usize,
    rng: &mut R,
) -> Result<Vec<LabeledSequence>> {
    Ok(ChunkPartition::random(buffer, k, rng)?.chunks)
}

/// Probability that the sparse sampler returns the failure symbol, in closed form.
pub fn estimate_bot_probability(lists: &[CandidateList], epsilon: f64, bottom_score: f64) -> f64 {
    match sparse_distribution(lists, epsilon, bottom_score) {
        Ok(law) => law.last().filter(|(c, _, _)| c.is_none()).map_or(0.0, |l| l.2),
        Err(_) => 1.0,
    }
}

/// Pointwise majority; ties go to 0.
pub fn majority_vote(votes: &[Hypothesis]) -> Option<Hypothesis> {
    let first = votes.first()?;
    let n = first.len();
    let values: Vec<bool> = (0..n)
        .map(|x| 2 * votes.iter().filter(|h| h.value(x)).count() > votes.len())
        .collect();
    Some(Hypothesis::from_values(&values).expect("domain sizes agree"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub point: DomainPoint,
    pub prediction: bool,
    pub truth: bool,
    pub mistake: bool,
    pub retrain: bool,
    pub j_star: u32,
    pub buffer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainOutcome {
    Published,
    /// More than half of the sparse samples were the failure symbol.
    RetrainFailure,
    /// The buffer was smaller than `k`.
    SplitFailure,
    Halted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTest {
    pub j: u32,
    pub max_frequency: usize,
    pub outcome: ThresholdOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    /// Step at which the retrain fired; 0 for the initial training.
    pub t: usize,
    /// Index among calls that reached joint training.
    pub u: usize,
    pub buffer: usize,
    pub outcome: TrainOutcome,
    pub stage_tests: Vec<StageTest>,
    pub j_star: u32,
    /// Closed-form failure-symbol probability when sampling was reached.
    pub p_bottom: Option<f64>,
    pub bottoms: usize,
    pub published: Option<Hypothesis>,
    /// Smallest teacher class size at the final stage tested.
    pub min_class: usize,
    /// Whether `target` lay in every teacher class at that stage, if a target was given.
    pub target_retained: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MistakeLog {
    pub steps: Vec<StepRecord>,
    pub trains: Vec<TrainRecord>,
    pub halted_at: Option<usize>,
}

impl MistakeLog {
    pub fn mistakes(&self) -> usize {
        self.steps.iter().filter(|s| s.mistake).count()
    }

    /// Successful retrains after the initial training.
    pub fn retrains(&self) -> usize {
        self.trains
            .iter()
            .filter(|r| r.t > 0 && r.outcome == TrainOutcome::Published)
            .count()
    }

    /// Mistakes strictly after the last step that published a hypothesis.
    pub fn mistakes_after_last_retrain(&self) -> usize {
        let last = self
            .trains
            .iter()
            .filter(|r| r.outcome == TrainOutcome::Published)
            .map(|r| r.t)
            .max()
            .unwrap_or(0);
        self.steps.iter().filter(|s| s.t > last && s.mistake).count()
    }

    pub fn max_j_star(&self) -> u32 {
        self.trains.iter().map(|r| r.j_star).max().unwrap_or(1)
    }

    /// Step log as CSV with header `t,prediction,truth,mistake,retrain,j_star`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,prediction,truth,mistake,retrain,j_star\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.t, s.prediction as u8, s.truth as u8, s.mistake as u8, s.retrain as u8, s.j_star
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineSummary {
    pub mistakes: usize,
    pub retrains: usize,
    pub halted: bool,
    pub j_star: u32,
    pub mistake_budget: u64,
    pub basic: PrivacyParams,
    pub advanced: PrivacyParams,
    pub certified: bool,
}

/// The learner's state machine. Drive it with [`OnlineLearner::observe`].
pub struct OnlineLearner<'a> {
    class: &'a HypothesisClass,
    config: OnlineConfig,
    decomposer: Decomposer,
    base: BigRational,
    target: Option<Hypothesis>,
    pub t: usize,
    pub buffer: LabeledSequence,
    pub current: Hypothesis,
    pub j_star: u32,
    pub teachers: TeacherCollection,
    pub ledger: BudgetLedger,
    pub log: MistakeLog,
    retrain_test: ThresholdState,
    stage_test: ThresholdState,
    list_cap: u64,
    calls: usize,
    halted: bool,
}

impl<'a> OnlineLearner<'a> {
    pub fn new(class: &'a HypothesisClass, config: OnlineConfig) -> Result<Self> {
        config.validate()?;
        if class.is_empty() {
            return Err(Error::Parameter("hypothesis class is empty".into()));
        }
        let l = crate::hypothesis::ldim(class);
        if l > config.d as i32 {
            return Err(Error::Parameter(format!(
                "class has Littlestone dimension {l} above d = {}",
                config.d
            )));
        }
        let d = config.d;
        let mut retrain_test = ThresholdState::new(
            config.u,
            1.0 / config.retrain_noise_scale,
            config.k_budget,
            CountMode::Above,
        );
        let mut stage_test = ThresholdState::new(
            config.stage_fraction * config.k as f64,
            1.0 / config.stage_noise_scale,
            d as u64 + 1,
            CountMode::Below,
        );
        if config.noise_free_tests {
            retrain_test.noise = ThresholdNoise::None;
            stage_test.noise = ThresholdNoise::None;
        }

        let delta = config.privacy.delta;
        let mut ledger = BudgetLedger::new(config.privacy);
        let block_delta = delta / 4.0;
        ledger.record_threshold_block("online/retrain-test", 1.0 / config.retrain_noise_scale, config.k_budget, block_delta);
        ledger.record_threshold_block("online/stage-test", 1.0 / config.stage_noise_scale, d as u64 + 1, block_delta);
        let leaf_bound = DecompositionParams::new(config.p_at(d + 1), d)?.leaf_count_bound();
        let list_cap = leaf_bound.min(class.len() as u64).max(1);
        ledger.record_sparse(
            "online/select",
            config.epsilon_sparse,
            config.sparse_delta,
            list_cap,
            config.bottom_score,
            (config.k_budget + 1) * config.repetitions as u64,
        );
        ledger.delta_prime = delta / 4.0;

        let budget = SearchBudget::default();
        Ok(OnlineLearner {
            class,
            decomposer: Decomposer::with_budget(class.domain(), budget),
            base: ratio(config.class_base.0, config.class_base.1),
            teachers: TeacherCollection::new(config.k),
            target: None,
            t: 0,
            buffer: LabeledSequence::new(),
            current: class.members()[0],
            j_star: 1,
            ledger,
            log: MistakeLog::default(),
            retrain_test,
            stage_test,
            list_cap,
            calls: 0,
            halted: false,
            config,
        })
    }

    /// Track whether this hypothesis survives in every teacher class (test support).
    pub fn with_target(mut self, target: Hypothesis) -> Self {
        self.target = Some(target);
        self
    }

    pub fn config(&self) -> &OnlineConfig {
        &self.config
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// Remaining retrains before a halt; `-1` once halted.
    pub fn budget_remaining(&self) -> i64 {
        if self.halted {
            -1
        } else {
            self.config.k_budget as i64 - self.retrain_test.counter() as i64
        }
    }

    /// Teacher classes at stage `j` for the current collections.
    pub fn teacher_classes(&self, j: u32) -> Vec<HypothesisClass> {
        (0..self.teachers.k())
            .map(|i| define_class(self.class, self.teachers.teacher(i), j, self.config.d, &self.base))
            .collect()
    }

    /// Stage loop and sampling. Updates `j_star` and returns the outcome with
    /// the published hypothesis, if any.
    pub fn joint_train<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(TrainOutcome, Option<Hypothesis>)> {
        let d = self.config.d;
        let k = self.config.k;
        let mut record = TrainRecord {
            t: self.t,
            u: self.calls,
            buffer: self.buffer.len(),
            outcome: TrainOutcome::Halted,
            stage_tests: Vec::new(),
            j_star: self.j_star,
            p_bottom: None,
            bottoms: 0,
            published: None,
            min_class: 0,
            target_retained: None,
        };
        self.calls += 1;
        let mut result = (TrainOutcome::Halted, None);
        while self.j_star <= d + 1 {
            let j = self.j_star;
            let params = DecompositionParams::new(self.config.p_at(j), d)?;
            let classes = self.teacher_classes(j);
            record.min_class = classes.iter().map(|c| c.len()).min().unwrap_or(0);
            record.target_retained = self.target.map(|h| classes.iter().all(|c| c.contains(&h)));
            let mut lists = Vec::with_capacity(k);
            for c in &classes {
                let set = self
                    .decomposer
                    .essential(c, params, self.config.essential_mode)
                    .map_err(|e| match e {
                        Error::BudgetExceeded { what, .. } => Error::InstanceTooLarge(what),
                        other => other,
                    })?;
                lists.push(CandidateList::new(set.hypotheses, self.list_cap as usize));
            }
            let mut freq: BTreeMap<Hypothesis, usize> = BTreeMap::new();
            for l in &lists {
                for h in l.items() {
                    *freq.entry(*h).or_default() += 1;
                }
            }
            let max_frequency = freq.values().copied().max().unwrap_or(0);
            let outcome = self.stage_test.test(max_frequency as f64, rng);
            record.stage_tests.push(StageTest {
                j,
                max_frequency,
                outcome,
            });
            match outcome {
                ThresholdOutcome::Below => {
                    self.j_star += 1;
                    continue;
                }
                ThresholdOutcome::Halted => {
                    self.j_star = d + 2;
                    break;
                }
                ThresholdOutcome::Above => {}
            }
            let eps = self.config.epsilon_sparse;
            let b = self.config.bottom_score;
            record.p_bottom = Some(estimate_bot_probability(&lists, eps, b));
            let mut votes = Vec::with_capacity(self.config.repetitions);
            for _ in 0..self.config.repetitions {
                match sparse_sample(&lists, eps, b, rng)?.choice {
                    Some(h) => votes.push(h),
                    None => record.bottoms += 1,
                }
            }
            result = if 2 * record.bottoms > self.config.repetitions {
                (TrainOutcome::RetrainFailure, None)
            } else {
                let h = majority_vote(&votes).expect("some vote survives");
                (TrainOutcome::Published, Some(h))
            };
            break;
        }
        record.j_star = self.j_star.min(d + 1);
        record.outcome = result.0;
        record.published = result.1;
        self.log.trains.push(record);
        Ok(result)
    }

    fn halt(&mut self) {
        self.halted = true;
        self.log.halted_at = Some(self.t);
    }

    /// Initial training on empty collections.
    pub fn start<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        match self.joint_train(rng)? {
            (TrainOutcome::Published, Some(h)) => self.current = h,
            (TrainOutcome::Halted, _) => self.halt(),
            _ => {}
        }
        Ok(())
    }

    /// One round: predict on `example.point`, learn the label, maybe retrain.
    pub fn observe<R: Rng + ?Sized>(&mut self, example: LabeledExample, rng: &mut R) -> Result<bool> {
        self.t += 1;
        let x = example.point;
        self.class.domain().check(x)?;
        let prediction = self.current.value(x.0);
        let mistake = prediction != example.label;
        if mistake {
            self.buffer.push(example);
        }
        let mut retrain = false;
        if !self.halted {
            match self.retrain_test.test(self.buffer.len() as f64, rng) {
                ThresholdOutcome::Below => {}
                ThresholdOutcome::Halted => self.halt(),
                ThresholdOutcome::Above => {
                    retrain = true;
                    self.retrain(rng)?;
                }
            }
        }
        self.log.steps.push(StepRecord {
            t: self.t,
            point: x,
            prediction,
            truth: example.label,
            mistake,
            retrain,
            j_star: self.j_star.min(self.config.d + 1),
            buffer: self.buffer.len(),
        });
        Ok(prediction)
    }

    fn retrain<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let blocks = match split_counterexamples(&self.buffer, self.config.k, rng) {
            Ok(b) => b,
            Err(Error::SplitTooSmall { .. }) => {
                self.log.trains.push(TrainRecord {
                    t: self.t,
                    u: self.calls,
                    buffer: self.buffer.len(),
                    outcome: TrainOutcome::SplitFailure,
                    stage_tests: Vec::new(),
                    j_star: self.j_star.min(self.config.d + 1),
                    p_bottom: None,
                    bottoms: 0,
                    published: None,
                    min_class: 0,
                    target_retained: None,
                });
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        self.teachers.push_round(blocks)?;
        match self.joint_train(rng)? {
            (TrainOutcome::Published, Some(h)) => {
                self.current = h;
                self.buffer.clear();
            }
            (TrainOutcome::Halted, _) => self.halt(),
            _ => {}
        }
        Ok(())
    }

    pub fn summary(&self) -> OnlineSummary {
        OnlineSummary {
            mistakes: self.log.mistakes(),
            retrains: self.log.retrains(),
            halted: self.halted,
            j_star: self.j_star,
            mistake_budget: self.config.mistake_budget(),
            basic: self.ledger.basic(),
            advanced: self.ledger.advanced(),
            certified: self.ledger.is_certified(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub log: MistakeLog,
    pub teachers: TeacherCollection,
    pub ledger: BudgetLedger,
    pub summary: OnlineSummary,
}

/// Runs the learner over a fixed stream. `target`, if given, is tracked in
/// the training records.
pub fn private_online_learn<R: Rng + ?Sized>(
    class: &HypothesisClass,
    stream: &LabeledSequence,
    config: &OnlineConfig,
    target: Option<Hypothesis>,
    rng: &mut R,
) -> Result<OnlineRun> {
    stream.check_domain(class.domain())?;
    let mut learner = OnlineLearner::new(class, config.clone())?;
    if let Some(h) = target {
        learner = learner.with_target(h);
    }
    learner.start(rng)?;
    for e in stream.iter() {
        learner.observe(*e, rng)?;
    }
    let summary = learner.summary();
    Ok(OnlineRun {
        log: learner.log,
        teachers: learner.teachers,
        ledger: learner.ledger,
        summary,
    })
}
