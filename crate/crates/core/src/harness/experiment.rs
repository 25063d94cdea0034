use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_instance, run_halving_baseline, run_soa_baseline, ClassFamily, Instance, StreamSpec};
use crate::erm::{erm_learn, ErmConfig, ErmOutput};
use crate::error::{Error, Result};
use crate::hypothesis::ldim;
use crate::mechanisms::PrivacyParams;
use crate::online::{private_online_learn, OnlineConfig, OnlineMode};
use crate::rational::parse_rational;
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LearnerKind {
    DpOnline,
    DpErm,
    SoaBaseline,
    HalvingBaseline,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::DpOnline => "DP_ONLINE",
            LearnerKind::DpErm => "DP_ERM",
            LearnerKind::SoaBaseline => "SOA_BASELINE",
            LearnerKind::HalvingBaseline => "HALVING_BASELINE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub learner: LearnerKind,
    /// For `DP_ERM` the stream is the sample and `horizon` is `n`.
    pub stream: StreamSpec,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub privacy: Option<PrivacyParams>,
    /// ERM target error as a rational string; defaults to `1/5`.
    #[serde(default)]
    pub alpha: Option<String>,
    /// ERM chunk count; defaults to the desk value.
    #[serde(default)]
    pub erm_k: Option<usize>,
    #[serde(default)]
    pub online_mode: Option<OnlineMode>,
    /// Full online configuration; overrides `online_mode` and `privacy`.
    #[serde(default)]
    pub online: Option<OnlineConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(learner: LearnerKind, stream: StreamSpec, repetitions: usize) -> Self {
        ExperimentConfig {
            learner,
            stream,
            repetitions,
            privacy: None,
            alpha: None,
            erm_k: None,
            online_mode: None,
            online: None,
            output: None,
        }
    }
}

/// One row per repetition. Optional fields are empty in the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub repetition: usize,
    pub seed: u64,
    pub learner: LearnerKind,
    pub family: String,
    pub domain_size: usize,
    pub class_size: usize,
    pub ldim: i32,
    pub horizon: usize,
    pub mistakes: Option<usize>,
    /// Empirical error on the sample (ERM only).
    pub error: Option<f64>,
    pub retrains: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// `ok`, `bottom`, `exhausted`, `halted`, or `error: …` / `assertion: …`.
    pub status: String,
}

pub const CSV_HEADER: &str =
    "repetition,seed,learner,family,domain_size,class_size,ldim,horizon,mistakes,error,retrains,epsilon,delta,status";

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.repetition,
            self.seed,
            self.learner.name(),
            self.family,
            self.domain_size,
            self.class_size,
            self.ldim,
            self.horizon,
            opt(&self.mistakes),
            opt(&self.error),
            opt(&self.retrains),
            opt(&self.epsilon),
            opt(&self.delta),
            self.status.replace([',', '\n', '"'], ";"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_mistakes: f64,
    /// Nearest-rank 95th percentile.
    pub p95_mistakes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<ResultRecord>,
    pub aggregate: Option<Aggregate>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(out, "{}", r.csv_row());
        }
        out
    }

    pub fn has_assertion_failure(&self) -> bool {
        self.records.iter().any(|r| r.status.starts_with("assertion"))
    }

    pub fn has_budget_failure(&self) -> bool {
        self.records.iter().any(|r| r.status.starts_with("budget"))
    }
}

fn family_name(f: &ClassFamily) -> String {
    match f {
        ClassFamily::Thresholds => "THRESHOLDS".into(),
        ClassFamily::Intervals => "INTERVALS".into(),
        ClassFamily::Random { m } => format!("RANDOM(m={m})"),
        ClassFamily::FromFile { .. } => "FROM_FILE".into(),
    }
}

fn status_of(e: &Error) -> String {
    match e {
        Error::Assertion(m) => format!("assertion: {m}"),
        e if e.is_budget() => format!("budget: {e}"),
        e => format!("error: {e}"),
    }
}

fn run_one(config: &ExperimentConfig, repetition: usize) -> ResultRecord {
    let seed = derive_seed(config.stream.seed, repetition as u64);
    let spec = StreamSpec { seed, ..config.stream.clone() };
    let mut record = ResultRecord {
        repetition,
        seed,
        learner: config.learner,
        family: family_name(&spec.family),
        domain_size: spec.domain_size,
        class_size: 0,
        ldim: -1,
        horizon: spec.horizon,
        mistakes: None,
        error: None,
        retrains: None,
        epsilon: None,
        delta: None,
        status: "ok".into(),
    };
    let instance = match generate_instance(&spec) {
        Ok(i) => i,
        Err(e) => {
            record.status = status_of(&e);
            return record;
        }
    };
    record.class_size = instance.class.len();
    record.domain_size = instance.class.domain().size();
    record.ldim = ldim(&instance.class);
    if let Err(e) = run_learner(config, &instance, seed, &mut record) {
        record.status = status_of(&e);
    }
    record
}

fn run_learner(config: &ExperimentConfig, inst: &Instance, seed: u64, record: &mut ResultRecord) -> Result<()> {
    let mut rng = stream(derive_seed(seed, 3));
    let d = record.ldim.max(0) as u32;
    match config.learner {
        LearnerKind::SoaBaseline => {
            record.mistakes = Some(run_soa_baseline(&inst.class, &inst.stream)?.mistakes);
        }
        LearnerKind::HalvingBaseline => {
            record.mistakes = Some(run_halving_baseline(&inst.class, &inst.stream)?.mistakes);
        }
        LearnerKind::DpOnline => {
            let cfg = match &config.online {
                Some(c) => c.clone(),
                None => {
                    let privacy = match config.privacy {
                        Some(p) => p,
                        None => PrivacyParams::new(1.0, 0.01)?,
                    };
                    match config.online_mode.unwrap_or(OnlineMode::Desk) {
                        OnlineMode::Desk => OnlineConfig::desk(inst.stream.len(), privacy, d),
                        OnlineMode::Paper => OnlineConfig::paper(inst.stream.len(), privacy, d),
                    }
                }
            };
            let run = private_online_learn(&inst.class, &inst.stream, &cfg, Some(inst.target), &mut rng)?;
            record.mistakes = Some(run.summary.mistakes);
            record.retrains = Some(run.summary.retrains);
            record.epsilon = Some(run.summary.advanced.epsilon);
            record.delta = Some(run.summary.advanced.delta);
            if run.summary.halted {
                record.status = "halted".into();
            }
        }
        LearnerKind::DpErm => {
            let mut cfg = ErmConfig::desk(d);
            if let Some(a) = &config.alpha {
                cfg.alpha = parse_rational(a)?;
            }
            if let Some(k) = config.erm_k {
                cfg.k = k;
            }
            if let Some(p) = config.privacy {
                cfg.privacy = p;
            }
            let run = erm_learn(&inst.class, &inst.stream, &cfg, &mut rng)?;
            let ledger = run.ledger.advanced();
            record.epsilon = Some(ledger.epsilon);
            record.delta = Some(ledger.delta);
            match &run.output {
                ErmOutput::Hypothesis(h) => {
                    let m = h.mistakes_on(&inst.stream);
                    record.mistakes = Some(m);
                    record.error = Some(m as f64 / inst.stream.len() as f64);
                }
                ErmOutput::Bottom => record.status = "bottom".into(),
                ErmOutput::Exhausted => record.status = "exhausted".into(),
            }
        }
    }
    Ok(())
}

fn aggregate(records: &[ResultRecord]) -> Option<Aggregate> {
    let mut m: Vec<usize> = records.iter().filter_map(|r| r.mistakes).collect();
    if m.is_empty() {
        return None;
    }
    m.sort_unstable();
    let rank = ((0.95 * m.len() as f64).ceil() as usize).clamp(1, m.len());
    Some(Aggregate {
        runs: m.len(),
        mean_mistakes: m.iter().sum::<usize>() as f64 / m.len() as f64,
        p95_mistakes: m[rank - 1],
    })
}

/// Runs all repetitions (in parallel, each on its own derived seed), keeps
/// records in repetition order and writes the CSV if an output path is set.
/// Learner failures land in the `status` column.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.repetitions == 0 {
        return Err(Error::Parameter("repetitions must be at least 1".into()));
    }
    let records: Vec<ResultRecord> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| run_one(config, r))
        .collect();
    let result = ExperimentResult {
        aggregate: aggregate(&records),
        records,
    };
    if let Some(path) = &config.output {
        std::fs::write(path, result.to_csv())?;
    }
    Ok(result)
}
