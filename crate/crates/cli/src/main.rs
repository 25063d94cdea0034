//! `ldp`: command-line front end for the private learners, the decomposition
//! tools, the baselines and the experiment harness.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 search budget exceeded,
//! 3 a checked property failed (invalid tree, audit violation, baseline bound).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use littlestone_dp::decomposition::{
    validate_tree, Decomposer, DecompositionParams, DecompositionTree, EssentialMode, SearchBudget,
};
use littlestone_dp::erm::{erm_learn, ErmConfig, ErmOutput};
use littlestone_dp::harness::{run_experiment, run_halving_baseline, run_soa_baseline, ExperimentConfig};
use littlestone_dp::hypothesis::{ldim, soa_hypothesis};
use littlestone_dp::mechanisms::{audit_noiseless_argmax, audit_sparse_sampler, PrivacyParams};
use littlestone_dp::online::{private_online_learn, OnlineConfig};
use littlestone_dp::rational::parse_rational;
use littlestone_dp::rng::stream;
use littlestone_dp::{Error, HypothesisClass, LabeledSequence};

#[derive(Parser)]
#[command(name = "ldp", version, about = "Private learning of finite Littlestone classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Approx,
}

impl From<Mode> for EssentialMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => EssentialMode::Exact,
            Mode::Approx => EssentialMode::Approximate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OnlinePreset {
    Paper,
    Desk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Soa,
    Halving,
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditTarget {
    /// The sparse sampler at parameters meeting its precondition.
    Sparse,
    /// A noiseless argmax that must be flagged.
    Argmax,
}

#[derive(Subcommand)]
enum Command {
    /// Littlestone dimension and SOA hypothesis of a class.
    Ldim {
        #[arg(long)]
        class: PathBuf,
    },
    /// Build a (p, d)-decomposition tree and print its dump.
    Decompose {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u32,
        /// Minimum-degree tree instead of the greedy one.
        #[arg(long)]
        optimal: bool,
        /// Also list the essential hypotheses.
        #[arg(long)]
        essential: bool,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        max_expansions: Option<u64>,
        /// Write the dump here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a tree dump against a class.
    Validate {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u32,
    },
    /// Private empirical risk minimization on a dataset.
    Erm {
        #[arg(long)]
        class: PathBuf,
        /// Lines `point_index label`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "1/5")]
        alpha: String,
        #[arg(long, default_value_t = 2.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Number of chunks.
        #[arg(long, default_value_t = 300)]
        k: usize,
        /// Upper bound on the Littlestone dimension; computed if omitted.
        #[arg(long)]
        d: Option<u32>,
        /// Replaces `n·d` in the decomposition parameter.
        #[arg(long)]
        p_base: Option<u64>,
        /// JSON transcript output.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Private online learning over a stream.
    Online {
        #[arg(long)]
        class: PathBuf,
        /// Lines `point_index label`.
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, value_enum, default_value = "desk")]
        mode: OnlinePreset,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        k_budget: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        epsilon_sparse: Option<f64>,
        #[arg(long)]
        bottom_score: Option<f64>,
        #[arg(long)]
        retrain_noise_scale: Option<f64>,
        #[arg(long)]
        stage_noise_scale: Option<f64>,
        #[arg(long)]
        p_scale: Option<u64>,
        /// Run the threshold tests without noise (not private).
        #[arg(long)]
        noise_free: bool,
        /// Mistake log CSV output.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Non-private SOA or halving learner over a stream.
    Baseline {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, value_enum, default_value = "soa")]
        learner: Baseline,
    },
    /// Monte-Carlo privacy audit.
    DpAudit {
        #[arg(long, value_enum, default_value = "sparse")]
        mechanism: AuditTarget,
        #[arg(long, default_value_t = 50_000)]
        trials: u64,
        #[arg(long, default_value_t = 2.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment from a JSON config and emit CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Budget(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Assertion(_) => Failure::Check(e.to_string()),
            e if e.is_budget() => Failure::Budget(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_class(path: &Path) -> Result<HypothesisClass, Failure> {
    Ok(HypothesisClass::parse(&read(path)?)?)
}

fn load_sequence(path: &Path, class: &HypothesisClass) -> Result<LabeledSequence, Failure> {
    Ok(LabeledSequence::parse(&read(path)?, class.domain())?)
}

fn json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn main() -> ExitCode {
    // Usage errors exit with 1 so that 2 stays reserved for budget failures.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Ldim { class } => {
            let class = load_class(&class)?;
            println!("size: {}", class.len());
            println!("ldim: {}", ldim(&class));
            if !class.is_empty() {
                println!("soa: {}", soa_hypothesis(&class)?);
            }
            Ok(())
        }
        Command::Decompose {
            class,
            p,
            d,
            optimal,
            essential,
            mode,
            max_expansions,
            out,
        } => {
            let class = load_class(&class)?;
            let params = DecompositionParams::new(p, d)?;
            let mut budget = SearchBudget::default();
            if let Some(m) = max_expansions {
                budget.max_expansions = m;
            }
            let mut dec = Decomposer::with_budget(class.domain(), budget);
            let tree = if optimal {
                dec.optimal_tree(&class, params)?
            } else {
                dec.greedy(&class, params)?
            };
            let summary = format!(
                "degree: {}\nleaves: {}\nleaf_bound: {}\nmax_depth: {}",
                tree.degree(),
                tree.leaf_count(),
                params.leaf_count_bound(),
                tree.max_depth()
            );
            match out {
                Some(path) => {
                    fs::write(path, tree.dump())?;
                    println!("{summary}");
                }
                None => {
                    print!("{}", tree.dump());
                    eprintln!("{summary}");
                }
            }
            if essential {
                let set = dec.essential(&class, params, mode.into())?;
                let names: Vec<String> = set.hypotheses.iter().map(|h| h.to_string()).collect();
                eprintln!(
                    "essential (t = {}{}): {}",
                    set.t,
                    if set.approximate { ", approximate" } else { "" },
                    names.join(" ")
                );
            }
            Ok(())
        }
        Command::Validate { class, tree, p, d } => {
            let class = load_class(&class)?;
            let params = DecompositionParams::new(p, d)?;
            let tree = DecompositionTree::parse_dump(&read(&tree)?, &class, params)?;
            let report = validate_tree(&tree, &class)?;
            match report.violation {
                None => {
                    println!("valid ({} nodes checked)", report.nodes_checked);
                    Ok(())
                }
                Some(v) => Err(Failure::Check(format!("invalid tree: {v}"))),
            }
        }
        Command::Erm {
            class,
            data,
            alpha,
            epsilon,
            delta,
            seed,
            mode,
            k,
            d,
            p_base,
            transcript,
        } => {
            let class = load_class(&class)?;
            let sample = load_sequence(&data, &class)?;
            let d = d.unwrap_or_else(|| ldim(&class).max(0) as u32);
            let mut cfg = ErmConfig::new(parse_rational(&alpha)?, PrivacyParams::new(epsilon, delta)?, d, k);
            cfg.mode = mode.into();
            cfg.p_base = p_base;
            if !sample.is_realizable_by(&class) {
                eprintln!("note: dataset is not realizable by the class");
            }
            let run = erm_learn(&class, &sample, &cfg, &mut stream(seed))?;
            match &run.output {
                ErmOutput::Hypothesis(h) => println!("{h}"),
                ErmOutput::Bottom => println!("BOTTOM"),
                ErmOutput::Exhausted => println!("EXHAUSTED"),
            }
            if let Some(path) = transcript {
                let doc = serde_json::json!({
                    "output": run.output,
                    "transcript": run.transcript,
                    "ledger": run.ledger,
                    "basic": run.ledger.basic(),
                    "advanced": run.ledger.advanced(),
                    "certified": run.ledger.is_certified(),
                });
                fs::write(path, json(&doc))?;
            }
            Ok(())
        }
        Command::Online {
            class,
            stream: stream_path,
            mode,
            epsilon,
            delta,
            seed,
            d,
            k,
            u,
            k_budget,
            repetitions,
            epsilon_sparse,
            bottom_score,
            retrain_noise_scale,
            stage_noise_scale,
            p_scale,
            noise_free,
            log,
        } => {
            let class = load_class(&class)?;
            let seq = load_sequence(&stream_path, &class)?;
            let d = d.unwrap_or_else(|| ldim(&class).max(0) as u32);
            let privacy = PrivacyParams::new(epsilon, delta)?;
            let mut cfg = match mode {
                OnlinePreset::Paper => OnlineConfig::paper(seq.len(), privacy, d),
                OnlinePreset::Desk => OnlineConfig::desk(seq.len(), privacy, d),
            };
            if let Some(k) = k {
                cfg.k = k;
                if bottom_score.is_none() {
                    cfg.bottom_score = k as f64 / 10.0;
                }
            }
            cfg.u = u.unwrap_or(cfg.u);
            cfg.k_budget = k_budget.unwrap_or(cfg.k_budget);
            cfg.repetitions = repetitions.unwrap_or(cfg.repetitions);
            cfg.epsilon_sparse = epsilon_sparse.unwrap_or(cfg.epsilon_sparse);
            cfg.bottom_score = bottom_score.unwrap_or(cfg.bottom_score);
            cfg.retrain_noise_scale = retrain_noise_scale.unwrap_or(cfg.retrain_noise_scale);
            cfg.stage_noise_scale = stage_noise_scale.unwrap_or(cfg.stage_noise_scale);
            cfg.p_scale = p_scale.or(cfg.p_scale);
            cfg.noise_free_tests = noise_free;
            let realizable = seq.is_realizable_by(&class);
            let run = private_online_learn(&class, &seq, &cfg, None, &mut stream(seed))?;
            if let Some(path) = log {
                fs::write(path, run.log.to_csv())?;
            }
            let s = &run.summary;
            let doc = serde_json::json!({
                "mistakes": s.mistakes,
                "retrains": s.retrains,
                "halted": s.halted,
                "j_star": s.j_star,
                "mistake_budget": s.mistake_budget,
                "realizable": realizable,
                "ledger": {
                    "basic": s.basic,
                    "advanced": s.advanced,
                    "certified": s.certified,
                },
            });
            println!("{}", json(&doc));
            Ok(())
        }
        Command::Baseline {
            class,
            stream: stream_path,
            learner,
        } => {
            let class = load_class(&class)?;
            let seq = load_sequence(&stream_path, &class)?;
            let run = match learner {
                Baseline::Soa => run_soa_baseline(&class, &seq)?,
                Baseline::Halving => run_halving_baseline(&class, &seq)?,
            };
            println!("mistakes: {}", run.mistakes);
            println!("bound: {}", run.bound);
            Ok(())
        }
        Command::DpAudit {
            mechanism,
            trials,
            epsilon,
            delta,
            seed,
        } => {
            let mut rng = stream(seed);
            let report = match mechanism {
                AuditTarget::Sparse => audit_sparse_sampler(trials, epsilon, delta, &mut rng)?,
                AuditTarget::Argmax => audit_noiseless_argmax(trials, epsilon, delta, &mut rng),
            };
            println!("{report}");
            if report.violated() {
                Err(Failure::Check(format!("{} violates its claimed guarantee", report.mechanism)))
            } else {
                Ok(())
            }
        }
        Command::Experiment {
            config,
            output,
            repetitions,
        } => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&read(&config)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            if let Some(r) = repetitions {
                cfg.repetitions = r;
            }
            if output.is_some() {
                cfg.output = output;
            }
            let result = run_experiment(&cfg)?;
            if cfg.output.is_none() {
                print!("{}", result.to_csv());
            }
            if let Some(a) = &result.aggregate {
                eprintln!(
                    "runs: {}  mean mistakes: {:.3}  p95 mistakes: {}",
                    a.runs, a.mean_mistakes, a.p95_mistakes
                );
            }
            if result.has_assertion_failure() {
                Err(Failure::Check("a repetition failed a checked bound".into()))
            } else if result.has_budget_failure() {
                Err(Failure::Budget("a repetition exceeded the search budget".into()))
            } else {
                Ok(())
            }
        }
    }
}
