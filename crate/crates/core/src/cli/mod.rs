//! Batch front end behind the `qmap` binary.
//!
//! ```text
//! qmap region|check|split|simulate-randomization|simulate-encoding|
//!      simulate-code|verify-lemmas --spec FILE --config FILE --out DIR --seed N
//! ```
//!
//! The primary JSON result goes to stdout; with `--out` it is also written
//! to `DIR` together with any CSV files. Exit codes: 0 success,
//! 2 validation error, 3 invariant violation, 4 budget exceeded.
//! `QMAP_BUDGET_QUBITS` overrides the 12-qubit budget (capped at 14).

mod config;
mod lemmas;
mod spec;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

pub use config::ExperimentConfig;
pub use lemmas::{verify_lemmas, LemmaOptions, LemmaReport, SuiteResult};
pub use spec::{Entry, Preset, ResolvedState, StateSpec};

use crate::error::{Error, Result};
use crate::protocols::{
    chained_randomization_experiment, code_experiment, encoding_experiment, randomization_experiment,
    sizes_from_rates, Budget, Experiment, SenderSizes, SimulationReport,
};
use crate::regions::{
    chat_from_state, dhat_from_state, main_region, members, membership, rate_split, RateTuple,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

pub const BUDGET_ENV: &str = "QMAP_BUDGET_QUBITS";

#[derive(Parser, Debug)]
#[command(name = "qmap", version, about = "Rate regions and coding simulations for the quantum multiple-access one-time pad")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// State specification (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for JSON and CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides `master_seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// All 2^Z − 1 rate constraints with the Ĉ, D̂ tables.
    Region,
    /// Membership of `rates` in the region.
    Check,
    /// Split interior `rates` into (C, D) with C − D = R.
    Split,
    /// Distance of the randomized state from π ⊗ ρ^W.
    SimulateRandomization,
    /// Decoding success of unitary encodings.
    SimulateEncoding,
    /// Build and evaluate full codes.
    SimulateCode,
    /// Randomized property suites for the structural lemmas.
    VerifyLemmas,
}

/// Result of a command before anything is written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub stdout: String,
    /// `(file name, contents)` for `--out`.
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DimensionOverflow { .. } | Error::TooLarge(_) => EXIT_BUDGET,
        Error::PropertyCheck(_) | Error::Identity(_) | Error::Incomplete(_) | Error::OperatorOutOfRange(_) => {
            EXIT_INVARIANT
        }
        _ => EXIT_VALIDATION,
    }
}

/// Budget from `QMAP_BUDGET_QUBITS`, defaulting to 12 and capped at 14.
pub fn budget_from_env() -> Result<Budget> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .map(Budget::new)
            .map_err(|_| Error::validation(BUDGET_ENV, format!("not a nonnegative integer: `{v}`"))),
        Err(_) => Ok(Budget::default()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::validation(what, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::validation(
            what,
            format!("{} (line {}, column {})", e, e.line(), e.column()),
        )
    })
}

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

struct Inputs {
    state: Option<ResolvedState>,
    config: ExperimentConfig,
}

impl Inputs {
    fn load(cli: &Cli) -> Result<Self> {
        let state = match &cli.spec {
            Some(p) => Some(read_json::<StateSpec>(p, "spec")?.resolve()?),
            None => None,
        };
        let config = match &cli.config {
            Some(p) => read_json(p, "config")?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = &state {
            config.check_lengths(s.senders.len())?;
        }
        Ok(Self { state, config })
    }

    fn state(&self) -> Result<&ResolvedState> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::validation("spec", "this command needs --spec"))
    }
}

/// Runs one command without touching the filesystem beyond reading inputs.
pub fn execute(cli: &Cli, budget: Budget) -> Result<Outcome> {
    let inputs = Inputs::load(cli)?;
    match cli.command {
        Command::Region => cmd_region(&inputs),
        Command::Check => cmd_check(&inputs),
        Command::Split => cmd_split(&inputs),
        Command::SimulateRandomization => cmd_randomization(&inputs, cli.seed, budget),
        Command::SimulateEncoding => cmd_encoding(&inputs, cli.seed, budget),
        Command::SimulateCode => cmd_code(&inputs, cli.seed, budget),
        Command::VerifyLemmas => cmd_verify(&inputs, cli.seed),
    }
}

fn single(name: &str, value: &impl Serialize) -> Result<Outcome> {
    let text = pretty(value)?;
    Ok(Outcome {
        stdout: text.clone(),
        files: vec![(format!("{name}.json"), text)],
        exit_code: EXIT_OK,
    })
}

fn cmd_region(inputs: &Inputs) -> Result<Outcome> {
    let s = inputs.state()?;
    let r = main_region(&s.rho, &s.senders, &s.b, &s.e)?;
    single(
        "region",
        &json!({
            "z": r.region.z,
            "entries": r.region.constraints,
            "senders": s.senders,
            "chat": r.chat,
            "dhat": r.dhat,
            "residuals": r.residuals,
            "max_residual": r.max_residual,
        }),
    )
}

fn rates(inputs: &Inputs) -> Result<RateTuple> {
    RateTuple::new(inputs.config.rates()?.to_vec())
}

fn cmd_check(inputs: &Inputs) -> Result<Outcome> {
    let s = inputs.state()?;
    let r = rates(inputs)?;
    let region = main_region(&s.rho, &s.senders, &s.b, &s.e)?;
    let slack = inputs.config.slack.unwrap_or(1e-9);
    let m = membership(&region.region, &r, slack)?;
    single(
        "check",
        &json!({
            "rates": r,
            "member": m.member,
            "margin": m.margin,
            "worst": m.worst,
            "slack": slack,
        }),
    )
}

fn v_and_w(s: &ResolvedState) -> (Vec<String>, Vec<String>) {
    let mut v = s.b.clone();
    v.extend(s.e.iter().cloned());
    (v, s.e.clone())
}

fn cmd_split(inputs: &Inputs) -> Result<Outcome> {
    let s = inputs.state()?;
    let r = rates(inputs)?;
    let (v, w) = v_and_w(s);
    let chat = chat_from_state(&s.rho, &s.senders, &v)?;
    let dhat = dhat_from_state(&s.rho, &s.senders, &w)?;
    let (c, d) = rate_split(&r, &chat, &dhat)?;
    let margins: Vec<_> = (1..=chat.full_mask())
        .map(|m| {
            json!({
                "subset": members(m),
                "upper": chat.get(m) - c.subset_sum(m),
                "lower": d.subset_sum(m) - dhat.get(m),
            })
        })
        .collect();
    let min_of = |key: &str| {
        margins
            .iter()
            .map(|x| x[key].as_f64().unwrap_or(f64::NEG_INFINITY))
            .fold(f64::INFINITY, f64::min)
    };
    single(
        "split",
        &json!({
            "rates": r,
            "c": c,
            "d": d,
            "upper_margin": min_of("upper"),
            "lower_margin": min_of("lower"),
            "margins": margins,
        }),
    )
}

fn experiment<'a>(inputs: &'a Inputs, seed: Option<u64>, budget: Budget) -> Result<Experiment<'a>> {
    let s = inputs.state()?;
    Ok(Experiment {
        rho: &s.rho,
        senders: s.senders.clone(),
        n: inputs.config.n(),
        trials: inputs.config.trials(),
        master_seed: inputs.config.seed(seed)?,
        family: inputs.config.family(),
        budget,
    })
}

fn report_outcome(stem: &str, report: &SimulationReport) -> Result<Outcome> {
    let json = report.to_json()? + "\n";
    Ok(Outcome {
        stdout: json.clone(),
        files: vec![(format!("{stem}.json"), json), (format!("{stem}.csv"), report.to_csv()?)],
        exit_code: if report.passed() { EXIT_OK } else { EXIT_INVARIANT },
    })
}

/// Runs `f` for each uniform size in `values` and tabulates `metric`.
fn sweep_outcome(
    stem: &str,
    metric: &str,
    values: &[usize],
    f: impl Fn(usize) -> Result<SimulationReport>,
) -> Result<Outcome> {
    if values.is_empty() {
        return Err(Error::validation("sweep", "must not be empty"));
    }
    let mut files = Vec::new();
    let mut points = Vec::new();
    let mut passed = true;
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record(["value", "metric_name", "mean", "standard_error"])?;
    for &v in values {
        let r = f(v)?;
        passed &= r.passed();
        let mean = r.estimate(metric).unwrap_or(f64::NAN);
        let se = r.standard_errors.get(metric).copied().unwrap_or(0.0);
        table.write_record([v.to_string(), metric.to_string(), format!("{mean:e}"), format!("{se:e}")])?;
        points.push(json!({"value": v, "mean": mean, "standard_error": se, "violations": r.violations}));
        files.push((format!("{stem}_{v}.json"), r.to_json()? + "\n"));
        files.push((format!("{stem}_{v}.csv"), r.to_csv()?));
    }
    let table = String::from_utf8(table.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .expect("csv output is UTF-8");
    files.push((format!("{stem}_sweep.csv"), table));
    let summary = pretty(&json!({"kind": format!("{stem}-sweep"), "metric": metric, "points": points}))?;
    files.push((format!("{stem}_sweep.json"), summary.clone()));
    Ok(Outcome {
        stdout: summary,
        files,
        exit_code: if passed { EXIT_OK } else { EXIT_INVARIANT },
    })
}

fn cmd_randomization(inputs: &Inputs, seed: Option<u64>, budget: Budget) -> Result<Outcome> {
    let exp = experiment(inputs, seed, budget)?;
    let cfg = &inputs.config;
    let z = exp.senders.len();
    if let Some(d) = &cfg.d_rates {
        return report_outcome("randomization", &chained_randomization_experiment(&exp, d)?);
    }
    if let Some(values) = &cfg.sweep {
        return sweep_outcome("randomization", "distance", values, |l| {
            randomization_experiment(&exp, &vec![l; z])
        });
    }
    let l = cfg
        .l_sizes
        .as_ref()
        .ok_or_else(|| Error::validation("l_sizes", "give l_sizes, sweep or d_rates"))?;
    report_outcome("randomization", &randomization_experiment(&exp, l)?)
}

fn cmd_encoding(inputs: &Inputs, seed: Option<u64>, budget: Budget) -> Result<Outcome> {
    let exp = experiment(inputs, seed, budget)?;
    let cfg = &inputs.config;
    let z = exp.senders.len();
    let decoder = cfg.decoder();
    if let Some(values) = &cfg.sweep {
        return sweep_outcome("encoding", "success", values, |k| {
            encoding_experiment(&exp, &vec![k; z], decoder)
        });
    }
    let k = cfg
        .k_sizes
        .as_ref()
        .ok_or_else(|| Error::validation("k_sizes", "give k_sizes or sweep"))?;
    report_outcome("encoding", &encoding_experiment(&exp, k, decoder)?)
}

fn code_sizes(inputs: &Inputs) -> Result<(Vec<SenderSizes>, serde_json::Value)> {
    let s = inputs.state()?;
    let cfg = &inputs.config;
    let n = cfg.n();
    if let Some(m) = &cfg.m_sizes {
        let l = cfg.l_sizes.clone().unwrap_or_else(|| vec![1; m.len()]);
        let sizes = m
            .iter()
            .zip(&l)
            .map(|(&messages, &randomizing)| SenderSizes { messages, randomizing })
            .collect();
        return Ok((sizes, json!({"source": "explicit"})));
    }
    let r = rates(inputs)?;
    let (c, d, source) = match (&cfg.c, &cfg.d) {
        (Some(c), Some(d)) => (RateTuple::new(c.clone())?, RateTuple::new(d.clone())?, "config"),
        (None, None) => {
            let (v, w) = v_and_w(s);
            let chat = chat_from_state(&s.rho, &s.senders, &v)?;
            let dhat = dhat_from_state(&s.rho, &s.senders, &w)?;
            let (c, d) = rate_split(&r, &chat, &dhat)?;
            (c, d, "rate-split")
        }
        _ => return Err(Error::validation("c", "give both c and d, or neither")),
    };
    let sizes = sizes_from_rates(n, &r, &c, &d)?;
    Ok((sizes, json!({"source": source, "rates": r, "c": c, "d": d})))
}

fn cmd_code(inputs: &Inputs, seed: Option<u64>, budget: Budget) -> Result<Outcome> {
    let exp = experiment(inputs, seed, budget)?;
    let (sizes, split) = code_sizes(inputs)?;
    let s = inputs.state()?;
    let mut report = code_experiment(&exp, &s.e, &sizes, inputs.config.decoder())?;
    report.parameter("split", split);
    report_outcome("code", &report)
}

fn cmd_verify(inputs: &Inputs, seed: Option<u64>) -> Result<Outcome> {
    let cfg = &inputs.config;
    let defaults = LemmaOptions::default();
    let options = LemmaOptions {
        states: cfg.states.unwrap_or(defaults.states),
        union_trials: cfg.trials.unwrap_or(defaults.union_trials),
        inject_counterexample: cfg.inject_counterexample.unwrap_or(false),
    };
    let report = verify_lemmas(cfg.seed(seed)?, options);
    let mut out = single("lemmas", &report)?;
    if !report.passed {
        out.exit_code = EXIT_INVARIANT;
    }
    Ok(out)
}

/// Parses arguments, runs the command, writes artifacts and returns the
/// process exit code.
pub fn run_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = budget_from_env().and_then(|b| execute(&cli, b)).and_then(|out| {
        if let Some(dir) = &cli.out {
            std::fs::create_dir_all(dir)?;
            for (name, contents) in &out.files {
                std::fs::write(dir.join(name), contents)?;
            }
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
