//! Command-line and config-file parsing into an [`ExperimentMatrix`].
//!
//! The config file is flat `key = value` lines whose keys are the long flag
//! names without the leading dashes. `#` starts a comment. Flags win over file
//! values; `ADACONS_OUT_DIR` wins over the file's `out-dir` but not over the
//! flag.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use adacons::aggregation::NormalizationForm;
use adacons::{AdaConsConfig, AdaConsVariant, AggregatorKind, Execution, ProblemKind, StepRule};
use clap::Parser;
use thiserror::Error;

pub const OUT_DIR_ENV: &str = "ADACONS_OUT_DIR";

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config file {path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{0}")]
    Cli(String),
}

impl UsageError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        UsageError::InvalidValue {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregatorChoice {
    Sum,
    AdaCons(AdaConsVariant),
}

impl AggregatorChoice {
    pub fn label(self) -> &'static str {
        match self {
            AggregatorChoice::Sum => "sum",
            AggregatorChoice::AdaCons(v) => v.label(),
        }
    }

    pub fn kind(self, adacons: AdaConsConfig) -> AggregatorKind {
        match self {
            AggregatorChoice::Sum => AggregatorKind::Average,
            AggregatorChoice::AdaCons(v) => AggregatorKind::AdaCons(adacons.for_variant(v)),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sum" | "average" | "avg" => AggregatorChoice::Sum,
            "adacons" => AggregatorChoice::AdaCons(AdaConsVariant::MomentumNormalization),
            "adacons-raw" => AggregatorChoice::AdaCons(AdaConsVariant::Raw),
            "adacons-momentum" => AggregatorChoice::AdaCons(AdaConsVariant::Momentum),
            "adacons-normalization" => AggregatorChoice::AdaCons(AdaConsVariant::Normalization),
            _ => return None,
        })
    }
}

/// Fully resolved set of runs to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMatrix {
    pub workers: Vec<usize>,
    pub effective_batches: Vec<usize>,
    pub aggregators: Vec<AggregatorChoice>,
    pub seeds: Vec<u64>,
    pub dimension: usize,
    pub iterations: usize,
    pub problem: ProblemKind,
    pub problem_seed: u64,
    /// Beta, epsilon, lambda and normalization form shared by every AdaCons
    /// variant; the momentum/normalization flags come from the variant.
    pub adacons: AdaConsConfig,
    pub step_rule: StepRule,
    pub record_coefficient_stats: bool,
    pub execution: Execution,
    /// Run the baseline plus all four AdaCons variants per cell instead of
    /// `aggregators`.
    pub ablation: bool,
    pub output_dir: PathBuf,
    /// Trace destination for a single-run matrix.
    pub csv: Option<PathBuf>,
    pub jobs: usize,
    /// When false, wall times are written as 0 so reruns are byte-identical.
    pub timing: bool,
    pub bytes_per_element: u64,
}

impl ExperimentMatrix {
    /// Labels run for every (workers, effective batch, seed) cell.
    pub fn labels(&self) -> Vec<&'static str> {
        if self.ablation {
            std::iter::once("sum")
                .chain(AdaConsVariant::ALL.iter().map(|v| v.label()))
                .collect()
        } else {
            self.aggregators.iter().map(|a| a.label()).collect()
        }
    }

    pub fn run_count(&self) -> usize {
        self.workers.len() * self.effective_batches.len() * self.seeds.len() * self.labels().len()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "adacons",
    about = "Simulate synchronous data-parallel SGD with averaging or AdaCons aggregation"
)]
struct Cli {
    /// Flat key=value file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker counts, comma separated
    #[arg(long)]
    workers: Option<String>,
    /// Effective (global) batch sizes, comma separated
    #[arg(long = "effective-batch")]
    effective_batch: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    /// sum, adacons, adacons-raw, adacons-momentum, adacons-normalization
    #[arg(long)]
    aggregator: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Weight scale used when normalization is off
    #[arg(long = "fallback-lambda")]
    fallback_lambda: Option<String>,
    /// sum-to-one or unsquared
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma list and/or inclusive ranges, e.g. 1..5
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long = "problem-seed")]
    problem_seed: Option<String>,
    /// exact or fixed:<eta>
    #[arg(long)]
    step: Option<String>,
    /// Trace CSV path for a single-run matrix
    #[arg(long)]
    csv: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<String>,
    /// sequential or parallel worker gradients
    #[arg(long)]
    execution: Option<String>,
    /// Matrix cells run concurrently
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long = "bytes-per-element")]
    bytes_per_element: Option<String>,
    /// Record coefficient mean/std at every stage
    #[arg(long = "coeff-stats")]
    coeff_stats: bool,
    /// Run the baseline plus every AdaCons variant
    #[arg(long)]
    ablation: bool,
    /// Write zero wall times for byte-reproducible output
    #[arg(long = "no-timing")]
    no_timing: bool,
}

const KEYS: &[&str] = &[
    "workers",
    "effective-batch",
    "dim",
    "iters",
    "aggregator",
    "beta",
    "epsilon",
    "fallback-lambda",
    "normalization",
    "seed",
    "seeds",
    "problem",
    "problem-seed",
    "step",
    "csv",
    "out-dir",
    "execution",
    "jobs",
    "bytes-per-element",
    "coeff-stats",
    "ablation",
    "no-timing",
];

impl Cli {
    fn into_values(self) -> (Option<PathBuf>, BTreeMap<String, String>) {
        let mut values = BTreeMap::new();
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        };
        put("workers", self.workers);
        put("effective-batch", self.effective_batch);
        put("dim", self.dim);
        put("iters", self.iters);
        put("aggregator", self.aggregator);
        put("beta", self.beta);
        put("epsilon", self.epsilon);
        put("fallback-lambda", self.fallback_lambda);
        put("normalization", self.normalization);
        put("seed", self.seed);
        put("seeds", self.seeds);
        put("problem", self.problem);
        put("problem-seed", self.problem_seed);
        put("step", self.step);
        put("csv", self.csv);
        put("out-dir", self.out_dir);
        put("execution", self.execution);
        put("jobs", self.jobs);
        put("bytes-per-element", self.bytes_per_element);
        put("coeff-stats", self.coeff_stats.then(|| "true".into()));
        put("ablation", self.ablation.then(|| "true".into()));
        put("no-timing", self.no_timing.then(|| "true".into()));
        (self.config, values)
    }
}

/// Parses flat `key = value` text.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut values = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            UsageError::Cli(format!(
                "line {}: expected key=value, got `{line}`",
                lineno + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--");
        if !KEYS.contains(&key) {
            return Err(UsageError::UnknownKey(key.to_string()));
        }
        values.insert(key.to_string(), value.trim().to_string());
    }
    Ok(values)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_text(&text).map_err(|e| UsageError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Resolves command-line tokens (without the program name) into a matrix.
/// `env_out_dir` is the value of [`OUT_DIR_ENV`], if set.
pub fn parse_config<I, T>(
    args: I,
    env_out_dir: Option<&str>,
) -> Result<ExperimentMatrix, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("adacons")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError::Cli(e.to_string()))?;
    let (config_path, flags) = cli.into_values();

    let mut values = match &config_path {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    if let Some(dir) = env_out_dir {
        values.insert("out-dir".into(), dir.to_string());
    }
    values.extend(flags);
    resolve(&values)
}

fn resolve(values: &BTreeMap<String, String>) -> Result<ExperimentMatrix, UsageError> {
    let get = |key: &str| values.get(key).map(String::as_str);

    let workers = list_of::<usize>("workers", get("workers").unwrap_or("8"))?;
    let effective_batches =
        list_of::<usize>("effective-batch", get("effective-batch").unwrap_or("1024"))?;
    if workers.contains(&0) {
        return Err(UsageError::invalid(
            "workers",
            "worker counts must be positive",
        ));
    }
    for &n in &workers {
        for &b in &effective_batches {
            if b == 0 || b % n != 0 {
                return Err(UsageError::invalid(
                    "effective-batch",
                    format!("{b} is not a positive multiple of {n} workers"),
                ));
            }
        }
    }

    let aggregators = get("aggregator")
        .unwrap_or("sum,adacons")
        .split(',')
        .map(|s| {
            AggregatorChoice::parse(s.trim()).ok_or_else(|| {
                UsageError::invalid("aggregator", format!("unknown aggregator `{s}`"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let beta = scalar::<f64>("beta", get("beta").unwrap_or("0.99"))?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(UsageError::invalid(
            "beta",
            format!("{beta} is outside (0, 1)"),
        ));
    }
    let epsilon = scalar::<f64>("epsilon", get("epsilon").unwrap_or("1e-12"))?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(UsageError::invalid("epsilon", "must be positive"));
    }
    let fallback_lambda = scalar::<f64>("fallback-lambda", get("fallback-lambda").unwrap_or("1"))?;
    if !fallback_lambda.is_finite() {
        return Err(UsageError::invalid("fallback-lambda", "must be finite"));
    }
    let normalization = match get("normalization").unwrap_or("sum-to-one") {
        "sum-to-one" => NormalizationForm::SumToOne,
        "unsquared" => NormalizationForm::UnsquaredNorm,
        other => {
            return Err(UsageError::invalid(
                "normalization",
                format!("expected sum-to-one or unsquared, got `{other}`"),
            ))
        }
    };

    let seeds = match (get("seed"), get("seeds")) {
        (Some(_), Some(_)) => {
            return Err(UsageError::invalid(
                "seeds",
                "give either --seed or --seeds, not both",
            ))
        }
        (Some(s), None) => vec![scalar::<u64>("seed", s)?],
        (None, Some(s)) => seed_list(s)?,
        (None, None) => vec![0],
    };

    let dimension = scalar::<usize>("dim", get("dim").unwrap_or("1000"))?;
    if dimension == 0 {
        return Err(UsageError::invalid("dim", "must be at least 1"));
    }
    let iterations = scalar::<usize>("iters", get("iters").unwrap_or("500"))?;
    if iterations == 0 {
        return Err(UsageError::invalid("iters", "must be at least 1"));
    }
    let problem = get("problem")
        .unwrap_or("linear_regression")
        .parse::<ProblemKind>()
        .map_err(|e| UsageError::invalid("problem", e.to_string()))?;
    let problem_seed = scalar::<u64>("problem-seed", get("problem-seed").unwrap_or("0"))?;

    let step_rule = match get("step").unwrap_or("exact") {
        "exact" => StepRule::ExactLineSearch,
        other => match other.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(eta)) if eta.is_finite() => StepRule::Fixed(eta),
            _ => {
                return Err(UsageError::invalid(
                    "step",
                    format!("expected `exact` or `fixed:<eta>`, got `{other}`"),
                ))
            }
        },
    };

    let execution = match get("execution").unwrap_or("sequential") {
        "sequential" => Execution::Sequential,
        "parallel" => Execution::Parallel,
        other => {
            return Err(UsageError::invalid(
                "execution",
                format!("expected sequential or parallel, got `{other}`"),
            ))
        }
    };
    let jobs = scalar::<usize>("jobs", get("jobs").unwrap_or("1"))?.max(1);
    let bytes_per_element =
        scalar::<u64>("bytes-per-element", get("bytes-per-element").unwrap_or("4"))?;

    let matrix = ExperimentMatrix {
        workers,
        effective_batches,
        aggregators,
        seeds,
        dimension,
        iterations,
        problem,
        problem_seed,
        adacons: AdaConsConfig {
            beta,
            epsilon,
            fallback_lambda,
            normalization,
            ..AdaConsConfig::default()
        },
        step_rule,
        record_coefficient_stats: flag("coeff-stats", get("coeff-stats"))?,
        execution,
        ablation: flag("ablation", get("ablation"))?,
        output_dir: PathBuf::from(get("out-dir").unwrap_or("results")),
        csv: get("csv").map(PathBuf::from),
        jobs,
        timing: !flag("no-timing", get("no-timing"))?,
        bytes_per_element,
    };
    if matrix.csv.is_some() && matrix.run_count() != 1 {
        return Err(UsageError::invalid(
            "csv",
            format!(
                "only valid for a single run, this matrix has {} runs",
                matrix.run_count()
            ),
        ));
    }
    Ok(matrix)
}

fn scalar<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, UsageError>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| UsageError::invalid(key, format!("`{raw}`: {e}")))
}

fn list_of<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>, UsageError>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = raw
        .split(',')
        .map(|s| scalar(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(UsageError::invalid(key, "empty list"));
    }
    Ok(items)
}

fn seed_list(raw: &str) -> Result<Vec<u64>, UsageError> {
    let mut seeds = Vec::new();
    for part in raw.split(',') {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo = scalar::<u64>("seeds", lo)?;
                let hi = scalar::<u64>("seeds", hi.trim_start_matches('='))?;
                if hi < lo {
                    return Err(UsageError::invalid(
                        "seeds",
                        format!("empty range `{part}`"),
                    ));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(scalar::<u64>("seeds", part)?),
        }
    }
    Ok(seeds)
}

fn flag(key: &str, raw: Option<&str>) -> Result<bool, UsageError> {
    match raw {
        None => Ok(false),
        Some("true" | "1" | "yes") => Ok(true),
        Some("false" | "0" | "no") => Ok(false),
        Some(other) => Err(UsageError::invalid(
            key,
            format!("expected a boolean, got `{other}`"),
        )),
    }
}
