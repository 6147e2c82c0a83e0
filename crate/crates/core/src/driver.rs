//! Command-line orchestration. Arguments and an optional TOML file become a
//! [`RunConfig`]; [`execute`] runs one pipeline and writes artifacts.
//!
//! Precedence is flag, then file, then built-in default. Every JSON artifact
//! carries the full config echo, the dataset checksum when a dataset is
//! involved, and a `timestamp` field. Nothing else in it depends on the
//! wall clock.
//!
//! Exit codes: 0 success, 1 checks failed (artifacts still written),
//! 2 usage errors and anything that prevented a result.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cocycle_engine::{
    analyze_spectrum, coupled_estimate, estimate_exponents, functor_consistency, EngineError,
    EstimationResult, SpectrumHints, WalkConfig, WalkKind,
};
use crate::exact_linalg::{
    invariant_bilinear_matrices, invariant_trilinear_space, rat, FormParity, Rational,
};
use crate::hodge_formulas::{
    compare_prediction, conjecture_prediction, kontsevich_sum, parse_rational, spectrum_shape,
    FormulaError, ShapeInput, VhsProfile,
};
use crate::monodromy_dataset::{
    load_builtin, load_dataset, verify_invariance_with, BuiltinDataset, CocycleGenerators,
    DatasetError,
};
use crate::rep_functors::{FunctorError, FunctorSpec};
use crate::root_g2::{
    predict_spectrum, recover_lyapunov_vector, representation_weights, LyapunovVector,
    RepresentationName, RootError,
};

pub const OUTPUT_DIR_ENV: &str = "G2LYAP_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "g2lyap-output";
pub const DEFAULT_TOL_SIGMA: f64 = 3.0;
pub const DEFAULT_RELATION_LEN: usize = 4;
pub const DEFAULT_FLOAT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{0}")]
    Cli(#[from] clap::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("config file {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },
    #[error("monodromy_dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("cocycle_engine: {0}")]
    Engine(#[from] EngineError),
    #[error("root_g2: {0}")]
    Root(#[from] RootError),
    #[error("rep_functors: {0}")]
    Functor(#[from] FunctorError),
    #[error("hodge_formulas: {0}")]
    Formula(#[from] FormulaError),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl DriverError {
    /// Help and version requests exit 0; everything else is 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Cli(e) if !e.use_stderr() => 0,
            _ => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> DriverError {
    DriverError::Usage(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Exact rational when the text parses as `p/q` or an integer, float otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn parse(text: &str) -> Result<Self, DriverError> {
        let t = text.trim();
        if let Ok(r) = parse_rational(t) {
            return Ok(Self::Exact(r));
        }
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Self::Float)
            .ok_or_else(|| usage(format!("malformed number `{t}`")))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Self::Float(x) => *x,
        }
    }
}

impl std::fmt::Display for Number {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{r}"),
            Self::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_list(text: &str, expected: usize, what: &str) -> Result<Vec<Number>, DriverError> {
    let items = text
        .split(',')
        .map(Number::parse)
        .collect::<Result<Vec<_>, _>>()?;
    if items.len() != expected {
        return Err(usage(format!("{what} needs {expected} comma-separated values, got {}", items.len())));
    }
    Ok(items)
}

fn exact_all(items: &[Number]) -> Option<Vec<Rational>> {
    items
        .iter()
        .map(|n| match n {
            Number::Exact(r) => Some(r.clone()),
            Number::Float(_) => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaRequest {
    pub genus: Option<u32>,
    pub punctures: Option<u32>,
    pub degree: Option<Number>,
    pub profile: Option<PathBuf>,
    pub k: Option<usize>,
    pub estimate: Option<PathBuf>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    Verify {
        dataset: String,
        max_relation_len: usize,
    },
    Predict {
        rep: RepresentationName,
        gamma: Vec<Number>,
    },
    Estimate {
        dataset: String,
        walk: WalkConfig,
    },
    FunctorEstimate {
        dataset: String,
        walk: WalkConfig,
        functors: Vec<FunctorSpec>,
    },
    Recover {
        exponents: Vec<Number>,
        tol: Number,
    },
    Formula(FormulaRequest),
    Datasets,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Verify { .. } => "verify",
            Self::Predict { .. } => "predict",
            Self::Estimate { .. } => "estimate",
            Self::FunctorEstimate { .. } => "functor-estimate",
            Self::Recover { .. } => "recover",
            Self::Formula(_) => "formula",
            Self::Datasets => "datasets",
        }
    }
}

/// The serialized form is the config echo embedded in every artifact; the
/// output location is deliberately left out of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub tol_sigma: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

/// Keys accepted in a `--config` TOML file. Keys that the chosen
/// subcommand does not use are ignored; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<String>,
    pub steps: Option<usize>,
    pub blocks: Option<usize>,
    pub renorm_interval: Option<usize>,
    pub seed: Option<u64>,
    pub walk: Option<String>,
    pub burn_in: Option<usize>,
    pub tol_sigma: Option<f64>,
    pub out: Option<PathBuf>,
    pub functors: Option<Vec<String>>,
    pub rep: Option<String>,
    pub gamma: Option<String>,
    pub exponents: Option<String>,
    pub tol: Option<String>,
    pub genus: Option<u32>,
    pub punctures: Option<u32>,
    pub degree: Option<String>,
    pub profile: Option<PathBuf>,
    pub k: Option<usize>,
    pub estimate: Option<PathBuf>,
    pub scale: Option<f64>,
    pub max_relation_len: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, DriverError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| DriverError::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "g2lyap", version, about = "Exact certification and Monte Carlo Lyapunov spectra for G2 monodromy")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $G2LYAP_OUTPUT_DIR, then ./g2lyap-output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance in standard errors for statistical checks.
    #[arg(long)]
    tol_sigma: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct WalkArgs {
    /// Builtin dataset name or path to a dataset JSON file.
    #[arg(long)]
    dataset: Option<String>,
    /// Walk length after burn-in, a multiple of `--blocks` (default 1000000).
    #[arg(long)]
    steps: Option<usize>,
    /// Independent blocks for standard errors (default 20).
    #[arg(long)]
    blocks: Option<usize>,
    /// Steps between QR renormalizations (default 1).
    #[arg(long)]
    renorm_interval: Option<usize>,
    /// Master seed; block seeds derive from it (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// `non-backtracking`, `iid-uniform` or `iid-positive`.
    #[arg(long)]
    walk: Option<String>,
    /// Discarded steps per block (default 1000).
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Certify invariant bilinear and trilinear forms of a dataset.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Builtin dataset name or path to a dataset JSON file.
        #[arg(long)]
        dataset: Option<String>,
        /// Longest reduced word searched for relations.
        #[arg(long)]
        max_relation_len: Option<usize>,
    },
    /// Spectrum of a representation for a Lyapunov vector.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// `standard` or `adjoint`.
        #[arg(long)]
        rep: Option<String>,
        /// Three comma-separated coordinates summing to zero, e.g. `2,1,-3`.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
    },
    /// Monte Carlo Lyapunov spectrum of a dataset.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        walk: WalkArgs,
    },
    /// Coupled estimates for several functors, with consistency checks.
    FunctorEstimate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        walk: WalkArgs,
        /// Repeatable; default `identity`, `ext:2`, `dual`.
        #[arg(long = "functor")]
        functors: Vec<String>,
    },
    /// Lyapunov vector from the positive standard exponents `a,b,c`.
    Recover {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, exact (`p/q`) or decimal.
        #[arg(long, allow_hyphen_values = true)]
        exponents: Option<String>,
        /// Additivity tolerance (0 for exact input, 1e-9 otherwise).
        #[arg(long)]
        tol: Option<String>,
    },
    /// Kontsevich-type sum formulas.
    Formula {
        #[command(flatten)]
        common: CommonArgs,
        /// Genus of the base curve.
        #[arg(long)]
        genus: Option<u32>,
        /// Number of punctures.
        #[arg(long)]
        punctures: Option<u32>,
        /// Degree of the Hodge bundle, `p/q`.
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        /// Profile JSON with weight, Hodge numbers and degrees.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Number of positive exponents.
        #[arg(long)]
        k: Option<usize>,
        /// Estimate JSON to confront with the prediction.
        #[arg(long)]
        estimate: Option<PathBuf>,
        /// Time normalization applied to the estimated exponents.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// List builtin datasets with their checksums.
    Datasets {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl CliCommand {
    fn common(&self) -> &CommonArgs {
        match self {
            Self::Verify { common, .. }
            | Self::Predict { common, .. }
            | Self::Estimate { common, .. }
            | Self::FunctorEstimate { common, .. }
            | Self::Recover { common, .. }
            | Self::Formula { common, .. }
            | Self::Datasets { common } => common,
        }
    }
}

fn required_dataset(flag: &Option<String>, file: &FileConfig) -> Result<String, DriverError> {
    let name = flag
        .clone()
        .or_else(|| file.dataset.clone())
        .ok_or_else(|| usage("missing --dataset"))?;
    if name.parse::<BuiltinDataset>().is_err() && !Path::new(&name).is_file() {
        return Err(usage(format!("dataset `{name}` is neither a builtin name nor an existing file")));
    }
    Ok(name)
}

fn walk_config(args: &WalkArgs, file: &FileConfig) -> Result<WalkConfig, DriverError> {
    let d = WalkConfig::default();
    let walk_kind = match args.walk.as_ref().or(file.walk.as_ref()) {
        Some(s) => s.parse::<WalkKind>().map_err(|e| usage(e.to_string()))?,
        None => d.walk_kind,
    };
    let cfg = WalkConfig {
        walk_kind,
        steps: args.steps.or(file.steps).unwrap_or(d.steps),
        renorm_interval: args.renorm_interval.or(file.renorm_interval).unwrap_or(d.renorm_interval),
        blocks: args.blocks.or(file.blocks).unwrap_or(d.blocks),
        master_seed: args.seed.or(file.seed).unwrap_or(d.master_seed),
        burn_in: args.burn_in.or(file.burn_in).unwrap_or(d.burn_in),
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Parse `argv` (program name first). The output directory falls back to
/// `$G2LYAP_OUTPUT_DIR`.
pub fn parse_run_config<I, T>(argv: I) -> Result<RunConfig, DriverError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_out = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    parse_run_config_with(argv, env_out)
}

/// [`parse_run_config`] with the environment fallback made explicit.
pub fn parse_run_config_with<I, T>(argv: I, env_out: Option<PathBuf>) -> Result<RunConfig, DriverError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let common = cli.command.common();
    let file = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let tol_sigma = common.tol_sigma.or(file.tol_sigma).unwrap_or(DEFAULT_TOL_SIGMA);
    if !(tol_sigma > 0.0 && tol_sigma.is_finite()) {
        return Err(usage(format!("tol_sigma must be positive, got {tol_sigma}")));
    }
    let out_dir = common
        .out
        .clone()
        .or_else(|| file.out.clone())
        .or(env_out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let command = match &cli.command {
        CliCommand::Verify {
            dataset,
            max_relation_len,
            ..
        } => Command::Verify {
            dataset: required_dataset(dataset, &file)?,
            max_relation_len: max_relation_len.or(file.max_relation_len).unwrap_or(DEFAULT_RELATION_LEN),
        },
        CliCommand::Predict { rep, gamma, .. } => {
            let rep = rep.as_ref().or(file.rep.as_ref()).map_or(Ok(RepresentationName::Standard), |s| s.parse())?;
            let gamma = gamma
                .as_ref()
                .or(file.gamma.as_ref())
                .ok_or_else(|| usage("missing --gamma"))?;
            Command::Predict {
                rep,
                gamma: parse_list(gamma, 3, "--gamma")?,
            }
        }
        CliCommand::Estimate { walk, .. } => Command::Estimate {
            dataset: required_dataset(&walk.dataset, &file)?,
            walk: walk_config(walk, &file)?,
        },
        CliCommand::FunctorEstimate { walk, functors, .. } => {
            let texts: Vec<String> = if !functors.is_empty() {
                functors.clone()
            } else if let Some(f) = &file.functors {
                f.clone()
            } else {
                vec!["identity".into(), "ext:2".into(), "dual".into()]
            };
            let functors = texts
                .iter()
                .map(|t| t.parse::<FunctorSpec>())
                .collect::<Result<Vec<_>, _>>()?;
            Command::FunctorEstimate {
                dataset: required_dataset(&walk.dataset, &file)?,
                walk: walk_config(walk, &file)?,
                functors,
            }
        }
        CliCommand::Recover { exponents, tol, .. } => {
            let exponents = exponents
                .as_ref()
                .or(file.exponents.as_ref())
                .ok_or_else(|| usage("missing --exponents"))?;
            let exponents = parse_list(exponents, 3, "--exponents")?;
            let tol = match tol.as_ref().or(file.tol.as_ref()) {
                Some(t) => Number::parse(t)?,
                None if exact_all(&exponents).is_some() => Number::Exact(rat(0)),
                None => Number::Float(DEFAULT_FLOAT_TOL),
            };
            Command::Recover { exponents, tol }
        }
        CliCommand::Formula {
            genus,
            punctures,
            degree,
            profile,
            k,
            estimate,
            scale,
            ..
        } => {
            let degree = degree.as_ref().or(file.degree.as_ref()).map(|d| Number::parse(d)).transpose()?;
            if matches!(degree, Some(Number::Float(_))) {
                return Err(usage("--degree must be an exact rational p/q"));
            }
            let request = FormulaRequest {
                genus: genus.or(file.genus),
                punctures: punctures.or(file.punctures),
                degree,
                profile: profile.clone().or_else(|| file.profile.clone()),
                k: k.or(file.k),
                estimate: estimate.clone().or_else(|| file.estimate.clone()),
                scale: scale.or(file.scale),
            };
            if request.profile.is_none() && (request.genus.is_none() || request.punctures.is_none() || request.degree.is_none()) {
                return Err(usage("formula needs --profile, or all of --genus, --punctures and --degree"));
            }
            if request.profile.is_some() && request.k.is_none() {
                return Err(usage("--profile needs --k"));
            }
            if request.estimate.is_some() && request.scale.is_none() {
                return Err(usage("--estimate needs an explicit --scale"));
            }
            Command::Formula(request)
        }
        CliCommand::Datasets { .. } => Command::Datasets,
    };
    Ok(RunConfig {
        command,
        tol_sigma,
        out_dir,
    })
}

/// Result of [`execute`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub json_path: PathBuf,
    pub csv_path: Option<PathBuf>,
    pub payload: Value,
    /// Short human-readable account.
    pub summary: String,
}

struct Artifact {
    checks_passed: bool,
    checksum: Option<String>,
    body: Map<String, Value>,
    csv: Option<String>,
    summary: String,
}

pub fn execute(config: &RunConfig) -> Result<Outcome, DriverError> {
    let artifact = match &config.command {
        Command::Verify {
            dataset,
            max_relation_len,
        } => run_verify(dataset, *max_relation_len)?,
        Command::Predict { rep, gamma } => run_predict(*rep, gamma)?,
        Command::Estimate { dataset, walk } => run_estimate(dataset, walk, config.tol_sigma)?,
        Command::FunctorEstimate {
            dataset,
            walk,
            functors,
        } => run_functor_estimate(dataset, walk, functors, config.tol_sigma)?,
        Command::Recover { exponents, tol } => run_recover(exponents, tol)?,
        Command::Formula(req) => run_formula(req, config.tol_sigma)?,
        Command::Datasets => run_datasets()?,
    };

    let mut payload = Map::new();
    payload.insert("tool".into(), json!("g2lyap"));
    payload.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    payload.insert("timestamp".into(), json!(unix_timestamp()));
    payload.insert("config".into(), serde_json::to_value(config)?);
    payload.insert("checksum".into(), json!(artifact.checksum));
    payload.insert("checks_passed".into(), json!(artifact.checks_passed));
    payload.extend(artifact.body);
    let payload = Value::Object(payload);

    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stem = config.command.name();
    let json_path = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(&payload)?;
    text.push('\n');
    fs::write(&json_path, text).map_err(io_err(&json_path))?;
    let csv_path = match artifact.csv {
        Some(csv) => {
            let p = dir.join(format!("{stem}.csv"));
            fs::write(&p, csv).map_err(io_err(&p))?;
            Some(p)
        }
        None => None,
    };
    Ok(Outcome {
        exit_code: if artifact.checks_passed { 0 } else { 1 },
        json_path,
        csv_path,
        payload,
        summary: artifact.summary,
    })
}

/// Parse, execute and report; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_run_config(argv) {
        Ok(c) => c,
        Err(DriverError::Cli(e)) => {
            let _ = e.print();
            return DriverError::Cli(e).exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&config) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!("wrote {}", outcome.json_path.display());
            if let Some(p) = &outcome.csv_path {
                println!("wrote {}", p.display());
            }
            if outcome.exit_code == 1 {
                eprintln!("checks failed; see {}", outcome.json_path.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn unix_timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn run_verify(dataset: &str, max_len: usize) -> Result<Artifact, DriverError> {
    let gens = load_dataset(dataset)?;
    let report = verify_invariance_with(&gens, max_len)?;
    let mut csv = String::from("check,passed,detail\n");
    for c in &report.checks {
        let _ = writeln!(csv, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
    }
    let mut summary = format!(
        "{}: symmetric forms {}, alternating forms {}",
        report.dataset, report.symmetric_form_dimension, report.alternating_form_dimension
    );
    if let Some(sig) = &report.signature {
        let _ = write!(summary, ", signature {sig}");
    }
    if let Some(t) = report.trilinear_form_dimension {
        let _ = write!(summary, ", 3-forms {t}");
    }
    let _ = writeln!(summary, ", {}", if report.passed() { "certified" } else { "NOT certified" });
    Ok(Artifact {
        checks_passed: report.passed(),
        checksum: gens.checksum.clone(),
        body: object(json!({ "report": report })),
        csv: Some(csv),
        summary,
    })
}

fn spectrum_csv(values: &[String]) -> String {
    let mut csv = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", i + 1, v);
    }
    csv
}

fn run_predict(rep: RepresentationName, gamma: &[Number]) -> Result<Artifact, DriverError> {
    let representation = representation_weights(rep);
    let (gamma_out, spectrum, positive): (Vec<String>, Vec<String>, Vec<String>) = match exact_all(gamma) {
        Some(g) => {
            let v = LyapunovVector::new([g[0].clone(), g[1].clone(), g[2].clone()], rat(0))?;
            let s = predict_spectrum(&representation, &v);
            (
                v.coords().iter().map(ToString::to_string).collect(),
                s.values().iter().map(ToString::to_string).collect(),
                s.positive_part().iter().map(ToString::to_string).collect(),
            )
        }
        None => {
            let g: Vec<f64> = gamma.iter().map(Number::to_f64).collect();
            let v = LyapunovVector::new([g[0], g[1], g[2]], DEFAULT_FLOAT_TOL)?;
            let s = predict_spectrum(&representation, &v);
            let fmt = |x: &f64| format!("{x:?}");
            (
                v.coords().iter().map(fmt).collect(),
                s.values().iter().map(fmt).collect(),
                s.positive_part().iter().map(fmt).collect(),
            )
        }
    };
    let summary = format!("{rep} spectrum: ({})\n", spectrum.join(", "));
    Ok(Artifact {
        checks_passed: true,
        checksum: None,
        csv: Some(spectrum_csv(&spectrum)),
        body: object(json!({
            "representation": rep,
            "dim": representation.dim(),
            "gamma": gamma_out,
            "spectrum": spectrum,
            "positive_part": positive,
        })),
        summary,
    })
}

fn run_recover(exponents: &[Number], tol: &Number) -> Result<Artifact, DriverError> {
    let standard = representation_weights(RepresentationName::Standard);
    let (gamma, spectrum) = match (exact_all(exponents), tol) {
        (Some(e), Number::Exact(t)) => {
            let v = recover_lyapunov_vector(e[0].clone(), e[1].clone(), e[2].clone(), t.clone())?;
            let s = predict_spectrum(&standard, &v);
            (
                v.coords().iter().map(ToString::to_string).collect::<Vec<_>>(),
                s.values().iter().map(ToString::to_string).collect::<Vec<_>>(),
            )
        }
        _ => {
            let e: Vec<f64> = exponents.iter().map(Number::to_f64).collect();
            let v = recover_lyapunov_vector(e[0], e[1], e[2], tol.to_f64())?;
            let s = predict_spectrum(&standard, &v);
            let fmt = |x: &f64| format!("{x:?}");
            (v.coords().iter().map(fmt).collect(), s.values().iter().map(fmt).collect())
        }
    };
    let summary = format!("Lyapunov vector: ({})\n", gamma.join(", "));
    Ok(Artifact {
        checks_passed: true,
        checksum: None,
        csv: Some(spectrum_csv(&spectrum)),
        body: object(json!({ "gamma": gamma, "standard_spectrum": spectrum })),
        summary,
    })
}

/// Structure the estimate is expected to show, read off exact invariants:
/// a nondegenerate invariant bilinear form forces a symmetric spectrum (and a
/// zero exponent in odd dimension); an invariant 3-form on top of that in
/// dimension 7 forces G₂ additivity.
pub fn hints_from_invariants(gens: &CocycleGenerators) -> Result<SpectrumHints, DriverError> {
    let mats = gens.matrices();
    let nondegenerate = |forms: Vec<crate::exact_linalg::ExactMatrix>| -> Result<bool, DriverError> {
        let mut total: Option<crate::exact_linalg::ExactMatrix> = None;
        for (i, f) in forms.iter().enumerate() {
            if !f.determinant().map_err(DatasetError::from)?.is_zero() {
                return Ok(true);
            }
            let weighted = f.scale(&rat(i as i64 + 1));
            total = Some(match total {
                Some(t) => &t + &weighted,
                None => weighted,
            });
        }
        Ok(match total {
            Some(t) => !t.determinant().map_err(DatasetError::from)?.is_zero(),
            None => false,
        })
    };
    let sym = invariant_bilinear_matrices(&mats, FormParity::Symmetric).map_err(DatasetError::from)?;
    let alt = invariant_bilinear_matrices(&mats, FormParity::Alternating).map_err(DatasetError::from)?;
    let symmetric_form = nondegenerate(sym)?;
    let expect_symmetry = symmetric_form || nondegenerate(alt)?;
    let three_form = gens.dim == 7
        && symmetric_form
        && !invariant_trilinear_space(&mats).map_err(DatasetError::from)?.is_empty();
    Ok(SpectrumHints {
        expect_symmetry,
        expect_zero: expect_symmetry && gens.dim % 2 == 1,
        expect_g2_additivity: three_form,
    })
}

/// Shape of the `estimate` artifact that [`load_estimate`] reads back.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EstimatePayload {
    dataset: String,
    functor: FunctorSpec,
    exponents: Vec<f64>,
    std_errors: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    steps_used: usize,
    walk: WalkConfig,
}

impl EstimatePayload {
    fn from_result(r: &EstimationResult) -> Self {
        Self {
            dataset: r.dataset.clone(),
            functor: r.functor.clone(),
            exponents: r.exponents.clone(),
            std_errors: r.std_errors.clone(),
            blocks: r.block_estimates.clone(),
            steps_used: r.steps_used,
            walk: r.config.clone(),
        }
    }

    fn into_result(self) -> EstimationResult {
        EstimationResult {
            dataset: self.dataset,
            functor: self.functor,
            exponents: self.exponents,
            std_errors: self.std_errors,
            block_estimates: self.blocks,
            steps_used: self.steps_used,
            config: self.walk,
        }
    }
}

/// Read back the result stored in an `estimate.json` artifact.
pub fn load_estimate(path: &Path) -> Result<EstimationResult, DriverError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let payload: EstimatePayload = serde_json::from_str(&text)?;
    Ok(payload.into_result())
}

fn run_estimate(dataset: &str, walk: &WalkConfig, tol_sigma: f64) -> Result<Artifact, DriverError> {
    let gens = load_dataset(dataset)?;
    let hints = hints_from_invariants(&gens)?;
    let result = estimate_exponents(&gens, walk)?;
    let diagnostics = analyze_spectrum(&result, hints, tol_sigma)?;
    let summary = format!(
        "{}: exponents ({}), diagnostics {}\n",
        result.dataset,
        result.exponents.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "),
        if diagnostics.all_pass() { "pass" } else { "FAIL" }
    );
    let mut body = object(serde_json::to_value(EstimatePayload::from_result(&result))?);
    body.insert("diagnostics".into(), serde_json::to_value(&diagnostics)?);
    Ok(Artifact {
        checks_passed: diagnostics.all_pass(),
        checksum: gens.checksum.clone(),
        body,
        csv: Some(result.to_csv()),
        summary,
    })
}

fn run_functor_estimate(
    dataset: &str,
    walk: &WalkConfig,
    functors: &[FunctorSpec],
    tol_sigma: f64,
) -> Result<Artifact, DriverError> {
    let gens = load_dataset(dataset)?;
    let hints = hints_from_invariants(&gens)?;
    let results = coupled_estimate(&gens, functors, walk)?;
    let identity = &results[0];
    let diagnostics = analyze_spectrum(identity, hints, tol_sigma)?;
    let consistency = results[1..]
        .iter()
        .map(|r| functor_consistency(identity, r, tol_sigma))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = diagnostics.all_pass() && consistency.iter().all(|c| c.passed);

    let mut csv = String::from("functor,index,value,std_error\n");
    let mut summary = String::new();
    for r in &results {
        for (i, (v, se)) in r.exponents.iter().zip(&r.std_errors).enumerate() {
            let _ = writeln!(csv, "{},{},{:?},{:?}", r.functor, i + 1, v, se);
        }
    }
    let _ = writeln!(summary, "identity diagnostics: {}", if diagnostics.all_pass() { "pass" } else { "FAIL" });
    for c in &consistency {
        let _ = writeln!(
            summary,
            "{}: max |z| = {:.2}, {}",
            c.label,
            c.max_zscore,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    let payloads: Vec<EstimatePayload> = results.iter().map(EstimatePayload::from_result).collect();
    Ok(Artifact {
        checks_passed: passed,
        checksum: gens.checksum.clone(),
        body: object(json!({
            "dataset": gens.name,
            "results": payloads,
            "diagnostics": diagnostics,
            "consistency": consistency,
        })),
        csv: Some(csv),
        summary,
    })
}

fn shape_input(profile: &VhsProfile) -> ShapeInput {
    if profile.weight % 2 == 1 {
        return ShapeInput::WeightOne;
    }
    // Hodge-Riemann: the polarization has opposite signs on adjacent H^{p,q}.
    let (mut even, mut odd) = (0, 0);
    for (i, &h) in profile.hodge_numbers.iter().enumerate() {
        if i % 2 == 0 {
            even += h as usize;
        } else {
            odd += h as usize;
        }
    }
    ShapeInput::Signature(even, odd)
}

fn run_formula(req: &FormulaRequest, tol_sigma: f64) -> Result<Artifact, DriverError> {
    let Some(path) = &req.profile else {
        let degree = match &req.degree {
            Some(Number::Exact(d)) => d.clone(),
            _ => return Err(usage("--degree must be an exact rational p/q")),
        };
        let (g, s) = (req.genus.unwrap_or(0), req.punctures.unwrap_or(0));
        let sum = kontsevich_sum(g, s, &degree)?;
        return Ok(Artifact {
            checks_passed: true,
            checksum: None,
            body: object(json!({ "sum": sum.to_string(), "sum_approx": sum.to_f64() })),
            csv: None,
            summary: format!("sum of positive exponents = {sum}\n"),
        });
    };

    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut profile = VhsProfile::from_json(&text)?;
    if let Some(g) = req.genus {
        profile.genus = g;
    }
    if let Some(s) = req.punctures {
        profile.punctures = s;
    }
    let k = req.k.ok_or_else(|| usage("--profile needs --k"))?;
    let prediction = conjecture_prediction(&profile, k)?;
    let shape = spectrum_shape(profile.rank(), shape_input(&profile))?;
    let mut body = object(json!({
        "profile": profile.to_json(),
        "prediction": prediction,
        "shape": shape,
        "shape_pattern": shape.pattern(),
    }));
    let mut summary = format!(
        "branch {:?}, top {} exponents sum to {}\n",
        prediction.branch,
        prediction.k_used,
        prediction.predicted_sum.as_ref().map_or("(no claim)".to_string(), ToString::to_string)
    );
    let mut passed = true;
    if let Some(est_path) = &req.estimate {
        let estimate = load_estimate(est_path)?;
        let scale = req.scale.ok_or_else(|| usage("--estimate needs an explicit --scale"))?;
        let report = compare_prediction(&prediction, &estimate, scale, tol_sigma)?;
        let _ = writeln!(
            summary,
            "scaled estimate {:.6} vs {}: {:.2} SE, {}",
            report.scaled_sum,
            report.predicted,
            report.defect_sigma,
            if report.consistent { "consistent" } else { "INCONSISTENT" }
        );
        passed = report.consistent;
        body.insert("comparison".into(), serde_json::to_value(&report)?);
    }
    Ok(Artifact {
        checks_passed: passed,
        checksum: None,
        body,
        csv: None,
        summary,
    })
}

fn run_datasets() -> Result<Artifact, DriverError> {
    let mut csv = String::from("name,dim,generators,checksum\n");
    let mut entries = Vec::new();
    let mut summary = String::new();
    for which in [BuiltinDataset::G2EllipticSurface, BuiltinDataset::Sl2Sanity] {
        let g = load_builtin(which)?;
        let labels = g.labels().join(" ");
        let _ = writeln!(csv, "{},{},{},{}", g.name, g.dim, labels, which.expected_checksum());
        let _ = writeln!(summary, "{} (dim {}): {}", g.name, g.dim, labels);
        entries.push(json!({
            "name": g.name,
            "dim": g.dim,
            "generators": g.labels(),
            "checksum": which.expected_checksum(),
            "metadata": g.metadata,
        }));
    }
    Ok(Artifact {
        checks_passed: true,
        checksum: None,
        body: object(json!({ "datasets": entries })),
        csv: Some(csv),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, DriverError> {
        let argv = std::iter::once("g2lyap").chain(args.iter().copied());
        parse_run_config_with(argv, None)
    }

    #[test]
    fn estimate_round_trip() {
        let c = parse(&["estimate", "--dataset", "g2-elliptic-surface", "--steps", "1000000", "--seed", "42"]).unwrap();
        match &c.command {
            Command::Estimate { dataset, walk } => {
                assert_eq!(dataset, "g2-elliptic-surface");
                assert_eq!(walk.steps, 1_000_000);
                assert_eq!(walk.master_seed, 42);
                assert_eq!(walk.blocks, 20);
                assert_eq!(walk.walk_kind, WalkKind::NonBacktracking);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.tol_sigma, 3.0);
        let echo = serde_json::to_value(&c).unwrap();
        assert_eq!(echo["subcommand"], "estimate");
        assert_eq!(echo["walk"]["master_seed"], 42);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let err = parse(&["frobnicate"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_or_unknown_dataset() {
        assert_eq!(parse(&["verify"]).unwrap_err().exit_code(), 2);
        assert_eq!(parse(&["verify", "--dataset", "no-such-thing"]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn malformed_numbers() {
        assert!(parse(&["estimate", "--dataset", "sl2-sanity", "--steps", "lots"]).is_err());
        assert!(parse(&["predict", "--gamma", "2,x,-3"]).is_err());
        assert!(parse(&["estimate", "--dataset", "sl2-sanity", "--steps", "1001"]).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        fs::write(&file, "dataset = \"sl2-sanity\"\nsteps = 100000\nseed = 7\nblocks = 10\n").unwrap();
        let c = parse(&["estimate", "--config", file.to_str().unwrap(), "--steps", "5000"]).unwrap();
        match c.command {
            Command::Estimate { dataset, walk } => {
                assert_eq!(dataset, "sl2-sanity");
                assert_eq!(walk.steps, 5000);
                assert_eq!(walk.master_seed, 7);
                assert_eq!(walk.blocks, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_file_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        fs::write(&file, "dataset = \"sl2-sanity\"\ncolour = 3\n").unwrap();
        let err = parse(&["estimate", "--config", file.to_str().unwrap()]).unwrap_err();
        assert!(matches!(err, DriverError::ConfigFile { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn output_dir_precedence() {
        let argv = ["g2lyap", "datasets"];
        let c = parse_run_config_with(argv, Some(PathBuf::from("/tmp/env-out"))).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("/tmp/env-out"));
        let c = parse_run_config_with(["g2lyap", "datasets", "--out", "here"], Some(PathBuf::from("/tmp/env-out"))).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("here"));
        assert_eq!(parse(&["datasets"]).unwrap().out_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    fn run_in(dir: &Path, args: &[&str]) -> Outcome {
        let mut c = parse(args).unwrap();
        c.out_dir = dir.to_path_buf();
        execute(&c).unwrap()
    }

    #[test]
    fn formula_sum() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_in(dir.path(), &["formula", "--genus", "0", "--punctures", "4", "--degree", "1"]);
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.payload["sum"], "1");
        assert!(o.csv_path.is_none());
        let on_disk: Value = serde_json::from_str(&fs::read_to_string(&o.json_path).unwrap()).unwrap();
        assert_eq!(on_disk["sum"], "1");
    }

    #[test]
    fn formula_non_hyperbolic_fails() {
        let c = parse(&["formula", "--genus", "0", "--punctures", "2", "--degree", "1"]).unwrap();
        let err = execute(&c).unwrap_err();
        assert!(err.to_string().starts_with("hodge_formulas:"));
    }

    #[test]
    fn predict_standard() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_in(dir.path(), &["predict", "--gamma", "2,1,-3", "--rep", "standard"]);
        let spectrum: Vec<&str> = o.payload["spectrum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(spectrum, ["5", "4", "1", "0", "-1", "-4", "-5"]);
        let csv = fs::read_to_string(o.csv_path.unwrap()).unwrap();
        assert!(csv.starts_with("index,value\n1,5\n"));
    }

    #[test]
    fn recover_exact() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_in(dir.path(), &["recover", "--exponents", "5,4,1"]);
        assert_eq!(o.payload["gamma"], json!(["2", "1", "-3"]));
    }

    #[test]
    fn verify_writes_report() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_in(dir.path(), &["verify", "--dataset", "sl2-sanity"]);
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.payload["report"]["alternating_form_dimension"], 1);
        assert_eq!(o.payload["checksum"], BuiltinDataset::Sl2Sanity.expected_checksum());
        assert_eq!(o.payload["config"]["dataset"], "sl2-sanity");
    }

    #[test]
    fn estimate_is_reproducible_and_reloadable() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["estimate", "--dataset", "sl2-sanity", "--steps", "20000", "--blocks", "4", "--seed", "3"];
        let a = run_in(dir.path(), &args);
        let b = run_in(dir.path(), &args);
        let strip = |mut v: Value| {
            v.as_object_mut().unwrap().remove("timestamp");
            v
        };
        assert_eq!(strip(a.payload.clone()), strip(b.payload));
        let loaded = load_estimate(&a.json_path).unwrap();
        assert_eq!(loaded.config.master_seed, 3);
        assert_eq!(loaded.block_estimates.len(), 4);
        assert_eq!(a.payload["diagnostics"]["hints"]["expect_symmetry"], true);
        assert!(fs::read_to_string(a.csv_path.unwrap()).unwrap().starts_with("index,value,std_error\n"));
    }

    #[test]
    fn datasets_listing() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_in(dir.path(), &["datasets"]);
        assert_eq!(o.payload["datasets"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn estimate_with_scale_needs_scale() {
        assert!(parse(&["formula", "--profile", "p.json", "--k", "1", "--estimate", "e.json"]).is_err());
        assert!(parse(&["formula", "--profile", "p.json"]).is_err());
        assert!(parse(&["formula", "--genus", "0"]).is_err());
    }
}
