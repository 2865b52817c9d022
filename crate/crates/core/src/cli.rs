//! Command-line front end.
//!
//! Every subcommand reads its settings from flags, optionally seeded from a
//! flat `key = value` file given with `--config`. Flags given on the command
//! line override the file. Keys are flag names with `-` or `_`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{
    build_candidate_lists, generate_synthetic_corpus, load_corpus, write_corpus, CandidateList, Corpus, CorpusPaths,
    ListOptions, LoadError, PlantedFeature, PlantedSignal, SynthConfig,
};
use crate::eval::{ablation, cross_project, prepare, run_experiment, EvalConfig, EvalError, EvalReport, FoldOrder, Method};
use crate::features::{build_hashed_store, document_texts, FeatureError, FeatureGroup, FeatureRegistry, Featurizer, Resources};
use crate::ltr::{rank, train, LabeledList, LtrError, Objective, RankItem, RankingModel, TrainConfig};
use crate::simtext::{load_embeddings, EmbeddingStore, SimError};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other failure
  2  usage or configuration error
  3  missing input file
  4  input violates its schema (corpus JSONL, embedding file, model JSON)
  5  model was trained against a different feature registry

Errors are printed to stderr as one line:
  issuerank: error code=<n> kind=<kind> message=<JSON string>";

#[derive(Debug, Parser)]
#[command(name = "issuerank", version, about = "Rank open issues for project newcomers", after_help = EXIT_CODES)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat key = value settings file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Raise log verbosity (-v info, -vv debug). RUST_LOG also works.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Validate corpus dumps and write a load report.
    Ingest(IngestArgs),
    /// Write feature vectors for every candidate list.
    Featurize(FeaturizeArgs),
    /// Train a model on all lists, validating on the most recent ones.
    Train(TrainArgs),
    /// Print the candidates of one list in ranked order with scores.
    Rank(RankArgs),
    /// Sliding-window evaluation over chronological folds.
    Evaluate(EvalArgs),
    /// Sliding-window evaluation with one feature group removed.
    Ablate(AblateArgs),
    /// Cross-validation over held-out projects.
    Crossproject(CrossArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Print the feature registry as CSV.
    Registry(RegistryArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Directory with issues.jsonl, developers.jsonl, projects.jsonl and lists.jsonl.
    #[arg(long, value_name = "DIR")]
    pub corpus: PathBuf,
    /// PFIEMB1 embedding file. Hashed TF-IDF vectors are used when absent.
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Stop-word list replacing the bundled one.
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
    /// Sentiment lexicon (word<TAB>polarity) replacing the bundled one.
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Label category patterns (TOML) replacing the bundled ones.
    #[arg(long, value_name = "FILE")]
    pub label_categories: Option<PathBuf>,
    /// Lists with fewer candidates are left out.
    #[arg(long, default_value_t = ListOptions::default().min_candidates)]
    pub min_candidates: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = TrainConfig::default().n_trees)]
    pub n_trees: usize,
    #[arg(long, default_value_t = TrainConfig::default().max_leaves)]
    pub max_leaves: usize,
    #[arg(long, default_value_t = TrainConfig::default().min_samples_leaf)]
    pub min_samples_leaf: usize,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().sigma)]
    pub sigma: f64,
    /// Stop after this many trees without validation improvement (0 disables).
    #[arg(long, default_value_t = TrainConfig::default().early_stopping_rounds)]
    pub early_stopping_rounds: usize,
    /// lambdarank or pointwise_logloss.
    #[arg(long, default_value = "lambdarank")]
    pub objective: Objective,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl ModelArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            n_trees: self.n_trees,
            max_leaves: self.max_leaves,
            min_samples_leaf: self.min_samples_leaf,
            learning_rate: self.learning_rate,
            sigma: self.sigma,
            early_stopping_rounds: self.early_stopping_rounds,
            seed: self.seed,
            objective: self.objective,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Rebuild candidate lists from the issues and write them to the output
    /// directory. lists.jsonl must still exist but may be empty.
    #[arg(long)]
    pub rebuild_lists: bool,
    #[arg(long, default_value_t = ListOptions::default().min_candidates)]
    pub min_candidates: usize,
    /// Resolvers with at most this many earlier events in the project count as newcomers.
    #[arg(long, default_value_t = ListOptions::default().newcomer_max_prior_events)]
    pub newcomer_max_prior_events: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Also write every document's plain text as JSONL {id, text}, the input
    /// of the embedding exporter.
    #[arg(long, value_name = "FILE")]
    pub dump_texts: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Share of the most recent lists held out for early stopping.
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model JSON written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Id of the list (its first-issue id) to rank.
    #[arg(long, value_name = "ID")]
    pub list: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ProtocolArgs {
    /// lambdamart, pointwise, random or gfirandom.
    #[arg(long, default_value = "lambdamart")]
    pub method: Method,
    #[arg(long, default_value_t = 20)]
    pub n_folds: usize,
    /// asc trains on the past; desc reproduces the literal reverse order.
    #[arg(long, default_value = "asc")]
    pub fold_order: FoldOrder,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Group to drop (Cont, Dom, Gener, Act, Senti, IssCont, IssBack, with or
    /// without a `no` prefix), or `all` for all seven.
    #[arg(long, default_value = "all")]
    pub group: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CrossArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SynthConfig::default().n_projects)]
    pub projects: usize,
    #[arg(long, default_value_t = SynthConfig::default().n_lists)]
    pub lists: usize,
    #[arg(long, default_value_t = SynthConfig::default().median_list_size)]
    pub median_list_size: usize,
    /// Plant a learnable signal in one feature: pr_jac or reporter_commits.
    #[arg(long, value_parser = parse_planted)]
    pub planted: Option<PlantedFeature>,
    /// Probability that a list ignores the planted signal.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = SynthConfig::default().gfi_rate_positive)]
    pub gfi_rate_positive: f64,
    #[arg(long, default_value_t = SynthConfig::default().gfi_rate_negative)]
    pub gfi_rate_negative: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RegistryArgs {
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_planted(s: &str) -> Result<PlantedFeature, String> {
    [PlantedFeature::PrJaccard, PlantedFeature::ReporterCommits]
        .into_iter()
        .find(|p| p.feature_name() == s)
        .ok_or_else(|| format!("expected pr_jac or reporter_commits, got {s:?}"))
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code, kind, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::new(2, "usage", message)
    }

    fn other(message: impl fmt::Display) -> Self {
        CliError::new(1, "other", message.to_string())
    }

    fn io(path: &Path, e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::NotFound {
            CliError::new(3, "missing_file", format!("{}: {e}", path.display()))
        } else {
            CliError::new(1, "io", format!("{}: {e}", path.display()))
        }
    }

    /// The single stderr line.
    pub fn line(&self) -> String {
        let message = serde_json::to_string(&self.message).expect("string serializes");
        format!("issuerank: error code={} kind={} message={message}", self.code, self.kind)
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { ref source, .. } if source.kind() == io::ErrorKind::NotFound => {
                CliError::new(3, "missing_file", e.to_string())
            }
            LoadError::Io { .. } => CliError::new(1, "io", e.to_string()),
            LoadError::Parse { .. } | LoadError::Duplicate { .. } => CliError::new(4, "schema", e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io { ref source, .. } if source.kind() == io::ErrorKind::NotFound => {
                CliError::new(3, "missing_file", e.to_string())
            }
            SimError::Io { .. } => CliError::new(1, "io", e.to_string()),
            _ => CliError::new(4, "schema", e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        let message = e.to_string();
        CliError { message, ..CliError::from(e.source) }
    }
}

impl From<LtrError> for CliError {
    fn from(e: LtrError) -> Self {
        match e {
            LtrError::RegistryMismatch { .. } => CliError::new(5, "registry_mismatch", e.to_string()),
            LtrError::Model(_) => CliError::new(4, "schema", e.to_string()),
            LtrError::Config(_) => CliError::usage(e.to_string()),
            LtrError::EmptyTraining | LtrError::Data(_) => CliError::other(e),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Feature(f) => f.into(),
            EvalError::Ltr(l) => l.into(),
            EvalError::TooFewLists { .. } => CliError::usage(e.to_string()),
            _ => CliError::other(e),
        }
    }
}

/// Parses a flat settings file: `key = value` per line, `#` comments.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push((key, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts settings from the config file right after the subcommand name, so
/// that later command-line flags override them.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let pairs = parse_config(&text).map_err(|m| CliError::usage(format!("{}: {m}", path.display())))?;

    let root = Cli::command();
    let Some(pos) = args.iter().position(|a| root.find_subcommand(a.to_string_lossy().as_ref()).is_some()) else {
        return Ok(args);
    };
    let sub = root.find_subcommand(args[pos].to_string_lossy().as_ref()).expect("found above");
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let find = |c: &clap::Command| c.get_arguments().find(|a| a.get_long() == Some(key.as_str())).cloned();
        let Some(arg) = find(sub).or_else(|| find(&root)) else {
            let known_elsewhere = root.get_subcommands().any(|c| find(c).is_some());
            if known_elsewhere {
                continue;
            }
            return Err(CliError::usage(format!("{}: unknown setting {key:?}", path.display())));
        };
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::usage(format!("{}: {key} expects true or false", path.display()))),
            },
            _ => injected.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    let mut merged = args[..=pos].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

/// First 16 hex digits of the SHA-256 of the resolved settings, leaving
/// out output locations and worker count.
pub fn config_hash(command: &Command) -> String {
    let json = serde_json::to_string(command).expect("settings serialize");
    Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let result = merge_config(args).and_then(|args| {
        Cli::try_parse_from(args).map_err(|e| {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                CliError::new(0, "help", "")
            } else {
                let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                CliError::usage(first)
            }
        })
    });
    let result = result.and_then(|cli| {
        init_logging(cli.verbose);
        if let Some(n) = cli.jobs {
            if n == 0 {
                return Err(CliError::usage("--jobs must be at least 1"));
            }
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the worker pool: {e}");
            }
        }
        dispatch(&cli.command)
    });
    match result {
        Ok(()) => 0,
        Err(e) if e.code == 0 => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.code
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let hash = config_hash(command);
    match command {
        Command::Ingest(a) => ingest(a, &hash),
        Command::Featurize(a) => featurize(a, &hash),
        Command::Train(a) => train_cmd(a, &hash),
        Command::Rank(a) => rank_cmd(a),
        Command::Evaluate(a) => evaluate(a, &hash, Experiment::Sliding),
        Command::Ablate(a) => {
            let groups: Vec<FeatureGroup> = if a.group.eq_ignore_ascii_case("all") {
                FeatureGroup::ALL.to_vec()
            } else {
                vec![a.group.parse().map_err(CliError::usage)?]
            };
            evaluate(&a.eval, &hash, Experiment::Ablate(groups))
        }
        Command::Crossproject(a) => evaluate(&a.eval, &hash, Experiment::Cross(a.folds)),
        Command::Synth(a) => synth(a, &hash),
        Command::Registry(a) => {
            let csv = FeatureRegistry::standard().to_csv();
            match &a.out {
                Some(p) => write_file(p, csv.as_bytes()),
                None => io::stdout().write_all(csv.as_bytes()).map_err(CliError::other),
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    seed: Option<u64>,
    version: &'a str,
    files: Vec<String>,
}

/// Writes `manifest.json` next to a command's outputs.
fn write_manifest(dir: &Path, command: &str, hash: &str, seed: Option<u64>, files: &[&str]) -> Result<(), CliError> {
    let m = Manifest {
        command,
        config_hash: hash,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        files: files.iter().map(|f| f.to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
    write_file(&dir.join("manifest.json"), json.as_bytes())
}

/// Corpus, resources and embeddings for one run.
struct Loaded {
    corpus: Corpus,
    resources: Resources,
    store: EmbeddingStore,
}

impl Loaded {
    fn featurizer(&self) -> Featurizer<'_> {
        Featurizer::new(&self.corpus, &self.store, &self.resources)
    }

    /// Lists with at least `min` candidates, in file order.
    fn lists(&self, min: usize) -> Vec<CandidateList> {
        let kept: Vec<CandidateList> =
            self.corpus.lists.iter().filter(|l| l.candidate_ids.len() >= min).cloned().collect();
        if kept.len() < self.corpus.lists.len() {
            info!("{} lists below {min} candidates left out", self.corpus.lists.len() - kept.len());
        }
        kept
    }
}

fn load(a: &InputArgs) -> Result<Loaded, CliError> {
    for p in [&a.stopwords, &a.lexicon, &a.label_categories].into_iter().flatten() {
        if !p.exists() {
            return Err(CliError::new(3, "missing_file", format!("{}: not found", p.display())));
        }
    }
    let resources = Resources::load(a.stopwords.as_deref(), a.lexicon.as_deref(), a.label_categories.as_deref())
        .map_err(|m| CliError::new(4, "schema", m))?;
    let (corpus, report) = load_corpus(&CorpusPaths::in_dir(&a.corpus))?;
    info!(
        "loaded {} issues, {} developers, {} projects, {} lists ({} records rejected)",
        report.issues,
        report.developers,
        report.projects,
        report.lists,
        report.rejected.len()
    );
    let store = match &a.embeddings {
        Some(p) => load_embeddings(p)?,
        None => build_hashed_store(&corpus, &resources.stop),
    };
    Ok(Loaded { corpus, resources, store })
}

fn ingest(a: &IngestArgs, hash: &str) -> Result<(), CliError> {
    let (corpus, report) = load_corpus(&CorpusPaths::in_dir(&a.corpus))?;
    create_dir(&a.out)?;
    let mut files = vec!["load_report.json"];
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_file(&a.out.join("load_report.json"), json.as_bytes())?;
    if a.rebuild_lists {
        let opts = ListOptions { min_candidates: a.min_candidates, newcomer_max_prior_events: a.newcomer_max_prior_events };
        let lists = build_candidate_lists(&corpus, opts);
        let mut out = String::new();
        for l in &lists {
            out.push_str(&serde_json::to_string(l).expect("list serializes"));
            out.push('\n');
        }
        write_file(&a.out.join("lists.jsonl"), out.as_bytes())?;
        files.push("lists.jsonl");
        info!("rebuilt {} candidate lists", lists.len());
    }
    write_manifest(&a.out, "ingest", hash, None, &files)
}

#[derive(Serialize)]
struct CandidateRow<'a> {
    id: &'a str,
    positive: bool,
    values: &'a [f64],
}

#[derive(Serialize)]
struct ListRow<'a> {
    fi_id: &'a str,
    registry_version: &'a str,
    candidates: Vec<CandidateRow<'a>>,
}

#[derive(Serialize)]
struct TextRow<'a> {
    id: &'a str,
    text: &'a str,
}

fn featurize(a: &FeaturizeArgs, hash: &str) -> Result<(), CliError> {
    let data = load(&a.input)?;
    let f = data.featurizer();
    let lists = data.lists(a.input.min_candidates);
    let rows = f.featurize_lists(&lists)?;
    create_dir(&a.out)?;
    let path = a.out.join("features.jsonl");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for (l, vectors) in lists.iter().zip(&rows) {
        let row = ListRow {
            fi_id: &l.fi_id,
            registry_version: f.registry.version(),
            candidates: l
                .candidate_ids
                .iter()
                .zip(vectors)
                .map(|(id, v)| CandidateRow { id, positive: *id == l.fi_id, values: &v.values })
                .collect(),
        };
        serde_json::to_writer(&mut w, &row).map_err(CliError::other)?;
        w.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    write_file(&a.out.join("registry.csv"), f.registry.to_csv().as_bytes())?;
    if let Some(texts) = &a.dump_texts {
        let mut out = String::new();
        for (id, text) in document_texts(&data.corpus) {
            out.push_str(&serde_json::to_string(&TextRow { id: &id, text: &text }).expect("row serializes"));
            out.push('\n');
        }
        write_file(texts, out.as_bytes())?;
    }
    write_manifest(&a.out, "featurize", hash, None, &["features.jsonl", "registry.csv"])
}

fn labeled(f: &Featurizer<'_>, lists: &[CandidateList]) -> Result<Vec<LabeledList>, CliError> {
    let rows = f.featurize_lists(lists)?;
    lists
        .iter()
        .zip(rows)
        .map(|(l, features)| {
            let positive = l
                .positive_index()
                .ok_or_else(|| CliError::other(format!("list {} has no positive among its candidates", l.fi_id)))?;
            Ok(LabeledList { features, positive })
        })
        .collect()
}

fn train_cmd(a: &TrainArgs, hash: &str) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&a.val_fraction) {
        return Err(CliError::usage("--val-fraction must be in [0, 1)"));
    }
    let data = load(&a.input)?;
    let mut lists = data.lists(a.input.min_candidates);
    lists.sort_by(|x, y| (x.cutoff, &x.fi_id).cmp(&(y.cutoff, &y.fi_id)));
    let labeled = labeled(&data.featurizer(), &lists)?;
    let n_val = ((labeled.len() as f64) * a.val_fraction).round() as usize;
    let (tr, va) = labeled.split_at(labeled.len() - n_val.min(labeled.len().saturating_sub(1)));
    let model = train(&tr.iter().collect::<Vec<_>>(), &va.iter().collect::<Vec<_>>(), &a.model.train_config())?;
    info!("trained {} trees on {} lists ({} validation)", model.trees.len(), tr.len(), va.len());
    create_dir(&a.out)?;
    write_file(&a.out.join("model.json"), (model.to_json() + "\n").as_bytes())?;
    write_manifest(&a.out, "train", hash, Some(a.model.seed), &["model.json"])
}

fn rank_cmd(a: &RankArgs) -> Result<(), CliError> {
    let data = load(&a.input)?;
    let f = data.featurizer();
    let text = fs::read_to_string(&a.model).map_err(|e| CliError::io(&a.model, e))?;
    let model = RankingModel::from_json(&text, f.registry.version())?;
    let list = data
        .corpus
        .lists
        .iter()
        .find(|l| l.fi_id == a.list)
        .ok_or_else(|| CliError::new(1, "unknown_list", format!("no list with id {:?}", a.list)))?;
    let vectors = f.featurize_list(list)?;
    let mut items = Vec::with_capacity(vectors.len());
    for (id, v) in list.candidate_ids.iter().zip(&vectors) {
        let issue = data.corpus.issue(id).expect("lists are checked at load");
        items.push(RankItem { id, created_at: issue.created_at, features: v });
    }
    let ranked = rank(&model, &items)?;
    let mut out = io::stdout().lock();
    for (i, (id, score)) in ranked.iter().enumerate() {
        writeln!(out, "{}\t{id}\t{score:.6}", i + 1).map_err(CliError::other)?;
    }
    Ok(())
}

enum Experiment {
    Sliding,
    Ablate(Vec<FeatureGroup>),
    Cross(usize),
}

fn evaluate(a: &EvalArgs, hash: &str, experiment: Experiment) -> Result<(), CliError> {
    let data = load(&a.input)?;
    let lists = data.lists(a.input.min_candidates);
    let prepared = prepare(&data.corpus, &lists, &data.featurizer())?;
    let cfg = EvalConfig {
        n_folds: a.protocol.n_folds,
        fold_order: a.protocol.fold_order,
        method: a.protocol.method,
        seed: a.model.seed,
        train: a.model.train_config(),
    };
    let runs: Vec<(String, EvalReport)> = match experiment {
        Experiment::Sliding => vec![("report".into(), run_experiment(&prepared, &cfg)?)],
        Experiment::Ablate(groups) => groups
            .into_iter()
            .map(|g| Ok((format!("report_no{g}"), ablation(&prepared, &cfg, g)?)))
            .collect::<Result<_, CliError>>()?,
        Experiment::Cross(k) => vec![("crossproject".into(), cross_project(&prepared, &cfg, k)?)],
    };
    create_dir(&a.out)?;
    let mut files = Vec::new();
    for (stem, mut report) in runs {
        report.config_hash = hash.to_string();
        info!("{stem}: mean R@1 {:.4}, median FH {}", report.mean.r_at_1, report.median.fh);
        for (name, body) in [
            (format!("{stem}.csv"), report.to_csv()),
            (format!("{stem}.json"), report.to_json() + "\n"),
            (format!("{stem}_ranks.csv"), report.ranks_csv()),
        ] {
            write_file(&a.out.join(&name), body.as_bytes())?;
            files.push(name);
        }
    }
    let names: Vec<&str> = files.iter().map(String::as_str).collect();
    write_manifest(&a.out, "evaluate", hash, Some(cfg.seed), &names)
}

fn synth(a: &SynthArgs, hash: &str) -> Result<(), CliError> {
    let cfg = SynthConfig {
        seed: a.seed,
        n_projects: a.projects,
        n_lists: a.lists,
        median_list_size: a.median_list_size,
        planted: a.planted.map(|feature| PlantedSignal { feature, noise: a.noise }),
        gfi_rate_positive: a.gfi_rate_positive,
        gfi_rate_negative: a.gfi_rate_negative,
    };
    let corpus = generate_synthetic_corpus(&cfg);
    create_dir(&a.out)?;
    write_corpus(&corpus, &CorpusPaths::in_dir(&a.out)).map_err(|e| CliError::io(&a.out, e))?;
    write_manifest(
        &a.out,
        "synth",
        hash,
        Some(a.seed),
        &["issues.jsonl", "developers.jsonl", "projects.jsonl", "lists.jsonl"],
    )
}
