//! The `confusion` command-line front end. Each subcommand wraps one
//! pipeline stage, writes its artifacts plus a `run_config.json` into the
//! output directory, and exits 0 on success, 2 on bad input and 1 on
//! internal failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, Corpus, Manifest, NeutralPolicy};
use crate::error::{Error, Result};
use crate::eval::{cross_domain_evaluate, cross_validate, emit_report, ReportFormat};
use crate::features::{featurize_corpus, lexicon_hits, FeatureMatrix, FeatureSchema, FeatureVector};
use crate::lexicon::{load_registry, LexiconRegistry};
use crate::models::{load_model, save_model, train, ModelKind, ModelParams, TrainedModel};
use crate::resample::{balance_training_set, SmoteConfig};
use crate::stats::{select_features, ScreeningMode, SelectionConfig, SelectionReport};
use crate::synth::{generate_posts, write_posts_csv, GeneratorConfig, Variant};
use crate::textproc::TokenizedPost;

/// Environment variable naming the default lexicon directory.
pub const LEXICON_ENV: &str = "CONFUSION_LEXICONS";

pub const CORPUS_FILE: &str = "corpus.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const SELECTION_JSON: &str = "selection.json";
pub const SELECTION_CSV: &str = "selection.csv";
pub const MODEL_FILE: &str = "model.json";
pub const CV_JSON: &str = "cv_report.json";
pub const CV_CSV: &str = "cv_report.csv";
pub const CROSSDOMAIN_JSON: &str = "crossdomain_report.json";
pub const CROSSDOMAIN_CSV: &str = "crossdomain_report.csv";
pub const RUN_CONFIG: &str = "run_config.json";

#[derive(Debug, Parser)]
#[command(name = "confusion", version, about = "Detect learner confusion in forum posts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and binarize a corpus; print a summary and cache the corpus.
    Ingest(IngestArgs),
    /// Turn a corpus into a feature CSV.
    Featurize(FeaturizeArgs),
    /// Rank features by effect size and select them.
    Select(SelectArgs),
    /// Balance with SMOTE and train a model on a feature CSV.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation.
    Evaluate(EvaluateArgs),
    /// Train on one domain, test on another.
    Crossdomain(CrossdomainArgs),
    /// Score posts with a saved model (JSON lines on stdout).
    Predict(PredictArgs),
    /// The whole pipeline (ingest, featurize, select, evaluate, train) in one go.
    Run(RunArgs),
    /// Write a planted-signal synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Delimited corpus file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Manifest naming the text/score/domain columns.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Corpus cached by `ingest` (instead of --data).
    #[arg(long, conflicts_with = "data")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NeutralArg::Include)]
    pub neutral: NeutralArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NeutralArg {
    Include,
    Exclude,
}

impl From<NeutralArg> for NeutralPolicy {
    fn from(a: NeutralArg) -> Self {
        match a {
            NeutralArg::Include => NeutralPolicy::IncludeAsConfused,
            NeutralArg::Exclude => NeutralPolicy::Exclude,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LexiconArgs {
    /// Directory of `<category>.txt` lexicons; defaults to $CONFUSION_LEXICONS,
    /// then to the built-in seed lexicons.
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, default_value = "confusion-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SelectionArgs {
    /// Benjamini–Hochberg false discovery rate.
    #[arg(long, default_value_t = 0.05)]
    pub q: f64,
    #[arg(long = "r-threshold", default_value_t = 0.9)]
    pub r_threshold: f64,
    #[arg(long, value_enum, default_value_t = ScreeningArg::Advisory)]
    pub screening: ScreeningArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScreeningArg {
    Off,
    Advisory,
    Strict,
}

impl From<ScreeningArg> for ScreeningMode {
    fn from(a: ScreeningArg) -> Self {
        match a {
            ScreeningArg::Off => ScreeningMode::Off,
            ScreeningArg::Advisory => ScreeningMode::Advisory,
            ScreeningArg::Strict => ScreeningMode::Strict,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long = "model-kind", default_value = "rf")]
    pub model_kind: String,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long = "smote-k", default_value_t = 5)]
    pub smote_k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Selection report whose retained features to train on.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CrossdomainArgs {
    #[arg(long = "train-features")]
    pub train_features: PathBuf,
    #[arg(long = "test-features")]
    pub test_features: PathBuf,
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Leave out features that do not transfer between domains.
    #[arg(long = "drop-incompatible", default_value_t = true, action = ArgAction::Set)]
    pub drop_incompatible: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// A single post to score.
    #[arg(long, conflicts_with = "data")]
    pub text: Option<String>,
    /// A corpus of posts to score; scores are ignored.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::A)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    A,
    B,
}

/// Resolved configuration written beside every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub data: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub neutral_policy: Option<NeutralPolicy>,
    pub selection: Option<SelectionConfig>,
    pub smote: Option<SmoteConfig>,
    pub model: Option<ModelParams>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub drop_incompatible: Option<bool>,
    pub out: PathBuf,
}

impl RunConfig {
    fn new(command: &str, out: &Path) -> Self {
        RunConfig {
            command: command.into(),
            data: None,
            manifest: None,
            inputs: Vec::new(),
            lexicons: None,
            neutral_policy: None,
            selection: None,
            smote: None,
            model: None,
            k: None,
            seed: None,
            drop_incompatible: None,
            out: out.to_path_buf(),
        }
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Lexicon directory from the flag, then the environment, else `None`
/// (built-in seed lexicons).
pub fn lexicon_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(LEXICON_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

pub fn resolve_registry(flag: Option<&Path>) -> Result<(LexiconRegistry, Option<PathBuf>)> {
    match lexicon_dir(flag) {
        Some(dir) => Ok((load_registry(&dir)?, Some(dir))),
        None => Ok((LexiconRegistry::seed(), None)),
    }
}

fn load_data(args: &DataArgs, cfg: &mut RunConfig) -> Result<Corpus> {
    let policy = NeutralPolicy::from(args.neutral);
    cfg.neutral_policy = Some(policy);
    if let Some(cached) = &args.corpus {
        cfg.inputs.push(cached.clone());
        let corpus: Corpus = read_json(cached)?;
        return Ok(corpus.with_policy(policy));
    }
    let data = args
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--data or --corpus is required".into()))?;
    let manifest = match &args.manifest {
        Some(p) => Manifest::from_file(p)?,
        None => Manifest::default(),
    };
    cfg.data = Some(data.clone());
    cfg.manifest = args.manifest.clone();
    load_corpus(data, &manifest, policy)
}

fn smote_config(model: &ModelArgs, seed: u64) -> SmoteConfig {
    SmoteConfig {
        k_neighbors: model.smote_k,
        seed,
        ..Default::default()
    }
}

fn model_params(model: &ModelArgs, seed: u64) -> Result<ModelParams> {
    let kind: ModelKind = model.model_kind.parse()?;
    Ok(ModelParams {
        kind,
        n_trees: model.trees,
        seed,
        ..Default::default()
    })
}

fn selection_config(s: &SelectionArgs, seed: u64) -> SelectionConfig {
    SelectionConfig {
        q: s.q,
        r_threshold: s.r_threshold,
        screening: s.screening.into(),
        seed,
        ..Default::default()
    }
}

/// Features to keep: the retained set of a selection report, or all.
fn apply_selection(matrix: FeatureMatrix, selection: Option<&Path>, cfg: &mut RunConfig) -> Result<FeatureMatrix> {
    let Some(path) = selection else { return Ok(matrix) };
    cfg.inputs.push(path.to_path_buf());
    let report: SelectionReport = read_json(path)?;
    if report.retained.is_empty() {
        return Err(Error::InvalidParameter(format!("selection report {} retains no features", path.display())));
    }
    matrix.project(&report.retained)
}

#[derive(Serialize)]
struct IngestOutput<'a> {
    domain: String,
    neutral_policy: NeutralPolicy,
    summary: &'a crate::corpus::IngestSummary,
    class_counts: crate::corpus::ClassCounts,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let mut cfg = RunConfig::new("ingest", &args.out.out);
    let corpus = load_data(&args.data, &mut cfg)?;
    prepare_out(&args.out.out)?;
    write_json(&corpus, &args.out.out.join(CORPUS_FILE))?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))?;
    print_json(&IngestOutput {
        domain: corpus.domain().to_string(),
        neutral_policy: corpus.policy(),
        summary: corpus.summary(),
        class_counts: corpus.class_counts(),
    })
}

pub fn cmd_featurize(args: &FeaturizeArgs) -> Result<()> {
    let mut cfg = RunConfig::new("featurize", &args.out.out);
    let corpus = load_data(&args.data, &mut cfg)?;
    let (registry, dir) = resolve_registry(args.lexicons.lexicons.as_deref())?;
    cfg.lexicons = dir;
    let matrix = featurize_corpus(&corpus, &registry, &FeatureSchema::for_registry(&registry))?;
    prepare_out(&args.out.out)?;
    matrix.save_csv(args.out.out.join(FEATURES_FILE))?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))
}

fn write_selection(report: &SelectionReport, out: &Path) -> Result<()> {
    write_json(report, &out.join(SELECTION_JSON))?;
    let path = out.join(SELECTION_CSV);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    report.write_csv(io::BufWriter::new(file))
}

pub fn cmd_select(args: &SelectArgs) -> Result<()> {
    let mut cfg = RunConfig::new("select", &args.out.out);
    cfg.inputs.push(args.features.clone());
    let matrix = FeatureMatrix::load_csv(&args.features)?;
    let sel = selection_config(&args.selection, args.seed);
    let report = select_features(&matrix, &sel)?;
    cfg.selection = Some(sel);
    cfg.seed = Some(args.seed);
    prepare_out(&args.out.out)?;
    write_selection(&report, &args.out.out)?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))
}

fn train_balanced(matrix: &FeatureMatrix, params: &ModelParams, smote: &SmoteConfig) -> Result<TrainedModel> {
    train(&balance_training_set(matrix, smote)?, params)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::new("train", &args.out.out);
    cfg.inputs.push(args.features.clone());
    let matrix = apply_selection(FeatureMatrix::load_csv(&args.features)?, args.selection.as_deref(), &mut cfg)?;
    let params = model_params(&args.model, args.seed)?;
    let smote = smote_config(&args.model, args.seed);
    let model = train_balanced(&matrix, &params, &smote)?;
    cfg.model = Some(params);
    cfg.smote = Some(smote);
    cfg.seed = Some(args.seed);
    prepare_out(&args.out.out)?;
    save_model(&model, args.out.out.join(MODEL_FILE))?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))
}

fn write_report(report: &crate::eval::EvaluationReport, out: &Path, json: &str, csv: &str) -> Result<()> {
    emit_report(report, ReportFormat::Json, out.join(json))?;
    emit_report(report, ReportFormat::Csv, out.join(csv))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::new("evaluate", &args.out.out);
    cfg.inputs.push(args.features.clone());
    let matrix = apply_selection(FeatureMatrix::load_csv(&args.features)?, args.selection.as_deref(), &mut cfg)?;
    let params = model_params(&args.model, args.seed)?;
    let smote = smote_config(&args.model, args.seed);
    let report = cross_validate(&matrix, &params, &smote, args.k, args.seed)?;
    cfg.model = Some(params);
    cfg.smote = Some(smote);
    cfg.k = Some(args.k);
    cfg.seed = Some(args.seed);
    prepare_out(&args.out.out)?;
    write_report(&report, &args.out.out, CV_JSON, CV_CSV)?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))
}

pub fn cmd_crossdomain(args: &CrossdomainArgs) -> Result<()> {
    let mut cfg = RunConfig::new("crossdomain", &args.out.out);
    cfg.inputs.extend([args.train_features.clone(), args.test_features.clone()]);
    let train_m = FeatureMatrix::load_csv(&args.train_features)?;
    let test_m = FeatureMatrix::load_csv(&args.test_features)?;
    let retained: Option<Vec<String>> = match &args.selection {
        Some(p) => {
            cfg.inputs.push(p.clone());
            Some(read_json::<SelectionReport>(p)?.retained)
        }
        None => None,
    };
    let params = model_params(&args.model, args.seed)?;
    let smote = smote_config(&args.model, args.seed);
    let report = cross_domain_evaluate(&train_m, &test_m, &params, &smote, retained.as_deref(), args.drop_incompatible)?;
    cfg.model = Some(params);
    cfg.smote = Some(smote);
    cfg.seed = Some(args.seed);
    cfg.drop_incompatible = Some(args.drop_incompatible);
    prepare_out(&args.out.out)?;
    write_report(&report, &args.out.out, CROSSDOMAIN_JSON, CROSSDOMAIN_CSV)?;
    write_json(&cfg, &args.out.out.join(RUN_CONFIG))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconHit {
    pub category: String,
    pub count: usize,
}

/// One line of `predict` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub id: String,
    pub label: crate::corpus::BinaryLabel,
    pub p_confused: f64,
    /// The categories that fired most often, at most three.
    pub top_hits: Vec<LexiconHit>,
}

/// Scores raw texts with a model trained on (a projection of) this
/// registry's feature schema.
pub fn predict_texts(
    model: &TrainedModel,
    registry: &LexiconRegistry,
    posts: &[(String, String)],
) -> Result<Vec<PredictionLine>> {
    let full = FeatureSchema::for_registry(registry);
    let idx: Vec<usize> = model
        .feature_names
        .iter()
        .map(|n| {
            full.index_of(n).ok_or_else(|| Error::SchemaMismatch {
                expected: model.feature_names.join(","),
                found: full.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let schema = FeatureSchema::from_names(model.feature_names.clone())?;
    model.check_schema(&schema)?;
    posts
        .par_iter()
        .map(|(id, text)| {
            let tok = TokenizedPost::new(text);
            let v: FeatureVector = crate::features::featurize_text(id, text, registry).1;
            let values: Vec<f64> = idx.iter().map(|&i| v.values[i]).collect();
            let pred = model.predict(&schema, &FeatureVector { values, ..v })?;
            let mut hits: Vec<LexiconHit> = lexicon_hits(&tok, registry)
                .into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(category, count)| LexiconHit { category, count })
                .collect();
            hits.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
            hits.truncate(3);
            Ok(PredictionLine {
                id: id.clone(),
                label: pred.label,
                p_confused: pred.p_confused,
                top_hits: hits,
            })
        })
        .collect()
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let (registry, _) = resolve_registry(args.lexicons.lexicons.as_deref())?;
    let posts: Vec<(String, String)> = match (&args.text, &args.data) {
        (Some(t), _) => vec![("text".to_string(), t.clone())],
        (None, Some(path)) => {
            let manifest = match &args.manifest {
                Some(p) => Manifest::from_file(p)?,
                None => Manifest::default(),
            };
            load_corpus(path, &manifest, NeutralPolicy::IncludeAsConfused)?
                .posts()
                .iter()
                .map(|p| (p.id.clone(), p.text.clone()))
                .collect()
        }
        (None, None) => return Err(Error::InvalidParameter("--text or --data is required".into())),
    };
    let lines = predict_texts(&model, &registry, &posts)?;
    let mut out = io::BufWriter::new(io::stdout().lock());
    for line in lines {
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
    }
    out.flush().map_err(|e| Error::io("<stdout>", e))
}

/// Ingest, featurize, select, cross-validate on the selected features and
/// train a final model on all rows.
pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let out = &args.out.out;
    let mut cfg = RunConfig::new("run", out);
    let corpus = load_data(&args.data, &mut cfg)?;
    let (registry, dir) = resolve_registry(args.lexicons.lexicons.as_deref())?;
    cfg.lexicons = dir;
    let matrix = featurize_corpus(&corpus, &registry, &FeatureSchema::for_registry(&registry))?;
    let sel = selection_config(&args.selection, args.seed);
    let selection = select_features(&matrix, &sel)?;
    if selection.retained.is_empty() {
        return Err(Error::InsufficientData("feature selection retained no features".into()));
    }
    let selected = matrix.project(&selection.retained)?;
    let params = model_params(&args.model, args.seed)?;
    let smote = smote_config(&args.model, args.seed);
    let mut report = cross_validate(&selected, &params, &smote, args.k, args.seed)?;
    report.config.neutral_policy = Some(corpus.policy());
    let model = train_balanced(&selected, &params, &smote)?;

    cfg.selection = Some(sel);
    cfg.model = Some(params);
    cfg.smote = Some(smote);
    cfg.k = Some(args.k);
    cfg.seed = Some(args.seed);
    prepare_out(out)?;
    write_json(&corpus, &out.join(CORPUS_FILE))?;
    matrix.save_csv(out.join(FEATURES_FILE))?;
    write_selection(&selection, out)?;
    write_report(&report, out, CV_JSON, CV_CSV)?;
    save_model(&model, out.join(MODEL_FILE))?;
    write_json(&cfg, &out.join(RUN_CONFIG))?;
    print_json(&serde_json::json!({
        "class_counts": corpus.class_counts(),
        "retained_features": selection.retained,
        "f1_confused": report.pooled.confused.f1,
        "recall_confused": report.pooled.confused.recall,
        "macro_f1": report.pooled.macro_f1,
    }))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        n_posts: args.n,
        variant: match args.variant {
            VariantArg::A => Variant::A,
            VariantArg::B => Variant::B,
        },
        seed: args.seed,
        ..Default::default()
    };
    write_posts_csv(&generate_posts(&cfg)?, &args.out)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Select(a) => cmd_select(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Crossdomain(a) => cmd_crossdomain(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Run(a) => cmd_run(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Exit status for an outcome: 0 success, 2 input error, 1 otherwise.
pub fn exit_code(result: &Result<()>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn drop_incompatible_defaults_on() {
        let cli = Cli::try_parse_from(["confusion", "crossdomain", "--train-features", "a", "--test-features", "b"]).unwrap();
        let Command::Crossdomain(a) = cli.command else { panic!() };
        assert!(a.drop_incompatible);
        let cli = Cli::try_parse_from([
            "confusion", "crossdomain", "--train-features", "a", "--test-features", "b", "--drop-incompatible", "false",
        ])
        .unwrap();
        let Command::Crossdomain(a) = cli.command else { panic!() };
        assert!(!a.drop_incompatible);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(())), 0);
        assert_eq!(exit_code(&Err(Error::Manifest("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::SingleClass)), 2);
        assert_eq!(exit_code(&Err(Error::NonFinite(f64::NAN))), 1);
    }
}
