//! Command-line pipeline: stats, inject, detect, evaluate and synth.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use xmodal_core::confident::LabelIssueDoc;
use xmodal_core::io::{load_dataset, load_mask, read_json, save_dataset, save_mask, write_json};
use xmodal_core::shapley::ValuationDoc;
use xmodal_core::synth::{product_catalog, SynthConfig};
use xmodal_core::*;

pub use config::{Detector, RunConfig};

/// Why a command failed. Configuration problems exit with 2, data problems
/// with 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Config(String),
    Data(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xmodal", version, about = "Detect and repair cross-modal errors in image-aligned tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-column value statistics.
    Stats(DataArgs),
    /// Inject seeded categorical errors and write the corrupted table and mask.
    Inject(InjectArgs),
    /// Run a detector once per column and write the flagged rows.
    Detect(DetectArgs),
    /// Score a flags file against an error mask.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic product catalogue with clustered embeddings.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// JSON file with `free_text` and `correlated_groups`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Mark a column as free text (repeatable).
    #[arg(long = "free-text")]
    pub free_text: Vec<String>,
    /// Correlated group as NAME=COL,COL (repeatable).
    #[arg(long)]
    pub group: Vec<String>,
    /// Comma-separated columns to work on.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long = "row-fraction")]
    pub row_fraction: Option<f64>,
    /// Allow injected values to form unobserved pairs in correlated groups.
    #[arg(long = "no-pair-constraint")]
    pub no_pair_constraint: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub detector: Option<Detector>,
    /// table, image or both.
    #[arg(long)]
    pub modality: Option<Modality>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Clean validation table (knn-shapley only).
    #[arg(long = "clean-table")]
    pub clean_table: Option<PathBuf>,
    #[arg(long = "clean-embeddings")]
    pub clean_embeddings: Option<PathBuf>,
    /// Precomputed probabilities as COLUMN=PATH (confident learning only).
    #[arg(long)]
    pub probabilities: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub flags: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Output of `detect`, input of `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagsDoc {
    pub detector: Detector,
    pub modality: Modality,
    pub n_rows: usize,
    pub columns: Vec<ColumnFlags>,
    /// Rows flagged under any column.
    pub tuple: Vec<RowId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFlags {
    pub column: String,
    pub flagged: Vec<RowId>,
    /// Suggested value per flagged row, when the detector proposes one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub repairs: BTreeMap<RowId, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub n_rows: usize,
    pub embedding_dim: usize,
    pub columns: Vec<ColumnStats>,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Stats(a) => cmd_stats(&a),
        Command::Inject(a) => cmd_inject(&a),
        Command::Detect(a) => cmd_detect(&a),
        Command::Evaluate(a) => cmd_evaluate(&a.flags, &a.mask, &a.out),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn base_config(a: &DataArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &a.table {
        cfg.table = Some(p.clone());
    }
    if let Some(p) = &a.embeddings {
        cfg.embeddings = Some(p.clone());
    }
    if let Some(p) = &a.schema {
        cfg.schema = read_json(p).map_err(|e| Failure::Config(e.to_string()))?;
    }
    for name in &a.free_text {
        if !cfg.schema.free_text.contains(name) {
            cfg.schema.free_text.push(name.clone());
        }
    }
    for arg in &a.group {
        let (name, members) = split_assignment(arg, "--group")?;
        cfg.schema.correlated_groups.insert(
            name.to_string(),
            members.split(',').map(str::to_string).collect(),
        );
    }
    if !a.columns.is_empty() {
        cfg.columns = a.columns.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = &a.out {
        cfg.out = Some(p.clone());
    }
    Ok(cfg)
}

fn split_assignment<'a>(arg: &'a str, flag: &str) -> Result<(&'a str, &'a str), Failure> {
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k, v)),
        _ => Err(Failure::Config(format!("{flag} expects NAME=VALUE, got `{arg}`"))),
    }
}

fn load(table: &Path, embeddings: &Path, schema: &SchemaOverrides) -> Result<AlignedDataset, Failure> {
    let ds = load_dataset(table, embeddings)?;
    Ok(ds.apply_overrides(schema)?)
}

fn target_columns(cfg: &RunConfig, ds: &AlignedDataset) -> Result<Vec<String>, Failure> {
    if cfg.columns.is_empty() {
        return Ok(ds
            .columns()
            .iter()
            .filter(|c| c.is_categorical())
            .map(|c| c.name.clone())
            .collect());
    }
    for c in &cfg.columns {
        if !ds.schema(c)?.is_categorical() {
            return Err(Failure::Config(format!("column `{c}` is not categorical")));
        }
    }
    Ok(cfg.columns.clone())
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// File-name-safe form of a column name.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn cmd_stats(a: &DataArgs) -> Result<(), Failure> {
    let cfg = base_config(a)?;
    let ds = load(cfg.table()?, cfg.embeddings()?, &cfg.schema)?;
    let names: Vec<String> = if cfg.columns.is_empty() {
        ds.column_names().map(str::to_string).collect()
    } else {
        cfg.columns.clone()
    };
    let columns = names
        .iter()
        .map(|c| column_stats(&ds, c))
        .collect::<Result<Vec<_>>>()?;
    let doc = StatsDoc {
        n_rows: ds.n_rows(),
        embedding_dim: ds.embeddings().dim(),
        columns,
    };
    let text = stats_table(&doc);
    if let Some(out) = &cfg.out {
        create_dir(out)?;
        write_json(&out.join("stats.json"), &doc)?;
        write_text(&out.join("stats.txt"), &text)?;
    }
    print!("{text}");
    Ok(())
}

fn stats_table(doc: &StatsDoc) -> String {
    let width = doc
        .columns
        .iter()
        .map(|c| c.column.len())
        .chain(std::iter::once("Column".len()))
        .max()
        .unwrap_or(0);
    let mut s = format!("rows: {}  embedding dim: {}\n", doc.n_rows, doc.embedding_dim);
    s += &format!("{:<width$}  {:>8}  Most frequent\n", "Column", "Distinct");
    for c in &doc.columns {
        let top: Vec<String> = c
            .sorted_desc()
            .into_iter()
            .take(3)
            .map(|(v, n)| format!("{v} ({n})"))
            .collect();
        s += &format!("{:<width$}  {:>8}  {}\n", c.column, c.distinct_count, top.join(", "));
    }
    s
}

pub fn cmd_inject(a: &InjectArgs) -> Result<(), Failure> {
    let mut cfg = base_config(&a.data)?;
    if let Some(f) = a.row_fraction {
        cfg.row_fraction = f;
    }
    if a.no_pair_constraint {
        cfg.enforce_observed_pairs = false;
    }
    cfg.validate()?;
    let out = cfg.out()?.to_path_buf();
    let clean = load(cfg.table()?, cfg.embeddings()?, &cfg.schema)?;
    let eligible = target_columns(&cfg, &clean)?;
    let propagation: Vec<String> = clean
        .columns()
        .iter()
        .filter(|c| c.propagation_target)
        .map(|c| c.name.clone())
        .collect();
    let mut injection = CorruptionConfig::new(cfg.row_fraction, cfg.seed, eligible).with_propagation(propagation);
    injection.enforce_observed_pairs = cfg.enforce_observed_pairs;
    let (dirty, mask) = inject_errors(&clean, &injection)?;

    create_dir(&out)?;
    save_dataset(&dirty, &out.join("table.csv"), &out.join("embeddings.xmeb"))?;
    save_mask(&out.join("mask.json"), &mask)?;
    println!("injected {} errors into {} rows", mask.len(), dirty.n_rows());
    for (column, count) in xmodal_core::corrupt::entries_per_column(&mask) {
        println!("  {column}: {count}");
    }
    Ok(())
}

enum ColumnOutcome {
    Cl(LabelIssueDoc, Vec<OosWarning>),
    Shapley(ValuationDoc),
}

pub fn cmd_detect(a: &DetectArgs) -> Result<(), Failure> {
    let mut cfg = base_config(&a.data)?;
    if let Some(d) = a.detector {
        cfg.detector = d;
    }
    if let Some(m) = a.modality {
        cfg.modality = m;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(f) = a.folds {
        cfg.folds = f;
    }
    if let Some(p) = &a.clean_table {
        cfg.clean_table = Some(p.clone());
    }
    if let Some(p) = &a.clean_embeddings {
        cfg.clean_embeddings = Some(p.clone());
    }
    cfg.validate()?;
    let mut probability_files = BTreeMap::new();
    for arg in &a.probabilities {
        let (col, path) = split_assignment(arg, "--probabilities")?;
        probability_files.insert(col.to_string(), PathBuf::from(path));
    }
    if cfg.detector == Detector::KnnShapley && !probability_files.is_empty() {
        return Err(Failure::Config("--probabilities only applies to the cl detector".into()));
    }
    let out = cfg.out()?.to_path_buf();
    let dirty = load(cfg.table()?, cfg.embeddings()?, &cfg.schema)?;
    let columns = target_columns(&cfg, &dirty)?;
    for col in probability_files.keys() {
        if !columns.contains(col) {
            return Err(Failure::Config(format!("--probabilities names unused column `{col}`")));
        }
    }
    let clean = match cfg.detector {
        Detector::ConfidentLearning => None,
        Detector::KnnShapley => {
            let (Some(t), Some(e)) = (&cfg.clean_table, &cfg.clean_embeddings) else {
                return Err(Failure::Config(
                    "knn-shapley needs --clean-table and --clean-embeddings".into(),
                ));
            };
            Some(load(t, e, &cfg.schema)?)
        }
    };

    let outcomes: Vec<Result<ColumnOutcome>> = std::thread::scope(|s| {
        let jobs: Vec<_> = columns
            .iter()
            .map(|col| {
                let (cfg, dirty, clean, files) = (&cfg, &dirty, clean.as_ref(), &probability_files);
                s.spawn(move || match clean {
                    None => detect_cl(cfg, dirty, col, files.get(col).map(PathBuf::as_path)),
                    Some(clean) => detect_shapley(cfg, dirty, clean, col),
                })
            })
            .collect();
        jobs.into_iter()
            .map(|j| j.join().expect("detection thread panicked"))
            .collect()
    });

    create_dir(&out)?;
    let mut flags = Vec::with_capacity(columns.len());
    for (col, outcome) in columns.iter().zip(outcomes) {
        match outcome? {
            ColumnOutcome::Cl(doc, warnings) => {
                for w in warnings {
                    let OosWarning::EmptyClassInTrainingFolds { fold, class } = w;
                    eprintln!("warning: {col}: class `{class}` has no training rows for fold {fold}");
                }
                write_json(&out.join(format!("cl-{}.json", slug(col))), &doc)?;
                let mut flagged: Vec<RowId> = doc.flagged.iter().map(|f| f.row).collect();
                flagged.sort_unstable();
                flags.push(ColumnFlags {
                    column: col.clone(),
                    flagged,
                    repairs: doc.flagged.into_iter().map(|f| (f.row, f.suggested)).collect(),
                });
            }
            ColumnOutcome::Shapley(doc) => {
                write_json(&out.join(format!("shapley-{}.json", slug(col))), &doc)?;
                flags.push(ColumnFlags {
                    column: col.clone(),
                    flagged: doc.flagged,
                    repairs: BTreeMap::new(),
                });
            }
        }
    }
    let per_column: BTreeMap<String, BTreeSet<RowId>> = flags
        .iter()
        .map(|f| (f.column.clone(), f.flagged.iter().copied().collect()))
        .collect();
    let doc = FlagsDoc {
        detector: cfg.detector,
        modality: cfg.modality,
        n_rows: dirty.n_rows(),
        tuple: tuple_level_prediction(&per_column).into_iter().collect(),
        columns: flags,
    };
    write_json(&out.join("flags.json"), &doc)?;
    println!(
        "{}: {} of {} rows flagged ({} modality)",
        cfg.detector.as_str(),
        doc.tuple.len(),
        doc.n_rows,
        cfg.modality
    );
    for f in &doc.columns {
        println!("  {}: {}", f.column, f.flagged.len());
    }
    Ok(())
}

fn detect_cl(
    cfg: &RunConfig,
    dirty: &AlignedDataset,
    column: &str,
    probabilities: Option<&Path>,
) -> Result<ColumnOutcome> {
    let (matrix, warnings) = match probabilities {
        Some(path) => (load_probabilities(path, column, dirty)?, Vec::new()),
        None => {
            let view = build_features(dirty, column, cfg.modality)?;
            let oos = knn_oos_probabilities(&view, cfg.k, cfg.folds, cfg.seed)?;
            (oos.matrix, oos.warnings)
        }
    };
    let report = find_label_issues(&matrix)?;
    Ok(ColumnOutcome::Cl(report.to_doc(column, matrix.class_index()), warnings))
}

fn detect_shapley(
    cfg: &RunConfig,
    dirty: &AlignedDataset,
    clean: &AlignedDataset,
    column: &str,
) -> Result<ColumnOutcome> {
    let encoder = FeatureEncoder::fit(&[dirty, clean], column, cfg.modality)?;
    let input = ValuationInput::new(
        LabeledSet::from(encoder.transform(dirty)?),
        LabeledSet::from(encoder.transform(clean)?),
    )?;
    let result = knn_shapley(&input)?;
    Ok(ColumnOutcome::Shapley(result.to_doc(column, dirty.ids())))
}

pub fn cmd_evaluate(flags_path: &Path, mask_path: &Path, out: &Path) -> Result<(), Failure> {
    let flags: FlagsDoc = read_json(flags_path)?;
    let mask = load_mask(mask_path)?;
    let mut columns: Vec<String> = flags.columns.iter().map(|f| f.column.clone()).collect();
    let extra: BTreeSet<&String> = mask.entries.iter().map(|e| &e.column).filter(|c| !columns.contains(c)).collect();
    columns.extend(extra.into_iter().cloned());
    let per_column: BTreeMap<String, BTreeSet<RowId>> = flags
        .columns
        .iter()
        .map(|f| (f.column.clone(), f.flagged.iter().copied().collect()))
        .collect();
    let mut report = per_column_metrics(&per_column, &mask, &columns, flags.n_rows)?;
    report.modality = Some(flags.modality);

    create_dir(out)?;
    let table = report.to_text_table();
    write_json(&out.join("metrics.json"), &report)?;
    write_text(&out.join("metrics.txt"), &table)?;
    print!("{table}");

    let repairs: BTreeMap<(RowId, String), String> = flags
        .columns
        .iter()
        .flat_map(|f| f.repairs.iter().map(|(&r, v)| ((r, f.column.clone()), v.clone())))
        .collect();
    if !repairs.is_empty() {
        let repair = repair_accuracy(&repairs, &mask);
        let text = repair.to_text_table();
        write_json(&out.join("repair.json"), &repair)?;
        write_text(&out.join("repair.txt"), &text)?;
        print!("\n{text}");
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs) -> Result<(), Failure> {
    let config = SynthConfig {
        rows: a.rows,
        classes: a.classes,
        dim: a.dim,
        separation: a.separation,
        seed: a.seed,
    };
    let ds = product_catalog(&config)?;
    create_dir(&a.out)?;
    save_dataset(&ds, &a.out.join("table.csv"), &a.out.join("embeddings.xmeb"))?;
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for c in ds.columns() {
        if let Some(g) = &c.correlated_group {
            groups.entry(g.clone()).or_default().push(c.name.clone());
        }
    }
    let schema = SchemaOverrides {
        free_text: ds
            .columns()
            .iter()
            .filter(|c| !c.is_categorical())
            .map(|c| c.name.clone())
            .collect(),
        correlated_groups: groups,
    };
    write_json(&a.out.join("schema.json"), &schema)?;
    println!("wrote {} rows to {}", ds.n_rows(), a.out.display());
    Ok(())
}
