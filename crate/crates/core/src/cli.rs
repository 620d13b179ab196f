//! Command-line front end. Each subcommand writes fixed-name artifacts under
//! the output directory and returns their paths.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::ablation::{self, render_report, run_ablation, AblationError, ReportFormat};
use crate::config::{ConfigError, RunConfig};
use crate::dataset::{self, DatasetError};
use crate::heatmap::{self, ChartError, ColorScale};
use crate::nn::{self, Metrics, NnError};
use crate::sensor::build_array;
use crate::thermistor::ThermistorError;

/// Accuracy reported for the physical rig, recorded next to our own metrics.
pub const REFERENCE_ACCURACY_C: f64 = 0.12;

pub const RESOLVED_CONFIG: &str = "resolved_config.json";
pub const DATASET_CSV: &str = "dataset.csv";
pub const MODEL_JSON: &str = "model.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const HISTORY_JSON: &str = "history.json";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Ablation(#[from] AblationError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Thermistor(#[from] ThermistorError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "thermocal", version, about = "Simulate, ingest and calibrate a 32-sensor thermometer array")]
pub struct Cli {
    /// Run configuration (JSON). Defaults apply to anything omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replace every seed in the configuration with this value.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the staircase dataset from the plate and sensor models.
    Simulate,
    /// Convert a serial log into a dataset, optionally subsampled per setpoint.
    Ingest {
        /// Log file; defaults to `dataset.log_path`.
        log: Option<PathBuf>,
    },
    /// Train the network and evaluate it on the held-out split.
    Train {
        /// Dataset CSV; defaults to `dataset.csv_path`, then `<out>/dataset.csv`.
        dataset: Option<PathBuf>,
    },
    /// Train every configured ablation variant on one shared split.
    Ablate { dataset: Option<PathBuf> },
    /// Per-setpoint heatmaps of mean sensor readings.
    Heatmap { dataset: Option<PathBuf> },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<Vec<PathBuf>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed_override {
        cfg.override_seeds(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    match &cli.command {
        Command::Simulate => {}
        Command::Ingest { log } => {
            if let Some(log) = log {
                cfg.dataset.log_path = Some(log.clone());
            }
        }
        Command::Train { dataset } | Command::Ablate { dataset } | Command::Heatmap { dataset } => {
            let path = dataset
                .clone()
                .or_else(|| cfg.dataset.csv_path.clone())
                .unwrap_or_else(|| cfg.output.directory.join(DATASET_CSV));
            cfg.dataset.csv_path = Some(path);
        }
    }
    cfg.validate()?;

    let mut out = Artifacts::new(&cfg.output.directory)?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&cfg, &mut out)?,
        Command::Ingest { .. } => cmd_ingest(&cfg, &mut out)?,
        Command::Train { .. } => cmd_train(&cfg, &mut out)?,
        Command::Ablate { .. } => cmd_ablate(&cfg, &mut out)?,
        Command::Heatmap { .. } => cmd_heatmap(&cfg, &mut out)?,
    }
    out.write(RESOLVED_CONFIG, &cfg.to_sidecar_json())?;
    Ok(out.paths)
}

struct Artifacts {
    dir: PathBuf,
    paths: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), paths: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.paths.push(path);
        Ok(())
    }

    fn write_dataset(&mut self, ds: &dataset::Dataset) -> Result<(), CliError> {
        let path = self.path(DATASET_CSV);
        dataset::write_csv_file(ds, &path)?;
        self.paths.push(path);
        Ok(())
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("artifact serializes") + "\n"
}

fn input_dataset(cfg: &RunConfig) -> Result<dataset::Dataset, CliError> {
    let path = cfg.dataset.csv_path.as_deref().ok_or_else(|| CliError::Usage("no dataset path".into()))?;
    Ok(dataset::read_csv_file(path)?)
}

fn cmd_simulate(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let coeffs = cfg.thermistor.coefficients()?;
    let array = build_array(cfg.array.seed, &cfg.array.defaults);
    let ds = dataset::generate(&array, &cfg.plate.profile, &cfg.plate.protocol, &coeffs, cfg.dataset.seed)?;
    out.write_dataset(&ds)
}

#[derive(Serialize)]
struct IngestSummary {
    source: String,
    complete_frames: usize,
    dropped_frames: usize,
    rows_written: usize,
    per_setpoint: Option<usize>,
}

fn cmd_ingest(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let log = cfg
        .dataset
        .log_path
        .as_deref()
        .ok_or_else(|| CliError::Usage("ingest needs a log file (argument or dataset.log_path)".into()))?;
    let outcome = dataset::ingest_serial_log_file(log)?;
    let ds = match cfg.dataset.subsample {
        Some(s) => dataset::subsample_per_setpoint(&outcome.dataset, s.per_setpoint, s.seed)?,
        None => outcome.dataset,
    };
    out.write_dataset(&ds)?;
    let summary = IngestSummary {
        source: log.display().to_string(),
        complete_frames: outcome.complete_frames,
        dropped_frames: outcome.dropped_frames,
        rows_written: ds.len(),
        per_setpoint: cfg.dataset.subsample.map(|s| s.per_setpoint),
    };
    out.write("ingest_summary.json", &pretty(&summary))
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    schema_version: u32,
    dataset_hash: String,
    config_hash: String,
    train_size: usize,
    test_size: usize,
    epochs: usize,
    final_train_loss: Option<f64>,
    final_test_loss: Option<f64>,
    reference_accuracy_c: f64,
    #[serde(flatten)]
    metrics: &'a Metrics,
}

fn cmd_train(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let data = input_dataset(cfg)?;
    let (train, test) = dataset::split(&data, cfg.dataset.train_fraction, cfg.dataset.split_seed)?;
    let arch = cfg.architecture(data.arity());
    let (model, history) = nn::train(&train, &test, &arch, &cfg.train.params)?;
    let predictions = model.predict_dataset(&test);
    let metrics = nn::evaluate_predictions(&test, &predictions, &model.scaler.label)?;

    out.write(MODEL_JSON, &nn::model_to_json(&model))?;
    out.write(HISTORY_JSON, &pretty(&history))?;
    let doc = MetricsDocument {
        schema_version: 1,
        dataset_hash: data.content_hash(),
        config_hash: cfg.hash(),
        train_size: train.len(),
        test_size: test.len(),
        epochs: history.epochs(),
        final_train_loss: history.train_loss.last().copied(),
        final_test_loss: history.test_loss.last().copied(),
        reference_accuracy_c: REFERENCE_ACCURACY_C,
        metrics: &metrics,
    };
    out.write(METRICS_JSON, &pretty(&doc))?;
    out.write("prediction_scatter.svg", &heatmap::emit_prediction_scatter_svg(&test, &predictions)?)?;
    out.write("loss_curves.svg", &heatmap::emit_loss_curves_svg(&[("baseline", &history)], true)?)
}

fn cmd_ablate(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let data = input_dataset(cfg)?;
    let variants = cfg.variants()?;
    let mut run = run_ablation(&data, &variants, &cfg.ablation_settings())?;
    run.report.metadata.config_hash = cfg.hash();

    out.write(REPORT_JSON, &render_report(&run.report, ReportFormat::Json))?;
    out.write("report.txt", &render_report(&run.report, ReportFormat::TextTable))?;
    let mut curves = Vec::new();
    for (name, history) in &run.histories {
        if let Some(h) = history {
            out.write(&ablation::history_file_name(name), &pretty(h))?;
            curves.push((name.as_str(), h));
        }
    }
    out.write("loss_curves.svg", &heatmap::emit_loss_curves_svg(&curves, true)?)
}

fn cmd_heatmap(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let data = input_dataset(cfg)?;
    let array = build_array(cfg.array.seed, &cfg.array.defaults);
    let grids = heatmap::mean_grids(&data, &array)?;
    out.write("heatmap.svg", &heatmap::emit_heatmap_svg(&grids, &ColorScale::default())?)?;
    out.write("heatmap.json", &heatmap::grids_to_json(&grids))
}
