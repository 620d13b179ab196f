//! Side-by-side training of the named ablation variants on one shared split.
//!
//! Every variant differs from the baseline in a single aspect: the loss, the
//! epoch budget, the depth, the input subset, or whether reading vectors have
//! their components shuffled. Ratios compare each variant's final test MSE
//! with the baseline's.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{self, Dataset, DatasetError};
use crate::nn::{self, LossKind, MlpArchitecture, TrainConfig, TrainHistory};
use crate::sensor::{ANALOG_COUNT, ARRAY_SIZE};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AblationError {
    #[error("variant list must contain `baseline`")]
    MissingBaseline,
    #[error("variant `{0}` listed twice")]
    DuplicateVariant(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("report parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    LossMae,
    LossRmse,
    LossMsle,
    Epochs600,
    ExtraLayer12,
    ShuffledTest,
    ShuffledTrain,
    DigitalOnly,
    AnalogOnly,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Baseline,
        Variant::LossMae,
        Variant::LossRmse,
        Variant::LossMsle,
        Variant::Epochs600,
        Variant::ExtraLayer12,
        Variant::ShuffledTest,
        Variant::ShuffledTrain,
        Variant::DigitalOnly,
        Variant::AnalogOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::LossMae => "loss_mae",
            Variant::LossRmse => "loss_rmse",
            Variant::LossMsle => "loss_msle",
            Variant::Epochs600 => "epochs_600",
            Variant::ExtraLayer12 => "extra_layer_12",
            Variant::ShuffledTest => "shuffled_test",
            Variant::ShuffledTrain => "shuffled_train",
            Variant::DigitalOnly => "digital_only",
            Variant::AnalogOnly => "analog_only",
        }
    }

    /// Degradation factor measured on the physical rig, where one was published.
    pub fn reference_ratio(self) -> Option<f64> {
        match self {
            Variant::ShuffledTest => Some(30.0),
            Variant::ShuffledTrain => Some(5.0),
            Variant::Epochs600 => Some(200.0),
            Variant::ExtraLayer12 => Some(2.0),
            _ => None,
        }
    }

    /// Training setup for this variant, derived from the shared baseline settings.
    pub fn config(self, base: &AblationSettings) -> VariantConfig {
        let mut cfg = VariantConfig {
            train: base.train,
            hidden_layers: base.hidden_layers.clone(),
            columns: (0, ARRAY_SIZE),
            shuffle_train: false,
            shuffle_test: false,
        };
        match self {
            Variant::Baseline => {}
            Variant::LossMae => cfg.train.loss_kind = LossKind::Mae,
            Variant::LossRmse => cfg.train.loss_kind = LossKind::Rmse,
            Variant::LossMsle => cfg.train.loss_kind = LossKind::Msle,
            Variant::Epochs600 => cfg.train.epochs = 2 * base.train.epochs,
            Variant::ExtraLayer12 => cfg.hidden_layers.push(12),
            Variant::ShuffledTest => cfg.shuffle_test = true,
            Variant::ShuffledTrain => {
                cfg.shuffle_train = true;
                cfg.shuffle_test = true;
            }
            Variant::DigitalOnly => cfg.columns = (ANALOG_COUNT, ARRAY_SIZE),
            Variant::AnalogOnly => cfg.columns = (0, ANALOG_COUNT),
        }
        cfg
    }
}

impl FromStr for Variant {
    type Err = AblationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| AblationError::UnknownVariant(s.to_string()))
    }
}

/// Settings shared by every variant in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSettings {
    pub train: TrainConfig,
    pub hidden_layers: Vec<usize>,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub component_shuffle_seed: u64,
}

impl Default for AblationSettings {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            hidden_layers: vec![20],
            train_fraction: 0.8,
            split_seed: 42,
            component_shuffle_seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub train: TrainConfig,
    pub hidden_layers: Vec<usize>,
    /// Half-open range of reading columns fed to the network.
    pub columns: (usize, usize),
    pub shuffle_train: bool,
    pub shuffle_test: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub name: String,
    pub config: VariantConfig,
    pub final_train_loss: Option<f64>,
    pub final_test_loss: Option<f64>,
    pub final_test_mse: Option<f64>,
    pub mae_c: Option<f64>,
    pub rmse_c: Option<f64>,
    pub ratio_vs_baseline: Option<f64>,
    pub reference_ratio: Option<f64>,
    pub history_path: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub split_seed: u64,
    pub component_shuffle_seed: u64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub config_hash: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub schema_version: u32,
    pub dataset_hash: String,
    pub split_hash: String,
    pub metadata: RunMetadata,
    pub variants: Vec<VariantResult>,
}

impl AblationReport {
    pub fn variant(&self, name: &str) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.name == name)
    }
}

/// A report plus each variant's loss history, in declared order.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub report: AblationReport,
    pub histories: Vec<(String, Option<TrainHistory>)>,
}

impl AblationRun {
    pub fn history(&self, name: &str) -> Option<&TrainHistory> {
        self.histories.iter().find(|(n, _)| n == name).and_then(|(_, h)| h.as_ref())
    }
}

pub fn history_file_name(variant: &str) -> String {
    format!("history_{variant}.json")
}

fn split_hash(train: &Dataset, test: &Dataset) -> String {
    let mut h = Sha256::new();
    for (tag, ds) in [(b'T', train), (b'V', test)] {
        h.update([tag]);
        for s in ds.samples() {
            h.update((s.sample_index as u64).to_le_bytes());
        }
    }
    format!("{:x}", h.finalize())
}

struct Outcome {
    history: TrainHistory,
    metrics: nn::Metrics,
}

fn run_variant(train: &Dataset, test: &Dataset, cfg: &VariantConfig, shuffle_seed: u64) -> Result<Outcome, String> {
    let cols = cfg.columns.0..cfg.columns.1;
    let mut tr = train.select_columns(cols.clone()).map_err(|e| e.to_string())?;
    let mut te = test.select_columns(cols).map_err(|e| e.to_string())?;
    if cfg.shuffle_train {
        tr = dataset::shuffle_components(&tr, shuffle_seed);
    }
    if cfg.shuffle_test {
        te = dataset::shuffle_components(&te, shuffle_seed);
    }
    let arch = MlpArchitecture::new(tr.arity(), cfg.hidden_layers.clone());
    let (model, history) = nn::train(&tr, &te, &arch, &cfg.train).map_err(|e| e.to_string())?;
    let metrics = nn::evaluate(&model, &te).map_err(|e| e.to_string())?;
    Ok(Outcome { history, metrics })
}

/// Trains every listed variant on the same split. Variants run on separate
/// threads; results are assembled in the declared order. A failing variant is
/// recorded in its row and does not stop the run.
pub fn run_ablation(
    data: &Dataset,
    variants: &[Variant],
    settings: &AblationSettings,
) -> Result<AblationRun, AblationError> {
    if !variants.contains(&Variant::Baseline) {
        return Err(AblationError::MissingBaseline);
    }
    for (i, v) in variants.iter().enumerate() {
        if variants[..i].contains(v) {
            return Err(AblationError::DuplicateVariant(v.name().to_string()));
        }
    }
    dataset::require_full_array(data)?;
    let started = Instant::now();
    let (train, test) = dataset::split(data, settings.train_fraction, settings.split_seed)?;

    let configs: Vec<VariantConfig> = variants.iter().map(|v| v.config(settings)).collect();
    let outcomes: Vec<Result<Outcome, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                let (train, test) = (&train, &test);
                scope.spawn(move || run_variant(train, test, cfg, settings.component_shuffle_seed))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("variant thread panicked".into()))).collect()
    });

    let baseline_mse = variants
        .iter()
        .zip(&outcomes)
        .find(|(v, _)| **v == Variant::Baseline)
        .and_then(|(_, o)| o.as_ref().ok())
        .and_then(|o| o.history.test_mse.last().copied());

    let mut rows = Vec::with_capacity(variants.len());
    let mut histories = Vec::with_capacity(variants.len());
    for ((variant, cfg), outcome) in variants.iter().zip(configs).zip(outcomes) {
        let name = variant.name().to_string();
        let mut row = VariantResult {
            name: name.clone(),
            config: cfg,
            final_train_loss: None,
            final_test_loss: None,
            final_test_mse: None,
            mae_c: None,
            rmse_c: None,
            ratio_vs_baseline: None,
            reference_ratio: variant.reference_ratio(),
            history_path: history_file_name(&name),
            error: None,
        };
        match outcome {
            Ok(o) => {
                let mse = o.history.test_mse.last().copied();
                row.final_train_loss = o.history.train_loss.last().copied();
                row.final_test_loss = o.history.test_loss.last().copied();
                row.final_test_mse = mse;
                row.mae_c = Some(o.metrics.mae_c);
                row.rmse_c = Some(o.metrics.rmse_c);
                row.ratio_vs_baseline = mse.zip(baseline_mse).map(|(m, b)| m / b);
                histories.push((name, Some(o.history)));
            }
            Err(e) => {
                row.error = Some(e);
                histories.push((name, None));
            }
        }
        rows.push(row);
    }

    let config_hash = {
        let doc = serde_json::to_string(&(settings, variants)).expect("settings serialize");
        format!("{:x}", Sha256::digest(doc.as_bytes()))
    };
    let report = AblationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        dataset_hash: data.content_hash(),
        split_hash: split_hash(&train, &test),
        metadata: RunMetadata {
            split_seed: settings.split_seed,
            component_shuffle_seed: settings.component_shuffle_seed,
            init_seed: settings.train.init_seed,
            shuffle_seed: settings.train.shuffle_seed,
            config_hash,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
        variants: rows,
    };
    Ok(AblationRun { report, histories })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TextTable,
    Json,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4e}"))
}

fn cell_c(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn cell_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

pub fn render_report(report: &AblationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::TextTable => {
            let header = [
                "variant",
                "loss",
                "train_loss",
                "test_loss",
                "test_mse",
                "mae_c",
                "rmse_c",
                "ratio",
                "ref_ratio",
                "history",
            ];
            let rows: Vec<[String; 10]> = report
                .variants
                .iter()
                .map(|v| {
                    [
                        v.name.clone(),
                        v.config.train.loss_kind.name().to_string(),
                        cell(v.final_train_loss),
                        cell(v.final_test_loss),
                        cell(v.final_test_mse),
                        cell_c(v.mae_c),
                        cell_c(v.rmse_c),
                        cell_ratio(v.ratio_vs_baseline),
                        cell_ratio(v.reference_ratio),
                        match &v.error {
                            Some(e) => format!("FAILED: {e}"),
                            None => v.history_path.clone(),
                        },
                    ]
                })
                .collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            let line = |out: &mut String, cells: &[&str]| {
                let mut s = String::new();
                for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                    if i == 0 || i == cells.len() - 1 {
                        let _ = write!(s, "{c:<w$}  ");
                    } else {
                        let _ = write!(s, "{c:>w$}  ");
                    }
                }
                out.push_str(s.trim_end());
                out.push('\n');
            };
            let _ = writeln!(out, "dataset {}  split {}", &report.dataset_hash[..12], &report.split_hash[..12]);
            line(&mut out, &header);
            for r in &rows {
                line(&mut out, &r.iter().map(String::as_str).collect::<Vec<_>>());
            }
            out
        }
    }
}

pub fn parse_report(json: &str) -> Result<AblationReport, AblationError> {
    let report: AblationReport = serde_json::from_str(json).map_err(|e| AblationError::Parse(e.to_string()))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(AblationError::Parse(format!("unsupported schema_version {}", report.schema_version)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Provenance, Sample};

    fn small() -> Dataset {
        let samples = (0..80)
            .map(|i| {
                let label_c = 30.0 + (i % 8) as f64;
                let readings =
                    (0..32).map(|j| label_c - 0.05 * j as f64 + 0.01 * ((i * 13 + j * 7) % 11) as f64).collect();
                Sample { readings, label_c, setpoint_index: i % 8, sample_index: i }
            })
            .collect();
        Dataset::new(samples, Provenance::Ingested { source: "small".into() }).unwrap()
    }

    fn quick() -> AblationSettings {
        AblationSettings {
            train: TrainConfig { epochs: 5, batch_size: 16, ..TrainConfig::default() },
            ..AblationSettings::default()
        }
    }

    #[test]
    fn names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
    }

    #[test]
    fn single_baseline_row() {
        let run = run_ablation(&small(), &[Variant::Baseline], &quick()).unwrap();
        assert_eq!(run.report.variants.len(), 1);
        assert_eq!(run.report.variants[0].ratio_vs_baseline, Some(1.0));
        let table = render_report(&run.report, ReportFormat::TextTable);
        assert_eq!(table.lines().count(), 3);
    }

    #[test]
    fn variant_list_validation() {
        assert!(matches!(run_ablation(&small(), &[Variant::LossMae], &quick()), Err(AblationError::MissingBaseline)));
        assert!(matches!(
            run_ablation(&small(), &[Variant::Baseline, Variant::Baseline], &quick()),
            Err(AblationError::DuplicateVariant(_))
        ));
    }

    #[test]
    fn variant_configs_differ_in_one_aspect() {
        let base = AblationSettings::default();
        let b = Variant::Baseline.config(&base);
        assert_eq!(Variant::Epochs600.config(&base).train.epochs, 600);
        assert_eq!(Variant::ExtraLayer12.config(&base).hidden_layers, vec![20, 12]);
        assert_eq!(Variant::DigitalOnly.config(&base).columns, (16, 32));
        assert_eq!(Variant::AnalogOnly.config(&base).columns, (0, 16));
        assert_eq!(Variant::LossMsle.config(&base).train.loss_kind, LossKind::Msle);
        let st = Variant::ShuffledTrain.config(&base);
        assert!(st.shuffle_train && st.shuffle_test);
        assert_eq!(VariantConfig { shuffle_train: false, shuffle_test: false, ..st }, b);
    }

    #[test]
    fn divergence_is_recorded_not_fatal() {
        let mut settings = quick();
        settings.train.learning_rate = f64::MAX;
        let run = run_ablation(&small(), &[Variant::Baseline, Variant::LossMae], &settings).unwrap();
        assert!(run.report.variants.iter().all(|v| v.error.is_some()));
        assert!(run.history("baseline").is_none());
        let table = render_report(&run.report, ReportFormat::TextTable);
        assert!(table.contains("FAILED"));
    }

    #[test]
    fn json_roundtrip_is_identical() {
        let run = run_ablation(&small(), &[Variant::Baseline, Variant::ShuffledTest], &quick()).unwrap();
        let json = render_report(&run.report, ReportFormat::Json);
        let back = parse_report(&json).unwrap();
        assert_eq!(render_report(&back, ReportFormat::Json), json);
        for v in &back.variants {
            assert_eq!(v.history_path, history_file_name(&v.name));
        }
    }
}
