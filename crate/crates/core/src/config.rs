//! The single JSON document that drives a run.
//!
//! Every section is optional and falls back to the defaults of the module it
//! configures. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ablation::{AblationSettings, Variant};
use crate::nn::{MlpArchitecture, TrainConfig};
use crate::plate::{PlateProfile, Protocol};
use crate::sensor::SensorDefaults;
use crate::thermistor::{fit_coefficients, ThermistorCoefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateSection {
    pub profile: PlateProfile,
    pub protocol: Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    /// Draws per-sensor biases.
    pub seed: u64,
    pub defaults: SensorDefaults,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self { seed: 42, defaults: SensorDefaults::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPoint {
    pub ohms: f64,
    pub kelvin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermistorSection {
    pub calibration: [CalibrationPoint; 3],
    pub r_min_ohms: f64,
    pub r_max_ohms: f64,
}

impl Default for ThermistorSection {
    fn default() -> Self {
        Self {
            calibration: DEFAULT_CALIBRATION.map(|(ohms, kelvin)| CalibrationPoint { ohms, kelvin }),
            r_min_ohms: DEFAULT_RANGE.0,
            r_max_ohms: DEFAULT_RANGE.1,
        }
    }
}

impl ThermistorSection {
    pub fn coefficients(&self) -> Result<ThermistorCoefficients, crate::thermistor::ThermistorError> {
        fit_coefficients(self.calibration.map(|p| (p.ohms, p.kelvin)), (self.r_min_ohms, self.r_max_ohms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub per_setpoint: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// Seeds the simulated readings.
    pub seed: u64,
    /// Dataset read by `train`, `ablate` and `heatmap` when none is given on the command line.
    pub csv_path: Option<PathBuf>,
    /// Serial log read by `ingest` when none is given on the command line.
    pub log_path: Option<PathBuf>,
    /// Applied to ingested logs only.
    pub subsample: Option<Subsample>,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub component_shuffle_seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            seed: 42,
            csv_path: None,
            log_path: None,
            subsample: Some(Subsample { per_setpoint: 50, seed: 42 }),
            train_fraction: 0.8,
            split_seed: 42,
            component_shuffle_seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Map<String, serde_json::Value>")]
pub struct TrainSection {
    pub hidden_layers: Vec<usize>,
    #[serde(flatten)]
    pub params: TrainConfig,
}

// serde's flatten drops the inner struct's unknown-field check, so split by hand.
impl TryFrom<serde_json::Map<String, serde_json::Value>> for TrainSection {
    type Error = serde_json::Error;

    fn try_from(mut map: serde_json::Map<String, serde_json::Value>) -> Result<Self, Self::Error> {
        let hidden_layers = match map.remove("hidden_layers") {
            Some(v) => serde_json::from_value(v)?,
            None => vec![20],
        };
        let params = serde_json::from_value(serde_json::Value::Object(map))?;
        Ok(Self { hidden_layers, params })
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { hidden_layers: vec![20], params: TrainConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSection {
    pub variants: Vec<String>,
}

impl Default for AblationSection {
    fn default() -> Self {
        Self { variants: Variant::ALL.iter().map(|v| v.name().to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Written into sidecars for reference; ignored when reading.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub plate: PlateSection,
    pub array: ArraySection,
    pub thermistor: ThermistorSection,
    pub dataset: DatasetSection,
    pub train: TrainSection,
    pub ablation: AblationSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            config_hash: None,
            plate: PlateSection::default(),
            array: ArraySection::default(),
            thermistor: ThermistorSection::default(),
            dataset: DatasetSection::default(),
            train: TrainSection::default(),
            ablation: AblationSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str, source: &str) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse { path: source.to_string(), message: e.to_string() })?;
        cfg.config_hash = None;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Replaces every seed in the document.
    pub fn override_seeds(&mut self, seed: u64) {
        self.array.seed = seed;
        self.dataset.seed = seed;
        self.dataset.split_seed = seed;
        self.dataset.component_shuffle_seed = seed;
        if let Some(s) = self.dataset.subsample.as_mut() {
            s.seed = seed;
        }
        self.train.params.init_seed = seed;
        self.train.params.shuffle_seed = seed;
    }

    /// Compact JSON of the document without its hash field.
    fn canonical(&self) -> String {
        let mut c = self.clone();
        c.config_hash = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical().as_bytes()))
    }

    /// Pretty JSON carrying its own hash; loading it back reproduces this config.
    pub fn to_sidecar_json(&self) -> String {
        let mut c = self.clone();
        c.config_hash = Some(self.hash());
        serde_json::to_string_pretty(&c).expect("config serializes") + "\n"
    }

    pub fn architecture(&self, input_dim: usize) -> MlpArchitecture {
        MlpArchitecture::new(input_dim, self.train.hidden_layers.clone())
    }

    pub fn variants(&self) -> Result<Vec<Variant>, ConfigError> {
        self.ablation
            .variants
            .iter()
            .map(|s| s.parse::<Variant>().map_err(|e| ConfigError::Invalid(vec![format!("ablation.variants: {e}")])))
            .collect()
    }

    pub fn ablation_settings(&self) -> AblationSettings {
        AblationSettings {
            train: self.train.params,
            hidden_layers: self.train.hidden_layers.clone(),
            train_fraction: self.dataset.train_fraction,
            split_seed: self.dataset.split_seed,
            component_shuffle_seed: self.dataset.component_shuffle_seed,
        }
    }

    /// Every violated constraint, each prefixed with its section.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut add =
            |section: &str, msgs: Vec<String>| out.extend(msgs.into_iter().map(|m| format!("{section}: {m}")));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            add(
                "schema_version",
                vec![format!("unsupported version {} (expected {CONFIG_SCHEMA_VERSION})", self.schema_version)],
            );
        }
        add("plate.protocol", self.plate.protocol.violations());
        let profile = if self.plate.protocol.violations().is_empty() {
            self.plate.profile.validate_for(&self.plate.protocol)
        } else {
            self.plate.profile.validate()
        };
        add("plate.profile", profile.err().map(|e| e.to_string()).into_iter().collect());
        add("array.defaults", self.array.defaults.violations());
        add("thermistor", self.thermistor.coefficients().err().map(|e| e.to_string()).into_iter().collect());

        let mut ds = Vec::new();
        if !(self.dataset.train_fraction > 0.0 && self.dataset.train_fraction < 1.0) {
            ds.push(format!("train_fraction ({}) must lie in (0, 1)", self.dataset.train_fraction));
        }
        if self.dataset.subsample.is_some_and(|s| s.per_setpoint == 0) {
            ds.push("subsample.per_setpoint must be >= 1".into());
        }
        add("dataset", ds);

        let mut tr = self.train.params.violations();
        if self.train.hidden_layers.is_empty() || self.train.hidden_layers.contains(&0) {
            tr.push("hidden_layers must be a non-empty list of positive widths".into());
        }
        add("train", tr);

        let mut ab = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        for name in &self.ablation.variants {
            if name.parse::<Variant>().is_err() {
                ab.push(format!("unknown variant `{name}`"));
            } else if seen.contains(&name.as_str()) {
                ab.push(format!("variant `{name}` listed twice"));
            }
            seen.push(name);
        }
        if !seen.contains(&"baseline") {
            ab.push("variants must include `baseline`".into());
        }
        add("ablation", ab);
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.violations() {
            v if v.is_empty() => Ok(()),
            v => Err(ConfigError::Invalid(v)),
        }
    }
}
