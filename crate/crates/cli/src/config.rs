// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a TOML file with units in every physical key,
//! overridable from the environment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempomux::nalgebra::Matrix3;
use tempomux::dynamics::{DeviceParams, EvolveOptions, ModelOptions, TransferConfig};
use tempomux::pulsesynth::DriveOptions;
use tempomux::tomography::Confusion;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_PREFIX: &str = "TEMPOMUX_";
/// Separates nested keys in environment overrides: `TEMPOMUX_RECEIVER__KAPPA_F_MHZ`.
pub const ENV_SEPARATOR: &str = "__";

const MHZ: f64 = 2.0 * PI * 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub basis: BasisConfig,
    pub sender: DeviceConfig,
    pub receiver: DeviceConfig,
    pub model: ModelOptions,
    pub drive: DriveConfig,
    pub dac: DacConfig,
    pub simulate: SimulateConfig,
    pub sweep: SweepConfig,
    pub tomography: TomographyConfig,
    pub capacity: CapacityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            basis: BasisConfig::default(),
            sender: DeviceConfig::from_params(&DeviceParams::sender()),
            receiver: DeviceConfig::from_params(&DeviceParams::receiver()),
            model: ModelOptions::default(),
            drive: DriveConfig::default(),
            dac: DacConfig::default(),
            simulate: SimulateConfig::default(),
            sweep: SweepConfig::default(),
            tomography: TomographyConfig::default(),
            capacity: CapacityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    Sech,
    HermiteGaussian,
    TimeBin,
    FrequencyBin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub family: FamilyChoice,
    /// Mode indices to construct; the basis spans `0..=max(modes)`.
    pub modes: Vec<i64>,
    pub kappa_ph_mhz: f64,
    /// Sample spacing; the sech default grid rule is used when absent.
    pub dt_ns: Option<f64>,
    pub hg_sigma_ns: f64,
    /// Bin spacing (ns for time bins, MHz for frequency bins); the certified
    /// minimum when absent.
    pub bin_spacing: Option<f64>,
    /// Half width of the grid for Hermite–Gaussian and bin families.
    pub half_width_us: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            family: FamilyChoice::Sech,
            modes: (0..8).collect(),
            kappa_ph_mhz: 5.0,
            dt_ns: None,
            hg_sigma_ns: 50.0,
            bin_spacing: None,
            half_width_us: 2.0,
        }
    }
}

/// Node parameters in laboratory units (`/2π` for rates, µs for times).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub kappa_f_mhz: f64,
    pub alpha_mhz: f64,
    pub kerr_mhz: f64,
    pub chi_mhz: f64,
    /// `None` means no decay.
    pub t1_ge_us: Option<f64>,
    pub t1_ef_us: Option<f64>,
    pub t2_ge_star_us: Option<f64>,
    pub loss: f64,
    /// Switch every coherence time off regardless of the values above.
    pub ideal: bool,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self::from_params(&DeviceParams::receiver())
    }
}

impl DeviceConfig {
    pub fn from_params(p: &DeviceParams) -> Self {
        Self {
            kappa_f_mhz: p.kappa_f / MHZ,
            alpha_mhz: p.alpha / MHZ,
            kerr_mhz: p.kerr / MHZ,
            chi_mhz: p.chi / MHZ,
            t1_ge_us: p.t1_ge.map(|t| t * 1e6),
            t1_ef_us: p.t1_ef.map(|t| t * 1e6),
            t2_ge_star_us: p.t2_ge_star.map(|t| t * 1e6),
            loss: p.loss,
            ideal: false,
        }
    }

    pub fn to_params(&self) -> DeviceParams {
        let p = DeviceParams {
            kappa_f: self.kappa_f_mhz * MHZ,
            alpha: self.alpha_mhz * MHZ,
            kerr: self.kerr_mhz * MHZ,
            chi: self.chi_mhz * MHZ,
            t1_ge: self.t1_ge_us.map(|t| t * 1e-6),
            t1_ef: self.t1_ef_us.map(|t| t * 1e-6),
            t2_ge_star: self.t2_ge_star_us.map(|t| t * 1e-6),
            loss: self.loss,
        };
        if self.ideal {
            p.without_decoherence()
        } else {
            p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    pub cap_mhz: f64,
    pub floor: f64,
    /// Receiver delay offset; optimised per drive mode when absent.
    pub delta_t_ns: Option<f64>,
    /// Coarse delay grid searched before sample-level refinement.
    pub delay_search_ns: [f64; 3],
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self { cap_mhz: 8.0, floor: 1e-6, delta_t_ns: None, delay_search_ns: [-4.0, 8.0, 1.0] }
    }
}

impl DriveConfig {
    pub fn options(&self) -> DriveOptions {
        DriveOptions { cap: self.cap_mhz * MHZ, floor: self.floor }
    }

    pub fn coarse_delays(&self) -> Vec<f64> {
        range(self.delay_search_ns).into_iter().map(|d| d * 1e-9).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DacConfig {
    pub sample_rate_gsps: f64,
    pub bits: Vec<u32>,
}

impl Default for DacConfig {
    fn default() -> Self {
        Self { sample_rate_gsps: 1.0, bits: (2..=14).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Number of sech modes in the transfer basis.
    pub n_modes: usize,
    pub dt_ns: f64,
    /// `(sender mode, receiver drive mode)` pairs.
    pub pairs: Vec<[usize; 2]>,
    pub emission: bool,
    pub rejection: bool,
    pub capture: bool,
    /// Coherence snapshots every this many record points.
    pub decimation: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_modes: 4,
            dt_ns: 0.25,
            pairs: vec![[0, 0], [0, 3], [1, 3], [2, 3], [3, 0]],
            emission: true,
            rejection: false,
            capture: false,
            decimation: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sender_mode: usize,
    pub receiver_mode: usize,
    /// `[start, stop, step]` of the delay offset.
    pub delta_t_ns: [f64; 3],
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { sender_mode: 0, receiver_mode: 0, delta_t_ns: [-100.0, 100.0, 4.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    pub modes: Vec<usize>,
    /// Readout shots per setting; exact probabilities when absent.
    pub shots: Option<u64>,
    /// Row-stochastic readout matrix `P(reported | true)`.
    pub confusion: Option<[[f64; 3]; 3]>,
    pub max_iterations: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self { modes: vec![0, 1, 2, 3], shots: None, confusion: None, max_iterations: 100_000 }
    }
}

impl TomographyConfig {
    pub fn confusion(&self) -> Confusion {
        match self.confusion {
            Some(rows) => Confusion(Matrix3::from_fn(|i, j| rows[i][j])),
            None => Confusion::ideal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    /// `[start, stop, step]` of the temporal window.
    pub t_window_us: [f64; 3],
    /// `[start, stop, step]` of the bandwidth.
    pub bandwidth_mhz: [f64; 3],
    pub kappa_min_mhz: f64,
    pub kappa_max_mhz: f64,
    pub n_kappa: usize,
    /// Highest sech order considered for the temporal scheme is `n_modes - 1`.
    pub n_modes: usize,
    /// Optional single budget reported per scheme.
    pub point_t_window_us: Option<f64>,
    pub point_bandwidth_mhz: Option<f64>,
    /// Modes whose Wigner functions are exported.
    pub wigner_modes: Vec<usize>,
    pub wigner_kappa_mhz: f64,
    pub wigner_dt_ns: f64,
    /// Exported Wigner columns are limited to `|f|` below this.
    pub wigner_max_freq_mhz: f64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            t_window_us: [1.1, 44.0, 1.1],
            bandwidth_mhz: [1.38, 55.2, 1.38],
            kappa_min_mhz: 0.008,
            kappa_max_mhz: 8.0,
            n_kappa: 64,
            n_modes: 21,
            point_t_window_us: None,
            point_bandwidth_mhz: None,
            wigner_modes: vec![0, 1, 2, 3],
            wigner_kappa_mhz: 1.0,
            wigner_dt_ns: 20.0,
            wigner_max_freq_mhz: 4.0,
        }
    }
}

/// Inclusive arithmetic range `[start, stop, step]`.
pub fn range(spec: [f64; 3]) -> Vec<f64> {
    let [start, stop, step] = spec;
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn check_range(name: &str, spec: [f64; 3]) -> Result<(), CliError> {
    let [start, stop, step] = spec;
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
        return Err(CliError::Config(format!("{name} must be [start, stop, step] with step > 0 and stop >= start")));
    }
    if (stop - start) / step > 1e6 {
        return Err(CliError::Config(format!("{name} has more than a million points")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.basis.modes.is_empty() {
            return Err(CliError::Config("basis.modes must not be empty".into()));
        }
        if let Some(m) = self.basis.modes.iter().find(|&&m| m < 0) {
            return Err(CliError::Config(format!("basis.modes contains negative index {m}")));
        }
        if !(self.basis.kappa_ph_mhz > 0.0) {
            return Err(CliError::Config("basis.kappa_ph_mhz must be positive".into()));
        }
        if let Some(dt) = self.basis.dt_ns {
            if !(dt > 0.0) {
                return Err(CliError::Config("basis.dt_ns must be positive".into()));
            }
        }
        self.sender.to_params().validate()?;
        self.receiver.to_params().validate()?;
        self.model.validate()?;
        self.drive.options().validate()?;
        check_range("drive.delay_search_ns", self.drive.delay_search_ns)?;
        check_range("sweep.delta_t_ns", self.sweep.delta_t_ns)?;
        check_range("capacity.t_window_us", self.capacity.t_window_us)?;
        check_range("capacity.bandwidth_mhz", self.capacity.bandwidth_mhz)?;
        if self.dac.bits.is_empty() || self.dac.bits.iter().any(|&b| !(1..=32).contains(&b)) {
            return Err(CliError::Config("dac.bits must be a non-empty list within 1..=32".into()));
        }
        if !(self.dac.sample_rate_gsps > 0.0) {
            return Err(CliError::Config("dac.sample_rate_gsps must be positive".into()));
        }
        let n = self.simulate.n_modes;
        if n == 0 {
            return Err(CliError::Config("simulate.n_modes must be positive".into()));
        }
        if !(self.simulate.dt_ns > 0.0) {
            return Err(CliError::Config("simulate.dt_ns must be positive".into()));
        }
        if self.simulate.decimation == 0 {
            return Err(CliError::Config("simulate.decimation must be positive".into()));
        }
        for [m, k] in &self.simulate.pairs {
            if *m >= n || *k >= n {
                return Err(CliError::Config(format!("simulate pair ({m}, {k}) outside {n} modes")));
            }
        }
        if self.sweep.sender_mode >= n || self.sweep.receiver_mode >= n {
            return Err(CliError::Config(format!("sweep modes must lie below simulate.n_modes = {n}")));
        }
        if let Some(m) = self.tomography.modes.iter().find(|&&m| m >= n) {
            return Err(CliError::Config(format!("tomography mode {m} outside {n} modes")));
        }
        if self.tomography.shots == Some(0) {
            return Err(CliError::Config("tomography.shots must be at least 1".into()));
        }
        self.tomography.confusion().validate()?;
        let c = &self.capacity;
        if !(c.kappa_min_mhz > 0.0 && c.kappa_max_mhz >= c.kappa_min_mhz) {
            return Err(CliError::Config("capacity kappa bounds must satisfy 0 < min <= max".into()));
        }
        if c.n_kappa == 0 || c.n_modes == 0 {
            return Err(CliError::Config("capacity.n_kappa and capacity.n_modes must be positive".into()));
        }
        if c.point_t_window_us.is_some() != c.point_bandwidth_mhz.is_some() {
            return Err(CliError::Config(
                "capacity.point_t_window_us and capacity.point_bandwidth_mhz must be given together".into(),
            ));
        }
        if !(c.wigner_kappa_mhz > 0.0 && c.wigner_dt_ns > 0.0 && c.wigner_max_freq_mhz > 0.0) {
            return Err(CliError::Config("capacity Wigner settings must be positive".into()));
        }
        Ok(())
    }

    /// Transfer-simulation settings for the receiver node.
    pub fn transfer(&self) -> TransferConfig {
        TransferConfig {
            kappa_ph: self.basis.kappa_ph_mhz * MHZ,
            n_modes: self.simulate.n_modes,
            dt: self.simulate.dt_ns * 1e-9,
            receiver: self.receiver.to_params(),
            model: self.model,
            drive: self.drive.options(),
            evolve: EvolveOptions::default(),
        }
    }

    /// SHA-256 of the canonical JSON form (object keys sorted at every level).
    pub fn hash(&self) -> Result<String, CliError> {
        let value = serde_json::to_value(self)?;
        Ok(canonical_hash(&value))
    }
}

pub fn canonical_hash(value: &serde_json::Value) -> String {
    let canonical = canonical_json(value);
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Serialises with object keys sorted, independent of insertion order.
pub fn canonical_json(value: &serde_json::Value) -> String {
    fn sort(v: &serde_json::Value) -> serde_json::Value {
        match v {
            serde_json::Value::Object(map) => {
                let sorted: BTreeMap<&String, serde_json::Value> = map.iter().map(|(k, v)| (k, sort(v))).collect();
                serde_json::Value::Object(sorted.into_iter().map(|(k, v)| (k.clone(), v)).collect())
            }
            serde_json::Value::Array(items) => serde_json::Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

/// Parses the TOML text, applies environment overrides and deserialises.
pub fn load(path: Option<&Path>, env: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("invalid TOML in {}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    apply_env_overrides(&mut table, env)?;
    let config: ExperimentConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    Ok(config)
}

/// `TEMPOMUX_SECTION__KEY=value` sets `section.key`. Values are parsed as
/// TOML literals when possible and kept as strings otherwise.
pub fn apply_env_overrides(table: &mut toml::Table, env: &[(String, String)]) -> Result<(), CliError> {
    let mut overrides: Vec<(&String, &String)> = env.iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).map(|(k, v)| (k, v)).collect();
    overrides.sort();
    for (key, raw) in overrides {
        let path: Vec<String> =
            key[ENV_PREFIX.len()..].split(ENV_SEPARATOR).map(|s| s.to_ascii_lowercase()).collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(CliError::Config(format!("malformed override variable {key}")));
        }
        let value = parse_literal(raw);
        let mut node = &mut *table;
        for part in &path[..path.len() - 1] {
            let entry = node.entry(part.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("override {key}: {part} is not a section")))?;
        }
        node.insert(path[path.len() - 1].clone(), value);
    }
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Default configuration rendered as TOML, a starting point for edits.
pub fn default_toml() -> Result<String, CliError> {
    toml::to_string_pretty(&ExperimentConfig::default()).map_err(|e| CliError::Config(e.to_string()))
}
