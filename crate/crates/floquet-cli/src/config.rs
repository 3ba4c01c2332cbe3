//! Experiment configuration (TOML).

use std::path::Path;

use floquet_core::dirac::DiracPreset;
use floquet_core::model::{default_half_length, default_points_per_period};
use floquet_core::{builtin_potential, Boundary, Bulk, DomainWallKind, PotentialSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bands,
    Mode,
    #[default]
    Evolve,
    Sweep,
    Fgr,
    Envelope,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bands => "bands",
            Self::Mode => "mode",
            Self::Evolve => "evolve",
            Self::Sweep => "sweep",
            Self::Fgr => "fgr",
            Self::Envelope => "envelope",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Schrodinger,
    Dirac,
    /// Exact `|p(t)| = exp(-Γβ²t)`, for checking the sweep pipeline.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FgrMethod {
    /// Absorbing-layer resolvent on the banded operator.
    #[default]
    Resolvent,
    /// Lorentzian-broadened sum over the dense spectrum.
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to the family's half-length.
    pub half_length: Option<f64>,
    /// Defaults to 64 (family 1) or 80 (square wells).
    pub points_per_period: Option<usize>,
    #[serde(default = "vanishing")]
    pub boundary: Boundary,
}

fn vanishing() -> Boundary {
    Boundary::Vanishing
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_length: None, points_per_period: None, boundary: vanishing() }
    }
}

/// Replaces parts of the family's potential.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub bulk: Option<Bulk>,
    pub wall: Option<DomainWallKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracConfig {
    #[serde(default = "physical")]
    pub preset: DiracPreset,
    #[serde(default = "default_slow_half_length")]
    pub half_length: f64,
    #[serde(default = "default_slow_dx")]
    pub dx: f64,
}

fn physical() -> DiracPreset {
    DiracPreset::Physical
}

fn default_slow_half_length() -> f64 {
    400.0
}

fn default_slow_dx() -> f64 {
    0.05
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self { preset: physical(), half_length: default_slow_half_length(), dx: default_slow_dx() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { beta: 0.0, omega: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Defaults to 0.01 (Schrödinger) or 0.05 (Dirac).
    pub dt: Option<f64>,
    /// Defaults to 100.
    pub t_end: Option<f64>,
    /// Observer stride in steps; defaults to 10.
    pub stride: Option<usize>,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Adds a snapshot every this many time units.
    pub snapshot_every: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Keep every n-th grid point in snapshot files.
    #[serde(default = "one_usize")]
    pub x_stride: usize,
    /// Drop snapshot points with `|x| > x_max`.
    pub x_max: Option<f64>,
    /// Write per-run traces in sweeps.
    #[serde(default = "yes")]
    pub sweep_traces: bool,
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { x_stride: 1, x_max: None, sweep_traces: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Defaults to `5/ω` in slow time, converted to the model's clock.
    pub fit_t_min: Option<f64>,
    pub fit_t_max: Option<f64>,
    #[serde(default = "default_floor")]
    pub fit_floor: f64,
    /// Lorentzian width; defaults to 4× the local level spacing.
    pub eta: Option<f64>,
    /// Principal-value regularization; defaults to `eta`.
    pub pv_cutoff: Option<f64>,
    #[serde(default = "default_absorber_width")]
    pub absorber_width: f64,
    #[serde(default = "one")]
    pub absorber_strength: f64,
    /// `Γ₀` used by the synthetic model.
    #[serde(default = "default_synthetic_gamma0")]
    pub synthetic_gamma0: f64,
}

fn default_floor() -> f64 {
    1e-3
}

fn default_absorber_width() -> f64 {
    80.0
}

fn default_synthetic_gamma0() -> f64 {
    3.0
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fit_t_min: None,
            fit_t_max: None,
            fit_floor: default_floor(),
            eta: None,
            pv_cutoff: None,
            absorber_width: default_absorber_width(),
            absorber_strength: 1.0,
            synthetic_gamma0: default_synthetic_gamma0(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgrConfig {
    #[serde(default)]
    pub omegas: Vec<f64>,
    #[serde(default)]
    pub method: FgrMethod,
    /// Multiplies the slow half-length (and divides the default η).
    #[serde(default = "one")]
    pub box_factor: f64,
}

impl Default for FgrConfig {
    fn default() -> Self {
        Self { omegas: Vec::new(), method: FgrMethod::Resolvent, box_factor: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    #[serde(default = "default_n_bands")]
    pub n_bands: usize,
}

fn default_k_points() -> usize {
    101
}

fn default_n_bands() -> usize {
    6
}

impl Default for BandsConfig {
    fn default() -> Self {
        Self { k_points: default_k_points(), n_bands: default_n_bands() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// Comparison times on the Schrödinger clock.
    #[serde(default = "default_envelope_times")]
    pub times: Vec<f64>,
}

fn default_envelope_times() -> Vec<f64> {
    vec![0.0, 25.0, 50.0, 75.0, 100.0]
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { times: default_envelope_times() }
    }
}

/// One experiment. Every section is optional except `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default)]
    pub command: Command,
    #[serde(default)]
    pub model: ModelKind,
    pub family: u8,
    #[serde(default = "half")]
    pub eps: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub dirac: DiracConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub fgr: FgrConfig,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
}

fn default_id() -> String {
    "run".into()
}

fn half() -> f64 {
    0.5
}

impl ExperimentConfig {
    pub fn new(command: Command, model: ModelKind, family: u8) -> Self {
        Self {
            id: default_id(),
            command,
            model,
            family,
            eps: half(),
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            dirac: DiracConfig::default(),
            forcing: ForcingConfig::default(),
            time: TimeConfig::default(),
            output: OutputConfig::default(),
            analysis: AnalysisConfig::default(),
            sweep: SweepConfig::default(),
            fgr: FgrConfig::default(),
            bands: BandsConfig::default(),
            envelope: EnvelopeConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg = Self::parse_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without [`validate`](Self::validate), for callers that apply overrides first.
    pub fn parse_toml(text: &str) -> Result<Self> {
        parse_with_path(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let mut spec = builtin_potential(self.family, self.eps)?;
        if let Some(b) = self.potential.bulk {
            spec.bulk = b;
        }
        if let Some(w) = self.potential.wall {
            spec.wall = w;
        }
        Ok(spec)
    }

    pub fn half_length(&self) -> f64 {
        self.grid.half_length.unwrap_or_else(|| default_half_length(self.family))
    }

    pub fn points_per_period(&self) -> usize {
        self.grid.points_per_period.unwrap_or_else(|| default_points_per_period(self.family))
    }

    pub fn dt(&self) -> f64 {
        self.time.dt.unwrap_or(match self.model {
            ModelKind::Dirac => 0.05,
            _ => 0.01,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.time.t_end.unwrap_or(100.0)
    }

    pub fn stride(&self) -> usize {
        self.time.stride.unwrap_or(10)
    }

    /// Converts slow time to the model's own clock.
    pub fn clock_scale(&self) -> f64 {
        match self.model {
            ModelKind::Schrodinger => 1.0 / self.eps,
            _ => 1.0,
        }
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut out = self.time.snapshots.clone();
        if let Some(every) = self.time.snapshot_every {
            let n = (self.t_end() / every + 1e-9).floor() as usize;
            out.extend((0..=n).map(|k| k as f64 * every));
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.family) {
            return Err(f("family", format!("{} is not 1, 2 or 3", self.family)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(f("eps", format!("{} not in (0, 1]", self.eps)));
        }
        match self.potential.bulk {
            Some(Bulk::SquareWells { depth, radius }) if !(depth.is_finite() && radius > 0.0 && radius < 0.25) => {
                return Err(f("potential.bulk", "need finite depth and radius in (0, 0.25)"));
            }
            Some(Bulk::Trig { a1, a2 }) if !(a1.is_finite() && a2.is_finite()) => {
                return Err(f("potential.bulk", "coefficients must be finite"));
            }
            _ => {}
        }
        if let Some(l) = self.grid.half_length {
            if !(l > 0.0) {
                return Err(f("grid.half_length", "must be positive"));
            }
        }
        if let Some(p) = self.grid.points_per_period {
            if p < 8 {
                return Err(f("grid.points_per_period", "must be at least 8"));
            }
        }
        if !(self.dirac.half_length > 0.0) {
            return Err(f("dirac.half_length", "must be positive"));
        }
        if !(self.dirac.dx > 0.0) {
            return Err(f("dirac.dx", "must be positive"));
        }
        if !(self.forcing.beta >= 0.0) || !self.forcing.beta.is_finite() {
            return Err(f("forcing.beta", "must be >= 0"));
        }
        if !(self.forcing.omega > 0.0) || !self.forcing.omega.is_finite() {
            return Err(f("forcing.omega", "must be > 0"));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) {
                return Err(f("time.dt", "must be positive"));
            }
        }
        if let Some(t) = self.time.t_end {
            if !(t >= 0.0) {
                return Err(f("time.t_end", "must be >= 0"));
            }
        }
        if self.time.stride == Some(0) {
            return Err(f("time.stride", "must be positive"));
        }
        if self.time.snapshots.iter().any(|t| !(*t >= 0.0)) {
            return Err(f("time.snapshots", "times must be >= 0"));
        }
        if let Some(e) = self.time.snapshot_every {
            if !(e > 0.0) {
                return Err(f("time.snapshot_every", "must be positive"));
            }
        }
        if self.output.x_stride == 0 {
            return Err(f("output.x_stride", "must be positive"));
        }
        if let Some(e) = self.analysis.eta {
            if !(e > 0.0) {
                return Err(f("analysis.eta", "must be positive"));
            }
        }
        if !(self.analysis.absorber_width > 0.0) {
            return Err(f("analysis.absorber_width", "must be positive"));
        }
        if !(self.fgr.box_factor >= 1.0) {
            return Err(f("fgr.box_factor", "must be >= 1"));
        }
        if self.bands.k_points < 2 || self.bands.n_bands == 0 {
            return Err(f("bands", "need k_points >= 2 and n_bands >= 1"));
        }
        match self.command {
            Command::Sweep => {
                if self.sweep.betas.is_empty() {
                    return Err(f("sweep.betas", "empty list"));
                }
                if self.sweep.betas.iter().any(|b| !(*b >= 0.0)) {
                    return Err(f("sweep.betas", "values must be >= 0"));
                }
            }
            Command::Fgr => {
                if self.fgr.omegas.is_empty() {
                    return Err(f("fgr.omegas", "empty list"));
                }
                if self.fgr.omegas.iter().any(|w| !(*w > 0.0)) {
                    return Err(f("fgr.omegas", "values must be > 0"));
                }
            }
            Command::Envelope => {
                if self.dirac.preset != DiracPreset::Physical {
                    return Err(f("dirac.preset", "envelope comparison needs the physical preset"));
                }
                if self.envelope.times.is_empty() {
                    return Err(f("envelope.times", "empty list"));
                }
            }
            _ => {}
        }
        if self.model == ModelKind::Synthetic && self.command != Command::Sweep {
            return Err(f("model", "the synthetic model only runs sweeps"));
        }
        Ok(())
    }
}

fn f(path: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::field(path, msg)
}

/// Deserializes TOML, reporting errors as `field.path: message`.
fn parse_with_path<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Config(e.to_string().trim().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().message().trim().to_string();
        if path == "." || path.is_empty() {
            HarnessError::Config(msg)
        } else {
            HarnessError::field(&path, msg)
        }
    })
}

/// Named bundle of experiments written to sibling output directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl Recipe {
    pub fn from_toml(text: &str) -> Result<Self> {
        let r: Self = parse_with_path(text)?;
        if r.experiments.is_empty() {
            return Err(HarnessError::field("experiment", "recipe has no experiments"));
        }
        for (i, e) in r.experiments.iter().enumerate() {
            e.validate().map_err(|err| match err {
                HarnessError::Config(msg) => HarnessError::Config(format!("experiment[{i}].{msg}")),
                other => other,
            })?;
        }
        let mut ids: Vec<&str> = r.experiments.iter().map(|e| e.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::field("experiment.id", "ids must be unique"));
        }
        Ok(r)
    }
}
