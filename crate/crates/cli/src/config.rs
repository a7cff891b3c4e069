//! Scenario configuration read from TOML.

use std::path::{Path, PathBuf};

use biharmonic_core::analysis::SymbolParams;
use biharmonic_core::normal_form::DEFAULT_BUDGET;
use biharmonic_core::{EquationKind, InitialData, IntegratorConfig, NFConfig, SpectralConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::scenarios::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    /// Seed for random initial data; required whenever the data are random.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "defaults::t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub equation: EquationSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub normal_form: NormalFormSection,
    #[serde(default)]
    pub symbol: SymbolSection,
    #[serde(default)]
    pub phase: PhaseSection,
    #[serde(default)]
    pub census: CensusSection,
    #[serde(default)]
    pub strichartz: StrichartzSection,
    #[serde(default)]
    pub difference: DifferenceSection,
    #[serde(default)]
    pub output: OutputSection,
}

mod defaults {
    pub fn t_final() -> f64 {
        1.0
    }
    pub fn sign() -> i8 {
        1
    }
    pub fn variant() -> String {
        "wick".into()
    }
    pub fn data() -> String {
        "two_mode(1, 0.6, -2, 0.4)".into()
    }
    pub fn cutoff() -> usize {
        32
    }
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn store_every() -> usize {
        10
    }
    pub fn depth() -> usize {
        1
    }
    pub fn k() -> f64 {
        10.0
    }
    pub fn theta() -> f64 {
        2.0 / 3.0
    }
    pub fn box_n() -> usize {
        4
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn budget() -> f64 {
        super::DEFAULT_BUDGET
    }
    pub fn s() -> f64 {
        -1.0 / 3.0
    }
    pub fn k0() -> u32 {
        3
    }
    pub fn m() -> u64 {
        1
    }
    pub fn audit_ms() -> Vec<u64> {
        vec![1, 4, 16]
    }
    pub fn audit_k0s() -> Vec<u32> {
        (4..=10).collect()
    }
    pub fn audit_points() -> usize {
        40_000
    }
    pub fn range() -> i64 {
        32
    }
    pub fn max_j() -> usize {
        5
    }
    pub fn cutoffs() -> Vec<usize> {
        vec![32, 128]
    }
    pub fn p() -> u32 {
        4
    }
    pub fn samples() -> usize {
        50
    }
    pub fn perturbation() -> f64 {
        1e-3
    }
    pub fn dir() -> String {
        "out".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    /// `wick`, `original` or `renormalized`.
    #[serde(default = "defaults::variant")]
    pub variant: String,
    /// Only read for `renormalized`.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "defaults::sign")]
    pub sign: i8,
}

impl Default for EquationSection {
    fn default() -> Self {
        Self { variant: defaults::variant(), gamma: None, sign: defaults::sign() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// e.g. `gaussian(1.0)` (needs `seed`), `two_mode(1, 0.6, -2, 0.4)`.
    #[serde(default = "defaults::data")]
    pub data: String,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { data: defaults::data() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    #[serde(default = "defaults::cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub grid_points: Option<usize>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self { cutoff: defaults::cutoff(), grid_points: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::store_every")]
    pub store_every: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { dt: defaults::dt(), store_every: defaults::store_every() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormSection {
    #[serde(rename = "J", default = "defaults::depth")]
    pub depth: usize,
    #[serde(rename = "K", default = "defaults::k")]
    pub k: f64,
    #[serde(default = "defaults::theta")]
    pub theta: f64,
    #[serde(rename = "box_N", default = "defaults::box_n")]
    pub box_n: usize,
    #[serde(default = "defaults::one")]
    pub threshold_scale: f64,
    /// Refuse when `(2N+1)^{2J} c_J` exceeds this.
    #[serde(default = "defaults::budget")]
    pub budget: f64,
    /// Depths for `nf-error-decay`; defaults to `1..=J`.
    #[serde(default)]
    pub depths: Vec<usize>,
}

impl Default for NormalFormSection {
    fn default() -> Self {
        Self {
            depth: defaults::depth(),
            k: defaults::k(),
            theta: defaults::theta(),
            box_n: defaults::box_n(),
            threshold_scale: 1.0,
            budget: defaults::budget(),
            depths: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    #[serde(default = "defaults::s")]
    pub s: f64,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default = "defaults::k0")]
    pub k0: u32,
    #[serde(rename = "M", default = "defaults::m")]
    pub m: u64,
    /// Grid for `symbol-audit`.
    #[serde(rename = "audit_M", default = "defaults::audit_ms")]
    pub audit_ms: Vec<u64>,
    #[serde(default = "defaults::audit_k0s")]
    pub audit_k0: Vec<u32>,
    #[serde(default = "defaults::audit_points")]
    pub audit_points: usize,
}

impl Default for SymbolSection {
    fn default() -> Self {
        Self {
            s: defaults::s(),
            delta0: None,
            k0: defaults::k0(),
            m: defaults::m(),
            audit_ms: defaults::audit_ms(),
            audit_k0: defaults::audit_k0s(),
            audit_points: defaults::audit_points(),
        }
    }
}

impl SymbolSection {
    pub fn params(&self) -> SymbolParams {
        SymbolParams { s: self.s, delta0: self.delta0, k0: self.k0, m: self.m }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    #[serde(default = "defaults::range")]
    pub range: i64,
}

impl Default for PhaseSection {
    fn default() -> Self {
        Self { range: defaults::range() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusSection {
    #[serde(rename = "max_J", default = "defaults::max_j")]
    pub max_j: usize,
}

impl Default for CensusSection {
    fn default() -> Self {
        Self { max_j: defaults::max_j() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzSection {
    #[serde(default = "defaults::cutoffs")]
    pub cutoffs: Vec<usize>,
    #[serde(default = "defaults::p")]
    pub p: u32,
    #[serde(rename = "T_w", default = "defaults::one")]
    pub t_w: f64,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
}

impl Default for StrichartzSection {
    fn default() -> Self {
        Self { cutoffs: defaults::cutoffs(), p: defaults::p(), t_w: 1.0, samples: defaults::samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferenceSection {
    /// `||u0 - v0||` in `L^2`.
    #[serde(default = "defaults::perturbation")]
    pub perturbation: f64,
    #[serde(default = "defaults::s")]
    pub s: f64,
}

impl Default for DifferenceSection {
    fn default() -> Self {
        Self { perturbation: defaults::perturbation(), s: defaults::s() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "defaults::dir")]
    pub dir: String,
    /// Wall-clock limit; loops stop early and flag the report as partial.
    #[serde(default)]
    pub max_seconds: Option<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: defaults::dir(), max_seconds: None }
    }
}

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "BIHARMONIC_NF_OUT";

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.message().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    /// Defaults for a named scenario.
    pub fn for_scenario(name: &str) -> Self {
        Self::from_toml(&format!("scenario = {name:?}")).expect("bare config parses")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        self.scenario
            .parse()
            .map_err(|_| CliError::Config(vec![format!("unknown scenario {:?}; try `list`", self.scenario)]))
    }

    pub fn equation(&self) -> Result<EquationKind, String> {
        let variant = match self.equation.variant.as_str() {
            "wick" => Variant::Wick,
            "original" => Variant::Original,
            "renormalized" => {
                Variant::Renormalized(self.equation.gamma.ok_or("equation.gamma is required for renormalized")?)
            }
            other => return Err(format!("equation.variant {other:?} is not wick, original or renormalized")),
        };
        let kind = EquationKind { variant, sign: self.equation.sign };
        kind.validate().map_err(|e| format!("equation: {e}"))?;
        Ok(kind)
    }

    pub fn initial_data(&self) -> Result<InitialData, String> {
        self.initial.data.parse().map_err(|e| format!("initial.data: {e}"))
    }

    pub fn spectral(&self) -> Result<SpectralConfig, String> {
        match self.spectral.grid_points {
            None => Ok(SpectralConfig::new(self.spectral.cutoff)),
            Some(g) => SpectralConfig::with_grid(self.spectral.cutoff, g).map_err(|e| format!("spectral: {e}")),
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, String> {
        IntegratorConfig::new(self.integrator.dt, self.integrator.store_every).map_err(|e| format!("integrator: {e}"))
    }

    pub fn nf(&self) -> Result<NFConfig, String> {
        let nf = &self.normal_form;
        NFConfig::new(nf.depth, nf.k, nf.theta, nf.box_n)
            .and_then(|c| c.with_threshold_scale(nf.threshold_scale))
            .map_err(|e| format!("normal_form: {e}"))
    }

    /// Depths run by `nf-error-decay`.
    pub fn decay_depths(&self) -> Vec<usize> {
        if self.normal_form.depths.is_empty() {
            (1..=self.normal_form.depth).collect()
        } else {
            self.normal_form.depths.clone()
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_override {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(&self.output.dir),
        }
    }
}
