//! TOML run configuration: `[model]` plus one optional section per pipeline.

use crate::approx::ApproxSettings;
use crate::model::{Family, ModelError, ModelSpec};
use crate::simulator::{InitialData, ModelProblemSettings, Scheme, SimConfig};
use crate::spectrum::SpectrumSettings;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid setting: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fkpp,
    Efkpp,
    Cubic,
    #[default]
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub kind: ModelKind,
    pub delta: Option<f64>,
    pub order_half: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub f: Option<Vec<f64>>,
    pub u_minus: Option<f64>,
}

impl ModelSection {
    pub fn spec(&self) -> Result<ModelSpec, ConfigError> {
        let delta = || self.delta.ok_or_else(|| ConfigError::Invalid("model.delta is required for this kind".into()));
        let spec = match self.kind {
            ModelKind::Fkpp => ModelSpec::fkpp(),
            ModelKind::Efkpp => ModelSpec::efkpp(delta()?),
            ModelKind::Cubic => ModelSpec::cubic(delta()?),
            ModelKind::Custom => {
                let p = self.p.clone().ok_or_else(|| ConfigError::Invalid("model.p is required".into()))?;
                let order_half = self.order_half.unwrap_or(p.len() / 2);
                let f = self.f.clone().ok_or_else(|| ConfigError::Invalid("model.f is required".into()))?;
                ModelSpec::new(order_half, p, f, self.u_minus.unwrap_or(1.0))?
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One-parameter family for δ sweeps.
    pub fn family(&self) -> Result<Family, ConfigError> {
        Ok(match self.kind {
            ModelKind::Efkpp => Family::Efkpp,
            ModelKind::Cubic => Family::Cubic,
            _ => Family::Constant { spec: self.spec()? },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub lambda_max: Option<f64>,
    pub k_max: f64,
    pub n_k: usize,
    /// δ values for a speed sweep (families only).
    pub sweep: Vec<f64>,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self { lambda_max: None, k_max: 10.0, n_k: 401, sweep: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontSection {
    pub domain: (f64, f64),
    pub n: usize,
    pub window: Option<(f64, f64)>,
    pub exact_tail: bool,
    /// δ values for a continuation sweep (families only).
    pub continuation: Vec<f64>,
}

impl Default for FrontSection {
    fn default() -> Self {
        Self { domain: (-40.0, 60.0), n: 4000, window: None, exact_tail: true, continuation: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub domain: Option<(f64, f64)>,
    pub n: usize,
    pub front_domain: (f64, f64),
    pub front_n: usize,
    pub margin: f64,
    /// Bracket in δ for the pushed/pulled bisection.
    pub transition: Option<(f64, f64)>,
    /// δ values for an E(0, δ) sweep (families only).
    pub sweep: Vec<f64>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        let s = SpectrumSettings::default();
        Self { domain: s.domain, n: s.n, front_domain: s.front_domain, front_n: s.front_n, margin: s.margin, transition: None, sweep: Vec::new() }
    }
}

impl SpectrumSection {
    pub fn settings(&self) -> SpectrumSettings {
        SpectrumSettings { domain: self.domain, n: self.n, front_domain: self.front_domain, front_n: self.front_n, margin: self.margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InteriorKind {
    #[default]
    Front,
    ExactTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxSection {
    #[serde(rename = "T")]
    pub t_shift: f64,
    pub mu: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub x0: Option<f64>,
    /// Offset added to the default x0 = a (negative control).
    pub x0_offset: f64,
    pub samples: usize,
    pub interior: InteriorKind,
    /// T values for the matching-rate study.
    pub rate_t: Vec<f64>,
}

impl Default for ApproxSection {
    fn default() -> Self {
        let a = ApproxSettings::default();
        Self {
            t_shift: a.t_shift,
            mu: a.mu,
            xi_max: a.xi_max,
            n_xi: a.n_xi,
            x0: None,
            x0_offset: 0.0,
            samples: 12,
            interior: InteriorKind::Front,
            rate_t: vec![1e2, 1e3, 1e4],
        }
    }
}

impl ApproxSection {
    pub fn settings(&self, a: f64) -> ApproxSettings {
        ApproxSettings {
            t_shift: self.t_shift,
            mu: self.mu,
            xi_max: self.xi_max,
            n_xi: self.n_xi,
            x0: Some(self.x0.unwrap_or(a) + self.x0_offset),
            beta0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    Step,
    Front,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelProblemSection {
    #[serde(rename = "T")]
    pub t_shift: f64,
    pub t_final: Option<f64>,
    pub n: usize,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for ModelProblemSection {
    fn default() -> Self {
        Self { t_shift: 100.0, t_final: None, n: 4001, dt: 0.1, record_every: 100 }
    }
}

impl ModelProblemSection {
    pub fn settings(&self, autonomous: bool) -> ModelProblemSettings {
        ModelProblemSettings {
            t_shift: self.t_shift,
            t_final: self.t_final.unwrap_or(100.0 * self.t_shift),
            n: self.n,
            dt: self.dt,
            autonomous,
            length: None,
            record_every: self.record_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub domain: (f64, f64),
    pub n: usize,
    /// Defaults to 0.01 for second-order models and 0.002 otherwise.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub scheme: Scheme,
    pub initial: InitialKind,
    pub sample_every: f64,
    /// Defaults to [t_final/3, t_final].
    pub fit_window: Option<(f64, f64)>,
    pub checkpoints: Vec<f64>,
    pub model_problem: ModelProblemSection,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            domain: (-100.0, 1600.0),
            n: 17000,
            dt: None,
            t_final: 600.0,
            scheme: Scheme::ImexCnAb2,
            initial: InitialKind::Step,
            sample_every: 1.0,
            fit_window: None,
            checkpoints: Vec::new(),
            model_problem: ModelProblemSection::default(),
        }
    }
}

impl SimulateSection {
    pub fn sim_config(&self, spec: &ModelSpec) -> Result<SimConfig, ConfigError> {
        if !(self.sample_every > 0.0) {
            return Err(ConfigError::Invalid("simulate.sample_every must be positive".into()));
        }
        let dt = self.dt.unwrap_or(if spec.order_half == 1 { 0.01 } else { 0.002 });
        let mut c = SimConfig::new(self.domain, self.n, dt, self.t_final);
        c.scheme = self.scheme;
        c.initial = match self.initial {
            InitialKind::Step => InitialData::Step { at: 0.0 },
            InitialKind::Front => InitialData::Front { shift: 0.0 },
        };
        let k = (self.t_final / self.sample_every).floor() as usize;
        c.sample_times = (0..=k).map(|i| i as f64 * self.sample_every).collect();
        c.checkpoint_times = self.checkpoints.clone();
        Ok(c)
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.t_final / 3.0, self.t_final))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub front: FrontSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub approx: ApproxSection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: RunConfig = toml::from_str(text)?;
        c.model.spec()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml(&text)
    }

    /// Canonical TOML; identical for configs that parse to the same value.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_custom() {
        let c = RunConfig::from_toml("[model]\nkind = \"fkpp\"\n").unwrap();
        assert_eq!(c.model.spec().unwrap(), ModelSpec::fkpp());
        let c = RunConfig::from_toml("[model]\nkind = \"cubic\"\ndelta = 0.2\n[spectrum]\ntransition = [0.2, 0.45]\n").unwrap();
        assert_eq!(c.model.spec().unwrap(), ModelSpec::cubic(0.2));
        assert_eq!(c.spectrum.transition, Some((0.2, 0.45)));
        let c = RunConfig::from_toml("[model]\np = [0.0, 1.0]\nf = [1.0, -1.0]\n[approx]\nT = 1000.0\n").unwrap();
        assert_eq!(c.model.spec().unwrap(), ModelSpec::fkpp());
        assert_eq!(c.approx.t_shift, 1000.0);
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(RunConfig::from_toml("[model]\np = []\nf = [1.0, -1.0]\n"), Err(ConfigError::Model(_))));
        assert!(matches!(RunConfig::from_toml("[model]\nkind = \"efkpp\"\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_toml("[model]\nkind = \"fkpp\"\nbogus = 1\n"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn canonical_round_trip() {
        let c = RunConfig::from_toml("[model]\nkind = \"efkpp\"\ndelta = 0.1\n[simulate]\nt_final = 50.0\n").unwrap();
        let again = RunConfig::from_toml(&c.canonical()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.canonical(), again.canonical());
    }
}
