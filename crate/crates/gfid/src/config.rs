//! Scenario files.
//!
//! A scenario is a list of settings crossed with an input grid and a noise
//! grid. Every (setting, k, σ) combination is one cell; each cell runs
//! `trials` independent instances.

use std::path::Path;

use gfid_core::filters::FilterRule;
use gfid_core::graph::GraphModel;
use gfid_core::sparse::{WeightScheme, DEFAULT_DELTA};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
}

impl ConfigError {
    fn at(path: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError::Invalid { path: path.into(), msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Independent filters, one output each.
    #[default]
    Multi,
    /// Nested filters sampled from one diffusion.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputGrid {
    /// Bandlimited inputs, one cell per bandwidth.
    Bandlimited {
        k: Vec<usize>,
    },
    FullNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    #[default]
    None,
    Nonnegative,
    NonnegDecreasing,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Null-space least squares with the true orders.
    Ls,
    /// Weighted ℓ1 with an exact data constraint.
    L1Eq {
        overshoot: Vec<usize>,
        weights: WeightScheme,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        pin: usize,
        /// Redraw instances whose support columns are rank deficient.
        #[serde(default)]
        require_rank: bool,
    },
    /// Weighted ℓ1 inside a data ball whose radius is the truth's residual.
    L1Ball {
        overshoot: Vec<usize>,
        weights: WeightScheme,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        pin: usize,
        #[serde(default)]
        constraint: Constraint,
        #[serde(default)]
        require_rank: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub label: String,
    /// Overrides the scenario graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphModel>,
    pub filters: FilterRule,
    pub method: Method,
}

fn default_threshold() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub process: Process,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphModel>,
    pub input: InputGrid,
    pub sigma: Vec<f64>,
    pub settings: Vec<Setting>,
    pub trials: usize,
    /// Trial count used with `--full-scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_scale_trials: Option<usize>,
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Fill the `wall_ms` column. Off by default so output stays reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::at(if path == "." { "<root>".into() } else { path }, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn graph_for<'a>(&'a self, setting: &'a Setting) -> &'a GraphModel {
        setting.graph.as_ref().or(self.graph.as_ref()).expect("validated")
    }

    /// Bandwidths of the input grid; `None` for full-band inputs.
    pub fn k_values(&self) -> Vec<Option<usize>> {
        match &self.input {
            InputGrid::Bandlimited { k } => k.iter().map(|&k| Some(k)).collect(),
            InputGrid::FullNormal => vec![None],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.settings.len() * self.k_values().len() * self.sigma.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario.is_empty() || self.scenario.contains([',', '"', '\n']) {
            return Err(ConfigError::at("scenario", "must be non-empty without commas or quotes"));
        }
        if self.trials == 0 {
            return Err(ConfigError::at("trials", "must be at least 1"));
        }
        if self.full_scale_trials == Some(0) {
            return Err(ConfigError::at("full_scale_trials", "must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(ConfigError::at("threshold", "must be positive"));
        }
        if self.sigma.is_empty() {
            return Err(ConfigError::at("sigma", "grid is empty"));
        }
        for (i, s) in self.sigma.iter().enumerate() {
            if !(*s >= 0.0 && s.is_finite()) {
                return Err(ConfigError::at(format!("sigma[{i}]"), format!("{s} is not a noise level")));
            }
        }
        if self.settings.is_empty() {
            return Err(ConfigError::at("settings", "list is empty"));
        }
        if let Some(g) = &self.graph {
            g.validate().map_err(|e| ConfigError::at("graph", e.to_string()))?;
        }
        for (i, s) in self.settings.iter().enumerate() {
            self.validate_setting(s, &format!("settings[{i}]"))?;
        }
        Ok(())
    }

    fn validate_setting(&self, s: &Setting, at: &str) -> Result<(), ConfigError> {
        if s.label.is_empty() || s.label.contains([',', '"', '\n']) {
            return Err(ConfigError::at(format!("{at}.label"), "must be non-empty without commas or quotes"));
        }
        let graph = match (&s.graph, &self.graph) {
            (Some(g), _) => {
                g.validate().map_err(|e| ConfigError::at(format!("{at}.graph"), e.to_string()))?;
                g
            }
            (None, Some(g)) => g,
            (None, None) => return Err(ConfigError::at(format!("{at}.graph"), "no graph here or at the top level")),
        };
        if let InputGrid::Bandlimited { k } = &self.input {
            if k.is_empty() {
                return Err(ConfigError::at("input.k", "grid is empty"));
            }
            if let Some((j, bad)) = k.iter().enumerate().find(|(_, &k)| k == 0 || k > graph.n()) {
                return Err(ConfigError::at(format!("input.k[{j}]"), format!("{bad} outside 1..={}", graph.n())));
            }
        }
        s.filters.validate().map_err(|e| ConfigError::at(format!("{at}.filters"), e.to_string()))?;
        let orders = s.filters.orders();
        if self.process == Process::Multi && orders.len() < 2 {
            return Err(ConfigError::at(format!("{at}.filters"), "need at least two filters"));
        }
        if self.process == Process::Single {
            if matches!(s.filters, FilterRule::CorrelatedNormal { .. }) {
                return Err(ConfigError::at(format!("{at}.filters.rule"), "correlated_normal is multi-process only"));
            }
            if orders.len() < 2 || orders.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::at(
                    format!("{at}.filters.orders"),
                    "must be strictly increasing with two or more entries",
                ));
            }
        }
        match &s.method {
            Method::Ls => Ok(()),
            Method::L1Eq { overshoot, delta, pin, .. } | Method::L1Ball { overshoot, delta, pin, .. } => {
                let path = format!("{at}.method.overshoot");
                if overshoot.len() != orders.len() {
                    return Err(ConfigError::at(
                        path,
                        format!("has {} entries for {} filters", overshoot.len(), orders.len()),
                    ));
                }
                // single-process blocks are indexed from the constant term too
                if let Some(m) = (0..orders.len()).find(|&m| overshoot[m] < orders[m]) {
                    return Err(ConfigError::at(format!("{path}[{m}]"), "smaller than the true order"));
                }
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(ConfigError::at(format!("{at}.method.delta"), "must be positive"));
                }
                if *pin >= overshoot.iter().sum::<usize>() {
                    return Err(ConfigError::at(format!("{at}.method.pin"), "outside the coefficient vector"));
                }
                if self.process == Process::Multi {
                    if let Method::L1Ball { constraint, .. } = &s.method {
                        if *constraint != Constraint::None {
                            return Err(ConfigError::at(
                                format!("{at}.method.constraint"),
                                "only available for single-process scenarios",
                            ));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}
