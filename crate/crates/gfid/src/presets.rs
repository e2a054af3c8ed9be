//! Bundled scenarios.

use crate::config::{ConfigError, ScenarioConfig};

pub const PRESETS: [(&str, &str); 7] = [
    ("fig1a", include_str!("../presets/fig1a.json")),
    ("fig1b", include_str!("../presets/fig1b.json")),
    ("fig1c", include_str!("../presets/fig1c.json")),
    ("fig2a", include_str!("../presets/fig2a.json")),
    ("fig2b", include_str!("../presets/fig2b.json")),
    ("fig3a", include_str!("../presets/fig3a.json")),
    ("fig3b", include_str!("../presets/fig3b.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_json(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
}

pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let json = preset_json(name).ok_or_else(|| ConfigError::Invalid {
        path: "preset".into(),
        msg: format!("unknown preset {name:?}; available: {}", names().collect::<Vec<_>>().join(", ")),
    })?;
    ScenarioConfig::from_json(json)
}
