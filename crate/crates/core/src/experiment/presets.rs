use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Shipped experiment configurations, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("loss-vs-delay", include_str!("../../presets/loss-vs-delay.toml")),
    ("loss-vs-correlation", include_str!("../../presets/loss-vs-correlation.toml")),
    ("naive-gaussian", include_str!("../../presets/naive-gaussian.toml")),
    ("naive-pentagon", include_str!("../../presets/naive-pentagon.toml")),
    ("convex-scaling", include_str!("../../presets/convex-scaling.toml")),
    ("strong-delay", include_str!("../../presets/strong-delay.toml")),
    ("mirror-scaling", include_str!("../../presets/mirror-scaling.toml")),
    ("adversarial-scaling", include_str!("../../presets/adversarial-scaling.toml")),
    ("single-run", include_str!("../../presets/single-run.toml")),
];

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load_preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_source(name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        Error::Config(format!("unknown preset '{name}', expected one of {}", known.join(", ")))
    })?;
    ExperimentConfig::from_toml(text)
}

/// First comment line of a preset.
pub fn preset_description(name: &str) -> Option<&'static str> {
    preset_source(name)?
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
}
