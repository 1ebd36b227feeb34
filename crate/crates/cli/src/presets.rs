//! Built-in experiment configurations, one per published-style study.

use crate::config::{parse_config, ExperimentConfig};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML text)` for every preset.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "hn-spectrum-collapse",
    "hn-imv-disorder",
    "hn-winding",
    "ab-imv-uniform",
    "ab-imv-disorder",
    "ab-correlation-decay",
    "ab-renyi-scaling",
    "ab-eigenstate-scatter",
    "hn-thermal-imv",
    "hn-ed-interaction",
    "ab-adiabatic",
);

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    preset_text(name).map(|t| parse_config(t, None).expect("built-in presets are valid"))
}
