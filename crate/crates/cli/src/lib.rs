//! Experiment runner for the blockfresh models.
//!
//! An [`ExperimentSpec`] starts from a built-in preset, is overlaid with an
//! optional config file and then with command-line overrides, and is run by
//! [`run_experiment`], which writes CSV/JSON files plus `manifest.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod presets;
pub mod run;
pub mod spec;

use std::path::PathBuf;

use serde_json::Value;

pub use error::CliError;
pub use presets::{list_experiments, preset, PresetInfo};
pub use run::{run_experiment, ExperimentManifest, MANIFEST_FILE};
pub use spec::{Experiment, ExperimentSpec};

/// Values given on the command line; they take precedence over the config
/// file and the preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
}

/// Parses a comma-separated seed list such as `0,1,2`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("invalid seed {s:?}")))
        })
        .collect()
}

/// Parses a config file as JSON when it starts with `{`, TOML otherwise.
pub fn parse_config_value(text: &str) -> Result<Value, CliError> {
    let value: Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?
    };
    if !value.is_object() {
        return Err(CliError::Validation("config must be a table".into()));
    }
    Ok(value)
}

/// Recursively overlays `top` onto `base`; non-table values replace.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `config` and then `overrides` on top of `base`.
pub fn resolve(
    base: &ExperimentSpec,
    config: Option<Value>,
    overrides: &Overrides,
) -> Result<ExperimentSpec, CliError> {
    let mut value = serde_json::to_value(base).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(config) = config {
        if let Some(kind) = config.pointer("/experiment/kind") {
            if kind.as_str() != Some(base.experiment.kind()) {
                return Err(CliError::Validation(format!(
                    "config describes a {kind} experiment but this command runs {}",
                    base.experiment.kind()
                )));
            }
        }
        merge(&mut value, config);
    }
    let mut spec: ExperimentSpec =
        serde_json::from_value(value).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    apply_overrides(&mut spec, overrides)?;
    spec.validate()?;
    Ok(spec)
}

fn apply_overrides(spec: &mut ExperimentSpec, o: &Overrides) -> Result<(), CliError> {
    if let Some(out) = &o.out {
        spec.output_dir = out.clone();
    }
    if let Some(seeds) = &o.seeds {
        spec.seeds = seeds.clone();
    }
    let kind = spec.experiment.kind();
    if let Some(step) = o.step {
        match &mut spec.experiment {
            Experiment::EpidemicRun(s) => s.step = step,
            Experiment::GamePortrait(s) => s.step = step,
            Experiment::AbmRun(s) => s.step = step,
            _ => {
                return Err(CliError::Validation(format!(
                    "--step does not apply to {kind}"
                )))
            }
        }
    }
    if let Some(horizon) = o.horizon {
        match &mut spec.experiment {
            Experiment::EpidemicRun(s) => s.horizon = horizon,
            _ => {
                return Err(CliError::Validation(format!(
                    "--horizon does not apply to {kind}"
                )))
            }
        }
    }
    Ok(())
}
