//! Flat key-value run configuration.
//!
//! One plain-text file configures every command: geometry, gait shape,
//! training hyperparameters, and sweep layout. The format is
//! `key = value` per line with `#` comments; unknown and duplicate keys
//! are hard errors so typos cannot silently fall back to defaults.
//! Every key is optional — an empty file means "all defaults".

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::biped::{BipedParams, GaitSpec};
use crate::error::{Error, Result};
use crate::study::SweepConfig;
use crate::train::{MfCountRule, TrainConfig};

/// All tunables of a run, grouped by the module that owns them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: BipedParams,
    pub gait: GaitSpec,
    pub train: TrainConfig,
    pub sizes: Vec<usize>,
    pub test_size: usize,
    pub base_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        Self {
            params: BipedParams::default(),
            gait: GaitSpec::default(),
            train: TrainConfig::default(),
            sizes: sweep.sizes,
            test_size: sweep.test_size,
            base_seed: sweep.base_seed,
        }
    }
}

impl RunConfig {
    /// Assemble the sweep view of this configuration.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            sizes: self.sizes.clone(),
            test_size: self.test_size,
            base_seed: self.base_seed,
            train_config: self.train,
            gait: self.gait,
            params: self.params,
        }
    }

    /// Delegate to every owning module's invariants.
    pub fn validate(&self) -> Result<()> {
        // SweepConfig::validate covers params, gait, training, and the
        // sweep layout in one pass.
        self.sweep_config().validate()
    }
}

/// Read a config file, or return defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            parse_config(&text).map_err(|e| e.with_context(&p.display().to_string()))
        }
    }
}

/// Parse `key = value` lines into a [`RunConfig`], validating eagerly.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 'key = value', got '{line}'"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse(format!("line {line_no}: duplicate key '{key}'")));
        }
        apply_key(&mut config, key, value)
            .map_err(|e| e.with_context(&format!("line {line_no}")))?;
    }

    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "l_thigh" => config.params.l_thigh = parse_f64(key, value)?,
        "l_shank" => config.params.l_shank = parse_f64(key, value)?,
        "step_length" => config.gait.step_length = parse_f64(key, value)?,
        "step_height" => config.gait.step_height = parse_f64(key, value)?,
        "com_height" => config.gait.com_height = parse_f64(key, value)?,
        "com_bob" => config.gait.com_bob = parse_f64(key, value)?,
        "phase_jitter" => config.gait.phase_jitter = parse_f64(key, value)?,
        "n_samples" => config.gait.n_samples = parse_usize(key, value)?,
        "data_seed" => config.gait.seed = parse_u64(key, value)?,
        "epochs" => config.train.epochs = parse_usize(key, value)?,
        "learn_rate" => config.train.learn_rate = parse_f64(key, value)?,
        "ridge_lambda" => config.train.ridge_lambda = parse_f64(key, value)?,
        "train_seed" => config.train.seed = parse_u64(key, value)?,
        "mfs_per_input" => {
            config.train.mf_count = if value.eq_ignore_ascii_case("auto") {
                MfCountRule::Auto
            } else {
                MfCountRule::Fixed(parse_usize(key, value)?)
            };
        }
        "sizes" => {
            let mut sizes = Vec::new();
            for part in value.split(',') {
                sizes.push(parse_usize(key, part.trim())?);
            }
            config.sizes = sizes;
        }
        "test_size" => config.test_size = parse_usize(key, value)?,
        "base_seed" => config.base_seed = parse_u64(key, value)?,
        _ => {
            return Err(Error::Parse(format!("unknown config key '{key}'")));
        }
    }
    Ok(())
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| Error::Parse(format!("key '{key}': invalid number '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::Parse(format!("key '{key}': invalid integer '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.parse().map_err(|_| Error::Parse(format!("key '{key}': invalid seed '{value}'")))
}
