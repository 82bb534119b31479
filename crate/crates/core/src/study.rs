//! Training-set-size sweep: how controller quality depends on how much
//! gait data the models are trained on.
//!
//! A sweep trains the full hierarchy once per configured training-set
//! size and scores every model on one shared test set, reporting the
//! cumulative square error (the headline metric — it is what the
//! operator plots), the RMSE (comparable across test sets of different
//! length), and the final training SE. Everything is seeded: the test
//! set gets `base_seed + 1`, the training set of size `s` gets
//! `base_seed + s`, so each size sees distinct but reproducible data and
//! no training set ever aliases the test set.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::biped::{generate_dataset, BipedParams, GaitSpec};
use crate::error::{Error, Result};
use crate::fuzzy::{response_surface, TsFis};
use crate::hierarchy::{project_dataset, train_hierarchy, ControllerId, Hierarchy, ModelReport};
use crate::train::{evaluate, TrainConfig};

/// Training-set sizes exercised by default.
pub const DEFAULT_SIZES: [usize; 5] = [10, 30, 40, 60, 120];

/// Shared test-set size used when none is configured.
pub const DEFAULT_TEST_SIZE: usize = 200;

/// Everything a sweep needs: which sizes to train at, how large the
/// shared test set is, the seed schedule root, and the training/gait
/// setup handed through to the underlying modules.
///
/// The embedded gait's own `n_samples` and `seed` are superseded by the
/// sweep: sizes drive the sample counts and the seed schedule drives the
/// seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub test_size: usize,
    pub base_seed: u64,
    pub train_config: TrainConfig,
    pub gait: GaitSpec,
    pub params: BipedParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: DEFAULT_SIZES.to_vec(),
            test_size: DEFAULT_TEST_SIZE,
            base_seed: 42,
            train_config: TrainConfig::default(),
            gait: GaitSpec::default(),
            params: BipedParams::default(),
        }
    }
}

impl SweepConfig {
    /// Seed of the shared test set. Training sizes are at least 2, so
    /// this never collides with any training seed.
    pub fn test_seed(&self) -> u64 {
        self.base_seed.wrapping_add(1)
    }

    /// Seed of the training set of `size` samples.
    pub fn train_seed(&self, size: usize) -> u64 {
        self.base_seed.wrapping_add(size as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.gait.validate()?;
        self.train_config.validate()?;
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one training size".into()));
        }
        for &size in &self.sizes {
            if size < 2 {
                return Err(Error::InvalidArgument(format!(
                    "training sizes must be >= 2, got {size}"
                )));
            }
        }
        let mut seen = self.sizes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.sizes.len() {
            return Err(Error::InvalidArgument("training sizes must be distinct".into()));
        }
        if self.test_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "test_size must be >= 2, got {}",
                self.test_size
            )));
        }
        // Train/test separation, checked before any data is generated.
        for &size in &self.sizes {
            if self.train_seed(size) == self.test_seed() {
                return Err(Error::InvalidArgument(format!(
                    "training size {size} would reuse the test seed"
                )));
            }
        }
        Ok(())
    }
}

/// One model's scores at one training-set size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub controller: ControllerId,
    pub output_index: usize,
    /// Name of the signal this model predicts.
    pub output: String,
    /// Training-set size this model was trained at.
    pub size: usize,
    /// Sum of squared residuals over the shared test set.
    pub cumulative_se: f64,
    /// Root-mean-square residual over the shared test set.
    pub rmse: f64,
    /// Final training square error, copied from the training report.
    pub train_se: f64,
}

/// Provenance of a sweep: the exact seeds used, the configuration, and
/// when it ran. The timestamp never appears in exported tables, so
/// re-running a sweep still reproduces files byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub test_seed: u64,
    /// `(size, seed)` per training set, in configured order.
    pub train_seeds: Vec<(usize, u64)>,
    pub config: SweepConfig,
    pub unix_timestamp: u64,
}

/// The hierarchy trained at one size, kept so callers can persist or
/// interrogate the actual models behind the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSize {
    pub size: usize,
    pub hierarchy: Hierarchy,
    pub reports: Vec<ModelReport>,
}

/// Output of [`run_sweep`]: one entry per (model, size) pair plus the
/// trained hierarchies themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub models: Vec<TrainedSize>,
    pub metadata: SweepMetadata,
}

/// Train the hierarchy at every configured size and score all models on
/// one shared test set.
///
/// Deterministic apart from the metadata timestamp: identical configs
/// produce identical entries and identical trained models.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;

    let test_gait =
        GaitSpec { n_samples: config.test_size, seed: config.test_seed(), ..config.gait };
    let test_samples = generate_dataset(&config.params, &test_gait)
        .map_err(|e| e.with_context("sweep test set"))?;

    let mut entries = Vec::new();
    let mut models = Vec::new();
    for &size in &config.sizes {
        let ctx = format!("sweep size {size}");
        let train_gait = GaitSpec { n_samples: size, seed: config.train_seed(size), ..config.gait };
        let train_samples =
            generate_dataset(&config.params, &train_gait).map_err(|e| e.with_context(&ctx))?;
        let (hierarchy, reports) =
            train_hierarchy(&train_samples, config.params, &config.train_config)
                .map_err(|e| e.with_context(&ctx))?;

        for report in &reports {
            let node = hierarchy
                .node(report.controller)
                .expect("trained hierarchy holds a node for each of its reports");
            let test_view = project_dataset(&test_samples, &node.spec, report.output_index)
                .map_err(|e| e.with_context(&ctx))?;
            let model = hierarchy
                .model(report.controller, report.output_index)
                .expect("trained hierarchy holds a model for each of its reports");
            let metrics = evaluate(model, &test_view).map_err(|e| {
                e.with_context(&format!("{ctx}: {} output '{}'", report.controller, report.output))
            })?;
            entries.push(SweepEntry {
                controller: report.controller,
                output_index: report.output_index,
                output: report.output.clone(),
                size,
                cumulative_se: metrics.cumulative_se,
                rmse: metrics.rmse,
                train_se: report.report.final_train_se,
            });
        }
        models.push(TrainedSize { size, hierarchy, reports });
    }

    let metadata = SweepMetadata {
        test_seed: config.test_seed(),
        train_seeds: config.sizes.iter().map(|&s| (s, config.train_seed(s))).collect(),
        config: config.clone(),
        unix_timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    Ok(SweepResult { entries, models, metadata })
}

/// Render the sweep scores as CSV: header
/// `controller,output,size,cumulative_se,rmse,train_se`, rows sorted by
/// controller, then output, then size. Floats are printed with the
/// shortest decimal that parses back to the exact same value, so
/// re-exporting a result is byte-identical and parsing recovers every
/// field exactly.
pub fn export_error_table(result: &SweepResult) -> String {
    let mut rows: Vec<&SweepEntry> = result.entries.iter().collect();
    rows.sort_by(|a, b| {
        (a.controller, a.output_index, a.size).cmp(&(b.controller, b.output_index, b.size))
    });
    let mut out = String::from("controller,output,size,cumulative_se,rmse,train_se\n");
    for e in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.controller, e.output, e.size, e.cumulative_se, e.rmse, e.train_se
        ));
    }
    out
}

/// Render a model's response surface as CSV (`xi,xj,y` header, then the
/// grid in [`response_surface`] order, axis `i` varying fastest).
pub fn export_surface(
    fis: &TsFis,
    axis_i: usize,
    axis_j: usize,
    fixed: &[(usize, f64)],
    resolution: usize,
) -> Result<String> {
    let points = response_surface(fis, axis_i, axis_j, fixed, resolution)?;
    let mut out = String::from("xi,xj,y\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.xi, p.xj, p.y));
    }
    Ok(out)
}
