//! On-disk formats: gait datasets and walk logs as CSV text, trained
//! hierarchies as versioned JSON model files.
//!
//! Every float is written as the shortest decimal that parses back to
//! the exact same bits (Rust's default float formatting, and the JSON
//! serializer's), so save → load → save is byte-identical and nothing
//! drifts across round trips.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::biped::{BipedParams, GaitSample};
use crate::error::{Error, Result};
use crate::fuzzy::TsFis;
use crate::hierarchy::{build_specs, ControllerId, HflcNode, Hierarchy, ModelReport, WalkLogEntry};
use crate::train::TrainConfig;

/// Version stamp written into every model file; loading rejects any
/// other value.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the gait dataset CSV.
pub const DATASET_HEADER: &str =
    "t,x0,y0,beta_left,gamma_left,xcl,ycl,beta_right,gamma_right,xcr,ycr";

/// Column order of the closed-loop walk log CSV.
pub const WALK_LOG_HEADER: &str = "t,x0_ref,y0_ref,x0_est,y0_est,beta_left,gamma_left,\
                                   xcl,ycl,beta_right,gamma_right,xcr,ycr,iters,converged,residual";

/// One trained model plus its training provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub controller: ControllerId,
    pub output_index: usize,
    /// Name of the signal this model predicts.
    pub output: String,
    /// Derived seed the model was trained with.
    pub seed: u64,
    pub final_train_se: f64,
    pub fis: TsFis,
}

/// Serialized form of a trained hierarchy: all eight models with their
/// full parameterization, the geometry, and the training configuration
/// they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub params: BipedParams,
    pub train_config: TrainConfig,
    pub models: Vec<ModelEntry>,
}

impl ModelFile {
    /// Package a trained hierarchy and its per-model reports for saving.
    pub fn from_hierarchy(h: &Hierarchy, config: &TrainConfig, reports: &[ModelReport]) -> Self {
        let models = reports
            .iter()
            .map(|r| ModelEntry {
                controller: r.controller,
                output_index: r.output_index,
                output: r.output.clone(),
                seed: r.seed,
                final_train_se: r.report.final_train_se,
                fis: h
                    .model(r.controller, r.output_index)
                    .expect("report refers to a model present in the hierarchy")
                    .clone(),
            })
            .collect();
        Self { schema_version: SCHEMA_VERSION, params: h.params, train_config: *config, models }
    }

    /// Reassemble the hierarchy, re-validating wiring and model shapes.
    pub fn into_hierarchy(self) -> Result<Hierarchy> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model file schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut nodes = Vec::new();
        for spec in build_specs() {
            let mut models = Vec::with_capacity(spec.outputs.len());
            for j in 0..spec.outputs.len() {
                let matches: Vec<&ModelEntry> = self
                    .models
                    .iter()
                    .filter(|m| m.controller == spec.id && m.output_index == j)
                    .collect();
                match matches.as_slice() {
                    [entry] => models.push(entry.fis.clone()),
                    [] => {
                        return Err(Error::Parse(format!(
                            "model file is missing {} output '{}'",
                            spec.id, spec.outputs[j]
                        )))
                    }
                    _ => {
                        return Err(Error::Parse(format!(
                            "model file lists {} output '{}' more than once",
                            spec.id, spec.outputs[j]
                        )))
                    }
                }
            }
            nodes.push(HflcNode { spec, models });
        }
        let hierarchy = Hierarchy { nodes, params: self.params };
        hierarchy.validate()?;
        Ok(hierarchy)
    }
}

/// Write a model file as pretty-printed JSON with a trailing newline.
pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Parse(format!("cannot serialize model file: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Read and version-check a model file.
pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("invalid model file: {e}")))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported model file schema version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

/// Render gait samples as CSV with the [`DATASET_HEADER`] column order.
pub fn dataset_to_csv(samples: &[GaitSample]) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.t,
            s.x0,
            s.y0,
            s.beta_left,
            s.gamma_left,
            s.xcl,
            s.ycl,
            s.beta_right,
            s.gamma_right,
            s.xcr,
            s.ycr
        ));
    }
    out
}

/// Parse gait samples back from CSV, naming the offending column or row
/// on any mismatch.
pub fn dataset_from_csv(text: &str) -> Result<Vec<GaitSample>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("dataset is empty (no header)".into()))?;
    let found: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected: Vec<&str> = DATASET_HEADER.split(',').collect();
    for col in &expected {
        if !found.contains(col) {
            return Err(Error::Parse(format!("dataset header missing column '{col}'")));
        }
    }
    if found != expected {
        return Err(Error::Parse(format!(
            "dataset header must be '{DATASET_HEADER}', got '{header}'"
        )));
    }

    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected.len() {
            return Err(Error::Parse(format!(
                "data row {row}: expected {} fields, got {}",
                expected.len(),
                fields.len()
            )));
        }
        let mut values = [0.0f64; 11];
        for ((value, token), name) in values.iter_mut().zip(&fields).zip(&expected) {
            *value = token.trim().parse().map_err(|_| {
                Error::Parse(format!("data row {row}: column '{name}': invalid number '{token}'"))
            })?;
            if !value.is_finite() {
                return Err(Error::Parse(format!("data row {row}: column '{name}' is not finite")));
            }
        }
        let [t, x0, y0, beta_left, gamma_left, xcl, ycl, beta_right, gamma_right, xcr, ycr] =
            values;
        samples.push(GaitSample {
            t,
            x0,
            y0,
            beta_left,
            gamma_left,
            xcl,
            ycl,
            beta_right,
            gamma_right,
            xcr,
            ycr,
        });
    }
    Ok(samples)
}

/// Render a closed-loop walk log as CSV with the [`WALK_LOG_HEADER`]
/// column order.
pub fn walk_log_to_csv(log: &[WalkLogEntry]) -> String {
    let mut out = String::from(WALK_LOG_HEADER);
    out.push('\n');
    for e in log {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            e.t,
            e.x0_ref,
            e.y0_ref,
            e.x0_est,
            e.y0_est,
            e.beta_left,
            e.gamma_left,
            e.xcl,
            e.ycl,
            e.beta_right,
            e.gamma_right,
            e.xcr,
            e.ycr,
            e.iters,
            e.converged,
            e.residual
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biped::{generate_dataset, GaitSpec};
    use crate::hierarchy::train_hierarchy;
    use tempfile::tempdir;

    fn small_hierarchy() -> (Hierarchy, Vec<ModelReport>, TrainConfig) {
        let samples = generate_dataset(&BipedParams::default(), &GaitSpec::default()).unwrap();
        let config = TrainConfig { epochs: 2, ..TrainConfig::default() };
        let (h, reports) = train_hierarchy(&samples, BipedParams::default(), &config).unwrap();
        (h, reports, config)
    }

    #[test]
    fn dataset_csv_round_trips_bit_exactly() {
        let samples = generate_dataset(&BipedParams::default(), &GaitSpec::default()).unwrap();
        let csv = dataset_to_csv(&samples);
        assert!(csv.starts_with(DATASET_HEADER));
        assert_eq!(csv.lines().count(), samples.len() + 1);
        assert!(csv.ends_with('\n'));

        let back = dataset_from_csv(&csv).unwrap();
        assert_eq!(back, samples);
        assert_eq!(dataset_to_csv(&back), csv);
    }

    #[test]
    fn missing_dataset_column_is_named() {
        let csv = "t,x0,y0,beta_left,xcl,ycl,beta_right,gamma_right,xcr,ycr\n";
        let err = dataset_from_csv(csv).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("gamma_left"), "got: {err}");
    }

    #[test]
    fn reordered_header_is_rejected() {
        let reordered = "x0,t,y0,beta_left,gamma_left,xcl,ycl,beta_right,gamma_right,xcr,ycr\n";
        assert!(dataset_from_csv(reordered).is_err());
    }

    #[test]
    fn bad_cells_are_located_by_row_and_column() {
        let mut csv = String::from(DATASET_HEADER);
        csv.push_str("\n0,0,0.9,0,0,0,0,0,0,0,0\n0.5,0,0.9,0,oops,0,0,0,0,0,0\n");
        let err = dataset_from_csv(&csv).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("gamma_left") && err.contains("oops"));

        let mut short = String::from(DATASET_HEADER);
        short.push_str("\n0,0,0.9\n");
        let err = dataset_from_csv(&short).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("11 fields"));

        let mut inf = String::from(DATASET_HEADER);
        inf.push_str("\n0,inf,0.9,0,0,0,0,0,0,0,0\n");
        let err = dataset_from_csv(&inf).unwrap_err().to_string();
        assert!(err.contains("x0") && err.contains("not finite"));
    }

    #[test]
    fn model_file_round_trips_bit_exactly() {
        let (h, reports, config) = small_hierarchy();
        let file = ModelFile::from_hierarchy(&h, &config, &reports);
        assert_eq!(file.models.len(), 8);

        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &file).unwrap();

        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, file);
        let rebuilt = loaded.into_hierarchy().unwrap();
        assert_eq!(rebuilt, h);
    }

    #[test]
    fn resaving_a_loaded_model_is_byte_identical() {
        let (h, reports, config) = small_hierarchy();
        let dir = tempdir().unwrap();
        let first = dir.path().join("a.json");
        let second = dir.path().join("b.json");

        save_model(&first, &ModelFile::from_hierarchy(&h, &config, &reports)).unwrap();
        let loaded = load_model(&first).unwrap();
        save_model(&second, &loaded).unwrap();

        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let (h, reports, config) = small_hierarchy();
        let mut file = ModelFile::from_hierarchy(&h, &config, &reports);
        file.schema_version = 2;

        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut text = serde_json::to_string_pretty(&file).unwrap();
        text.push('\n');
        fs::write(&path, text).unwrap();

        let err = load_model(&path).unwrap_err().to_string();
        assert!(err.contains("schema version 2"), "got: {err}");
        assert!(file.into_hierarchy().is_err());
    }

    #[test]
    fn incomplete_model_files_are_rejected() {
        let (h, reports, config) = small_hierarchy();
        let mut file = ModelFile::from_hierarchy(&h, &config, &reports);
        let dropped = file.models.pop().unwrap();
        let err = file.clone().into_hierarchy().unwrap_err().to_string();
        assert!(err.contains(&dropped.output), "got: {err}");

        file.models.push(dropped.clone());
        file.models.push(dropped);
        let err = file.into_hierarchy().unwrap_err().to_string();
        assert!(err.contains("more than once"), "got: {err}");
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_model(&path), Err(Error::Parse(_))));
        assert!(matches!(load_model(&dir.path().join("absent.json")), Err(Error::Io(_))));
    }

    #[test]
    fn walk_log_csv_has_one_row_per_entry() {
        let entry = WalkLogEntry {
            t: 0.5,
            x0_ref: 0.15,
            y0_ref: 0.9,
            x0_est: 0.14,
            y0_est: 0.91,
            beta_left: 0.1,
            gamma_left: 0.2,
            xcl: 0.0,
            ycl: 0.0,
            beta_right: -0.1,
            gamma_right: 0.3,
            xcr: 0.0,
            ycr: 0.05,
            iters: 3,
            converged: true,
            residual: 1e-7,
        };
        let csv = walk_log_to_csv(&[entry]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("t,x0_ref,y0_ref,x0_est,y0_est"));
        assert_eq!(lines[0].split(',').count(), 16);
        assert_eq!(lines[1].split(',').count(), 16);
        assert!(lines[1].contains("true"));
        assert!(lines[1].ends_with("0.0000001"));
    }
}
