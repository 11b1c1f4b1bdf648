//! Versioned JSON documents written by the commands, and their validators.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tsxplain::evaluation::{DivisionHazard, EvalReport, WindowRecord};
use tsxplain::{Attribution, ExplainConfig, ReplacementKind, SegmentMap, SegmenterConfig};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn check_version(v: u32) -> Result<(), String> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(format!("unsupported schema_version {v}"))
    }
}

fn flatten_labels(shape: [usize; 2], labels: &[Vec<usize>]) -> Result<SegmentMap, String> {
    if labels.len() != shape[0] || labels.iter().any(|r| r.len() != shape[1]) {
        return Err(format!("labels do not match shape {shape:?}"));
    }
    SegmentMap::from_labels(shape[0], shape[1], labels.concat()).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentMapDoc {
    pub schema_version: u32,
    pub algorithm: String,
    pub shape: [usize; 2],
    pub num_segments: usize,
    pub labels: Vec<Vec<usize>>,
}

impl SegmentMapDoc {
    pub fn new(algorithm: &str, map: &SegmentMap) -> Self {
        SegmentMapDoc {
            schema_version: SCHEMA_VERSION,
            algorithm: algorithm.to_string(),
            shape: [map.timesteps(), map.features()],
            num_segments: map.num_segments(),
            labels: map.to_rows(),
        }
    }

    pub fn validate(&self) -> Result<SegmentMap, String> {
        check_version(self.schema_version)?;
        let map = flatten_labels(self.shape, &self.labels)?;
        if map.num_segments() != self.num_segments {
            return Err(format!("num_segments {} but labels hold {}", self.num_segments, map.num_segments()));
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributionDoc {
    pub schema_version: u32,
    pub shape: [usize; 2],
    pub labels: Vec<Vec<usize>>,
    pub segment_coefficients: Vec<f64>,
    pub intercept: f64,
    pub weights: Vec<Vec<f64>>,
}

impl AttributionDoc {
    pub fn new(attribution: &Attribution) -> Self {
        let (t, f) = attribution.shape();
        AttributionDoc {
            schema_version: SCHEMA_VERSION,
            shape: [t, f],
            labels: attribution.segments().to_rows(),
            segment_coefficients: attribution.segment_coefficients().to_vec(),
            intercept: attribution.intercept(),
            weights: attribution.weight_rows(),
        }
    }

    /// Checks the document is self-consistent: weights are the broadcast of
    /// the segment coefficients over the labels.
    pub fn validate(&self) -> Result<Attribution, String> {
        check_version(self.schema_version)?;
        let map = flatten_labels(self.shape, &self.labels)?;
        if map.num_segments() != self.segment_coefficients.len() {
            return Err("one coefficient per segment required".into());
        }
        let attribution = Attribution::broadcast(map, self.segment_coefficients.clone(), self.intercept);
        if attribution.weight_rows() != self.weights {
            return Err("weights are not the broadcast of the segment coefficients".into());
        }
        Ok(attribution)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoResult {
    pub segmenter: SegmenterConfig,
    pub mse_pert: f64,
    pub mse_rand: f64,
    pub pert_c: Option<f64>,
    pub rand_c: Option<f64>,
    pub score: Option<f64>,
    pub hazard: Option<DivisionHazard>,
    pub degenerate_count: usize,
    pub windows: Vec<WindowRecord>,
}

impl AlgoResult {
    pub fn new(segmenter: SegmenterConfig, report: &EvalReport) -> Self {
        AlgoResult {
            segmenter,
            mse_pert: report.mse_pert,
            mse_rand: report.mse_rand,
            pert_c: report.pert_c,
            rand_c: report.rand_c,
            score: report.score,
            hazard: report.hazard,
            degenerate_count: report.degenerate_count,
            windows: report.windows.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalDocConfig {
    pub model: String,
    pub replacement: ReplacementKind,
    pub percentile: f64,
    pub window_length: usize,
    pub target_feature: usize,
    pub num_windows: usize,
    pub rng_seed: u64,
    pub random_repeats: usize,
    pub mirror_baseline: bool,
    pub explain: ExplainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalDoc {
    pub schema_version: u32,
    pub config: EvalDocConfig,
    pub mse_orig: f64,
    pub per_algo: BTreeMap<String, AlgoResult>,
}

impl EvalDoc {
    pub fn validate(&self) -> Result<(), String> {
        check_version(self.schema_version)?;
        for (name, r) in &self.per_algo {
            if r.windows.len() != self.config.num_windows {
                return Err(format!("{name}: {} window records for {} windows", r.windows.len(), self.config.num_windows));
            }
            if let (Some(p), Some(q), Some(s)) = (r.pert_c, r.rand_c, r.score) {
                if (s - p.abs() / q.abs()).abs() > 1e-12 * s.max(1.0) {
                    return Err(format!("{name}: score is not |pert_c| / |rand_c|"));
                }
            }
            if r.score.is_some() == r.hazard.is_some() {
                return Err(format!("{name}: exactly one of score and hazard must be set"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path, label: String) -> Result<FileDigest, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(FileDigest {
        path: label,
        sha256: sha256_hex(&bytes),
    })
}

/// Everything needed to rerun a command: the parsed invocation (output
/// directory excluded), resolved parameters, seeds and content digests of
/// inputs and outputs. Carries no timestamps, so reruns produce identical
/// manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub invocation: serde_json::Value,
    pub parameters: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents contain finite floats only");
    s.push('\n');
    s
}
