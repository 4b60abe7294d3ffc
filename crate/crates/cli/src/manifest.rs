use std::collections::BTreeMap;
use std::path::Path;

use pcdenoise::optimizer::ObjectiveBreakdown;
use pcdenoise::{DenoiseConfig, MetricsReport, SyntheticSpec};
use serde::{Deserialize, Serialize};

/// Everything needed to re-run one command: its configuration, seeds and file
/// lists, plus per-frame results and wall-clock timings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<DenoiseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseRecord>,
    /// Named seeds, e.g. `patch_centers` or `noise`.
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<FrameRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricsReport>,
    pub timings_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRecord {
    /// Absolute standard deviation actually applied.
    pub sigma: f64,
    /// Set when sigma was given relative to the first frame's bounding-box diagonal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_sigma: Option<f64>,
    /// Frame `t` uses seed `seed + t`.
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub temporal_active: bool,
    pub best_iteration: usize,
    pub degenerate_normals: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_metric: Option<f64>,
    pub objective_trace: Vec<ObjectiveBreakdown>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
