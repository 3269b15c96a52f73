//! Gait artifacts: self-describing JSON files with a SHA-256 content checksum.

use crate::error::CliError;
use gaitforge::continuation::CostKind;
use gaitforge::hybrid::InjectionKind;
use gaitforge::models::build_model;
use gaitforge::transcription::{DecisionLayout, LayoutMode, OperatingPoint, Transcription};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const FORMAT: &str = "gaitforge-gait-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingRecord {
    pub kind: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitArtifact {
    pub format: String,
    pub model: String,
    /// Parameter overrides on top of the model defaults.
    pub params: BTreeMap<String, f64>,
    pub mode: String,
    pub sequence: Vec<usize>,
    pub n_intervals: usize,
    pub operating_point: OperatingRecord,
    pub injection: String,
    pub cost: String,
    pub gamma: f64,
    pub eps: f64,
    pub state_names: Vec<String>,
    pub x0: Vec<f64>,
    pub durations: Vec<f64>,
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub checksum: String,
}

/// Everything needed to evaluate an artifact again.
pub struct Restored {
    pub transcription: Transcription,
    pub injection: InjectionKind,
    pub cost: CostKind,
}

/// SHA-256 of the compact, key-sorted JSON with an empty checksum field.
pub fn digest(artifact: &GaitArtifact) -> String {
    let mut body = artifact.clone();
    body.checksum = String::new();
    let value = serde_json::to_value(&body).expect("artifact serializes");
    let text = serde_json::to_string(&value).expect("artifact serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl GaitArtifact {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        transcription: &Transcription,
        params: &[(String, f64)],
        cost: CostKind,
        gamma: f64,
        eps: f64,
        a: Vec<f64>,
        lambda: Option<Vec<f64>>,
    ) -> Result<Self, CliError> {
        let layout = &transcription.layout;
        let parts = layout.unpack(&a).map_err(CliError::numerical)?;
        let mut artifact = GaitArtifact {
            format: FORMAT.into(),
            model: transcription.model.name.clone(),
            params: params.iter().cloned().collect(),
            mode: layout.mode.name().into(),
            sequence: layout.sequence.clone(),
            n_intervals: layout.n_intervals,
            operating_point: OperatingRecord {
                kind: transcription.op.kind.name().into(),
                value: transcription.op.value,
            },
            injection: transcription.kind.name().into(),
            cost: cost.name().into(),
            gamma,
            eps,
            state_names: transcription.model.state_names.clone(),
            x0: parts.x0,
            durations: parts.durations,
            a,
            lambda,
            checksum: String::new(),
        };
        artifact.checksum = digest(&artifact);
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("artifact serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Reads an artifact and verifies its checksum.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let artifact: GaitArtifact = serde_json::from_str(&text).map_err(|e| CliError::Artifact {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        if artifact.format != FORMAT {
            return Err(CliError::Artifact {
                path: path.to_path_buf(),
                detail: format!("unsupported format {:?}", artifact.format),
            });
        }
        let computed = digest(&artifact);
        if computed != artifact.checksum {
            return Err(CliError::Checksum {
                path: path.to_path_buf(),
                stored: artifact.checksum,
                computed,
            });
        }
        Ok(artifact)
    }

    /// Rebuilds the model and transcription the artifact was produced with.
    pub fn restore(&self, path: &Path) -> Result<Restored, CliError> {
        let bad = |detail: String| CliError::Artifact {
            path: path.to_path_buf(),
            detail,
        };
        let overrides: Vec<(String, f64)> = self.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let model = build_model(&self.model, &overrides).map_err(|e| bad(e.to_string()))?;
        let mode: LayoutMode = self.mode.parse().map_err(|e| bad(format!("{e}")))?;
        let layout = DecisionLayout::new(&model, &self.sequence, self.n_intervals, mode)
            .map_err(|e| bad(e.to_string()))?
            .with_frozen_gamma(self.gamma);
        if layout.len() != self.a.len() {
            return Err(bad(format!(
                "decision vector has {} entries, layout expects {}",
                self.a.len(),
                layout.len()
            )));
        }
        let op_kind = self.operating_point.kind.parse().map_err(|e| bad(format!("{e}")))?;
        let op = OperatingPoint::new(op_kind, self.operating_point.value).map_err(|e| bad(e.to_string()))?;
        let injection: InjectionKind = self.injection.parse().map_err(bad)?;
        let cost: CostKind = self.cost.parse().map_err(bad)?;
        let transcription = Transcription::new(&model, layout, op, injection).map_err(|e| bad(e.to_string()))?;
        Ok(Restored {
            transcription,
            injection,
            cost,
        })
    }
}
