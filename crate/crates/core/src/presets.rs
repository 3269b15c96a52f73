//! Reference starting points for the three shipped models.
//!
//! Each preset bundles the phase sequence, grid size, operating point and
//! the initial-guess state that reproduce the reference gaits.

use crate::models::{ModelKind, ModelSpec};
use crate::transcription::OperatingPoint;

/// A ready-to-run gait search setup.
#[derive(Clone, Debug, PartialEq)]
pub struct GaitPreset {
    pub model: ModelKind,
    pub sequence: Vec<usize>,
    pub n_intervals: usize,
    pub operating_point: OperatingPoint,
    /// Initial-guess start state, simulated at `γ_init` to seed the search.
    pub guess: Vec<f64>,
    /// Reference result state, when known.
    pub reference: Option<Vec<f64>>,
    /// Reference injection parameter.
    pub reference_gamma: f64,
    /// Reference values of the model's free parameters.
    pub reference_free: Vec<f64>,
}

impl GaitPreset {
    pub fn for_model(kind: ModelKind) -> Self {
        match kind {
            ModelKind::PrismaticMonopod => GaitPreset {
                model: kind,
                sequence: vec![1, 0],
                n_intervals: 10,
                operating_point: OperatingPoint::speed(0.3),
                guess: vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -0.55, 0.0, 0.0, -0.55],
                reference: Some(vec![
                    0.0, 0.9713, 0.0676, 0.1723, 0.9999, 0.3835, -0.5740, 0.0082, -0.2443, -0.6487,
                ]),
                reference_gamma: 0.4466,
                reference_free: vec![],
            },
            ModelKind::SegmentedMonopod => GaitPreset {
                model: kind,
                sequence: vec![1, 0],
                n_intervals: 18,
                operating_point: OperatingPoint::speed(0.3),
                guess: vec![0.0, 0.9613, -0.1234, -0.2, 0.55, 0.0364, -0.75, 0.0, -2.8275, 5.5042],
                reference: Some(vec![
                    0.0, 0.8995, 0.2877, -0.1806, 0.5283, 0.4652, -0.4227, 0.4881, -2.9334, 4.3100,
                ]),
                reference_gamma: 0.8356,
                reference_free: vec![-0.1761],
            },
            ModelKind::SagittalQuadruped => GaitPreset {
                model: kind,
                sequence: vec![1, 3, 2, 0],
                n_intervals: 10,
                operating_point: OperatingPoint::energy(1.3),
                guess: vec![
                    0.0, 1.2407, 0.1237, -0.3656, 0.7371, -0.3521, 0.7398, 0.3173, -1.2092, -0.4806, -1.7800, 4.3786,
                    -0.4504, 0.1995,
                ],
                reference: Some(vec![
                    0.0, 1.1248, 0.0015, -0.3989, 0.7943, -0.3657, 0.7997, 0.4112, -0.4870, 0.2990, -2.7939, 3.9662,
                    0.2260, -0.3944,
                ]),
                reference_gamma: 0.6910,
                reference_free: vec![],
            },
        }
    }

    /// The model with its default parameters.
    pub fn build_model(&self) -> ModelSpec {
        self.model
            .build(&self.model.default_params())
            .expect("default parameters are valid")
    }
}
