//! Synthetic scenes, metrics, experiment drivers and result persistence.

mod camera_bench;
mod config;
mod experiment;
mod metrics;
mod results;
mod scenegen;
mod selftest;
mod tracking;

pub use camera_bench::{run_camera_benchmark, CameraBenchOutcome, CameraFrameReport};
pub use config::{
    apply_override, load_config, load_config_with_overrides, parse_config, CameraConfig,
    CameraTrackConfig, ClassConfig, DynamicsKernelConfig, ExperimentConfig, HypothesesFileConfig,
    PhaseConfig, PlacedObjectConfig, SceneGenConfig, ShapeConfig, TrackingConfig,
};
pub use experiment::{run_estimate, run_estimate_on_sample, Assets, EstimateOutcome, ObjectReport, StageTimings};
pub use metrics::{pose_errors, PoseErrors};
pub use results::{
    render_results_csv, results_run_id, write_manifest, write_text, ResultRow, RESULTS_HEADER,
};
pub use scenegen::{make_scene, make_scene_seeded, sample_observation, sample_uniform_rotation, SceneSample};
pub use selftest::{run_selftest, SelftestReport};
pub use tracking::{run_tracking, FrameReport, TrackingOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Configuration problems: unparseable files, unknown keys, invalid
    /// values. CLI exit code 1.
    #[error("config: {0}")]
    Config(String),
    /// Everything that goes wrong while running. CLI exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl From<crate::render::RenderError> for HarnessError {
    fn from(e: crate::render::RenderError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::embed::EmbedError> for HarnessError {
    fn from(e: crate::embed::EmbedError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::likelihood::LikelihoodError> for HarnessError {
    fn from(e: crate::likelihood::LikelihoodError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::hypotheses::HypothesesError> for HarnessError {
    fn from(e: crate::hypotheses::HypothesesError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::inference::InferenceError> for HarnessError {
    fn from(e: crate::inference::InferenceError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::geometry::GeometryError> for HarnessError {
    fn from(e: crate::geometry::GeometryError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}
