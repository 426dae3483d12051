//! Inference drivers: greedy stochastic search over scene descriptions, SIR
//! particle filtering for tracking, and a static-scene camera-tracking mode.
//!
//! Candidate evaluation and particle reweighting parallelize across the batch
//! dimension; the drivers themselves are single-threaded and own the
//! generator, so fixed seeds give identical traces, estimates and particle
//! sets at any thread count.

mod camera;
mod filter;
mod proposals;
mod search;

pub use camera::{camera_track_step, validate_camera_schedule};
pub use filter::{
    filter_estimate, particle_filter_step, systematic_resample, DynamicsParams, ParticleSet,
};
pub use proposals::{propose_hypotheses, propose_icp, propose_random_walk};
pub use search::{
    stochastic_search, ObjectSelection, ProposalKind, SearchOutcome, SearchPhase, SearchSchedule,
    TraceStep,
};

use crate::embed::SurfaceModel;
use crate::likelihood::{batch_log_likelihood_seq, log_likelihood, LikelihoodConfig, Observation};
use crate::render::{render, CameraIntrinsics, ObjectLibrary, RenderOutput, SceneDescription};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

/// ICP proposal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams {
    pub max_iters: usize,
    /// Correspondence cap, mm.
    pub max_corr_dist: f64,
    /// Minimum rendered pixels for an object to attempt alignment.
    pub min_visible_pixels: usize,
    /// Point budget for each side of the alignment.
    pub max_points: usize,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iters: 20,
            max_corr_dist: 20.0,
            min_visible_pixels: 25,
            max_points: 2000,
        }
    }
}

/// Everything needed to score a candidate scene against an observation.
#[derive(Clone, Copy)]
pub struct EvalContext<'a> {
    pub library: &'a ObjectLibrary,
    pub camera: &'a CameraIntrinsics,
    pub models: &'a [SurfaceModel],
    pub likelihood: &'a LikelihoodConfig,
    pub icp: IcpParams,
}

impl<'a> EvalContext<'a> {
    pub fn render_scene(&self, scene: &SceneDescription) -> RenderOutput {
        render(scene, self.library, self.camera).expect("scene references valid classes")
    }

    pub fn evaluate(&self, obs: &Observation, scene: &SceneDescription) -> f64 {
        let r = self.render_scene(scene);
        log_likelihood(obs, &r, self.models, self.likelihood)
    }

    /// Render + score many candidate scenes; parallel across candidates and
    /// element-wise identical to sequential evaluation.
    pub fn evaluate_batch(&self, obs: &Observation, scenes: &[SceneDescription]) -> Vec<f64> {
        crate::par::map_slice(scenes, |scene| self.evaluate(obs, scene))
    }

    /// Sequential twin of [`EvalContext::evaluate_batch`] (bench baseline).
    pub fn evaluate_batch_seq(&self, obs: &Observation, scenes: &[SceneDescription]) -> Vec<f64> {
        let renders: Vec<RenderOutput> = scenes.iter().map(|s| self.render_scene(s)).collect();
        batch_log_likelihood_seq(obs, &renders, self.models, self.likelihood)
    }
}
