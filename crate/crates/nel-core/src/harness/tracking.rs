//! Object tracking over a scripted sequence with an occluder crossing.

use super::config::ExperimentConfig;
use super::experiment::Assets;
use super::metrics::{pose_errors, PoseErrors};
use super::scenegen::{placed_pose, sample_observation};
use super::HarnessError;
use crate::geometry::{GaussianVmfParams, Pose};
use crate::inference::{
    filter_estimate, particle_filter_step, DynamicsParams, ParticleSet,
};
use crate::render::{SceneDescription, SceneObject};
use crate::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-frame tracking record.
#[derive(Debug, Clone)]
pub struct FrameReport {
    pub frame: usize,
    pub errors: PoseErrors,
    /// Weighted particle position std of the target object, mm.
    pub spread_mm: f64,
    /// Ground-truth visible pixels of the target (0 = fully occluded).
    pub target_visible_px: usize,
    pub log_likelihood_max: f64,
    /// Sum of normalized particle weights after the step (should be 1).
    pub weight_sum: f64,
}

#[derive(Debug, Clone)]
pub struct TrackingOutcome {
    pub frames: Vec<FrameReport>,
}

/// Drive a SIR particle filter over the scripted sequence. Particles start
/// at the ground-truth first frame. Frame reports cover frames 1..n.
pub fn run_tracking(
    cfg: &ExperimentConfig,
    assets: &Assets,
    seed: u64,
) -> Result<TrackingOutcome, HarnessError> {
    let tr = cfg
        .tracking
        .as_ref()
        .ok_or_else(|| HarnessError::Config("missing [tracking] section".to_string()))?;
    if tr.objects.is_empty() {
        return Err(HarnessError::Config("tracking.objects is empty".into()));
    }
    if tr.dynamics.len() != tr.objects.len() {
        return Err(HarnessError::Config(format!(
            "tracking.dynamics has {} entries for {} objects",
            tr.dynamics.len(),
            tr.objects.len()
        )));
    }
    if tr.target_object >= tr.objects.len() {
        return Err(HarnessError::Config("tracking.target_object out of range".into()));
    }
    let target_mesh = assets.library.mesh(tr.objects[tr.target_object].class)?.clone();

    let mut per_object = Vec::with_capacity(tr.objects.len());
    for d in &tr.dynamics {
        let kernel = if d.point_mass {
            GaussianVmfParams::point_mass()
        } else {
            GaussianVmfParams::new(d.position_sigma, d.rotation_kappa)
                .map_err(|e| HarnessError::Config(e.to_string()))?
        };
        per_object.push(kernel);
    }
    let dynamics = DynamicsParams {
        per_object,
        position_cap: tr.position_cap,
    };

    let ctx = assets.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, 0x7c));

    let gt_frames: Vec<SceneDescription> = (0..tr.frames)
        .map(|t| ground_truth_at(tr, t))
        .collect();

    let init = gt_frames[0].clone();
    let mut ps = ParticleSet::uniform(vec![init; tr.particles]);

    let mut frames = Vec::with_capacity(tr.frames.saturating_sub(1));
    for (t, gt) in gt_frames.iter().enumerate().skip(1) {
        let sample = sample_observation(cfg, assets, gt.clone(), &mut rng)?;
        ps = particle_filter_step(&ps, &sample.observation, &ctx, &dynamics, &mut rng);
        let weight_sum: f64 = ps.log_weights.iter().map(|w| w.exp()).sum();
        let est = filter_estimate(&ps);
        let errors = pose_errors(
            &est.objects[tr.target_object].pose,
            &gt.objects[tr.target_object].pose,
            &target_mesh,
        );
        let visible = sample
            .gt_render
            .instance_pixel_count(tr.target_object);
        let max_lw = ps
            .log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        frames.push(FrameReport {
            frame: t,
            errors,
            spread_mm: ps.position_spread(tr.target_object),
            target_visible_px: visible,
            log_likelihood_max: max_lw,
            weight_sum,
        });
    }
    Ok(TrackingOutcome { frames })
}

/// Scripted ground truth: the target moves linearly from its start to
/// `target_path_to` over the sequence; everything else stays put.
fn ground_truth_at(tr: &super::config::TrackingConfig, t: usize) -> SceneDescription {
    let alpha = if tr.frames <= 1 {
        0.0
    } else {
        t as f64 / (tr.frames - 1) as f64
    };
    let objects = tr
        .objects
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let base = placed_pose(o.position, o.yaw_deg);
            let pose = if k == tr.target_object {
                let from = Vec3::new(o.position[0], o.position[1], o.position[2]);
                let to = Vec3::new(
                    tr.target_path_to[0],
                    tr.target_path_to[1],
                    tr.target_path_to[2],
                );
                Pose::new(*base.rotation(), from + alpha * (to - from))
            } else {
                base
            };
            SceneObject {
                class_id: o.class,
                pose,
            }
        })
        .collect();
    SceneDescription::new(objects)
}
