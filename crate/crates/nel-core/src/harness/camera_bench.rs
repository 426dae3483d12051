//! Camera tracking on a drifting-camera sequence, compared against
//! independent single-frame estimation on the same frames.

use super::config::ExperimentConfig;
use super::experiment::{run_estimate_on_sample, Assets};
use super::metrics::pose_errors;
use super::scenegen::{placed_pose, sample_observation};
use super::HarnessError;
use crate::geometry::{GaussianVmfParams, Pose};
use crate::inference::{
    camera_track_step, ProposalKind, SearchPhase, SearchSchedule,
};
use crate::render::{SceneDescription, SceneObject};
use crate::Vec3;
use nalgebra::{Unit, UnitQuaternion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CameraFrameReport {
    pub frame: usize,
    /// Mean over objects of the rotation error, degrees.
    pub tracked_rot_deg: f64,
    pub tracked_trans_mm: f64,
    pub single_rot_deg: f64,
    pub single_trans_mm: f64,
}

#[derive(Debug, Clone)]
pub struct CameraBenchOutcome {
    pub frames: Vec<CameraFrameReport>,
    pub mean_tracked_rot_deg: f64,
    pub mean_single_rot_deg: f64,
}

/// Run both modes over the same drifting sequence. The tracked mode starts
/// from the ground-truth first frame and applies shared-delta search per
/// frame; the single-frame mode runs the full pipeline independently per
/// frame.
pub fn run_camera_benchmark(
    cfg: &ExperimentConfig,
    assets: &Assets,
    seed: u64,
) -> Result<CameraBenchOutcome, HarnessError> {
    let cam = cfg
        .camera_track
        .as_ref()
        .ok_or_else(|| HarnessError::Config("missing [camera_track] section".to_string()))?;
    if cam.objects.is_empty() {
        return Err(HarnessError::Config("camera_track.objects is empty".into()));
    }
    let ctx = assets.ctx();

    // Camera drift: a fixed small rigid delta composed once per frame.
    let axis = Unit::new_normalize(Vec3::new(0.35, 1.0, 0.2));
    let step_rot =
        UnitQuaternion::from_axis_angle(&axis, cam.rotation_step_deg.to_radians());
    let step_dir = Vec3::new(1.0, 0.4, -0.3).normalize();
    let drift_step = Pose::new(step_rot, step_dir * cam.translation_step_mm);

    let base: Vec<SceneObject> = cam
        .objects
        .iter()
        .map(|o| SceneObject {
            class_id: o.class,
            pose: placed_pose(o.position, o.yaw_deg),
        })
        .collect();
    let scene0 = SceneDescription::new(base);

    let mut gt_frames = vec![scene0.clone()];
    for t in 1..cam.frames {
        gt_frames.push(gt_frames[t - 1].with_shared_delta(&drift_step));
    }

    let kernel = GaussianVmfParams::new(cam.position_sigma, cam.rotation_kappa)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let schedule = SearchSchedule {
        phases: vec![
            SearchPhase {
                kind: ProposalKind::Icp,
                proposals: cam.proposals,
                sweeps: 1,
                kernel: Some(kernel),
            },
            SearchPhase {
                kind: ProposalKind::RandomWalk,
                proposals: cam.proposals,
                sweeps: cam.sweeps,
                kernel: Some(kernel),
            },
        ],
        object_selection: Default::default(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, 0x8d));
    let mut tracked = gt_frames[0].clone();
    let mut frames = Vec::new();
    let mut sum_tracked = 0.0;
    let mut sum_single = 0.0;

    for (t, gt) in gt_frames.iter().enumerate().skip(1) {
        let sample = sample_observation(cfg, assets, gt.clone(), &mut rng)?;

        let outcome = camera_track_step(
            &tracked,
            &sample.observation,
            &ctx,
            &schedule,
            Some(cam.position_cap),
            &mut rng,
        )?;
        tracked = outcome.scene.clone();

        let single = run_estimate_on_sample(assets, &sample, crate::seed::derive(seed, t as u64), 0.0)?;

        let mut t_rot = 0.0;
        let mut t_trans = 0.0;
        let mut s_rot = 0.0;
        let mut s_trans = 0.0;
        for (k, obj) in gt.objects.iter().enumerate() {
            let mesh = assets.library.mesh(obj.class_id)?;
            let te = pose_errors(&tracked.objects[k].pose, &obj.pose, mesh);
            t_rot += te.rotation_deg;
            t_trans += te.translation_mm;
            let se = &single.reports[k].errors;
            s_rot += se.rotation_deg;
            s_trans += se.translation_mm;
        }
        let n = gt.objects.len() as f64;
        frames.push(CameraFrameReport {
            frame: t,
            tracked_rot_deg: t_rot / n,
            tracked_trans_mm: t_trans / n,
            single_rot_deg: s_rot / n,
            single_trans_mm: s_trans / n,
        });
        sum_tracked += t_rot / n;
        sum_single += s_rot / n;
    }

    let count = frames.len().max(1) as f64;
    Ok(CameraBenchOutcome {
        frames,
        mean_tracked_rot_deg: sum_tracked / count,
        mean_single_rot_deg: sum_single / count,
    })
}
