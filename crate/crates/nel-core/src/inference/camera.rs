//! Static-scene camera tracking: shared-delta search.
//!
//! When the scene is known to be static and only the camera moves, every
//! object pose changes by the same camera-frame rigid delta. Each proposal is
//! therefore a single delta applied simultaneously to all objects, which
//! preserves all relative poses exactly.

use super::proposals::subsample;
use super::search::{argmax, lazy_obs_grid};
use super::{EvalContext, InferenceError, ProposalKind, SearchOutcome, SearchSchedule, TraceStep};
use crate::geometry::{icp_align_with_grid, sample_gaussian_vmf, GaussianVmfParams, Pose};
use crate::likelihood::Observation;
use crate::render::SceneDescription;
use crate::Vec3;
use rand::Rng;

/// Camera-tracking schedules may only contain ICP and random-walk phases.
pub fn validate_camera_schedule(schedule: &SearchSchedule) -> Result<(), InferenceError> {
    schedule.validate()?;
    if schedule
        .phases
        .iter()
        .any(|p| matches!(p.kind, ProposalKind::Hypotheses))
    {
        return Err(InferenceError::InvalidSchedule(
            "camera tracking does not take hypothesis phases".to_string(),
        ));
    }
    Ok(())
}

/// One camera-tracking update against a new frame: greedy search where every
/// candidate is a shared rigid delta, ICP running over the union of all
/// rendered object points. `position_cap` bounds the per-step translation of
/// the shared delta (rejection, then clamp to the cap sphere).
pub fn camera_track_step<R: Rng + ?Sized>(
    scene: &SceneDescription,
    obs: &Observation,
    ctx: &EvalContext,
    schedule: &SearchSchedule,
    position_cap: Option<f64>,
    rng: &mut R,
) -> Result<SearchOutcome, InferenceError> {
    validate_camera_schedule(schedule)?;
    let mut scene = scene.clone();
    let mut current = ctx.evaluate(obs, &scene);
    let mut trace = Vec::new();
    let mut step = 0usize;
    let obs_grid = lazy_obs_grid(obs, ctx);

    for phase in &schedule.phases {
        for _ in 0..phase.sweeps {
            step += 1;
            let center = match phase.kind {
                ProposalKind::Icp => {
                    let render = ctx.render_scene(&scene);
                    let mut points: Vec<Vec3> = Vec::new();
                    for (idx, &seg) in render.segmentation.data().iter().enumerate() {
                        if seg > 0 {
                            points.push(render.point_cloud.data()[idx]);
                        }
                    }
                    if points.len() < ctx.icp.min_visible_pixels {
                        continue;
                    }
                    let points = subsample(points, ctx.icp.max_points);
                    match obs_grid.as_ref() {
                        Some(grid) => {
                            let result = icp_align_with_grid(
                                &points,
                                grid,
                                &Pose::identity(),
                                ctx.icp.max_iters,
                                ctx.icp.max_corr_dist,
                            );
                            if result.no_correspondences {
                                Pose::identity()
                            } else {
                                result.pose
                            }
                        }
                        None => continue,
                    }
                }
                ProposalKind::RandomWalk => Pose::identity(),
                ProposalKind::Hypotheses => unreachable!("validated"),
            };

            let default_kernel = GaussianVmfParams::new(2.0, 2000.0).expect("valid kernel");
            let kernel = phase.kernel.as_ref().unwrap_or(&default_kernel);
            let mut deltas = Vec::with_capacity(phase.proposals);
            deltas.push(cap_delta(center, position_cap));
            for _ in 1..phase.proposals {
                let mut d = sample_gaussian_vmf(&center, kernel, rng);
                for _ in 0..100 {
                    if within_cap(&d, position_cap) {
                        break;
                    }
                    d = sample_gaussian_vmf(&center, kernel, rng);
                }
                deltas.push(cap_delta(d, position_cap));
            }

            let scenes: Vec<SceneDescription> =
                deltas.iter().map(|d| scene.with_shared_delta(d)).collect();
            let scores = ctx.evaluate_batch(obs, &scenes);
            let (best_idx, best) = argmax(&scores);
            if best > current {
                trace.push(TraceStep {
                    step,
                    object: usize::MAX,
                    previous: current,
                    accepted: best,
                });
                scene = scenes.into_iter().nth(best_idx).expect("index in range");
                current = best;
            }
        }
    }
    Ok(SearchOutcome {
        scene,
        log_likelihood: current,
        trace,
    })
}

fn within_cap(delta: &Pose, cap: Option<f64>) -> bool {
    match cap {
        None => true,
        Some(c) => delta.translation().norm() <= c,
    }
}

fn cap_delta(delta: Pose, cap: Option<f64>) -> Pose {
    match cap {
        Some(c) if delta.translation().norm() > c => {
            let t = delta.translation();
            Pose::new(*delta.rotation(), t / t.norm() * c)
        }
        _ => delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::SearchPhase;

    #[test]
    fn schedule_with_hypotheses_rejected() {
        let schedule = SearchSchedule {
            phases: vec![SearchPhase {
                kind: ProposalKind::Hypotheses,
                proposals: 4,
                sweeps: 1,
                kernel: None,
            }],
            object_selection: Default::default(),
        };
        assert!(validate_camera_schedule(&schedule).is_err());
    }

    #[test]
    fn cap_delta_clamps_to_sphere() {
        let d = Pose::from_translation(Vec3::new(60.0, 0.0, 0.0));
        let c = cap_delta(d, Some(30.0));
        assert!((c.translation().norm() - 30.0).abs() < 1e-12);
        let untouched = cap_delta(d, None);
        assert_eq!(untouched.translation().x, 60.0);
    }
}
