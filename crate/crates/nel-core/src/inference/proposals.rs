//! The three proposal kinds.

use super::EvalContext;
use crate::geometry::{icp_align_with_grid, sample_gaussian_vmf, GaussianVmfParams, NnGrid, Pose};
use crate::render::{RenderOutput, SceneDescription};
use crate::Vec3;
use rand::Rng;
use std::collections::BTreeMap;

/// The stored ranked hypotheses for a class, truncated or padded by cycling
/// to exactly `k` candidates. `None` when the class has no stored set.
pub fn propose_hypotheses(
    class_id: usize,
    hypothesis_sets: &BTreeMap<usize, Vec<Pose>>,
    k: usize,
) -> Option<Vec<Pose>> {
    let set = hypothesis_sets.get(&class_id)?;
    if set.is_empty() {
        return None;
    }
    Some((0..k).map(|i| set[i % set.len()]).collect())
}

/// Align the object's rendered visible points to the observed cloud, then
/// sample candidates around the aligned pose (the first candidate is the
/// aligned pose itself). Returns `None` when fewer than the configured
/// minimum of pixels are visible. When ICP finds no correspondences the
/// current pose is used as the center.
#[allow(clippy::too_many_arguments)]
pub fn propose_icp<R: Rng + ?Sized>(
    object_index: usize,
    scene: &SceneDescription,
    current_render: &RenderOutput,
    obs_grid: &NnGrid,
    ctx: &EvalContext,
    kernel: Option<&GaussianVmfParams>,
    k: usize,
    rng: &mut R,
) -> Option<Vec<Pose>> {
    let mut points: Vec<Vec3> = Vec::new();
    for (idx, &inst) in current_render.instances.data().iter().enumerate() {
        if inst == object_index as u32 {
            points.push(current_render.point_cloud.data()[idx]);
        }
    }
    if points.len() < ctx.icp.min_visible_pixels {
        return None;
    }
    let points = subsample(points, ctx.icp.max_points);

    let result = icp_align_with_grid(
        &points,
        obs_grid,
        &Pose::identity(),
        ctx.icp.max_iters,
        ctx.icp.max_corr_dist,
    );
    let current_pose = scene.objects[object_index].pose;
    let center = if result.no_correspondences {
        current_pose
    } else {
        result.pose.compose(&current_pose)
    };

    let default_kernel = GaussianVmfParams::new(2.0, 2000.0).expect("valid kernel");
    let kernel = kernel.unwrap_or(&default_kernel);
    let mut candidates = Vec::with_capacity(k);
    candidates.push(center);
    for _ in 1..k {
        candidates.push(sample_gaussian_vmf(&center, kernel, rng));
    }
    Some(candidates)
}

/// Gaussian-VMF samples around the current pose.
pub fn propose_random_walk<R: Rng + ?Sized>(
    pose: &Pose,
    kernel: &GaussianVmfParams,
    k: usize,
    rng: &mut R,
) -> Vec<Pose> {
    (0..k).map(|_| sample_gaussian_vmf(pose, kernel, rng)).collect()
}

pub(crate) fn subsample(points: Vec<Vec3>, cap: usize) -> Vec<Vec3> {
    if points.len() <= cap {
        return points;
    }
    let stride = points.len().div_ceil(cap);
    points.into_iter().step_by(stride).collect()
}
