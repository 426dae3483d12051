//! Point-to-point ICP with nearest-neighbor correspondences and a hard
//! distance cap.

use super::{NnGrid, Pose};
use crate::Vec3;
use nalgebra::{Matrix3, Rotation3, UnitQuaternion};

/// Outcome of an ICP run.
#[derive(Debug, Clone)]
pub struct IcpResult {
    pub pose: Pose,
    /// Mean matched-pair distance at the best pose, mm.
    pub mean_residual: f64,
    /// Mean matched-pair distance measured at the start of each iteration.
    /// Non-increasing: the loop stops before accepting a worse pose.
    pub residuals: Vec<f64>,
    /// True when no target point fell within the cap at the initial pose;
    /// the initial pose is returned unchanged in that case.
    pub no_correspondences: bool,
}

/// Align `source` to `target` by point-to-point ICP starting from `init`.
///
/// Each iteration matches every transformed source point to its nearest
/// target point within `max_corr_dist`, measures the mean pair distance, and
/// refits the rigid transform in closed form (SVD). The best pose seen is
/// returned; iteration stops early when the residual would increase, so the
/// recorded residual sequence is non-increasing.
pub fn icp_align(
    source: &[Vec3],
    target: &[Vec3],
    init: &Pose,
    max_iters: usize,
    max_corr_dist: f64,
) -> IcpResult {
    assert!(!source.is_empty(), "ICP source must be non-empty");
    assert!(!target.is_empty(), "ICP target must be non-empty");
    assert!(max_corr_dist > 0.0);

    let grid = NnGrid::build(target, max_corr_dist);
    icp_align_with_grid(source, &grid, init, max_iters, max_corr_dist)
}

/// ICP against a prebuilt target grid; lets callers reuse the grid across
/// many alignments to the same cloud.
pub fn icp_align_with_grid(
    source: &[Vec3],
    target: &NnGrid,
    init: &Pose,
    max_iters: usize,
    max_corr_dist: f64,
) -> IcpResult {
    let mut pose = *init;
    let mut best_pose = *init;
    let mut best_residual = f64::INFINITY;
    let mut residuals = Vec::new();

    for iter in 0..max_iters {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut residual_sum = 0.0;
        for (si, s) in source.iter().enumerate() {
            let moved = pose.apply(s);
            if let Some((ti, d)) = target.nearest_within(&moved, max_corr_dist) {
                pairs.push((si, ti));
                residual_sum += d;
            }
        }
        if pairs.is_empty() {
            if iter == 0 {
                return IcpResult {
                    pose: *init,
                    mean_residual: f64::INFINITY,
                    residuals,
                    no_correspondences: true,
                };
            }
            break;
        }
        let mean_residual = residual_sum / pairs.len() as f64;
        if mean_residual >= best_residual - 1e-12 {
            break;
        }
        residuals.push(mean_residual);
        best_residual = mean_residual;
        best_pose = pose;

        pose = fit_rigid(source, target, &pairs);
    }

    IcpResult {
        pose: best_pose,
        mean_residual: best_residual,
        residuals,
        no_correspondences: false,
    }
}

/// Closed-form least-squares rigid transform for matched pairs (Kabsch).
fn fit_rigid(source: &[Vec3], target: &NnGrid, pairs: &[(usize, usize)]) -> Pose {
    let n = pairs.len() as f64;
    let mut sc = Vec3::zeros();
    let mut tc = Vec3::zeros();
    for &(si, ti) in pairs {
        sc += source[si];
        tc += target.point(ti);
    }
    sc /= n;
    tc /= n;

    let mut h = Matrix3::<f64>::zeros();
    for &(si, ti) in pairs {
        let s = source[si] - sc;
        let t = target.point(ti) - tc;
        h += s * t.transpose();
    }

    let svd = h.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let det = (v_t.transpose() * u.transpose()).determinant();
    let d = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, det.signum()));
    let r = v_t.transpose() * d * u.transpose();
    let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    let translation = tc - r * sc;
    Pose::new(rotation, translation)
}
