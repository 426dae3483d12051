//! Pose error metrics.

use crate::geometry::Pose;
use crate::render::TriangleMesh;

/// Errors of an estimated pose against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseErrors {
    pub rotation_deg: f64,
    pub translation_mm: f64,
    /// Mean vertex deviation, mm.
    pub add_mm: f64,
    /// Min over declared symmetries (plus identity) of the max vertex
    /// deviation, mm.
    pub mssd_mm: f64,
}

/// Compute all metrics for one object.
pub fn pose_errors(est: &Pose, gt: &Pose, mesh: &TriangleMesh) -> PoseErrors {
    let rotation_deg = est.rotation_angle_to(gt).to_degrees();
    let translation_mm = est.translation_distance_to(gt);

    let mut add_sum = 0.0;
    for v in mesh.vertices() {
        add_sum += (est.apply(v) - gt.apply(v)).norm();
    }
    let add_mm = add_sum / mesh.vertices().len() as f64;

    let mut mssd_mm = max_vertex_deviation(est, gt, mesh);
    for sym in mesh.symmetries() {
        let gt_sym = gt.compose(sym);
        mssd_mm = mssd_mm.min(max_vertex_deviation(est, &gt_sym, mesh));
    }

    PoseErrors {
        rotation_deg,
        translation_mm,
        add_mm,
        mssd_mm,
    }
}

fn max_vertex_deviation(a: &Pose, b: &Pose, mesh: &TriangleMesh) -> f64 {
    mesh.vertices()
        .iter()
        .map(|v| (a.apply(v) - b.apply(v)).norm())
        .fold(0.0, f64::max)
}
