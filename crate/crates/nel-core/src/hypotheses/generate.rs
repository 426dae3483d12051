//! Heuristic pose scoring and the enumerative generation driver.

use super::{spherical_vote, top_positions, HypothesesError, SphereVote, VoxelGrid, VoxelGridSpec};
use crate::embed::SurfaceModel;
use crate::geometry::{Pose, RotationGrid};
use crate::grid::Grid2;
use crate::likelihood::Observation;
use crate::Vec3;
use nalgebra::UnitQuaternion;

/// Parameters of the enumerative generator.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesesConfig {
    pub grid: VoxelGridSpec,
    /// Keypoints per object; must match the surface model.
    pub n_keypoints: usize,
    /// Number of candidate positions kept from the center grid.
    pub n_top_positions: usize,
    /// Number of ranked hypotheses returned.
    pub n_hypotheses: usize,
    /// Non-max suppression Chebyshev radius in voxels.
    pub nms_radius: usize,
    /// When set, only this many best orientations per position enter the
    /// final ranking (every (position, orientation) pair is still scored).
    pub rotations_per_position: Option<usize>,
}

impl HypothesesConfig {
    pub fn with_grid(grid: VoxelGridSpec) -> Self {
        Self {
            grid,
            n_keypoints: 8,
            n_top_positions: 64,
            n_hypotheses: 80,
            nms_radius: 10,
            rotations_per_position: None,
        }
    }

    pub fn validate(&self, rotations: &RotationGrid) -> Result<(), HypothesesError> {
        if self.n_top_positions == 0 {
            return Err(HypothesesError::InvalidConfig(
                "n_top_positions must be >= 1".to_string(),
            ));
        }
        if self.n_hypotheses > self.n_top_positions * rotations.len() {
            return Err(HypothesesError::InvalidConfig(format!(
                "n_hypotheses {} exceeds candidate count {}",
                self.n_hypotheses,
                self.n_top_positions * rotations.len()
            )));
        }
        Ok(())
    }
}

impl Default for HypothesesConfig {
    fn default() -> Self {
        Self::with_grid(VoxelGridSpec::default_workspace())
    }
}

/// A ranked pose hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseHypothesis {
    pub pose: Pose,
    pub score: f64,
}

/// Per-pixel most likely surface correspondence, shared by all keypoint
/// targets of one observation/model pair.
#[derive(Debug, Clone)]
pub struct PixelCorrespondences {
    /// (observed camera point, argmax sample index, max probability), in
    /// row-major pixel order over the unmasked pixels.
    pub entries: Vec<(Vec3, usize, f64)>,
}

/// Compute the argmax correspondence per unmasked valid-depth pixel
/// (optionally restricted by a region-of-interest mask). Ties break to the
/// lowest sample index. Row-parallel; entry order is row-major.
pub fn pixel_correspondences(
    obs: &Observation,
    model: &SurfaceModel,
    roi_mask: Option<&Grid2<bool>>,
) -> PixelCorrespondences {
    let (h, w) = (obs.height(), obs.width());
    let class = model.class_id();
    let rows = crate::par::map_range(h, |i| {
        let mut row = Vec::new();
        for j in 0..w {
            if !obs.data_mask.get(i, j) {
                continue;
            }
            if let Some(roi) = roi_mask {
                if !roi.get(i, j) {
                    continue;
                }
            }
            let c = obs.point_cloud.get(i, j);
            if c.z <= 0.0 {
                continue;
            }
            let q = obs.query_maps.query(class, i, j);
            let mut best = 0usize;
            let mut best_dot = f64::NEG_INFINITY;
            for s in 0..model.len() {
                let key = model.key_row(s);
                let mut dot = 0.0;
                for k in 0..q.len() {
                    dot += q[k] * key[k];
                }
                if dot > best_dot {
                    best_dot = dot;
                    best = s;
                }
            }
            let weight = (best_dot - obs.query_maps.log_normalizer(class, i, j)).exp();
            row.push((*c, best, weight));
        }
        row
    });
    let mut entries = Vec::new();
    for row in rows {
        entries.extend(row);
    }
    PixelCorrespondences { entries }
}

/// Votes for one keypoint target derived from shared correspondences: the
/// radius is the object-frame distance from the argmax sample to `target`.
pub fn votes_for_target(
    corr: &PixelCorrespondences,
    model: &SurfaceModel,
    target: &Vec3,
) -> Vec<SphereVote> {
    corr.entries
        .iter()
        .map(|(c, s, w)| SphereVote {
            center: *c,
            radius: (model.coord(*s) - target).norm(),
            weight: *w,
        })
        .collect()
}

/// Heuristic score of a (position, orientation) pair: the sum over keypoints
/// of the voxel value each transformed keypoint lands in; keypoints outside
/// the grid contribute zero.
pub fn score_pose(
    location: &Vec3,
    rotation: &UnitQuaternion<f64>,
    keypoint_grids: &[VoxelGrid],
    keypoints: &[Vec3],
) -> f64 {
    assert_eq!(keypoint_grids.len(), keypoints.len());
    let mut score = 0.0;
    for (grid, kp) in keypoint_grids.iter().zip(keypoints) {
        let p = rotation * kp + location;
        let v = grid.spec.snap(&p);
        if grid.spec.in_bounds(&v) {
            score += grid.value_at(&v) as f64;
        }
    }
    score
}

/// Full enumerative generation for one object class.
///
/// A center grid and one grid per keypoint are accumulated from the shared
/// pixel correspondences (the keypoint passes run in parallel; each grid is
/// accumulated sequentially). Candidate positions come from non-max-
/// suppressed peaks of the center grid; every (position, orientation) pair
/// is scored and ranked by score descending with ties by (position index,
/// orientation index). Returns up to `n_hypotheses` hypotheses, or an empty
/// list when no votes were cast.
pub fn generate_hypotheses(
    obs: &Observation,
    model: &SurfaceModel,
    cfg: &HypothesesConfig,
    rotations: &RotationGrid,
    roi_mask: Option<&Grid2<bool>>,
) -> Result<Vec<PoseHypothesis>, HypothesesError> {
    cfg.validate(rotations)?;
    if cfg.n_keypoints != model.keypoints().len() {
        return Err(HypothesesError::InvalidConfig(format!(
            "config expects {} keypoints but the surface model has {}",
            cfg.n_keypoints,
            model.keypoints().len()
        )));
    }
    let corr = pixel_correspondences(obs, model, roi_mask);
    if corr.entries.is_empty() {
        return Ok(vec![]);
    }

    // Targets: object center first, then the keypoints.
    let mut targets = vec![Vec3::zeros()];
    targets.extend_from_slice(model.keypoints());
    let grids = crate::par::map_slice(&targets, |t| {
        let votes = votes_for_target(&corr, model, t);
        spherical_vote(&votes, &cfg.grid)
    });
    let center_grid = &grids[0];
    let keypoint_grids = &grids[1..];

    let top = top_positions(center_grid, cfg.n_top_positions, cfg.nms_radius);
    if top.degenerate {
        return Ok(vec![]);
    }
    let positions = top.positions;

    let n_rot = rotations.len();
    let scores = crate::par::map_range(positions.len() * n_rot, |flat| {
        let pi = flat / n_rot;
        let ri = flat % n_rot;
        score_pose(
            &positions[pi],
            rotations.orientation(ri),
            keypoint_grids,
            model.keypoints(),
        )
    });

    let mut order: Vec<usize> = (0..scores.len()).collect();
    if let Some(keep) = cfg.rotations_per_position {
        // Keep only the best `keep` orientations of each position before the
        // global ranking; all pairs were still scored above.
        let mut kept = Vec::with_capacity(positions.len() * keep);
        for pi in 0..positions.len() {
            let mut slice: Vec<usize> = (pi * n_rot..(pi + 1) * n_rot).collect();
            slice.sort_unstable_by(|&a, &b| {
                scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b))
            });
            kept.extend(slice.into_iter().take(keep));
        }
        order = kept;
    }
    order.sort_unstable_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));

    let hypotheses = order
        .into_iter()
        .take(cfg.n_hypotheses)
        .map(|flat| {
            let pi = flat / n_rot;
            let ri = flat % n_rot;
            PoseHypothesis {
                pose: Pose::new(*rotations.orientation(ri), positions[pi]),
                score: scores[flat],
            }
        })
        .collect();
    Ok(hypotheses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_rotation_grid;

    fn constant_grid(spec: &VoxelGridSpec, value: f32) -> VoxelGrid {
        let mut g = VoxelGrid::zeros(spec.clone());
        for v in g.values.iter_mut() {
            *v = value;
        }
        g
    }

    #[test]
    fn score_counts_keypoints_in_constant_grids() {
        let spec = VoxelGridSpec::new(Vec3::new(-50.0, -50.0, -50.0), [20, 20, 20], 5.0).unwrap();
        let grids: Vec<VoxelGrid> = (0..6).map(|_| constant_grid(&spec, 1.0)).collect();
        let kps: Vec<Vec3> = (0..6).map(|k| Vec3::new(k as f64, 0.0, 0.0)).collect();
        let s = score_pose(
            &Vec3::zeros(),
            &UnitQuaternion::identity(),
            &grids,
            &kps,
        );
        assert_eq!(s, 6.0);
    }

    #[test]
    fn out_of_grid_keypoints_score_zero() {
        let spec = VoxelGridSpec::new(Vec3::zeros(), [4, 4, 4], 1.0).unwrap();
        let grids = vec![constant_grid(&spec, 1.0)];
        let kps = vec![Vec3::new(100.0, 0.0, 0.0)];
        let s = score_pose(&Vec3::zeros(), &UnitQuaternion::identity(), &grids, &kps);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn score_matches_explicit_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let spec = VoxelGridSpec::new(Vec3::new(-20.0, -20.0, -20.0), [10, 10, 10], 4.0).unwrap();
        let mut grids = Vec::new();
        for _ in 0..4 {
            let mut g = VoxelGrid::zeros(spec.clone());
            for v in g.values.iter_mut() {
                *v = rng.gen::<f32>();
            }
            grids.push(g);
        }
        let kps: Vec<Vec3> = (0..4)
            .map(|_| {
                Vec3::new(
                    rng.gen::<f64>() * 30.0 - 15.0,
                    rng.gen::<f64>() * 30.0 - 15.0,
                    rng.gen::<f64>() * 30.0 - 15.0,
                )
            })
            .collect();
        let rot = UnitQuaternion::from_euler_angles(0.3, -0.5, 0.9);
        let loc = Vec3::new(2.0, -3.0, 4.0);
        let fast = score_pose(&loc, &rot, &grids, &kps);
        // Duplicate arithmetic with explicit rounding.
        let mut slow = 0.0;
        for (g, kp) in grids.iter().zip(&kps) {
            let p = rot * kp + loc;
            let vx = ((p.x - spec.origin.x) / spec.voxel_diameter).round() as i64;
            let vy = ((p.y - spec.origin.y) / spec.voxel_diameter).round() as i64;
            let vz = ((p.z - spec.origin.z) / spec.voxel_diameter).round() as i64;
            let v = [vx, vy, vz];
            if spec.in_bounds(&v) {
                slow += g.value_at(&v) as f64;
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn config_validation_bounds_hypotheses() {
        let rot = build_rotation_grid(4, 4).unwrap();
        let mut cfg = HypothesesConfig::with_grid(
            VoxelGridSpec::new(Vec3::zeros(), [4, 4, 4], 1.0).unwrap(),
        );
        cfg.n_top_positions = 2;
        cfg.n_hypotheses = 40; // > 2 * 16
        assert!(cfg.validate(&rot).is_err());
        cfg.n_hypotheses = 32;
        assert!(cfg.validate(&rot).is_ok());
    }
}
