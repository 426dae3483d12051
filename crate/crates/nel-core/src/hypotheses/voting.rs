//! Spherical voting into voxel accumulators.

use super::{VoxelGrid, VoxelGridSpec};
use crate::embed::SurfaceModel;
use crate::grid::Grid2;
use crate::likelihood::Observation;
use crate::Vec3;

/// One vote: weight spread over the voxel shell at `radius` from `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereVote {
    pub center: Vec3,
    pub radius: f64,
    pub weight: f64,
}

/// Shell membership: an integer offset belongs to the shell of radius `rho`
/// (in voxels) iff `max(0, rho - 0.5) <= |offset| < rho + 0.5`. Compared in
/// squared form; this single predicate defines the voting semantics for both
/// the scatter path and the brute-force path.
#[inline]
pub fn shell_membership(offset: &[i64; 3], rho: f64) -> bool {
    let d2 = (offset[0] * offset[0] + offset[1] * offset[1] + offset[2] * offset[2]) as f64;
    let hi = rho + 0.5;
    let lo = (rho - 0.5).max(0.0);
    d2 >= lo * lo && d2 < hi * hi
}

/// Accumulate votes into a fresh grid.
///
/// Votes are processed sequentially in input order; per voxel the weight
/// additions therefore happen in vote order, which makes the result
/// bit-equal to [`brute_force_spherical_vote`]. Each vote enumerates a
/// near-shell candidate set (per-column z ranges widened by one voxel) and
/// filters every candidate through [`shell_membership`]. Out-of-grid shell
/// voxels are dropped.
pub fn spherical_vote(votes: &[SphereVote], spec: &VoxelGridSpec) -> VoxelGrid {
    let mut grid = VoxelGrid::zeros(spec.clone());
    for vote in votes {
        scatter_vote(vote, &mut grid);
    }
    grid
}

fn scatter_vote(vote: &SphereVote, grid: &mut VoxelGrid) {
    let spec = &grid.spec;
    let center = spec.snap(&vote.center);
    let rho = vote.radius / spec.voxel_diameter;
    let hi = rho + 0.5;
    let lo = (rho - 0.5).max(0.0);
    let hi_sq = hi * hi;
    let lo_sq = lo * lo;
    let weight = vote.weight as f32;

    let xm = hi.ceil() as i64;
    for dx in -xm..=xm {
        let rem_x = hi_sq - (dx * dx) as f64;
        if rem_x < 0.0 {
            continue;
        }
        let ym = rem_x.sqrt().floor() as i64 + 1;
        for dy in -ym..=ym {
            let rem_xy = rem_x - (dy * dy) as f64;
            if rem_xy < 0.0 {
                continue;
            }
            let z_hi = rem_xy.sqrt().floor() as i64 + 1;
            let lo_rem = lo_sq - (dx * dx + dy * dy) as f64;
            let z_lo = if lo_rem > 0.0 {
                (lo_rem.sqrt().floor() as i64 - 1).max(0)
            } else {
                0
            };
            for dz_abs in z_lo..=z_hi {
                for dz in signed(dz_abs) {
                    let offset = [dx, dy, dz];
                    if !shell_membership(&offset, rho) {
                        continue;
                    }
                    let v = [center[0] + dx, center[1] + dy, center[2] + dz];
                    if spec.in_bounds(&v) {
                        let idx = spec.flat(&v);
                        grid.values[idx] += weight;
                    }
                }
            }
        }
    }
}

fn signed(a: i64) -> impl Iterator<Item = i64> {
    let second = if a == 0 { None } else { Some(-a) };
    std::iter::once(a).chain(second)
}

/// Reference accumulation: for every voxel, test every vote through the same
/// shell predicate, adding weights in vote order. Exactly equal (bit-for-bit)
/// to [`spherical_vote`].
pub fn brute_force_spherical_vote(votes: &[SphereVote], spec: &VoxelGridSpec) -> VoxelGrid {
    let mut grid = VoxelGrid::zeros(spec.clone());
    let snapped: Vec<([i64; 3], f64, f32)> = votes
        .iter()
        .map(|v| (spec.snap(&v.center), v.radius / spec.voxel_diameter, v.weight as f32))
        .collect();
    for idx in 0..spec.voxel_count() {
        let v = spec.unflatten(idx);
        let mut acc = 0.0f32;
        for (center, rho, weight) in &snapped {
            let offset = [v[0] - center[0], v[1] - center[1], v[2] - center[2]];
            if shell_membership(&offset, *rho) {
                acc += weight;
            }
        }
        grid.values[idx] = acc;
    }
    grid
}

/// One vote per unmasked valid-depth pixel (intersected with `roi_mask` when
/// given): the vote center is the observed camera point, the radius is the
/// object-frame distance from the pixel's most likely surface correspondence
/// to `target`, and the weight is that correspondence's probability.
pub fn votes_from_observation(
    obs: &Observation,
    model: &SurfaceModel,
    target: &Vec3,
    roi_mask: Option<&Grid2<bool>>,
) -> Vec<SphereVote> {
    let corr = super::generate::pixel_correspondences(obs, model, roi_mask);
    super::generate::votes_for_target(&corr, model, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_spec() -> VoxelGridSpec {
        VoxelGridSpec::new(Vec3::new(0.0, 0.0, 0.0), [16, 16, 16], 1.0).unwrap()
    }

    fn enumerate_shell(rho: f64) -> Vec<[i64; 3]> {
        let m = (rho + 1.5).ceil() as i64;
        let mut out = Vec::new();
        for x in -m..=m {
            for y in -m..=m {
                for z in -m..=m {
                    if shell_membership(&[x, y, z], rho) {
                        out.push([x, y, z]);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn shell_rho_zero_is_single_voxel() {
        let shell = enumerate_shell(0.0);
        assert_eq!(shell, vec![[0, 0, 0]]);
    }

    #[test]
    fn shell_rho_one_has_18_voxels() {
        // Norms 1 (6 axis neighbors) and sqrt(2) (12 edge neighbors) lie in
        // [0.5, 1.5); sqrt(3) does not.
        let shell = enumerate_shell(1.0);
        assert_eq!(shell.len(), 18);
        assert!(!shell_membership(&[2, 0, 0], 1.0));
        assert!(!shell_membership(&[1, 1, 1], 1.0));
    }

    #[test]
    fn single_zero_radius_vote_hits_one_voxel() {
        let spec = small_spec();
        let votes = vec![SphereVote {
            center: spec.voxel_center(&[4, 5, 6]),
            radius: 0.0,
            weight: 1.0,
        }];
        let grid = spherical_vote(&votes, &spec);
        assert_eq!(grid.value_at(&[4, 5, 6]), 1.0);
        assert_eq!(grid.total(), 1.0);
    }

    #[test]
    fn identical_votes_add() {
        let spec = small_spec();
        let vote = SphereVote {
            center: spec.voxel_center(&[8, 8, 8]),
            radius: 2.0,
            weight: 0.3,
        };
        let grid = spherical_vote(&[vote, vote], &spec);
        let expected = 0.3f32 + 0.3f32;
        for &v in &grid.values {
            assert!(v == 0.0 || v == expected, "value {v}");
        }
        assert!(grid.max_value() == expected);
    }

    fn random_votes(n: usize, seed: u64, spec: &VoxelGridSpec) -> Vec<SphereVote> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ext = [
            spec.dims[0] as f64 * spec.voxel_diameter,
            spec.dims[1] as f64 * spec.voxel_diameter,
            spec.dims[2] as f64 * spec.voxel_diameter,
        ];
        (0..n)
            .map(|_| SphereVote {
                center: spec.origin
                    + Vec3::new(
                        (rng.gen::<f64>() * 1.4 - 0.2) * ext[0],
                        (rng.gen::<f64>() * 1.4 - 0.2) * ext[1],
                        (rng.gen::<f64>() * 1.4 - 0.2) * ext[2],
                    ),
                radius: rng.gen::<f64>() * 8.0 * spec.voxel_diameter,
                weight: rng.gen::<f64>(),
            })
            .collect()
    }

    #[test]
    fn scatter_equals_brute_force_exactly() {
        for seed in 0..8 {
            let spec = small_spec();
            let votes = random_votes(40, seed, &spec);
            let fast = spherical_vote(&votes, &spec);
            let slow = brute_force_spherical_vote(&votes, &spec);
            assert_eq!(fast.values, slow.values, "seed {seed}");
        }
    }

    #[test]
    fn fully_inbounds_vote_conserves_mass() {
        let spec = VoxelGridSpec::new(Vec3::zeros(), [32, 32, 32], 1.0).unwrap();
        let rho = 4.0;
        let shell_size = enumerate_shell(rho).len() as f64;
        let votes = vec![SphereVote {
            center: spec.voxel_center(&[16, 16, 16]),
            radius: rho,
            weight: 0.7,
        }];
        let grid = spherical_vote(&votes, &spec);
        let expected = 0.7 * shell_size;
        assert!(
            (grid.total() - expected).abs() < 1e-3,
            "total {} vs {}",
            grid.total(),
            expected
        );
    }

    #[test]
    fn votes_from_observation_examples() {
        use crate::embed::{OracleEmbedConfig, QueryMaps, SurfaceModel};
        use crate::likelihood::{MaskPolicy, Observation};
        use crate::render::shapes::box_mesh;

        let cfg = OracleEmbedConfig {
            samples_per_class: 32,
            surface_pool: 128,
            keypoint_count: 2,
            query_noise_sigma: 0.0,
            ..OracleEmbedConfig::default()
        };
        let model = SurfaceModel::build(1, &box_mesh(60.0, 40.0, 30.0), &cfg).unwrap();

        // 2x2 observation whose pixel (0,0) carries exactly the key of
        // sample 5; remaining pixels are masked by depth.
        let (h, w) = (2usize, 2usize);
        let sample_idx = 5usize;
        let e = model.embed_dim();
        let mut queries = vec![0.0; h * w * e];
        queries[..e].copy_from_slice(model.key_row(sample_idx));
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let logz: Vec<f64> = (0..h * w)
            .map(|px| {
                let q = &queries[px * e..(px + 1) * e];
                let dots: Vec<f64> = (0..model.len()).map(|s| dot(q, model.key_row(s))).collect();
                crate::embed::log_sum_exp(&dots)
            })
            .collect();
        let maps = QueryMaps::from_parts(h, w, 1, e, queries, logz);
        let mut cloud = crate::grid::Grid2::filled(h, w, Vec3::zeros());
        cloud.set(0, 0, Vec3::new(10.0, -5.0, 400.0));
        let obs = Observation::new(cloud, maps, None, MaskPolicy::ValidDepth).unwrap();

        let target = Vec3::new(4.0, 4.0, 4.0);
        let votes = votes_from_observation(&obs, &model, &target, None);
        assert_eq!(votes.len(), 1, "one vote per unmasked valid-depth pixel");
        let v = votes[0];
        assert_eq!(v.center, Vec3::new(10.0, -5.0, 400.0));
        // Noiseless argmax: the radius is the distance from the matched
        // sample to the target.
        assert!((v.radius - (model.coord(sample_idx) - target).norm()).abs() < 1e-12);
        // The weight equals the max correspondence probability, recomputed
        // independently.
        let probs = crate::embed::correspondence_prob(obs.query_maps.query(1, 0, 0), &model);
        let max_prob = probs.iter().cloned().fold(0.0, f64::max);
        assert!((v.weight - max_prob).abs() < 1e-12);
        assert!(v.weight > 0.0 && v.weight <= 1.0);

        // An all-masked region of interest yields no votes.
        let roi = crate::grid::Grid2::filled(h, w, false);
        assert!(votes_from_observation(&obs, &model, &target, Some(&roi)).is_empty());
    }

    #[test]
    fn out_of_grid_shell_voxels_dropped() {
        let spec = small_spec();
        let votes = vec![SphereVote {
            center: spec.voxel_center(&[0, 0, 0]),
            radius: 3.0,
            weight: 1.0,
        }];
        let grid = spherical_vote(&votes, &spec);
        let full = enumerate_shell(3.0).len() as f64;
        assert!(grid.total() < full, "clipped shell should lose mass");
        assert!(grid.total() > 0.0);
    }
}
