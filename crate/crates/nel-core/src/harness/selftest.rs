//! Brute-force oracle suites: patched likelihood vs the all-pairs reference,
//! and scatter voting vs per-voxel enumeration.

use super::config::ExperimentConfig;
use super::experiment::Assets;
use super::scenegen::{make_scene, sample_uniform_rotation};
use crate::hypotheses::{brute_force_spherical_vote, spherical_vote, SphereVote, VoxelGridSpec};
use crate::likelihood::reference::reference_log_likelihood;
use crate::likelihood::{log_likelihood, LikelihoodConfig};
use crate::render::render;
use crate::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub text: String,
    pub passed: bool,
}

const LIKELIHOOD_SCENES: usize = 200;
const VOTE_SETS: usize = 100;

/// Run both oracle suites. The report text is deterministic for a seed (no
/// wall-clock content), so repeated runs must produce identical files.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut text = String::new();
    let mut passed = true;

    let (lik_ok, lik_max_rel) = likelihood_patch_oracle(seed);
    passed &= lik_ok;
    let _ = writeln!(
        text,
        "likelihood patch oracle: {} ({} scenes, max relative deviation {:.3e}, tolerance 1e-9)",
        if lik_ok { "PASS" } else { "FAIL" },
        LIKELIHOOD_SCENES,
        lik_max_rel
    );

    let (vote_ok, mismatches) = voting_shell_oracle(seed);
    passed &= vote_ok;
    let _ = writeln!(
        text,
        "voting shell oracle: {} ({} vote sets, {} mismatched voxels, exact equality required)",
        if vote_ok { "PASS" } else { "FAIL" },
        VOTE_SETS,
        mismatches
    );

    let _ = writeln!(text, "selftest: {}", if passed { "PASS" } else { "FAIL" });
    SelftestReport { text, passed }
}

/// Patched evaluation with a full-image patch must match the naive all-pairs
/// mixture within 1e-9 relative, on random small scenes with 1-3 objects.
fn likelihood_patch_oracle(seed: u64) -> (bool, f64) {
    let mut cfg = ExperimentConfig::default();
    cfg.camera.width = 16;
    cfg.camera.height = 16;
    cfg.camera.fx = 40.0;
    cfg.camera.fy = 40.0;
    cfg.camera.cx = 8.0;
    cfg.camera.cy = 8.0;
    cfg.classes = vec![
        super::config::ClassConfig {
            shape: Some(super::config::ShapeConfig::Box {
                size: [80.0, 60.0, 40.0],
            }),
            ..Default::default()
        },
        super::config::ClassConfig {
            shape: Some(super::config::ShapeConfig::Box {
                size: [50.0, 50.0, 50.0],
            }),
            ..Default::default()
        },
        super::config::ClassConfig {
            shape: Some(super::config::ShapeConfig::Cylinder {
                radius: 25.0,
                height: 80.0,
                segments: 24,
                symmetry_steps: 0,
            }),
            ..Default::default()
        },
    ];
    cfg.embed.samples_per_class = 64;
    cfg.embed.surface_pool = 256;
    cfg.embed.keypoints = 4;
    cfg.scene.x_range = [-60.0, 60.0];
    cfg.scene.y_range = [-60.0, 60.0];
    cfg.scene.z_range = [350.0, 600.0];
    cfg.scene.min_separation_factor = 0.4;
    let assets = Assets::build(&cfg).expect("selftest assets");

    let full_patch = LikelihoodConfig {
        patch: (2 * cfg.camera.height, 2 * cfg.camera.width),
        ..assets.likelihood.clone()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, 0xa1));
    let mut max_rel: f64 = 0.0;
    for case in 0..LIKELIHOOD_SCENES {
        let n_objects = 1 + case % 3;
        let mut scene_cfg = cfg.clone();
        scene_cfg.scene.objects = (0..n_objects).map(|k| 1 + k % 3).collect();
        let sample = match make_scene(&scene_cfg, &assets, &mut rng) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let rendered = render(&sample.ground_truth, &assets.library, &assets.camera)
            .expect("render");
        let fast = log_likelihood(&sample.observation, &rendered, &assets.models, &full_patch);
        let slow =
            reference_log_likelihood(&sample.observation, &rendered, &assets.models, &full_patch);
        let rel = (fast - slow).abs() / slow.abs().max(1.0);
        max_rel = max_rel.max(rel);
    }
    (max_rel < 1e-9, max_rel)
}

/// Scatter accumulation must equal the per-voxel brute force bit-for-bit on
/// random vote sets over grids up to 32^3.
fn voting_shell_oracle(seed: u64) -> (bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, 0xb2));
    let mut mismatches = 0usize;
    for case in 0..VOTE_SETS {
        let dims = [
            4 + (rng.gen::<u64>() % 29) as usize,
            4 + (rng.gen::<u64>() % 29) as usize,
            4 + (rng.gen::<u64>() % 29) as usize,
        ];
        let d = 0.5 + rng.gen::<f64>() * 7.5;
        let origin = Vec3::new(
            rng.gen::<f64>() * 100.0 - 50.0,
            rng.gen::<f64>() * 100.0 - 50.0,
            rng.gen::<f64>() * 100.0 - 50.0,
        );
        let spec = VoxelGridSpec::new(origin, dims, d).expect("spec");
        let n_votes = 1 + case % 50;
        let votes: Vec<SphereVote> = (0..n_votes)
            .map(|_| SphereVote {
                center: origin
                    + Vec3::new(
                        (rng.gen::<f64>() * 1.6 - 0.3) * dims[0] as f64 * d,
                        (rng.gen::<f64>() * 1.6 - 0.3) * dims[1] as f64 * d,
                        (rng.gen::<f64>() * 1.6 - 0.3) * dims[2] as f64 * d,
                    ),
                radius: rng.gen::<f64>() * 10.0 * d,
                weight: rng.gen::<f64>(),
            })
            .collect();
        let fast = spherical_vote(&votes, &spec);
        let slow = brute_force_spherical_vote(&votes, &spec);
        mismatches += fast
            .values
            .iter()
            .zip(&slow.values)
            .filter(|(a, b)| a != b)
            .count();
        // Also exercise uniform-rotation sampling determinism in passing.
        let _ = sample_uniform_rotation(&mut rng);
    }
    (mismatches == 0, mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_is_deterministic() {
        let a = run_selftest(0);
        let b = run_selftest(0);
        assert_eq!(a.text, b.text);
        assert!(a.passed, "selftest failed:\n{}", a.text);
    }
}
