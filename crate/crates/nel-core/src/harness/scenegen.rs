//! Synthetic scene and observation generation.

use super::config::ExperimentConfig;
use super::experiment::Assets;
use super::HarnessError;
use crate::embed::make_query_maps;
use crate::geometry::Pose;
use crate::grid::Grid2;
use crate::likelihood::Observation;
use crate::render::{render, unproject, RenderOutput, SceneDescription, SceneObject};
use crate::Vec3;
use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A generated scene: ground truth, its render, and the synthesized
/// observation (noisy depth, dropout, oracle query maps).
#[derive(Debug, Clone)]
pub struct SceneSample {
    pub ground_truth: SceneDescription,
    pub gt_render: RenderOutput,
    pub observation: Observation,
}

/// Uniformly random rotation (normalized 4-vector of standard normals).
pub fn sample_uniform_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let w: f64 = StandardNormal.sample(rng);
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        let q = Quaternion::new(w, x, y, z);
        if q.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

/// [`make_scene`] with a self-contained seeded generator.
pub fn make_scene_seeded(
    cfg: &ExperimentConfig,
    assets: &super::experiment::Assets,
    seed: u64,
) -> Result<SceneSample, HarnessError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    make_scene(cfg, assets, &mut rng)
}

/// Sample object poses in the configured box (non-overlapping by bounding
/// spheres), render the ground truth, and synthesize the observation.
pub fn make_scene<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    assets: &Assets,
    rng: &mut R,
) -> Result<SceneSample, HarnessError> {
    let sg = &cfg.scene;
    let mut placed: Vec<(Vec3, f64)> = Vec::new();
    let mut objects = Vec::with_capacity(sg.objects.len());
    for &class_id in &sg.objects {
        let mesh = assets.library.mesh(class_id)?;
        let radius = mesh.bounding_radius();
        let mut accepted = None;
        for _ in 0..sg.max_placement_tries {
            let p = Vec3::new(
                sg.x_range[0] + rng.gen::<f64>() * (sg.x_range[1] - sg.x_range[0]),
                sg.y_range[0] + rng.gen::<f64>() * (sg.y_range[1] - sg.y_range[0]),
                sg.z_range[0] + rng.gen::<f64>() * (sg.z_range[1] - sg.z_range[0]),
            );
            let clear = placed.iter().all(|(q, r)| {
                (p - q).norm() >= sg.min_separation_factor * (radius + r)
            });
            if clear {
                accepted = Some(p);
                break;
            }
        }
        let position = accepted.ok_or_else(|| {
            HarnessError::Runtime(format!(
                "failed to place object of class {class_id} after {} tries",
                sg.max_placement_tries
            ))
        })?;
        placed.push((position, radius));
        let rotation = sample_uniform_rotation(rng);
        objects.push(SceneObject {
            class_id,
            pose: Pose::new(rotation, position),
        });
    }
    let ground_truth = SceneDescription::new(objects);
    sample_observation(cfg, assets, ground_truth, rng)
}

/// Render a ground-truth scene and synthesize its observation: per-pixel
/// Gaussian depth noise, dropout to invalid, and oracle query maps.
pub fn sample_observation<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    assets: &Assets,
    ground_truth: SceneDescription,
    rng: &mut R,
) -> Result<SceneSample, HarnessError> {
    let sg = &cfg.scene;
    let gt_render = render(&ground_truth, &assets.library, &assets.camera)?;

    let mut depth = Grid2::filled(assets.camera.height, assets.camera.width, 0.0f64);
    for i in 0..depth.height() {
        for j in 0..depth.width() {
            if *gt_render.segmentation.get(i, j) == 0 {
                continue;
            }
            let mut z = gt_render.point_cloud.get(i, j).z;
            if sg.depth_noise_sigma > 0.0 {
                let n: f64 = StandardNormal.sample(rng);
                z += sg.depth_noise_sigma * n;
            }
            if sg.dropout > 0.0 && rng.gen::<f64>() < sg.dropout {
                continue;
            }
            if z > 0.0 {
                depth.set(i, j, z);
            }
        }
    }
    let point_cloud = unproject(&depth, &assets.camera);
    let query_maps = make_query_maps(&gt_render, &assets.models, &assets.embed, rng)?;
    let observation = Observation::new(
        point_cloud,
        query_maps,
        None,
        assets.likelihood.mask_policy,
    )?;
    Ok(SceneSample {
        ground_truth,
        gt_render,
        observation,
    })
}

/// Placed-object helper for tracking/camera configs: position + yaw.
pub(crate) fn placed_pose(position: [f64; 3], yaw_deg: f64) -> Pose {
    let yaw = yaw_deg.to_radians();
    let q = UnitQuaternion::from_axis_angle(
        &nalgebra::Unit::new_normalize(Vec3::new(0.0, 0.0, 1.0)),
        yaw,
    );
    Pose::new(q, Vec3::new(position[0], position[1], position[2]))
}
