//! The end-to-end estimation pipeline: coarse hypotheses per class, top-rank
//! initialization, then staged stochastic search.

use super::config::{ExperimentConfig, PhaseConfig, ShapeConfig};
use super::metrics::{pose_errors, PoseErrors};
use super::scenegen::{make_scene, SceneSample};
use super::HarnessError;
use crate::embed::{OracleEmbedConfig, SurfaceModel};
use crate::geometry::{build_rotation_grid, GaussianVmfParams, Pose, RotationGrid};
use crate::hypotheses::{generate_hypotheses, HypothesesConfig, PoseHypothesis, VoxelGridSpec};
use crate::inference::{
    stochastic_search, EvalContext, IcpParams, ObjectSelection, ProposalKind, SearchPhase,
    SearchSchedule, TraceStep,
};
use crate::likelihood::{LikelihoodConfig, MaskPolicy};
use crate::render::{load_mesh, shapes, CameraIntrinsics, ObjectLibrary, SceneDescription,
    SceneObject, TriangleMesh};
use crate::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

/// Resolved, validated assets shared by every run of one configuration.
pub struct Assets {
    pub library: ObjectLibrary,
    pub models: Vec<SurfaceModel>,
    pub camera: CameraIntrinsics,
    pub embed: OracleEmbedConfig,
    pub likelihood: LikelihoodConfig,
    pub hypotheses: HypothesesConfig,
    pub rotations: RotationGrid,
    pub icp: IcpParams,
    pub schedule: SearchSchedule,
}

impl Assets {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let camera = CameraIntrinsics::new(
            cfg.camera.fx,
            cfg.camera.fy,
            cfg.camera.cx,
            cfg.camera.cy,
            cfg.camera.width,
            cfg.camera.height,
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;

        if cfg.classes.is_empty() {
            return Err(HarnessError::Config("at least one class required".into()));
        }
        let mut meshes = Vec::with_capacity(cfg.classes.len());
        for (k, class) in cfg.classes.iter().enumerate() {
            let mesh = build_class_mesh(class, k + 1)?;
            meshes.push(mesh);
        }
        let library = ObjectLibrary::new(meshes);

        let mut embed = OracleEmbedConfig {
            embed_dim: cfg.embed.dim,
            class_seed: cfg.embed.class_seed,
            query_noise_sigma: cfg.embed.query_noise_sigma,
            background_seed: cfg.embed.background_seed,
            temperature: cfg.embed.temperature,
            samples_per_class: cfg.embed.samples_per_class,
            keypoint_count: cfg.embed.keypoints,
            surface_pool: cfg.embed.surface_pool,
            rotation_invariant_classes: Default::default(),
        };
        for (k, class) in cfg.classes.iter().enumerate() {
            if class.rotation_invariant {
                embed.rotation_invariant_classes.insert(k + 1);
            }
        }
        embed
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;

        let models: Vec<SurfaceModel> = (1..=library.n_classes())
            .map(|c| SurfaceModel::build(c, library.mesh(c).unwrap(), &embed))
            .collect::<Result<_, _>>()?;

        let likelihood = LikelihoodConfig {
            ball_radius: cfg.likelihood.ball_radius,
            p_background: cfg.likelihood.p_background,
            epsilon: cfg.likelihood.epsilon,
            patch: (cfg.likelihood.patch[0], cfg.likelihood.patch[1]),
            mask_policy: match cfg.likelihood.mask.as_str() {
                "valid-depth" => MaskPolicy::ValidDepth,
                "all" => MaskPolicy::AllPixels,
                other => {
                    return Err(HarnessError::Config(format!(
                        "likelihood.mask must be 'valid-depth' or 'all', got '{other}'"
                    )))
                }
            },
        };
        likelihood
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;

        let grid = VoxelGridSpec::new(
            Vec3::new(
                cfg.hypotheses.origin[0],
                cfg.hypotheses.origin[1],
                cfg.hypotheses.origin[2],
            ),
            cfg.hypotheses.dims,
            cfg.hypotheses.voxel_diameter,
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;
        let hypotheses = HypothesesConfig {
            grid,
            n_keypoints: cfg.embed.keypoints,
            n_top_positions: cfg.hypotheses.top_positions,
            n_hypotheses: cfg.hypotheses.count,
            nms_radius: cfg.hypotheses.nms_radius,
            rotations_per_position: match cfg.hypotheses.rotations_per_position {
                0 => None,
                n => Some(n),
            },
        };
        let rotations =
            build_rotation_grid(cfg.hypotheses.rotation_axes, cfg.hypotheses.inplane_rotations)?;
        hypotheses
            .validate(&rotations)
            .map_err(|e| HarnessError::Config(e.to_string()))?;

        let icp = IcpParams {
            max_iters: cfg.icp.max_iters,
            max_corr_dist: cfg.icp.max_corr_dist,
            min_visible_pixels: cfg.icp.min_visible_pixels,
            max_points: cfg.icp.max_points,
        };

        let schedule = build_schedule(&cfg.search.phases, &cfg.search.object_selection)?;

        Ok(Self {
            library,
            models,
            camera,
            embed,
            likelihood,
            hypotheses,
            rotations,
            icp,
            schedule,
        })
    }

    pub fn ctx(&self) -> EvalContext<'_> {
        EvalContext {
            library: &self.library,
            camera: &self.camera,
            models: &self.models,
            likelihood: &self.likelihood,
            icp: self.icp,
        }
    }
}

fn build_class_mesh(
    class: &super::config::ClassConfig,
    class_id: usize,
) -> Result<TriangleMesh, HarnessError> {
    if let Some(path) = &class.mesh_file {
        let p = std::path::Path::new(path);
        if !p.exists() {
            return Err(HarnessError::Config(format!(
                "class {class_id}: mesh_file '{path}' does not exist"
            )));
        }
        return load_mesh(p).map_err(|e| HarnessError::Config(e.to_string()));
    }
    match &class.shape {
        Some(ShapeConfig::Box { size }) => Ok(shapes::box_mesh(size[0], size[1], size[2])),
        Some(ShapeConfig::Cylinder {
            radius,
            height,
            segments,
            symmetry_steps,
        }) => Ok(shapes::cylinder_mesh(
            *radius,
            *height,
            *segments,
            *symmetry_steps,
        )),
        Some(ShapeConfig::Quad { size }) => Ok(shapes::quad_mesh(size[0], size[1])),
        None => Err(HarnessError::Config(format!(
            "class {class_id}: either shape or mesh_file required"
        ))),
    }
}

pub(crate) fn build_schedule(
    phases: &[PhaseConfig],
    selection: &str,
) -> Result<SearchSchedule, HarnessError> {
    let object_selection = match selection {
        "round-robin" => ObjectSelection::RoundRobin,
        "random" => ObjectSelection::Random,
        other => {
            return Err(HarnessError::Config(format!(
                "search.object_selection must be 'round-robin' or 'random', got '{other}'"
            )))
        }
    };
    let mut out = Vec::with_capacity(phases.len());
    for p in phases {
        let kind = match p.kind.as_str() {
            "hypotheses" => ProposalKind::Hypotheses,
            "icp" => ProposalKind::Icp,
            "random-walk" => ProposalKind::RandomWalk,
            other => {
                return Err(HarnessError::Config(format!(
                    "phase kind must be hypotheses|icp|random-walk, got '{other}'"
                )))
            }
        };
        let kernel = if p.position_sigma > 0.0 || p.rotation_kappa > 0.0 {
            if p.rotation_kappa > 0.0 {
                Some(
                    GaussianVmfParams::new(p.position_sigma, p.rotation_kappa)
                        .map_err(|e| HarnessError::Config(e.to_string()))?,
                )
            } else {
                Some(
                    GaussianVmfParams::point_mass_rotation(p.position_sigma)
                        .map_err(|e| HarnessError::Config(e.to_string()))?,
                )
            }
        } else {
            None
        };
        out.push(SearchPhase {
            kind,
            proposals: p.proposals,
            sweeps: p.sweeps,
            kernel,
        });
    }
    let schedule = SearchSchedule {
        phases: out,
        object_selection,
    };
    schedule
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(schedule)
}

/// Per-object outcome of one estimation run.
#[derive(Debug, Clone)]
pub struct ObjectReport {
    pub object_index: usize,
    pub class_id: usize,
    pub estimate: Pose,
    pub ground_truth: Pose,
    pub init: PoseErrors,
    pub errors: PoseErrors,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub scene_ms: f64,
    pub hypotheses_ms: f64,
    pub search_ms: f64,
}

#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub reports: Vec<ObjectReport>,
    pub log_likelihood: f64,
    pub trace: Vec<TraceStep>,
    pub timings: StageTimings,
    pub hypotheses: BTreeMap<usize, Vec<PoseHypothesis>>,
}

/// Run the full pipeline on one freshly generated scene.
pub fn run_estimate(
    cfg: &ExperimentConfig,
    assets: &Assets,
    scene_seed: u64,
) -> Result<EstimateOutcome, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(scene_seed, 0x01));
    let t0 = Instant::now();
    let sample = make_scene(cfg, assets, &mut rng)?;
    let scene_ms = t0.elapsed().as_secs_f64() * 1e3;
    run_estimate_on_sample(assets, &sample, scene_seed, scene_ms)
}

/// Run hypotheses + search + metrics on an existing sample.
pub fn run_estimate_on_sample(
    assets: &Assets,
    sample: &SceneSample,
    scene_seed: u64,
    scene_ms: f64,
) -> Result<EstimateOutcome, HarnessError> {
    let ctx = assets.ctx();
    let gt = &sample.ground_truth;

    // Hypotheses per distinct class present in the scene.
    let t1 = Instant::now();
    let mut hypothesis_sets: BTreeMap<usize, Vec<PoseHypothesis>> = BTreeMap::new();
    for obj in &gt.objects {
        if hypothesis_sets.contains_key(&obj.class_id) {
            continue;
        }
        let hyps = generate_hypotheses(
            &sample.observation,
            &assets.models[obj.class_id - 1],
            &assets.hypotheses,
            &assets.rotations,
            None,
        )?;
        hypothesis_sets.insert(obj.class_id, hyps);
    }
    let hypotheses_ms = t1.elapsed().as_secs_f64() * 1e3;

    // Initial scene: instance k of a class takes that class's rank-k
    // hypothesis (clamped to the available count).
    let mut class_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut init_objects = Vec::with_capacity(gt.len());
    for obj in &gt.objects {
        let rank = *class_counts.get(&obj.class_id).unwrap_or(&0);
        class_counts.insert(obj.class_id, rank + 1);
        let set = &hypothesis_sets[&obj.class_id];
        let pose = if set.is_empty() {
            // No votes at all (e.g. fully dropped-out observation): start at
            // the voting-grid center.
            let spec = &assets.hypotheses.grid;
            let center = [
                spec.dims[0] as i64 / 2,
                spec.dims[1] as i64 / 2,
                spec.dims[2] as i64 / 2,
            ];
            Pose::from_translation(spec.voxel_center(&center))
        } else {
            set[rank.min(set.len() - 1)].pose
        };
        init_objects.push(SceneObject {
            class_id: obj.class_id,
            pose,
        });
    }
    let init_scene = SceneDescription::new(init_objects);

    let pose_sets: BTreeMap<usize, Vec<Pose>> = hypothesis_sets
        .iter()
        .map(|(c, hyps)| (*c, hyps.iter().map(|h| h.pose).collect()))
        .collect();

    let t2 = Instant::now();
    let mut search_rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(scene_seed, 0x02));
    let outcome = stochastic_search(
        &init_scene,
        &sample.observation,
        &ctx,
        &assets.schedule,
        &pose_sets,
        &mut search_rng,
    )?;
    let search_ms = t2.elapsed().as_secs_f64() * 1e3;

    let mut reports = Vec::with_capacity(gt.len());
    for (k, obj) in gt.objects.iter().enumerate() {
        let mesh = assets.library.mesh(obj.class_id)?;
        reports.push(ObjectReport {
            object_index: k,
            class_id: obj.class_id,
            estimate: outcome.scene.objects[k].pose,
            ground_truth: obj.pose,
            init: pose_errors(&init_scene.objects[k].pose, &obj.pose, mesh),
            errors: pose_errors(&outcome.scene.objects[k].pose, &obj.pose, mesh),
        });
    }

    Ok(EstimateOutcome {
        reports,
        log_likelihood: outcome.log_likelihood,
        trace: outcome.trace,
        timings: StageTimings {
            scene_ms,
            hypotheses_ms,
            search_ms,
        },
        hypotheses: hypothesis_sets,
    })
}
