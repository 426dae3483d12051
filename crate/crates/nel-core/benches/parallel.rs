//! Parallel vs sequential throughput of the data-parallel cores: batch
//! likelihood evaluation, the voting passes of hypothesis generation, and
//! pose scoring.
//!
//! The parallel side runs on the default pool; the sequential side either
//! calls the `_seq` twin or installs a one-thread pool. Building with
//! `--no-default-features` removes rayon entirely and makes both sides run
//! the plain sequential code.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nel_core::embed::{make_query_maps, OracleEmbedConfig, SurfaceModel};
use nel_core::geometry::{build_rotation_grid, Pose};
use nel_core::harness::{make_scene_seeded, Assets, ExperimentConfig};
use nel_core::hypotheses::{generate_hypotheses, HypothesesConfig, VoxelGridSpec};
use nel_core::likelihood::{batch_log_likelihood, batch_log_likelihood_seq};
use nel_core::render::{render, RenderOutput, SceneDescription, SceneObject};
use nel_core::Vec3;

fn bench_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.camera.width = 128;
    cfg.camera.height = 96;
    cfg.camera.cx = 64.0;
    cfg.camera.cy = 48.0;
    cfg.camera.fx = 160.0;
    cfg.camera.fy = 160.0;
    cfg.embed.samples_per_class = 512;
    cfg.embed.surface_pool = 2048;
    cfg.scene.z_range = [650.0, 900.0];
    cfg
}

fn candidate_renders(cfg: &ExperimentConfig, assets: &Assets, n: usize) -> Vec<RenderOutput> {
    let sample = make_scene_seeded(cfg, assets, 7).expect("scene");
    let gt = &sample.ground_truth.objects[0];
    (0..n)
        .map(|k| {
            let jitter = Vec3::new(k as f64 * 0.8 - 8.0, 0.3 * k as f64, 0.0);
            let pose = Pose::new(*gt.pose.rotation(), gt.pose.translation() + jitter);
            let scene = SceneDescription::new(vec![SceneObject {
                class_id: gt.class_id,
                pose,
            }]);
            render(&scene, &assets.library, &assets.camera).expect("render")
        })
        .collect()
}

fn bench_batch_likelihood(c: &mut Criterion) {
    let cfg = bench_config();
    let assets = Assets::build(&cfg).expect("assets");
    let sample = make_scene_seeded(&cfg, &assets, 7).expect("scene");
    let renders = candidate_renders(&cfg, &assets, 64);

    let mut group = c.benchmark_group("batch_log_likelihood");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            batch_log_likelihood(
                &sample.observation,
                &renders,
                &assets.models,
                &assets.likelihood,
            )
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            batch_log_likelihood_seq(
                &sample.observation,
                &renders,
                &assets.models,
                &assets.likelihood,
            )
        })
    });
    group.finish();
}

fn bench_hypothesis_generation(c: &mut Criterion) {
    let cfg = bench_config();
    let assets = Assets::build(&cfg).expect("assets");
    let sample = make_scene_seeded(&cfg, &assets, 11).expect("scene");
    let rotations = build_rotation_grid(200, 32).expect("rotation grid");
    let gen_cfg = HypothesesConfig {
        grid: VoxelGridSpec::default_workspace(),
        n_keypoints: assets.models[0].keypoints().len(),
        ..HypothesesConfig::default()
    };

    let mut group = c.benchmark_group("generate_hypotheses");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            generate_hypotheses(
                &sample.observation,
                &assets.models[0],
                &gen_cfg,
                &rotations,
                None,
            )
            .expect("hypotheses")
        })
    });
    group.bench_function("one_thread", |b| {
        b.iter_batched(
            || (),
            |()| {
                nel_core::par::with_threads(1, || {
                    generate_hypotheses(
                        &sample.observation,
                        &assets.models[0],
                        &gen_cfg,
                        &rotations,
                        None,
                    )
                    .expect("hypotheses")
                })
            },
            BatchSize::PerIteration,
        )
    });
    group.finish();
}

fn bench_query_maps(c: &mut Criterion) {
    let cfg = bench_config();
    let assets = Assets::build(&cfg).expect("assets");
    let sample = make_scene_seeded(&cfg, &assets, 13).expect("scene");
    let gt_render = render(&sample.ground_truth, &assets.library, &assets.camera).unwrap();
    let ecfg = OracleEmbedConfig {
        samples_per_class: 512,
        surface_pool: 2048,
        ..OracleEmbedConfig::default()
    };
    let models: Vec<SurfaceModel> = (1..=assets.library.n_classes())
        .map(|k| SurfaceModel::build(k, assets.library.mesh(k).unwrap(), &ecfg).unwrap())
        .collect();

    let mut group = c.benchmark_group("query_maps");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || rand_chacha(),
            |mut rng| make_query_maps(&gt_render, &models, &ecfg, &mut rng).unwrap(),
            BatchSize::PerIteration,
        )
    });
    group.bench_function("one_thread", |b| {
        b.iter_batched(
            || rand_chacha(),
            |mut rng| {
                let (render, models, cfg) = (&gt_render, &models, &ecfg);
                nel_core::par::with_threads(1, move || {
                    make_query_maps(render, models, cfg, &mut rng).unwrap()
                })
            },
            BatchSize::PerIteration,
        )
    });
    group.finish();
}

fn rand_chacha() -> impl rand::Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(5)
}

criterion_group!(
    benches,
    bench_batch_likelihood,
    bench_hypothesis_generation,
    bench_query_maps
);
criterion_main!(benches);
