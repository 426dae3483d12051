//! Command-line driver: scene estimation, tracking, camera tracking,
//! hypothesis dumps, renders, oracle self-tests and stage timing.
//!
//! Exit codes: 0 success, 1 configuration error (the message names the
//! offending key or path), 2 runtime failure.

use clap::{Args, Parser, Subcommand};
use nel_core::harness::{
    self, load_config_with_overrides, render_results_csv, results_run_id, run_camera_benchmark,
    run_estimate, run_selftest, run_tracking, write_manifest, write_text, Assets, ExperimentConfig,
    HarnessError, ResultRow,
};
use nel_core::hypotheses::generate_hypotheses;
use nel_core::render::render;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "nel-pose",
    about = "Probabilistic render-and-compare 6D pose estimation and tracking",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override; all results are written under it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config override, repeatable: --set section.key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker thread cap (0 = auto). Falls back to NEL_POSE_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Print progress details.
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scenes and run the full estimation pipeline.
    Estimate(CommonOpts),
    /// Particle-filter object tracking over the scripted sequence.
    Track(CommonOpts),
    /// Static-scene camera tracking vs single-frame estimation.
    CameraTrack(CommonOpts),
    /// Dump ranked pose hypotheses for one generated scene.
    Hypotheses(CommonOpts),
    /// Render the ground-truth scene products to image files.
    Render(CommonOpts),
    /// Run the brute-force oracle suites and write a report.
    Selftest {
        /// Seed for the randomized oracle cases.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for the report file.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker thread cap (0 = auto). Falls back to NEL_POSE_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print per-stage wall times for the configured experiment.
    Bench(CommonOpts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(opts) => with_config(&opts, cmd_estimate),
        Command::Track(opts) => with_config(&opts, cmd_track),
        Command::CameraTrack(opts) => with_config(&opts, cmd_camera_track),
        Command::Hypotheses(opts) => with_config(&opts, cmd_hypotheses),
        Command::Render(opts) => with_config(&opts, cmd_render),
        Command::Selftest { seed, out, threads } => {
            configure_threads(threads);
            cmd_selftest(seed, &out)
        }
        Command::Bench(opts) => with_config(&opts, cmd_bench),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(HarnessError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(cli_threads: Option<usize>) {
    let n = cli_threads.or_else(|| {
        std::env::var("NEL_POSE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    nel_core::par::configure_threads(n.unwrap_or(0));
}

struct Run {
    cfg: ExperimentConfig,
    out_dir: PathBuf,
    resolved: String,
    run_id: String,
    verbose: bool,
}

fn with_config(
    opts: &CommonOpts,
    f: impl FnOnce(&Run) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    configure_threads(opts.threads);
    let overrides: Vec<(String, String)> = opts
        .set
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    HarnessError::Config(format!("--set expects KEY=VALUE, got '{s}'"))
                })
        })
        .collect::<Result<_, _>>()?;
    let mut cfg = load_config_with_overrides(&opts.config, &overrides)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output.dir = out.display().to_string();
    }
    let resolved = toml::to_string_pretty(&cfg)
        .map_err(|e| HarnessError::Config(format!("cannot serialize resolved config: {e}")))?;
    // The output directory is not part of the experiment identity.
    let mut for_id = cfg.clone();
    for_id.output.dir = String::new();
    let id_text = toml::to_string_pretty(&for_id)
        .map_err(|e| HarnessError::Config(format!("cannot serialize resolved config: {e}")))?;
    let run_id = results_run_id(cfg.seed, &id_text);
    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    write_manifest(&out_dir.join("manifest.toml"), &resolved)?;
    f(&Run {
        cfg,
        out_dir,
        resolved,
        run_id,
        verbose: opts.verbose,
    })
}

fn cmd_estimate(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let mut rows = Vec::new();
    let mut trace_csv = String::from("scene_id,step,object,previous,accepted\n");
    for scene_id in 0..run.cfg.scene.count.max(1) {
        let scene_seed = nel_core::seed::derive(run.cfg.seed, scene_id as u64);
        let outcome = run_estimate(&run.cfg, &assets, scene_seed)?;
        if run.verbose {
            eprintln!(
                "scene {scene_id}: loglik {:.3}, {} accepted steps, stages: scene {:.1} ms, hypotheses {:.1} ms, search {:.1} ms",
                outcome.log_likelihood,
                outcome.trace.len(),
                outcome.timings.scene_ms,
                outcome.timings.hypotheses_ms,
                outcome.timings.search_ms
            );
        }
        for r in &outcome.reports {
            rows.push(ResultRow {
                run_id: run.run_id.clone(),
                scene_id: scene_id as u64,
                object_id: r.object_index,
                class: r.class_id,
                rot_err_deg: r.errors.rotation_deg,
                trans_err_mm: r.errors.translation_mm,
                add_mm: r.errors.add_mm,
                mssd_mm: r.errors.mssd_mm,
                loglik: outcome.log_likelihood,
            });
        }
        for t in &outcome.trace {
            let _ = writeln!(
                trace_csv,
                "{scene_id},{},{},{:.6},{:.6}",
                t.step, t.object, t.previous, t.accepted
            );
        }
    }
    write_text(&run.out_dir.join("results.csv"), &render_results_csv(&rows))?;
    write_text(&run.out_dir.join("trace.csv"), &trace_csv)?;
    println!(
        "estimate: {} scenes -> {}",
        run.cfg.scene.count.max(1),
        run.out_dir.join("results.csv").display()
    );
    Ok(())
}

fn cmd_track(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let outcome = run_tracking(&run.cfg, &assets, run.cfg.seed)?;
    let target_class = run
        .cfg
        .tracking
        .as_ref()
        .map(|t| t.objects[t.target_object].class)
        .unwrap_or(1);
    let rows: Vec<ResultRow> = outcome
        .frames
        .iter()
        .map(|f| ResultRow {
            run_id: run.run_id.clone(),
            scene_id: 0,
            object_id: f.frame,
            class: target_class,
            rot_err_deg: f.errors.rotation_deg,
            trans_err_mm: f.errors.translation_mm,
            add_mm: f.errors.add_mm,
            mssd_mm: f.errors.mssd_mm,
            loglik: f.log_likelihood_max,
        })
        .collect();
    write_text(&run.out_dir.join("results.csv"), &render_results_csv(&rows))?;
    let mut spread = String::from("frame,spread_mm,target_visible_px\n");
    for f in &outcome.frames {
        let _ = writeln!(spread, "{},{:.6},{}", f.frame, f.spread_mm, f.target_visible_px);
    }
    write_text(&run.out_dir.join("spread.csv"), &spread)?;
    println!(
        "track: {} frames -> {}",
        outcome.frames.len(),
        run.out_dir.join("results.csv").display()
    );
    Ok(())
}

fn cmd_camera_track(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let outcome = run_camera_benchmark(&run.cfg, &assets, run.cfg.seed)?;
    let mut csv = String::from(
        "frame,tracked_rot_deg,tracked_trans_mm,single_rot_deg,single_trans_mm\n",
    );
    for f in &outcome.frames {
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{:.6},{:.6}",
            f.frame, f.tracked_rot_deg, f.tracked_trans_mm, f.single_rot_deg, f.single_trans_mm
        );
    }
    write_text(&run.out_dir.join("camera_track.csv"), &csv)?;
    println!(
        "camera-track: mean rotation error {:.3} deg tracked vs {:.3} deg single-frame",
        outcome.mean_tracked_rot_deg, outcome.mean_single_rot_deg
    );
    Ok(())
}

fn cmd_hypotheses(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let scene_seed = nel_core::seed::derive(run.cfg.seed, 0);
    let sample = harness::make_scene_seeded(&run.cfg, &assets, scene_seed)?;
    let mut csv = String::from("class,rank,score,qw,qx,qy,qz,tx,ty,tz\n");
    let mut seen = std::collections::BTreeSet::new();
    for obj in &sample.ground_truth.objects {
        if !seen.insert(obj.class_id) {
            continue;
        }
        let hyps = generate_hypotheses(
            &sample.observation,
            &assets.models[obj.class_id - 1],
            &assets.hypotheses,
            &assets.rotations,
            None,
        )?;
        for (rank, h) in hyps.iter().enumerate() {
            let [w, x, y, z] = h.pose.wxyz();
            let t = h.pose.translation();
            let _ = writeln!(
                csv,
                "{},{},{:.6},{:.9},{:.9},{:.9},{:.9},{:.3},{:.3},{:.3}",
                obj.class_id, rank, h.score, w, x, y, z, t.x, t.y, t.z
            );
        }
    }
    write_text(&run.out_dir.join("hypotheses.csv"), &csv)?;
    println!("hypotheses -> {}", run.out_dir.join("hypotheses.csv").display());
    Ok(())
}

fn cmd_render(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let scene_seed = nel_core::seed::derive(run.cfg.seed, 0);
    let sample = harness::make_scene_seeded(&run.cfg, &assets, scene_seed)?;
    let r = render(&sample.ground_truth, &assets.library, &assets.camera)?;
    write_pgm16(
        &run.out_dir.join("depth.pgm"),
        &r.depth(),
    )?;
    write_seg_pgm(&run.out_dir.join("segmentation.pgm"), &r.segmentation)?;
    println!(
        "render: {} foreground pixels -> {}",
        r.fg_count,
        run.out_dir.join("depth.pgm").display()
    );
    Ok(())
}

fn cmd_selftest(seed: u64, out: &Path) -> Result<(), HarnessError> {
    let report = run_selftest(seed);
    print!("{}", report.text);
    std::fs::create_dir_all(out)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", out.display())))?;
    write_text(&out.join("selftest.txt"), &report.text)?;
    if report.passed {
        Ok(())
    } else {
        Err(HarnessError::Runtime("selftest failed".to_string()))
    }
}

fn cmd_bench(run: &Run) -> Result<(), HarnessError> {
    let assets = Assets::build(&run.cfg)?;
    let scene_seed = nel_core::seed::derive(run.cfg.seed, 0);
    let t0 = Instant::now();
    let outcome = run_estimate(&run.cfg, &assets, scene_seed)?;
    let total = t0.elapsed().as_secs_f64() * 1e3;
    println!("stage timings (ms):");
    println!("  scene generation   {:>10.2}", outcome.timings.scene_ms);
    println!("  hypotheses         {:>10.2}", outcome.timings.hypotheses_ms);
    println!("  stochastic search  {:>10.2}", outcome.timings.search_ms);
    println!("  total              {:>10.2}", total);
    if let Some(tracking) = &run.cfg.tracking {
        let t1 = Instant::now();
        let tr = run_tracking(&run.cfg, &assets, run.cfg.seed)?;
        let ms = t1.elapsed().as_secs_f64() * 1e3;
        println!(
            "  filter step        {:>10.2}   ({} frames, {} particles)",
            ms / tr.frames.len().max(1) as f64,
            tr.frames.len(),
            tracking.particles
        );
    }
    let _ = &run.resolved;
    Ok(())
}

fn write_pgm16(path: &Path, depth: &nel_core::grid::Grid2<f64>) -> Result<(), HarnessError> {
    let mut bytes = format!("P5\n{} {}\n65535\n", depth.width(), depth.height()).into_bytes();
    for v in depth.data() {
        let mm = v.round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&mm.to_be_bytes());
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn write_seg_pgm(path: &Path, seg: &nel_core::grid::Grid2<u32>) -> Result<(), HarnessError> {
    let mut bytes = format!("P5\n{} {}\n255\n", seg.width(), seg.height()).into_bytes();
    for &v in seg.data() {
        bytes.push((v.min(255)) as u8);
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
