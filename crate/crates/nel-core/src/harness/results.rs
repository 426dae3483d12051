//! Result persistence: CSV rows, run manifests.
//!
//! Outputs are reproducible byte-for-byte from config + seeds, so nothing
//! wall-clock-dependent is written: the `wall_ms` column is fixed at 0 and
//! stage timings are reported on stdout (and by the `bench` subcommand)
//! instead.

use super::HarnessError;
use std::fmt::Write as _;
use std::path::Path;

pub const RESULTS_HEADER: &str =
    "run_id,scene_id,object_id,class,rot_err_deg,trans_err_mm,add_mm,mssd_mm,loglik,wall_ms";

/// One result line: an object instance (estimate mode) or a frame (tracking
/// modes, where `object_id` carries the frame index).
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub run_id: String,
    pub scene_id: u64,
    pub object_id: usize,
    pub class: usize,
    pub rot_err_deg: f64,
    pub trans_err_mm: f64,
    pub add_mm: f64,
    pub mssd_mm: f64,
    pub loglik: f64,
}

pub fn render_results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{RESULTS_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},0",
            r.run_id,
            r.scene_id,
            r.object_id,
            r.class,
            r.rot_err_deg,
            r.trans_err_mm,
            r.add_mm,
            r.mssd_mm,
            r.loglik
        );
    }
    out
}

/// Deterministic run identifier from the master seed and the resolved config
/// text.
pub fn results_run_id(seed: u64, resolved_config: &str) -> String {
    let mut h = crate::seed::splitmix64(seed ^ 0x9d3f_b1c5_a7e2_4d01);
    for chunk in resolved_config.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = crate::seed::splitmix64(h ^ u64::from_le_bytes(word));
    }
    format!("{h:016x}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Persist the fully resolved configuration next to the results.
pub fn write_manifest(path: &Path, resolved_config: &str) -> Result<(), HarnessError> {
    write_text(path, resolved_config)
}
