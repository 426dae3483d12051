//! ASCII mesh file format.
//!
//! ```text
//! <vertex_count> <triangle_count>
//! x y z                   (one vertex per line, 3 decimals)
//! i j k                   (one triangle per line, zero-based indices)
//! symmetries <count>      (optional block)
//! qw qx qy qz tx ty tz    (one symmetry transform per line)
//! ```

use super::{RenderError, TriangleMesh};
use crate::geometry::Pose;
use crate::Vec3;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_mesh(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", mesh.vertices().len(), mesh.triangles().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:.3} {:.3} {:.3}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    if !mesh.symmetries().is_empty() {
        let _ = writeln!(out, "symmetries {}", mesh.symmetries().len());
        for s in mesh.symmetries() {
            let [w, x, y, z] = s.wxyz();
            let t = s.translation();
            let _ = writeln!(
                out,
                "{:.9} {:.9} {:.9} {:.9} {:.3} {:.3} {:.3}",
                w, x, y, z, t.x, t.y, t.z
            );
        }
    }
    out
}

pub fn read_mesh(text: &str, origin: &str) -> Result<TriangleMesh, RenderError> {
    let err = |message: String| RenderError::MeshIo {
        path: origin.to_string(),
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err("empty file".to_string()))?;
    let mut parts = header.split_whitespace();
    let nv: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err("bad vertex count in header".to_string()))?;
    let nt: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err("bad triangle count in header".to_string()))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| err("unexpected end of file in vertex block".to_string()))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(format!("line {}: {e}", ln + 1)))?;
        if vals.len() != 3 {
            return Err(err(format!("line {}: expected 3 coordinates", ln + 1)));
        }
        vertices.push(Vec3::new(vals[0], vals[1], vals[2]));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| err("unexpected end of file in triangle block".to_string()))?;
        let vals: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(format!("line {}: {e}", ln + 1)))?;
        if vals.len() != 3 {
            return Err(err(format!("line {}: expected 3 indices", ln + 1)));
        }
        triangles.push([vals[0], vals[1], vals[2]]);
    }

    let mut symmetries = Vec::new();
    if let Some((ln, line)) = lines.next() {
        let line = line.trim();
        if !line.is_empty() {
            let mut parts = line.split_whitespace();
            if parts.next() != Some("symmetries") {
                return Err(err(format!("line {}: expected 'symmetries <n>'", ln + 1)));
            }
            let ns: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(format!("line {}: bad symmetry count", ln + 1)))?;
            for _ in 0..ns {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| err("unexpected end of file in symmetry block".to_string()))?;
                let vals: Vec<f64> = line
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(format!("line {}: {e}", ln + 1)))?;
                if vals.len() != 7 {
                    return Err(err(format!(
                        "line {}: expected quaternion + translation (7 values)",
                        ln + 1
                    )));
                }
                symmetries.push(Pose::from_wxyz(
                    vals[0],
                    vals[1],
                    vals[2],
                    vals[3],
                    Vec3::new(vals[4], vals[5], vals[6]),
                ));
            }
        }
    }

    TriangleMesh::new(vertices, triangles, symmetries)
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path) -> Result<(), RenderError> {
    std::fs::write(path, write_mesh(mesh)).map_err(|e| RenderError::MeshIo {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_mesh(path: &Path) -> Result<TriangleMesh, RenderError> {
    let text = std::fs::read_to_string(path).map_err(|e| RenderError::MeshIo {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_mesh(&text, &path.display().to_string())
}
