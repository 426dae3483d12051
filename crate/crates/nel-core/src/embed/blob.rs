//! Flat binary serialization for surface models and query maps.
//!
//! Layout: a header of little-endian u32 dims/counts followed by a row-major
//! little-endian f32 payload.
//!
//! Surface model: `[class_id, n_samples, embed_dim, n_keypoints]`, then
//! sample coordinates (n x 3), key embeddings (n x E), keypoints (n_k x 3).
//!
//! Query maps: `[height, width, n_classes, embed_dim]`, then per class the
//! query block (H x W x E) and the log-normalizer block (H x W).

use super::oracle::QueryMaps;
use super::surface::SurfaceModel;
use super::{EmbedError, OracleEmbedConfig};
use crate::Vec3;
use std::io::{Read, Write};
use std::path::Path;

fn push_u32<W: Write>(w: &mut W, v: u32) -> Result<(), EmbedError> {
    w.write_all(&v.to_le_bytes())
        .map_err(|e| EmbedError::Io(e.to_string()))
}

fn push_f32<W: Write>(w: &mut W, v: f64) -> Result<(), EmbedError> {
    w.write_all(&(v as f32).to_le_bytes())
        .map_err(|e| EmbedError::Io(e.to_string()))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32, EmbedError> {
        if self.at + 4 > self.bytes.len() {
            return Err(EmbedError::Format("truncated header".to_string()));
        }
        let v = u32::from_le_bytes(self.bytes[self.at..self.at + 4].try_into().unwrap());
        self.at += 4;
        Ok(v)
    }

    fn f32(&mut self) -> Result<f64, EmbedError> {
        if self.at + 4 > self.bytes.len() {
            return Err(EmbedError::Format("truncated payload".to_string()));
        }
        let v = f32::from_le_bytes(self.bytes[self.at..self.at + 4].try_into().unwrap());
        self.at += 4;
        Ok(v as f64)
    }
}

pub fn write_surface_model<W: Write>(model: &SurfaceModel, w: &mut W) -> Result<(), EmbedError> {
    push_u32(w, model.class_id() as u32)?;
    push_u32(w, model.len() as u32)?;
    push_u32(w, model.embed_dim() as u32)?;
    push_u32(w, model.keypoints().len() as u32)?;
    for c in model.coords() {
        push_f32(w, c.x)?;
        push_f32(w, c.y)?;
        push_f32(w, c.z)?;
    }
    for &k in model.keys() {
        push_f32(w, k)?;
    }
    for p in model.keypoints() {
        push_f32(w, p.x)?;
        push_f32(w, p.y)?;
        push_f32(w, p.z)?;
    }
    Ok(())
}

/// Read a surface model blob. When `cfg` is given the class key model is
/// rebuilt from the seeds so the loaded model can embed new points.
pub fn read_surface_model(
    bytes: &[u8],
    cfg: Option<&OracleEmbedConfig>,
) -> Result<SurfaceModel, EmbedError> {
    let mut r = Reader { bytes, at: 0 };
    let class_id = r.u32()? as usize;
    let n = r.u32()? as usize;
    let e = r.u32()? as usize;
    let nk = r.u32()? as usize;
    if n == 0 || e == 0 {
        return Err(EmbedError::Format("empty model".to_string()));
    }
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y, z) = (r.f32()?, r.f32()?, r.f32()?);
        coords.push(Vec3::new(x, y, z));
    }
    let mut keys = Vec::with_capacity(n * e);
    for _ in 0..n * e {
        keys.push(r.f32()?);
    }
    let mut keypoints = Vec::with_capacity(nk);
    for _ in 0..nk {
        let (x, y, z) = (r.f32()?, r.f32()?, r.f32()?);
        keypoints.push(Vec3::new(x, y, z));
    }
    let model = match cfg {
        Some(cfg) => SurfaceModel::from_parts_with_config(class_id, coords, keys, keypoints, e, cfg),
        None => SurfaceModel::from_parts(class_id, coords, keys, keypoints, e),
    };
    Ok(model)
}

pub fn write_query_maps<W: Write>(maps: &QueryMaps, w: &mut W) -> Result<(), EmbedError> {
    push_u32(w, maps.height() as u32)?;
    push_u32(w, maps.width() as u32)?;
    push_u32(w, maps.n_classes() as u32)?;
    push_u32(w, maps.embed_dim() as u32)?;
    for &q in maps.queries() {
        push_f32(w, q)?;
    }
    for &z in maps.log_normalizers() {
        push_f32(w, z)?;
    }
    Ok(())
}

pub fn read_query_maps(bytes: &[u8]) -> Result<QueryMaps, EmbedError> {
    let mut r = Reader { bytes, at: 0 };
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let m = r.u32()? as usize;
    let e = r.u32()? as usize;
    let nq = m * h * w * e;
    let nz = m * h * w;
    let mut queries = Vec::with_capacity(nq);
    for _ in 0..nq {
        queries.push(r.f32()?);
    }
    let mut log_normalizers = Vec::with_capacity(nz);
    for _ in 0..nz {
        log_normalizers.push(r.f32()?);
    }
    Ok(QueryMaps::from_parts(h, w, m, e, queries, log_normalizers))
}

pub fn save_surface_model(model: &SurfaceModel, path: &Path) -> Result<(), EmbedError> {
    let mut buf = Vec::new();
    write_surface_model(model, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| EmbedError::Io(e.to_string()))
}

pub fn load_surface_model(
    path: &Path,
    cfg: Option<&OracleEmbedConfig>,
) -> Result<SurfaceModel, EmbedError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| EmbedError::Io(format!("{}: {e}", path.display())))?;
    read_surface_model(&bytes, cfg)
}

pub fn save_query_maps(maps: &QueryMaps, path: &Path) -> Result<(), EmbedError> {
    let mut buf = Vec::new();
    write_query_maps(maps, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| EmbedError::Io(e.to_string()))
}

pub fn load_query_maps(path: &Path) -> Result<QueryMaps, EmbedError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| EmbedError::Io(format!("{}: {e}", path.display())))?;
    read_query_maps(&bytes)
}
