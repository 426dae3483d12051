//! Voxel accumulator grids.

use super::HypothesesError;
use crate::Vec3;

/// Geometry of a voxel grid: `origin` is the camera-frame center of voxel
/// (0, 0, 0), voxels are cubes of side `voxel_diameter` (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGridSpec {
    pub origin: Vec3,
    pub dims: [usize; 3],
    pub voxel_diameter: f64,
}

impl VoxelGridSpec {
    pub fn new(origin: Vec3, dims: [usize; 3], voxel_diameter: f64) -> Result<Self, HypothesesError> {
        if !(voxel_diameter > 0.0) {
            return Err(HypothesesError::InvalidGrid(format!(
                "voxel diameter must be positive, got {voxel_diameter}"
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(HypothesesError::InvalidGrid(format!(
                "grid dims must be >= 1, got {dims:?}"
            )));
        }
        Ok(Self {
            origin,
            dims,
            voxel_diameter,
        })
    }

    /// Default grid covering the working volume: origin (-350, -210, 530),
    /// 129 x 87 x 168 voxels of 5 mm.
    pub fn default_workspace() -> Self {
        Self {
            origin: Vec3::new(-350.0, -210.0, 530.0),
            dims: [129, 87, 168],
            voxel_diameter: 5.0,
        }
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Snap a camera-frame point to its voxel index (round half away from
    /// zero, components may land outside the grid).
    #[inline]
    pub fn snap(&self, p: &Vec3) -> [i64; 3] {
        [
            ((p.x - self.origin.x) / self.voxel_diameter).round() as i64,
            ((p.y - self.origin.y) / self.voxel_diameter).round() as i64,
            ((p.z - self.origin.z) / self.voxel_diameter).round() as i64,
        ]
    }

    #[inline]
    pub fn in_bounds(&self, v: &[i64; 3]) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
    }

    /// Camera-frame center of a voxel.
    pub fn voxel_center(&self, v: &[i64; 3]) -> Vec3 {
        self.origin
            + Vec3::new(
                v[0] as f64 * self.voxel_diameter,
                v[1] as f64 * self.voxel_diameter,
                v[2] as f64 * self.voxel_diameter,
            )
    }

    /// Flat index with x outermost and z fastest (lexicographic (x, y, z)).
    #[inline]
    pub fn flat(&self, v: &[i64; 3]) -> usize {
        debug_assert!(self.in_bounds(v));
        (v[0] as usize * self.dims[1] + v[1] as usize) * self.dims[2] + v[2] as usize
    }

    pub fn unflatten(&self, idx: usize) -> [i64; 3] {
        let z = idx % self.dims[2];
        let rest = idx / self.dims[2];
        let y = rest % self.dims[1];
        let x = rest / self.dims[1];
        [x as i64, y as i64, z as i64]
    }
}

/// A voxel grid of non-negative f32 accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub spec: VoxelGridSpec,
    pub values: Vec<f32>,
}

impl VoxelGrid {
    pub fn zeros(spec: VoxelGridSpec) -> Self {
        let n = spec.voxel_count();
        Self {
            spec,
            values: vec![0.0; n],
        }
    }

    #[inline]
    pub fn value_at(&self, v: &[i64; 3]) -> f32 {
        self.values[self.spec.flat(v)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().cloned().fold(0.0, f32::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_rounds_to_nearest_center() {
        let spec = VoxelGridSpec::new(Vec3::new(-10.0, -10.0, 0.0), [5, 5, 5], 2.0).unwrap();
        assert_eq!(spec.snap(&Vec3::new(-10.0, -10.0, 0.0)), [0, 0, 0]);
        assert_eq!(spec.snap(&Vec3::new(-9.1, -10.0, 0.9)), [0, 0, 0]);
        assert_eq!(spec.snap(&Vec3::new(-8.9, -10.0, 1.1)), [1, 0, 1]);
    }

    #[test]
    fn flat_unflatten_round_trip() {
        let spec = VoxelGridSpec::new(Vec3::zeros(), [3, 4, 5], 1.0).unwrap();
        for idx in 0..spec.voxel_count() {
            let v = spec.unflatten(idx);
            assert!(spec.in_bounds(&v));
            assert_eq!(spec.flat(&v), idx);
        }
    }

    #[test]
    fn default_workspace_matches_documented_dims() {
        let spec = VoxelGridSpec::default_workspace();
        assert_eq!(spec.dims, [129, 87, 168]);
        assert_eq!(spec.voxel_diameter, 5.0);
        assert_eq!(spec.origin, Vec3::new(-350.0, -210.0, 530.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(VoxelGridSpec::new(Vec3::zeros(), [0, 1, 1], 1.0).is_err());
        assert!(VoxelGridSpec::new(Vec3::zeros(), [1, 1, 1], 0.0).is_err());
    }
}
