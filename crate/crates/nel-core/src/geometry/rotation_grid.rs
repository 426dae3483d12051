//! Discretization of SO(3) into representative orientations.

use super::{fibonacci_sphere, GeometryError};
use crate::Vec3;
use nalgebra::{Unit, UnitQuaternion};
use std::f64::consts::{PI, TAU};

/// A fixed set of orientations: one minimal rotation taking +z to each of
/// `n_axes` Fibonacci directions, times `n_inplane` uniform in-plane steps.
///
/// Index layout: `orientation(axis * n_inplane + step)`.
#[derive(Debug, Clone)]
pub struct RotationGrid {
    orientations: Vec<UnitQuaternion<f64>>,
    n_axes: usize,
    n_inplane: usize,
}

impl RotationGrid {
    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn n_axes(&self) -> usize {
        self.n_axes
    }

    pub fn n_inplane(&self) -> usize {
        self.n_inplane
    }

    #[inline]
    pub fn orientation(&self, idx: usize) -> &UnitQuaternion<f64> {
        &self.orientations[idx]
    }

    pub fn orientations(&self) -> &[UnitQuaternion<f64>] {
        &self.orientations
    }

    /// Axis index and in-plane step of a flat orientation index.
    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_inplane, idx % self.n_inplane)
    }
}

/// Minimal-angle rotation taking +z to `v`. When `v` is antipodal to +z the
/// construction is singular; a fixed rotation of pi about +x is used so the
/// grid stays deterministic.
fn align_z_to(v: &Vec3) -> UnitQuaternion<f64> {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let axis = z.cross(v);
    let norm = axis.norm();
    if norm < 1e-12 {
        if v.z > 0.0 {
            UnitQuaternion::identity()
        } else {
            UnitQuaternion::from_axis_angle(&Unit::new_normalize(Vec3::new(1.0, 0.0, 0.0)), PI)
        }
    } else {
        let angle = norm.atan2(v.z);
        UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), angle)
    }
}

/// Build the orientation grid: for every Fibonacci direction, the aligning
/// rotation composed with each of `n_inplane` uniform rotations about +z
/// (equivalently, about the direction itself after alignment).
pub fn build_rotation_grid(n_axes: usize, n_inplane: usize) -> Result<RotationGrid, GeometryError> {
    if n_inplane == 0 {
        return Err(GeometryError::EmptyCount);
    }
    let axes = fibonacci_sphere(n_axes)?;
    let z = Vec3::new(0.0, 0.0, 1.0);
    let mut orientations = Vec::with_capacity(n_axes * n_inplane);
    for v in &axes {
        let align = align_z_to(v);
        for k in 0..n_inplane {
            let inplane =
                UnitQuaternion::from_axis_angle(&Unit::new_unchecked(z), TAU * k as f64 / n_inplane as f64);
            let mut q = align * inplane;
            q.renormalize();
            orientations.push(q);
        }
    }
    Ok(RotationGrid {
        orientations,
        n_axes,
        n_inplane,
    })
}
