//! Procedural test meshes.

use super::TriangleMesh;
use crate::geometry::Pose;
use crate::Vec3;
use nalgebra::{Unit, UnitQuaternion};
use std::f64::consts::TAU;

/// Axis-aligned box centered at the origin with side lengths (sx, sy, sz).
pub fn box_mesh(sx: f64, sy: f64, sz: f64) -> TriangleMesh {
    let (hx, hy, hz) = (sx / 2.0, sy / 2.0, sz / 2.0);
    let v = vec![
        Vec3::new(-hx, -hy, -hz),
        Vec3::new(hx, -hy, -hz),
        Vec3::new(hx, hy, -hz),
        Vec3::new(-hx, hy, -hz),
        Vec3::new(-hx, -hy, hz),
        Vec3::new(hx, -hy, hz),
        Vec3::new(hx, hy, hz),
        Vec3::new(-hx, hy, hz),
    ];
    let t = vec![
        [0, 1, 2],
        [0, 2, 3],
        [4, 6, 5],
        [4, 7, 6],
        [0, 4, 5],
        [0, 5, 1],
        [3, 2, 6],
        [3, 6, 7],
        [0, 3, 7],
        [0, 7, 4],
        [1, 5, 6],
        [1, 6, 2],
    ];
    TriangleMesh::new(v, t, vec![]).expect("box mesh")
}

/// Closed cylinder with axis +z, centered at the origin.
///
/// `symmetry_steps` > 1 declares that many discrete rotations about +z as
/// shape symmetries (identity excluded); `segments` should be a multiple of
/// `symmetry_steps` so the declared transforms map the vertex set onto
/// itself.
pub fn cylinder_mesh(radius: f64, height: f64, segments: usize, symmetry_steps: usize) -> TriangleMesh {
    assert!(segments >= 3);
    let hz = height / 2.0;
    let mut verts = Vec::with_capacity(2 * segments + 2);
    for i in 0..segments {
        let a = TAU * i as f64 / segments as f64;
        verts.push(Vec3::new(radius * a.cos(), radius * a.sin(), -hz));
    }
    for i in 0..segments {
        let a = TAU * i as f64 / segments as f64;
        verts.push(Vec3::new(radius * a.cos(), radius * a.sin(), hz));
    }
    let bottom_center = verts.len();
    verts.push(Vec3::new(0.0, 0.0, -hz));
    let top_center = verts.len();
    verts.push(Vec3::new(0.0, 0.0, hz));

    let mut tris = Vec::new();
    for i in 0..segments {
        let j = (i + 1) % segments;
        // side quad
        tris.push([i, j, segments + j]);
        tris.push([i, segments + j, segments + i]);
        // caps
        tris.push([bottom_center, j, i]);
        tris.push([top_center, segments + i, segments + j]);
    }

    let mut symmetries = Vec::new();
    if symmetry_steps > 1 {
        let axis = Unit::new_normalize(Vec3::new(0.0, 0.0, 1.0));
        for k in 1..symmetry_steps {
            let q = UnitQuaternion::from_axis_angle(&axis, TAU * k as f64 / symmetry_steps as f64);
            symmetries.push(Pose::new(q, Vec3::zeros()));
        }
    }
    TriangleMesh::new(verts, tris, symmetries).expect("cylinder mesh")
}

/// A flat rectangle in the z = 0 plane, centered at the origin, normal +z.
pub fn quad_mesh(sx: f64, sy: f64) -> TriangleMesh {
    let (hx, hy) = (sx / 2.0, sy / 2.0);
    let v = vec![
        Vec3::new(-hx, -hy, 0.0),
        Vec3::new(hx, -hy, 0.0),
        Vec3::new(hx, hy, 0.0),
        Vec3::new(-hx, hy, 0.0),
    ];
    TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![]).expect("quad mesh")
}

/// A long thin triangular bar along +x; used to exercise farthest point
/// sampling on an elongated surface.
pub fn bar_mesh(length: f64, thickness: f64) -> TriangleMesh {
    let h = thickness / 2.0;
    let v = vec![
        Vec3::new(-length / 2.0, -h, 0.0),
        Vec3::new(length / 2.0, -h, 0.0),
        Vec3::new(length / 2.0, h, 0.0),
        Vec3::new(-length / 2.0, h, 0.0),
    ];
    TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![]).expect("bar mesh")
}
