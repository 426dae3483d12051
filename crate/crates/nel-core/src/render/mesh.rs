//! Triangle meshes in the object frame.

use super::RenderError;
use crate::geometry::Pose;
use crate::Vec3;

/// An indexed triangle mesh (object frame, mm). `symmetries` lists proper
/// rigid transforms (excluding identity) under which the object shape is
/// indistinguishable; they feed the symmetry-aware surface distance metric.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    symmetries: Vec<Pose>,
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        symmetries: Vec<Pose>,
    ) -> Result<Self, RenderError> {
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(RenderError::InvalidMesh(format!(
                        "triangle {t} references vertex {v} of {}",
                        vertices.len()
                    )));
                }
            }
            let a = vertices[tri[0]];
            let b = vertices[tri[1]];
            let c = vertices[tri[2]];
            if (b - a).cross(&(c - a)).norm() < 1e-9 {
                return Err(RenderError::InvalidMesh(format!(
                    "triangle {t} is degenerate (zero area)"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            symmetries,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn symmetries(&self) -> &[Pose] {
        &self.symmetries
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Radius of the bounding sphere around the vertex centroid.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_index() {
        let verts = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert!(TriangleMesh::new(verts, vec![[0, 1, 3]], vec![]).is_err());
    }

    #[test]
    fn rejects_degenerate_triangle() {
        let verts = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        assert!(TriangleMesh::new(verts, vec![[0, 1, 2]], vec![]).is_err());
    }

    #[test]
    fn bounding_radius_covers_vertices() {
        let mesh = super::super::shapes::box_mesh(60.0, 40.0, 30.0);
        let c = mesh.centroid();
        let r = mesh.bounding_radius();
        for v in mesh.vertices() {
            assert!((v - c).norm() <= r + 1e-12);
        }
    }
}
