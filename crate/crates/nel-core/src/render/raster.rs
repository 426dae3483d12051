//! Z-buffered perspective rasterization.

use super::{CameraIntrinsics, ObjectLibrary, RenderError, SceneDescription};
use crate::grid::Grid2;
use crate::Vec3;

/// Instance-map sentinel for background pixels.
pub const NO_INSTANCE: u32 = u32::MAX;

/// Triangles with a vertex closer than this (mm) are skipped instead of
/// clipped; scenes keep geometry well in front of the camera.
const NEAR_PLANE: f64 = 1.0;

/// The render products. For background pixels the segmentation is 0 and the
/// point-cloud/object-coordinate entries hold the (0, 0, 0) sentinel; the
/// segmentation is the authoritative mask.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    /// Camera-frame surface point per pixel, mm.
    pub point_cloud: Grid2<Vec3>,
    /// Class id per pixel, 0 = background.
    pub segmentation: Grid2<u32>,
    /// Object-frame surface point per pixel, mm.
    pub object_coords: Grid2<Vec3>,
    /// Scene object index per pixel, `NO_INSTANCE` = background.
    pub instances: Grid2<u32>,
    /// Number of non-background pixels.
    pub fg_count: usize,
}

impl RenderOutput {
    pub fn height(&self) -> usize {
        self.segmentation.height()
    }

    pub fn width(&self) -> usize {
        self.segmentation.width()
    }

    /// Depth image view (z of the point cloud, 0 = background).
    pub fn depth(&self) -> Grid2<f64> {
        let mut d = Grid2::filled(self.height(), self.width(), 0.0);
        for i in 0..self.height() {
            for j in 0..self.width() {
                if *self.segmentation.get(i, j) > 0 {
                    d.set(i, j, self.point_cloud.get(i, j).z);
                }
            }
        }
        d
    }

    /// Count of pixels belonging to one scene object.
    pub fn instance_pixel_count(&self, object_index: usize) -> usize {
        self.instances
            .data()
            .iter()
            .filter(|&&v| v == object_index as u32)
            .count()
    }
}

#[derive(Clone, Copy)]
struct Edge {
    // Edge function e(p) = (b.x-a.x)(p.y-a.y) - (b.y-a.y)(p.x-a.x);
    // positive on the interior side after orientation normalization.
    ax: f64,
    ay: f64,
    dx: f64,
    dy: f64,
}

impl Edge {
    fn new(a: (f64, f64), b: (f64, f64)) -> Self {
        Self {
            ax: a.0,
            ay: a.1,
            dx: b.0 - a.0,
            dy: b.1 - a.1,
        }
    }

    #[inline]
    fn eval(&self, px: f64, py: f64) -> f64 {
        self.dx * (py - self.ay) - self.dy * (px - self.ax)
    }

    /// Top-left tie rule for pixels exactly on the edge: with image y growing
    /// downward and positively oriented triangles, a horizontal edge going
    /// right is a top edge and an edge going up is a left edge.
    #[inline]
    fn includes_boundary(&self) -> bool {
        (self.dy == 0.0 && self.dx > 0.0) || self.dy < 0.0
    }
}

/// Render a scene: z-buffered rasterization, nearest surface wins per pixel.
/// A pixel belongs to a triangle when its center lies inside the projected
/// triangle (top-left rule on shared edges), which makes coverage exactly
/// reproducible. Back faces are kept. The output is deterministic for
/// identical input.
pub fn render(
    scene: &SceneDescription,
    library: &ObjectLibrary,
    cam: &CameraIntrinsics,
) -> Result<RenderOutput, RenderError> {
    library.validate_scene(scene)?;
    let (h, w) = (cam.height, cam.width);
    let mut zbuf = Grid2::filled(h, w, f64::INFINITY);
    let mut segmentation = Grid2::filled(h, w, 0u32);
    let mut point_cloud = Grid2::filled(h, w, Vec3::zeros());
    let mut object_coords = Grid2::filled(h, w, Vec3::zeros());
    let mut instances = Grid2::filled(h, w, NO_INSTANCE);

    for (obj_idx, obj) in scene.objects.iter().enumerate() {
        let mesh = library.mesh(obj.class_id)?;
        let inverse = obj.pose.inverse();
        let cam_verts: Vec<Vec3> = mesh.vertices().iter().map(|v| obj.pose.apply(v)).collect();

        for tri in mesh.triangles() {
            let v0 = cam_verts[tri[0]];
            let v1 = cam_verts[tri[1]];
            let v2 = cam_verts[tri[2]];
            if v0.z < NEAR_PLANE || v1.z < NEAR_PLANE || v2.z < NEAR_PLANE {
                continue;
            }
            let p0 = cam.project(&v0);
            let mut p1 = cam.project(&v1);
            let mut p2 = cam.project(&v2);

            // Orient so the interior is on the positive side of all edges.
            let area = (p1.0 - p0.0) * (p2.1 - p0.1) - (p1.1 - p0.1) * (p2.0 - p0.0);
            let mut b = v1;
            let mut c = v2;
            if area == 0.0 {
                continue;
            }
            if area < 0.0 {
                std::mem::swap(&mut p1, &mut p2);
                std::mem::swap(&mut b, &mut c);
            }
            let edges = [
                Edge::new(p0, p1),
                Edge::new(p1, p2),
                Edge::new(p2, p0),
            ];

            // Plane normal in camera frame for ray-plane depth.
            let normal = (b - v0).cross(&(c - v0));

            let min_x = p0.0.min(p1.0).min(p2.0).ceil().max(0.0) as usize;
            let max_x = p0.0.max(p1.0).max(p2.0).floor().min((w - 1) as f64);
            let min_y = p0.1.min(p1.1).min(p2.1).ceil().max(0.0) as usize;
            let max_y = p0.1.max(p1.1).max(p2.1).floor().min((h - 1) as f64);
            if max_x < 0.0 || max_y < 0.0 {
                continue;
            }
            let (max_x, max_y) = (max_x as usize, max_y as usize);

            for i in min_y..=max_y {
                for j in min_x..=max_x {
                    let (px, py) = (j as f64, i as f64);
                    let mut inside = true;
                    for e in &edges {
                        let val = e.eval(px, py);
                        if val < 0.0 || (val == 0.0 && !e.includes_boundary()) {
                            inside = false;
                            break;
                        }
                    }
                    if !inside {
                        continue;
                    }
                    let dir = Vec3::new((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
                    let denom = normal.dot(&dir);
                    if denom.abs() < 1e-18 {
                        continue;
                    }
                    let z = normal.dot(&v0) / denom;
                    if z <= NEAR_PLANE {
                        continue;
                    }
                    if z < *zbuf.get(i, j) {
                        zbuf.set(i, j, z);
                        let cam_point = cam.backproject(i, j, z);
                        segmentation.set(i, j, obj.class_id as u32);
                        instances.set(i, j, obj_idx as u32);
                        object_coords.set(i, j, inverse.apply(&cam_point));
                        point_cloud.set(i, j, cam_point);
                    }
                }
            }
        }
    }

    let fg_count = segmentation.data().iter().filter(|&&s| s > 0).count();
    Ok(RenderOutput {
        point_cloud,
        segmentation,
        object_coords,
        instances,
        fg_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::render::shapes::{box_mesh, quad_mesh};
    use crate::render::SceneObject;

    fn cam() -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 32.0, 32.0, 64, 64).unwrap()
    }

    fn quad_library() -> ObjectLibrary {
        ObjectLibrary::new(vec![quad_mesh(100.0, 100.0), quad_mesh(100.0, 100.0)])
    }

    #[test]
    fn empty_scene_is_all_background() {
        let out = render(&SceneDescription::empty(), &quad_library(), &cam()).unwrap();
        assert_eq!(out.fg_count, 0);
        assert!(out.segmentation.data().iter().all(|&s| s == 0));
        assert!(out.point_cloud.data().iter().all(|p| *p == Vec3::zeros()));
    }

    #[test]
    fn axis_aligned_quad_covers_exact_region_at_exact_depth() {
        // 100 mm quad at z = 500 projects to a 20 px square. Shifting the
        // quad by half a pixel's worth of world distance puts the projected
        // edges between pixel centers, so coverage is unambiguous.
        let half_px_world = 0.5 * 500.0 / 100.0;
        let scene = SceneDescription::new(vec![SceneObject {
            class_id: 1,
            pose: Pose::from_translation(Vec3::new(half_px_world, half_px_world, 500.0)),
        }]);
        let out = render(&scene, &quad_library(), &cam()).unwrap();
        // Projected span: center 32.5 +/- 10 px => [22.5, 42.5] => pixels 23..=42.
        for i in 0..64 {
            for j in 0..64 {
                let inside = (23..=42).contains(&i) && (23..=42).contains(&j);
                if inside {
                    assert_eq!(*out.segmentation.get(i, j), 1, "pixel ({i},{j})");
                    assert!((out.point_cloud.get(i, j).z - 500.0).abs() < 1e-6);
                } else {
                    assert_eq!(*out.segmentation.get(i, j), 0, "pixel ({i},{j})");
                }
            }
        }
        assert_eq!(out.fg_count, 20 * 20);
    }

    #[test]
    fn nearer_surface_wins_overlap() {
        let scene = SceneDescription::new(vec![
            SceneObject {
                class_id: 2,
                pose: Pose::from_translation(Vec3::new(0.0, 0.0, 500.0)),
            },
            SceneObject {
                class_id: 1,
                pose: Pose::from_translation(Vec3::new(20.0, 0.0, 400.0)),
            },
        ]);
        let out = render(&scene, &quad_library(), &cam()).unwrap();
        // Pixel at the image center is covered by both quads; the z=400 one
        // (class 1) must win.
        assert_eq!(*out.segmentation.get(32, 36), 1);
        assert!((out.point_cloud.get(32, 36).z - 400.0).abs() < 1e-6);
        assert_eq!(*out.instances.get(32, 36), 1);
    }

    #[test]
    fn shared_edge_pixels_claimed_exactly_once() {
        // Two quads meeting edge-to-edge: boundary pixel centers must belong
        // to exactly one of them under the tie rule.
        let lib = quad_library();
        let left = SceneDescription::new(vec![SceneObject {
            class_id: 1,
            pose: Pose::from_translation(Vec3::new(-50.0, 0.0, 500.0)),
        }]);
        let right = SceneDescription::new(vec![SceneObject {
            class_id: 1,
            pose: Pose::from_translation(Vec3::new(50.0, 0.0, 500.0)),
        }]);
        let both = SceneDescription::new(vec![left.objects[0], right.objects[0]]);
        let cam = cam();
        let out_l = render(&left, &lib, &cam).unwrap();
        let out_r = render(&right, &lib, &cam).unwrap();
        let out_b = render(&both, &lib, &cam).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let l = *out_l.segmentation.get(i, j) > 0;
                let r = *out_r.segmentation.get(i, j) > 0;
                let b = *out_b.segmentation.get(i, j) > 0;
                assert_eq!(l || r, b, "pixel ({i},{j})");
                assert!(!(l && r), "pixel ({i},{j}) claimed twice");
            }
        }
    }

    #[test]
    fn reprojection_and_object_coords_consistency() {
        let pose = Pose::from_wxyz(0.95, 0.2, 0.1, -0.15, Vec3::new(10.0, -15.0, 600.0));
        let scene = SceneDescription::new(vec![SceneObject { class_id: 1, pose }]);
        let lib = ObjectLibrary::new(vec![box_mesh(80.0, 50.0, 60.0)]);
        let cam = cam();
        let out = render(&scene, &lib, &cam).unwrap();
        assert!(out.fg_count > 50);
        for i in 0..64 {
            for j in 0..64 {
                if *out.segmentation.get(i, j) == 0 {
                    continue;
                }
                let p = out.point_cloud.get(i, j);
                let (x, y) = cam.project(p);
                assert!((x - j as f64).abs() < 0.5 && (y - i as f64).abs() < 0.5);
                let back = pose.apply(out.object_coords.get(i, j));
                assert!((back - p).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let pose = Pose::from_wxyz(0.9, 0.3, -0.2, 0.1, Vec3::new(5.0, 5.0, 550.0));
        let scene = SceneDescription::new(vec![SceneObject { class_id: 1, pose }]);
        let lib = ObjectLibrary::new(vec![box_mesh(70.0, 40.0, 30.0)]);
        let a = render(&scene, &lib, &cam()).unwrap();
        let b = render(&scene, &lib, &cam()).unwrap();
        assert_eq!(a.point_cloud.data(), b.point_cloud.data());
        assert_eq!(a.segmentation.data(), b.segmentation.data());
        assert_eq!(a.fg_count, b.fg_count);
    }

    #[test]
    fn segmentation_mask_matches_sentinel_invariant() {
        let scene = SceneDescription::new(vec![SceneObject {
            class_id: 1,
            pose: Pose::from_translation(Vec3::new(0.0, 0.0, 500.0)),
        }]);
        let out = render(&scene, &quad_library(), &cam()).unwrap();
        let mut fg = 0;
        for i in 0..out.height() {
            for j in 0..out.width() {
                let seg = *out.segmentation.get(i, j);
                if seg == 0 {
                    assert_eq!(*out.point_cloud.get(i, j), Vec3::zeros());
                } else {
                    fg += 1;
                    assert!(out.point_cloud.get(i, j).z > 0.0);
                }
            }
        }
        assert_eq!(fg, out.fg_count);
    }
}
