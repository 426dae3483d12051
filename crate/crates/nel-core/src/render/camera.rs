//! Pinhole camera model and depth unprojection.

use super::RenderError;
use crate::grid::Grid2;
use crate::Vec3;

/// Pinhole intrinsics. Pixel (row `i`, col `j`) corresponds to the image
/// point (x = j, y = i); the ray through it has direction
/// `((j - cx)/fx, (i - cy)/fy, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, RenderError> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(RenderError::InvalidCamera(format!(
                "focal lengths must be positive, got fx={fx} fy={fy}"
            )));
        }
        if !(cx >= 0.0 && cx < width as f64) || !(cy >= 0.0 && cy < height as f64) {
            return Err(RenderError::InvalidCamera(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Camera-frame point on the ray through pixel (i, j) at depth `z`.
    #[inline]
    pub fn backproject(&self, i: usize, j: usize, z: f64) -> Vec3 {
        Vec3::new(
            (j as f64 - self.cx) * z / self.fx,
            (i as f64 - self.cy) * z / self.fy,
            z,
        )
    }

    /// Project a camera-frame point to image coordinates (x = col, y = row).
    #[inline]
    pub fn project(&self, p: &Vec3) -> (f64, f64) {
        (
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        )
    }
}

/// Unproject a depth image (mm, 0 = invalid) into a point-cloud image.
/// Invalid pixels map to the (0, 0, 0) sentinel.
pub fn unproject(depth: &Grid2<f64>, cam: &CameraIntrinsics) -> Grid2<Vec3> {
    assert_eq!(depth.height(), cam.height);
    assert_eq!(depth.width(), cam.width);
    let mut cloud = Grid2::filled(depth.height(), depth.width(), Vec3::zeros());
    for i in 0..depth.height() {
        for j in 0..depth.width() {
            let z = *depth.get(i, j);
            if z > 0.0 {
                cloud.set(i, j, cam.backproject(i, j, z));
            }
        }
    }
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 0.0, 0.0, 64, 64).unwrap()
    }

    #[test]
    fn principal_point_unprojects_on_axis() {
        let cam = CameraIntrinsics::new(200.0, 220.0, 32.0, 24.0, 64, 48).unwrap();
        let mut depth = Grid2::filled(48, 64, 0.0);
        depth.set(24, 32, 500.0);
        let cloud = unproject(&depth, &cam);
        assert_eq!(*cloud.get(24, 32), Vec3::new(0.0, 0.0, 500.0));
    }

    #[test]
    fn zero_depth_stays_sentinel() {
        let depth = Grid2::filled(64, 64, 0.0);
        let cloud = unproject(&depth, &cam());
        assert!(cloud.data().iter().all(|p| *p == Vec3::zeros()));
    }

    #[test]
    fn pinhole_formula() {
        let mut depth = Grid2::filled(64, 64, 0.0);
        depth.set(0, 50, 200.0);
        let cloud = unproject(&depth, &cam());
        assert_eq!(*cloud.get(0, 50), Vec3::new(100.0, 0.0, 200.0));
    }

    #[test]
    fn invalid_intrinsics_rejected() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 8, 8).is_err());
        assert!(CameraIntrinsics::new(10.0, 10.0, 9.0, 0.0, 8, 8).is_err());
    }
}
