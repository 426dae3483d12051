//! Rigid SE(3) transforms as unit quaternion + translation.

use crate::Vec3;
use nalgebra::{Quaternion, UnitQuaternion};

/// A rigid transform. Applying a pose maps object-frame points into the
/// camera frame: `p_cam = R * p_obj + t`. Translations are millimeters.
///
/// The quaternion is renormalized on every construction and composition, so
/// its norm stays within 1e-9 of one along arbitrarily long chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: UnitQuaternion<f64>,
    translation: Vec3,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        let mut rotation = rotation;
        rotation.renormalize();
        Self {
            rotation,
            translation,
        }
    }

    /// Build from quaternion components in (w, x, y, z) order. The quaternion
    /// is normalized; it must not be the zero quaternion.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64, translation: Vec3) -> Self {
        let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        Self::new(q, translation)
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation,
        }
    }

    /// Construct without renormalizing; the rotation must come from an
    /// already-normalized pose (point-mass kernels return centers verbatim).
    pub(crate) fn new_unchecked(rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    #[inline]
    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// Quaternion components in (w, x, y, z) order.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rigid composition `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose::new(inv, -(inv * self.translation))
    }

    /// Geodesic rotation angle to another pose, radians in [0, pi].
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        quat_geodesic(&self.rotation, &other.rotation)
    }

    pub fn translation_distance_to(&self, other: &Pose) -> f64 {
        (self.translation - other.translation).norm()
    }
}

/// Geodesic distance between two rotations: `2 * acos(|<q1, q2>|)`.
pub fn quat_geodesic(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let qa = a.quaternion();
    let qb = b.quaternion();
    let dot = (qa.w * qb.w + qa.i * qb.i + qa.j * qb.j + qa.k * qb.k).abs();
    2.0 * dot.min(1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn translation(x: f64, y: f64, z: f64) -> Pose {
        Pose::from_translation(Vec3::new(x, y, z))
    }

    #[test]
    fn identity_composes_to_same() {
        let p = Pose::from_wxyz(0.3, 0.5, -0.2, 0.7, Vec3::new(1.0, 2.0, 3.0));
        let q = Pose::identity().compose(&p);
        assert_abs_diff_eq!(
            (q.translation() - p.translation()).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert!(p.rotation_angle_to(&q) < 1e-12);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Pose::from_wxyz(0.9, 0.1, -0.3, 0.2, Vec3::new(10.0, -4.0, 2.5));
        let e = p.compose(&p.inverse());
        assert!(e.translation().norm() < 1e-9);
        assert!(e.rotation_angle_to(&Pose::identity()) < 1e-9);
    }

    #[test]
    fn translations_commute() {
        let a = translation(1.0, 0.0, 0.0);
        let b = translation(0.0, 2.0, 0.0);
        let c = a.compose(&b);
        assert_abs_diff_eq!(c.translation().x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.translation().y, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.translation().z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_matches_compose() {
        let p = Pose::from_wxyz(0.7, 0.7, 0.0, 0.0, Vec3::new(0.0, 0.0, 5.0));
        let x = Vec3::new(1.0, 2.0, 3.0);
        let via_pose = p.apply(&x);
        let shifted = p.compose(&Pose::from_translation(x));
        assert_abs_diff_eq!((via_pose - shifted.translation()).norm(), 0.0, epsilon = 1e-12);
    }

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -100.0..100.0f64,
            -100.0..100.0f64,
            -100.0..100.0f64,
        )
            .prop_filter_map("non-zero quaternion", |(w, x, y, z, tx, ty, tz)| {
                if w * w + x * x + y * y + z * z > 0.01 {
                    Some(Pose::from_wxyz(w, x, y, z, Vec3::new(tx, ty, tz)))
                } else {
                    None
                }
            })
    }

    /// Component-wise quaternion agreement up to the sign ambiguity. Angle
    /// comparisons via acos are ill-conditioned near zero, so the invariants
    /// are stated on components.
    fn quat_components_close(a: &Pose, b: &Pose, eps: f64) -> bool {
        let qa = a.wxyz();
        let qb = b.wxyz();
        let same = qa.iter().zip(&qb).all(|(x, y)| (x - y).abs() < eps);
        let flipped = qa.iter().zip(&qb).all(|(x, y)| (x + y).abs() < eps);
        same || flipped
    }

    proptest! {
        #[test]
        fn unit_norm_after_composition(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let p = a.compose(&b).compose(&c);
            let n = p.rotation().quaternion().norm();
            prop_assert!((n - 1.0).abs() < 1e-9);
        }

        #[test]
        fn composition_associative(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!((left.translation() - right.translation()).norm() < 1e-9);
            prop_assert!(quat_components_close(&left, &right, 1e-9));
        }

        #[test]
        fn inverse_is_group_inverse(a in arb_pose()) {
            let e = a.inverse().compose(&a);
            prop_assert!(e.translation().norm() < 1e-9);
            prop_assert!(quat_components_close(&e, &Pose::identity(), 1e-9));
        }
    }
}
