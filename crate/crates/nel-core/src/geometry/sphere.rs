//! Fibonacci sphere point sets.

use super::GeometryError;
use crate::Vec3;
use std::f64::consts::TAU;

/// `n` points spread roughly uniformly over the unit sphere using the
/// Fibonacci spiral: latitudes split the z range into equal-area bands and
/// longitudes advance by the golden angle.
pub fn fibonacci_sphere(n: usize) -> Result<Vec<Vec3>, GeometryError> {
    if n == 0 {
        return Err(GeometryError::EmptyCount);
    }
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - (2 * i + 1) as f64 / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let theta = TAU * i as f64 / golden;
        points.push(Vec3::new(r * theta.cos(), r * theta.sin(), z));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_unit_norm() {
        for n in [1, 2, 7, 200] {
            for p in fibonacci_sphere(n).unwrap() {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn n200_min_pairwise_angle_exceeds_8_degrees() {
        let pts = fibonacci_sphere(200).unwrap();
        let mut min_angle = f64::INFINITY;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dot = pts[i].dot(&pts[j]).clamp(-1.0, 1.0);
                min_angle = min_angle.min(dot.acos());
            }
        }
        assert!(
            min_angle.to_degrees() > 8.0,
            "min pairwise angle {} deg",
            min_angle.to_degrees()
        );
    }

    #[test]
    fn two_points_distinct() {
        let pts = fibonacci_sphere(2).unwrap();
        assert!((pts[0] - pts[1]).norm() > 1e-6);
    }

    #[test]
    fn zero_count_errors() {
        assert!(fibonacci_sphere(0).is_err());
    }
}
