//! Uniform hash-grid nearest-neighbor lookup with a hard distance cap.

use crate::Vec3;
use std::collections::HashMap;

/// Buckets points into cubic cells of side `cell`; a query visits the 27
/// cells around the query point, which covers every point within `cell`.
pub struct NnGrid {
    cell: f64,
    points: Vec<Vec3>,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl NnGrid {
    pub fn build(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets
                .entry(Self::key(p, cell))
                .or_default()
                .push(i as u32);
        }
        Self {
            cell,
            points: points.to_vec(),
            buckets,
        }
    }

    fn key(p: &Vec3, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, idx: usize) -> &Vec3 {
        &self.points[idx]
    }

    /// Nearest point within `max_dist` (must be <= the build cell size).
    /// Traverses neighbor cells in a fixed order so ties resolve
    /// deterministically.
    pub fn nearest_within(&self, q: &Vec3, max_dist: f64) -> Option<(usize, f64)> {
        debug_assert!(max_dist <= self.cell + 1e-9);
        let (cx, cy, cz) = Self::key(q, self.cell);
        let max_sq = max_dist * max_dist;
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &idx in bucket {
                            let d = (self.points[idx as usize] - q).norm_squared();
                            if d <= max_sq {
                                match best {
                                    Some((_, bd)) if bd <= d => {}
                                    _ => best = Some((idx as usize, d)),
                                }
                            }
                        }
                    }
                }
            }
        }
        best.map(|(i, d)| (i, d.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_nearest_within_cap() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(0.0, 3.0, 0.0),
        ];
        let grid = NnGrid::build(&pts, 5.0);
        let (idx, d) = grid.nearest_within(&Vec3::new(0.0, 2.0, 0.0), 5.0).unwrap();
        assert_eq!(idx, 2);
        assert!((d - 1.0).abs() < 1e-12);
        assert!(grid
            .nearest_within(&Vec3::new(100.0, 0.0, 0.0), 5.0)
            .is_none());
    }

    #[test]
    fn matches_brute_force() {
        let mut pts = Vec::new();
        let mut s = 1u64;
        for _ in 0..500 {
            s = crate::seed::splitmix64(s);
            let x = (s % 1000) as f64 / 10.0;
            s = crate::seed::splitmix64(s);
            let y = (s % 1000) as f64 / 10.0;
            s = crate::seed::splitmix64(s);
            let z = (s % 1000) as f64 / 10.0;
            pts.push(Vec3::new(x, y, z));
        }
        let cap = 8.0;
        let grid = NnGrid::build(&pts, cap);
        for q in pts.iter().take(60) {
            let probe = q + Vec3::new(1.3, -0.7, 2.1);
            let brute = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - probe).norm()))
                .filter(|(_, d)| *d <= cap)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let fast = grid.nearest_within(&probe, cap);
            match (brute, fast) {
                (None, None) => {}
                (Some((_, bd)), Some((_, fd))) => assert!((bd - fd).abs() < 1e-12),
                other => panic!("mismatch: {other:?}"),
            }
        }
    }
}
