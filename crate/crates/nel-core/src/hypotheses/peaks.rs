//! Peak extraction with greedy non-max suppression.

use super::VoxelGrid;
use crate::Vec3;

/// Result of peak extraction. `degenerate` marks the all-zero-grid fallback,
/// where the single voxel (0, 0, 0) center is returned.
#[derive(Debug, Clone)]
pub struct TopPositions {
    pub positions: Vec<Vec3>,
    pub degenerate: bool,
}

/// Voxel centers of up to `n_top` highest-valued voxels, greedily selected;
/// a candidate within Chebyshev radius `nms_radius` (voxels) of an already
/// selected peak is suppressed. Ties order by value descending then
/// lexicographic voxel index ascending.
pub fn top_positions(grid: &VoxelGrid, n_top: usize, nms_radius: usize) -> TopPositions {
    assert!(n_top >= 1);
    let spec = &grid.spec;
    let mut candidates: Vec<(f32, usize)> = grid
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| (v, i))
        .collect();
    if candidates.is_empty() {
        return TopPositions {
            positions: vec![spec.voxel_center(&[0, 0, 0])],
            degenerate: true,
        };
    }
    candidates.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let radius = nms_radius as i64;
    let mut selected: Vec<[i64; 3]> = Vec::with_capacity(n_top);
    let mut positions = Vec::with_capacity(n_top);
    for (_, idx) in candidates {
        let v = spec.unflatten(idx);
        let suppressed = selected.iter().any(|s| {
            (v[0] - s[0]).abs() <= radius
                && (v[1] - s[1]).abs() <= radius
                && (v[2] - s[2]).abs() <= radius
        });
        if suppressed {
            continue;
        }
        positions.push(spec.voxel_center(&v));
        selected.push(v);
        if selected.len() == n_top {
            break;
        }
    }
    TopPositions {
        positions,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::VoxelGridSpec;

    fn spec() -> VoxelGridSpec {
        VoxelGridSpec::new(Vec3::new(0.0, 0.0, 0.0), [20, 20, 20], 1.0).unwrap()
    }

    #[test]
    fn single_peak_returned() {
        let mut grid = VoxelGrid::zeros(spec());
        let idx = grid.spec.flat(&[3, 4, 5]);
        grid.values[idx] = 2.0;
        let top = top_positions(&grid, 8, 2);
        assert!(!top.degenerate);
        assert_eq!(top.positions.len(), 1);
        assert_eq!(top.positions[0], grid.spec.voxel_center(&[3, 4, 5]));
    }

    #[test]
    fn nearby_smaller_peak_suppressed() {
        let mut grid = VoxelGrid::zeros(spec());
        let a = grid.spec.flat(&[10, 10, 10]);
        let b = grid.spec.flat(&[10, 10, 13]); // 3 voxels away
        grid.values[a] = 5.0;
        grid.values[b] = 4.0;
        let top = top_positions(&grid, 8, 10);
        assert_eq!(top.positions.len(), 1);
        assert_eq!(top.positions[0], grid.spec.voxel_center(&[10, 10, 10]));
    }

    #[test]
    fn distant_peaks_both_survive() {
        let mut grid = VoxelGrid::zeros(spec());
        let a = grid.spec.flat(&[2, 2, 2]);
        let b = grid.spec.flat(&[17, 17, 17]);
        grid.values[a] = 5.0;
        grid.values[b] = 4.0;
        let top = top_positions(&grid, 8, 10);
        assert_eq!(top.positions.len(), 2);
        assert_eq!(top.positions[0], grid.spec.voxel_center(&[2, 2, 2]));
        assert_eq!(top.positions[1], grid.spec.voxel_center(&[17, 17, 17]));
    }

    #[test]
    fn all_zero_grid_degenerate() {
        let grid = VoxelGrid::zeros(spec());
        let top = top_positions(&grid, 4, 2);
        assert!(top.degenerate);
        assert_eq!(top.positions.len(), 1);
        assert_eq!(top.positions[0], grid.spec.voxel_center(&[0, 0, 0]));
    }

    #[test]
    fn value_ties_resolve_lexicographically() {
        let mut grid = VoxelGrid::zeros(spec());
        let a = grid.spec.flat(&[5, 0, 0]);
        let b = grid.spec.flat(&[1, 0, 0]);
        grid.values[a] = 3.0;
        grid.values[b] = 3.0;
        let top = top_positions(&grid, 2, 1);
        assert_eq!(top.positions[0], grid.spec.voxel_center(&[1, 0, 0]));
        assert_eq!(top.positions[1], grid.spec.voxel_center(&[5, 0, 0]));
    }
}
