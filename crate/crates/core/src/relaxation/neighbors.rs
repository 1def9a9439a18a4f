//! Cell-list neighbour search.

use crate::geometry::Aabb;
use crate::levelset::index::{add, offsets};
use crate::Point;
use rayon::prelude::*;

/// For every position, the indices of all other positions closer than
/// `cutoff`, in ascending order. Lists are symmetric by construction.
pub fn neighbor_lists<const D: usize>(positions: &[Point<D>], cutoff: f64) -> Vec<Vec<usize>> {
    if positions.is_empty() {
        return Vec::new();
    }
    let bounds = Aabb::from_points(positions.iter());
    let dims: [i64; D] = std::array::from_fn(|k| ((bounds.max[k] - bounds.min[k]) / cutoff).floor() as i64 + 1);
    let cell_of = |p: &Point<D>| -> [i64; D] {
        std::array::from_fn(|k| (((p[k] - bounds.min[k]) / cutoff).floor() as i64).clamp(0, dims[k] - 1))
    };
    let linear = |c: [i64; D]| -> Option<usize> {
        let mut l = 0i64;
        for k in (0..D).rev() {
            if c[k] < 0 || c[k] >= dims[k] {
                return None;
            }
            l = l * dims[k] + c[k];
        }
        Some(l as usize)
    };
    let cell_count = dims.iter().product::<i64>() as usize;
    let cells: Vec<[i64; D]> = positions.iter().map(cell_of).collect();

    // counting sort of particle indices by cell
    let mut start = vec![0usize; cell_count + 1];
    for c in &cells {
        start[linear(*c).expect("clamped") + 1] += 1;
    }
    for i in 0..cell_count {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut sorted = vec![0usize; positions.len()];
    for (i, c) in cells.iter().enumerate() {
        let l = linear(*c).expect("clamped");
        sorted[fill[l]] = i;
        fill[l] += 1;
    }

    let stencil: Vec<[i64; D]> = offsets::<D>(-1, 1).collect();
    let cutoff2 = cutoff * cutoff;
    (0..positions.len())
        .into_par_iter()
        .map(|a| {
            let mut list = Vec::new();
            for off in &stencil {
                let Some(l) = linear(add(cells[a], *off)) else {
                    continue;
                };
                for &b in &sorted[start[l]..start[l + 1]] {
                    if b != a && (positions[a] - positions[b]).norm_squared() < cutoff2 {
                        list.push(b);
                    }
                }
            }
            list.sort_unstable();
            list
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point<2>> = (0..400).map(|_| Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..0.5))).collect();
        let lists = neighbor_lists(&pts, 0.13);
        for a in 0..pts.len() {
            let brute: Vec<usize> = (0..pts.len())
                .filter(|&b| b != a && (pts[a] - pts[b]).norm() < 0.13)
                .collect();
            assert_eq!(lists[a], brute);
        }
    }
}
