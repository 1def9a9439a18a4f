//! Marching tetrahedra over a regular grid. Produces a closed, consistently
//! oriented triangle mesh of `{f < 0}` for any implicit function whose negative
//! region stays inside the sampled box.

use std::collections::HashMap;

use crate::geometry::{Aabb, TriMesh};
use crate::{Point, Result};

/// Kuhn subdivision of the unit cube into six tetrahedra sharing the 0–7
/// diagonal. Corner bit k set means +1 along axis k.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

pub fn polygonize(f: impl Fn(&Point<3>) -> f64, bounds: Aabb<3>, step: f64) -> Result<TriMesh> {
    let n: [usize; 3] = std::array::from_fn(|k| ((bounds.extent()[k] / step).ceil() as usize).max(1) + 1);
    let node = |i: usize, j: usize, k: usize| i + n[0] * (j + n[1] * k);
    let position = |id: usize| {
        let i = id % n[0];
        let j = (id / n[0]) % n[1];
        let k = id / (n[0] * n[1]);
        bounds.min + Point::<3>::new(i as f64, j as f64, k as f64) * step
    };
    let values: Vec<f64> = (0..n[0] * n[1] * n[2]).map(|id| f(&position(id))).collect();

    let mut vertices: Vec<Point<3>> = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), u32> = HashMap::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    let mut vertex_on = |a: usize, b: usize, vertices: &mut Vec<Point<3>>| -> u32 {
        let key = (a.min(b), a.max(b));
        *edge_vertex.entry(key).or_insert_with(|| {
            let (fa, fb) = (values[key.0], values[key.1]);
            let t = fa / (fa - fb);
            let p = position(key.0) + (position(key.1) - position(key.0)) * t;
            vertices.push(p);
            (vertices.len() - 1) as u32
        })
    };

    for k in 0..n[2] - 1 {
        for j in 0..n[1] - 1 {
            for i in 0..n[0] - 1 {
                let corner = |c: usize| node(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1));
                for tet in TETS {
                    let ids = tet.map(corner);
                    let inside: Vec<usize> = ids.iter().copied().filter(|&v| values[v] < 0.0).collect();
                    let outside: Vec<usize> = ids.iter().copied().filter(|&v| values[v] >= 0.0).collect();
                    let mut emit = |tri: [u32; 3], vertices: &mut Vec<Point<3>>| {
                        let [a, b, c] = tri.map(|v| vertices[v as usize]);
                        let normal = (b - a).cross(&(c - a));
                        let centroid = |set: &[usize]| {
                            set.iter().map(|&v| position(v)).sum::<Point<3>>() / set.len() as f64
                        };
                        let outward = centroid(&outside) - centroid(&inside);
                        if normal.dot(&outward) < 0.0 {
                            triangles.push([tri[0], tri[2], tri[1]]);
                        } else {
                            triangles.push(tri);
                        }
                    };
                    match (inside.len(), outside.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if inside.len() == 1 { (&inside, &outside) } else { (&outside, &inside) };
                            let tri = [
                                vertex_on(lone[0], rest[0], &mut vertices),
                                vertex_on(lone[0], rest[1], &mut vertices),
                                vertex_on(lone[0], rest[2], &mut vertices),
                            ];
                            emit(tri, &mut vertices);
                        }
                        (2, 2) => {
                            let a = vertex_on(inside[0], outside[0], &mut vertices);
                            let b = vertex_on(inside[0], outside[1], &mut vertices);
                            let c = vertex_on(inside[1], outside[1], &mut vertices);
                            let d = vertex_on(inside[1], outside[0], &mut vertices);
                            emit([a, b, c], &mut vertices);
                            emit([a, c, d], &mut vertices);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Sign, Surface};

    #[test]
    fn sphere_is_closed_and_accurate() {
        let bounds = Aabb::new(Point::<3>::from_element(-1.3), Point::<3>::from_element(1.3));
        let mesh = polygonize(|p| p.norm() - 1.0, bounds, 0.1).unwrap();
        assert_eq!(mesh.contains(&Point::<3>::zeros()), Sign::Inside);
        for v in mesh.vertices() {
            assert!((v.norm() - 1.0).abs() < 0.01);
        }
        // Every edge is shared by exactly two triangles.
        let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
        for t in mesh.triangles() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        assert!(edges.values().all(|&c| c == 2));
    }
}
