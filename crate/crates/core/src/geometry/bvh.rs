//! Static bounding-volume hierarchy over surface elements.
//!
//! Built once at load time by recursive median splits along the longest axis.
//! Used for nearest-element and ray-crossing queries.

use super::aabb::Aabb;
use crate::Point;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node<const D: usize> {
    bounds: Aabb<D>,
    /// Leaf: range into `order`. Interior: child node indices.
    kind: NodeKind,
}

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, end: u32 },
    Interior { left: u32, right: u32 },
}

#[derive(Debug, Clone)]
pub struct Bvh<const D: usize> {
    nodes: Vec<Node<D>>,
    order: Vec<u32>,
}

impl<const D: usize> Bvh<D> {
    pub fn build(element_bounds: &[Aabb<D>]) -> Self {
        let mut order: Vec<u32> = (0..element_bounds.len() as u32).collect();
        let centers: Vec<Point<D>> = element_bounds.iter().map(|b| b.center()).collect();
        let mut nodes = Vec::with_capacity(2 * element_bounds.len() / LEAF_SIZE + 1);
        if !element_bounds.is_empty() {
            build_node(&mut nodes, &mut order, 0, element_bounds, &centers);
        }
        Self { nodes, order }
    }

    pub fn bounds(&self) -> Aabb<D> {
        self.nodes.first().map_or_else(Aabb::empty, |n| n.bounds)
    }

    /// Finds the element minimising `dist2(element)`. The closure returns the squared
    /// distance and an associated payload (e.g. the closest point).
    pub fn nearest<T>(
        &self,
        p: &Point<D>,
        mut dist2: impl FnMut(usize) -> (f64, T),
    ) -> Option<(usize, f64, T)> {
        let mut best: Option<(usize, f64, T)> = None;
        let mut best_d2 = f64::INFINITY;
        if self.nodes.is_empty() {
            return None;
        }
        let mut stack: Vec<(u32, f64)> = vec![(0, self.nodes[0].bounds.distance_squared(p))];
        while let Some((idx, box_d2)) = stack.pop() {
            if box_d2 > best_d2 {
                continue;
            }
            match self.nodes[idx as usize].kind {
                NodeKind::Leaf { start, end } => {
                    for &e in &self.order[start as usize..end as usize] {
                        let (d2, payload) = dist2(e as usize);
                        if d2 < best_d2 {
                            best_d2 = d2;
                            best = Some((e as usize, d2, payload));
                        }
                    }
                }
                NodeKind::Interior { left, right } => {
                    let dl = self.nodes[left as usize].bounds.distance_squared(p);
                    let dr = self.nodes[right as usize].bounds.distance_squared(p);
                    // Push the farther child first so the nearer one is explored first.
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best
    }

    /// Calls `visit` for every element whose bounds the ray touches.
    pub fn ray_candidates(&self, origin: &Point<D>, dir: &Point<D>, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let inv_dir = dir.map(|c| 1.0 / c);
        let mut stack = vec![0u32];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            if !node.bounds.intersects_ray(origin, &inv_dir) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &e in &self.order[start as usize..end as usize] {
                        visit(e as usize);
                    }
                }
                NodeKind::Interior { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
    }
}

fn build_node<const D: usize>(
    nodes: &mut Vec<Node<D>>,
    order: &mut [u32],
    offset: usize,
    element_bounds: &[Aabb<D>],
    centers: &[Point<D>],
) -> u32 {
    let bounds = order
        .iter()
        .fold(Aabb::empty(), |acc, &e| acc.merge(&element_bounds[e as usize]));
    let idx = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf {
                start: offset as u32,
                end: (offset + order.len()) as u32,
            },
        });
        return idx;
    }
    let centroid_box = Aabb::from_points(order.iter().map(|&e| &centers[e as usize]));
    let extent = centroid_box.extent();
    let axis = (0..D)
        .max_by(|&a, &b| extent[a].total_cmp(&extent[b]))
        .unwrap_or(0);
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centers[a as usize][axis]
            .total_cmp(&centers[b as usize][axis])
            .then(a.cmp(&b))
    });
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf { start: 0, end: 0 },
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(nodes, lo, offset, element_bounds, centers);
    let right = build_node(nodes, hi, offset + mid, element_bounds, centers);
    nodes[idx as usize].kind = NodeKind::Interior { left, right };
    idx
}
