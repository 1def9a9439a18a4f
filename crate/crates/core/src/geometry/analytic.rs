//! Exact implicit shapes. They serve as reference oracles for the level-set
//! field and can be used directly as inputs when a tessellation is not needed.

use super::{Aabb, Sign, Surface};
use crate::Point;

/// Disk (2D) or ball (3D).
#[derive(Debug, Clone, Copy)]
pub struct Ball<const D: usize> {
    pub center: Point<D>,
    pub radius: f64,
}

impl<const D: usize> Ball<D> {
    pub fn new(center: Point<D>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn exact_distance(&self, p: &Point<D>) -> f64 {
        (p - self.center).norm() - self.radius
    }
}

impl<const D: usize> Surface<D> for Ball<D> {
    fn bbox(&self) -> Aabb<D> {
        Aabb::new(
            self.center.add_scalar(-self.radius),
            self.center.add_scalar(self.radius),
        )
    }

    fn closest_point(&self, p: &Point<D>) -> (f64, Point<D>) {
        let r = p - self.center;
        let n = r.norm();
        let dir = if n > 0.0 {
            r / n
        } else {
            let mut e = Point::zeros();
            e[0] = 1.0;
            e
        };
        ((n - self.radius).abs(), self.center + dir * self.radius)
    }

    fn contains(&self, p: &Point<D>) -> Sign {
        Sign::of(self.exact_distance(p))
    }
}

/// Axis-aligned solid box.
#[derive(Debug, Clone, Copy)]
pub struct AxisBox<const D: usize> {
    pub min: Point<D>,
    pub max: Point<D>,
}

impl<const D: usize> AxisBox<D> {
    pub fn new(min: Point<D>, max: Point<D>) -> Self {
        Self { min, max }
    }

    pub fn exact_distance(&self, p: &Point<D>) -> f64 {
        let mut outside2 = 0.0;
        let mut inside = f64::NEG_INFINITY;
        for k in 0..D {
            let q = (self.min[k] - p[k]).max(p[k] - self.max[k]);
            inside = inside.max(q);
            outside2 += q.max(0.0).powi(2);
        }
        if inside > 0.0 {
            outside2.sqrt()
        } else {
            inside
        }
    }
}

impl<const D: usize> Surface<D> for AxisBox<D> {
    fn bbox(&self) -> Aabb<D> {
        Aabb::new(self.min, self.max)
    }

    fn closest_point(&self, p: &Point<D>) -> (f64, Point<D>) {
        let d = self.exact_distance(p);
        let mut q = *p;
        if d > 0.0 {
            for k in 0..D {
                q[k] = q[k].clamp(self.min[k], self.max[k]);
            }
        } else {
            // Project onto the nearest face.
            let (axis, to_max) = (0..D)
                .flat_map(|k| [(k, false), (k, true)])
                .min_by(|a, b| {
                    let da = if a.1 { self.max[a.0] - p[a.0] } else { p[a.0] - self.min[a.0] };
                    let db = if b.1 { self.max[b.0] - p[b.0] } else { p[b.0] - self.min[b.0] };
                    da.total_cmp(&db)
                })
                .expect("D > 0");
            q[axis] = if to_max { self.max[axis] } else { self.min[axis] };
        }
        (d.abs(), q)
    }

    fn contains(&self, p: &Point<D>) -> Sign {
        Sign::of(self.exact_distance(p))
    }
}
