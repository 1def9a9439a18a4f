use crate::Point;

/// Axis-aligned box given by its minimum and maximum corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<const D: usize> {
    pub min: Point<D>,
    pub max: Point<D>,
}

impl<const D: usize> Aabb<D> {
    pub fn new(min: Point<D>, max: Point<D>) -> Self {
        Self { min, max }
    }

    /// An inverted box that any `grow` call will overwrite.
    pub fn empty() -> Self {
        Self {
            min: Point::from_element(f64::INFINITY),
            max: Point::from_element(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point<D>>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point<D>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn inflate(&self, margin: f64) -> Self {
        Self {
            min: self.min.add_scalar(-margin),
            max: self.max.add_scalar(margin),
        }
    }

    pub fn extent(&self) -> Point<D> {
        self.max - self.min
    }

    pub fn center(&self) -> Point<D> {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn contains_point(&self, p: &Point<D>) -> bool {
        (0..D).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn contains_box(&self, other: &Self) -> bool {
        (0..D).all(|k| other.min[k] >= self.min[k] && other.max[k] <= self.max[k])
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: &Point<D>) -> f64 {
        let mut d2 = 0.0;
        for k in 0..D {
            let excess = (self.min[k] - p[k]).max(p[k] - self.max[k]).max(0.0);
            d2 += excess * excess;
        }
        d2
    }

    /// Slab test; returns whether the ray `origin + t·dir`, `t ≥ 0`, touches the box.
    pub fn intersects_ray(&self, origin: &Point<D>, inv_dir: &Point<D>) -> bool {
        let mut t_min = 0.0_f64;
        let mut t_max = f64::INFINITY;
        for k in 0..D {
            let t1 = (self.min[k] - origin[k]) * inv_dir[k];
            let t2 = (self.max[k] - origin[k]) * inv_dir[k];
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            // NaN from 0 * inf (origin on a slab plane with axis-parallel ray) is ignored.
            if !lo.is_nan() {
                t_min = t_min.max(lo);
            }
            if !hi.is_nan() {
                t_max = t_max.min(hi);
            }
            if t_min > t_max {
                return false;
            }
        }
        true
    }
}
