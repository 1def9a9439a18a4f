//! Closed input surfaces and the exact signed-distance / containment queries
//! used to initialise the level-set field.
//!
//! Sign convention: negative inside, positive outside.

mod aabb;
pub mod analytic;
mod bvh;
pub mod io;
mod polygon;
mod trimesh;

pub use aabb::Aabb;
pub use bvh::Bvh;
pub use polygon::Polygon;
pub use trimesh::TriMesh;

use crate::{Error, Point, Result};

/// Side of a closed surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Inside,
    Outside,
}

impl Sign {
    /// −1 inside, +1 outside.
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Inside => -1.0,
            Sign::Outside => 1.0,
        }
    }

    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Sign::Inside
        } else {
            Sign::Outside
        }
    }
}

/// A closed surface in `D` dimensions that can answer distance queries.
///
/// Implementations are immutable after construction and safe to query from
/// many threads at once.
pub trait Surface<const D: usize>: Sync + Send {
    fn bbox(&self) -> Aabb<D>;

    /// Unsigned distance to the nearest surface point, and that point.
    fn closest_point(&self, p: &Point<D>) -> (f64, Point<D>);

    fn contains(&self, p: &Point<D>) -> Sign;

    fn signed_distance(&self, p: &Point<D>) -> Result<f64> {
        check_finite(p)?;
        let (d, _) = self.closest_point(p);
        Ok(d * self.contains(p).as_f64())
    }
}

pub(crate) fn check_finite<const D: usize>(p: &Point<D>) -> Result<()> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "query point {:?} has non-finite coordinates",
            p.as_slice()
        )))
    }
}

/// Geometry as loaded from disk or generated procedurally.
#[derive(Debug, Clone)]
pub enum SurfaceGeometry {
    Planar(Polygon),
    Solid(TriMesh),
}

impl SurfaceGeometry {
    pub fn dimension(&self) -> usize {
        match self {
            SurfaceGeometry::Planar(_) => 2,
            SurfaceGeometry::Solid(_) => 3,
        }
    }

    pub fn element_count(&self) -> usize {
        match self {
            SurfaceGeometry::Planar(p) => p.segment_count(),
            SurfaceGeometry::Solid(m) => m.triangle_count(),
        }
    }

    /// Bounding box as `(min, max)` coordinate vectors of length `dimension()`.
    pub fn bbox_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SurfaceGeometry::Planar(p) => {
                let b = p.bbox();
                (b.min.as_slice().to_vec(), b.max.as_slice().to_vec())
            }
            SurfaceGeometry::Solid(m) => {
                let b = m.bbox();
                (b.min.as_slice().to_vec(), b.max.as_slice().to_vec())
            }
        }
    }
}

/// Ray directions for parity voting. Irregular components keep the rays away
/// from axis-aligned edges and vertices of typical CAD input.
pub(crate) const RAY_DIRECTIONS_2D: [[f64; 2]; 3] = [
    [0.862_348_915_104_9, 0.506_303_521_719_3],
    [-0.414_977_315_061_2, 0.909_831_744_296_5],
    [-0.239_140_572_180_1, -0.970_984_793_411_6],
];

pub(crate) const RAY_DIRECTIONS_3D: [[f64; 3]; 3] = [
    [0.801_784_756_302_2, 0.337_099_817_437_3, 0.493_464_119_583_1],
    [-0.371_224_787_156_2, 0.846_245_172_918_4, 0.382_312_981_507_6],
    [0.183_745_201_926_3, -0.447_312_504_172_8, -0.875_293_716_440_9],
];

/// Majority vote over three parity results.
pub(crate) fn majority_inside(odd: [bool; 3]) -> Sign {
    if odd.iter().filter(|&&o| o).count() >= 2 {
        Sign::Inside
    } else {
        Sign::Outside
    }
}

/// Low-discrepancy probe points inside `bbox` (Halton bases 2, 3, 5).
pub(crate) fn halton_points<const D: usize>(bbox: &Aabb<D>, count: usize) -> Vec<Point<D>> {
    const BASES: [u32; 3] = [2, 3, 5];
    (1..=count)
        .map(|i| {
            let mut p = bbox.min;
            for k in 0..D {
                p[k] += radical_inverse(i as u64, BASES[k]) * (bbox.max[k] - bbox.min[k]);
            }
            p
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    r
}
