use super::aabb::Aabb;
use super::bvh::Bvh;
use super::{check_finite, majority_inside, Sign, Surface, RAY_DIRECTIONS_2D};
use crate::{Error, Point, Result};

type P2 = Point<2>;

/// One or more closed polylines bounding a planar region.
#[derive(Debug, Clone)]
pub struct Polygon {
    loops: Vec<Vec<P2>>,
    segments: Vec<[P2; 2]>,
    bbox: Aabb<2>,
    bvh: Bvh<2>,
}

impl Polygon {
    /// Builds a polygon from vertex loops. A loop whose last vertex repeats the first
    /// (within 1e-12 of the bbox diagonal) is taken as explicitly closed; otherwise a
    /// closing segment is appended.
    pub fn from_loops(loops: Vec<Vec<P2>>) -> Result<Self> {
        if loops.iter().all(|l| l.is_empty()) {
            return Err(Error::EmptyInput);
        }
        for l in &loops {
            for v in l {
                if !v.iter().all(|c| c.is_finite()) {
                    return Err(Error::Domain(format!("non-finite vertex {:?}", v.as_slice())));
                }
            }
        }
        let bbox = Aabb::from_points(loops.iter().flatten());
        let tol = 1e-12 * bbox.diagonal();

        let mut closed = Vec::with_capacity(loops.len());
        for (i, mut l) in loops.into_iter().enumerate() {
            if l.is_empty() {
                continue;
            }
            if l.len() > 1 && (l[0] - l[l.len() - 1]).norm() <= tol {
                l.pop();
            }
            if l.len() < 3 {
                return Err(Error::Topology(format!(
                    "loop {i} has {} distinct vertices and cannot be closed",
                    l.len()
                )));
            }
            closed.push(l);
        }

        let segments: Vec<[P2; 2]> = closed
            .iter()
            .flat_map(|l| (0..l.len()).map(move |k| [l[k], l[(k + 1) % l.len()]]))
            .collect();
        if segments.len() < 3 {
            return Err(Error::Topology(format!(
                "a closed planar surface needs at least 3 segments, got {}",
                segments.len()
            )));
        }
        let bounds: Vec<Aabb<2>> = segments
            .iter()
            .map(|s| Aabb::from_points(s.iter()))
            .collect();
        let bvh = Bvh::build(&bounds);
        Ok(Self {
            loops: closed,
            segments,
            bbox,
            bvh,
        })
    }

    pub fn loops(&self) -> &[Vec<P2>] {
        &self.loops
    }

    pub fn segments(&self) -> &[[P2; 2]] {
        &self.segments
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    fn parity(&self, p: &P2, dir: &P2) -> bool {
        let mut odd = false;
        self.bvh.ray_candidates(p, dir, |e| {
            let [a, b] = self.segments[e];
            if ray_crosses_segment(p, dir, &a, &b) {
                odd = !odd;
            }
        });
        odd
    }
}

fn cross(a: &P2, b: &P2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn ray_crosses_segment(o: &P2, d: &P2, a: &P2, b: &P2) -> bool {
    let e = b - a;
    let denom = cross(d, &e);
    if denom == 0.0 {
        return false;
    }
    let w = a - o;
    let t = cross(&w, &e) / denom;
    let u = cross(&w, d) / denom;
    t > 0.0 && (0.0..1.0).contains(&u)
}

pub(crate) fn closest_on_segment(p: &P2, a: &P2, b: &P2) -> P2 {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&e) / len2).clamp(0.0, 1.0);
    a + e * t
}

impl Surface<2> for Polygon {
    fn bbox(&self) -> Aabb<2> {
        self.bbox
    }

    fn closest_point(&self, p: &P2) -> (f64, P2) {
        let (_, d2, q) = self
            .bvh
            .nearest(p, |e| {
                let [a, b] = self.segments[e];
                let q = closest_on_segment(p, &a, &b);
                ((p - q).norm_squared(), q)
            })
            .expect("polygon has at least three segments");
        (d2.sqrt(), q)
    }

    fn contains(&self, p: &P2) -> Sign {
        if check_finite(p).is_err() || !self.bbox.contains_point(p) {
            return Sign::Outside;
        }
        let odd = RAY_DIRECTIONS_2D.map(|d| self.parity(p, &P2::new(d[0], d[1])));
        majority_inside(odd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::from_loops(vec![vec![
            P2::new(0.0, 0.0),
            P2::new(1.0, 0.0),
            P2::new(1.0, 1.0),
            P2::new(0.0, 1.0),
        ]])
        .unwrap()
    }

    #[test]
    fn square_distances() {
        let sq = unit_square();
        assert_eq!(sq.segment_count(), 4);
        assert!((sq.signed_distance(&P2::new(0.5, 1.5)).unwrap() - 0.5).abs() < 1e-12);
        assert!((sq.signed_distance(&P2::new(0.5, 0.25)).unwrap() + 0.25).abs() < 1e-12);
        // through a vertex along an axis direction
        assert_eq!(sq.contains(&P2::new(0.5, 0.5)), Sign::Inside);
        assert_eq!(sq.contains(&P2::new(-0.5, 0.5)), Sign::Outside);
    }

    #[test]
    fn explicit_closure_is_not_duplicated() {
        let p = Polygon::from_loops(vec![vec![
            P2::new(0.0, 0.0),
            P2::new(1.0, 0.0),
            P2::new(0.0, 1.0),
            P2::new(0.0, 0.0),
        ]])
        .unwrap();
        assert_eq!(p.segment_count(), 3);
    }

    #[test]
    fn degenerate_loop_is_topology_error() {
        let err = Polygon::from_loops(vec![vec![P2::new(0.0, 0.0), P2::new(1.0, 0.0)]]);
        assert!(matches!(err, Err(Error::Topology(_))));
        assert!(matches!(Polygon::from_loops(vec![]), Err(Error::EmptyInput)));
    }

    #[test]
    fn non_finite_query_is_domain_error() {
        let sq = unit_square();
        assert!(matches!(
            sq.signed_distance(&P2::new(f64::NAN, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hole_in_multi_loop_polygon() {
        let outer = vec![
            P2::new(-2.0, -2.0),
            P2::new(2.0, -2.0),
            P2::new(2.0, 2.0),
            P2::new(-2.0, 2.0),
        ];
        let inner = vec![
            P2::new(-1.0, -1.0),
            P2::new(-1.0, 1.0),
            P2::new(1.0, 1.0),
            P2::new(1.0, -1.0),
        ];
        let ring = Polygon::from_loops(vec![outer, inner]).unwrap();
        assert_eq!(ring.contains(&P2::new(0.0, 0.0)), Sign::Outside);
        assert_eq!(ring.contains(&P2::new(1.5, 0.0)), Sign::Inside);
    }
}
