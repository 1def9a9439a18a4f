use std::collections::HashMap;

use super::aabb::Aabb;
use super::bvh::Bvh;
use super::{check_finite, halton_points, majority_inside, Sign, Surface, RAY_DIRECTIONS_3D};
use crate::{Error, Point, Result};

type P3 = Point<3>;

/// Number of probe points used for the watertightness check at load.
const WATERTIGHT_PROBES: usize = 1000;
/// Largest tolerated fraction of probes whose ray parities disagree.
const WATERTIGHT_TOLERANCE: f64 = 1e-3;

/// Closed triangle mesh with welded vertices.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<P3>,
    triangles: Vec<[u32; 3]>,
    bbox: Aabb<3>,
    bvh: Bvh<3>,
}

impl TriMesh {
    /// Builds a mesh from a triangle soup, welding bit-identical vertices.
    pub fn from_soup(soup: &[[P3; 3]]) -> Result<Self> {
        let mut index: HashMap<[u64; 3], u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(soup.len());
        for tri in soup {
            let mut ids = [0u32; 3];
            for (k, v) in tri.iter().enumerate() {
                let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
                ids[k] = *index.entry(key).or_insert_with(|| {
                    vertices.push(*v);
                    (vertices.len() - 1) as u32
                });
            }
            triangles.push(ids);
        }
        Self::new(vertices, triangles)
    }

    /// Builds and validates an indexed mesh. Rejects meshes whose inside/outside
    /// classification is inconsistent across ray directions.
    pub fn new(vertices: Vec<P3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyInput);
        }
        if triangles.len() < 4 {
            return Err(Error::Topology(format!(
                "a closed mesh needs at least 4 triangles, got {}",
                triangles.len()
            )));
        }
        for v in &vertices {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::Domain(format!("non-finite vertex {:?}", v.as_slice())));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i as usize >= vertices.len()) {
                return Err(Error::Topology(format!("triangle {t} references a missing vertex")));
            }
        }
        let bbox = Aabb::from_points(vertices.iter());
        let bounds: Vec<Aabb<3>> = triangles
            .iter()
            .map(|t| Aabb::from_points(t.iter().map(|&i| &vertices[i as usize])))
            .collect();
        let bvh = Bvh::build(&bounds);
        let mesh = Self {
            vertices,
            triangles,
            bbox,
            bvh,
        };
        mesh.check_watertight()?;
        Ok(mesh)
    }

    fn check_watertight(&self) -> Result<()> {
        let probes = halton_points(&self.bbox, WATERTIGHT_PROBES);
        let inconsistent = probes
            .iter()
            .filter(|p| {
                let odd = self.parities(p);
                !(odd[0] == odd[1] && odd[1] == odd[2])
            })
            .count();
        if inconsistent as f64 > WATERTIGHT_TOLERANCE * probes.len() as f64 {
            return Err(Error::NotWatertight {
                inconsistent,
                probes: probes.len(),
            });
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[P3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, t: usize) -> [P3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    fn parities(&self, p: &P3) -> [bool; 3] {
        RAY_DIRECTIONS_3D.map(|d| {
            let dir = P3::new(d[0], d[1], d[2]);
            let mut odd = false;
            self.bvh.ray_candidates(p, &dir, |t| {
                if ray_hits_triangle(p, &dir, &self.triangle(t)) {
                    odd = !odd;
                }
            });
            odd
        })
    }
}

/// Möller–Trumbore intersection restricted to `t > 0`.
fn ray_hits_triangle(o: &P3, d: &P3, [a, b, c]: &[P3; 3]) -> bool {
    let e1 = b - a;
    let e2 = c - a;
    let pv = d.cross(&e2);
    let det = e1.dot(&pv);
    if det == 0.0 {
        return false;
    }
    let inv = 1.0 / det;
    let tv = o - a;
    let u = tv.dot(&pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = tv.cross(&e1);
    let v = d.dot(&qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(&qv) * inv > 0.0
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub(crate) fn closest_on_triangle(p: &P3, a: &P3, b: &P3, c: &P3) -> P3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

impl Surface<3> for TriMesh {
    fn bbox(&self) -> Aabb<3> {
        self.bbox
    }

    fn closest_point(&self, p: &P3) -> (f64, P3) {
        let (_, d2, q) = self
            .bvh
            .nearest(p, |t| {
                let [a, b, c] = self.triangle(t);
                let q = closest_on_triangle(p, &a, &b, &c);
                ((p - q).norm_squared(), q)
            })
            .expect("mesh has at least four triangles");
        (d2.sqrt(), q)
    }

    fn contains(&self, p: &P3) -> Sign {
        if check_finite(p).is_err() || !self.bbox.contains_point(p) {
            return Sign::Outside;
        }
        majority_inside(self.parities(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Vec<[P3; 3]> {
        let o = P3::new(0.0, 0.0, 0.0);
        let x = P3::new(1.0, 0.0, 0.0);
        let y = P3::new(0.0, 1.0, 0.0);
        let z = P3::new(0.0, 0.0, 1.0);
        vec![[o, y, x], [o, x, z], [o, z, y], [x, y, z]]
    }

    #[test]
    fn tetrahedron_queries() {
        let m = TriMesh::from_soup(&tetra()).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.contains(&P3::new(0.1, 0.1, 0.1)), Sign::Inside);
        assert_eq!(m.contains(&P3::new(0.5, 0.5, 0.5)), Sign::Outside);
        let d = m.signed_distance(&P3::new(0.1, 0.1, 0.1)).unwrap();
        assert!((d + 0.1).abs() < 1e-12);
    }

    #[test]
    fn open_mesh_is_rejected() {
        let mut soup = tetra();
        // Replace the slanted face with a tiny sliver so most rays escape.
        soup[3] = [
            P3::new(1.0, 0.0, 0.0),
            P3::new(0.99, 0.01, 0.0),
            P3::new(0.99, 0.0, 0.01),
        ];
        assert!(matches!(
            TriMesh::from_soup(&soup),
            Err(Error::NotWatertight { .. })
        ));
    }

    #[test]
    fn closest_point_regions() {
        let a = P3::new(0.0, 0.0, 0.0);
        let b = P3::new(1.0, 0.0, 0.0);
        let c = P3::new(0.0, 1.0, 0.0);
        let near_face = closest_on_triangle(&P3::new(0.2, 0.2, 1.0), &a, &b, &c);
        assert!((near_face - P3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        let near_vertex = closest_on_triangle(&P3::new(-1.0, -1.0, 0.5), &a, &b, &c);
        assert_eq!(near_vertex, a);
        let near_edge = closest_on_triangle(&P3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((near_edge - P3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }
}
