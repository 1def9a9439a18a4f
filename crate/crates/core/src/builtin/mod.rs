//! Procedurally generated test geometries.
//!
//! Each builtin is a closed surface standing in for a class of real inputs:
//! a tapered wedge for a sharp trailing edge, a wedge with a thin slit for a
//! defective CAD model, detached blobs for scanning debris, a block with a thin
//! pole for a building with a flagpole, and a tube with thin side branches for
//! a vessel.
//!
//! Parameters are passed as string key/value pairs so they can come straight
//! from a config file or the command line. Unknown keys are rejected.

mod isosurface;

pub use isosurface::polygonize;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::geometry::{Aabb, Polygon, SurfaceGeometry, TriMesh};
use crate::{Error, Point, Result};

type P2 = Point<2>;
type P3 = Point<3>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    Circle,
    Sphere,
    Box,
    Wedge,
    WedgeWithSlit,
    BlockWithPole,
    TubeWithBranches,
    Blobs,
}

impl BuiltinName {
    pub const ALL: [BuiltinName; 8] = [
        BuiltinName::Circle,
        BuiltinName::Sphere,
        BuiltinName::Box,
        BuiltinName::Wedge,
        BuiltinName::WedgeWithSlit,
        BuiltinName::BlockWithPole,
        BuiltinName::TubeWithBranches,
        BuiltinName::Blobs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinName::Circle => "circle",
            BuiltinName::Sphere => "sphere",
            BuiltinName::Box => "box",
            BuiltinName::Wedge => "wedge",
            BuiltinName::WedgeWithSlit => "wedge-with-slit",
            BuiltinName::BlockWithPole => "block-with-pole",
            BuiltinName::TubeWithBranches => "tube-with-branches",
            BuiltinName::Blobs => "blobs",
        }
    }

    /// Accepted parameter keys.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            BuiltinName::Circle => &["radius", "segments"],
            BuiltinName::Sphere => &["radius", "subdivisions"],
            BuiltinName::Box => &["size", "dim"],
            BuiltinName::Wedge => &["length", "thickness", "tip"],
            BuiltinName::WedgeWithSlit => &[
                "length",
                "thickness",
                "tip",
                "slit_width",
                "slit_depth",
                "slit_position",
            ],
            BuiltinName::BlockWithPole => &["size", "height", "pole_width", "pole_height"],
            BuiltinName::TubeWithBranches => &["radius", "length", "branch_radius", "step"],
            BuiltinName::Blobs => &["radius", "fragments", "gap", "segments"],
        }
    }
}

impl FromStr for BuiltinName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown builtin geometry '{s}'")))
    }
}

/// String-valued builtin parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuiltinParams(pub BTreeMap<String, String>);

impl BuiltinParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Configuration(format!("builtin parameter {key}='{v}' is not a number"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.number(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Configuration(format!("builtin parameter {key} must be positive, got {v}")))
        }
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = match self.0.get(key) {
            None => default,
            Some(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Configuration(format!("builtin parameter {key}='{v}' is not a count")))?,
        };
        if v < min {
            return Err(Error::Configuration(format!("builtin parameter {key} must be at least {min}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split([',', ' '])
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite() && *x > 0.0)
                        .ok_or_else(|| Error::Configuration(format!("bad entry '{s}' in builtin parameter {key}")))
                })
                .collect(),
        }
    }
}

pub fn builtin_geometry(name: BuiltinName, params: &BuiltinParams) -> Result<SurfaceGeometry> {
    if let Some(key) = params.0.keys().find(|k| !name.keys().contains(&k.as_str())) {
        return Err(Error::Configuration(format!(
            "builtin '{}' has no parameter '{key}' (accepted: {})",
            name.as_str(),
            name.keys().join(", ")
        )));
    }
    let p = params;
    Ok(match name {
        BuiltinName::Circle => SurfaceGeometry::Planar(circle_polygon(
            P2::zeros(),
            p.positive("radius", 1.0)?,
            p.count("segments", 512, 3)?,
        )?),
        BuiltinName::Sphere => {
            SurfaceGeometry::Solid(icosphere(p.positive("radius", 1.0)?, p.count("subdivisions", 4, 0)?)?)
        }
        BuiltinName::Box => {
            let size = p.positive("size", 1.0)?;
            match p.count("dim", 3, 2)? {
                2 => SurfaceGeometry::Planar(Polygon::from_loops(vec![vec![
                    P2::new(0.0, 0.0),
                    P2::new(size, 0.0),
                    P2::new(size, size),
                    P2::new(0.0, size),
                ]])?),
                3 => SurfaceGeometry::Solid(cuboid(P3::zeros(), P3::from_element(size))?),
                d => return Err(Error::Configuration(format!("box dimension must be 2 or 3, got {d}"))),
            }
        }
        BuiltinName::Wedge => SurfaceGeometry::Planar(Polygon::from_loops(vec![WedgeShape::from_params(p)?.outline(None)])?),
        BuiltinName::WedgeWithSlit => {
            let wedge = WedgeShape::from_params(p)?;
            let slit = Slit {
                width: p.positive("slit_width", 0.01)?,
                depth: p.positive("slit_depth", 0.05)?,
                position: p.number("slit_position", 0.4)?,
            };
            SurfaceGeometry::Planar(Polygon::from_loops(vec![wedge.outline(Some(slit.validate(&wedge)?))])?)
        }
        BuiltinName::BlockWithPole => SurfaceGeometry::Solid(block_with_pole(
            p.positive("size", 1.0)?,
            p.positive("height", 3.0)?,
            p.positive("pole_width", 0.04)?,
            p.positive("pole_height", 0.6)?,
        )?),
        BuiltinName::TubeWithBranches => {
            let branch = p.positive("branch_radius", 0.05)?;
            SurfaceGeometry::Solid(tube_with_branches(
                p.positive("radius", 0.3)?,
                p.positive("length", 2.0)?,
                branch,
                p.positive("step", branch / 2.0)?,
            )?)
        }
        BuiltinName::Blobs => SurfaceGeometry::Planar(blobs(
            p.positive("radius", 1.0)?,
            &p.list("fragments", &[0.01, 0.02, 0.04])?,
            p.positive("gap", 0.3)?,
            p.count("segments", 256, 8)?,
        )?),
    })
}

/// Regular `segments`-gon inscribed in the circle.
pub fn circle_polygon(center: P2, radius: f64, segments: usize) -> Result<Polygon> {
    Polygon::from_loops(vec![circle_loop(center, radius, segments)])
}

fn circle_loop(center: P2, radius: f64, segments: usize) -> Vec<P2> {
    (0..segments)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / segments as f64;
            center + P2::new(t.cos(), t.sin()) * radius
        })
        .collect()
}

/// Tapered plate along +x: thickness `thickness` at x = 0, `tip` at x = `length`,
/// symmetric about y = 0.
#[derive(Debug, Clone, Copy)]
pub struct WedgeShape {
    pub length: f64,
    pub thickness: f64,
    pub tip: f64,
}

#[derive(Debug, Clone, Copy)]
struct Slit {
    width: f64,
    depth: f64,
    /// Slit centre as a fraction of the wedge length.
    position: f64,
}

impl Slit {
    fn validate(self, wedge: &WedgeShape) -> Result<Self> {
        let xc = self.position * wedge.length;
        let (x0, x1) = (xc - self.width / 2.0, xc + self.width / 2.0);
        if x0 <= 0.0 || x1 >= wedge.length {
            return Err(Error::Configuration("slit must lie strictly within the wedge length".into()));
        }
        if wedge.half_thickness(x1) * 2.0 <= self.depth {
            return Err(Error::Configuration("slit depth must be less than the local wedge thickness".into()));
        }
        Ok(self)
    }
}

impl WedgeShape {
    fn from_params(p: &BuiltinParams) -> Result<Self> {
        let shape = Self {
            length: p.positive("length", 1.0)?,
            thickness: p.positive("thickness", 0.2)?,
            tip: p.number("tip", 0.0)?,
        };
        if shape.tip < 0.0 || shape.tip >= shape.thickness {
            return Err(Error::Configuration(format!(
                "wedge tip thickness must lie in [0, thickness), got {}",
                shape.tip
            )));
        }
        Ok(shape)
    }

    pub fn half_thickness(&self, x: f64) -> f64 {
        0.5 * (self.thickness + (self.tip - self.thickness) * x / self.length)
    }

    fn outline(&self, slit: Option<Slit>) -> Vec<P2> {
        let l = self.length;
        let mut v = vec![P2::new(0.0, -self.thickness / 2.0)];
        if self.tip > 0.0 {
            v.push(P2::new(l, -self.tip / 2.0));
            v.push(P2::new(l, self.tip / 2.0));
        } else {
            v.push(P2::new(l, 0.0));
        }
        if let Some(s) = slit {
            let xc = s.position * l;
            let (x0, x1) = (xc - s.width / 2.0, xc + s.width / 2.0);
            let bottom = self.half_thickness(xc) - s.depth;
            v.push(P2::new(x1, self.half_thickness(x1)));
            v.push(P2::new(x1, bottom));
            v.push(P2::new(x0, bottom));
            v.push(P2::new(x0, self.half_thickness(x0)));
        }
        v.push(P2::new(0.0, self.thickness / 2.0));
        v
    }
}

/// Main disk of `radius` at the origin plus free-floating small disks with the
/// given radii, placed around it at distance `radius + gap`.
pub fn blobs(radius: f64, fragments: &[f64], gap: f64, segments: usize) -> Result<Polygon> {
    let mut loops = vec![circle_loop(P2::zeros(), radius, segments)];
    let n = fragments.len().max(1);
    for (i, &r) in fragments.iter().enumerate() {
        if r >= gap {
            return Err(Error::Configuration(format!(
                "fragment radius {r} must be smaller than the gap {gap}"
            )));
        }
        let t = 2.0 * PI * i as f64 / n as f64 + PI / 6.0;
        let c = P2::new(t.cos(), t.sin()) * (radius + gap);
        loops.push(circle_loop(c, r, 32));
    }
    Polygon::from_loops(loops)
}

/// Icosahedron refined `subdivisions` times and projected onto the sphere.
pub fn icosphere(radius: f64, subdivisions: usize) -> Result<TriMesh> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<P3> = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ]
    .iter()
    .map(|v| P3::new(v[0], v[1], v[2]).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<P3>| {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts.into_iter().map(|v| v * radius).collect(), faces)
}

fn push_quad(tris: &mut Vec<[P3; 3]>, a: P3, b: P3, c: P3, d: P3) {
    tris.push([a, b, c]);
    tris.push([a, c, d]);
}

/// Axis-aligned box between `min` and `max`.
pub fn cuboid(min: P3, max: P3) -> Result<TriMesh> {
    let c = |i: usize| {
        P3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    let mut t = Vec::new();
    push_quad(&mut t, c(0), c(2), c(3), c(1)); // -z
    push_quad(&mut t, c(4), c(5), c(7), c(6)); // +z
    push_quad(&mut t, c(0), c(1), c(5), c(4)); // -y
    push_quad(&mut t, c(2), c(6), c(7), c(3)); // +y
    push_quad(&mut t, c(0), c(4), c(6), c(2)); // -x
    push_quad(&mut t, c(1), c(3), c(7), c(5)); // +x
    TriMesh::from_soup(&t)
}

/// Square block `[-s/2, s/2]² × [0, height]` with a square pole of width
/// `pole_width` rising `pole_height` from the centre of its roof.
pub fn block_with_pole(size: f64, height: f64, pole_width: f64, pole_height: f64) -> Result<TriMesh> {
    if pole_width >= size {
        return Err(Error::Configuration("pole must be narrower than the block".into()));
    }
    let (b, a) = (size / 2.0, pole_width / 2.0);
    let ring = |r: f64, z: f64| [P3::new(-r, -r, z), P3::new(r, -r, z), P3::new(r, r, z), P3::new(-r, r, z)];
    let base = ring(b, 0.0);
    let roof = ring(b, height);
    let foot = ring(a, height);
    let top = ring(a, height + pole_height);
    let mut t = Vec::new();
    push_quad(&mut t, base[0], base[3], base[2], base[1]);
    for k in 0..4 {
        let n = (k + 1) % 4;
        push_quad(&mut t, base[k], base[n], roof[n], roof[k]);
        push_quad(&mut t, roof[k], roof[n], foot[n], foot[k]);
        push_quad(&mut t, foot[k], foot[n], top[n], top[k]);
    }
    push_quad(&mut t, top[0], top[1], top[2], top[3]);
    TriMesh::from_soup(&t)
}

fn capsule_distance(p: &P3, a: &P3, b: &P3, r: f64) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm() - r
}

/// Capsule along x with three thin capsules branching off it, polygonised at
/// grid spacing `step`.
pub fn tube_with_branches(radius: f64, length: f64, branch_radius: f64, step: f64) -> Result<TriMesh> {
    if branch_radius >= radius {
        return Err(Error::Configuration("branches must be thinner than the tube".into()));
    }
    let h = length / 2.0;
    let main = (P3::new(-h, 0.0, 0.0), P3::new(h, 0.0, 0.0));
    let reach = radius + 0.4 * length;
    let branches = [
        (P3::new(-0.4 * h, 0.0, 0.0), P3::new(-0.4 * h, reach, 0.0), branch_radius),
        (P3::new(0.2 * h, 0.0, 0.0), P3::new(0.2 * h, -0.7 * reach, 0.7 * reach), branch_radius),
        (P3::new(0.7 * h, 0.0, 0.0), P3::new(0.8 * h, 0.3 * reach, -0.9 * reach), 0.6 * branch_radius),
    ];
    let f = |p: &P3| {
        branches
            .iter()
            .map(|(a, b, r)| capsule_distance(p, a, b, *r))
            .fold(capsule_distance(p, &main.0, &main.1, radius), f64::min)
    };
    let mut bounds = Aabb::new(main.0, main.1).inflate(radius);
    for (a, b, r) in &branches {
        bounds = bounds.merge(&Aabb::new(a.inf(b), a.sup(b)).inflate(*r));
    }
    polygonize(f, bounds.inflate(2.0 * step), step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Sign, Surface};

    #[test]
    fn circle_sagitta() {
        let c = circle_polygon(P2::zeros(), 1.0, 512).unwrap();
        let worst = (0..5000)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 5000.0;
                let p = P2::new(t.cos(), t.sin()) * 0.5;
                // distance from the centre to the polygon along this direction
                1.0 - 0.5 - c.closest_point(&p).0
            })
            .fold(0.0, f64::max);
        let expected = 1.0 - (PI / 512.0).cos();
        assert!((worst - expected).abs() < 1e-6 * expected.max(1e-9) + 1e-9, "{worst} vs {expected}");
    }

    #[test]
    fn wedge_tip_midline_distance() {
        for tip in [0.004, 0.01, 0.03] {
            let g = builtin_geometry(BuiltinName::Wedge, &BuiltinParams::new().with("tip", tip)).unwrap();
            let SurfaceGeometry::Planar(poly) = g else { panic!() };
            // half a tip thickness behind the blunt end, on the midline
            let d = poly.signed_distance(&P2::new(1.0 - tip / 2.0, 0.0)).unwrap();
            let half_angle = (0.1 - tip / 2.0).atan2(1.0);
            let expected = -(tip / 2.0) * half_angle.cos().min(1.0);
            assert!((d - expected).abs() < 0.02 * tip, "tip {tip}: {d} vs {expected}");
        }
    }

    #[test]
    fn slit_is_open_to_the_outside() {
        let params = BuiltinParams::new().with("slit_width", 0.01).with("slit_depth", 0.05);
        let SurfaceGeometry::Planar(poly) = builtin_geometry(BuiltinName::WedgeWithSlit, &params).unwrap() else {
            panic!()
        };
        let wedge = WedgeShape { length: 1.0, thickness: 0.2, tip: 0.0 };
        let top = wedge.half_thickness(0.4);
        assert_eq!(poly.contains(&P2::new(0.4, top - 0.02)), Sign::Outside);
        assert_eq!(poly.contains(&P2::new(0.42, top - 0.02)), Sign::Inside);
        assert!((poly.signed_distance(&P2::new(0.4, top - 0.02)).unwrap() - 0.005).abs() < 1e-12);
    }

    #[test]
    fn blobs_are_separate_loops() {
        let SurfaceGeometry::Planar(poly) = builtin_geometry(BuiltinName::Blobs, &BuiltinParams::new()).unwrap() else {
            panic!()
        };
        assert_eq!(poly.loops().len(), 4);
        assert_eq!(poly.contains(&P2::zeros()), Sign::Inside);
        let t = PI / 6.0;
        assert_eq!(poly.contains(&(P2::new(t.cos(), t.sin()) * 1.3)), Sign::Inside);
    }

    #[test]
    fn solids_are_watertight() {
        for name in [BuiltinName::Sphere, BuiltinName::Box, BuiltinName::BlockWithPole, BuiltinName::TubeWithBranches] {
            let g = builtin_geometry(name, &BuiltinParams::new()).unwrap();
            let SurfaceGeometry::Solid(mesh) = g else { panic!("{name:?} is 3D") };
            assert!(mesh.triangle_count() >= 12);
        }
        let SurfaceGeometry::Solid(pole) = builtin_geometry(BuiltinName::BlockWithPole, &BuiltinParams::new()).unwrap()
        else {
            panic!()
        };
        assert_eq!(pole.contains(&P3::new(0.0, 0.0, 3.3)), Sign::Inside);
        assert_eq!(pole.contains(&P3::new(0.1, 0.0, 3.3)), Sign::Outside);
        assert_eq!(pole.contains(&P3::new(0.3, 0.2, 1.0)), Sign::Inside);
    }

    #[test]
    fn icosphere_radius() {
        let m = icosphere(2.0, 3).unwrap();
        assert_eq!(m.triangle_count(), 20 * 64);
        assert!(m.vertices().iter().all(|v| (v.norm() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn invalid_parameters() {
        let bad = [
            (BuiltinName::Wedge, BuiltinParams::new().with("tip", -0.1)),
            (BuiltinName::Wedge, BuiltinParams::new().with("tip", 0.5)),
            (BuiltinName::Circle, BuiltinParams::new().with("radius", "abc")),
            (BuiltinName::Circle, BuiltinParams::new().with("colour", "red")),
            (BuiltinName::Box, BuiltinParams::new().with("dim", 4)),
            (BuiltinName::WedgeWithSlit, BuiltinParams::new().with("slit_depth", 0.5)),
        ];
        for (name, params) in bad {
            assert!(
                matches!(builtin_geometry(name, &params), Err(Error::Configuration(_))),
                "{name:?} {params:?}"
            );
        }
        assert!("teapot".parse::<BuiltinName>().is_err());
    }
}
