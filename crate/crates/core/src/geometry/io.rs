//! Surface file readers and writers: STL (ASCII and binary), OBJ, and 2D
//! polyline CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{Polygon, SurfaceGeometry, TriMesh};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceFormat {
    StlAscii,
    StlBinary,
    Obj,
    PolylineCsv,
}

impl SurfaceFormat {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceFormat::StlAscii => "stl-ascii",
            SurfaceFormat::StlBinary => "stl-binary",
            SurfaceFormat::Obj => "obj",
            SurfaceFormat::PolylineCsv => "polyline-csv",
        }
    }

    /// Guess from a file extension; `.stl` is taken to be ASCII.
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "stl" => Some(SurfaceFormat::StlAscii),
            "obj" => Some(SurfaceFormat::Obj),
            "csv" => Some(SurfaceFormat::PolylineCsv),
            _ => None,
        }
    }
}

impl FromStr for SurfaceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stl-ascii" => Ok(SurfaceFormat::StlAscii),
            "stl-binary" => Ok(SurfaceFormat::StlBinary),
            "obj" => Ok(SurfaceFormat::Obj),
            "polyline-csv" => Ok(SurfaceFormat::PolylineCsv),
            other => Err(Error::Configuration(format!("unknown surface format '{other}'"))),
        }
    }
}

pub fn load_surface(path: &Path, format: SurfaceFormat) -> Result<SurfaceGeometry> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_surface(&bytes, format)
}

pub fn parse_surface(bytes: &[u8], format: SurfaceFormat) -> Result<SurfaceGeometry> {
    match format {
        SurfaceFormat::StlBinary => Ok(SurfaceGeometry::Solid(parse_stl_binary(bytes)?)),
        text_format => {
            let text = std::str::from_utf8(bytes).map_err(|e| {
                Error::malformed(
                    format!("byte offset {}", e.valid_up_to()),
                    "input is not valid UTF-8",
                )
            })?;
            match text_format {
                SurfaceFormat::StlAscii => Ok(SurfaceGeometry::Solid(parse_stl_ascii(text)?)),
                SurfaceFormat::Obj => Ok(SurfaceGeometry::Solid(parse_obj(text)?)),
                SurfaceFormat::PolylineCsv => {
                    Ok(SurfaceGeometry::Planar(parse_polyline_csv(text)?))
                }
                SurfaceFormat::StlBinary => unreachable!(),
            }
        }
    }
}

fn parse_f64(token: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let token = token.ok_or_else(|| Error::malformed(format!("line {line}"), format!("missing {what}")))?;
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::malformed(format!("line {line}"), format!("cannot parse {what} '{token}'")))
}

pub fn parse_stl_ascii(text: &str) -> Result<TriMesh> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Start,
        Solid,
        Facet,
        Loop(usize),
        EndLoop,
        Done,
    }
    let mut state = State::Start;
    let mut soup = Vec::new();
    let mut tri = [Point::<3>::zeros(); 3];
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let mut tokens = raw.split_whitespace();
        let Some(keyword) = tokens.next() else { continue };
        let unexpected = || {
            Error::malformed(format!("line {line}"), format!("unexpected keyword '{keyword}'"))
        };
        state = match (state, keyword) {
            (State::Start, "solid") => State::Solid,
            (State::Solid, "facet") => State::Facet,
            (State::Solid, "endsolid") => State::Done,
            (State::Facet, "outer") => State::Loop(0),
            (State::Loop(k), "vertex") if k < 3 => {
                for c in 0..3 {
                    tri[k][c] = parse_f64(tokens.next(), line, "vertex coordinate")?;
                }
                if k == 2 {
                    State::EndLoop
                } else {
                    State::Loop(k + 1)
                }
            }
            (State::EndLoop, "endloop") => State::EndLoop,
            (State::EndLoop, "endfacet") => {
                soup.push(tri);
                State::Solid
            }
            (State::Done, _) => break,
            _ => return Err(unexpected()),
        };
    }
    if state != State::Done {
        return Err(Error::malformed(
            format!("line {}", last_line + 1),
            "unexpected end of file before 'endsolid'",
        ));
    }
    TriMesh::from_soup(&soup)
}

pub fn parse_stl_binary(bytes: &[u8]) -> Result<TriMesh> {
    if bytes.len() < 84 {
        return Err(Error::malformed(
            format!("byte offset {}", bytes.len()),
            "file shorter than the 84-byte STL header",
        ));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    let expected = 84 + 50 * count;
    if bytes.len() < expected {
        let complete = (bytes.len() - 84) / 50;
        return Err(Error::malformed(
            format!("byte offset {}", 84 + 50 * complete),
            format!("truncated: header declares {count} triangles, found {complete}"),
        ));
    }
    let read = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes")) as f64;
    let soup: Vec<[Point<3>; 3]> = (0..count)
        .map(|t| {
            let base = 84 + 50 * t + 12;
            std::array::from_fn(|v| {
                let o = base + 12 * v;
                Point::<3>::new(read(o), read(o + 4), read(o + 8))
            })
        })
        .collect();
    TriMesh::from_soup(&soup)
}

pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let x = parse_f64(tokens.next(), line, "x")?;
                let y = parse_f64(tokens.next(), line, "y")?;
                let z = parse_f64(tokens.next(), line, "z")?;
                vertices.push(Point::<3>::new(x, y, z));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(Error::malformed(
                        format!("line {line}"),
                        format!("only triangular faces are supported, got {} vertices", refs.len()),
                    ));
                }
                let mut tri = [0u32; 3];
                for (k, r) in refs.iter().enumerate() {
                    let head = r.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| {
                        Error::malformed(format!("line {line}"), format!("bad vertex index '{r}'"))
                    })?;
                    let resolved = if i > 0 { i - 1 } else { vertices.len() as i64 + i };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(Error::malformed(
                            format!("line {line}"),
                            format!("vertex index {i} out of range"),
                        ));
                    }
                    tri[k] = resolved as u32;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles)
}

/// One `x,y` vertex per line. Blank lines separate loops; `#` starts a comment.
pub fn parse_polyline_csv(text: &str) -> Result<Polygon> {
    let mut loops: Vec<Vec<Point<2>>> = vec![Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            if !loops.last().expect("non-empty").is_empty() {
                loops.push(Vec::new());
            }
            continue;
        }
        let mut fields = content.split(',');
        let x = parse_f64(fields.next(), line, "x")?;
        let y = parse_f64(fields.next(), line, "y")?;
        if fields.next().is_some() {
            return Err(Error::malformed(format!("line {line}"), "expected exactly two columns"));
        }
        loops.last_mut().expect("non-empty").push(Point::<2>::new(x, y));
    }
    loops.retain(|l| !l.is_empty());
    Polygon::from_loops(loops)
}

pub fn polyline_csv(poly: &Polygon) -> String {
    let mut out = String::new();
    for (i, l) in poly.loops().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for v in l {
            let _ = writeln!(out, "{},{}", v.x, v.y);
        }
    }
    out
}

pub fn stl_ascii(mesh: &TriMesh, name: &str) -> String {
    let mut out = format!("solid {name}\n");
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        let _ = writeln!(out, "  facet normal {} {} {}", n.x, n.y, n.z);
        out.push_str("    outer loop\n");
        for v in [a, b, c] {
            let _ = writeln!(out, "      vertex {} {} {}", v.x, v.y, v.z);
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(out, "endsolid {name}");
    out
}

pub fn stl_binary(mesh: &TriMesh) -> Vec<u8> {
    let mut out = vec![0u8; 80];
    out.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n, a, b, c] {
            for k in 0..3 {
                out.extend_from_slice(&(v[k] as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

pub fn obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Writes the geometry in the format implied by `path`'s extension.
pub fn save_surface(geom: &SurfaceGeometry, path: &Path) -> Result<()> {
    let bytes = match (geom, SurfaceFormat::from_extension(path)) {
        (SurfaceGeometry::Planar(p), Some(SurfaceFormat::PolylineCsv)) => polyline_csv(p).into_bytes(),
        (SurfaceGeometry::Solid(m), Some(SurfaceFormat::StlAscii)) => stl_ascii(m, "surface").into_bytes(),
        (SurfaceGeometry::Solid(m), Some(SurfaceFormat::Obj)) => obj(m).into_bytes(),
        (g, _) => {
            return Err(Error::Configuration(format!(
                "cannot write a {}D surface to '{}' (use .csv for 2D, .stl or .obj for 3D)",
                g.dimension(),
                path.display()
            )))
        }
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
