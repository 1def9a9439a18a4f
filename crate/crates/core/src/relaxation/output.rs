use std::fmt::Write as _;

use super::ParticleSet;

/// CSV with header `x,y[,z],volume`, one particle per line.
pub fn write_csv<const D: usize>(ps: &ParticleSet<D>) -> String {
    let axes = ["x", "y", "z"];
    let mut s = axes[..D].join(",");
    s.push_str(",volume\n");
    for p in &ps.positions {
        for c in p.iter() {
            let _ = write!(s, "{c},");
        }
        let _ = writeln!(s, "{}", ps.volume);
    }
    s
}

/// Legacy ASCII VTK point cloud with a per-point `volume` scalar. 2D sets
/// are written at `z = 0`.
pub fn write_vtk<const D: usize>(ps: &ParticleSet<D>) -> String {
    let n = ps.len();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "particles");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET POLYDATA");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &ps.positions {
        let z = if D == 3 { p[2] } else { 0.0 };
        let _ = writeln!(s, "{} {} {}", p[0], p[1], z);
    }
    let _ = writeln!(s, "VERTICES {n} {}", 2 * n);
    for i in 0..n {
        let _ = writeln!(s, "1 {i}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "SCALARS volume double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for _ in 0..n {
        let _ = writeln!(s, "{}", ps.volume);
    }
    s
}
