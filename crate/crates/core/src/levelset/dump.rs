use std::fmt::Write as _;

use super::{CoarseTag, DataPackage, LevelSetField};

fn join(values: impl IntoIterator<Item = impl std::fmt::Display>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// ASCII dump of the stored band.
///
/// ```text
/// LEVELSET d=<dim> lc=<l_c> origin=<x,y[,z]> dims=<nx,ny[,nz]>
/// i j [k] phi nx ny [nz] Ix Iy [Iz] id      one line per stored fine cell
/// TAGS <runs>
/// <P|N|I|C> <count>                         run-length-encoded coarse tags
/// ```
///
/// `dims` counts coarse cells; `i j k` are global fine indices; `id` is the
/// interface-flag bit set. Tag runs follow coarse linear order (axis 0 fastest).
pub fn write_dump<const D: usize>(field: &LevelSetField<D>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "LEVELSET d={} lc={} origin={} dims={}",
        D,
        field.lc(),
        join(field.origin().iter()),
        join(field.coarse_dims())
    );
    for pkg in field.packages() {
        for l in 0..DataPackage::<D>::CELLS {
            let g = pkg.fine_index(l);
            let mut line = g.iter().map(|v| v.to_string()).collect::<Vec<_>>();
            line.push(pkg.phi[l].to_string());
            line.extend(pkg.normal[l].iter().map(|v| v.to_string()));
            line.extend(pkg.completion[l].iter().map(|v| v.to_string()));
            line.push(pkg.interface_id[l].bits().to_string());
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    let mut runs: Vec<(char, usize)> = Vec::new();
    for tag in field.tags() {
        let ch = match tag {
            CoarseTag::FarPositive => 'P',
            CoarseTag::FarNegative => 'N',
            CoarseTag::Inner => 'I',
            CoarseTag::Core => 'C',
        };
        match runs.last_mut() {
            Some((c, n)) if *c == ch => *n += 1,
            _ => runs.push((ch, 1)),
        }
    }
    let _ = writeln!(out, "TAGS {}", runs.len());
    for (c, n) in runs {
        let _ = writeln!(out, "{c} {n}");
    }
    out
}
