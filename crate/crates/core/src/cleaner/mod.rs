//! Detection and removal of geometric features thinner than the fine grid.
//!
//! Two auxiliary levels `φ = ±ε` accompany the zero level. Where the zero
//! level (or a cell whose value lies between the levels) has no cell cut by
//! `+ε` in its 3^d neighbourhood, the structure on the positive side is too
//! thin to be resolved, and vice versa for `−ε`. Such cells are re-distanced to
//! the nearest surviving auxiliary level and the field is reinitialised, which
//! fills unresolved gaps and removes unresolved slivers.

mod interface_id;

pub use interface_id::InterfaceId;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::confinement::{self, CompletionSettings};
use crate::levelset::index::{add, offsets, unravel};
use crate::levelset::{DataPackage, FineCell, LevelSetField, DEFAULT_REINIT_ITERS};
use crate::Result;

/// Default auxiliary-level offset in units of `l_f`.
pub const DEFAULT_EPSILON_FACTOR: f64 = 0.75;
/// Default replacement cap in units of `l_f`.
pub const DEFAULT_LIMIT_FACTOR: f64 = 3.0;
/// Default half-width of the re-distance search window (5^d cells).
pub const DEFAULT_WINDOW_RADIUS: i64 = 2;
pub const DEFAULT_MAX_PASSES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanOptions {
    /// Auxiliary-level offset `ε` (length).
    pub epsilon: f64,
    /// Replacement cap `D_limit` (length).
    pub d_limit: f64,
    pub window_radius: i64,
    pub max_passes: usize,
    pub reinit_iters: usize,
    /// When set, the completion field is refreshed after every modifying pass.
    pub completion: Option<CompletionSettings>,
}

impl CleanOptions {
    pub fn for_spacing(lf: f64) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON_FACTOR * lf,
            d_limit: DEFAULT_LIMIT_FACTOR * lf,
            window_radius: DEFAULT_WINDOW_RADIUS,
            max_passes: DEFAULT_MAX_PASSES,
            reinit_iters: DEFAULT_REINIT_ITERS,
            completion: None,
        }
    }
}

/// A stored fine cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef {
    pub package: usize,
    pub local: usize,
}

/// Interface flags for every stored fine cell, indexed like the packages.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMap {
    ids: Vec<Vec<InterfaceId>>,
}

impl InterfaceMap {
    pub fn get(&self, cell: CellRef) -> InterfaceId {
        self.ids[cell.package][cell.local]
    }

    /// Flags of the fine cell with global index `g`; far cells carry none.
    pub fn at<const D: usize>(&self, field: &LevelSetField<D>, g: [i64; D]) -> InterfaceId {
        match field.locate(g) {
            FineCell::Stored { package, local } => self.ids[package][local],
            FineCell::Far(_) => InterfaceId::NONE,
        }
    }

    pub fn mark(&mut self, sets: &NonResolved) {
        for c in &sets.plus {
            self.ids[c.package][c.local].insert(InterfaceId::NON_RESOLVED_PLUS);
        }
        for c in &sets.minus {
            self.ids[c.package][c.local].insert(InterfaceId::NON_RESOLVED_MINUS);
        }
    }

    /// Number of cells in Core packages carrying any of `flags`.
    pub fn count_core<const D: usize>(&self, field: &LevelSetField<D>, flags: InterfaceId) -> usize {
        field
            .packages()
            .iter()
            .zip(&self.ids)
            .filter(|(pkg, _)| pkg.core)
            .map(|(_, ids)| ids.iter().filter(|id| id.intersects(flags)).count())
            .sum()
    }
}

/// Cells of the two non-resolved sets, in package order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NonResolved {
    pub plus: Vec<CellRef>,
    pub minus: Vec<CellRef>,
}

impl NonResolved {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }
}

/// The 2^d corner values of fine cell `g`, each the mean of the 2^d cell
/// values sharing that corner. Corner `k` lies on the `+` side along axis `j`
/// when bit `j` of `k` is set.
pub fn corner_phi<const D: usize>(field: &LevelSetField<D>, g: [i64; D]) -> Vec<f64> {
    let n = 1usize << D;
    let mut cell_values = vec![0.0; 3usize.pow(D as u32)];
    for (slot, v) in cell_values.iter_mut().enumerate() {
        let rel = unravel::<D>(slot, 3).map(|r| r as i64 - 1);
        *v = field.phi_at(add(g, rel));
    }
    (0..n)
        .map(|corner| {
            let mut sum = 0.0;
            for member in 0..n {
                let mut slot = 0;
                for axis in (0..D).rev() {
                    let up = corner >> axis & 1;
                    let take = member >> axis & 1;
                    // cell offset along this axis: up ? {0, +1} : {-1, 0}
                    let offset = up + take;
                    slot = slot * 3 + offset;
                }
                sum += cell_values[slot];
            }
            sum / n as f64
        })
        .collect()
}

fn straddles(corners: &[f64], level: f64) -> bool {
    let below = corners.iter().any(|&c| c < level);
    let above = corners.iter().any(|&c| c > level);
    below && above
}

/// Cut-cell flags for one cell from its corner values and centre value.
pub fn classify_values(corners: &[f64], center: f64, epsilon: f64) -> InterfaceId {
    let mut id = InterfaceId::NONE;
    if straddles(corners, 0.0) {
        id.insert(InterfaceId::ZERO_CUT);
    }
    if straddles(corners, epsilon) {
        id.insert(InterfaceId::POSITIVE_CUT);
    }
    if straddles(corners, -epsilon) {
        id.insert(InterfaceId::NEGATIVE_CUT);
    }
    let in_gap = (center > -epsilon && center < 0.0) || (center > 0.0 && center < epsilon);
    if in_gap && !id.contains(InterfaceId::ZERO_CUT) {
        id.insert(InterfaceId::GAP_CUT);
    }
    id
}

/// Classifies every stored fine cell against the levels `0` and `±ε`.
pub fn classify_cells<const D: usize>(field: &LevelSetField<D>, epsilon: f64) -> InterfaceMap {
    let ids = field
        .packages()
        .par_iter()
        .map(|pkg| {
            (0..DataPackage::<D>::CELLS)
                .map(|l| {
                    let g = pkg.fine_index(l);
                    classify_values(&corner_phi(field, g), pkg.phi[l], epsilon)
                })
                .collect()
        })
        .collect();
    InterfaceMap { ids }
}

/// Zero- or gap-cut cells of Core packages lacking a `+ε` cut cell (plus set)
/// or a `−ε` cut cell (minus set) in their 3^d neighbourhood.
pub fn find_non_resolved<const D: usize>(field: &LevelSetField<D>, ids: &InterfaceMap) -> NonResolved {
    let interface = InterfaceId::ZERO_CUT | InterfaceId::GAP_CUT;
    let neighborhood: Vec<_> = offsets::<D>(-1, 1).collect();
    let per_package: Vec<(Vec<CellRef>, Vec<CellRef>)> = field
        .packages()
        .par_iter()
        .enumerate()
        .map(|(p, pkg)| {
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            if !pkg.core {
                return (plus, minus);
            }
            for l in 0..DataPackage::<D>::CELLS {
                if !ids.ids[p][l].intersects(interface) {
                    continue;
                }
                let g = pkg.fine_index(l);
                let mut seen = InterfaceId::NONE;
                for off in &neighborhood {
                    seen = seen | ids.at(field, add(g, *off));
                }
                let cell = CellRef { package: p, local: l };
                if !seen.contains(InterfaceId::POSITIVE_CUT) {
                    plus.push(cell);
                }
                if !seen.contains(InterfaceId::NEGATIVE_CUT) {
                    minus.push(cell);
                }
            }
            (plus, minus)
        })
        .collect();
    let mut sets = NonResolved::default();
    for (plus, minus) in per_package {
        sets.plus.extend(plus);
        sets.minus.extend(minus);
    }
    sets
}

/// Smallest `|offset·l_f + s·φ_P N_P|` over cells `P` carrying `flag` in the
/// window around `g`, with `s = +1` for the `+ε` level and `−1` for `−ε`.
fn nearest_level<const D: usize>(
    field: &LevelSetField<D>,
    ids: &InterfaceMap,
    g: [i64; D],
    flag: InterfaceId,
    sign: f64,
    window: &[[i64; D]],
) -> Option<f64> {
    let lf = field.lf();
    let mut best: Option<f64> = None;
    for off in window {
        let q = add(g, *off);
        let FineCell::Stored { package, local } = field.locate(q) else {
            continue;
        };
        if !ids.ids[package][local].contains(flag) {
            continue;
        }
        let pkg = &field.packages()[package];
        let (phi, normal) = (pkg.phi[local], pkg.normal[local]);
        let mut d2 = 0.0;
        for k in 0..D {
            let c = off[k] as f64 * lf + sign * phi * normal[k];
            d2 += c * c;
        }
        let d = d2.sqrt();
        best = Some(best.map_or(d, |b: f64| b.min(d)));
    }
    best
}

/// Computes the replacement values for the non-resolved cells without
/// modifying the field. Plus cells become `−min(D, D_limit)`, minus cells
/// `+min(D, D_limit)`. A cell in both sets takes the minus value if a `−ε` cell
/// was found, else the plus value if a `+ε` cell was found, else `D_limit` with
/// its current sign.
pub fn redistance_values<const D: usize>(
    field: &LevelSetField<D>,
    ids: &InterfaceMap,
    sets: &NonResolved,
    d_limit: f64,
    window_radius: i64,
) -> Vec<(CellRef, f64)> {
    let window: Vec<_> = offsets::<D>(-window_radius, window_radius).collect();
    let mut minus_cells = sets.minus.clone();
    minus_cells.sort_unstable();
    let in_minus = |c: &CellRef| minus_cells.binary_search(c).is_ok();
    let mut plus_cells = sets.plus.clone();
    plus_cells.sort_unstable();
    let in_plus = |c: &CellRef| plus_cells.binary_search(c).is_ok();

    let plus: Vec<(CellRef, f64)> = sets
        .plus
        .par_iter()
        .map(|&c| {
            let g = field.packages()[c.package].fine_index(c.local);
            let found = nearest_level(field, ids, g, InterfaceId::POSITIVE_CUT, 1.0, &window);
            let value = match found {
                Some(d) => -d.min(d_limit),
                None if in_minus(&c) => {
                    let minus = nearest_level(field, ids, g, InterfaceId::NEGATIVE_CUT, -1.0, &window);
                    match minus {
                        Some(d) => d.min(d_limit),
                        None => d_limit.copysign(field.packages()[c.package].phi[c.local]),
                    }
                }
                None => -d_limit,
            };
            (c, value)
        })
        .collect();
    let minus: Vec<(CellRef, f64)> = sets
        .minus
        .par_iter()
        .filter_map(|&c| {
            let g = field.packages()[c.package].fine_index(c.local);
            let found = nearest_level(field, ids, g, InterfaceId::NEGATIVE_CUT, -1.0, &window);
            match found {
                Some(d) => Some((c, d.min(d_limit))),
                // handled together with the plus set
                None if in_plus(&c) => None,
                None => Some((c, d_limit)),
            }
        })
        .collect();
    let mut all = plus;
    all.extend(minus);
    all
}

/// Applies [`redistance_values`]; returns the number of cells written.
pub fn redistance<const D: usize>(
    field: &mut LevelSetField<D>,
    ids: &InterfaceMap,
    sets: &NonResolved,
    d_limit: f64,
    window_radius: i64,
) -> usize {
    let values = redistance_values(field, ids, sets, d_limit, window_radius);
    let mut written: Vec<CellRef> = values.iter().map(|(c, _)| *c).collect();
    let packages = field.packages_mut();
    for (c, v) in values {
        packages[c.package].phi[c.local] = v;
    }
    written.sort_unstable();
    written.dedup();
    written.len()
}

/// Census and edits of one cleaning pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassRecord {
    pub pass: usize,
    pub zero_cut: usize,
    pub positive_cut: usize,
    pub negative_cut: usize,
    pub gap_cut: usize,
    pub non_resolved_plus: usize,
    pub non_resolved_minus: usize,
    pub modified: usize,
    /// Residual after reinitialisation, when the pass modified the field.
    pub reinit_residual: Option<f64>,
}

impl PassRecord {
    pub fn non_resolved(&self) -> usize {
        self.non_resolved_plus + self.non_resolved_minus
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleanReport {
    pub passes: Vec<PassRecord>,
    /// False when the pass limit was reached with non-resolved cells left.
    pub complete: bool,
}

impl CleanReport {
    pub fn total_modified(&self) -> usize {
        self.passes.iter().map(|p| p.modified).sum()
    }

    pub fn already_clean(&self) -> bool {
        self.total_modified() == 0 && self.complete
    }

    /// Non-resolved census of each pass, in order.
    pub fn non_resolved_sequence(&self) -> Vec<usize> {
        self.passes.iter().map(PassRecord::non_resolved).collect()
    }

    pub fn final_non_resolved(&self) -> usize {
        self.passes.last().map_or(0, PassRecord::non_resolved)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}",
            "pass", "zero", "plus_eps", "minus_eps", "gap", "non_plus", "non_minus", "modified", "residual"
        );
        for p in &self.passes {
            let residual = p.reinit_residual.map_or("-".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(
                s,
                "{:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}",
                p.pass,
                p.zero_cut,
                p.positive_cut,
                p.negative_cut,
                p.gap_cut,
                p.non_resolved_plus,
                p.non_resolved_minus,
                p.modified,
                residual
            );
        }
        let status = if self.already_clean() {
            "already clean"
        } else if self.complete {
            "clean"
        } else {
            "incomplete: pass limit reached"
        };
        let _ = writeln!(s, "status: {status}");
        s
    }
}

/// Repeats classify → find → re-distance → reinitialise → normals (→ completion)
/// until no non-resolved cell remains or `max_passes` modifying passes ran. The
/// final classification is always stored in the packages' interface ids.
pub fn clean<const D: usize>(field: &mut LevelSetField<D>, options: &CleanOptions) -> Result<CleanReport> {
    let mut report = CleanReport::default();
    let mut pass = 0;
    loop {
        pass += 1;
        let mut ids = classify_cells(field, options.epsilon);
        let sets = find_non_resolved(field, &ids);
        ids.mark(&sets);
        let mut record = PassRecord {
            pass,
            zero_cut: ids.count_core(field, InterfaceId::ZERO_CUT),
            positive_cut: ids.count_core(field, InterfaceId::POSITIVE_CUT),
            negative_cut: ids.count_core(field, InterfaceId::NEGATIVE_CUT),
            gap_cut: ids.count_core(field, InterfaceId::GAP_CUT),
            non_resolved_plus: sets.plus.len(),
            non_resolved_minus: sets.minus.len(),
            modified: 0,
            reinit_residual: None,
        };
        let done = sets.is_empty() || pass > options.max_passes;
        if !done {
            record.modified = redistance(field, &ids, &sets, options.d_limit, options.window_radius);
            let outcome = field.reinitialize(options.reinit_iters);
            field.recompute_normals();
            record.reinit_residual = Some(outcome.residual);
            if let Some(settings) = &options.completion {
                confinement::compute_completion(field, settings)?;
            }
        } else {
            for (pkg, flags) in field.packages_mut().iter_mut().zip(ids.ids) {
                pkg.interface_id = flags;
            }
        }
        log::debug!("clean pass {pass}: {record:?}");
        report.passes.push(record);
        if done {
            report.complete = sets.is_empty();
            return Ok(report);
        }
    }
}

#[cfg(test)]
mod tests;
