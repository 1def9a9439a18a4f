//! Two-level narrow-band level-set field.
//!
//! A coarse Cartesian grid of spacing `l_c` covers the whole domain. Coarse
//! cells within one coarse spacing of the surface are *core*; core cells and
//! their 3^d neighbours are *inner* and own a data package of 4^d fine cells
//! (spacing `l_f = l_c / 4`). Every other cell is far field and refers to one of
//! two shared constants, `+4 l_c` outside and `−4 l_c` inside.
//!
//! Each package keeps the addresses of its 3^d − 1 neighbours, so stencils that
//! reach one fine cell past the package edge resolve through the neighbouring
//! package or the far constant without copying data.

mod build;
mod dump;
pub(crate) mod index;
mod reinit;

pub use dump::write_dump;
pub use reinit::{ReinitOutcome, DEFAULT_REINIT_ITERS, REINIT_TOLERANCE};

use crate::cleaner::InterfaceId;
use crate::geometry::Aabb;
use crate::{Error, Point, Result, Vector};
use index::{ipow, ravel, unravel};

/// Fine cells per package along each axis.
pub const PACKAGE_SIZE: usize = 4;
/// Far-field magnitude in units of `l_c`.
pub const FAR_FIELD_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoarseTag {
    FarPositive,
    FarNegative,
    Inner,
    Core,
}

impl CoarseTag {
    pub fn has_package(self) -> bool {
        matches!(self, CoarseTag::Inner | CoarseTag::Core)
    }
}

/// Where a coarse cell's data lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Address {
    Package(u32),
    FarPositive,
    FarNegative,
}

/// Fine-cell data of one inner coarse cell.
#[derive(Debug, Clone)]
pub struct DataPackage<const D: usize> {
    pub coarse: [i64; D],
    pub core: bool,
    pub phi: Vec<f64>,
    pub normal: Vec<Vector<D>>,
    pub completion: Vec<Vector<D>>,
    pub interface_id: Vec<InterfaceId>,
    /// Addresses of the 3^d coarse cells around (and including) this one,
    /// offsets in `{-1,0,1}^d` with axis 0 fastest.
    pub neighbors: Vec<Address>,
}

impl<const D: usize> DataPackage<D> {
    pub const CELLS: usize = ipow(PACKAGE_SIZE, D);

    /// Global fine index of local cell `local`.
    pub fn fine_index(&self, local: usize) -> [i64; D] {
        let l = unravel::<D>(local, PACKAGE_SIZE);
        std::array::from_fn(|k| self.coarse[k] * PACKAGE_SIZE as i64 + l[k] as i64)
    }
}

/// Lookup result for a fine-cell index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FineCell {
    Stored { package: usize, local: usize },
    Far(f64),
}

#[derive(Debug, Clone)]
pub struct LevelSetField<const D: usize> {
    origin: Point<D>,
    coarse_dims: [usize; D],
    lc: f64,
    lf: f64,
    tags: Vec<CoarseTag>,
    package_of: Vec<u32>,
    far_values: [f64; 2],
    packages: Vec<DataPackage<D>>,
}

const NO_PACKAGE: u32 = u32::MAX;

impl<const D: usize> LevelSetField<D> {
    pub fn origin(&self) -> Point<D> {
        self.origin
    }

    pub fn coarse_dims(&self) -> [usize; D] {
        self.coarse_dims
    }

    pub fn fine_dims(&self) -> [usize; D] {
        self.coarse_dims.map(|n| n * PACKAGE_SIZE)
    }

    pub fn lc(&self) -> f64 {
        self.lc
    }

    pub fn lf(&self) -> f64 {
        self.lf
    }

    pub fn domain(&self) -> Aabb<D> {
        let mut max = self.origin;
        for k in 0..D {
            max[k] += self.coarse_dims[k] as f64 * self.lc;
        }
        Aabb::new(self.origin, max)
    }

    /// The two shared far-field scalars, `[+4 l_c, −4 l_c]`.
    pub fn far_values(&self) -> [f64; 2] {
        self.far_values
    }

    pub fn far_positive(&self) -> f64 {
        self.far_values[0]
    }

    pub fn far_negative(&self) -> f64 {
        self.far_values[1]
    }

    pub fn packages(&self) -> &[DataPackage<D>] {
        &self.packages
    }

    pub fn packages_mut(&mut self) -> &mut [DataPackage<D>] {
        &mut self.packages
    }

    pub fn tags(&self) -> &[CoarseTag] {
        &self.tags
    }

    pub fn coarse_linear(&self, c: [i64; D]) -> Option<usize> {
        let mut lin = 0usize;
        for k in (0..D).rev() {
            if c[k] < 0 || c[k] >= self.coarse_dims[k] as i64 {
                return None;
            }
            lin = lin * self.coarse_dims[k] + c[k] as usize;
        }
        Some(lin)
    }

    pub fn coarse_index(&self, linear: usize) -> [i64; D] {
        let mut rest = linear;
        std::array::from_fn(|k| {
            let v = rest % self.coarse_dims[k];
            rest /= self.coarse_dims[k];
            v as i64
        })
    }

    pub fn tag(&self, c: [i64; D]) -> Option<CoarseTag> {
        self.coarse_linear(c).map(|l| self.tags[l])
    }

    pub fn package_at(&self, c: [i64; D]) -> Option<usize> {
        let l = self.coarse_linear(c)?;
        let p = self.package_of[l];
        (p != NO_PACKAGE).then_some(p as usize)
    }

    pub fn coarse_center(&self, c: [i64; D]) -> Point<D> {
        let mut p = self.origin;
        for k in 0..D {
            p[k] += (c[k] as f64 + 0.5) * self.lc;
        }
        p
    }

    pub fn fine_center(&self, g: [i64; D]) -> Point<D> {
        let mut p = self.origin;
        for k in 0..D {
            p[k] += (g[k] as f64 + 0.5) * self.lf;
        }
        p
    }

    /// Resolves a global fine index. Indices outside the grid resolve like the
    /// nearest coarse cell on the grid boundary.
    pub fn locate(&self, g: [i64; D]) -> FineCell {
        let n = PACKAGE_SIZE as i64;
        let mut c = [0i64; D];
        let mut local = [0usize; D];
        for k in 0..D {
            let ck = g[k].div_euclid(n);
            let clamped = ck.clamp(0, self.coarse_dims[k] as i64 - 1);
            c[k] = clamped;
            local[k] = if ck == clamped {
                g[k].rem_euclid(n) as usize
            } else if ck < clamped {
                0
            } else {
                PACKAGE_SIZE - 1
            };
        }
        let lin = self.coarse_linear(c).expect("clamped index lies on the grid");
        self.resolve(self.address_of(lin), ravel(local, PACKAGE_SIZE))
    }

    fn address_of(&self, coarse_linear: usize) -> Address {
        match self.tags[coarse_linear] {
            CoarseTag::FarPositive => Address::FarPositive,
            CoarseTag::FarNegative => Address::FarNegative,
            _ => Address::Package(self.package_of[coarse_linear]),
        }
    }

    fn resolve(&self, address: Address, local: usize) -> FineCell {
        match address {
            Address::Package(p) => FineCell::Stored {
                package: p as usize,
                local,
            },
            Address::FarPositive => FineCell::Far(self.far_values[0]),
            Address::FarNegative => FineCell::Far(self.far_values[1]),
        }
    }

    /// Resolves a package-relative index in `[-1, 4]^d` through the package's
    /// neighbour addresses (the halo).
    pub fn locate_in_halo(&self, package: usize, rel: [i64; D]) -> FineCell {
        let n = PACKAGE_SIZE as i64;
        let mut slot = [0usize; D];
        let mut local = [0usize; D];
        for k in 0..D {
            let q = rel[k].div_euclid(n);
            debug_assert!((-1..=1).contains(&q), "halo access beyond one package");
            slot[k] = (q + 1) as usize;
            local[k] = rel[k].rem_euclid(n) as usize;
        }
        let address = self.packages[package].neighbors[ravel(slot, 3)];
        self.resolve(address, ravel(local, PACKAGE_SIZE))
    }

    pub fn phi_at(&self, g: [i64; D]) -> f64 {
        self.value_of(self.locate(g))
    }

    pub fn value_of(&self, cell: FineCell) -> f64 {
        match cell {
            FineCell::Stored { package, local } => self.packages[package].phi[local],
            FineCell::Far(v) => v,
        }
    }

    pub fn normal_at(&self, g: [i64; D]) -> Vector<D> {
        match self.locate(g) {
            FineCell::Stored { package, local } => self.packages[package].normal[local],
            FineCell::Far(_) => Vector::zeros(),
        }
    }

    pub fn completion_at(&self, g: [i64; D]) -> Vector<D> {
        match self.locate(g) {
            FineCell::Stored { package, local } => self.packages[package].completion[local],
            FineCell::Far(_) => Vector::zeros(),
        }
    }

    pub fn interface_id_at(&self, g: [i64; D]) -> InterfaceId {
        match self.locate(g) {
            FineCell::Stored { package, local } => self.packages[package].interface_id[local],
            FineCell::Far(_) => InterfaceId::NONE,
        }
    }

    /// Iterates `(package, local, global fine index)` over every stored fine cell.
    pub fn stored_cells(&self) -> impl Iterator<Item = (usize, usize, [i64; D])> + '_ {
        self.packages.iter().enumerate().flat_map(|(p, pkg)| {
            (0..DataPackage::<D>::CELLS).map(move |l| (p, l, pkg.fine_index(l)))
        })
    }

    pub fn stored_fine_cell_count(&self) -> usize {
        self.packages.len() * DataPackage::<D>::CELLS
    }

    pub fn dense_fine_cell_count(&self) -> usize {
        self.fine_dims().iter().product()
    }

    /// Distinct far-field scalars referenced by the field.
    pub fn distinct_far_scalars(&self) -> usize {
        let mut seen: Vec<u64> = Vec::new();
        for tag in &self.tags {
            let v = match tag {
                CoarseTag::FarPositive => self.far_values[0],
                CoarseTag::FarNegative => self.far_values[1],
                _ => continue,
            };
            if !seen.contains(&v.to_bits()) {
                seen.push(v.to_bits());
            }
        }
        seen.len()
    }

    fn check_in_domain(&self, p: &Point<D>) -> Result<()> {
        if self.domain().contains_point(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(p.as_slice().to_vec()))
        }
    }

    fn coarse_of_point(&self, p: &Point<D>) -> [i64; D] {
        std::array::from_fn(|k| {
            (((p[k] - self.origin[k]) / self.lc).floor() as i64).clamp(0, self.coarse_dims[k] as i64 - 1)
        })
    }

    /// Visits the 2^d fine cells of the multilinear stencil around `p` with their weights.
    fn for_each_stencil_cell(&self, p: &Point<D>, mut f: impl FnMut([i64; D], f64)) {
        let mut base = [0i64; D];
        let mut frac = [0.0; D];
        for k in 0..D {
            let s = (p[k] - self.origin[k]) / self.lf - 0.5;
            let b = s.floor();
            base[k] = b as i64;
            frac[k] = s - b;
        }
        for corner in 0..(1usize << D) {
            let mut w = 1.0;
            let mut g = base;
            for k in 0..D {
                if corner >> k & 1 == 1 {
                    g[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            f(g, w);
        }
    }

    /// Multilinear interpolation of φ at `p`. Far-field cells return their shared value.
    pub fn probe_phi(&self, p: &Point<D>) -> Result<f64> {
        self.check_in_domain(p)?;
        match self.tag(self.coarse_of_point(p)).expect("point is on the grid") {
            CoarseTag::FarPositive => return Ok(self.far_values[0]),
            CoarseTag::FarNegative => return Ok(self.far_values[1]),
            _ => {}
        }
        let mut acc = 0.0;
        self.for_each_stencil_cell(p, |g, w| acc += w * self.phi_at(g));
        Ok(acc)
    }

    /// Interpolated unit normal `∇φ/|∇φ|`, renormalised after interpolation.
    pub fn probe_normal(&self, p: &Point<D>) -> Result<Vector<D>> {
        self.check_in_domain(p)?;
        let mut acc = Vector::<D>::zeros();
        self.for_each_stencil_cell(p, |g, w| acc += self.normal_at(g) * w);
        let n = acc.norm();
        if n < 1e-8 {
            return Err(Error::DegenerateNormal(n));
        }
        Ok(acc / n)
    }

    /// Multilinear interpolation of the stored kernel-completion vectors.
    pub fn probe_completion(&self, p: &Point<D>) -> Vector<D> {
        let mut acc = Vector::<D>::zeros();
        if !self.domain().contains_point(p) {
            return acc;
        }
        self.for_each_stencil_cell(p, |g, w| {
            if w != 0.0 {
                acc += self.completion_at(g) * w;
            }
        });
        acc
    }

    /// Overwrites φ in every package with `f(cell centre)`. Far constants are kept.
    pub fn fill_phi(&mut self, f: impl Fn(&Point<D>) -> f64 + Sync) {
        use rayon::prelude::*;
        let origin = self.origin;
        let lf = self.lf;
        self.packages.par_iter_mut().for_each(|pkg| {
            for l in 0..DataPackage::<D>::CELLS {
                let g = pkg.fine_index(l);
                let mut p = origin;
                for k in 0..D {
                    p[k] += (g[k] as f64 + 0.5) * lf;
                }
                pkg.phi[l] = f(&p);
            }
        });
    }

    /// Gradient of φ at fine cell `g` by central differences at spacing `l_f`,
    /// falling back to one-sided differences where a neighbour is far field.
    pub fn gradient_at(&self, g: [i64; D]) -> Vector<D> {
        let center = self.phi_at(g);
        let mut grad = Vector::<D>::zeros();
        for k in 0..D {
            let plus = self.locate(index::add(g, index::unit(k, 1)));
            let minus = self.locate(index::add(g, index::unit(k, -1)));
            let stored = |c: FineCell| matches!(c, FineCell::Stored { .. });
            grad[k] = match (stored(plus), stored(minus)) {
                (true, true) => (self.value_of(plus) - self.value_of(minus)) / (2.0 * self.lf),
                (true, false) => (self.value_of(plus) - center) / self.lf,
                (false, true) => (center - self.value_of(minus)) / self.lf,
                (false, false) => 0.0,
            };
        }
        grad
    }

    /// Recomputes all normals from φ. Where `|∇φ| < 1e-8` the previously stored
    /// normal is kept.
    pub fn recompute_normals(&mut self) {
        self.compute_normals(|_, previous| previous);
    }

    pub(crate) fn compute_normals(&mut self, fallback: impl Fn(&Point<D>, Vector<D>) -> Vector<D> + Sync) {
        use rayon::prelude::*;
        let normals: Vec<Vec<Vector<D>>> = (0..self.packages.len())
            .into_par_iter()
            .map(|p| {
                let pkg = &self.packages[p];
                (0..DataPackage::<D>::CELLS)
                    .map(|l| {
                        let g = pkg.fine_index(l);
                        let grad = self.gradient_at(g);
                        let n = grad.norm();
                        if n >= 1e-8 {
                            grad / n
                        } else {
                            fallback(&self.fine_center(g), pkg.normal[l])
                        }
                    })
                    .collect()
            })
            .collect();
        for (pkg, n) in self.packages.iter_mut().zip(normals) {
            pkg.normal = n;
        }
    }

    /// Central-difference `|∇φ|` at a fine cell, or `None` when any neighbour of the
    /// stencil is far field.
    pub fn central_gradient_norm(&self, g: [i64; D]) -> Option<f64> {
        let mut g2 = 0.0;
        for k in 0..D {
            let plus = self.locate(index::add(g, index::unit(k, 1)));
            let minus = self.locate(index::add(g, index::unit(k, -1)));
            match (plus, minus) {
                (FineCell::Stored { .. }, FineCell::Stored { .. }) => {
                    let d = (self.value_of(plus) - self.value_of(minus)) / (2.0 * self.lf);
                    g2 += d * d;
                }
                _ => return None,
            }
        }
        Some(g2.sqrt())
    }

    /// Largest `||∇φ| − 1|` over stored cells whose central stencil lies in the band.
    pub fn eikonal_residual(&self) -> f64 {
        use rayon::prelude::*;
        (0..self.packages.len())
            .into_par_iter()
            .map(|p| {
                let pkg = &self.packages[p];
                (0..DataPackage::<D>::CELLS)
                    .filter_map(|l| self.central_gradient_norm(pkg.fine_index(l)))
                    .map(|n| (n - 1.0).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Fine cell whose centre is nearest to `p` (may lie outside the stored band).
    pub fn nearest_fine_index(&self, p: &Point<D>) -> [i64; D] {
        std::array::from_fn(|k| ((p[k] - self.origin[k]) / self.lf).floor() as i64)
    }
}
