use rayon::prelude::*;

use super::index::{add, offsets, ravel};
use super::{Address, CoarseTag, DataPackage, LevelSetField, FAR_FIELD_FACTOR, NO_PACKAGE, PACKAGE_SIZE};
use crate::cleaner::InterfaceId;
use crate::geometry::{Aabb, Sign, Surface};
use crate::{Error, Point, Result, Vector};

impl<const D: usize> LevelSetField<D> {
    /// Default domain: the geometry's bounding box padded by `4 l_c` per side.
    pub fn default_domain<S: Surface<D> + ?Sized>(geom: &S, lc: f64) -> Aabb<D> {
        geom.bbox().inflate(FAR_FIELD_FACTOR * lc)
    }

    /// Builds the field for `geom` on `domain` with coarse spacing `lc`.
    ///
    /// Coarse cells whose centre lies within `lc` of the surface become core;
    /// core cells dilated by one coarse cell become inner and receive packages.
    /// All other cells are tagged far by the containment of their centre.
    pub fn build<S: Surface<D> + ?Sized>(geom: &S, domain: Aabb<D>, lc: f64) -> Result<Self> {
        if !(lc.is_finite() && lc > 0.0) {
            return Err(Error::Configuration(format!("coarse spacing must be positive, got {lc}")));
        }
        let required = geom.bbox().inflate(FAR_FIELD_FACTOR * lc - 1e-9 * lc);
        if !domain.contains_box(&required) {
            return Err(Error::Configuration(format!(
                "domain {:?}..{:?} must contain the geometry bounds padded by 4·l_c = {}",
                domain.min.as_slice(),
                domain.max.as_slice(),
                FAR_FIELD_FACTOR * lc
            )));
        }

        let extent = domain.extent();
        let coarse_dims: [usize; D] =
            std::array::from_fn(|k| ((extent[k] / lc - 1e-9).ceil() as usize).max(1));
        let total: usize = coarse_dims.iter().product();
        let mut field = Self {
            origin: domain.min,
            coarse_dims,
            lc,
            lf: lc / PACKAGE_SIZE as f64,
            tags: vec![CoarseTag::FarPositive; total],
            package_of: vec![NO_PACKAGE; total],
            far_values: [FAR_FIELD_FACTOR * lc, -FAR_FIELD_FACTOR * lc],
            packages: Vec::new(),
        };

        let bbox = geom.bbox();
        let core: Vec<bool> = (0..total)
            .into_par_iter()
            .map(|lin| {
                let c = field.coarse_center(field.coarse_index(lin));
                bbox.distance_squared(&c) <= lc * lc && geom.closest_point(&c).0 <= lc
            })
            .collect();
        if !core.contains(&true) {
            return Err(Error::EmptyBand);
        }

        let tags: Vec<CoarseTag> = (0..total)
            .into_par_iter()
            .map(|lin| {
                if core[lin] {
                    return CoarseTag::Core;
                }
                let c = field.coarse_index(lin);
                let near_core = offsets::<D>(-1, 1).any(|o| {
                    field.coarse_linear(add(c, o)).is_some_and(|n| core[n])
                });
                if near_core {
                    return CoarseTag::Inner;
                }
                let center = field.coarse_center(c);
                if !bbox.contains_point(&center) {
                    return CoarseTag::FarPositive;
                }
                match geom.contains(&center) {
                    Sign::Inside => CoarseTag::FarNegative,
                    Sign::Outside => CoarseTag::FarPositive,
                }
            })
            .collect();
        field.tags = tags;

        let mut packages = Vec::new();
        for lin in 0..total {
            if field.tags[lin].has_package() {
                field.package_of[lin] = packages.len() as u32;
                packages.push(lin);
            }
        }
        let cells = DataPackage::<D>::CELLS;
        let far_values = field.far_values;
        field.packages = packages
            .par_iter()
            .map(|&lin| {
                let coarse = field.coarse_index(lin);
                let neighbors = offsets::<D>(-1, 1)
                    .map(|o| {
                        let n = add(coarse, o);
                        match field.coarse_linear(n) {
                            Some(nl) => field.address_of(nl),
                            None => Address::FarPositive,
                        }
                    })
                    .collect();
                let mut pkg = DataPackage {
                    coarse,
                    core: field.tags[lin] == CoarseTag::Core,
                    phi: vec![0.0; cells],
                    normal: vec![Vector::zeros(); cells],
                    completion: vec![Vector::zeros(); cells],
                    interface_id: vec![InterfaceId::NONE; cells],
                    neighbors,
                };
                for l in 0..cells {
                    let p = field.fine_center(pkg.fine_index(l));
                    let (d, _) = geom.closest_point(&p);
                    let signed = d * geom.contains(&p).as_f64();
                    pkg.phi[l] = signed.clamp(far_values[1], far_values[0]);
                }
                pkg
            })
            .collect();

        field.compute_normals(|p, _| nearest_surface_direction(geom, p));
        Ok(field)
    }
}

/// Unit vector from the nearest surface point towards `p` (outward when `p` is
/// outside), used where the discrete gradient vanishes.
fn nearest_surface_direction<const D: usize, S: Surface<D> + ?Sized>(geom: &S, p: &Point<D>) -> Vector<D> {
    let (d, q) = geom.closest_point(p);
    let dir = (p - q) * geom.contains(p).as_f64();
    if d > 0.0 && dir.norm() > 0.0 {
        dir.normalize()
    } else {
        let mut e = Vector::<D>::zeros();
        e[0] = 1.0;
        e
    }
}

impl<const D: usize> LevelSetField<D> {
    /// Checks that every halo address resolves to the same data as a global lookup.
    pub fn halo_consistent(&self) -> bool {
        let n = PACKAGE_SIZE as i64;
        self.packages.iter().enumerate().all(|(p, pkg)| {
            offsets::<D>(-1, n).all(|rel| {
                let g: [i64; D] = std::array::from_fn(|k| pkg.coarse[k] * n + rel[k]);
                let via_halo = self.value_of(self.locate_in_halo(p, rel));
                via_halo.to_bits() == self.phi_at(g).to_bits()
            })
        })
    }

    /// Checks the tag invariants: inner cells are exactly core cells dilated by one.
    pub fn tags_consistent(&self) -> bool {
        (0..self.tags.len()).all(|lin| {
            let c = self.coarse_index(lin);
            let near_core = offsets::<D>(-1, 1).any(|o| {
                self.coarse_linear(add(c, o))
                    .is_some_and(|n| self.tags[n] == CoarseTag::Core)
            });
            let has_pkg = self.package_of[lin] != NO_PACKAGE;
            self.tags[lin].has_package() == near_core && has_pkg == near_core
        }) && self.packages.iter().all(|pkg| {
            let lin = self.coarse_linear(pkg.coarse).expect("package on grid");
            pkg.core == (self.tags[lin] == CoarseTag::Core)
                && pkg.neighbors[ravel([1usize; D], 3)] == self.address_of(lin)
        })
    }
}
