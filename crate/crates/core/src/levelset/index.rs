//! Multi-index helpers for `D`-dimensional Cartesian blocks.

pub(crate) type Index<const D: usize> = [i64; D];

pub(crate) const fn ipow(base: usize, exp: usize) -> usize {
    let mut r = 1;
    let mut k = 0;
    while k < exp {
        r *= base;
        k += 1;
    }
    r
}

/// Decodes a linear index of a cube block of side `extent` (axis 0 fastest).
pub(crate) fn unravel<const D: usize>(mut linear: usize, extent: usize) -> [usize; D] {
    let mut out = [0; D];
    for o in out.iter_mut() {
        *o = linear % extent;
        linear /= extent;
    }
    out
}

pub(crate) fn ravel<const D: usize>(idx: [usize; D], extent: usize) -> usize {
    idx.iter().rev().fold(0, |acc, &i| acc * extent + i)
}

/// All offsets in `{lo..=hi}^D`, axis 0 fastest.
pub(crate) fn offsets<const D: usize>(lo: i64, hi: i64) -> impl Iterator<Item = Index<D>> {
    let extent = (hi - lo + 1) as usize;
    (0..ipow(extent, D)).map(move |l| unravel::<D>(l, extent).map(|c| c as i64 + lo))
}

pub(crate) fn add<const D: usize>(a: Index<D>, b: Index<D>) -> Index<D> {
    std::array::from_fn(|k| a[k] + b[k])
}

pub(crate) fn unit<const D: usize>(axis: usize, step: i64) -> Index<D> {
    std::array::from_fn(|k| if k == axis { step } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ravel_roundtrip() {
        for l in 0..64 {
            assert_eq!(ravel(unravel::<3>(l, 4), 4), l);
        }
        assert_eq!(offsets::<2>(-1, 1).count(), 9);
        assert_eq!(offsets::<2>(-1, 1).nth(4), Some([0, 0]));
    }
}
