use std::fmt;

/// Per-fine-cell classification flags. Each flag is independent.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct InterfaceId(u8);

impl InterfaceId {
    pub const NONE: Self = Self(0);
    /// Corner values straddle the zero level.
    pub const ZERO_CUT: Self = Self(1);
    /// Corner values straddle the `+ε` auxiliary level.
    pub const POSITIVE_CUT: Self = Self(1 << 1);
    /// Corner values straddle the `−ε` auxiliary level.
    pub const NEGATIVE_CUT: Self = Self(1 << 2);
    /// Centre value strictly inside `(−ε, 0)` or `(0, ε)` without a zero cut.
    pub const GAP_CUT: Self = Self(1 << 3);
    /// Zero/gap cut with no positive-cut cell in its neighbourhood.
    pub const NON_RESOLVED_PLUS: Self = Self(1 << 4);
    /// Zero/gap cut with no negative-cut cell in its neighbourhood.
    pub const NON_RESOLVED_MINUS: Self = Self(1 << 5);

    const CLASSIFICATION: u8 = 0b1111;

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Self {
        Self(bits & 0b11_1111)
    }

    pub fn contains(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn insert(&mut self, other: Self) {
        self.0 |= other.0;
    }

    pub fn remove(&mut self, other: Self) {
        self.0 &= !other.0;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Only the four cut flags, dropping the non-resolved markers.
    pub fn cuts(self) -> Self {
        Self(self.0 & Self::CLASSIFICATION)
    }
}

impl std::ops::BitOr for InterfaceId {
    type Output = Self;

    fn bitor(self, rhs: Self) -> Self {
        Self(self.0 | rhs.0)
    }
}

impl fmt::Debug for InterfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 6] = ["zero", "pos", "neg", "gap", "non+", "non-"];
        let set: Vec<&str> = NAMES
            .iter()
            .enumerate()
            .filter(|(k, _)| self.0 & (1 << k) != 0)
            .map(|(_, n)| *n)
            .collect();
        write!(f, "InterfaceId[{}]", set.join("|"))
    }
}
