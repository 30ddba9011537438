//! Dyadic intervals, the ultrametric distance, and level-set geometry.
//!
//! All lengths and measures here are powers of two and finite sums of powers
//! of two, computed exactly in binary floating point. No transcendental
//! function appears in this module, so geometric identities can be asserted
//! at 1e-12 tolerance (and usually hold bit-exactly).

use crate::error::{Error, Result};

/// 2^e as an exact f64 (bit-level construction, valid for normal exponents).
pub(crate) fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e), "pow2 exponent {e} out of range");
    f64::from_bits(((1023 + e) as u64) << 52)
}

/// Half-open dyadic interval `[(k-1)·2^-j, k·2^-j)` at level `j`, position `k ≥ 1`.
///
/// Negative levels give intervals longer than one unit. `D^+` is the family
/// with level `j ≥ 0` (length at most one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub level: i32,
    pub position: u64,
}

impl DyadicInterval {
    pub fn new(level: i32, position: u64) -> Self {
        assert!(position >= 1, "dyadic position is 1-based");
        assert!(
            (-60..=60).contains(&level),
            "level {level} outside the exactly representable range"
        );
        DyadicInterval { level, position }
    }

    /// |I| = 2^-level, exact.
    pub fn length(&self) -> f64 {
        pow2(-self.level)
    }

    pub fn left(&self) -> f64 {
        (self.position - 1) as f64 * self.length()
    }

    pub fn right(&self) -> f64 {
        self.position as f64 * self.length()
    }

    /// Left half: the half where Haar functions are positive.
    pub fn left_half(&self) -> DyadicInterval {
        DyadicInterval::new(self.level + 1, 2 * self.position - 1)
    }

    /// Right half: the half where Haar functions are negative.
    pub fn right_half(&self) -> DyadicInterval {
        DyadicInterval::new(self.level + 1, 2 * self.position)
    }

    /// The unique dyadic interval at `level ≤ self.level` containing this one.
    pub fn ancestor(&self, level: i32) -> DyadicInterval {
        assert!(level <= self.level, "ancestor level must not exceed own level");
        let shift = (self.level - level) as u32;
        DyadicInterval::new(level, ((self.position - 1) >> shift) + 1)
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.left() <= x && x < self.right()
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.ancestor(self.level) == *self
    }

    /// Cell-index span `[start, end)` of this interval on a grid of
    /// `resolution ≥ max(level, 0)`.
    pub fn cell_range(&self, resolution: u32) -> (usize, usize) {
        assert!(resolution as i32 >= self.level, "grid coarser than interval");
        let width = 1usize << (resolution as i64 - self.level as i64) as u32;
        let start = (self.position - 1) as usize * width;
        (start, start + width)
    }
}

/// A point identified with its grid cell `[i·2^-J, (i+1)·2^-J)`.
///
/// `δ` between distinct cells is exact; within a cell it is treated as zero,
/// which is consistent because every integrand used here is constant on cell
/// pairs and vanishes on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub resolution: u32,
    pub cell_index: usize,
}

impl GridPoint {
    pub fn new(resolution: u32, cell_index: usize) -> Self {
        GridPoint { resolution, cell_index }
    }

    /// The cell containing coordinate `x ≥ 0` at the given resolution.
    pub fn from_coordinate(x: f64, resolution: u32) -> Self {
        assert!(x >= 0.0, "domain is the positive half-line");
        GridPoint::new(resolution, (x * pow2(resolution as i32)).floor() as usize)
    }

    pub fn left_endpoint(&self) -> f64 {
        self.cell_index as f64 * pow2(-(self.resolution as i32))
    }

    pub fn midpoint(&self) -> f64 {
        (self.cell_index as f64 + 0.5) * pow2(-(self.resolution as i32))
    }
}

/// Dyadic distance between two cells at a common resolution `J`: zero for the
/// same cell, otherwise the length `2^(p-J)` of the smallest dyadic interval
/// containing both, found from the highest differing bit `p` of the indices.
pub(crate) fn delta_cells(a: usize, b: usize, resolution: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let p = usize::BITS - (a ^ b).leading_zeros(); // bits that must be dropped
    pow2(p as i32 - resolution as i32)
}

/// The dyadic ultrametric δ(x, y): length of the smallest dyadic interval
/// containing both points, zero on the diagonal. Exact (a power of two).
pub fn dyadic_distance(x: GridPoint, y: GridPoint) -> Result<f64> {
    if x.resolution != y.resolution {
        return Err(Error::ResolutionMismatch(x.resolution, y.resolution));
    }
    Ok(delta_cells(x.cell_index, y.cell_index, x.resolution))
}

/// All ordered cell pairs of the level-`j` set Λ_j inside `[0, L)` at grid
/// resolution `J`: for each interval `I` at level `j`, the block
/// `(I⁻ × I⁺) ∪ (I⁺ × I⁻)` where δ equals `2^-j` exactly.
///
/// Empty for `j ≥ J` (no sub-cell resolution). Pairs are disjoint across `j`,
/// and together with the diagonal they cover each unit square.
pub fn level_set_pairs(
    j: u32,
    resolution: u32,
    domain_length: u32,
) -> impl Iterator<Item = (usize, usize)> {
    let (n_intervals, half) = if j < resolution {
        ((domain_length as usize) << j, 1usize << (resolution - j - 1))
    } else {
        (0, 0)
    };
    (0..n_intervals).flat_map(move |m| {
        let start = 2 * half * m;
        let mid = start + half;
        (0..half).flat_map(move |a| {
            (0..half).flat_map(move |b| [(start + a, mid + b), (mid + b, start + a)])
        })
    })
}

/// Area of `B(I) = (I⁻ × I⁺) ∪ (I⁺ × I⁻)`: two squares of side |I|/2,
/// so `|I|²/2` exactly.
pub fn measure_b(i: &DyadicInterval) -> f64 {
    pow2(-2 * i.level - 1)
}

/// Area of `B(Jiv) ∩ C(I)` where `C(I)` is the cross region (pairs with
/// exactly one coordinate in `I`): equals `|I|·2^-j` when `Jiv` is the
/// level-`j` proper ancestor of `I` with `0 ≤ j < level(I)`, else zero.
pub fn measure_b_cap_c(jiv: &DyadicInterval, i: &DyadicInterval) -> f64 {
    if jiv.level < 0 || jiv.level >= i.level || i.ancestor(jiv.level) != *jiv {
        return 0.0;
    }
    pow2(-i.level - jiv.level)
}

/// `∫ δ(x,y)^α dy` over the unit interval containing `x`, for `α > -1`:
/// the level set `{δ(x,·) = 2^-k}` has measure `2^-(k+1)`, so the integral is
/// `Σ_{k≥0} 2^-kα · 2^-(k+1) = 2^α / (2^(1+α) - 1)`.
///
/// The value is independent of `x` by dyadic self-similarity; the argument
/// only fixes which unit cell is meant.
pub fn unit_delta_power_integral(_x: GridPoint, alpha: f64) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(Error::DivergentIntegral(alpha));
    }
    Ok(alpha.exp2() / ((1.0 + alpha).exp2() - 1.0))
}
