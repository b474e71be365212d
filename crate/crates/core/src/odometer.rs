//! The binary odometer on `[0, 1)`: the map `T` that adds one to the reversed
//! binary expansion, its level intervals `I_j^i`, and the data-starving sets.
//!
//! `T` rewrites only the bits up to the first one, so points are handled lazily.
//! `T^{-1}` moves `I_j^i` to `I_{j+1}^i`, which turns preimage and disjointness
//! questions into integer arithmetic on interval indices.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::{BinaryPoint, DyadicRational, DyadicSet, Interval, RationalSet};
use crate::partition::{CellLocator, Partition, PartitionSchedule};

/// Deepest level accepted by [`disjointness_check`] and [`preimage`].
pub const MAX_ALIGNED_LEVEL: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Index of the first one bit of `r`.
pub fn tau(r: &BinaryPoint) -> Result<usize> {
    let mut i = 1;
    loop {
        if r.zero_from(i) {
            return Err(Error::ExceptionalPoint(format!(
                "no one bit at or after position {i}"
            )));
        }
        if r.bit(i)? {
            return Ok(i);
        }
        i += 1;
    }
}

fn first_zero(r: &BinaryPoint) -> Result<usize> {
    let mut i = 1;
    while r.bit(i)? {
        i += 1;
    }
    Ok(i)
}

/// One step of `T` (bits before `τ` become one, bit `τ` becomes zero) or of its inverse
/// (the first zero bit becomes one, earlier bits become zero).
pub fn apply_t(r: &BinaryPoint, direction: Direction) -> Result<BinaryPoint> {
    let (pos, fill) = match direction {
        Direction::Forward => (tau(r)?, true),
        Direction::Inverse => (first_zero(r)?, false),
    };
    let mut out = r.materialize(pos)?;
    let mut bits = vec![fill; pos];
    bits[pos - 1] = !fill;
    out.overwrite_prefix(&bits);
    Ok(out)
}

/// `T^k r` for any integer `k`.
pub fn apply_t_power(r: &BinaryPoint, k: i64) -> Result<BinaryPoint> {
    let direction = if k >= 0 {
        Direction::Forward
    } else {
        Direction::Inverse
    };
    let mut x = r.clone();
    for _ in 0..k.unsigned_abs() {
        x = apply_t(&x, direction)?;
    }
    Ok(x)
}

/// The low `len` bits of `j`, reversed.
pub fn reverse_bits(j: u64, len: u32) -> u64 {
    if len == 0 {
        return 0;
    }
    j.reverse_bits() >> (64 - len)
}

/// `I_j^i`: points whose first `i` bits are `j_1, ..., j_i`, where `j_1` is the least
/// significant bit of `j`.
pub fn interval_i(level: u32, j: u64) -> Result<DyadicSet> {
    if level == 0 || level > 63 {
        return Err(Error::IndexError(format!("level {level} outside 1..=63")));
    }
    if j >= 1u64 << level {
        return Err(Error::IndexError(format!("index {j} outside 0..2^{level}")));
    }
    let c = reverse_bits(j, level);
    let iv = Interval::new(
        DyadicRational::new(c, level),
        DyadicRational::new(c + 1, level),
    )?;
    Ok(DyadicSet::from_interval(iv))
}

/// Exact image of `I_j^i` under `T`, for `j >= 1`, computed by moving its lower endpoint.
///
/// All points of the interval share the first `i` bits and have `τ <= i`, so `T` shifts
/// the whole interval rigidly.
pub fn image_of_interval(level: u32, j: u64) -> Result<DyadicSet> {
    if j == 0 {
        return Err(Error::IndexError(
            "T does not map I_0 onto a single level interval".into(),
        ));
    }
    let iv = interval_i(level, j)?;
    let lower = BinaryPoint::from_dyadic(iv.intervals()[0].lower(), level as usize + 1)?;
    let moved = apply_t(&lower, Direction::Forward)?.truncate(level as usize)?;
    let upper = &moved + &DyadicRational::pow2_neg(level);
    Ok(DyadicSet::from_interval(Interval::new(moved, upper)?))
}

/// The level `k` and index within it of `B_n`.
pub fn b_coordinates(n: u64) -> Result<(u32, u64)> {
    if n == 0 {
        return Err(Error::IndexError("B_n is defined for n >= 1".into()));
    }
    if n == 1 {
        return Ok((1, 0));
    }
    // unique k with 2^{k-2} < n <= 2^{k-1}
    let k = 64 - (n - 1).leading_zeros() + 1;
    let l = n - (1u64 << (k - 2));
    Ok((k, (1u64 << (k - 1)) - 2 * l))
}

/// `B_1 = I_0^1` and `B_{2^{k-2}+l} = I^k_{2^{k-1}-2l}` for `1 <= l <= 2^{k-2}`.
pub fn build_b(n: u64) -> Result<DyadicSet> {
    let (k, j) = b_coordinates(n)?;
    interval_i(k, j)
}

/// Union of `B_l` over `2^{k-2} < l <= 2^{k-1}`; the points with `r_1 = r_k = 0`.
pub fn build_c(k: u32) -> Result<DyadicSet> {
    if !(2..=MAX_ALIGNED_LEVEL).contains(&k) {
        return Err(Error::IndexError(format!("C_k needs 2 <= k <= {MAX_ALIGNED_LEVEL}")));
    }
    let mut out = DyadicSet::empty(());
    for l in (1u64 << (k - 2)) + 1..=(1u64 << (k - 1)) {
        out = out.union(&build_b(l)?)?;
    }
    Ok(out)
}

/// Level-`L` cell indices `j` covered by `set`, where `L` is the deepest endpoint exponent.
fn aligned_indices(set: &DyadicSet) -> Result<(u32, Vec<u64>)> {
    let level = set
        .intervals()
        .iter()
        .flat_map(|iv| [iv.lower().exponent(), iv.upper().exponent()])
        .max()
        .unwrap_or(0)
        .max(1);
    if level > MAX_ALIGNED_LEVEL {
        return Err(Error::AlignmentError(format!(
            "set needs level {level} intervals, above {MAX_ALIGNED_LEVEL}"
        )));
    }
    let mut out = Vec::new();
    for iv in set.intervals() {
        let lo = cell_number(iv.lower(), level)?;
        let hi = cell_number(iv.upper(), level)?;
        out.extend((lo..hi).map(|c| reverse_bits(c, level)));
    }
    Ok((level, out))
}

fn cell_number(x: &DyadicRational, level: u32) -> Result<u64> {
    x.scaled_numerator(level)
        .to_u64()
        .ok_or_else(|| Error::AlignmentError(format!("endpoint {x} out of range")))
}

fn from_indices(level: u32, indices: impl IntoIterator<Item = u64>) -> Result<DyadicSet> {
    let intervals = indices
        .into_iter()
        .map(|j| {
            let c = reverse_bits(j, level);
            Interval::new(
                DyadicRational::new(c, level),
                DyadicRational::new(c + 1, level),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DyadicSet::from_intervals((), intervals)
}

/// `T^{-m} A` for a set aligned to level intervals.
pub fn preimage(set: &DyadicSet, m: u64) -> Result<DyadicSet> {
    let (level, cells) = aligned_indices(set)?;
    let mask = (1u64 << level) - 1;
    from_indices(level, cells.into_iter().map(|j| (j + m) & mask))
}

/// True iff `T^0 A, T^{-1} A, ..., T^{-n} A` are pairwise disjoint.
pub fn disjointness_check(set: &DyadicSet, n: u64) -> Result<bool> {
    let (level, cells) = aligned_indices(set)?;
    let size = 1u64 << level;
    if cells.is_empty() {
        return Ok(true);
    }
    if (n + 1).saturating_mul(cells.len() as u64) > size {
        return Ok(false);
    }
    let mut seen = HashSet::with_capacity(cells.len() * (n as usize + 1));
    for m in 0..=n {
        for &j in &cells {
            if !seen.insert((j + m) % size) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Grid of width `1/q(n)` split by `B_n` and its complement.
pub fn build_partition_thm3(
    n: u64,
    schedule: &PartitionSchedule,
) -> Result<Partition<num_rational::BigRational>> {
    let b: RationalSet = build_b(n)?.to_rational_set();
    Partition::grid_split(n, schedule.q(n)?, &b)
}

/// Cell lookup for [`build_partition_thm3`] that reads bits instead of comparing rationals.
///
/// Returns the same cell index as the generic partition.
#[derive(Clone, Debug)]
pub struct Thm3Locator {
    q: u64,
    level: u32,
    prefix: u64,
}

impl Thm3Locator {
    pub fn new(n: u64, schedule: &PartitionSchedule) -> Result<Self> {
        let (level, j) = b_coordinates(n)?;
        Ok(Thm3Locator {
            q: schedule.q(n)?,
            level,
            prefix: reverse_bits(j, level),
        })
    }

    pub fn in_b(&self, p: &BinaryPoint) -> Result<bool> {
        let mut c = 0u64;
        for i in 1..=self.level as usize {
            c = (c << 1) | u64::from(p.bit(i)?);
        }
        Ok(c == self.prefix)
    }

    /// `floor(q·x)`, exact.
    pub fn grid_index(&self, p: &BinaryPoint) -> Result<u64> {
        let bits = 64.min(p.cap()) as u32;
        let t = p.truncate(bits as usize)?.scaled_numerator(bits).to_u128().unwrap_or(0);
        let q = self.q as u128;
        // x lies in [t, t+1) / 2^bits
        let lo = (t * q) >> bits;
        let hi = ((t + 1) * q - 1) >> bits;
        if lo == hi {
            return Ok(lo as u64);
        }
        let boundary = num_rational::BigRational::new(BigInt::from(hi as u64), BigInt::from(self.q));
        Ok(match p.cmp_rational(&boundary)? {
            std::cmp::Ordering::Less => lo as u64,
            _ => hi as u64,
        })
    }
}

impl CellLocator<BinaryPoint> for Thm3Locator {
    fn cell_count(&self) -> usize {
        2 * self.q as usize
    }

    fn locate_cell(&self, p: &BinaryPoint) -> Result<usize> {
        let j = self.grid_index(p)? as usize;
        Ok(2 * j + usize::from(!self.in_b(p)?))
    }
}

/// The process `X_i(ω) = T^{i+1} ω`.
#[derive(Clone, Debug)]
pub struct OdometerProcess {
    pub omega: BinaryPoint,
    pub horizon: usize,
}

impl OdometerProcess {
    pub fn new(omega: BinaryPoint, horizon: usize) -> Self {
        OdometerProcess { omega, horizon }
    }

    pub fn value(&self, i: i64) -> Result<BinaryPoint> {
        if i.unsigned_abs() as usize > self.horizon + 1 {
            return Err(Error::IndexError(format!(
                "index {i} beyond horizon {}",
                self.horizon
            )));
        }
        apply_t_power(&self.omega, i + 1)
    }

    /// `X_{-n}, ..., X_{-1}` in time order.
    pub fn past(&self, n: usize) -> Result<Vec<BinaryPoint>> {
        sample_odometer(&self.omega, -(n as i64), -1)
    }
}

/// `X_from, ..., X_to` with `X_i = T^{i+1} ω`.
pub fn sample_odometer(omega: &BinaryPoint, from: i64, to: i64) -> Result<Vec<BinaryPoint>> {
    if from > to {
        return Err(Error::IndexError(format!("empty range {from}..={to}")));
    }
    let mut x = apply_t_power(omega, from + 1)?;
    let mut out = Vec::with_capacity((to - from + 1) as usize);
    for _ in from..to {
        let next = apply_t(&x, Direction::Forward)?;
        out.push(x);
        x = next;
    }
    out.push(x);
    Ok(out)
}
