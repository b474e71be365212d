//! Irrational rotations `x ↦ x + α mod 1` with `α` in a real quadratic field,
//! constructive Rohlin towers, and exact L1 errors of piecewise-constant estimates.
//!
//! The tower is a Kakutani skyscraper over `Y = [0, ‖q_m α‖)`: every point of `Y`
//! returns after one of a few times, each column of the skyscraper is cut into blocks
//! of height `N`, and the base set `S` is the union of the block tops, so that
//! `S, T^{-1}S, ..., T^{-N+1}S` run down through each block.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{qr_compare, AlgebraicSet, Interval, QuadraticReal};
use crate::partition::{Partition, PartitionSchedule};

/// Largest first-return time the tower construction will sweep through.
pub const MAX_RETURN_TIME: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct RotationSystem {
    alpha: QuadraticReal,
}

impl Default for RotationSystem {
    /// `α = √2 − 1`.
    fn default() -> Self {
        Self::new(QuadraticReal::from_ratios((-1, 1), (1, 1), 2).expect("2 is square-free"))
            .expect("√2 − 1 is irrational")
    }
}

impl RotationSystem {
    pub fn new(alpha: QuadraticReal) -> Result<Self> {
        if alpha.is_rational() {
            return Err(Error::NotIrrational);
        }
        if alpha.signum() != Ordering::Greater
            || alpha.add_rational(&-BigRational::one()).signum() != Ordering::Less
        {
            return Err(Error::IndexError(format!("rotation number {alpha} is outside (0, 1)")));
        }
        Ok(RotationSystem { alpha })
    }

    /// `α = a + b√d` from integer ratios given as `(numerator, denominator)`.
    pub fn from_parts(d: u64, a: (i64, i64), b: (i64, i64)) -> Result<Self> {
        Self::new(QuadraticReal::from_ratios(a, b, d)?)
    }

    pub fn alpha(&self) -> &QuadraticReal {
        &self.alpha
    }

    pub fn d(&self) -> u64 {
        self.alpha.d()
    }

    /// `T^k x = x + kα mod 1`.
    pub fn rotate(&self, x: &QuadraticReal, k: i64) -> Result<QuadraticReal> {
        let shift = self.alpha.scale(&BigRational::from_integer(k.into()));
        Ok(x.try_add(&shift)?.fract())
    }

    /// Image `T^k A` of a set.
    pub fn rotate_set(&self, set: &AlgebraicSet, k: i64) -> Result<AlgebraicSet> {
        let d = self.d();
        let one = QuadraticReal::one(d);
        let mut pairs = Vec::with_capacity(set.intervals().len() + 1);
        for iv in set.intervals() {
            let lo = self.rotate(iv.lower(), k)?;
            let hi = lo.try_add(&iv.length()?)?;
            if qr_compare(&hi, &one)? == Ordering::Greater {
                pairs.push((lo, one.clone()));
                pairs.push((QuadraticReal::zero(d), hi.try_sub(&one)?));
            } else {
                pairs.push((lo, hi));
            }
        }
        AlgebraicSet::from_pairs(d, pairs)
    }

    /// Preimage `T^{-k} A`.
    pub fn preimage_set(&self, set: &AlgebraicSet, k: i64) -> Result<AlgebraicSet> {
        self.rotate_set(set, -k)
    }
}

/// The first `m` continued-fraction convergents `p_k / q_k` of `α`.
pub fn cf_convergents(alpha: &QuadraticReal, m: usize) -> Result<Vec<(BigInt, BigInt)>> {
    if alpha.is_rational() {
        return Err(Error::NotIrrational);
    }
    let (mut p1, mut p2) = (BigInt::one(), BigInt::zero());
    let (mut q1, mut q2) = (BigInt::zero(), BigInt::one());
    let mut x = alpha.clone();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let a = x.floor();
        let p = &a * &p1 + &p2;
        let q = &a * &q1 + &q2;
        out.push((p.clone(), q.clone()));
        (p2, p1) = (p1, p);
        (q2, q1) = (q1, q);
        x = x
            .add_rational(&-BigRational::from_integer(a))
            .recip()
            .ok_or(Error::NotIrrational)?;
    }
    Ok(out)
}

/// `‖q α‖`, the distance from `qα` to the nearest integer.
pub fn distance_to_integer(alpha: &QuadraticReal, q: &BigInt) -> QuadraticReal {
    let x = alpha.scale(&BigRational::from_integer(q.clone()));
    let f = x.fract();
    let g = QuadraticReal::one(alpha.d()).try_sub(&f).expect("same field");
    if qr_compare(&f, &g).expect("same field") == Ordering::Greater {
        g
    } else {
        f
    }
}

/// A set `S` whose preimages `S, T^{-1}S, ..., T^{-(N-1)}S` are pairwise disjoint.
#[derive(Clone, Debug)]
pub struct RohlinTower {
    system: RotationSystem,
    base: AlgebraicSet,
    height: usize,
    coverage: QuadraticReal,
}

impl RohlinTower {
    /// Wraps a candidate base after checking disjointness of its `height` preimages exactly.
    pub fn from_base(system: RotationSystem, base: AlgebraicSet, height: usize) -> Result<Self> {
        if height == 0 {
            return Err(Error::HeightError {
                height,
                required: 1,
            });
        }
        let levels = (0..height)
            .map(|i| system.preimage_set(&base, i as i64))
            .collect::<Result<Vec<_>>>()?;
        check_disjoint(&levels)?;
        let coverage = base
            .measure()?
            .scale(&BigRational::from_integer(BigInt::from(height)));
        Ok(RohlinTower {
            system,
            base,
            height,
            coverage,
        })
    }

    pub fn system(&self) -> &RotationSystem {
        &self.system
    }

    /// The set `S`.
    pub fn base(&self) -> &AlgebraicSet {
        &self.base
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `N · μ(S)`, the measure of the union of the levels.
    pub fn coverage(&self) -> &QuadraticReal {
        &self.coverage
    }

    /// `T^{-i} S`.
    pub fn level(&self, i: usize) -> Result<AlgebraicSet> {
        self.system.preimage_set(&self.base, i as i64)
    }

    /// `∪_{i<count} T^{-i} S`.
    pub fn union_of_levels(&self, count: usize) -> Result<AlgebraicSet> {
        if count > self.height {
            return Err(Error::HeightError {
                height: self.height,
                required: count,
            });
        }
        let mut out = AlgebraicSet::empty(self.system.d());
        for i in 0..count {
            out = out.union(&self.level(i)?)?;
        }
        Ok(out)
    }
}

/// Exact pairwise disjointness by sorting every interval of every set.
fn check_disjoint(sets: &[AlgebraicSet]) -> Result<()> {
    let mut all: Vec<&Interval<QuadraticReal>> = sets.iter().flat_map(|s| s.intervals()).collect();
    let mut err = None;
    all.sort_by(|a, b| {
        qr_compare(a.lower(), b.lower()).unwrap_or_else(|e| {
            err.get_or_insert(e);
            Ordering::Equal
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    for pair in all.windows(2) {
        if qr_compare(pair[0].upper(), pair[1].lower())? == Ordering::Greater {
            return Err(Error::Overlap(format!("{:?} meets {:?}", pair[0], pair[1])));
        }
    }
    Ok(())
}

/// Builds a tower of height `n_height` covering at least `1 − epsilon`.
pub fn build_tower(system: &RotationSystem, n_height: usize, epsilon: f64) -> Result<RohlinTower> {
    if n_height == 0 || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ConfigError(format!(
            "tower needs N >= 1 and 0 < epsilon < 1, got N = {n_height}, epsilon = {epsilon}"
        )));
    }
    let d = system.d();
    if n_height == 1 {
        return RohlinTower::from_base(system.clone(), AlgebraicSet::unit(d), 1);
    }
    let need = (2.0 * n_height as f64 / epsilon).ceil();
    let mut count = 2;
    let convergents = loop {
        let cs = cf_convergents(system.alpha(), count)?;
        let (_, q) = cs.last().expect("nonempty");
        if num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::INFINITY) >= need {
            break cs;
        }
        if count > 200 {
            return Err(Error::PrecisionError(format!(
                "no convergent denominator reaches {need}"
            )));
        }
        count += 1;
    };
    let m = convergents.len() - 2;
    let q_m = &convergents[m].1;
    let len = distance_to_integer(system.alpha(), q_m);
    let y = AlgebraicSet::from_pairs(d, vec![(QuadraticReal::zero(d), len)])?;

    let columns = first_return_columns(system, &y)?;
    let mut base = AlgebraicSet::empty(d);
    for (h, piece) in &columns {
        let blocks = *h / n_height as u64;
        for c in 0..blocks {
            let top = (c * n_height as u64 + n_height as u64 - 1) as i64;
            base = base.union(&system.rotate_set(piece, top)?)?;
        }
    }
    let tower = RohlinTower::from_base(system.clone(), base, n_height)?;
    let floor = QuadraticReal::rational(BigRational::from_float(1.0 - epsilon).ok_or_else(|| {
        Error::PrecisionError(format!("epsilon {epsilon} is not finite"))
    })?, d);
    if qr_compare(tower.coverage(), &floor)? == Ordering::Less {
        return Err(Error::PrecisionError(format!(
            "tower coverage {:.6} is below 1 − epsilon",
            tower.coverage().to_f64()
        )));
    }
    Ok(tower)
}

/// Splits `Y` by first-return time: pieces `P_h` with `T^h P_h ⊆ Y` and `T^r P_h ∩ Y = ∅` for `0 < r < h`.
pub fn first_return_columns(
    system: &RotationSystem,
    y: &AlgebraicSet,
) -> Result<Vec<(u64, AlgebraicSet)>> {
    let mut remaining = y.clone();
    let mut out = Vec::new();
    let mut r = 0u64;
    while !remaining.is_empty() {
        r += 1;
        if r > MAX_RETURN_TIME {
            return Err(Error::PrecisionError(format!(
                "first return time exceeds {MAX_RETURN_TIME}"
            )));
        }
        let back = system.preimage_set(y, r as i64)?;
        let hit = remaining.intersection(&back)?;
        if !hit.is_empty() {
            remaining = remaining.difference(&hit)?;
            out.push((r, hit));
        }
    }
    Ok(out)
}

/// `(B_n, C_n) = (∪_{i<n} T^{-i}S, ∪_{i<2n} T^{-i}S)`; needs a tower of height at least `4n`.
pub fn tower_sets(tower: &RohlinTower, n: usize) -> Result<(AlgebraicSet, AlgebraicSet)> {
    if tower.height() < 4 * n {
        return Err(Error::HeightError {
            height: tower.height(),
            required: 4 * n,
        });
    }
    Ok((tower.union_of_levels(n)?, tower.union_of_levels(2 * n)?))
}

/// Grid of width `1/q(n)` split by `C_n` and its complement.
pub fn build_partition_thm4(
    c_n: &AlgebraicSet,
    schedule: &PartitionSchedule,
    n: u64,
) -> Result<Partition<QuadraticReal>> {
    Partition::grid_split(n, schedule.q(n)?, c_n)
}

/// `(x + α) mod 1`, the regression function of the rotation process.
pub fn m_rotation(system: &RotationSystem, x: &QuadraticReal) -> Result<QuadraticReal> {
    system.rotate(x, 1)
}

/// Regression function an estimate is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `m(x) = (x + α) mod 1`.
    Rotation,
    /// `m(z) = z`, for the pair `Z_n = X_{n-1}`, `Y_n = X_n + (1 − α) mod 1`.
    Identity,
}

impl Target {
    pub fn eval(&self, system: &RotationSystem, x: &QuadraticReal) -> Result<QuadraticReal> {
        match self {
            Target::Rotation => m_rotation(system, x),
            Target::Identity => Ok(x.clone()),
        }
    }
}

/// `∫_{lo}^{hi} |c − y| dy`.
fn abs_integral(c: &QuadraticReal, lo: &QuadraticReal, hi: &QuadraticReal) -> Result<QuadraticReal> {
    let half = BigRational::new(1.into(), 2.into());
    let width = hi.try_sub(lo)?;
    if qr_compare(c, lo)? != Ordering::Greater {
        let mid = lo.try_add(hi)?.scale(&half);
        return width.try_mul(&mid.try_sub(c)?);
    }
    if qr_compare(c, hi)? != Ordering::Less {
        let mid = lo.try_add(hi)?.scale(&half);
        return width.try_mul(&c.try_sub(&mid)?);
    }
    let a = c.try_sub(lo)?;
    let b = hi.try_sub(c)?;
    Ok(a.try_mul(&a)?.try_add(&b.try_mul(&b)?)?.scale(&half))
}

/// Exact `∫ |m̂(x) − m(x)| dx` for an estimate equal to `values[i]` on cell `i`.
pub fn l1_error_exact(
    system: &RotationSystem,
    partition: &Partition<QuadraticReal>,
    values: &[QuadraticReal],
    target: Target,
) -> Result<QuadraticReal> {
    if values.len() != partition.len() {
        return Err(Error::IndexError(format!(
            "{} estimates for {} cells",
            values.len(),
            partition.len()
        )));
    }
    let d = system.d();
    let one = QuadraticReal::one(d);
    let wrap = one.try_sub(system.alpha())?;
    let mut total = QuadraticReal::zero(d);
    for (cell, c) in partition.cells().iter().zip(values) {
        for iv in cell.set.intervals() {
            let (a, b) = (iv.lower(), iv.upper());
            match target {
                Target::Identity => {
                    total = total.try_add(&abs_integral(c, a, b)?)?;
                }
                Target::Rotation => {
                    // m(x) = x + α before the wrap point, x + α − 1 after it.
                    let split_hi = min_qr(b, &wrap)?;
                    if qr_compare(a, &split_hi)? == Ordering::Less {
                        let lo = a.try_add(system.alpha())?;
                        let hi = split_hi.try_add(system.alpha())?;
                        total = total.try_add(&abs_integral(c, &lo, &hi)?)?;
                    }
                    let split_lo = max_qr(a, &wrap)?;
                    if qr_compare(&split_lo, b)? == Ordering::Less {
                        let lo = split_lo.try_sub(&wrap)?;
                        let hi = b.try_sub(&wrap)?;
                        total = total.try_add(&abs_integral(c, &lo, &hi)?)?;
                    }
                }
            }
        }
    }
    Ok(total)
}

fn min_qr(a: &QuadraticReal, b: &QuadraticReal) -> Result<QuadraticReal> {
    Ok(if qr_compare(a, b)? == Ordering::Greater { b.clone() } else { a.clone() })
}

fn max_qr(a: &QuadraticReal, b: &QuadraticReal) -> Result<QuadraticReal> {
    Ok(if qr_compare(a, b)? == Ordering::Less { b.clone() } else { a.clone() })
}

/// Checks `|α − p/q| < 1/q²` exactly.
pub fn convergent_bound_holds(alpha: &QuadraticReal, p: &BigInt, q: &BigInt) -> Result<bool> {
    let approx = BigRational::new(p.clone(), q.clone());
    let err = alpha.add_rational(&-approx);
    let err = if err.signum() == Ordering::Less { err.neg() } else { err };
    let bound = BigRational::new(BigInt::one(), q * q);
    Ok(err.add_rational(&-bound).signum() == Ordering::Less && !q.is_negative())
}
