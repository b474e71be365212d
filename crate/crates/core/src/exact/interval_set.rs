//! Finite unions of left-closed, right-open intervals inside `[0, 1)` with exact Lebesgue measure.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{BinaryPoint, DyadicRational, QuadraticReal};

/// Ordered exact scalars usable as interval endpoints.
///
/// `Field` identifies the number field an element belongs to; values from
/// different fields cannot be mixed.
pub trait ExactScalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    type Field: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn field(&self) -> Self::Field;
    fn zero_in(field: &Self::Field) -> Self;
    fn one_in(field: &Self::Field) -> Self;
    fn try_cmp(&self, other: &Self) -> Result<Ordering>;
    fn try_add(&self, other: &Self) -> Result<Self>;
    fn try_sub(&self, other: &Self) -> Result<Self>;
    fn approx(&self) -> f64;
    /// Embeds a rational, if representable in this scalar type.
    fn from_rational(q: &BigRational, field: &Self::Field) -> Option<Self>;
}

impl ExactScalar for DyadicRational {
    type Field = ();
    fn field(&self) {}
    fn zero_in(_: &()) -> Self {
        DyadicRational::zero()
    }
    fn one_in(_: &()) -> Self {
        DyadicRational::one()
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.cmp(other))
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
    fn from_rational(q: &BigRational, _: &()) -> Option<Self> {
        DyadicRational::from_rational(q)
    }
}

impl ExactScalar for BigRational {
    type Field = ();
    fn field(&self) {}
    fn zero_in(_: &()) -> Self {
        BigRational::zero()
    }
    fn one_in(_: &()) -> Self {
        BigRational::one()
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.cmp(other))
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }
    fn approx(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_rational(q: &BigRational, _: &()) -> Option<Self> {
        Some(q.clone())
    }
}

impl ExactScalar for QuadraticReal {
    type Field = u64;
    fn field(&self) -> u64 {
        self.d()
    }
    fn zero_in(d: &u64) -> Self {
        QuadraticReal::zero(*d)
    }
    fn one_in(d: &u64) -> Self {
        QuadraticReal::one(*d)
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        crate::exact::qr_compare(self, other)
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        QuadraticReal::try_add(self, other)
    }
    fn try_sub(&self, other: &Self) -> Result<Self> {
        QuadraticReal::try_sub(self, other)
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
    fn from_rational(q: &BigRational, d: &u64) -> Option<Self> {
        Some(QuadraticReal::rational(q.clone(), *d))
    }
}

/// Points that can be located relative to endpoints of type `T`.
pub trait PointOrder<T> {
    fn cmp_to(&self, bound: &T) -> Result<Ordering>;
}

impl<T: ExactScalar> PointOrder<T> for T {
    fn cmp_to(&self, bound: &T) -> Result<Ordering> {
        self.try_cmp(bound)
    }
}

impl PointOrder<BigRational> for f64 {
    fn cmp_to(&self, bound: &BigRational) -> Result<Ordering> {
        let x = BigRational::from_float(*self)
            .ok_or_else(|| Error::DomainMismatch(format!("{self} is not finite")))?;
        Ok(x.cmp(bound))
    }
}

impl PointOrder<DyadicRational> for f64 {
    fn cmp_to(&self, bound: &DyadicRational) -> Result<Ordering> {
        self.cmp_to(&bound.to_rational())
    }
}

impl PointOrder<BigRational> for BinaryPoint {
    fn cmp_to(&self, bound: &BigRational) -> Result<Ordering> {
        self.cmp_rational(bound)
    }
}

impl PointOrder<DyadicRational> for BinaryPoint {
    fn cmp_to(&self, bound: &DyadicRational) -> Result<Ordering> {
        self.cmp_rational(&bound.to_rational())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval<T> {
    lower: T,
    upper: T,
}

impl<T: ExactScalar> Interval<T> {
    /// `[lower, upper)` with `0 <= lower < upper <= 1`.
    pub fn new(lower: T, upper: T) -> Result<Self> {
        let field = lower.field();
        if upper.field() != field {
            return Err(Error::DomainMismatch("interval endpoints from different fields".into()));
        }
        if lower.try_cmp(&T::zero_in(&field))? == Ordering::Less
            || upper.try_cmp(&T::one_in(&field))? == Ordering::Greater
            || lower.try_cmp(&upper)? != Ordering::Less
        {
            return Err(Error::IndexError(format!(
                "[{lower}, {upper}) is not a nonempty subinterval of [0, 1)"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn lower(&self) -> &T {
        &self.lower
    }

    pub fn upper(&self) -> &T {
        &self.upper
    }

    pub fn length(&self) -> Result<T> {
        self.upper.try_sub(&self.lower)
    }

    pub fn contains<P: PointOrder<T>>(&self, p: &P) -> Result<bool> {
        Ok(p.cmp_to(&self.lower)? != Ordering::Less && p.cmp_to(&self.upper)? == Ordering::Less)
    }
}

impl<T: fmt::Display> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lower, self.upper)
    }
}

/// A canonical finite union of intervals: sorted, disjoint, with touching pieces merged.
#[derive(Clone, PartialEq)]
pub struct IntervalSet<T: ExactScalar> {
    field: T::Field,
    intervals: Vec<Interval<T>>,
}

pub type DyadicSet = IntervalSet<DyadicRational>;
pub type RationalSet = IntervalSet<BigRational>;
pub type AlgebraicSet = IntervalSet<QuadraticReal>;

impl<T: ExactScalar> IntervalSet<T> {
    pub fn empty(field: T::Field) -> Self {
        IntervalSet {
            field,
            intervals: Vec::new(),
        }
    }

    pub fn unit(field: T::Field) -> Self {
        let interval = Interval {
            lower: T::zero_in(&field),
            upper: T::one_in(&field),
        };
        IntervalSet {
            field,
            intervals: vec![interval],
        }
    }

    pub fn from_interval(interval: Interval<T>) -> Self {
        IntervalSet {
            field: interval.lower.field(),
            intervals: vec![interval],
        }
    }

    /// Canonicalizes an arbitrary list of intervals (any order, overlaps allowed).
    pub fn from_intervals(
        field: T::Field,
        intervals: impl IntoIterator<Item = Interval<T>>,
    ) -> Result<Self> {
        let mut list: Vec<Interval<T>> = intervals.into_iter().collect();
        for iv in &list {
            if iv.lower.field() != field {
                return Err(Error::DomainMismatch("interval outside the set's field".into()));
            }
        }
        let mut err = None;
        list.sort_by(|a, b| {
            a.lower.try_cmp(&b.lower).unwrap_or_else(|e| {
                err.get_or_insert(e);
                Ordering::Equal
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        let mut merged: Vec<Interval<T>> = Vec::with_capacity(list.len());
        for iv in list {
            if let Some(last) = merged.last_mut() {
                if iv.lower.try_cmp(&last.upper)? != Ordering::Greater {
                    if iv.upper.try_cmp(&last.upper)? == Ordering::Greater {
                        last.upper = iv.upper;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        Ok(IntervalSet {
            field,
            intervals: merged,
        })
    }

    /// Builds from raw endpoint pairs, silently dropping empty pieces.
    pub(crate) fn from_pairs(field: T::Field, pairs: Vec<(T, T)>) -> Result<Self> {
        let mut list = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            if lo.try_cmp(&hi)? == Ordering::Less {
                list.push(Interval { lower: lo, upper: hi });
            }
        }
        Self::from_intervals(field, list)
    }

    pub fn field(&self) -> &T::Field {
        &self.field
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::DomainMismatch(format!(
                "sets over fields {:?} and {:?}",
                self.field, other.field
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Self::from_intervals(
            self.field.clone(),
            self.intervals.iter().chain(&other.intervals).cloned(),
        )
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = if a[i].lower.try_cmp(&b[j].lower)? == Ordering::Less {
                &b[j].lower
            } else {
                &a[i].lower
            };
            let a_ends_first = a[i].upper.try_cmp(&b[j].upper)? == Ordering::Less;
            let hi = if a_ends_first { &a[i].upper } else { &b[j].upper };
            if lo.try_cmp(hi)? == Ordering::Less {
                out.push(Interval {
                    lower: lo.clone(),
                    upper: hi.clone(),
                });
            }
            if a_ends_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(IntervalSet {
            field: self.field.clone(),
            intervals: out,
        })
    }

    /// Complement within `[0, 1)`.
    pub fn complement(&self) -> Result<Self> {
        let mut out = Vec::new();
        let mut cursor = T::zero_in(&self.field);
        for iv in &self.intervals {
            if cursor.try_cmp(&iv.lower)? == Ordering::Less {
                out.push((cursor, iv.lower.clone()));
            }
            cursor = iv.upper.clone();
        }
        out.push((cursor, T::one_in(&self.field)));
        Self::from_pairs(self.field.clone(), out)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.intersection(&other.complement()?)
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> Result<T> {
        let mut total = T::zero_in(&self.field);
        for iv in &self.intervals {
            total = total.try_add(&iv.length()?)?;
        }
        Ok(total)
    }

    pub fn contains<P: PointOrder<T>>(&self, p: &P) -> Result<bool> {
        // Binary search for the last interval whose lower endpoint is <= p.
        let (mut lo, mut hi) = (0usize, self.intervals.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if p.cmp_to(&self.intervals[mid].lower)? == Ordering::Less {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == 0 {
            return Ok(false);
        }
        Ok(p.cmp_to(&self.intervals[lo - 1].upper)? == Ordering::Less)
    }

    /// `sup - inf`, zero for the empty set.
    pub fn diameter(&self) -> Result<T> {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(first), Some(last)) => last.upper.try_sub(&first.lower),
            _ => Ok(T::zero_in(&self.field)),
        }
    }

    /// Applies an endpoint map that preserves order, e.g. an embedding into a larger field.
    pub fn map_endpoints<U: ExactScalar>(
        &self,
        field: U::Field,
        mut f: impl FnMut(&T) -> U,
    ) -> Result<IntervalSet<U>> {
        IntervalSet::from_pairs(
            field,
            self.intervals
                .iter()
                .map(|iv| (f(&iv.lower), f(&iv.upper)))
                .collect(),
        )
    }
}

impl<T: ExactScalar> fmt::Debug for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv:?}")?;
        }
        Ok(())
    }
}

impl DyadicSet {
    pub fn to_rational_set(&self) -> RationalSet {
        self.map_endpoints((), DyadicRational::to_rational)
            .expect("order-preserving embedding")
    }
}

impl RationalSet {
    pub fn to_algebraic_set(&self, d: u64) -> AlgebraicSet {
        self.map_endpoints(d, |q| QuadraticReal::rational(q.clone(), d))
            .expect("order-preserving embedding")
    }
}

/// A set of either supported kind, for operations that accept both.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactSet {
    Dyadic(DyadicSet),
    Algebraic(AlgebraicSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    /// Complement of the first operand within `[0, 1)`; the second is ignored.
    Complement,
}

/// Applies `op` to two sets of the same kind.
pub fn set_algebra(op: SetOp, a: &ExactSet, b: &ExactSet) -> Result<ExactSet> {
    fn apply<T: ExactScalar>(op: SetOp, a: &IntervalSet<T>, b: &IntervalSet<T>) -> Result<IntervalSet<T>> {
        match op {
            SetOp::Union => a.union(b),
            SetOp::Intersect => a.intersection(b),
            SetOp::Complement => a.complement(),
        }
    }
    match (a, b) {
        (ExactSet::Dyadic(a), ExactSet::Dyadic(b)) => Ok(ExactSet::Dyadic(apply(op, a, b)?)),
        (ExactSet::Algebraic(a), ExactSet::Algebraic(b)) => {
            Ok(ExactSet::Algebraic(apply(op, a, b)?))
        }
        _ => Err(Error::DomainMismatch(
            "set operation mixes dyadic and algebraic sets".into(),
        )),
    }
}
