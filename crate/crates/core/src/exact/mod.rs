//! Exact arithmetic: dyadic rationals, binary-expansion points, quadratic
//! irrationals and interval sets with exact Lebesgue measure.

mod binary_point;
mod dyadic;
mod interval_set;
mod quadratic;

pub use binary_point::{BinaryPoint, Tail, DEFAULT_BIT_CAP};
pub use dyadic::{DyadicRational, DEFAULT_EXPONENT_CAP};
pub use interval_set::{
    set_algebra, AlgebraicSet, DyadicSet, ExactScalar, ExactSet, Interval, IntervalSet,
    PointOrder, RationalSet, SetOp,
};
pub use quadratic::{is_square_free, qr_compare, QuadraticReal};

/// Exact Lebesgue measure of a canonical set.
pub fn measure<T: ExactScalar>(set: &IntervalSet<T>) -> crate::Result<T> {
    set.measure()
}
