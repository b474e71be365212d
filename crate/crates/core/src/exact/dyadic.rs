use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default bound on the binary exponent of dyadic values built by experiments.
pub const DEFAULT_EXPONENT_CAP: u32 = 128;

/// An exact rational of the form `numerator / 2^exponent`.
///
/// Always stored in lowest terms: the numerator is odd, or zero with exponent zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut numerator = numerator.into();
        let mut exponent = exponent;
        if numerator.is_zero() {
            return Self::zero();
        }
        let twos = numerator.trailing_zeros().unwrap_or(0).min(exponent as u64) as u32;
        if twos > 0 {
            numerator >>= twos;
            exponent -= twos;
        }
        DyadicRational {
            numerator,
            exponent,
        }
    }

    /// Like [`DyadicRational::new`] but rejects values whose reduced exponent exceeds `cap`.
    pub fn with_cap(numerator: impl Into<BigInt>, exponent: u32, cap: u32) -> Result<Self> {
        let value = Self::new(numerator, exponent);
        if value.exponent > cap {
            return Err(Error::PrecisionError(format!(
                "dyadic exponent {} exceeds cap {cap}",
                value.exponent
            )));
        }
        Ok(value)
    }

    pub fn zero() -> Self {
        DyadicRational {
            numerator: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        DyadicRational {
            numerator: BigInt::one(),
            exponent: k,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            numerator: self.numerator.abs(),
            exponent: self.exponent,
        }
    }

    pub fn half(&self) -> Self {
        Self::new(self.numerator.clone(), self.exponent + 1)
    }

    /// Numerator after rescaling to denominator `2^exponent` (requires `exponent >= self.exponent`).
    pub fn scaled_numerator(&self, exponent: u32) -> BigInt {
        debug_assert!(exponent >= self.exponent);
        &self.numerator << (exponent - self.exponent)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), BigInt::one() << self.exponent)
    }

    /// Returns the value if the rational has a power-of-two denominator.
    pub fn from_rational(q: &BigRational) -> Option<Self> {
        let den = q.denom();
        let bits = den.trailing_zeros()?;
        if den != &(BigInt::one() << bits) {
            return None;
        }
        Some(Self::new(q.numer().clone(), bits as u32))
    }

    pub fn to_f64(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        // Keep 64 significant bits before the float conversion to avoid overflow on huge numerators.
        let bits = self.numerator.bits();
        if bits > 64 {
            let shift = bits - 64;
            let top = (&self.numerator >> shift).to_f64().unwrap_or(0.0);
            top * 2f64.powi(shift as i32 - self.exponent as i32)
        } else {
            self.numerator.to_f64().unwrap_or(0.0) * 2f64.powi(-(self.exponent as i32))
        }
    }

    fn align(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.exponent.max(other.exponent);
        (self.scaled_numerator(e), other.scaled_numerator(e), e)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.align(rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.align(rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.numerator * &rhs.numerator, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            numerator: -&self.numerator,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else if self.exponent < 64 {
            write!(f, "{}/{}", self.numerator, 1u64 << self.exponent)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}
