//! Exact elements `a + b·√d` of a real quadratic field.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::DyadicRational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticReal {
    a: BigRational,
    b: BigRational,
    d: u64,
}

/// Checks that `d >= 2` has no repeated prime factor.
pub fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn rational_sign(q: &BigRational) -> Ordering {
    q.numer().sign_cmp()
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let m = q.denom().to_f64().unwrap_or(f64::NAN);
        n / m
    })
}

impl QuadraticReal {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if !is_square_free(d) {
            return Err(Error::DomainMismatch(format!(
                "surd base {d} is not a square-free integer >= 2"
            )));
        }
        Ok(QuadraticReal { a, b, d })
    }

    /// `a + b·√d` from small integer ratios, e.g. `from_ratios((-1, 2), (1, 2), 5)`.
    pub fn from_ratios(a: (i64, i64), b: (i64, i64), d: u64) -> Result<Self> {
        Self::new(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
            d,
        )
    }

    pub fn rational(q: BigRational, d: u64) -> Self {
        debug_assert!(is_square_free(d));
        QuadraticReal {
            a: q,
            b: BigRational::zero(),
            d,
        }
    }

    pub fn from_dyadic(x: &DyadicRational, d: u64) -> Self {
        Self::rational(x.to_rational(), d)
    }

    pub fn zero(d: u64) -> Self {
        Self::rational(BigRational::zero(), d)
    }

    pub fn one(d: u64) -> Self {
        Self::rational(BigRational::one(), d)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DomainMismatch(format!(
                "cannot combine elements of Q(sqrt {}) and Q(sqrt {})",
                self.d, other.d
            )));
        }
        Ok(())
    }

    /// Sign of the value, decided without floating point.
    pub fn signum(&self) -> Ordering {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: |a| vs |b|·√d, squared. Equality is impossible for non-square d.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.into());
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(QuadraticReal {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d: self.d,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(QuadraticReal {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            d: self.d,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let d = BigRational::from_integer(self.d.into());
        Ok(QuadraticReal {
            a: &self.a * &other.a + &self.b * &other.b * d,
            b: &self.a * &other.b + &self.b * &other.a,
            d: self.d,
        })
    }

    pub fn neg(&self) -> Self {
        QuadraticReal {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        QuadraticReal {
            a: &self.a * q,
            b: &self.b * q,
            d: self.d,
        }
    }

    pub fn add_rational(&self, q: &BigRational) -> Self {
        QuadraticReal {
            a: &self.a + q,
            b: self.b.clone(),
            d: self.d,
        }
    }

    /// Multiplicative inverse via the conjugate; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into());
        Some(QuadraticReal {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        })
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.d as f64).sqrt()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        // Integer part of b·√d from an exact integer square root, then correct by comparison.
        let approx = self.to_f64();
        let mut k = if approx.is_finite() {
            BigInt::from(approx.floor() as i64)
        } else {
            let bd = (&self.b * &self.b * BigRational::from_integer(self.d.into())).to_integer();
            self.a.floor().to_integer() + bd.abs().sqrt() * self.b.numer().signum()
        };
        loop {
            let kq = QuadraticReal::rational(BigRational::from_integer(k.clone()), self.d);
            let diff = self.try_sub(&kq).expect("same field");
            if diff.signum() == Ordering::Less {
                k -= 1;
                continue;
            }
            let above = diff.add_rational(&-BigRational::one());
            if above.signum() != Ordering::Less {
                k += 1;
                continue;
            }
            return k;
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> Self {
        let k = self.floor();
        self.add_rational(&-BigRational::from_integer(k))
    }
}

/// Exact three-way comparison of two elements of the same field.
pub fn qr_compare(x: &QuadraticReal, y: &QuadraticReal) -> Result<Ordering> {
    Ok(x.try_sub(y)?.signum())
}

impl fmt::Debug for QuadraticReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QuadraticReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "({})√{}", self.b, self.d)
        } else {
            write!(f, "{} + ({})√{}", self.a, self.b, self.d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qr(a: (i64, i64), b: (i64, i64), d: u64) -> QuadraticReal {
        QuadraticReal::from_ratios(a, b, d).unwrap()
    }

    #[test]
    fn compare_examples() {
        // 1 + √2 ≈ 2.414 vs 12/5
        assert_eq!(qr_compare(&qr((1, 1), (1, 1), 2), &qr((12, 5), (0, 1), 2)).unwrap(), Ordering::Greater);
        let x = qr((3, 7), (-2, 3), 2);
        assert_eq!(qr_compare(&x, &x).unwrap(), Ordering::Equal);
        // √2 − 1 vs 1/2
        assert_eq!(qr_compare(&qr((-1, 1), (1, 1), 2), &qr((1, 2), (0, 1), 2)).unwrap(), Ordering::Less);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let x = qr((0, 1), (1, 1), 2);
        let y = qr((0, 1), (1, 1), 3);
        assert!(matches!(qr_compare(&x, &y), Err(Error::DomainMismatch(_))));
        assert!(QuadraticReal::from_ratios((0, 1), (1, 1), 8).is_err());
    }

    #[test]
    fn sign_with_opposite_coefficient_signs() {
        // 3 − 2√2 > 0, 2√2 − 3 < 0, 1 − √2 < 0
        assert_eq!(qr((3, 1), (-2, 1), 2).signum(), Ordering::Greater);
        assert_eq!(qr((-3, 1), (2, 1), 2).signum(), Ordering::Less);
        assert_eq!(qr((1, 1), (-1, 1), 2).signum(), Ordering::Less);
    }

    #[test]
    fn floor_fract_and_recip() {
        let x = qr((0, 1), (5, 1), 2); // 7.07...
        assert_eq!(x.floor(), BigInt::from(7));
        assert_eq!(x.fract(), qr((-7, 1), (5, 1), 2));
        let y = qr((-1, 1), (1, 1), 2);
        assert_eq!(y.recip().unwrap(), qr((1, 1), (1, 1), 2));
        assert_eq!(qr((-1, 2), (-1, 1), 2).floor(), BigInt::from(-2));
    }

    #[test]
    fn square_free_detection() {
        assert!(is_square_free(2));
        assert!(is_square_free(30));
        assert!(!is_square_free(12));
        assert!(!is_square_free(1));
    }
}
