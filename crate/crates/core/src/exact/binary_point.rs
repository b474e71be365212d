//! Points of `[0, 1)` given by a binary expansion `0.r_1 r_2 r_3 ...`.
//!
//! A point is a finite run of explicit bits followed by a tail rule. Seeded tails
//! produce the bits of a uniformly random point on demand: bit `i` is a pure
//! function of `(seed, i)`, so repeated or concurrent queries always agree.
//! Periodic tails describe rational points exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::DyadicRational;

/// Default number of bits a point may materialize before queries fail.
pub const DEFAULT_BIT_CAP: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Pseudo-random bits derived from the seed.
    Seeded(u64),
    /// A repeating bit pattern.
    Periodic(Vec<bool>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryPoint {
    /// Explicit bits `r_1..r_m`.
    prefix: Vec<bool>,
    tail: Tail,
    /// For periodic tails, bit `i > origin` is `pattern[(i - origin - 1) % len]`.
    origin: usize,
    cap: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seeded_bit(seed: u64, index: usize) -> bool {
    let word = ((index - 1) / 64) as u64;
    let offset = (index - 1) % 64;
    let w = splitmix64(splitmix64(seed) ^ word.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    (w >> offset) & 1 == 1
}

impl BinaryPoint {
    /// A uniformly distributed point determined by `seed`.
    pub fn seeded(seed: u64, cap: usize) -> Self {
        BinaryPoint {
            prefix: Vec::new(),
            tail: Tail::Seeded(seed),
            origin: 0,
            cap,
        }
    }

    /// Explicit leading bits followed by `tail`.
    ///
    /// A periodic tail of all ones is rewritten to the terminating expansion
    /// (the one with finitely many ones), which fails if the point would be 1.
    pub fn new(prefix: Vec<bool>, tail: Tail, cap: usize) -> Result<Self> {
        if let Tail::Periodic(p) = &tail {
            if p.is_empty() {
                return Err(Error::DomainMismatch("empty periodic pattern".into()));
            }
            if p.iter().all(|&b| b) {
                return Self::carry_all_ones(prefix, cap);
            }
        }
        if prefix.len() > cap {
            return Err(Error::CapExceeded {
                index: prefix.len(),
                cap,
            });
        }
        let origin = prefix.len();
        Ok(BinaryPoint {
            prefix,
            tail,
            origin,
            cap,
        })
    }

    fn carry_all_ones(mut prefix: Vec<bool>, cap: usize) -> Result<Self> {
        // 0.p 111... = 0.p + 2^-len(p)
        loop {
            match prefix.pop() {
                None => {
                    return Err(Error::ExceptionalPoint(
                        "expansion 0.111... equals 1, outside [0, 1)".into(),
                    ))
                }
                Some(true) => continue,
                Some(false) => {
                    prefix.push(true);
                    return Self::new(prefix, Tail::Periodic(vec![false]), cap);
                }
            }
        }
    }

    /// Terminating expansion of a dyadic rational in `[0, 1)`.
    pub fn from_dyadic(x: &DyadicRational, cap: usize) -> Result<Self> {
        if x.is_negative() || *x >= DyadicRational::one() {
            return Err(Error::IndexError(format!("{x} is outside [0, 1)")));
        }
        let e = x.exponent() as usize;
        let num = x.numerator();
        let prefix = (1..=e)
            .map(|i| num.bit((e - i) as u64))
            .collect::<Vec<_>>();
        Self::new(prefix, Tail::Periodic(vec![false]), cap)
    }

    pub fn from_bits(bits: &[u8], cap: usize) -> Result<Self> {
        Self::new(
            bits.iter().map(|&b| b != 0).collect(),
            Tail::Periodic(vec![false]),
            cap,
        )
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn materialized(&self) -> usize {
        self.prefix.len()
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn tail_bit(&self, index: usize) -> bool {
        match &self.tail {
            Tail::Seeded(seed) => seeded_bit(*seed, index),
            Tail::Periodic(p) => p[(index - self.origin - 1) % p.len()],
        }
    }

    /// Bit `r_index` (1-based).
    pub fn bit(&self, index: usize) -> Result<bool> {
        if index == 0 {
            return Err(Error::IndexError("bits are numbered from 1".into()));
        }
        if index > self.cap {
            return Err(Error::CapExceeded {
                index,
                cap: self.cap,
            });
        }
        Ok(if index <= self.prefix.len() {
            self.prefix[index - 1]
        } else {
            self.tail_bit(index)
        })
    }

    /// True when every bit from `index` on is provably zero.
    pub fn zero_from(&self, index: usize) -> bool {
        let tail_zero = matches!(&self.tail, Tail::Periodic(p) if p.iter().all(|&b| !b));
        tail_zero && self.prefix.iter().skip(index.saturating_sub(1)).all(|&b| !b)
    }

    /// Bits `r_1..r_len`, materializing as needed.
    pub fn bits(&self, len: usize) -> Result<Vec<bool>> {
        (1..=len).map(|i| self.bit(i)).collect()
    }

    /// Returns a copy whose explicit prefix covers at least `len` bits.
    pub(crate) fn materialize(&self, len: usize) -> Result<BinaryPoint> {
        let mut out = self.clone();
        if len > out.prefix.len() {
            let extra = (out.prefix.len() + 1..=len)
                .map(|i| self.bit(i))
                .collect::<Result<Vec<_>>>()?;
            out.prefix.extend(extra);
        }
        Ok(out)
    }

    /// Replaces bits `r_1..r_k` (`k = bits.len()`); the prefix must already cover them.
    pub(crate) fn overwrite_prefix(&mut self, bits: &[bool]) {
        debug_assert!(bits.len() <= self.prefix.len());
        self.prefix[..bits.len()].copy_from_slice(bits);
    }

    /// The value truncated to `bits` binary digits.
    pub fn truncate(&self, bits: usize) -> Result<DyadicRational> {
        let mut n = BigInt::zero();
        for i in 1..=bits {
            n <<= 1;
            if self.bit(i)? {
                n += 1;
            }
        }
        Ok(DyadicRational::new(n, bits as u32))
    }

    /// Double-precision approximation from the leading bits that fit under the cap.
    pub fn to_f64(&self) -> f64 {
        let len = self.cap.min(60);
        let mut v = 0u64;
        for i in 1..=len {
            v = (v << 1) | u64::from(self.bit(i).unwrap_or(false));
        }
        v as f64 / 2f64.powi(len as i32)
    }

    /// Exact value for periodic tails; `None` for seeded points.
    pub fn exact_value(&self) -> Option<BigRational> {
        let Tail::Periodic(pattern) = &self.tail else {
            return None;
        };
        let m = self.prefix.len();
        let mut head = BigInt::zero();
        for &b in &self.prefix {
            head <<= 1;
            if b {
                head += 1;
            }
        }
        let len = pattern.len();
        let mut rep = BigInt::zero();
        for j in 0..len {
            rep <<= 1;
            if pattern[(m - self.origin + j) % len] {
                rep += 1;
            }
        }
        let scale = BigInt::one() << m;
        let period = (BigInt::one() << len) - 1;
        Some(
            BigRational::new(head, scale.clone()) + BigRational::new(rep, scale * period),
        )
    }

    /// Checks that both points agree on bits `1..=len`.
    pub fn agrees_up_to(&self, other: &BinaryPoint, len: usize) -> Result<bool> {
        for i in 1..=len {
            if self.bit(i)? != other.bit(i)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact comparison against a rational.
    pub fn cmp_rational(&self, c: &BigRational) -> Result<Ordering> {
        if let Some(v) = self.exact_value() {
            return Ok(v.cmp(c));
        }
        if c.is_negative() {
            return Ok(Ordering::Greater);
        }
        if c >= &BigRational::one() {
            return Ok(Ordering::Less);
        }
        let mut digits = RationalDigits::new(c);
        let mut i = 1;
        loop {
            let (digit, terminated) = digits.next_digit();
            let bit = self.bit(i)?;
            if bit != digit {
                return Ok(if bit { Ordering::Greater } else { Ordering::Less });
            }
            if terminated {
                // c has no further ones; the point is larger unless it ends here too.
                for j in i + 1.. {
                    if self.zero_from(j) {
                        return Ok(Ordering::Equal);
                    }
                    if self.bit(j)? {
                        return Ok(Ordering::Greater);
                    }
                }
            }
            i += 1;
        }
    }
}

/// Successive binary digits of a rational in `[0, 1)`.
enum RationalDigits {
    Small { num: u128, den: u128 },
    Big { num: BigInt, den: BigInt },
}

impl RationalDigits {
    fn new(c: &BigRational) -> Self {
        match (c.numer().to_u64(), c.denom().to_u64()) {
            (Some(n), Some(d)) => RationalDigits::Small {
                num: n as u128,
                den: d as u128,
            },
            _ => RationalDigits::Big {
                num: c.numer().clone(),
                den: c.denom().clone(),
            },
        }
    }

    /// Next digit and whether the remainder is now zero.
    fn next_digit(&mut self) -> (bool, bool) {
        match self {
            RationalDigits::Small { num, den } => {
                *num <<= 1;
                let digit = *num >= *den;
                if digit {
                    *num -= *den;
                }
                (digit, *num == 0)
            }
            RationalDigits::Big { num, den } => {
                *num <<= 1;
                let digit = *num >= *den;
                if digit {
                    *num -= &*den;
                }
                (digit, num.is_zero())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_zero(prefix: &[u8]) -> BinaryPoint {
        BinaryPoint::from_bits(prefix, DEFAULT_BIT_CAP).unwrap()
    }

    #[test]
    fn bit_queries_on_terminating_points() {
        let r = periodic_zero(&[1, 0, 1]);
        assert!(!r.bit(2).unwrap());
        assert!(!r.bit(7).unwrap());
        assert!(r.bit(3).unwrap());
        assert!(matches!(r.bit(0), Err(Error::IndexError(_))));
    }

    #[test]
    fn seeded_bits_are_stable() {
        let r = BinaryPoint::seeded(17, 64);
        let first = r.bit(9).unwrap();
        assert_eq!(r.bit(9).unwrap(), first);
        assert_eq!(r.clone().bit(9).unwrap(), first);
        assert!(matches!(r.bit(65), Err(Error::CapExceeded { index: 65, cap: 64 })));
        let m = r.materialize(20).unwrap();
        assert!(m.agrees_up_to(&r, 64).unwrap());
    }

    #[test]
    fn all_ones_tail_is_normalized() {
        // 0.0111... = 0.1
        let r = BinaryPoint::new(vec![false], Tail::Periodic(vec![true]), 64).unwrap();
        assert_eq!(r.exact_value().unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(r.bit(1).unwrap());
        assert!(!r.bit(2).unwrap());
        assert!(BinaryPoint::new(vec![true], Tail::Periodic(vec![true]), 64).is_err());
    }

    #[test]
    fn exact_values_of_periodic_points() {
        let third = BinaryPoint::new(vec![], Tail::Periodic(vec![false, true]), 64).unwrap();
        assert_eq!(third.exact_value().unwrap(), BigRational::new(1.into(), 3.into()));
        let x = BinaryPoint::from_dyadic(&DyadicRational::new(5, 3), 64).unwrap();
        assert_eq!(x.exact_value().unwrap(), BigRational::new(5.into(), 8.into()));
        assert_eq!(x.truncate(3).unwrap(), DyadicRational::new(5, 3));
    }

    #[test]
    fn comparisons_against_rationals() {
        let r = BinaryPoint::seeded(3, 128);
        let approx = r.to_f64();
        let third = BigRational::new(1.into(), 3.into());
        let expected = if approx > 1.0 / 3.0 { Ordering::Greater } else { Ordering::Less };
        assert_eq!(r.cmp_rational(&third).unwrap(), expected);
        let half = BigRational::new(1.into(), 2.into());
        let expected = if r.bit(1).unwrap() { Ordering::Greater } else { Ordering::Less };
        assert_eq!(r.cmp_rational(&half).unwrap(), expected);
        let p = periodic_zero(&[0, 1]);
        assert_eq!(p.cmp_rational(&BigRational::new(1.into(), 4.into())).unwrap(), Ordering::Equal);
    }
}
