use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use forecast_limits::exact::{
    qr_compare, set_algebra, BinaryPoint, DyadicRational, DyadicSet, ExactSet, Interval,
    QuadraticReal, SetOp,
};

const EXP: u32 = 8;

fn dyadic_set(pairs: &[(u32, u32)]) -> DyadicSet {
    let intervals = pairs.iter().filter_map(|&(a, b)| {
        let (lo, hi) = (a.min(b), a.max(b));
        (lo < hi).then(|| Interval::new(DyadicRational::new(lo, EXP), DyadicRational::new(hi, EXP)).unwrap())
    });
    DyadicSet::from_intervals((), intervals).unwrap()
}

fn pairs() -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::vec((0u32..=256, 0u32..=256), 0..8)
}

fn quadratic() -> impl Strategy<Value = QuadraticReal> {
    (-60i64..60, 1i64..12, -20i64..20, 1i64..12).prop_map(|(a, ad, b, bd)| {
        QuadraticReal::new(
            BigRational::new(BigInt::from(a), BigInt::from(ad)),
            BigRational::new(BigInt::from(b), BigInt::from(bd)),
            2,
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn set_and_complement_cover_unit(p in pairs()) {
        let a = dyadic_set(&p);
        let whole = a.union(&a.complement().unwrap()).unwrap();
        prop_assert_eq!(whole.measure().unwrap(), DyadicRational::one());
        prop_assert!(a.is_disjoint(&a.complement().unwrap()).unwrap());
    }

    #[test]
    fn set_algebra_ignores_interval_order(p in pairs(), q in pairs()) {
        let mut rev = p.clone();
        rev.reverse();
        let (a, a_rev, b) = (dyadic_set(&p), dyadic_set(&rev), dyadic_set(&q));
        prop_assert_eq!(&a, &a_rev);
        for op in [SetOp::Union, SetOp::Intersect, SetOp::Complement] {
            let x = set_algebra(op, &ExactSet::Dyadic(a.clone()), &ExactSet::Dyadic(b.clone())).unwrap();
            let y = set_algebra(op, &ExactSet::Dyadic(a_rev.clone()), &ExactSet::Dyadic(b.clone())).unwrap();
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn qr_compare_is_a_total_order(x in quadratic(), y in quadratic(), z in quadratic()) {
        let xy = qr_compare(&x, &y).unwrap();
        prop_assert_eq!(xy.reverse(), qr_compare(&y, &x).unwrap());
        prop_assert_eq!(xy == Ordering::Equal, x == y);
        if xy.is_le() && qr_compare(&y, &z).unwrap().is_le() {
            prop_assert!(qr_compare(&x, &z).unwrap().is_le());
        }
        let (fx, fy) = (x.to_f64(), y.to_f64());
        if (fx - fy).abs() > 1e-9 {
            prop_assert_eq!(xy, fx.total_cmp(&fy));
        }
    }

    #[test]
    fn seeded_bits_are_stable(seed in any::<u64>(), i in 1usize..100) {
        let p = BinaryPoint::seeded(seed, 128);
        let first = p.bit(i).unwrap();
        let _ = p.bits(128).unwrap();
        prop_assert_eq!(p.bit(i).unwrap(), first);
        prop_assert_eq!(BinaryPoint::seeded(seed, 128).bit(i).unwrap(), first);
    }
}

#[test]
fn seeded_bit_means_are_near_one_half() {
    let points: Vec<Vec<bool>> = (0..10_000u64)
        .map(|s| BinaryPoint::seeded(s, 128).bits(32).unwrap())
        .collect();
    for i in 0..32 {
        let ones = points.iter().filter(|b| b[i]).count() as f64;
        let mean = ones / points.len() as f64;
        assert!((mean - 0.5).abs() <= 4.0 / 100.0, "bit {}: mean {mean}", i + 1);
    }
}
