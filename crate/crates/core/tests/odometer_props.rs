use proptest::prelude::*;

use forecast_limits::exact::{BinaryPoint, DyadicRational, DyadicSet, Interval};
use forecast_limits::odometer::{
    apply_t, apply_t_power, build_b, build_c, disjointness_check, image_of_interval, interval_i,
    preimage, reverse_bits, Direction,
};

#[test]
fn inverse_undoes_forward_on_seeded_points() {
    for seed in 0..10_000u64 {
        let r = BinaryPoint::seeded(seed, 128);
        let there = apply_t(&r, Direction::Forward).unwrap();
        let back = apply_t(&there, Direction::Inverse).unwrap();
        let len = back.materialized().max(r.materialized()).max(1);
        assert!(back.agrees_up_to(&r, len).unwrap(), "seed {seed}");
    }
}

#[test]
fn iterated_shift_reads_reversed_index() {
    for n in 1..=8u32 {
        let size = 1i64 << n;
        for j in 0..size {
            let lower = interval_i(n, j as u64).unwrap().intervals()[0].lower().clone();
            let r = BinaryPoint::from_dyadic(&lower, 64).unwrap();
            for k in j - (size - 1)..=j {
                let bits = apply_t_power(&r, k).unwrap().bits(n as usize).unwrap();
                let want = (j - k) as u64;
                let got: Vec<bool> = (0..n).map(|l| (want >> l) & 1 == 1).collect();
                assert_eq!(bits, got, "n={n} j={j} k={k}");
            }
        }
    }
}

#[test]
fn zero_interval_wraps_to_top() {
    for i in 1..=10u32 {
        let top = interval_i(i, (1 << i) - 1).unwrap();
        for seed in 0..50u64 {
            let tail = BinaryPoint::seeded(seed, 128).bits(40).unwrap();
            let mut bits = vec![0u8; i as usize];
            bits.extend(tail.iter().map(|&b| u8::from(b)));
            let r = BinaryPoint::from_bits(&bits, 128).unwrap();
            let t = apply_t(&r, Direction::Forward).unwrap();
            assert!(top.contains(&t).unwrap(), "level {i}");
        }
        for j in 1..1u64 << i {
            assert_eq!(image_of_interval(i, j).unwrap(), interval_i(i, j - 1).unwrap());
        }
    }
}

fn level_set(level: u32, mask: u64) -> DyadicSet {
    let intervals = (0..1u64 << level)
        .filter(|c| (mask >> c) & 1 == 1)
        .map(|c| Interval::new(DyadicRational::new(c, level), DyadicRational::new(c + 1, level)).unwrap());
    DyadicSet::from_intervals((), intervals).unwrap()
}

proptest! {
    #[test]
    fn preimage_preserves_measure(level in 1u32..=6, mask in any::<u64>(), m in 0u64..200) {
        let a = level_set(level, mask & ((1u128 << (1u32 << level)) - 1) as u64);
        let pre = preimage(&a, m).unwrap();
        prop_assert_eq!(pre.measure().unwrap(), a.measure().unwrap());
    }

    #[test]
    fn preimage_matches_pointwise_map(level in 1u32..=6, mask in any::<u64>(), seed in any::<u64>()) {
        let a = level_set(level, mask & ((1u128 << (1u32 << level)) - 1) as u64);
        let r = BinaryPoint::seeded(seed, 128);
        let pre = preimage(&a, 1).unwrap();
        let tr = apply_t(&r, Direction::Forward).unwrap();
        prop_assert_eq!(pre.contains(&r).unwrap(), a.contains(&tr).unwrap());
    }

    #[test]
    fn reverse_bits_is_an_involution(j in any::<u64>(), len in 1u32..=64) {
        let low = if len == 64 { j } else { j & ((1 << len) - 1) };
        prop_assert_eq!(reverse_bits(reverse_bits(low, len), len), low);
    }
}

#[test]
fn b_sets_have_disjoint_images() {
    for n in 1..=64 {
        assert!(disjointness_check(&build_b(n).unwrap(), n).unwrap(), "n = {n}");
    }
}

#[test]
fn c_sets_cover_about_half_of_seeded_points() {
    let cs: Vec<DyadicSet> = (3..=10).map(|k| build_c(k).unwrap()).collect();
    let mut hits = 0;
    for seed in 0..10_000u64 {
        let r = BinaryPoint::seeded(seed, 128);
        let bits = r.bits(40).unwrap();
        let in_c = |k: usize| !bits[0] && !bits[k - 1];
        for (k, c) in (3..=10).zip(&cs) {
            assert_eq!(c.contains(&r).unwrap(), in_c(k), "seed {seed}, k = {k}");
        }
        if (3..=40).any(in_c) {
            hits += 1;
        }
    }
    let freq = f64::from(hits) / 10_000.0;
    assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
}
