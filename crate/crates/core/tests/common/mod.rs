#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forecast_limits::exact::{AlgebraicSet, Interval, QuadraticReal};
use forecast_limits::markov::{CondExpMode, LabelTable, Labeling};
use forecast_limits::partition::Partition;
use forecast_limits::predictors::{dynamic_count, static_count};
use forecast_limits::rotation::{l1_error_exact, RotationSystem, Target};

/// `X_{-i}` of a series stored in time order.
fn back(data: &[u8], i: usize) -> u8 {
    data[data.len() - i]
}

/// Backward estimator written from its defining sums with negative time indices.
pub fn static_oracle(data: &[u8], n_ctx: usize) -> f64 {
    let n = data.len();
    let (mut num, mut den) = (0u32, 0u32);
    for j in 1..=n.saturating_sub(n_ctx) {
        // context X_{-j-N}^{-j-1} against X_{-N}^{-1}
        if (1..=n_ctx).all(|l| back(data, j + l) == back(data, l)) {
            num += u32::from(back(data, j));
            den += 1;
        }
    }
    if den == 0 {
        0.0
    } else {
        f64::from(num) / f64::from(den)
    }
}

/// Forward estimator: every position whose preceding `N` symbols equal the final `N`.
pub fn dynamic_oracle(data: &[u8], n_ctx: usize) -> f64 {
    let n = data.len();
    let tail: Vec<u8> = data[n.saturating_sub(n_ctx)..].to_vec();
    let succ: Vec<u8> = (n_ctx..n)
        .filter(|&j| data[j - n_ctx..j] == tail[..])
        .map(|j| data[j])
        .collect();
    if succ.is_empty() {
        0.0
    } else {
        succ.iter().map(|&x| f64::from(x)).sum::<f64>() / succ.len() as f64
    }
}

/// Compares both count estimators with the oracles on every binary string of length
/// `N+1..=max_len` for `N = 1..=3`. Returns the number of comparisons.
pub fn check_counts_exhaustive(max_len: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n_ctx in 1..=3 {
        for len in n_ctx + 1..=max_len {
            for code in 0u32..(1 << len) {
                let data: Vec<u8> = (0..len).map(|i| ((code >> i) & 1) as u8).collect();
                let (s, so) = (static_count(&data, n_ctx), static_oracle(&data, n_ctx));
                let (d, dor) = (dynamic_count(&data, n_ctx), dynamic_oracle(&data, n_ctx));
                if s != so || d != dor {
                    return Err(format!(
                        "{data:?} N={n_ctx}: static {s} vs {so}, dynamic {d} vs {dor}"
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// All state paths of length `len` from state 0 with their probabilities as `(numerator, 2^e)`.
fn paths_from_zero(len: usize) -> Vec<(Vec<usize>, u32)> {
    let mut out = vec![(vec![0usize], 0u32)];
    for _ in 1..len {
        let mut next = Vec::new();
        for (p, coins) in out {
            let s = *p.last().unwrap();
            if s < 2 {
                let mut q = p.clone();
                q.push(s + 1);
                next.push((q, coins));
            } else {
                for t in [0, s + 1] {
                    let mut q = p.clone();
                    q.push(t);
                    next.push((q, coins + 1));
                }
            }
        }
        out = next;
    }
    out
}

/// `E(X_len | X_0^{len-1} = obs, M_0 = 0)` by brute-force path enumeration.
pub fn forward_oracle(obs: &[u8], table: &LabelTable) -> Option<BigRational> {
    let mut num = BigRational::from_integer(0.into());
    let mut den = BigRational::from_integer(0.into());
    for (path, coins) in paths_from_zero(obs.len()) {
        let labels: Vec<u8> = path.iter().map(|&s| table.label(s).unwrap()).collect();
        if labels != obs {
            continue;
        }
        let w = BigRational::new(1.into(), BigInt::from(1u64) << coins);
        let s = *path.last().unwrap();
        let next: BigRational = if s < 2 {
            BigRational::from_integer(table.label(s + 1).unwrap().into())
        } else {
            BigRational::new(
                (u32::from(table.label(0).unwrap()) + u32::from(table.label(s + 1).unwrap())).into(),
                2.into(),
            )
        };
        num += &w * next;
        den += w;
    }
    (den != BigRational::from_integer(0.into())).then(|| num / den)
}

/// Forward-mode conditional expectations against [`forward_oracle`] for every observation of
/// length `3..=max_len` over the 16 tables with `f(3), f(5), f(7), f(9)` chosen freely.
pub fn check_forward_filter(max_len: usize) -> Result<usize, String> {
    let mut checked = 0;
    for code in 0u8..16 {
        let table = LabelTable::from_odd((0..4).map(|i| (code >> i) & 1).collect()).unwrap();
        for len in 3..=max_len {
            let strings: BTreeSet<Vec<u8>> = paths_from_zero(len)
                .into_iter()
                .map(|(p, _)| p.iter().map(|&s| table.label(s).unwrap()).collect())
                .collect();
            for obs in strings {
                let got = forecast_limits::markov::cond_exp_thm1(&obs, &table, CondExpMode::Forward)
                    .map_err(|e| format!("{obs:?}: {e}"))?;
                let want = forward_oracle(&obs, &table).expect("string is generated by a path");
                if got != want {
                    return Err(format!("table {code:04b}, {obs:?}: {got} vs {want}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// `∫ |m̂ − m|` by Simpson's rule on every piece where both the estimate and `m` are affine
/// and the sign of the difference is fixed.
pub fn l1_quadrature(
    alpha: f64,
    cells: &[(Vec<(f64, f64)>, f64)],
    target: Target,
) -> f64 {
    let wrap = 1.0 - alpha;
    let mut cuts = vec![0.0, 1.0, wrap];
    for (pieces, c) in cells {
        for &(a, b) in pieces {
            cuts.push(a);
            cuts.push(b);
        }
        match target {
            Target::Rotation => {
                cuts.push(c - alpha);
                cuts.push(c - alpha + 1.0);
            }
            Target::Identity => cuts.push(*c),
        }
    }
    cuts.retain(|x| (0.0..=1.0).contains(x));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let value_at = |x: f64| {
        cells
            .iter()
            .find(|(pieces, _)| pieces.iter().any(|&(a, b)| a <= x && x < b))
            .map(|(_, c)| *c)
            .expect("cells cover [0, 1)")
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let mid = 0.5 * (u + v);
        let c = value_at(mid);
        let shift = match target {
            Target::Rotation if mid < wrap => alpha,
            Target::Rotation => alpha - 1.0,
            Target::Identity => 0.0,
        };
        let g = |x: f64| (c - (x + shift)).abs();
        total += (v - u) / 6.0 * (g(u) + 4.0 * g(mid) + g(v));
    }
    total
}

/// One randomized piecewise-constant estimate on a grid split by a random set.
pub struct L1Case {
    pub target: Target,
    pub partition: Partition<QuadraticReal>,
    pub values: Vec<QuadraticReal>,
}

pub fn random_l1_case(rng: &mut ChaCha8Rng, system: &RotationSystem) -> L1Case {
    let d = system.d();
    let point = |rng: &mut ChaCha8Rng| {
        let a = BigRational::new(rng.gen_range(-50i64..50).into(), rng.gen_range(1i64..20).into());
        let b = BigRational::new(rng.gen_range(-20i64..20).into(), rng.gen_range(1i64..20).into());
        QuadraticReal::new(a, b, d).unwrap().fract()
    };
    let mut pieces = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let (x, y) = (point(rng), point(rng));
        if let Ok(iv) = match forecast_limits::exact::qr_compare(&x, &y).unwrap() {
            std::cmp::Ordering::Less => Interval::new(x, y),
            _ => Interval::new(y, x),
        } {
            pieces.push(iv);
        }
    }
    let set = AlgebraicSet::from_intervals(d, pieces).unwrap();
    let q = rng.gen_range(1..13);
    let partition = Partition::grid_split(8, q, &set).unwrap();
    let values = (0..partition.len())
        .map(|_| {
            let a = BigRational::new(rng.gen_range(0i64..=40).into(), 40.into());
            let b = BigRational::new(rng.gen_range(-3i64..=3).into(), 40.into());
            QuadraticReal::new(a, b, d).unwrap()
        })
        .collect();
    let target = if rng.gen_bool(0.5) {
        Target::Rotation
    } else {
        Target::Identity
    };
    L1Case {
        target,
        partition,
        values,
    }
}

/// `l1_error_exact` against [`l1_quadrature`] on `cases` random estimates. Returns the
/// largest absolute discrepancy.
pub fn check_l1_quadrature(cases: usize, seed: u64) -> Result<f64, String> {
    let system = RotationSystem::default();
    let alpha = system.alpha().to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let case = random_l1_case(&mut rng, &system);
        let exact = l1_error_exact(&system, &case.partition, &case.values, case.target)
            .map_err(|e| format!("case {i}: {e}"))?
            .to_f64();
        let cells: Vec<(Vec<(f64, f64)>, f64)> = case
            .partition
            .cells()
            .iter()
            .zip(&case.values)
            .map(|(cell, v)| {
                let pieces = cell
                    .set
                    .intervals()
                    .iter()
                    .map(|iv| (iv.lower().to_f64(), iv.upper().to_f64()))
                    .collect();
                (pieces, v.to_f64())
            })
            .collect();
        let approx = l1_quadrature(alpha, &cells, case.target);
        worst = worst.max((exact - approx).abs());
        if (exact - approx).abs() > 1e-9 {
            return Err(format!("case {i}: exact {exact} vs quadrature {approx}"));
        }
    }
    Ok(worst)
}
