use proptest::prelude::*;

use forecast_limits::exact::DyadicRational;
use forecast_limits::markov::TwoStateChain;
use forecast_limits::predictors::{
    dynamic_count, linear_ar_fit_predict, partitioning_auto, partitioning_general, lagged_pairs,
    static_count, FullHistory, IntervalCells, NamedPredictor, Predictor, Summarize,
};
use forecast_limits::Error;

fn replay<X, P: Summarize<X>>(p: &P, data: &[X], suffix_len: usize) -> f64 {
    let mut s = p.start(&data[data.len() - suffix_len..]);
    for x in data {
        p.push(&mut s, x);
    }
    p.finish(&s)
}

fn predictors() -> Vec<NamedPredictor> {
    ["zero", "const:0.375", "dynamic-count:1", "dynamic-count:2", "static-count:1", "static-count:3"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

proptest! {
    #[test]
    fn summaries_replay_binary_predictions(data in prop::collection::vec(0u8..2, 1..40), cut in 0usize..6) {
        for p in predictors() {
            let k = cut.min(data.len());
            prop_assert_eq!(replay(&p, &data, k), p.predict(&data), "{}", p);
            prop_assert_eq!(replay(&FullHistory(p.clone()), &data, k), p.predict(&data));
        }
    }

    #[test]
    fn summaries_replay_dyadic_predictions(raw in prop::collection::vec(0u32..6, 1..30), cut in 0usize..4) {
        let data: Vec<DyadicRational> = raw
            .iter()
            .map(|&s| if s == 0 { DyadicRational::zero() } else { DyadicRational::pow2_neg(s) })
            .collect();
        for p in predictors() {
            let k = cut.min(data.len());
            prop_assert_eq!(replay(&p, &data, k), p.predict(&data), "{}", p);
        }
    }

    #[test]
    fn auto_matches_general_on_lagged_pairs(
        series in prop::collection::vec(-0.999f64..0.999, 2..60),
        cuts in prop::collection::btree_set(-99i32..99, 0..6),
        x in -0.999f64..0.999,
    ) {
        let mut edges = vec![-1.0];
        edges.extend(cuts.iter().map(|&c| f64::from(c) / 100.0));
        edges.push(1.0);
        let cells = IntervalCells::new(edges).unwrap();
        let auto = partitioning_auto(&series, &cells, &x, |v: &f64| *v).unwrap().unwrap_or(0.0);
        let general = partitioning_general(&lagged_pairs(&series, |v: &f64| *v), &cells, &x).unwrap();
        prop_assert_eq!(auto.to_bits(), general.to_bits());
    }

    #[test]
    fn count_estimators_stay_in_label_range(data in prop::collection::vec(0u8..2, 0..50), n in 1usize..4) {
        for v in [static_count(&data, n), dynamic_count(&data, n)] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

/// `x_t = Σ c_i x_{t-i}` from the given seed values.
fn recurrence(coef: &[f64], init: &[f64], len: usize) -> Vec<f64> {
    let mut xs = init.to_vec();
    while xs.len() < len {
        let t = xs.len();
        xs.push(coef.iter().enumerate().map(|(i, c)| c * xs[t - 1 - i]).sum());
    }
    xs
}

#[test]
fn linear_fit_is_exact_on_noise_free_recurrences() {
    let theta = 0.7f64;
    let cases: [(&[f64], &[f64]); 3] = [
        (&[0.5], &[1.0]),
        (&[2.0 * theta.cos(), -1.0], &[1.0, 0.3]),
        (&[0.9 + 2.0 * theta.cos(), -1.0 - 1.8 * theta.cos(), 0.9], &[1.0, -0.4, 0.2]),
    ];
    for (coef, init) in cases {
        let p = coef.len();
        let xs = recurrence(coef, init, 41);
        let (train, next) = (&xs[..40], xs[40]);
        let (model, pred) = linear_ar_fit_predict(train, p).unwrap();
        for (a, b) in model.coefficients.iter().zip(coef) {
            assert!((a - b).abs() < 1e-8, "order {p}: {:?}", model.coefficients);
        }
        assert!((pred - next).abs() <= 1e-8 * next.abs().max(1.0), "order {p}: {pred} vs {next}");
        // a larger order sees a rank-deficient design; any fit it returns must still be exact
        match linear_ar_fit_predict(train, p + 1) {
            Ok((_, pred)) => assert!((pred - next).abs() <= 1e-6 * next.abs().max(1.0)),
            Err(e) => assert!(matches!(e, Error::SingularFit), "{e}"),
        }
    }
}

#[test]
fn linear_fit_on_white_noise_has_small_coefficient() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (model, _) = linear_ar_fit_predict(&xs, 1).unwrap();
    assert!(model.coefficients[0].abs() < 0.05);
}

#[test]
fn count_estimators_are_consistent_on_a_two_state_chain() {
    let chain = TwoStateChain::default();
    for seed in 0..5 {
        let xs = chain.sample(100_000, seed);
        for ctx in [0u8, 1] {
            let end = xs.iter().rposition(|&x| x == ctx).unwrap();
            let prefix = &xs[..=end];
            for v in [static_count(prefix, 1), dynamic_count(prefix, 1)] {
                assert!((v - chain.cond_exp(ctx)).abs() <= 0.01, "seed {seed}, context {ctx}: {v}");
            }
        }
    }
}
