//! Count estimators on a two-state Markov chain approach the true conditional expectation,
//! and the backward and forward scans give the same value.

use forecast_limits::markov::TwoStateChain;
use forecast_limits::predictors::{dynamic_count, static_count};

fn main() -> forecast_limits::Result<()> {
    let chain = TwoStateChain::default();
    let path = chain.sample(100_000, 11);
    for n in [100usize, 1_000, 10_000, 100_000] {
        let data = &path[..n];
        let last = data[n - 1];
        let s = static_count(data, 1);
        let d = dynamic_count(data, 1);
        println!(
            "n {n:6}: context {last}, static {s:.5}, dynamic {d:.5}, truth {:.5}",
            chain.cond_exp(last)
        );
    }
    Ok(())
}
