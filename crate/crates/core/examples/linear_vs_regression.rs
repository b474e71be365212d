//! A linear autoregression fitted to `X_n = √|X_{n-1}| + ε_n` against the true
//! regression function.

use forecast_limits::markov::{sample_sqrt_ar, Noise};
use forecast_limits::predictors::{compare_mse, linear_ar_fit_predict};

fn main() -> forecast_limits::Result<()> {
    let series = sample_sqrt_ar(1.0, 10_000, Noise::default(), 3);
    let (model, next) = linear_ar_fit_predict(&series, 1)?;
    println!("fitted coefficient {:.4}, forecast {next:.4}", model.coefficients[0]);
    let cmp = compare_mse(&series, 1, |x| x.abs().sqrt(), 50)?;
    println!(
        "MSE linear {:.5}, MSE √|x| {:.5}, difference {:.5} (z = {:.1})",
        cmp.mse_linear,
        cmp.mse_reference,
        cmp.diff,
        cmp.z_score()
    );
    Ok(())
}
