//! The static partitioning estimate on the odometer process: whenever `ω ∈ B_n` the cell
//! of `X_{-1}` is empty, so the estimate is zero while the truth is at least one half.

use forecast_limits::harness::{run_static_counterexample, ExperimentConfig, ExperimentId};

fn main() -> forecast_limits::Result<()> {
    let mut config = ExperimentConfig::default_for(ExperimentId::Thm3);
    config.trials = 200;
    let report = run_static_counterexample(&config)?;
    for row in report.rows.iter().filter(|r| r.in_b).take(8) {
        println!(
            "trial {:3} n {:2}: ω in B_n, estimate {} truth {:.4}",
            row.trial, row.n, row.estimate, row.truth
        );
    }
    println!(
        "error >= 1/2 somewhere in n = 3..=64: {}/{} trials (measure of the union of B_n: {})",
        report.exceed_trials, report.trials, report.exact_measure
    );
    println!("rows contradicting the construction: {}", report.violations);
    Ok(())
}
