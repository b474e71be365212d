//! The eight acceptance checks, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use forecast_limits::exact::{qr_compare, QuadraticReal};
use forecast_limits::harness::{
    run_attack, run_baseline, run_static_counterexample, ExperimentConfig, ExperimentId,
};
use forecast_limits::odometer::{build_c, disjointness_check, build_b, image_of_interval, interval_i};
use forecast_limits::rotation::{build_tower, tower_sets};

type Check = Result<String, String>;

/// Name, time budget in seconds, and the check.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn odometer_structure() -> Check {
    let e = |e: forecast_limits::Error| e.to_string();
    for i in 1..=10u32 {
        for j in 1..1u64 << i {
            ensure(image_of_interval(i, j).map_err(e)? == interval_i(i, j - 1).map_err(e)?, || {
                format!("T(I_{j}^{i}) differs from I_{}^{i}", j - 1)
            })?;
        }
    }
    for n in 1..=64 {
        let b = build_b(n).map_err(e)?;
        ensure(disjointness_check(&b, n).map_err(e)?, || format!("B_{n} images overlap"))?;
    }
    for k in 2..=10 {
        let m = build_c(k).map_err(e)?.measure().map_err(e)?.to_rational();
        ensure(m == rat(1, 4), || format!("measure(C_{k}) = {m}"))?;
    }
    Ok("interval images, disjointness for n <= 64, measure(C_k) = 1/4".into())
}

fn odometer_counterexample() -> Check {
    let config = ExperimentConfig::default_for(ExperimentId::Thm3);
    let r = run_static_counterexample(&config).map_err(|e| e.to_string())?;
    ensure(r.violations == 0, || format!("{} trials on B_n broke the construction", r.violations))?;
    ensure(r.frequency >= 0.4, || format!("frequency {} < 0.4", r.frequency))?;
    Ok(format!(
        "{} trials, frequency {:.4} (union of B_n has measure {}), no violations",
        r.trials, r.frequency, r.exact_measure
    ))
}

fn attack(id: ExperimentId) -> Check {
    let config = ExperimentConfig::default_for(id);
    let delta = 1e-4;
    let r = run_attack(&config).map_err(|e| e.to_string())?;
    let mut worst_exact = f64::INFINITY;
    for step in &r.steps {
        let p = step.probs.chosen();
        worst_exact = worst_exact.min(p);
        ensure(p >= 0.125 - delta, || {
            format!("level {}: chosen probability {p} < 1/8 - δ", step.level)
        })?;
    }
    let mut worst_mc = f64::INFINITY;
    for row in r.exceedance.unconditional() {
        worst_mc = worst_mc.min(row.p_hat);
        ensure(row.p_hat >= 0.105, || {
            format!("checkpoint {}: exceedance {} < 0.105", row.checkpoint, row.p_hat)
        })?;
    }
    ensure(!r.steps.is_empty() && r.exceedance.unconditional().count() > 0, || {
        "no levels were attacked".into()
    })?;
    Ok(format!(
        "{} levels, min chosen probability {worst_exact:.4}, min exceedance {worst_mc:.4} over {} trials",
        r.steps.len(),
        config.trials
    ))
}

fn rotation_counterexample() -> Check {
    let e = |e: forecast_limits::Error| e.to_string();
    let config = ExperimentConfig::default_for(ExperimentId::Thm4);
    let system = config.alpha.system().map_err(e)?;
    let tower = build_tower(&system, config.tower_height, config.epsilon).map_err(e)?;
    let half = QuadraticReal::rational(rat(1, 2), system.d());
    ensure(qr_compare(tower.coverage(), &half).map_err(e)?.is_ge(), || {
        format!("tower coverage {} < 1/2", tower.coverage())
    })?;
    let n = config.nlist[0];
    let (b_n, _) = tower_sets(&tower, n as usize).map_err(e)?;
    let mu = b_n.measure().map_err(e)?;
    let eighth = QuadraticReal::rational(rat(1, 8), system.d());
    ensure(qr_compare(&mu, &eighth).map_err(e)?.is_ge(), || format!("μ(B_{n}) = {mu} < 1/8"))?;
    let h = config.q_schedule.h(n).map_err(e)?;
    ensure(h == rat(1, 24) && h < rat(1, 12), || format!("cell width {h}"))?;
    let r = run_static_counterexample(&config).map_err(e)?;
    let m = mu.to_f64();
    let floor = m - 3.0 * (m * (1.0 - m) / r.trials as f64).sqrt();
    ensure(r.violations == 0, || format!("{} violations", r.violations))?;
    ensure(r.frequency >= floor, || format!("frequency {} < {floor}", r.frequency))?;
    Ok(format!(
        "coverage {} ≈ {:.4}, μ(B_{n}) = {mu} ≈ {m:.4}, frequency {:.3} >= {floor:.4}",
        tower.coverage(),
        tower.coverage().to_f64(),
        r.frequency
    ))
}

fn count_consistency() -> Check {
    let config = ExperimentConfig::default_for(ExperimentId::Consistency);
    let r = run_baseline(&config).map_err(|e| e.to_string())?;
    let n = config.nlist.iter().max().copied().unwrap_or(0);
    ensure(n >= 100_000 && config.trials == 5, || format!("n = {n}, seeds = {}", config.trials))?;
    ensure(r.metric <= 0.01, || format!("max context error {} > 0.01", r.metric))?;
    Ok(format!("max context error {:.5} at n = {n} over 5 seeds", r.metric))
}

fn linear_suboptimality() -> Check {
    let config = ExperimentConfig::default_for(ExperimentId::Linear);
    let r = run_baseline(&config).map_err(|e| e.to_string())?;
    ensure(r.metric >= 3.0, || format!("z = {} < 3", r.metric))?;
    Ok(format!("MSE gap z = {:.2} at n = {}", r.metric, config.nlist[0]))
}

fn oracles() -> Check {
    let counts = common::check_counts_exhaustive(12)?;
    let filters = common::check_forward_filter(10)?;
    let worst = common::check_l1_quadrature(100, 7)?;
    Ok(format!(
        "{counts} count series, {filters} filter strings, L1 discrepancy {worst:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("odometer structure", 5, odometer_structure),
        ("odometer counterexample", 60, odometer_counterexample),
        ("binary attack", 120, || attack(ExperimentId::Thm1)),
        ("relabeled attack", 120, || attack(ExperimentId::Thm2)),
        ("rotation counterexample", 120, rotation_counterexample),
        ("count consistency", 30, count_consistency),
        ("linear suboptimality", 30, linear_suboptimality),
        ("oracle equivalences", 60, oracles),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}; over the {limit} s budget"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {} ({name}): {msg} [{:.2} s]", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {msg} [{:.2} s]", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
