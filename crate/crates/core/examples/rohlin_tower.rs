//! A Rohlin tower for the rotation by `√2 − 1`, the sets `B_n ⊂ C_n`, and the exact L1
//! error of a partitioning estimate fitted to eight observations.

use forecast_limits::harness::{run_static_counterexample, ExperimentConfig, ExperimentId};
use forecast_limits::rotation::{build_tower, cf_convergents, tower_sets, RotationSystem};

fn main() -> forecast_limits::Result<()> {
    let system = RotationSystem::default();
    println!("alpha = {}", system.alpha());
    for (p, q) in cf_convergents(system.alpha(), 8)? {
        println!("  convergent {p}/{q}");
    }
    let tower = build_tower(&system, 32, 0.5)?;
    println!(
        "height {}, base {:?}, coverage {} ≈ {:.4}",
        tower.height(),
        tower.base(),
        tower.coverage(),
        tower.coverage().to_f64()
    );
    let (b, c) = tower_sets(&tower, 8)?;
    println!("μ(B_8) = {} ≈ {:.4}", b.measure()?, b.measure()?.to_f64());
    println!("μ(C_8) = {} ≈ {:.4}", c.measure()?, c.measure()?.to_f64());

    let mut config = ExperimentConfig::default_for(ExperimentId::Thm4);
    config.trials = 100;
    let report = run_static_counterexample(&config)?;
    let mean_l1 = report.rows.iter().filter_map(|r| r.l1).sum::<f64>() / report.rows.len() as f64;
    println!(
        "L1 >= 1/16 in {}/{} trials, mean L1 {:.4}",
        report.exceed_trials, report.trials, mean_l1
    );
    Ok(())
}
