//! Chooses the shifts `L_{s+1}` of the injective labeling against a count forecaster and
//! reports the probability of each chosen event.

use forecast_limits::adversary::{extend_labels_thm2, format_shift_table, Method};
use forecast_limits::predictors::NamedPredictor;

fn main() -> forecast_limits::Result<()> {
    let method = Method::Exact { delta: 1e-4 };
    for name in ["dynamic-count:1", "dynamic-count:2", "const:0.3"] {
        let predictor: NamedPredictor = name.parse()?;
        let start = std::time::Instant::now();
        let attack = extend_labels_thm2(&predictor, 8, &method)?;
        println!("{name}: built in {:.2?}", start.elapsed());
        for step in &attack.steps {
            println!(
                "  s={} L_{}={}  P(chosen)={:.6}  residual<={:.1e}",
                step.level,
                step.state,
                step.bit,
                step.probs.chosen(),
                step.probs.uncertainty
            );
        }
        print!("{}", format_shift_table(&attack.table, name, &method));
    }
    Ok(())
}
