//! Builds the binary labels that defeat the count forecaster, then replays the attack by
//! sampling anchored paths.

use forecast_limits::adversary::{extend_labels_thm1, labels_up_to, count_plus, Method};
use forecast_limits::predictors::NamedPredictor;

fn main() -> forecast_limits::Result<()> {
    let predictor = NamedPredictor::DynamicCount(1);
    let start = std::time::Instant::now();
    let attack = extend_labels_thm1(&predictor, 4, &Method::Exact { delta: 1e-4 })?;
    println!("predictor {predictor}, built in {:.2?}", start.elapsed());
    for step in &attack.steps {
        let (plus, minus, residual) = step.probs.exact_masses().expect("exact method");
        println!(
            "k={} f({})={}  P(B+|M0=0)={:.6} P(B-|M0=0)={:.6} residual={:.2e} chosen={:.6}",
            step.level,
            step.state,
            step.bit,
            plus.to_f64(),
            minus.to_f64(),
            residual.to_f64(),
            step.probs.chosen()
        );
    }
    let trials = 10_000;
    for k in 1..=4 {
        let labels = labels_up_to(&attack.table, 2 * k)?;
        let plus = count_plus(&predictor, &labels, trials, 1)?;
        let chosen = if attack.table.odd_label(k) == Some(1) { trials - plus } else { plus };
        println!("k={k}: chosen event in {chosen}/{trials} anchored trials");
    }
    Ok(())
}
