use std::collections::BTreeSet;
use std::process::Command;

use forecast_limits::adversary::half_width;
use forecast_limits::harness::persist::{csv_name, to_csv, CONFIG_FILE, LABELS_FILE, PLOT_FILE};
use forecast_limits::harness::{load_config, persist, run, ExperimentConfig, ExperimentId, Report};
use forecast_limits::Error;

fn config(id: ExperimentId, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let map = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::from_map(Some(id), &map).unwrap()
}

fn small(id: ExperimentId) -> ExperimentConfig {
    match id {
        ExperimentId::Thm1 => config(id, &[("trials", "500"), ("kmax", "3")]),
        ExperimentId::Thm2 => config(id, &[("trials", "500"), ("smax", "5")]),
        ExperimentId::Thm3 => config(id, &[("trials", "40"), ("nlist", "3-20")]),
        ExperimentId::Thm4 => config(id, &[("trials", "30")]),
        ExperimentId::Consistency => config(id, &[("trials", "2"), ("nlist", "1000,5000")]),
        ExperimentId::Linear => config(id, &[("nlist", "2000")]),
        ExperimentId::CheckPartitions => ExperimentConfig::default_for(id),
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    for id in ExperimentId::ALL {
        let c = small(id);
        let a = to_csv(&run(&c).unwrap());
        let b = to_csv(&run(&c).unwrap());
        assert_eq!(a, b, "{id}");
        assert!(a.lines().count() > 1, "{id}");
    }
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let a = to_csv(&run(&small(ExperimentId::Thm3)).unwrap());
    let mut c = small(ExperimentId::Thm3);
    c.seed += 1;
    assert_ne!(a, to_csv(&run(&c).unwrap()));
}

#[test]
fn attack_rows_carry_binomial_half_widths() {
    let c = small(ExperimentId::Thm1);
    let Report::Attack(r) = run(&c).unwrap() else { panic!("not an attack report") };
    assert_eq!(r.exceedance.rows.len(), 2 * c.kmax);
    assert_eq!(r.steps.len(), c.kmax);
    for row in &r.exceedance.rows {
        assert!((0.0..=1.0).contains(&row.p_hat));
        assert_eq!(row.trials, c.trials);
    }
    for (cond, uncond) in r.exceedance.conditional().zip(r.exceedance.unconditional()) {
        assert_eq!(cond.half_width, half_width(cond.p_hat, cond.trials));
        assert_eq!(cond.half_width, 3.0 * (cond.p_hat * (1.0 - cond.p_hat) / cond.trials as f64).sqrt());
        // the unconditional column is the same indicator mean scaled by P(M_0 = 0)
        assert_eq!(cond.checkpoint, uncond.checkpoint);
        assert_eq!(uncond.p_hat, cond.p_hat * 0.25);
        assert_eq!(uncond.half_width, cond.half_width * 0.25);
        assert_eq!(cond.p_hat, cond.exceed_count as f64 / cond.trials as f64);
    }
}

#[test]
fn constant_zero_forecaster_always_misses() {
    let c = config(ExperimentId::Thm1, &[("trials", "300"), ("kmax", "3"), ("predictor", "zero")]);
    let Report::Attack(r) = run(&c).unwrap() else { panic!("not an attack report") };
    assert!(r.steps.iter().all(|s| s.bit == 1));
    assert!(r.exceedance.conditional().all(|row| row.p_hat == 1.0));
}

#[test]
fn static_summary_is_the_sum_of_its_flags() {
    for id in [ExperimentId::Thm3, ExperimentId::Thm4] {
        let c = small(id);
        let Report::Static(r) = run(&c).unwrap() else { panic!("not a static report") };
        assert_eq!(r.rows.len() as u64, r.trials * c.nlist.len() as u64);
        let hit: BTreeSet<u64> = r.rows.iter().filter(|row| row.exceed).map(|row| row.trial).collect();
        assert_eq!(hit.len() as u64, r.exceed_trials, "{id}");
        assert_eq!(r.frequency, r.exceed_trials as f64 / r.trials as f64);
        let bad = r.rows.iter().filter(|row| !row.consistent).count() as u64;
        assert_eq!(bad, r.violations);
        assert_eq!(r.violations, 0, "{id}");
        for row in r.rows.iter().filter(|row| row.in_b) {
            if id == ExperimentId::Thm3 {
                assert_eq!(row.estimate, 0.0);
                assert!(row.truth >= 0.5);
            } else {
                assert!(row.l1.unwrap() >= 1.0 / 16.0);
            }
        }
    }
}

#[test]
fn persisted_config_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    for id in [ExperimentId::Thm1, ExperimentId::Thm3, ExperimentId::Linear] {
        let c = small(id);
        let report = run(&c).unwrap();
        let out = dir.path().join(id.name());
        let written = persist(&c, &report, &out).unwrap();
        let names: BTreeSet<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert!(names.contains(CONFIG_FILE) && names.contains(PLOT_FILE));
        assert!(names.contains(csv_name(&report)));
        assert_eq!(names.contains(LABELS_FILE), id == ExperimentId::Thm1);
        assert_eq!(load_config(&out.join(CONFIG_FILE)).unwrap(), c);
        let csv = std::fs::read_to_string(out.join(csv_name(&report))).unwrap();
        assert_eq!(csv, to_csv(&report));
    }
}

#[test]
fn persist_reports_the_failing_path() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let c = small(ExperimentId::Linear);
    let report = run(&c).unwrap();
    let err = persist(&c, &report, &file.path().join("sub")).unwrap_err();
    assert!(err.to_string().contains(&file.path().display().to_string()), "{err}");
}

#[test]
fn unknown_experiment_is_a_config_error() {
    assert!(matches!("thm9".parse::<ExperimentId>(), Err(Error::ConfigError(_))));
    assert!(matches!(ExperimentConfig::parse("experiment = nope\n"), Err(Error::ConfigError(_))));
    assert!(matches!(ExperimentConfig::parse("experiment = thm1\nbogus = 1\n"), Err(Error::ConfigError(_))));
}

fn lab(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_forecast-lab")).args(args).output().unwrap();
    (out.status.code(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_status_follows_threshold() {
    let (code, out) = lab(&["linear", "--nlist", "2000", "--threshold", "3"]);
    assert_eq!(code, Some(0), "{out}");
    assert!(out.contains("PASS"));
    let (code, out) = lab(&["linear", "--nlist", "2000", "--threshold", "1e9"]);
    assert_eq!(code, Some(2), "{out}");
    assert!(out.contains("FAIL"));
    let (code, _) = lab(&["thm1", "--trials", "0"]);
    assert_eq!(code, Some(1));
}

#[test]
fn cli_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    std::fs::write(&file, "# a comment\ntrials = 0\nnlist = 2000\n").unwrap();
    let path = file.to_str().unwrap();
    assert_eq!(lab(&["linear", "--config", path]).0, Some(1));
    let out_dir = dir.path().join("out");
    let (code, _) = lab(&["linear", "--config", path, "--trials", "1", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let saved = load_config(&out_dir.join(CONFIG_FILE)).unwrap();
    assert_eq!((saved.trials, saved.nlist), (1, vec![2000]));
}
