//! Writing configurations and results to an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::experiments::Report;
use crate::error::{Error, Result};

pub const CONFIG_FILE: &str = "config.txt";
pub const PLOT_FILE: &str = "plot.dat";
pub const LABELS_FILE: &str = "labels.txt";

/// The CSV file name for a report.
pub fn csv_name(report: &Report) -> &'static str {
    match report {
        Report::Attack(_) => "attack.csv",
        Report::Static(_) => "static.csv",
        Report::Baseline(_) => "baseline.csv",
        Report::Partitions(_) => "partitions.csv",
    }
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Attack(a) => {
            out.push_str("checkpoint,trials,exceed_count,p_hat,half_width,conditional\n");
            for r in &a.exceedance.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.checkpoint, r.trials, r.exceed_count, r.p_hat, r.half_width, r.conditional
                );
            }
        }
        Report::Static(s) => {
            out.push_str("n,trial,in_Bn,estimate,truth,error,l1\n");
            for r in &s.rows {
                let l1 = r.l1.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n, r.trial, r.in_b, r.estimate, r.truth, r.error, l1
                );
            }
        }
        Report::Baseline(b) => {
            out.push_str("n,context_or_model,error\n");
            for r in &b.rows {
                let _ = writeln!(out, "{},{},{}", r.n, r.label, r.value);
            }
        }
        Report::Partitions(p) => {
            out.push_str("n,window,max_diameter,cells_per_n\n");
            for r in &p.rows {
                let _ = writeln!(out, "{},{},{},{}", r.n, r.window, r.max_diameter, r.cells_per_n);
            }
        }
    }
    out
}

/// Two whitespace-separated columns `x y`.
pub fn plot_data(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Attack(a) => {
            out.push_str("# checkpoint p_hat_given_anchor\n");
            for r in a.exceedance.conditional() {
                let _ = writeln!(out, "{} {}", r.checkpoint, r.p_hat);
            }
        }
        Report::Static(s) => {
            out.push_str("# n exceed_frequency\n");
            let mut ns: Vec<u64> = s.rows.iter().map(|r| r.n).collect();
            ns.sort_unstable();
            ns.dedup();
            for n in ns {
                let hits = s.rows.iter().filter(|r| r.n == n && r.exceed).count();
                let _ = writeln!(out, "{n} {}", hits as f64 / s.trials as f64);
            }
        }
        Report::Baseline(b) => {
            out.push_str("# n value\n");
            let mut ns: Vec<u64> = b.rows.iter().map(|r| r.n).collect();
            ns.dedup();
            for n in ns {
                let worst = b
                    .rows
                    .iter()
                    .filter(|r| r.n == n && !r.label.starts_with('z'))
                    .map(|r| r.value)
                    .fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(out, "{n} {worst}");
            }
        }
        Report::Partitions(p) => {
            out.push_str("# n max_diameter\n");
            for r in p.rows.iter().filter(|r| r.window == 0) {
                let _ = writeln!(out, "{} {}", r.n, r.max_diameter);
            }
        }
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the configuration, the CSV results, the plot data and (for attacks) the label
/// table into `dir`. Returns the written paths.
pub fn persist(config: &ExperimentConfig, report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write(dir.join(CONFIG_FILE), &config.to_text())?,
        write(dir.join(csv_name(report)), &to_csv(report))?,
        write(dir.join(PLOT_FILE), &plot_data(report))?,
    ];
    if let Report::Attack(a) = report {
        written.push(write(dir.join(LABELS_FILE), &a.labels)?);
    }
    Ok(written)
}

/// Reads a configuration file written by [`persist`] or by hand.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::parse(&text)
}
