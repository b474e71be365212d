//! Experiment configuration and its flat `key = value` text form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::adversary::Method;
use crate::error::{Error, Result};
use crate::partition::PartitionSchedule;
use crate::predictors::NamedPredictor;
use crate::rotation::{RotationSystem, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Consistency,
    Linear,
    CheckPartitions,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Thm1,
        ExperimentId::Thm2,
        ExperimentId::Thm3,
        ExperimentId::Thm4,
        ExperimentId::Consistency,
        ExperimentId::Linear,
        ExperimentId::CheckPartitions,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Thm1 => "thm1",
            ExperimentId::Thm2 => "thm2",
            ExperimentId::Thm3 => "thm3",
            ExperimentId::Thm4 => "thm4",
            ExperimentId::Consistency => "consistency",
            ExperimentId::Linear => "linear",
            ExperimentId::CheckPartitions => "check-partitions",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::ConfigError(format!("unknown experiment `{s}`")))
    }
}

/// A rotation number `a + b·√d` with rational `a`, `b`, written `d,a,b` (`a`, `b` may be
/// fractions such as `-1/2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaSpec {
    pub d: u64,
    pub a: (i64, i64),
    pub b: (i64, i64),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec {
            d: 2,
            a: (-1, 1),
            b: (1, 1),
        }
    }
}

impl AlphaSpec {
    pub fn system(&self) -> Result<RotationSystem> {
        RotationSystem::from_parts(self.d, self.a, self.b)
    }
}

fn fmt_ratio((n, d): (i64, i64)) -> String {
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn parse_ratio(s: &str) -> Option<(i64, i64)> {
    match s.trim().split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            (d > 0).then_some((n.trim().parse().ok()?, d))
        }
        None => Some((s.trim().parse().ok()?, 1)),
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.d, fmt_ratio(self.a), fmt_ratio(self.b))
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ConfigError(format!("alpha must be `d,a,b`, got `{s}`"));
        let parts: Vec<&str> = s.split(',').collect();
        let [d, a, b] = parts[..] else {
            return Err(bad());
        };
        Ok(AlphaSpec {
            d: d.trim().parse().map_err(|_| bad())?,
            a: parse_ratio(a).ok_or_else(bad)?,
            b: parse_ratio(b).ok_or_else(bad)?,
        })
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Rotation => "rotation",
        Target::Identity => "identity",
    }
}

fn parse_target(s: &str) -> Result<Target> {
    match s.trim() {
        "rotation" => Ok(Target::Rotation),
        "identity" => Ok(Target::Identity),
        _ => Err(Error::ConfigError(format!("unknown target `{s}`"))),
    }
}

/// `4,16,64`, `3-64` or a mix such as `3-8,16`.
pub fn parse_nlist(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::ConfigError(format!("bad n list `{s}`"));
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for part in s.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

pub fn format_nlist(ns: &[u64]) -> String {
    ns.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    /// Trials (thm1 to thm4), seeds (consistency, linear).
    pub trials: u64,
    pub kmax: usize,
    pub smax: usize,
    pub nlist: Vec<u64>,
    pub q_schedule: PartitionSchedule,
    pub method: Method,
    pub predictor: NamedPredictor,
    pub alpha: AlphaSpec,
    /// Rohlin tower height `N` (thm4).
    pub tower_height: usize,
    /// Allowed uncovered mass of the tower (thm4).
    pub epsilon: f64,
    pub target: Target,
    pub out: Option<PathBuf>,
    pub threshold: Option<f64>,
}

/// Keys accepted in configuration files and as command-line flags.
pub const KEYS: [&str; 15] = [
    "experiment",
    "seed",
    "trials",
    "kmax",
    "smax",
    "nlist",
    "q-schedule",
    "method",
    "predictor",
    "alpha",
    "tower-height",
    "epsilon",
    "target",
    "out",
    "threshold",
];

impl ExperimentConfig {
    pub fn default_for(experiment: ExperimentId) -> Self {
        let (trials, nlist, q_schedule) = match experiment {
            ExperimentId::Thm1 | ExperimentId::Thm2 => (10_000, vec![], PartitionSchedule::default()),
            ExperimentId::Thm3 => (1_000, (3..=64).collect(), PartitionSchedule::Sqrt { min: 1 }),
            ExperimentId::Thm4 => (
                1_000,
                vec![8],
                PartitionSchedule::Explicit([(8, 24)].into_iter().collect()),
            ),
            ExperimentId::Consistency => (5, vec![1_000, 10_000, 100_000], PartitionSchedule::default()),
            ExperimentId::Linear => (1, vec![10_000], PartitionSchedule::default()),
            ExperimentId::CheckPartitions => {
                (1, vec![4, 16, 64, 256], PartitionSchedule::Sqrt { min: 1 })
            }
        };
        ExperimentConfig {
            experiment,
            seed: 1,
            trials,
            kmax: 4,
            smax: 8,
            nlist,
            q_schedule,
            method: Method::default(),
            predictor: NamedPredictor::DynamicCount(1),
            alpha: AlphaSpec::default(),
            tower_height: 32,
            epsilon: 0.5,
            target: Target::Rotation,
            out: None,
            threshold: None,
        }
    }

    /// Applies `key = value` entries over the defaults of `experiment` (or of the
    /// `experiment` entry when `experiment` is `None`).
    pub fn from_map(experiment: Option<ExperimentId>, map: &BTreeMap<String, String>) -> Result<Self> {
        let id = match (experiment, map.get("experiment")) {
            (Some(id), _) => id,
            (None, Some(e)) => e.parse()?,
            (None, None) => return Err(Error::ConfigError("no experiment given".into())),
        };
        let mut c = Self::default_for(id);
        for (key, value) in map {
            c.set(key, value)?;
        }
        c.experiment = id;
        c.method = c.method.clone().with_seed(c.seed);
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |what: &str| Error::ConfigError(format!("`{key}` expects {what}, got `{value}`"));
        let v = value.trim();
        match key {
            "experiment" => self.experiment = v.parse()?,
            "seed" => self.seed = v.parse().map_err(|_| num("an integer"))?,
            "trials" => self.trials = v.parse().map_err(|_| num("an integer"))?,
            "kmax" => self.kmax = v.parse().map_err(|_| num("an integer"))?,
            "smax" => self.smax = v.parse().map_err(|_| num("an integer"))?,
            "nlist" => self.nlist = parse_nlist(v)?,
            "q-schedule" => self.q_schedule = v.parse()?,
            "method" => self.method = v.parse()?,
            "predictor" => self.predictor = v.parse()?,
            "alpha" => self.alpha = v.parse()?,
            "tower-height" => self.tower_height = v.parse().map_err(|_| num("an integer"))?,
            "epsilon" => self.epsilon = v.parse().map_err(|_| num("a number"))?,
            "target" => self.target = parse_target(v)?,
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "threshold" => {
                self.threshold = if v.is_empty() {
                    None
                } else {
                    Some(v.parse().map_err(|_| num("a number"))?)
                }
            }
            _ => return Err(Error::ConfigError(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::ConfigError(m.to_string()));
        if self.trials == 0 {
            return fail("trials must be positive");
        }
        if self.kmax == 0 {
            return fail("kmax must be at least 1");
        }
        if self.smax < 2 {
            return fail("smax must be at least 2");
        }
        if self.tower_height == 0 {
            return fail("tower-height must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail("epsilon must lie in (0, 1)");
        }
        if self.threshold.is_some_and(|t| !t.is_finite()) {
            return fail("threshold must be finite");
        }
        let needs_n = matches!(
            self.experiment,
            ExperimentId::Thm3
                | ExperimentId::Thm4
                | ExperimentId::Consistency
                | ExperimentId::Linear
                | ExperimentId::CheckPartitions
        );
        if needs_n && (self.nlist.is_empty() || self.nlist.contains(&0)) {
            return fail("nlist must hold positive sizes");
        }
        if matches!(self.experiment, ExperimentId::Thm3 | ExperimentId::Thm4) {
            if self.nlist.contains(&1) {
                return fail("the static experiments need n >= 2");
            }
            for &n in &self.nlist {
                self.q_schedule.q(n)?;
            }
        }
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.to_string());
        put("seed", self.seed.to_string());
        put("trials", self.trials.to_string());
        put("kmax", self.kmax.to_string());
        put("smax", self.smax.to_string());
        put("nlist", format_nlist(&self.nlist));
        put("q-schedule", self.q_schedule.to_string());
        put("method", self.method.to_string());
        put("predictor", self.predictor.to_string());
        put("alpha", self.alpha.to_string());
        put("tower-height", self.tower_height.to_string());
        put("epsilon", self.epsilon.to_string());
        put("target", target_name(self.target).to_string());
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        if let Some(t) = self.threshold {
            put("threshold", t.to_string());
        }
        m
    }

    /// `key = value` lines in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let map = self.to_map();
        KEYS.iter()
            .filter_map(|k| map.get(*k).map(|v| format!("{k} = {v}\n")))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(None, &parse_kv(text)?)
    }
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigError(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::ConfigError(format!("line {}: unknown key `{k}`", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}
