//! Label constructions that defeat a given predictor on the renewal chain.
//!
//! Starting from state 0, a path to the first visit of the target level `T` is a sequence of
//! failed excursions `0, 1, ..., h` (`2 <= h < T`, probability `2^{-(h-1)}`) followed by one
//! successful climb `0, 1, ..., T` (probability `2^{-(T-2)}`). The exact method propagates
//! probability mass round by round over a compact summary of the predictor's state.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::DyadicRational;
use crate::markov::{sample_until_hit, stream_rng, LabelTable, Labeling, ShiftTable};
use crate::predictors::{Observation, Predictor, Summarize};

/// Predictions at or above this value fall in `B⁺`.
pub const EVENT_THRESHOLD: f64 = 0.25;

/// Probability of the anchor `M_0 = 0` under the stationary law.
pub const ANCHOR_PROBABILITY: f64 = 0.25;

/// Fixed-point scale of the exact method: masses are integers in units of `2^-120`.
pub const MASS_BITS: u32 = 120;
const MASS_ONE: u128 = 1 << MASS_BITS;

/// Upper bound on live summaries in one round of the exact method.
pub const MAX_SUMMARIES: usize = 4_000_000;

/// One anchored path from state 0 to the first visit of the target level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAtom {
    pub states: Vec<usize>,
    /// Probability given `M_0 = 0`.
    pub prob: DyadicRational,
}

/// Enumerates anchored paths to `target` in nonincreasing probability until the omitted
/// mass is at most `delta`. Returns the atoms and the exact omitted mass.
pub fn enumerate_paths(
    target: usize,
    delta: f64,
    max_atoms: usize,
) -> Result<(Vec<PathAtom>, DyadicRational)> {
    if target < 2 {
        return Err(Error::IndexError(format!("target level {target} is below 2")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ConfigError(format!("mass tolerance {delta} not in (0, 1)")));
    }
    let climb = target - 2;
    let mut atoms = Vec::new();
    let mut covered = DyadicRational::zero();
    let mut flips = climb;
    loop {
        let prob = DyadicRational::pow2_neg(flips as u32);
        let mut parts = Vec::new();
        let mut batch = Vec::new();
        compositions(flips - climb, climb, &mut parts, &mut batch);
        for fails in batch {
            if atoms.len() >= max_atoms {
                return Err(Error::CapExceeded {
                    index: atoms.len(),
                    cap: max_atoms,
                });
            }
            let mut states = Vec::new();
            for p in fails {
                states.extend(0..=p + 1);
            }
            states.extend(0..=target);
            covered = &covered + &prob;
            atoms.push(PathAtom {
                states,
                prob: prob.clone(),
            });
        }
        let residual = &DyadicRational::one() - &covered;
        if residual.to_f64() <= delta {
            return Ok((atoms, residual));
        }
        flips += 1;
    }
}

/// All ordered compositions of `m` into parts in `1..=max_part`, lexicographically.
fn compositions(m: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if m == 0 {
        out.push(prefix.clone());
        return;
    }
    for p in 1..=max_part.min(m) {
        prefix.push(p);
        compositions(m - p, max_part, prefix, out);
        prefix.pop();
    }
}

/// Sums atom probabilities by the sign of the event `Ê >= 1/4`, by direct prediction on each
/// observed string. Returns `(B⁺, B⁻)` masses given the anchor.
pub fn event_masses_from_atoms<X: Observation, P: Predictor<X> + ?Sized>(
    predictor: &P,
    labels: &[X],
    atoms: &[PathAtom],
) -> Result<(DyadicRational, DyadicRational)> {
    let mut plus = DyadicRational::zero();
    let mut minus = DyadicRational::zero();
    for atom in atoms {
        let obs = atom
            .states
            .iter()
            .map(|&s| {
                labels.get(s).cloned().ok_or(Error::FrontierError {
                    state: s,
                    frontier: labels.len(),
                })
            })
            .collect::<Result<Vec<X>>>()?;
        if predictor.predict(&obs) >= EVENT_THRESHOLD {
            plus = &plus + &atom.prob;
        } else {
            minus = &minus + &atom.prob;
        }
    }
    Ok((plus, minus))
}

/// How event probabilities are computed.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Exact propagation until the unaccounted mass is at most `delta`.
    Exact { delta: f64 },
    /// Anchored Monte Carlo trials with per-trial streams of `seed`.
    MonteCarlo { trials: u64, seed: u64 },
}

impl Method {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Method::MonteCarlo { trials, .. } => Method::MonteCarlo { trials, seed },
            m => m,
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Exact { delta: 1e-4 }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Exact { delta } => write!(f, "exact:{delta}"),
            Method::MonteCarlo { trials, .. } => write!(f, "mc:{trials}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    /// `exact:<delta>` or `mc:<trials>`; the Monte Carlo seed is set separately.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ConfigError(format!("unknown method `{s}`"));
        match s.trim().split_once(':') {
            Some(("exact", d)) => match d.trim().parse::<f64>() {
                Ok(delta) if delta > 0.0 && delta < 1.0 => Ok(Method::Exact { delta }),
                _ => Err(bad()),
            },
            Some(("mc", t)) => match t.trim().parse::<u64>() {
                Ok(trials) if trials > 0 => Ok(Method::MonteCarlo { trials, seed: 0 }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// Bookkeeping behind an [`EventProbs`] estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum EventDetail {
    /// Masses given the anchor, in units of `2^-120`; `residual` is everything not assigned.
    Exact {
        plus: u128,
        minus: u128,
        residual: u128,
        rounds: usize,
        peak_summaries: usize,
    },
    MonteCarlo {
        trials: u64,
        plus_count: u64,
        escalated: bool,
    },
}

/// Unconditional probabilities of `B⁺` and `B⁻` (anchor included).
#[derive(Clone, Debug, PartialEq)]
pub struct EventProbs {
    pub p_plus: f64,
    pub p_minus: f64,
    /// Residual mass bound (exact) or 3σ half-width of each estimate (Monte Carlo).
    pub uncertainty: f64,
    pub detail: EventDetail,
}

impl EventProbs {
    /// The `>=` rule: `B⁻` is chosen on ties.
    pub fn choose_minus(&self) -> bool {
        match &self.detail {
            EventDetail::Exact { plus, minus, .. } => minus >= plus,
            EventDetail::MonteCarlo {
                trials, plus_count, ..
            } => trials - plus_count >= *plus_count,
        }
    }

    /// Unconditional probability of the chosen event.
    pub fn chosen(&self) -> f64 {
        if self.choose_minus() {
            self.p_minus
        } else {
            self.p_plus
        }
    }

    /// Chosen-event probability given the anchor.
    pub fn chosen_conditional(&self) -> f64 {
        self.chosen() / ANCHOR_PROBABILITY
    }

    /// Exact masses given the anchor, when computed exactly.
    pub fn exact_masses(&self) -> Option<(DyadicRational, DyadicRational, DyadicRational)> {
        match &self.detail {
            EventDetail::Exact {
                plus,
                minus,
                residual,
                ..
            } => {
                let d = |m: &u128| DyadicRational::new(BigInt::from(*m), MASS_BITS);
                Some((d(plus), d(minus), d(residual)))
            }
            EventDetail::MonteCarlo { .. } => None,
        }
    }
}

/// Probabilities of `B⁺ = {M_0 = 0, Ê(X_0..X_τ) >= 1/4}` and `B⁻` (its complement on the
/// anchor), where `τ` is the first visit to level `T = labels.len() - 1` and `labels[s]` is
/// the observed value of state `s`.
pub fn event_probs<X, P>(predictor: &P, labels: &[X], method: &Method) -> Result<EventProbs>
where
    X: Observation,
    P: Summarize<X>,
{
    if labels.len() < 3 {
        return Err(Error::IndexError("target level must be at least 2".into()));
    }
    match method {
        Method::Exact { delta } => exact_probs(predictor, labels, *delta),
        Method::MonteCarlo { trials, seed } => mc_probs(predictor, labels, *trials, *seed),
    }
}

fn exact_probs<X, P>(predictor: &P, labels: &[X], delta: f64) -> Result<EventProbs>
where
    X: Observation,
    P: Summarize<X>,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ConfigError(format!("mass tolerance {delta} not in (0, 1)")));
    }
    let target = labels.len() - 1;
    let climb = (target - 2) as u32;
    let max_rounds = if climb == 0 {
        1
    } else {
        let p = 0.5f64.powi(climb as i32);
        ((delta / 2.0).ln() / (-p).ln_1p()).ceil() as usize
    };
    let delta_units = (delta * MASS_ONE as f64) as u128;
    let prune_budget = delta_units / 2 / max_rounds as u128;

    let mut live: Vec<(P::Summary, u128)> = vec![(predictor.start(labels), MASS_ONE)];
    let (mut plus, mut minus) = (0u128, 0u128);
    let mut rounds = 0;
    let mut peak = 1;
    while MASS_ONE - plus - minus > delta_units && !live.is_empty() {
        if rounds > 4 * max_rounds + 16 {
            return Err(Error::CapExceeded {
                index: rounds,
                cap: 4 * max_rounds + 16,
            });
        }
        rounds += 1;
        let expand = |(summary, mass): &(P::Summary, u128)| {
            let mut s = summary.clone();
            let mut next = Vec::with_capacity(target.saturating_sub(2));
            for x in &labels[..2] {
                predictor.push(&mut s, x);
            }
            for (h, x) in labels.iter().enumerate().skip(2) {
                predictor.push(&mut s, x);
                if h < target {
                    next.push((s.clone(), mass >> (h - 1)));
                }
            }
            let success = mass >> climb;
            let hit = predictor.finish(&s) >= EVENT_THRESHOLD;
            (next, if hit { success } else { 0 }, if hit { 0 } else { success })
        };
        let merge = |mut acc: (HashMap<P::Summary, u128>, u128, u128),
                     (next, p, m): (Vec<(P::Summary, u128)>, u128, u128)| {
            for (s, w) in next {
                if w > 0 {
                    *acc.0.entry(s).or_insert(0) += w;
                }
            }
            acc.1 += p;
            acc.2 += m;
            acc
        };
        let (table, p, m) = if live.len() >= 2048 {
            live.par_iter()
                .map(expand)
                .fold(|| (HashMap::new(), 0, 0), merge)
                .reduce(
                    || (HashMap::new(), 0, 0),
                    |a, b| {
                        let (mut big, small) = if a.0.len() >= b.0.len() {
                            (a.0, b.0)
                        } else {
                            (b.0, a.0)
                        };
                        for (s, w) in small {
                            *big.entry(s).or_insert(0) += w;
                        }
                        (big, a.1 + b.1, a.2 + b.2)
                    },
                )
        } else {
            live.iter().map(expand).fold((HashMap::new(), 0, 0), merge)
        };
        plus += p;
        minus += m;
        let mut next: Vec<(P::Summary, u128)> = table.into_iter().collect();
        if next.len() > MAX_SUMMARIES {
            return Err(Error::CapExceeded {
                index: next.len(),
                cap: MAX_SUMMARIES,
            });
        }
        peak = peak.max(next.len());
        next.sort_unstable_by_key(|e| e.1);
        let mut dropped = 0u128;
        let keep_from = next
            .iter()
            .position(|e| {
                dropped += e.1;
                dropped > prune_budget
            })
            .unwrap_or(next.len());
        live = next.split_off(keep_from);
    }
    let residual = MASS_ONE - plus - minus;
    let scale = ANCHOR_PROBABILITY / MASS_ONE as f64;
    Ok(EventProbs {
        p_plus: plus as f64 * scale,
        p_minus: minus as f64 * scale,
        uncertainty: residual as f64 * scale,
        detail: EventDetail::Exact {
            plus,
            minus,
            residual,
            rounds,
            peak_summaries: peak,
        },
    })
}

/// Longest anchored path sampled before giving up.
pub const MAX_PATH_LEN: usize = 1 << 24;

/// Number of `B⁺` outcomes among anchored trials `0..trials` of `seed`.
pub fn count_plus<X, P>(predictor: &P, labels: &[X], trials: u64, seed: u64) -> Result<u64>
where
    X: Observation,
    P: Predictor<X> + ?Sized,
{
    let target = labels.len() - 1;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let path = sample_until_hit(target, MAX_PATH_LEN, &mut rng)?;
            let obs: Vec<X> = path.iter().map(|&s| labels[s].clone()).collect();
            Ok(u64::from(predictor.predict(&obs) >= EVENT_THRESHOLD))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// 3σ binomial half-width of a frequency.
pub fn half_width(p_hat: f64, trials: u64) -> f64 {
    3.0 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

fn mc_probs<X, P>(predictor: &P, labels: &[X], trials: u64, seed: u64) -> Result<EventProbs>
where
    X: Observation,
    P: Predictor<X> + ?Sized,
{
    if trials == 0 {
        return Err(Error::ConfigError("trials must be positive".into()));
    }
    let mut n = trials;
    let mut plus = count_plus(predictor, labels, n, seed)?;
    let mut escalated = false;
    let p = plus as f64 / n as f64;
    // p̂₊ − p̂₋ = 2p̂₊ − 1 has standard deviation 2σ(p̂₊).
    if (2.0 * p - 1.0).abs() < 2.0 * half_width(p, n) || (p - 0.5).abs() < f64::EPSILON {
        n = trials.saturating_mul(10);
        plus = count_plus(predictor, labels, n, seed)?;
        escalated = true;
    }
    let p = plus as f64 / n as f64;
    Ok(EventProbs {
        p_plus: ANCHOR_PROBABILITY * p,
        p_minus: ANCHOR_PROBABILITY * (1.0 - p),
        uncertainty: ANCHOR_PROBABILITY * half_width(p, n),
        detail: EventDetail::MonteCarlo {
            trials: n,
            plus_count: plus,
            escalated,
        },
    })
}

/// Labels of states `0..=target` under `table`.
pub fn labels_up_to<L: Labeling>(table: &L, target: usize) -> Result<Vec<L::Label>> {
    (0..=target).map(|s| table.label(s)).collect()
}

/// One decision of a label construction.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackStep {
    /// `k` for binary labels, `s` for shifted labels.
    pub level: usize,
    /// State whose label was chosen: `2k+1` or `s+1`.
    pub state: usize,
    pub bit: u8,
    pub probs: EventProbs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attack<T> {
    pub table: T,
    pub steps: Vec<AttackStep>,
}

/// Chooses `f(2k+1)` for `k = 1..=k_max`: 1 when `P(B_k⁻) >= P(B_k⁺)`, else 0.
pub fn extend_labels_thm1<P: Summarize<u8>>(
    predictor: &P,
    k_max: usize,
    method: &Method,
) -> Result<Attack<LabelTable>> {
    extend_labels_thm1_from(predictor, LabelTable::new(), k_max, method)
}

/// Continues a binary construction from an existing table.
pub fn extend_labels_thm1_from<P: Summarize<u8>>(
    predictor: &P,
    mut table: LabelTable,
    k_max: usize,
    method: &Method,
) -> Result<Attack<LabelTable>> {
    if k_max == 0 {
        return Err(Error::ConfigError("k_max must be at least 1".into()));
    }
    let mut steps = Vec::new();
    for k in table.k_defined() + 1..=k_max {
        let labels = labels_up_to(&table, 2 * k)?;
        let probs = event_probs(predictor, &labels, method)?;
        let bit = u8::from(probs.choose_minus());
        table.push(k, bit)?;
        steps.push(AttackStep {
            level: k,
            state: 2 * k + 1,
            bit,
            probs,
        });
    }
    Ok(Attack { table, steps })
}

/// Chooses `L_{s+1}` for `s = 2..=s_max`: 1 when `P(B_s⁻) >= P(B_s⁺)`, else 0.
pub fn extend_labels_thm2<P: Summarize<DyadicRational>>(
    predictor: &P,
    s_max: usize,
    method: &Method,
) -> Result<Attack<ShiftTable>> {
    if s_max < 2 {
        return Err(Error::ConfigError("s_max must be at least 2".into()));
    }
    let mut table = ShiftTable::new();
    let mut steps = Vec::new();
    for s in 2..=s_max {
        let labels = labels_up_to(&table, s)?;
        let probs = event_probs(predictor, &labels, method)?;
        let bit = u8::from(probs.choose_minus());
        table.push(s + 1, bit)?;
        steps.push(AttackStep {
            level: s,
            state: s + 1,
            bit,
            probs,
        });
    }
    Ok(Attack { table, steps })
}

/// A label table read back from its text form.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelFile {
    Binary(LabelTable),
    Shift(ShiftTable),
}

/// Text form: `#`-prefixed `key = value` header lines, then `odd 2k+1 <bit>` lines.
pub fn format_label_table(table: &LabelTable, predictor: &str, method: &Method) -> String {
    let mut out = header(predictor, method);
    for (i, b) in table.odd_labels().iter().enumerate() {
        out.push_str(&format!("odd {} {b}\n", 2 * i + 3));
    }
    out
}

/// Text form: header, then `L s <bit>` lines from `s = 1`.
pub fn format_shift_table(table: &ShiftTable, predictor: &str, method: &Method) -> String {
    let mut out = header(predictor, method);
    for (i, b) in table.bits().iter().enumerate() {
        out.push_str(&format!("L {} {b}\n", i + 1));
    }
    out
}

fn header(predictor: &str, method: &Method) -> String {
    format!("# predictor = {predictor}\n# method = {method}\n")
}

/// Parses either text form. Returns the table and the header entries.
pub fn parse_label_file(text: &str) -> Result<(LabelFile, BTreeMap<String, String>)> {
    let mut meta = BTreeMap::new();
    let mut odd: Vec<u8> = Vec::new();
    let mut shift: Vec<u8> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let bad = || Error::ConfigError(format!("label file line {}: `{line}`", lineno + 1));
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [kind, state, bit] = fields[..] else {
            return Err(bad());
        };
        let state: usize = state.parse().map_err(|_| bad())?;
        let bit: u8 = bit.parse().map_err(|_| bad())?;
        match kind {
            "odd" if state >= 3 && state % 2 == 1 && state == 2 * odd.len() + 3 => odd.push(bit),
            "L" if state == shift.len() + 1 => shift.push(bit),
            _ => return Err(bad()),
        }
    }
    let file = match (odd.is_empty(), shift.is_empty()) {
        (_, true) => LabelFile::Binary(LabelTable::from_odd(odd)?),
        (true, false) => LabelFile::Shift(ShiftTable::from_bits(shift)?),
        (false, false) => {
            return Err(Error::ConfigError("label file mixes `odd` and `L` entries".into()))
        }
    };
    Ok((file, meta))
}
