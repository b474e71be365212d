//! The renewal chain on the non-negative integers (`0 → 1 → 2`, then from `s >= 2` to
//! `0` or `s + 1` with probability one half each), its two labelings, exact
//! conditional expectations, and the auxiliary processes used by the baselines.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::DyadicRational;

/// Independent generator for stream `stream` of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary probability of state `j`: `1/4` for `j <= 1`, `2^{-j}` otherwise.
pub fn stationary_pmf(j: usize) -> DyadicRational {
    if j <= 1 {
        DyadicRational::pow2_neg(2)
    } else {
        DyadicRational::pow2_neg(j as u32)
    }
}

/// Transition probability `P(i → j)`.
pub fn transition(i: usize, j: usize) -> DyadicRational {
    match i {
        0 | 1 if j == i + 1 => DyadicRational::one(),
        0 | 1 => DyadicRational::zero(),
        _ if j == 0 || j == i + 1 => DyadicRational::pow2_neg(1),
        _ => DyadicRational::zero(),
    }
}

/// The successors of `s` with their probabilities.
pub fn successors(s: usize) -> Vec<(usize, DyadicRational)> {
    if s <= 1 {
        vec![(s + 1, DyadicRational::one())]
    } else {
        let half = DyadicRational::pow2_neg(1);
        vec![(0, half.clone()), (s + 1, half)]
    }
}

pub fn step<R: Rng + ?Sized>(s: usize, rng: &mut R) -> usize {
    if s <= 1 || rng.gen::<bool>() {
        s + 1
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    Stationary,
    Fixed(usize),
}

pub fn draw_stationary<R: Rng + ?Sized>(rng: &mut R) -> usize {
    match rng.gen_range(0..4) {
        0 => 0,
        1 => 1,
        _ => {
            let mut j = 2;
            while rng.gen::<bool>() {
                j += 1;
            }
            j
        }
    }
}

/// A path of `length` states.
pub fn sample_path(init: Init, length: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_path_with(init, length, &mut rng)
}

pub fn sample_path_with<R: Rng + ?Sized>(init: Init, length: usize, rng: &mut R) -> Vec<usize> {
    if length == 0 {
        return Vec::new();
    }
    let mut s = match init {
        Init::Stationary => draw_stationary(rng),
        Init::Fixed(s) => s,
    };
    let mut out = Vec::with_capacity(length);
    out.push(s);
    for _ in 1..length {
        s = step(s, rng);
        out.push(s);
    }
    out
}

/// Runs from state 0 until the first visit to `target`, inclusive.
pub fn sample_until_hit<R: Rng + ?Sized>(target: usize, max_len: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut path = vec![0];
    let mut s = 0;
    while s != target {
        if path.len() >= max_len {
            return Err(Error::CapExceeded {
                index: path.len(),
                cap: max_len,
            });
        }
        s = step(s, rng);
        path.push(s);
    }
    Ok(path)
}

/// First index at which the path visits `state`.
pub fn first_passage_state(path: &[usize], state: usize) -> Option<usize> {
    path.iter().position(|&s| s == state)
}

/// `k ↦ τ_k`, the first index with state `2k`, for every even level reached.
pub fn first_passage(path: &[usize]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (i, &s) in path.iter().enumerate() {
        if s >= 2 && s % 2 == 0 {
            out.entry(s / 2).or_insert(i);
        }
    }
    if path.first() == Some(&0) {
        for (&k, &t) in &out {
            debug_assert!(path[..=t].iter().all(|&s| s <= 2 * k));
        }
    }
    out
}

/// A map from chain states to observed values.
pub trait Labeling {
    type Label: Clone + PartialEq + std::fmt::Debug;
    fn label(&self, state: usize) -> Result<Self::Label>;
}

pub fn observe<L: Labeling>(path: &[usize], table: &L) -> Result<Vec<L::Label>> {
    path.iter().map(|&s| table.label(s)).collect()
}

/// Binary labels: `f(0) = f(1) = 0`, `f(even) = 1`, `f(2k+1)` chosen per `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    /// `odd[k - 1] = f(2k + 1)`.
    odd: Vec<u8>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_odd(odd: Vec<u8>) -> Result<Self> {
        if let Some(b) = odd.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidLabel(format!("binary label {b}")));
        }
        Ok(LabelTable { odd })
    }

    /// Largest `k` with `f(2k+1)` defined.
    pub fn k_defined(&self) -> usize {
        self.odd.len()
    }

    /// First odd state without a label.
    pub fn frontier(&self) -> usize {
        2 * self.odd.len() + 3
    }

    /// Defines `f(2k+1)`; `k` must be the next undefined index.
    pub fn push(&mut self, k: usize, bit: u8) -> Result<()> {
        if k != self.odd.len() + 1 || bit > 1 {
            return Err(Error::InvalidLabel(format!("cannot set f({}) = {bit} next", 2 * k + 1)));
        }
        self.odd.push(bit);
        Ok(())
    }

    pub fn odd_label(&self, k: usize) -> Option<u8> {
        k.checked_sub(1).and_then(|i| self.odd.get(i).copied())
    }

    pub fn odd_labels(&self) -> &[u8] {
        &self.odd
    }
}

impl Labeling for LabelTable {
    type Label = u8;
    fn label(&self, s: usize) -> Result<u8> {
        match s {
            0 | 1 => Ok(0),
            _ if s.is_multiple_of(2) => Ok(1),
            _ => self.odd_label((s - 1) / 2).ok_or(Error::FrontierError {
                state: s,
                frontier: self.frontier(),
            }),
        }
    }
}

/// Injective labels `f(0) = 0`, `f(s) = L_s + 2^{-s}` with `L_1 = L_2 = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTable {
    /// `l[s - 1] = L_s`.
    l: Vec<u8>,
}

impl Default for ShiftTable {
    fn default() -> Self {
        ShiftTable { l: vec![0, 0] }
    }
}

impl ShiftTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(l: Vec<u8>) -> Result<Self> {
        if l.len() < 2 || l[0] != 0 || l[1] != 0 || l.iter().any(|&b| b > 1) {
            return Err(Error::InvalidLabel(format!("shift bits {l:?} must start 0, 0")));
        }
        Ok(ShiftTable { l })
    }

    /// Largest `s` with `L_s` defined.
    pub fn s_defined(&self) -> usize {
        self.l.len()
    }

    /// Defines `L_s`; `s` must be the next undefined index.
    pub fn push(&mut self, s: usize, bit: u8) -> Result<()> {
        if s != self.l.len() + 1 || bit > 1 {
            return Err(Error::InvalidLabel(format!("cannot set L_{s} = {bit} next")));
        }
        self.l.push(bit);
        Ok(())
    }

    pub fn shift(&self, s: usize) -> Option<u8> {
        s.checked_sub(1).and_then(|i| self.l.get(i).copied())
    }

    pub fn bits(&self) -> &[u8] {
        &self.l
    }

    /// The state whose label is `x`.
    pub fn decode(&self, x: &DyadicRational) -> Result<usize> {
        if x.is_zero() {
            return Ok(0);
        }
        let (l, frac) = if *x >= DyadicRational::one() {
            (1u8, x - &DyadicRational::one())
        } else {
            (0u8, x.clone())
        };
        let s = frac.exponent() as usize;
        if frac.is_negative() || s == 0 || frac != DyadicRational::pow2_neg(s as u32) {
            return Err(Error::InvalidLabel(format!("{x} is not of the form L + 2^-s")));
        }
        match self.shift(s) {
            Some(b) if b == l => Ok(s),
            Some(_) => Err(Error::InvalidLabel(format!("{x} disagrees with L_{s}"))),
            None => Err(Error::FrontierError {
                state: s,
                frontier: self.l.len() + 1,
            }),
        }
    }
}

impl Labeling for ShiftTable {
    type Label = DyadicRational;
    fn label(&self, s: usize) -> Result<DyadicRational> {
        if s == 0 {
            return Ok(DyadicRational::zero());
        }
        let l = self.shift(s).ok_or(Error::FrontierError {
            state: s,
            frontier: self.l.len() + 1,
        })?;
        Ok(&DyadicRational::integer(l as i64) + &DyadicRational::pow2_neg(s as u32))
    }
}

/// Splits an anchored binary observation into excursions `0, 1, ..., h` and returns the state
/// sequence. The string must end at the first visit to an even state `2k`, with every earlier
/// excursion peaking strictly below `2k`.
pub fn invert_observation(obs: &[u8], table: &LabelTable) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::InvalidObservation(format!("{obs:?}: {why}"));
    if obs.len() < 3 || obs[..3] != [0, 0, 1] {
        return Err(bad("does not start with the anchor 0, 0, 1"));
    }
    let starts: Vec<usize> = (0..obs.len())
        .filter(|&i| obs.get(i..i + 3) == Some(&[0, 0, 1][..]))
        .collect();
    let last = *starts.last().expect("anchor at 0");
    let top = obs.len() - 1 - last;
    if top < 2 || top % 2 == 1 {
        return Err(bad("final excursion does not end at an even state"));
    }
    let mut states = Vec::with_capacity(obs.len());
    for (idx, &start) in starts.iter().enumerate() {
        let end = starts.get(idx + 1).copied().unwrap_or(obs.len());
        let h = end - start - 1;
        if idx + 1 < starts.len() && h >= top {
            return Err(bad("an earlier excursion reaches the final level"));
        }
        for (s, &x) in obs[start..end].iter().enumerate() {
            if table.label(s)? != x {
                return Err(bad("segment does not match the labels of 0, 1, ..."));
            }
            states.push(s);
        }
    }
    Ok(states)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondExpMode {
    /// The string ends at a first visit `τ_k`; uses the closed form `f(2k+1)/2`.
    AtTau,
    /// Exact filtering over all hidden paths consistent with the string.
    Forward,
}

/// `E(X_{n} | X_0^{n-1} = obs)` for the binary labeling, conditioned on `M_0 = 0`.
pub fn cond_exp_thm1(obs: &[u8], table: &LabelTable, mode: CondExpMode) -> Result<BigRational> {
    if obs.len() < 3 || obs[..3] != [0, 0, 1] {
        return Err(Error::InconsistentObservation(format!(
            "{obs:?} does not start with the anchor 0, 0, 1"
        )));
    }
    match mode {
        CondExpMode::AtTau => {
            let states = invert_observation(obs, table)?;
            let k = states.last().expect("nonempty") / 2;
            let f = table.label(2 * k + 1)?;
            Ok(BigRational::new(BigInt::from(f), BigInt::from(2)))
        }
        CondExpMode::Forward => forward_filter(obs, table),
    }
}

fn forward_filter(obs: &[u8], table: &LabelTable) -> Result<BigRational> {
    let mut weights: HashMap<usize, DyadicRational> = HashMap::from([(0, DyadicRational::one())]);
    for &x in &obs[1..] {
        let mut next: HashMap<usize, DyadicRational> = HashMap::new();
        for (s, w) in &weights {
            for (t, p) in successors(*s) {
                if table.label(t)? == x {
                    let e = next.entry(t).or_insert_with(DyadicRational::zero);
                    *e = &*e + &(w * &p);
                }
            }
        }
        if next.is_empty() {
            return Err(Error::InconsistentObservation(format!(
                "{obs:?} has probability zero"
            )));
        }
        weights = next;
    }
    let mut total = DyadicRational::zero();
    let mut mean = DyadicRational::zero();
    for (s, w) in &weights {
        total = &total + w;
        for (t, p) in successors(*s) {
            let f = DyadicRational::integer(table.label(t)? as i64);
            mean = &mean + &(&(w * &p) * &f);
        }
    }
    Ok(mean.to_rational() / total.to_rational())
}

/// `E(X_t | X_{t-1} = x)` for the injective labeling.
pub fn cond_exp_thm2(x: &DyadicRational, table: &ShiftTable) -> Result<DyadicRational> {
    let s = table.decode(x)?;
    let next = table.label(s + 1)?;
    Ok(if s <= 1 { next } else { next.half() })
}

/// Zero-mean noise for the square-root autoregression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    None,
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
}

impl Default for Noise {
    fn default() -> Self {
        Noise::Uniform { half_width: 0.25 }
    }
}

impl Noise {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Uniform { half_width } if half_width > 0.0 => {
                rng.gen_range(-half_width..=half_width)
            }
            Noise::Uniform { .. } => 0.0,
        }
    }
}

/// `X_t = sqrt(|X_{t-1}|) + ε_t`, starting from `x0`, `length` values including `x0`.
pub fn sample_sqrt_ar(x0: f64, length: usize, noise: Noise, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(length);
    let mut x = x0;
    for i in 0..length {
        if i > 0 {
            x = x.abs().sqrt() + noise.draw(&mut rng);
        }
        out.push(x);
    }
    out
}

/// Two-state chain on `{0, 1}` with `P(0 → 1) = p01` and `P(1 → 0) = p10`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStateChain {
    pub p01: f64,
    pub p10: f64,
}

impl Default for TwoStateChain {
    fn default() -> Self {
        TwoStateChain { p01: 0.3, p10: 0.4 }
    }
}

impl TwoStateChain {
    pub fn new(p01: f64, p10: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p01) || !(0.0..=1.0).contains(&p10) || p01 + p10 == 0.0 {
            return Err(Error::ConfigError(format!(
                "invalid two-state transition probabilities {p01}, {p10}"
            )));
        }
        Ok(TwoStateChain { p01, p10 })
    }

    pub fn stationary_one(&self) -> f64 {
        self.p01 / (self.p01 + self.p10)
    }

    /// `E(X_t | X_{t-1} = x)`; for a Markov chain any longer context gives the same value.
    pub fn cond_exp(&self, x: u8) -> f64 {
        if x == 0 {
            self.p01
        } else {
            1.0 - self.p10
        }
    }

    pub fn sample(&self, length: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(length);
        let mut x = u8::from(rng.gen::<f64>() < self.stationary_one());
        for _ in 0..length {
            out.push(x);
            let flip = if x == 0 { self.p01 } else { self.p10 };
            if rng.gen::<f64>() < flip {
                x = 1 - x;
            }
        }
        out
    }
}
