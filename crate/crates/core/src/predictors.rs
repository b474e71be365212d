//! Forecasters: context-count estimators over a finite alphabet, partitioning
//! regression estimates, and the linear autoregression baseline.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{DyadicRational, QuadraticReal};
use crate::partition::{CellLocator, Partition};

/// A symbol of a finite-alphabet series with a real value and an exact running sum.
pub trait Observation: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync {
    type Sum: Clone + Eq + Hash + Default + fmt::Debug + Send + Sync;
    fn value(&self) -> f64;
    fn accumulate(&self, sum: &mut Self::Sum);
    fn sum_value(sum: &Self::Sum) -> f64;
}

impl Observation for u8 {
    type Sum = u64;
    fn value(&self) -> f64 {
        f64::from(*self)
    }
    fn accumulate(&self, sum: &mut u64) {
        *sum += u64::from(*self);
    }
    fn sum_value(sum: &u64) -> f64 {
        *sum as f64
    }
}

impl Observation for DyadicRational {
    type Sum = DyadicRational;
    fn value(&self) -> f64 {
        self.to_f64()
    }
    fn accumulate(&self, sum: &mut DyadicRational) {
        *sum = &*sum + self;
    }
    fn sum_value(sum: &DyadicRational) -> f64 {
        sum.to_f64()
    }
}

/// A deterministic forecaster of the next value from the observed history.
pub trait Predictor<X>: Send + Sync {
    fn predict(&self, history: &[X]) -> f64;
    fn name(&self) -> String;
}

/// A predictor whose output on `prefix ++ suffix` can be computed from a compact summary,
/// when the suffix is known in advance.
///
/// `finish(push(... push(start(suffix), x_0) ..., x_{n-1}))` must equal `predict(x)` for
/// every string `x` that ends with `suffix`.
pub trait Summarize<X>: Predictor<X> {
    type Summary: Clone + Eq + Hash + Send + Sync;
    fn start(&self, suffix: &[X]) -> Self::Summary;
    fn push(&self, summary: &mut Self::Summary, x: &X);
    fn finish(&self, summary: &Self::Summary) -> f64;
}

/// Match count and successor sum for context `ctx` in `data`.
fn context_stats<X: Observation>(data: &[X], ctx: &[X]) -> (u64, X::Sum) {
    let n_ctx = ctx.len();
    let mut count = 0;
    let mut sum = X::Sum::default();
    for j in n_ctx..data.len() {
        if &data[j - n_ctx..j] == ctx {
            count += 1;
            data[j].accumulate(&mut sum);
        }
    }
    (count, sum)
}

fn ratio<X: Observation>(count: u64, sum: &X::Sum) -> f64 {
    if count == 0 {
        0.0
    } else {
        X::sum_value(sum) / count as f64
    }
}

/// Backward scan of `X_{-n}, ..., X_{-1}`: average of the values that follow earlier
/// occurrences of the last `n_ctx` symbols, with `0/0 = 0`.
pub fn static_count<X: Observation>(data: &[X], n_ctx: usize) -> f64 {
    if n_ctx == 0 || data.len() <= n_ctx {
        return 0.0;
    }
    let n = data.len();
    let ctx = &data[n - n_ctx..];
    let mut count = 0u64;
    let mut sum = X::Sum::default();
    // j counts back from the end: context X_{-j-N}^{-j-1}, successor X_{-j}.
    for j in 1..=n - n_ctx {
        let end = n - j;
        if &data[end - n_ctx..end] == ctx {
            count += 1;
            data[end].accumulate(&mut sum);
        }
    }
    ratio::<X>(count, &sum)
}

/// Forward scan of `X_0, ..., X_{n-1}` with the trailing `n_ctx` symbols as context.
pub fn dynamic_count<X: Observation>(data: &[X], n_ctx: usize) -> f64 {
    if n_ctx == 0 || data.len() <= n_ctx {
        return 0.0;
    }
    let (count, sum) = context_stats(data, &data[data.len() - n_ctx..]);
    ratio::<X>(count, &sum)
}

/// Streaming state of a count estimator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CountSummary<X: Observation> {
    /// Nothing to track.
    Constant,
    /// The final context is known: count only its matches.
    Known {
        ctx: Vec<X>,
        window: Vec<X>,
        count: u64,
        sum: X::Sum,
    },
    /// The final context reaches before the known suffix: track every context.
    Table {
        window: Vec<X>,
        table: BTreeMap<Vec<X>, (u64, X::Sum)>,
    },
}

/// Forecasters available by name: `zero`, `one`, `const:<v>`, `dynamic-count[:N]`,
/// `static-count[:N]` (context length `N`, default 1).
#[derive(Clone, Debug, PartialEq)]
pub enum NamedPredictor {
    Constant(f64),
    DynamicCount(usize),
    StaticCount(usize),
}

impl NamedPredictor {
    fn context_len(&self) -> Option<usize> {
        match self {
            NamedPredictor::Constant(_) => None,
            NamedPredictor::DynamicCount(n) | NamedPredictor::StaticCount(n) => Some(*n),
        }
    }
}

impl fmt::Display for NamedPredictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedPredictor::Constant(v) if *v == 0.0 => write!(f, "zero"),
            NamedPredictor::Constant(v) if *v == 1.0 => write!(f, "one"),
            NamedPredictor::Constant(v) => write!(f, "const:{v}"),
            NamedPredictor::DynamicCount(n) => write!(f, "dynamic-count:{n}"),
            NamedPredictor::StaticCount(n) => write!(f, "static-count:{n}"),
        }
    }
}

impl FromStr for NamedPredictor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ConfigError(format!("unknown predictor `{s}`"));
        let (kind, arg) = match s.trim().split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s.trim(), None),
        };
        let ctx = |arg: Option<&str>| -> Result<usize> {
            match arg {
                None => Ok(1),
                Some(a) => match a.parse() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(bad()),
                },
            }
        };
        match (kind, arg) {
            ("zero", None) => Ok(NamedPredictor::Constant(0.0)),
            ("one", None) => Ok(NamedPredictor::Constant(1.0)),
            ("const", Some(v)) => v
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(NamedPredictor::Constant)
                .ok_or_else(bad),
            ("dynamic-count", a) => Ok(NamedPredictor::DynamicCount(ctx(a)?)),
            ("static-count", a) => Ok(NamedPredictor::StaticCount(ctx(a)?)),
            _ => Err(bad()),
        }
    }
}

impl<X: Observation> Predictor<X> for NamedPredictor {
    fn predict(&self, history: &[X]) -> f64 {
        match self {
            NamedPredictor::Constant(v) => *v,
            NamedPredictor::DynamicCount(n) => dynamic_count(history, *n),
            NamedPredictor::StaticCount(n) => static_count(history, *n),
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

impl<X: Observation> Summarize<X> for NamedPredictor {
    type Summary = CountSummary<X>;

    fn start(&self, suffix: &[X]) -> CountSummary<X> {
        let Some(n_ctx) = self.context_len() else {
            return CountSummary::Constant;
        };
        if suffix.len() >= n_ctx {
            CountSummary::Known {
                ctx: suffix[suffix.len() - n_ctx..].to_vec(),
                window: Vec::with_capacity(n_ctx),
                count: 0,
                sum: X::Sum::default(),
            }
        } else {
            CountSummary::Table {
                window: Vec::with_capacity(n_ctx),
                table: BTreeMap::new(),
            }
        }
    }

    fn push(&self, summary: &mut CountSummary<X>, x: &X) {
        let Some(n_ctx) = self.context_len() else {
            return;
        };
        let window = match summary {
            CountSummary::Constant => return,
            CountSummary::Known {
                ctx,
                window,
                count,
                sum,
            } => {
                if window.len() == n_ctx && window == ctx {
                    *count += 1;
                    x.accumulate(sum);
                }
                window
            }
            CountSummary::Table { window, table } => {
                if window.len() == n_ctx {
                    let e = table.entry(window.clone()).or_default();
                    e.0 += 1;
                    x.accumulate(&mut e.1);
                }
                window
            }
        };
        if window.len() == n_ctx {
            window.remove(0);
        }
        window.push(x.clone());
    }

    fn finish(&self, summary: &CountSummary<X>) -> f64 {
        match summary {
            CountSummary::Constant => match self {
                NamedPredictor::Constant(v) => *v,
                _ => 0.0,
            },
            CountSummary::Known {
                ctx, window, count, sum, ..
            } => {
                debug_assert!(window == ctx || window.len() < ctx.len());
                ratio::<X>(*count, sum)
            }
            CountSummary::Table { window, table } => match table.get(window) {
                Some((count, sum)) => ratio::<X>(*count, sum),
                None => 0.0,
            },
        }
    }
}

/// Adapts any predictor to [`Summarize`] by keeping the whole history.
pub struct FullHistory<P>(pub P);

impl<X: Observation, P: Predictor<X>> Predictor<X> for FullHistory<P> {
    fn predict(&self, history: &[X]) -> f64 {
        self.0.predict(history)
    }
    fn name(&self) -> String {
        self.0.name()
    }
}

impl<X: Observation, P: Predictor<X>> Summarize<X> for FullHistory<P> {
    type Summary = Vec<X>;
    fn start(&self, _suffix: &[X]) -> Vec<X> {
        Vec::new()
    }
    fn push(&self, summary: &mut Vec<X>, x: &X) {
        summary.push(x.clone());
    }
    fn finish(&self, summary: &Vec<X>) -> f64 {
        self.0.predict(summary)
    }
}

/// Memoizes a predictor by input string.
pub struct Cached<X, P> {
    inner: P,
    cache: Mutex<HashMap<Vec<X>, f64>>,
}

impl<X: Observation, P: Predictor<X>> Cached<X, P> {
    pub fn new(inner: P) -> Self {
        Cached {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<X: Observation, P: Predictor<X>> Predictor<X> for Cached<X, P> {
    fn predict(&self, history: &[X]) -> f64 {
        if let Some(v) = self.cache.lock().ok().and_then(|c| c.get(history).copied()) {
            return v;
        }
        let v = self.inner.predict(history);
        if let Ok(mut c) = self.cache.lock() {
            c.insert(history.to_vec(), v);
        }
        v
    }
    fn name(&self) -> String {
        self.inner.name()
    }
}

/// Closure-backed predictor.
pub struct FnPredictor<F> {
    name: String,
    f: F,
}

impl<F> FnPredictor<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnPredictor {
            name: name.into(),
            f,
        }
    }
}

impl<X, F: Fn(&[X]) -> f64 + Send + Sync> Predictor<X> for FnPredictor<F> {
    fn predict(&self, history: &[X]) -> f64 {
        (self.f)(history)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Response values that can be averaged within a cell.
pub trait Response: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn div_count(&self, count: u64) -> Self;
}

impl Response for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn div_count(&self, count: u64) -> Self {
        self / count as f64
    }
}

impl Response for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn div_count(&self, count: u64) -> Self {
        self / BigRational::from_integer(count.into())
    }
}

impl Response for QuadraticReal {
    fn zero_like(&self) -> Self {
        QuadraticReal::zero(self.d())
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("responses share one field")
    }
    fn div_count(&self, count: u64) -> Self {
        self.scale(&BigRational::new(1.into(), count.into()))
    }
}

/// Per-cell response totals `ν` and hit counts `μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellCounts<R> {
    pub mu: Vec<u64>,
    pub nu: Vec<Option<R>>,
}

impl<R: Response> CellCounts<R> {
    pub fn build<P, L: CellLocator<P> + ?Sized>(pairs: &[(P, R)], locator: &L) -> Result<Self> {
        let cells = locator.cell_count();
        let mut mu = vec![0u64; cells];
        let mut nu: Vec<Option<R>> = vec![None; cells];
        for (z, y) in pairs {
            let c = locator.locate_cell(z)?;
            mu[c] += 1;
            nu[c] = Some(match &nu[c] {
                Some(s) => s.add(y),
                None => y.clone(),
            });
        }
        Ok(CellCounts { mu, nu })
    }

    /// `ν/μ` in the cell, `None` for an empty cell.
    pub fn mean(&self, cell: usize) -> Option<R> {
        self.nu
            .get(cell)
            .and_then(|s| s.as_ref())
            .map(|s| s.div_count(self.mu[cell]))
    }

    /// Cell means with `0/0 = 0`, using `zero` for empty cells.
    pub fn estimates(&self, zero: &R) -> Vec<R> {
        (0..self.mu.len())
            .map(|c| self.mean(c).unwrap_or_else(|| zero.zero_like()))
            .collect()
    }
}

/// `m̂(z) = ν(A(z)) / μ(A(z))`, or `None` when the cell of `z` holds no predictor.
pub fn partitioning_estimate<P, R: Response, L: CellLocator<P> + ?Sized>(
    pairs: &[(P, R)],
    locator: &L,
    z: &P,
) -> Result<Option<R>> {
    let cell = locator.locate_cell(z)?;
    let mut count = 0u64;
    let mut sum: Option<R> = None;
    for (zi, yi) in pairs {
        if locator.locate_cell(zi)? == cell {
            count += 1;
            sum = Some(match sum {
                Some(s) => s.add(yi),
                None => yi.clone(),
            });
        }
    }
    Ok(sum.map(|s| s.div_count(count)))
}

/// Partitioning regression estimate at `z`, with `0/0 = 0`.
pub fn partitioning_general<P, L: CellLocator<P> + ?Sized>(
    pairs: &[(P, f64)],
    locator: &L,
    z: &P,
) -> Result<f64> {
    Ok(partitioning_estimate(pairs, locator, z)?.unwrap_or(0.0))
}

/// The pairs `(X_{i-1}, X_i)` of a series.
pub fn lagged_pairs<P: Clone, R>(series: &[P], value: impl Fn(&P) -> R) -> Vec<(P, R)> {
    series
        .windows(2)
        .map(|w| (w[0].clone(), value(&w[1])))
        .collect()
}

/// Autoregressive partitioning estimate: predictors `X_{-1-i}`, responses `X_{-i}`.
/// Returns `None` when the cell of `x` holds no predictor.
pub fn partitioning_auto<P: Clone, R: Response, L: CellLocator<P> + ?Sized>(
    series: &[P],
    locator: &L,
    x: &P,
    value: impl Fn(&P) -> R,
) -> Result<Option<R>> {
    if series.len() < 2 {
        return Err(Error::IndexError("needs at least two observations".into()));
    }
    partitioning_estimate(&lagged_pairs(series, value), locator, x)
}

/// Interval cells on the real line for `f64` data: `[edges[i], edges[i+1])`.
#[derive(Clone, Debug)]
pub struct IntervalCells {
    edges: Vec<f64>,
}

impl IntervalCells {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ConfigError("cell edges must increase".into()));
        }
        Ok(IntervalCells { edges })
    }
}

impl CellLocator<f64> for IntervalCells {
    fn cell_count(&self) -> usize {
        self.edges.len() - 1
    }
    fn locate_cell(&self, p: &f64) -> Result<usize> {
        let i = self.edges.partition_point(|e| e <= p);
        if i == 0 || i == self.edges.len() {
            return Err(Error::CoverageError);
        }
        Ok(i - 1)
    }
}

/// `X_t ≈ Σ_{i=1..p} α_i X_{t-i}` without intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearARModel {
    pub order: usize,
    pub coefficients: Vec<f64>,
}

impl LinearARModel {
    /// Prediction of the value following `history`.
    pub fn predict(&self, history: &[f64]) -> Result<f64> {
        if history.len() < self.order {
            return Err(Error::IndexError(format!(
                "needs {} lagged values, got {}",
                self.order,
                history.len()
            )));
        }
        let n = history.len();
        Ok(self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| a * history[n - 1 - i])
            .sum())
    }
}

/// Relative singular-value tolerance below which the design counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares fit through the normal equations, and the forecast of the next value.
pub fn linear_ar_fit_predict(series: &[f64], p: usize) -> Result<(LinearARModel, f64)> {
    if p == 0 || series.len() <= 2 * p {
        return Err(Error::ConfigError(format!(
            "order {p} needs more than {} observations",
            2 * p
        )));
    }
    let rows = series.len() - p;
    let x = DMatrix::from_fn(rows, p, |r, c| series[r + p - 1 - c]);
    let y = DVector::from_fn(rows, |r, _| series[r + p]);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let sv = xtx.singular_values();
    let max = sv.max();
    if max.is_nan() || max <= 0.0 || sv.min() <= RANK_TOLERANCE * max {
        return Err(Error::SingularFit);
    }
    let coef = xtx.lu().solve(&xty).ok_or(Error::SingularFit)?;
    let model = LinearARModel {
        order: p,
        coefficients: coef.iter().copied().collect(),
    };
    let prediction = model.predict(series)?;
    Ok((model, prediction))
}

/// Squared-error comparison of the fitted linear model and a reference regression function.
#[derive(Clone, Debug, PartialEq)]
pub struct MseComparison {
    pub mse_linear: f64,
    pub mse_reference: f64,
    /// Mean of the per-step differences `e_linear² − e_reference²`.
    pub diff: f64,
    /// Standard error of `diff` from batch means.
    pub std_error: f64,
    pub batches: usize,
}

impl MseComparison {
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            self.diff / self.std_error
        } else if self.diff > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// In-sample one-step errors of the order-`p` linear fit versus `reference(X_{t-1})`.
pub fn compare_mse(
    series: &[f64],
    p: usize,
    reference: impl Fn(f64) -> f64,
    batches: usize,
) -> Result<MseComparison> {
    let (model, _) = linear_ar_fit_predict(series, p)?;
    let diffs: Vec<(f64, f64)> = (p..series.len())
        .map(|t| {
            let lin = series[t] - model.predict(&series[..t]).unwrap_or(0.0);
            let r = series[t] - reference(series[t - 1]);
            (lin * lin, r * r)
        })
        .collect();
    let n = diffs.len();
    let batches = batches.clamp(2, n);
    let mse_linear = diffs.iter().map(|d| d.0).sum::<f64>() / n as f64;
    let mse_reference = diffs.iter().map(|d| d.1).sum::<f64>() / n as f64;
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk = &diffs[b * size..(b + 1) * size];
            chunk.iter().map(|d| d.0 - d.1).sum::<f64>() / size as f64
        })
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(MseComparison {
        mse_linear,
        mse_reference,
        diff: mse_linear - mse_reference,
        std_error: (var / batches as f64).sqrt(),
        batches,
    })
}

/// One row of [`check_partition_conditions`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRow {
    pub n: u64,
    pub window: usize,
    /// Largest diameter among cells meeting the window.
    pub max_diameter: f64,
    /// Number of cells meeting the window, divided by `n`.
    pub cells_per_n: f64,
}

/// Finite-range trends of the cell-diameter and cell-count conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
    /// Diameters never grow with `n` and shrink overall, for every window.
    pub diameter_consistent: bool,
    /// Cells per `n` never grow and shrink overall, for every window.
    pub count_consistent: bool,
}

impl ConditionReport {
    pub fn verdicts(&self) -> (String, String) {
        let v = |ok: bool, what: &str| {
            if ok {
                format!("consistent with {what} on the tested range")
            } else {
                format!("not consistent with {what} on the tested range")
            }
        };
        (
            v(self.diameter_consistent, "shrinking cell diameters"),
            v(self.count_consistent, "sub-linear cell counts"),
        )
    }
}

/// Reports, for each `n` and each window `S`, the largest diameter of cells meeting `S` and
/// the number of such cells over `n`.
pub fn check_partition_conditions<T: crate::exact::ExactScalar>(
    family: &[(u64, Partition<T>)],
    windows: &[crate::exact::IntervalSet<T>],
) -> Result<ConditionReport> {
    let mut rows = Vec::new();
    for (w, s) in windows.iter().enumerate() {
        for (n, part) in family {
            let mut max_diameter = 0.0f64;
            let mut count = 0usize;
            for cell in part.cells() {
                if cell.set.is_empty() || cell.set.is_disjoint(s)? {
                    continue;
                }
                count += 1;
                max_diameter = max_diameter.max(cell.set.diameter()?.approx());
            }
            rows.push(ConditionRow {
                n: *n,
                window: w,
                max_diameter,
                cells_per_n: count as f64 / *n as f64,
            });
        }
    }
    let trend = |get: &dyn Fn(&ConditionRow) -> f64| {
        (0..windows.len()).all(|w| {
            let mut series: Vec<&ConditionRow> = rows.iter().filter(|r| r.window == w).collect();
            series.sort_by_key(|r| r.n);
            let vals: Vec<f64> = series.iter().map(|r| get(r)).collect();
            vals.len() < 2
                || (vals.windows(2).all(|p| p[1] <= p[0] + 1e-15)
                    && vals.last() < vals.first())
        })
    };
    let diameter_consistent = trend(&|r| r.max_diameter);
    let count_consistent = trend(&|r| r.cells_per_n);
    Ok(ConditionReport {
        rows,
        diameter_consistent,
        count_consistent,
    })
}
