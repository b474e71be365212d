//! Partitions of `[0, 1)` built from a uniform grid `H_{n,j}` split by a distinguished set.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{ExactScalar, IntervalSet, PointOrder};

/// The number of grid intervals `q(n)` used at sample size `n`; the grid width is `h(n) = 1/q(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionSchedule {
    /// `q(n) = max(min, floor(sqrt(n)))`.
    Sqrt { min: u64 },
    Constant(u64),
    Explicit(BTreeMap<u64, u64>),
}

impl Default for PartitionSchedule {
    fn default() -> Self {
        PartitionSchedule::Sqrt { min: 2 }
    }
}

impl PartitionSchedule {
    pub fn q(&self, n: u64) -> Result<u64> {
        let q = match self {
            PartitionSchedule::Sqrt { min } => (*min).max(num_integer::Roots::sqrt(&n)),
            PartitionSchedule::Constant(q) => *q,
            PartitionSchedule::Explicit(map) => *map.get(&n).ok_or_else(|| {
                Error::ConfigError(format!("schedule has no grid size for n = {n}"))
            })?,
        };
        if q == 0 {
            return Err(Error::ConfigError(format!("q({n}) = 0")));
        }
        Ok(q)
    }

    pub fn h(&self, n: u64) -> Result<BigRational> {
        Ok(BigRational::new(BigInt::from(1), BigInt::from(self.q(n)?)))
    }

    /// Checks the finite-range trend `h(n) -> 0`, `n h(n) -> infinity` between the smallest
    /// and largest `n` supplied. A single `n` only needs a defined, positive grid size.
    pub fn validate(&self, ns: &[u64]) -> Result<()> {
        let (Some(&first), Some(&last)) = (ns.iter().min(), ns.iter().max()) else {
            return Err(Error::ConfigError("empty n list".into()));
        };
        for &n in ns {
            self.q(n)?;
        }
        if first == last {
            return Ok(());
        }
        let (h0, h1) = (self.h(first)?, self.h(last)?);
        let (nh0, nh1) = (&h0 * BigInt::from(first), &h1 * BigInt::from(last));
        if h1 >= h0 {
            return Err(Error::ConfigError(format!(
                "grid width does not shrink between n = {first} and n = {last}"
            )));
        }
        if nh1 <= nh0 {
            return Err(Error::ConfigError(format!(
                "n·h(n) does not grow between n = {first} and n = {last}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PartitionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSchedule::Sqrt { min } => write!(f, "sqrt:{min}"),
            PartitionSchedule::Constant(q) => write!(f, "const:{q}"),
            PartitionSchedule::Explicit(map) => {
                write!(f, "explicit:")?;
                for (i, (n, q)) in map.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{n}={q}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PartitionSchedule {
    type Err = Error;

    /// Accepts `sqrt`, `sqrt:<min>`, `const:<q>` and `explicit:<n>=<q>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ConfigError(format!("unrecognized q schedule `{s}`"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (kind, arg) {
            ("sqrt", None) => Ok(PartitionSchedule::default()),
            ("sqrt", Some(a)) => Ok(PartitionSchedule::Sqrt {
                min: a.parse().map_err(|_| bad())?,
            }),
            ("const", Some(a)) => Ok(PartitionSchedule::Constant(a.parse().map_err(|_| bad())?)),
            ("explicit", Some(a)) => {
                let mut map = BTreeMap::new();
                for entry in a.split(',') {
                    let (n, q) = entry.split_once('=').ok_or_else(bad)?;
                    map.insert(
                        n.trim().parse().map_err(|_| bad())?,
                        q.trim().parse().map_err(|_| bad())?,
                    );
                }
                Ok(PartitionSchedule::Explicit(map))
            }
            _ => Err(bad()),
        }
    }
}

/// Which side of the distinguished set a cell lies on, with its grid index `j` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellLabel {
    /// `A⁺_{n,j} = H_{n,j} ∩ D`.
    Inside(usize),
    /// `A⁻_{n,j} = H_{n,j} ∩ complement(D)`.
    Outside(usize),
    Free(usize),
}

#[derive(Clone, Debug)]
pub struct Cell<T: ExactScalar> {
    pub label: CellLabel,
    pub set: IntervalSet<T>,
}

/// A finite partition of `[0, 1)` into cells that are finite unions of intervals.
#[derive(Clone, Debug)]
pub struct Partition<T: ExactScalar> {
    n: u64,
    cells: Vec<Cell<T>>,
}

impl<T: ExactScalar> Partition<T> {
    /// Grid `[j/q, (j+1)/q)` for `j < q`, each split by `distinguished` and its complement.
    /// Empty cells are kept so the cell count is exactly `2q`.
    pub fn grid_split(n: u64, q: u64, distinguished: &IntervalSet<T>) -> Result<Self> {
        if q == 0 {
            return Err(Error::ConfigError("grid size must be positive".into()));
        }
        let field = distinguished.field().clone();
        let outside = distinguished.complement()?;
        let mut cells = Vec::with_capacity(2 * q as usize);
        for j in 0..q {
            let h = grid_interval::<T>(j, q, &field)?;
            cells.push(Cell {
                label: CellLabel::Inside(j as usize),
                set: h.intersection(distinguished)?,
            });
            cells.push(Cell {
                label: CellLabel::Outside(j as usize),
                set: h.intersection(&outside)?,
            });
        }
        Ok(Partition { n, cells })
    }

    /// Plain grid without a distinguished set.
    pub fn grid(n: u64, q: u64, field: T::Field) -> Result<Self> {
        let cells = (0..q)
            .map(|j| {
                Ok(Cell {
                    label: CellLabel::Free(j as usize),
                    set: grid_interval::<T>(j, q, &field)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_cells(n, cells)
    }

    /// Checks that the cells are pairwise disjoint and cover `[0, 1)`.
    pub fn from_cells(n: u64, cells: Vec<Cell<T>>) -> Result<Self> {
        let Some(first) = cells.first() else {
            return Err(Error::CoverageError);
        };
        let field = first.set.field().clone();
        let mut union = IntervalSet::empty(field.clone());
        let mut total = T::zero_in(&field);
        for c in &cells {
            union = union.union(&c.set)?;
            total = total.try_add(&c.set.measure()?)?;
        }
        if union != IntervalSet::unit(field.clone())
            || total.try_cmp(&T::one_in(&field))? != std::cmp::Ordering::Equal
        {
            return Err(Error::CoverageError);
        }
        Ok(Partition { n, cells })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing `p`.
    pub fn locate<P: PointOrder<T>>(&self, p: &P) -> Result<usize> {
        for (i, c) in self.cells.iter().enumerate() {
            if c.set.contains(p)? {
                return Ok(i);
            }
        }
        Err(Error::CoverageError)
    }

    pub fn index_of(&self, label: CellLabel) -> Option<usize> {
        self.cells.iter().position(|c| c.label == label)
    }
}

/// Maps points to cell indices `0..cell_count()`.
pub trait CellLocator<P: ?Sized> {
    fn cell_count(&self) -> usize;
    fn locate_cell(&self, p: &P) -> Result<usize>;
}

impl<T: ExactScalar, P: PointOrder<T>> CellLocator<P> for Partition<T> {
    fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn locate_cell(&self, p: &P) -> Result<usize> {
        self.locate(p)
    }
}

fn grid_interval<T: ExactScalar>(j: u64, q: u64, field: &T::Field) -> Result<IntervalSet<T>> {
    let at = |k: u64| {
        T::from_rational(&BigRational::new(k.into(), q.into()), field).ok_or_else(|| {
            Error::DomainMismatch(format!("grid point {k}/{q} is not representable"))
        })
    };
    IntervalSet::from_pairs(field.clone(), vec![(at(j)?, at(j + 1)?)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{DyadicRational, Interval, RationalSet};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn schedule_values() {
        let s = PartitionSchedule::Sqrt { min: 1 };
        assert_eq!(s.q(3).unwrap(), 1);
        assert_eq!(s.q(64).unwrap(), 8);
        assert_eq!(PartitionSchedule::default().q(3).unwrap(), 2);
        assert!(s.validate(&(3..=64).collect::<Vec<_>>()).is_ok());
        assert!(PartitionSchedule::Constant(4).validate(&[4, 16, 64]).is_err());
    }

    #[test]
    fn schedule_parsing_round_trips() {
        for text in ["sqrt:2", "const:24", "explicit:8=24,16=30"] {
            let s: PartitionSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("cubic".parse::<PartitionSchedule>().is_err());
    }

    #[test]
    fn grid_split_keeps_empty_cells() {
        let d = RationalSet::from_intervals((), [Interval::new(r(0, 1), r(1, 4)).unwrap()]).unwrap();
        let p = Partition::grid_split(2, 2, &d).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.cells()[2].set.is_empty());
        assert_eq!(p.locate(&0.3f64).unwrap(), 1);
        assert_eq!(p.locate(&0.9f64).unwrap(), 3);
        assert!(Partition::from_cells(2, p.cells().to_vec()).is_ok());
    }

    #[test]
    fn dyadic_grid_rejects_thirds() {
        assert!(Partition::<DyadicRational>::grid(3, 3, ()).is_err());
        assert_eq!(Partition::<DyadicRational>::grid(4, 4, ()).unwrap().len(), 4);
    }

    #[test]
    fn uncovered_cells_are_rejected() {
        let half = RationalSet::from_intervals((), [Interval::new(r(0, 1), r(1, 2)).unwrap()]).unwrap();
        let cells = vec![Cell {
            label: CellLabel::Free(0),
            set: half,
        }];
        assert!(matches!(Partition::from_cells(1, cells), Err(Error::CoverageError)));
    }
}
