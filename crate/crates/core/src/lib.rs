//! Estimators and adversarial stationary ergodic processes for studying the
//! limits of consistent forecasting.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: exact dyadic, rational and quadratic-surd arithmetic and interval sets.
//! * [`partition`]: grid partitions refined by a distinguished set, and their schedules.
//! * [`odometer`]: the binary odometer-like map `T` on `[0, 1)` and its data-starving sets.
//! * [`rotation`]: irrational rotations, constructive Rohlin towers and exact L1 errors.
//! * [`markov`]: the renewal-type Markov chain and its two hidden labelings.
//! * [`predictors`]: count estimators, partitioning regression and the linear baseline.
//! * [`adversary`]: label constructions that defeat a given predictor.
//! * [`harness`]: seeded experiments, reports, configuration and CSV output.

pub mod adversary;
pub mod error;
pub mod exact;
pub mod harness;
pub mod markov;
pub mod odometer;
pub mod partition;
pub mod predictors;
pub mod rotation;

pub use error::{Error, Result};
