//! Topological pressure of nonautonomous iterated function systems (NAIFSs),
//! computed on finite point clouds.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`]: finite stand-ins for compact metric spaces and potentials on them.
//! * [`naifs`]: generation schedules, words, compositions, Bowen metrics, power and
//!   truncated systems, factor maps.
//! * [`pressure`]: separated/spanning extremal sets, the partition sums `P_n`/`Q_n`,
//!   word averages, pressure and sup-entropy estimates.
//! * [`theorems`]: finite-`n` inequality checks and asymptotic proxy comparisons,
//!   each producing an [`theorems::InequalityReport`].
//!
//! Everything here is pure computation and builds without `std` (only `alloc`).
//! The `std` feature turns on data-parallel evaluation of independent words.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod naifs;
mod numeric;
mod par;
pub mod pressure;
pub mod space;
pub mod theorems;

pub use error::{Error, MetricViolation, Result};
pub use numeric::log_sum_exp;
