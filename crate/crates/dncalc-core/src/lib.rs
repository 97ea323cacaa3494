//! Exact-arithmetic core for determinantal differential operators and the
//! modular verification pipeline behind them.
//!
//! Everything here works over `no_std + alloc`: big rationals, truncated
//! power series, operators in the variables `t` and `D = t d/dt`, eta
//! products and Eisenstein series, the staged recovery of the defining
//! matrices from series data, modular-curve classification, and p-curvature
//! nilpotence tests.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classify;
pub mod curvature;
pub mod modular;
pub mod numth;
pub mod pfit;
pub mod series;
pub mod weyl;

pub use numth::Rat;
pub use series::{FracSeries, RatSeries, Series};
pub use weyl::{DNMatrix, DPoly, WeylOp};
