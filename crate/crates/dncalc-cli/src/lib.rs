//! File formats, golden fixtures, and the verification harness around
//! `dncalc-core`. The binary in `main.rs` is a thin argument-parsing layer
//! over this crate.

pub mod formats;
pub mod fixtures;
pub mod verify;
