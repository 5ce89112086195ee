//! Single-qudit quantum reservoir computing at desk scale.
//!
//! The crate simulates a driven, lossy qudit through the Lindblad master
//! equation and its classical Duffing analogue, trains linear readouts by
//! ridge regression, and runs the two benchmarks the models are judged on:
//! multivariate signal processing (amplitude and phase estimation) and
//! short-term memory capacity. A sweep harness scans reservoir realizations
//! with reproducible random streams, and everything is exportable as CSV or
//! JSON together with a run manifest.
//!
//! Start with the `examples/` directory: each example exercises one major
//! capability end to end. The `qrc` binary wraps the same entry points behind
//! `simulate`, `task signal`, `task stmc`, `sweep`, and `export` subcommands.

pub mod app;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod linalg;
pub mod qudit;
pub mod readout;
pub mod seeds;
pub mod sweep;
pub mod tasks;

pub use error::{Error, Result};
