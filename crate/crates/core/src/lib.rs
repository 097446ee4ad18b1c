//! Hybrid fractional-order fuzzy PID control.
//!
//! The crate covers the whole workflow: Oustaloup approximation of
//! fractional operators ([`fracops`]), a Mamdani inference engine
//! ([`fuzzy`]), five hybrid fuzzy PID control laws ([`controllers`]),
//! fractional plants with dead time ([`plantsim`]), closed-loop scenarios
//! and integral indices ([`closed_loop`]), and GA / NSGA-II tuning
//! ([`tuner`]). [`presets`], [`config`] and [`report`] back the `frachz`
//! command line tool.

pub mod error;
pub mod fracops;
pub mod closed_loop;
pub mod config;
pub mod controllers;
pub mod fuzzy;
pub mod plantsim;
pub mod presets;
pub mod report;
pub mod tuner;

pub use error::{Error, Result};
