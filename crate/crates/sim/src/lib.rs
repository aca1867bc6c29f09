//! Pump-probe transport simulations on top of `polaritrans-core`: windowed
//! spectra, the differential-transmission pipeline, parameter sweeps,
//! scenario configuration and the record file formats.

pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod scenario;
pub mod spectrum;
pub mod sweep;

pub use error::{ConfigError, Result, SimError};
