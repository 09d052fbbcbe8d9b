//! Files, configuration and commands around `admm-embed-core`.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod formats;
pub mod metrics;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
