//! Latent-space center configurations and center-matching training.

pub mod cli;
pub mod data;
pub mod encoder;
pub mod error;
pub mod fastassign;
pub mod io;
pub mod metric;
pub mod optim;
pub mod report;
pub mod rootsys;
pub mod trainer;

pub use error::{LscError, Result};
