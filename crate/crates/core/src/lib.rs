//! Two-dimensional groundwater simulator for a TCE source zone and its
//! remediation with injected CMC-stabilised nano zero-valent iron.

pub mod error;
pub mod flow;
pub mod grid;
pub mod linalg;
pub mod nzvi;
pub mod pipeline;
pub mod randfield;
pub mod reaction;
pub mod solute;
pub mod state;
pub mod twophase;
pub mod units;

pub use error::{Error, Result};
