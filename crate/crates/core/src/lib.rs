//! Play-by-play models: expected points, win probability, play values,
//! credit division among players and wins above replacement.

pub mod calibration;
pub mod constants;
pub mod credit;
pub mod ep;
pub mod error;
pub mod league;
pub mod pbp;
pub mod report;
pub mod state;
pub mod synth;
pub mod value;
pub mod war;
pub mod wp;

pub use error::{CoreError, Result};
