//! Closed-form time-optimal escape game between a differential-drive robot
//! and a moving circular detection region.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod game;
pub mod inverse;
pub mod io;
pub mod simulator;
pub mod synthesis;
pub mod terminal;
pub mod verification;

pub use error::{GameError, Result};
