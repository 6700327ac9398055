use thiserror::Error;

use crate::terminal::BoundaryClass;

/// Errors raised by the game library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid game parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("control `{control}` = {value} violates bound {bound}")]
    ControlBound {
        control: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("boundary angle s = {s} is not in the usable part (class {class:?})")]
    NotUsable { s: f64, class: BoundaryClass },

    #[error("retro-time {tau} outside the valid range [{min}, {max}]")]
    TauOutOfRange { tau: f64, min: f64, max: f64 },

    #[error("state at radius {radius} lies outside the detection disk of radius {r_d}")]
    OutsideDisk { radius: f64, r_d: f64 },

    #[error("inverse synthesis did not converge at ({x}, {y}); residual {residual}")]
    NoConvergence { x: f64, y: f64, residual: f64 },

    #[error("switching function {which} = {value} is within the tie tolerance (dispersal state)")]
    DispersalTie { which: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GameError>;
