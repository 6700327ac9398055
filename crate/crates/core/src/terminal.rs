//! Target circle, usable part and terminal data.
//!
//! A boundary point is parametrized by its angle `s` (clockwise from the
//! body y-axis); its position is `r_d (sin s, cos s)` and the inward normal
//! is `(-sin s, -cos s)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{angle_diff, normalize_angle, EvaderControls, GameParams, PursuerControls};
use crate::synthesis::Costate;

/// Angular tolerance for snapping onto BUP angles and dispersal endpoints.
pub const BUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    /// Usable, the evader escapes translating backward (`cos s > 0`).
    UsableBackward,
    /// Usable, the evader escapes translating forward (`cos s < 0`).
    UsableForward,
    /// One of the four angles `±acos(rho_v)`, `π ± acos(rho_v)`.
    BoundaryOfUsable,
    NonUsable,
    /// `s = π/2` or `3π/2`: the terminal evader control is two-valued.
    DispersalEndpoint,
}

impl BoundaryClass {
    pub fn is_usable(self) -> bool {
        matches!(
            self,
            BoundaryClass::UsableBackward | BoundaryClass::UsableForward
        )
    }
}

/// Direction of the evader's terminal translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EscapeDirection {
    Backward,
    Forward,
}

impl EscapeDirection {
    /// Sign of both terminal wheel speeds.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            EscapeDirection::Backward => -1.0,
            EscapeDirection::Forward => 1.0,
        }
    }

    /// Backward iff `cos s > 0`.
    pub fn for_angle(s: f64) -> Option<Self> {
        let c = s.cos();
        if c > 0.0 {
            Some(EscapeDirection::Backward)
        } else if c < 0.0 {
            Some(EscapeDirection::Forward)
        } else {
            None
        }
    }
}

/// A point on the target circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub s: f64,
}

impl BoundaryPoint {
    pub fn new(s: f64) -> Self {
        BoundaryPoint {
            s: normalize_angle(s),
        }
    }

    pub fn position(&self, p: &GameParams) -> (f64, f64) {
        let (sn, cs) = self.s.sin_cos();
        (p.r_d() * sn, p.r_d() * cs)
    }

    pub fn inward_normal(&self) -> (f64, f64) {
        let (sn, cs) = self.s.sin_cos();
        (-sn, -cs)
    }
}

/// The four BUP angles `[a, π - a, π + a, 2π - a]` with `a = acos(rho_v)`.
pub fn bup_angles(p: &GameParams) -> [f64; 4] {
    let a = p.usable_half_width();
    [a, PI - a, PI + a, TAU - a]
}

/// `min_u max_v` of the inward normal speed at `s`: `V_d - V_r |cos s|`.
/// Negative on the usable part, zero on its boundary.
pub fn usable_margin(s: f64, p: &GameParams) -> f64 {
    p.v_d_max() - p.v_r_max() * s.cos().abs()
}

pub fn classify_boundary(s: f64, p: &GameParams) -> BoundaryClass {
    let s = normalize_angle(s);
    let near = |t: f64| angle_diff(s, t).abs() <= BUP_TOL;
    if near(FRAC_PI_2) || near(1.5 * PI) {
        return BoundaryClass::DispersalEndpoint;
    }
    if bup_angles(p).iter().any(|&t| near(t)) {
        return BoundaryClass::BoundaryOfUsable;
    }
    let a = p.usable_half_width();
    if angle_diff(s, 0.0).abs() < a {
        BoundaryClass::UsableBackward
    } else if angle_diff(s, PI).abs() < a {
        BoundaryClass::UsableForward
    } else {
        BoundaryClass::NonUsable
    }
}

/// Saturated terminal controls on the usable part. The pursuer heads
/// straight at the evader: `v2 = s + π`.
pub fn terminal_controls(s: f64, p: &GameParams) -> Result<(EvaderControls, PursuerControls)> {
    let class = classify_boundary(s, p);
    let sign = match class {
        BoundaryClass::UsableBackward => -1.0,
        BoundaryClass::UsableForward => 1.0,
        _ => return Err(GameError::NotUsable { s, class }),
    };
    Ok((
        EvaderControls::translate(sign, p),
        PursuerControls::new(p.v_d_max(), s + PI),
    ))
}

/// Unit costate on the target circle, `(-sin s, -cos s)`.
pub fn terminal_costate(s: f64) -> Costate {
    let (sn, cs) = s.sin_cos();
    Costate::new(-sn, -cs)
}
