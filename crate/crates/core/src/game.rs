//! Domain types, the realistic/reduced coordinate transform and both
//! kinematic models.
//!
//! Conventions:
//! - Realistic space angles are counter-clockwise from the world x-axis.
//! - Reduced space is the evader body frame with the y-axis along the
//!   heading; angles there are measured clockwise from the body y-axis, so a
//!   direction `phi` is the unit vector `(sin phi, cos phi)`.
//! - Wheel controls `u1`, `u2` are rim speeds in m/s.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Slack allowed on control bounds before a value is rejected.
const BOUND_TOL: f64 = 1e-12;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Unit vector of a reduced-frame direction (clockwise from the body y-axis).
#[inline]
pub fn body_dir(phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (s, c)
}

/// Speeds and lengths of the game. Fields are validated once at
/// construction; every accessor afterwards can assume the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GameParams {
    v_r_max: f64,
    v_d_max: f64,
    b: f64,
    r_d: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    v_r_max: f64,
    v_d_max: f64,
    b: f64,
    r_d: f64,
}

impl TryFrom<RawParams> for GameParams {
    type Error = GameError;
    fn try_from(r: RawParams) -> Result<Self> {
        GameParams::new(r.v_r_max, r.v_d_max, r.b, r.r_d)
    }
}

impl From<GameParams> for RawParams {
    fn from(p: GameParams) -> Self {
        RawParams {
            v_r_max: p.v_r_max,
            v_d_max: p.v_d_max,
            b: p.b,
            r_d: p.r_d,
        }
    }
}

impl Default for GameParams {
    /// `V_r = 1 m/s`, `V_d = 0.6 m/s`, `b = 1 m`, `r_d = 2 m`.
    fn default() -> Self {
        GameParams {
            v_r_max: 1.0,
            v_d_max: 0.6,
            b: 1.0,
            r_d: 2.0,
        }
    }
}

impl GameParams {
    pub fn new(v_r_max: f64, v_d_max: f64, b: f64, r_d: f64) -> Result<Self> {
        let bad = |field, reason: &str| {
            Err(GameError::InvalidParams {
                field,
                reason: reason.to_string(),
            })
        };
        for (name, v) in [
            ("v_r_max", v_r_max),
            ("v_d_max", v_d_max),
            ("b", b),
            ("r_d", r_d),
        ] {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if v_r_max <= 0.0 {
            return bad("v_r_max", "must be > 0");
        }
        if b <= 0.0 {
            return bad("b", "must be > 0");
        }
        if r_d <= 0.0 {
            return bad("r_d", "must be > 0");
        }
        if v_d_max < 0.0 {
            return bad("v_d_max", "must be >= 0");
        }
        if v_d_max >= v_r_max {
            return bad("v_d_max", "must be < v_r_max (evader strictly faster)");
        }
        if r_d <= b {
            return bad(
                "r_d",
                "must be > b (detection radius larger than the robot)",
            );
        }
        Ok(GameParams {
            v_r_max,
            v_d_max,
            b,
            r_d,
        })
    }

    /// Unit evader speed and wheel half-width; `v_d_max = rho_v`, `r_d = rho_l`.
    pub fn from_ratios(rho_v: f64, rho_l: f64) -> Result<Self> {
        Self::new(1.0, rho_v, 1.0, rho_l)
    }

    #[inline]
    pub fn v_r_max(&self) -> f64 {
        self.v_r_max
    }
    #[inline]
    pub fn v_d_max(&self) -> f64 {
        self.v_d_max
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
    #[inline]
    pub fn r_d(&self) -> f64 {
        self.r_d
    }
    /// Speed ratio `V_d / V_r`, in `[0, 1)`.
    #[inline]
    pub fn rho_v(&self) -> f64 {
        self.v_d_max / self.v_r_max
    }
    /// Geometry ratio `r_d / b`, `> 1`.
    #[inline]
    pub fn rho_l(&self) -> f64 {
        self.r_d / self.b
    }
    /// Half-width `arccos(rho_v)` of each usable arc.
    #[inline]
    pub fn usable_half_width(&self) -> f64 {
        self.rho_v().acos()
    }
    /// Turn rate of a saturated rotation in place.
    #[inline]
    pub fn max_turn_rate(&self) -> f64 {
        self.v_r_max / self.b
    }
}

/// World-frame state `(x_p, y_p, x_e, y_e, theta_e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealisticState {
    pub x_p: f64,
    pub y_p: f64,
    pub x_e: f64,
    pub y_e: f64,
    /// Evader heading, counter-clockwise from the world x-axis, in `[0, 2π)`.
    pub theta_e: f64,
}

impl RealisticState {
    pub fn new(x_p: f64, y_p: f64, x_e: f64, y_e: f64, theta_e: f64) -> Self {
        RealisticState {
            x_p,
            y_p,
            x_e,
            y_e,
            theta_e: normalize_angle(theta_e),
        }
    }

    /// Places the pursuer so that the evader at `(x_e, y_e, theta_e)` sees it
    /// at the reduced position `xr`.
    pub fn from_reduced(xr: ReducedState, x_e: f64, y_e: f64, theta_e: f64) -> Self {
        let (st, ct) = theta_e.sin_cos();
        // Inverse of the (orthonormal) transform in `to_reduced`.
        let dx = xr.x * st + xr.y * ct;
        let dy = -xr.x * ct + xr.y * st;
        RealisticState::new(x_e + dx, y_e + dy, x_e, y_e, theta_e)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.x_p, self.y_p, self.x_e, self.y_e, self.theta_e]
    }

    /// Builds a state from raw integration variables; the heading is wrapped.
    pub fn from_array(a: [f64; 5]) -> Self {
        RealisticState::new(a[0], a[1], a[2], a[3], a[4])
    }
}

/// Pursuer position in the evader body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub x: f64,
    pub y: f64,
}

impl ReducedState {
    pub const fn new(x: f64, y: f64) -> Self {
        ReducedState { x, y }
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle clockwise from the body y-axis, in `(-π, π]`.
    #[inline]
    pub fn angle(&self) -> f64 {
        self.x.atan2(self.y)
    }

    #[inline]
    pub fn is_inside(&self, p: &GameParams) -> bool {
        self.x * self.x + self.y * self.y <= p.r_d * p.r_d
    }

    pub fn distance(&self, other: &ReducedState) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wheel rim speeds of the differential-drive evader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaderControls {
    pub u1: f64,
    pub u2: f64,
}

impl EvaderControls {
    pub const fn new(u1: f64, u2: f64) -> Self {
        EvaderControls { u1, u2 }
    }

    /// Both wheels at `sign * V_r`.
    pub fn translate(sign: f64, p: &GameParams) -> Self {
        EvaderControls::new(sign * p.v_r_max, sign * p.v_r_max)
    }

    #[inline]
    pub fn forward_speed(&self) -> f64 {
        0.5 * (self.u1 + self.u2)
    }

    #[inline]
    pub fn turn_rate(&self, b: f64) -> f64 {
        (self.u2 - self.u1) / (2.0 * b)
    }

    pub fn check(&self, p: &GameParams) -> Result<()> {
        let lim = p.v_r_max * (1.0 + BOUND_TOL);
        for (control, value) in [("u1", self.u1), ("u2", self.u2)] {
            if !(value.abs() <= lim) {
                return Err(GameError::ControlBound {
                    control,
                    value,
                    bound: p.v_r_max,
                });
            }
        }
        Ok(())
    }

    /// Clamps both wheels into `[-V_r, V_r]`.
    pub fn clamped(self, p: &GameParams) -> Self {
        let v = p.v_r_max;
        EvaderControls::new(self.u1.clamp(-v, v), self.u2.clamp(-v, v))
    }
}

/// Pursuer controls in the reduced frame: speed `v1` and heading `v2`
/// (clockwise from the evader's body y-axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuerControls {
    pub v1: f64,
    pub v2: f64,
}

impl PursuerControls {
    pub fn new(v1: f64, v2: f64) -> Self {
        PursuerControls {
            v1,
            v2: normalize_angle(v2),
        }
    }

    pub fn check(&self, p: &GameParams) -> Result<()> {
        let lim = p.v_d_max * (1.0 + BOUND_TOL) + BOUND_TOL;
        if !(self.v1 >= -BOUND_TOL && self.v1 <= lim) {
            return Err(GameError::ControlBound {
                control: "v1",
                value: self.v1,
                bound: p.v_d_max,
            });
        }
        Ok(())
    }

    /// World-frame realization, `psi_p = theta_e - v2`.
    pub fn to_world(&self, theta_e: f64) -> PursuerWorldControls {
        PursuerWorldControls::new(self.v1, theta_e - self.v2)
    }
}

/// Pursuer speed and heading in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuerWorldControls {
    pub v_p: f64,
    /// Counter-clockwise from the world x-axis, in `[0, 2π)`.
    pub psi_p: f64,
}

impl PursuerWorldControls {
    pub fn new(v_p: f64, psi_p: f64) -> Self {
        PursuerWorldControls {
            v_p,
            psi_p: normalize_angle(psi_p),
        }
    }

    pub fn stationary() -> Self {
        PursuerWorldControls {
            v_p: 0.0,
            psi_p: 0.0,
        }
    }

    /// `v2 = theta_e - psi_p`.
    pub fn to_reduced(&self, theta_e: f64) -> PursuerControls {
        PursuerControls::new(self.v_p, theta_e - self.psi_p)
    }

    pub fn check(&self, p: &GameParams) -> Result<()> {
        PursuerControls::new(self.v_p, 0.0).check(p)
    }

    pub fn clamped(self, p: &GameParams) -> Self {
        PursuerWorldControls::new(self.v_p.clamp(0.0, p.v_d_max), self.psi_p)
    }
}

/// Realistic to reduced coordinates.
pub fn to_reduced(rs: &RealisticState) -> ReducedState {
    let dx = rs.x_p - rs.x_e;
    let dy = rs.y_p - rs.y_e;
    let (st, ct) = rs.theta_e.sin_cos();
    ReducedState {
        x: dx * st - dy * ct,
        y: dx * ct + dy * st,
    }
}

/// Reduced-space velocity without bound checks.
#[inline]
pub(crate) fn reduced_rhs(
    xr: ReducedState,
    u: EvaderControls,
    v: PursuerControls,
    b: f64,
) -> (f64, f64) {
    let w = u.turn_rate(b);
    let (sv, cv) = v.v2.sin_cos();
    (
        w * xr.y + v.v1 * sv,
        -w * xr.x - u.forward_speed() + v.v1 * cv,
    )
}

/// Forward-time reduced dynamics `(dx/dt, dy/dt)`.
pub fn reduced_dynamics(
    xr: ReducedState,
    u: EvaderControls,
    v: PursuerControls,
    p: &GameParams,
) -> Result<(f64, f64)> {
    u.check(p)?;
    v.check(p)?;
    Ok(reduced_rhs(xr, u, v, p.b))
}

/// Retro-time reduced dynamics: the forward field with both components negated.
pub fn retro_reduced_dynamics(
    xr: ReducedState,
    u: EvaderControls,
    v: PursuerControls,
    p: &GameParams,
) -> Result<(f64, f64)> {
    let (dx, dy) = reduced_dynamics(xr, u, v, p)?;
    Ok((-dx, -dy))
}

#[inline]
pub(crate) fn realistic_rhs(
    theta_e: f64,
    u: EvaderControls,
    v: PursuerWorldControls,
    b: f64,
) -> [f64; 5] {
    let (sp, cp) = v.psi_p.sin_cos();
    let (st, ct) = theta_e.sin_cos();
    let fwd = u.forward_speed();
    [v.v_p * cp, v.v_p * sp, fwd * ct, fwd * st, u.turn_rate(b)]
}

/// World-frame rates `(x_p, y_p, x_e, y_e, theta_e)`.
pub fn realistic_dynamics(
    rs: &RealisticState,
    u: EvaderControls,
    v: PursuerWorldControls,
    p: &GameParams,
) -> Result<[f64; 5]> {
    u.check(p)?;
    v.check(p)?;
    Ok(realistic_rhs(rs.theta_e, u, v, p.b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p() -> GameParams {
        GameParams::default()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(GameParams::new(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(GameParams::new(1.0, 1.2, 1.0, 2.0).is_err());
        assert!(GameParams::new(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(GameParams::new(0.0, 0.0, 1.0, 2.0).is_err());
        assert!(GameParams::new(1.0, -0.1, 1.0, 2.0).is_err());
        assert!(GameParams::new(1.0, 0.5, f64::NAN, 2.0).is_err());
        let err = GameParams::new(1.0, 1.5, 1.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("v_d_max"));
        let q = GameParams::new(1.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(q.rho_v(), 0.0);
        assert_eq!(q.rho_l(), 2.0);
    }

    #[test]
    fn to_reduced_examples() {
        let a = to_reduced(&RealisticState::new(0.0, 1.0, 0.0, 0.0, FRAC_PI_2));
        assert_abs_diff_eq!(a.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.y, 1.0, epsilon = 1e-15);
        let b = to_reduced(&RealisticState::new(1.0, 0.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(b.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.y, 1.0, epsilon = 1e-15);

        // Oracle: the transform written out term by term.
        let (xp, yp, xe, ye, th) = (0.3, 1.7, -0.2, 0.4, 2.1_f64);
        let ex = (xp - xe) * th.sin() - (yp - ye) * th.cos();
        let ey = (xp - xe) * th.cos() + (yp - ye) * th.sin();
        let c = to_reduced(&RealisticState::new(xp, yp, xe, ye, th));
        assert_abs_diff_eq!(c.x, ex, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, ey, epsilon = 1e-15);
        assert_abs_diff_eq!(c.x, 1.0879046193, epsilon = 1e-9);
        assert_abs_diff_eq!(c.y, 0.8697491243, epsilon = 1e-9);
    }

    #[test]
    fn from_reduced_inverts_to_reduced() {
        let xr = ReducedState::new(0.7, -1.1);
        let rs = RealisticState::from_reduced(xr, 3.0, -2.0, 4.0);
        let back = to_reduced(&rs);
        assert_abs_diff_eq!(back.x, xr.x, epsilon = 1e-14);
        assert_abs_diff_eq!(back.y, xr.y, epsilon = 1e-14);
    }

    #[test]
    fn reduced_dynamics_examples() {
        let p = p();
        let vr = p.v_r_max();
        let d = reduced_dynamics(
            ReducedState::new(0.4, -0.9),
            EvaderControls::new(vr, vr),
            PursuerControls::new(0.0, 1.0),
            &p,
        )
        .unwrap();
        assert_eq!(d, (0.0, -vr));

        let d = reduced_dynamics(
            ReducedState::new(1.0, 0.0),
            EvaderControls::new(-vr, vr),
            PursuerControls::new(0.0, 0.0),
            &p,
        )
        .unwrap();
        assert_abs_diff_eq!(d.0, 0.0);
        assert_abs_diff_eq!(d.1, -vr / p.b());

        let xr = ReducedState::new(0.768, 1.484);
        let d = reduced_dynamics(
            xr,
            EvaderControls::new(-1.0, -1.0),
            PursuerControls::new(0.6, 0.3),
            &p,
        )
        .unwrap();
        assert_abs_diff_eq!(d.0, 0.6 * 0.3_f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.1, 1.0 + 0.6 * 0.3_f64.cos(), epsilon = 1e-15);

        let r = retro_reduced_dynamics(
            xr,
            EvaderControls::new(-1.0, -1.0),
            PursuerControls::new(0.6, 0.3),
            &p,
        )
        .unwrap();
        assert_eq!(r, (-d.0, -d.1));
    }

    #[test]
    fn control_bounds_rejected() {
        let p = p();
        let xr = ReducedState::new(0.0, 1.0);
        assert!(matches!(
            reduced_dynamics(
                xr,
                EvaderControls::new(1.5, 0.0),
                PursuerControls::new(0.0, 0.0),
                &p
            ),
            Err(GameError::ControlBound { control: "u1", .. })
        ));
        assert!(matches!(
            reduced_dynamics(
                xr,
                EvaderControls::new(0.0, 0.0),
                PursuerControls::new(0.7, 0.0),
                &p
            ),
            Err(GameError::ControlBound { control: "v1", .. })
        ));
        let rs = RealisticState::new(0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(realistic_dynamics(
            &rs,
            EvaderControls::new(0.0, -1.01),
            PursuerWorldControls::stationary(),
            &p
        )
        .is_err());
    }

    #[test]
    fn realistic_dynamics_examples() {
        let p = p();
        let rs = RealisticState::new(1.0, 2.0, -0.5, 0.5, 0.7);
        let d = realistic_dynamics(
            &rs,
            EvaderControls::new(1.0, 1.0),
            PursuerWorldControls::stationary(),
            &p,
        )
        .unwrap();
        assert_eq!(d[4], 0.0);
        assert_abs_diff_eq!(d[2].hypot(d[3]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3].atan2(d[2]), 0.7, epsilon = 1e-15);

        let d = realistic_dynamics(
            &rs,
            EvaderControls::new(-1.0, 1.0),
            PursuerWorldControls::new(0.6, 1.0),
            &p,
        )
        .unwrap();
        assert_abs_diff_eq!(d[4], 1.0 / p.b());
        assert_eq!((d[2], d[3]), (0.0, 0.0));
        assert_abs_diff_eq!(d[0], 0.6 * 1.0_f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.6 * 1.0_f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(normalize_angle(-1e-20), 0.0);
        assert_abs_diff_eq!(normalize_angle(-FRAC_PI_2), 1.5 * PI);
        assert_abs_diff_eq!(angle_diff(0.1, TAU - 0.1), 0.2, epsilon = 1e-15);
        let w = PursuerWorldControls::new(0.5, 1.2);
        let r = w.to_reduced(0.4);
        let back = r.to_world(0.4);
        assert_abs_diff_eq!(back.psi_p, 1.2, epsilon = 1e-15);
    }
}
