//! Closed-form retro-time trajectory field.
//!
//! Every optimal trajectory starts (in retro-time `tau = t_f - t`) on the
//! usable part at angle `s` with both players translating at full speed.
//! The costate stays fixed until one wheel's switching function crosses
//! zero at `tau_s`; after that the evader rotates in place at `|omega| =
//! V_r / b` while the costate rotates rigidly with it.
//!
//! Sign conventions used throughout:
//! - `d = -1` for backward escapes (`cos s > 0`), `+1` for forward ones.
//! - The pursuer heads at the evader: `v2 = phi + π` where `phi` is the
//!   current costate direction (`phi = s` before the switch).
//! - During rotation the point is the primary point with the pursuer
//!   drift continued, rigidly rotated by `omega (tau - tau_s)`:
//!   `z = R(omega Δ) [(r_d + tau V_d) e(s) + d V_r tau_s ŷ]`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{reduced_rhs, EvaderControls, GameParams, PursuerControls, ReducedState};
use crate::terminal::{classify_boundary, terminal_costate, BoundaryClass, EscapeDirection};

/// Switching functions closer than this to zero are treated as ties.
pub const TIE_TOL: f64 = 1e-10;

/// Default sampling step of synthesized trajectories (s).
pub const DEFAULT_DT: f64 = 1e-3;

/// `|sin s|` below this is treated as zero: no switch ever happens.
const NO_SWITCH_SIN: f64 = 1e-14;

/// Slack on retro-time phase bounds.
const TAU_SLACK: f64 = 1e-12;

/// Adjoint vector of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costate {
    pub lambda_x: f64,
    pub lambda_y: f64,
}

impl Costate {
    pub const fn new(lambda_x: f64, lambda_y: f64) -> Self {
        Costate { lambda_x, lambda_y }
    }

    /// `-(sin phi, cos phi)`: the unit costate whose pursuer response heads
    /// along `phi + π`.
    pub fn from_direction(phi: f64) -> Self {
        let (sn, cs) = phi.sin_cos();
        Costate::new(-sn, -cs)
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.lambda_x.hypot(self.lambda_y)
    }

    pub fn scaled(self, k: f64) -> Self {
        Costate::new(self.lambda_x * k, self.lambda_y * k)
    }
}

/// Multiplier that turns the unit terminal costate into the one satisfying
/// `min max H = 0`: `1 / (V_r |cos s| - V_d)`. Constant along a trajectory.
pub fn costate_scale(s: f64, p: &GameParams) -> f64 {
    1.0 / (p.v_r_max() * s.cos().abs() - p.v_d_max())
}

/// `H = λ · f(x, u, v) + 1` in the reduced space.
pub fn hamiltonian(
    xr: ReducedState,
    c: Costate,
    u: EvaderControls,
    v: PursuerControls,
    p: &GameParams,
) -> f64 {
    let (fx, fy) = reduced_rhs(xr, u, v, p.b());
    c.lambda_x * fx + c.lambda_y * fy + 1.0
}

/// Arguments of the two sign functions in the evader's optimal control law.
pub fn switching_functions(xr: ReducedState, c: Costate, p: &GameParams) -> (f64, f64) {
    let b = p.b();
    let cross = (xr.y * c.lambda_x - xr.x * c.lambda_y) / b;
    (-cross - c.lambda_y, cross - c.lambda_y)
}

/// Min-max controls for a given state and costate. Reports a dispersal tie
/// when either switching function is within [`TIE_TOL`] of zero.
pub fn optimal_controls(
    xr: ReducedState,
    c: Costate,
    p: &GameParams,
) -> Result<(EvaderControls, PursuerControls)> {
    let g = c.gamma();
    if !(g > 0.0) {
        return Err(GameError::InvalidArgument(
            "costate must be non-zero".into(),
        ));
    }
    let (a1, a2) = switching_functions(xr, c, p);
    if a1.abs() <= TIE_TOL {
        return Err(GameError::DispersalTie {
            which: "u1",
            value: a1,
        });
    }
    if a2.abs() <= TIE_TOL {
        return Err(GameError::DispersalTie {
            which: "u2",
            value: a2,
        });
    }
    let vr = p.v_r_max();
    let u = EvaderControls::new(-a1.signum() * vr, -a2.signum() * vr);
    let v = PursuerControls::new(p.v_d_max(), (c.lambda_x / g).atan2(c.lambda_y / g));
    Ok((u, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wheel {
    U1,
    U2,
}

/// The first evader control switch along a primary trajectory. `from` and
/// `to` are listed in retro-time order (increasing `tau`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelSwitch {
    pub wheel: Wheel,
    pub tau_s: f64,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchSchedule {
    pub s: f64,
    pub direction: EscapeDirection,
    /// Retro-time for the primary line to reach the x-axis.
    pub tau_i: f64,
    /// `None` when `sin s = 0`: the switch time is infinite.
    pub switch: Option<WheelSwitch>,
}

impl SwitchSchedule {
    pub fn tau_s(&self) -> Option<f64> {
        self.switch.map(|w| w.tau_s)
    }

    /// Whether the evader switches before the primary line meets the x-axis.
    pub fn switches_before_axis(&self) -> bool {
        matches!(self.switch, Some(w) if w.tau_s < self.tau_i)
    }

    /// Evader controls after the switch.
    pub fn rotation_controls(&self, p: &GameParams) -> Option<EvaderControls> {
        let w = self.switch?;
        let keep = self.direction.sign() * p.v_r_max();
        Some(match w.wheel {
            Wheel::U1 => EvaderControls::new(w.to, keep),
            Wheel::U2 => EvaderControls::new(keep, w.to),
        })
    }

    /// Turn rate `(u2 - u1) / 2b` after the switch.
    pub fn rotation_rate(&self, p: &GameParams) -> Option<f64> {
        self.rotation_controls(p).map(|u| u.turn_rate(p.b()))
    }
}

fn require_usable(s: f64, p: &GameParams) -> Result<EscapeDirection> {
    match classify_boundary(s, p) {
        BoundaryClass::UsableBackward => Ok(EscapeDirection::Backward),
        BoundaryClass::UsableForward => Ok(EscapeDirection::Forward),
        class => Err(GameError::NotUsable { s, class }),
    }
}

pub fn switch_schedule(s: f64, p: &GameParams) -> Result<SwitchSchedule> {
    let direction = require_usable(s, p)?;
    let d = direction.sign();
    let (sn, cs) = s.sin_cos();
    let vr = p.v_r_max();
    let tau_i = (p.r_d() * cs / (p.v_d_max() * cs + d * vr)).abs();
    let switch = if sn.abs() <= NO_SWITCH_SIN {
        None
    } else {
        // Switching functions along the primary line are
        // cos s ± d tau V_r sin s / b; the one whose tau term opposes
        // cos s crosses zero first (and only).
        let wheel = if d * sn * cs < 0.0 {
            Wheel::U1
        } else {
            Wheel::U2
        };
        Some(WheelSwitch {
            wheel,
            tau_s: (p.b() * cs / (vr * sn)).abs(),
            from: d * vr,
            to: -d * vr,
        })
    };
    Ok(SwitchSchedule {
        s,
        direction,
        tau_i,
        switch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryPhase {
    Primary,
    Rotation,
}

impl TrajectoryPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryPhase::Primary => "primary",
            TrajectoryPhase::Rotation => "rotation",
        }
    }
}

impl std::str::FromStr for TrajectoryPhase {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primary" => Ok(TrajectoryPhase::Primary),
            "rotation" => Ok(TrajectoryPhase::Rotation),
            other => Err(GameError::InvalidArgument(format!(
                "unknown phase `{other}`"
            ))),
        }
    }
}

/// Data at the switch that seeds the rotation-in-place family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationPhase {
    pub tau_s: f64,
    pub x_s: f64,
    pub y_s: f64,
    pub lambda_s: Costate,
    /// Signed turn rate after the switch, `±V_r / b`.
    pub omega: f64,
    /// Evader heading at the switch in the world frame.
    pub theta_e_s: f64,
}

impl RotationPhase {
    /// `None` when the trajectory never switches.
    pub fn new(s: f64, p: &GameParams) -> Result<Option<Self>> {
        let sched = switch_schedule(s, p)?;
        Ok(Self::from_schedule(&sched, p))
    }

    pub fn from_schedule(sched: &SwitchSchedule, p: &GameParams) -> Option<Self> {
        let w = sched.switch?;
        let z = primary_unchecked(sched.s, w.tau_s, sched.direction, p);
        Some(RotationPhase {
            tau_s: w.tau_s,
            x_s: z.x,
            y_s: z.y,
            lambda_s: terminal_costate(sched.s),
            omega: sched.rotation_rate(p)?,
            theta_e_s: 0.0,
        })
    }

    pub fn with_heading(mut self, theta_e_s: f64) -> Self {
        self.theta_e_s = theta_e_s;
        self
    }

    /// Evader world heading during the rotation.
    pub fn evader_heading(&self, tau: f64) -> f64 {
        self.theta_e_s - self.omega * (tau - self.tau_s)
    }

    /// Costate direction `phi = s - omega (tau - tau_s)`.
    pub fn costate_angle(&self, s: f64, tau: f64) -> f64 {
        s - self.omega * (tau - self.tau_s)
    }
}

/// Costate at retro-time `tau` (unit norm).
pub fn costate_retro(
    s: f64,
    tau: f64,
    sched: &SwitchSchedule,
    rot: Option<&RotationPhase>,
) -> Costate {
    match (sched.switch, rot) {
        (Some(w), Some(r)) if tau > w.tau_s => Costate::from_direction(r.costate_angle(s, tau)),
        _ => terminal_costate(s),
    }
}

#[inline]
fn primary_unchecked(s: f64, tau: f64, dir: EscapeDirection, p: &GameParams) -> ReducedState {
    let (sn, cs) = s.sin_cos();
    let vd = p.v_d_max();
    ReducedState::new(
        tau * vd * sn + p.r_d() * sn,
        tau * (vd * cs + dir.sign() * p.v_r_max()) + p.r_d() * cs,
    )
}

/// Point of the primary (straight-line) family.
pub fn primary_point(s: f64, tau: f64, p: &GameParams) -> Result<ReducedState> {
    let sched = switch_schedule(s, p)?;
    let max = sched.tau_s().map_or(sched.tau_i, |ts| ts.min(sched.tau_i));
    if !(tau >= 0.0 && tau <= max * (1.0 + TAU_SLACK) + TAU_SLACK) {
        return Err(GameError::TauOutOfRange { tau, min: 0.0, max });
    }
    Ok(primary_unchecked(s, tau, sched.direction, p))
}

#[inline]
fn rotation_unchecked(rot: &RotationPhase, s: f64, tau: f64, p: &GameParams) -> ReducedState {
    let dt = tau - rot.tau_s;
    let (sa, ca) = (rot.omega * dt).sin_cos();
    let (sp, cp) = (s - rot.omega * dt).sin_cos();
    let vd = p.v_d_max();
    ReducedState::new(
        -rot.y_s * sa + rot.x_s * ca + dt * vd * sp,
        rot.x_s * sa + rot.y_s * ca + dt * vd * cp,
    )
}

/// Point of the rotation-in-place family for `tau >= tau_s`.
pub fn rotation_point(
    rot: &RotationPhase,
    s: f64,
    tau: f64,
    p: &GameParams,
) -> Result<ReducedState> {
    if !(tau >= rot.tau_s * (1.0 - TAU_SLACK) - TAU_SLACK) {
        return Err(GameError::TauOutOfRange {
            tau,
            min: rot.tau_s,
            max: f64::INFINITY,
        });
    }
    Ok(rotation_unchecked(rot, s, tau, p))
}

/// One point of the optimal trajectory field with the optimal decision there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub tau: f64,
    pub state: ReducedState,
    pub phase: TrajectoryPhase,
    /// Unit costate.
    pub costate: Costate,
    pub evader: EvaderControls,
    pub pursuer: PursuerControls,
}

/// Closed-form field evaluation at `(s, tau)` that does not check the
/// x-axis crossing.
#[derive(Debug, Clone, Copy)]
pub struct FieldCurve {
    pub s: f64,
    pub schedule: SwitchSchedule,
    pub rotation: Option<RotationPhase>,
    pub params: GameParams,
}

impl FieldCurve {
    pub fn new(s: f64, p: &GameParams) -> Result<Self> {
        let schedule = switch_schedule(s, p)?;
        let rotation = RotationPhase::from_schedule(&schedule, p);
        Ok(FieldCurve {
            s,
            schedule,
            rotation,
            params: *p,
        })
    }

    pub fn phase_at(&self, tau: f64) -> TrajectoryPhase {
        match self.schedule.tau_s() {
            Some(ts) if tau > ts => TrajectoryPhase::Rotation,
            _ => TrajectoryPhase::Primary,
        }
    }

    pub fn point(&self, tau: f64) -> ReducedState {
        match (self.phase_at(tau), &self.rotation) {
            (TrajectoryPhase::Rotation, Some(rot)) => {
                rotation_unchecked(rot, self.s, tau, &self.params)
            }
            _ => primary_unchecked(self.s, tau, self.schedule.direction, &self.params),
        }
    }

    pub fn costate(&self, tau: f64) -> Costate {
        costate_retro(self.s, tau, &self.schedule, self.rotation.as_ref())
    }

    /// Optimal controls from the phase law. At `tau = tau_s` this returns the
    /// primary (pre-switch) controls.
    pub fn controls(&self, tau: f64) -> (EvaderControls, PursuerControls) {
        let p = &self.params;
        match (self.phase_at(tau), &self.rotation) {
            (TrajectoryPhase::Rotation, Some(rot)) => (
                self.schedule
                    .rotation_controls(p)
                    .expect("rotation implies a switch"),
                PursuerControls::new(p.v_d_max(), rot.costate_angle(self.s, tau) + PI),
            ),
            _ => (
                EvaderControls::translate(self.schedule.direction.sign(), p),
                PursuerControls::new(p.v_d_max(), self.s + PI),
            ),
        }
    }

    pub fn sample(&self, tau: f64) -> FieldSample {
        let (evader, pursuer) = self.controls(tau);
        FieldSample {
            tau,
            state: self.point(tau),
            phase: self.phase_at(tau),
            costate: self.costate(tau),
            evader,
            pursuer,
        }
    }

    /// Retro-time at which the trajectory meets the x-axis.
    pub fn axis_time(&self) -> f64 {
        let c = Canonical::new(self.s, &self.params);
        c.time_at_angle(FRAC_PI_2)
            .map(|(t, _)| t)
            .unwrap_or(self.schedule.tau_i)
    }

    /// Retro-time of the first exit from the detection disk, if any.
    pub fn exit_time(&self) -> Option<f64> {
        Canonical::new(self.s, &self.params).exit_time()
    }

    /// End of the part of the trajectory that belongs to the optimal field:
    /// the first of the x-axis crossing and the disk exit.
    pub fn horizon(&self) -> f64 {
        let a = self.axis_time();
        self.exit_time().map_or(a, |e| e.min(a))
    }
}

/// Why a synthesized trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathEnd {
    /// Reached the requested retro-time.
    Completed,
    /// Met the x-axis (Dispersal Surface) at this retro-time.
    Dispersal { tau: f64 },
}

/// Sampled closed-form retro-time trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetroPath {
    pub s: f64,
    pub schedule: SwitchSchedule,
    pub rotation: Option<RotationPhase>,
    /// Multiplier that makes the stored unit costates satisfy `H = 0`.
    pub costate_scale: f64,
    pub samples: Vec<FieldSample>,
    pub end: PathEnd,
}

impl RetroPath {
    /// Hamiltonian at each sample with the scaled costate.
    pub fn hamiltonian_residuals<'a>(
        &'a self,
        p: &'a GameParams,
    ) -> impl Iterator<Item = f64> + 'a {
        self.samples.iter().map(move |smp| {
            hamiltonian(
                smp.state,
                smp.costate.scaled(self.costate_scale),
                smp.evader,
                smp.pursuer,
                p,
            )
        })
    }

    /// Phase of each sample, with consecutive duplicates removed.
    pub fn phase_sequence(&self) -> Vec<TrajectoryPhase> {
        let mut out: Vec<TrajectoryPhase> = Vec::new();
        for smp in &self.samples {
            if out.last() != Some(&smp.phase) {
                out.push(smp.phase);
            }
        }
        out
    }
}

/// Samples the trajectory from `s` over `[0, tau_total]` at step `dt`,
/// stopping early where it meets the x-axis.
pub fn trajectory(s: f64, tau_total: f64, p: &GameParams, dt: f64) -> Result<RetroPath> {
    if !(dt > 0.0) || !(tau_total >= 0.0) {
        return Err(GameError::InvalidArgument(
            "dt must be > 0 and tau_total >= 0".into(),
        ));
    }
    let curve = FieldCurve::new(s, p)?;
    let axis = curve.axis_time();
    let (stop, end) = if axis < tau_total {
        (axis, PathEnd::Dispersal { tau: axis })
    } else {
        (tau_total, PathEnd::Completed)
    };
    let n = (stop / dt).floor() as usize;
    let mut samples: Vec<FieldSample> = (0..=n).map(|k| curve.sample(k as f64 * dt)).collect();
    if stop - n as f64 * dt > 1e-12 {
        samples.push(curve.sample(stop));
    }
    Ok(RetroPath {
        s,
        schedule: curve.schedule,
        rotation: curve.rotation,
        costate_scale: costate_scale(s, p),
        samples,
        end,
    })
}

/// A usable angle folded into the quadrant `s ∈ [0, π/2)` of the backward
/// family. The field is symmetric under `x -> -x` (`s -> -s`) and under
/// `y -> -y` (`s -> π - s`, escape direction flipped), so every query can be
/// answered in this quadrant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Canonical {
    pub s: f64,
    pub sin: f64,
    pub cos: f64,
    /// Switch time, infinite for `s = 0`.
    pub tau_s: f64,
    r_d: f64,
    v_r: f64,
    v_d: f64,
    /// `V_r / b`, the clockwise angular rate of the rotation phase.
    turn: f64,
    b: f64,
}

impl Canonical {
    /// Folds `s` into the canonical quadrant. `s` must not be a dispersal
    /// endpoint.
    pub fn new(s: f64, p: &GameParams) -> Self {
        let (sn, cs) = s.sin_cos();
        Self::from_folded(sn.abs().atan2(cs.abs()), p)
    }

    pub fn from_folded(s: f64, p: &GameParams) -> Self {
        let (sin, cos) = s.sin_cos();
        let tau_s = if sin <= NO_SWITCH_SIN {
            f64::INFINITY
        } else {
            p.b() * cos / (p.v_r_max() * sin)
        };
        Canonical {
            s,
            sin,
            cos,
            tau_s,
            r_d: p.r_d(),
            v_r: p.v_r_max(),
            v_d: p.v_d_max(),
            turn: p.max_turn_rate(),
            b: p.b(),
        }
    }

    #[inline]
    pub fn primary(&self, tau: f64) -> (f64, f64) {
        let q = self.r_d + tau * self.v_d;
        (q * self.sin, q * self.cos - tau * self.v_r)
    }

    /// Un-rotated rotation-phase point: primary point with the pursuer drift
    /// continued past the switch.
    #[inline]
    fn drifted(&self, tau: f64) -> (f64, f64) {
        let q = self.r_d + tau * self.v_d;
        (q * self.sin, q * self.cos - self.tau_s * self.v_r)
    }

    pub fn point(&self, tau: f64) -> (f64, f64) {
        if tau <= self.tau_s {
            return self.primary(tau);
        }
        let (wx, wy) = self.drifted(tau);
        // Clockwise rotation by turn * (tau - tau_s).
        let (sa, ca) = (self.turn * (tau - self.tau_s)).sin_cos();
        (wx * ca + wy * sa, -wx * sa + wy * ca)
    }

    /// Polar angle (clockwise from +y) of the rotation-phase point.
    #[inline]
    fn rotation_angle(&self, tau: f64) -> f64 {
        let (wx, wy) = self.drifted(tau);
        wx.atan2(wy) + self.turn * (tau - self.tau_s)
    }

    /// Retro-time at which the curve reaches polar angle `theta` (clockwise
    /// from +y), ignoring disk exits. The angle is strictly increasing along
    /// the curve in both phases, so the answer is unique. Returns `None` for
    /// `s = 0` (the curve is the y-axis) or `theta < s`.
    pub fn time_at_angle(&self, theta: f64) -> Option<(f64, TrajectoryPhase)> {
        if theta < self.s || self.sin <= NO_SWITCH_SIN {
            return None;
        }
        // Primary: the line meets the ray at
        // tau = r_d sin(theta - s) / (V_r sin theta - V_d sin(theta - s)).
        let dth = (theta - self.s).sin();
        let den = self.v_r * theta.sin() - self.v_d * dth;
        if den > 0.0 {
            let tau = self.r_d * dth / den;
            if tau <= self.tau_s {
                return Some((tau, TrajectoryPhase::Primary));
            }
        }
        let a0 = self.rotation_angle(self.tau_s);
        if theta <= a0 {
            return Some((self.tau_s, TrajectoryPhase::Primary));
        }
        // d(angle)/d(tau) = V_r/b - V_d b cos s / |w|^2 >= (V_r cos s - V_d) / (b cos s).
        let min_rate = (self.v_r * self.cos - self.v_d) / (self.b * self.cos);
        if !(min_rate > 0.0) {
            return None;
        }
        let mut lo = 0.0;
        let mut hi = (theta - a0) / min_rate * (1.0 + 1e-9) + 1e-12;
        let mut x = (theta - a0) / self.turn;
        let k = self.b * self.cos;
        for _ in 0..200 {
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let tau = self.tau_s + x;
            let h = self.rotation_angle(tau) - theta;
            if h == 0.0 {
                break;
            }
            if h < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let (wx, wy) = self.drifted(tau);
            let dh = self.turn - self.v_d * k / (wx * wx + wy * wy);
            let step = h / dh;
            x -= step;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + lo) {
                break;
            }
        }
        let x = x.clamp(lo, hi);
        Some((self.tau_s + x, TrajectoryPhase::Rotation))
    }

    /// First retro-time at which the curve leaves the detection disk.
    /// `|z|^2` is convex in `tau` on each phase, so a curve never re-enters.
    pub fn exit_time(&self) -> Option<f64> {
        let (vr, vd, rd) = (self.v_r, self.v_d, self.r_d);
        // Primary: |z|^2 - r_d^2 = tau [2 r_d (V_d - V_r cos s) + tau |V_d e - V_r ŷ|^2].
        let quad = vd * vd - 2.0 * vd * vr * self.cos + vr * vr;
        let t_exit = -2.0 * rd * (vd - vr * self.cos) / quad;
        if t_exit <= self.tau_s {
            return Some(t_exit.max(0.0));
        }
        if vd == 0.0 || !self.tau_s.is_finite() {
            return None;
        }
        // Rotation: |w| = r_d with w = q e(s) - k ŷ, k = V_r tau_s.
        let k = vr * self.tau_s;
        let disc = rd * rd - k * k * self.sin * self.sin;
        if disc < 0.0 {
            return None;
        }
        let q = k * self.cos + disc.sqrt();
        Some((q - rd) / vd)
    }
}
