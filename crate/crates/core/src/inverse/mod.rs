//! Inversion of the trajectory field: state -> (s, tau, phase).
//!
//! Queries are folded into the quadrant `x >= 0, y >= 0`, where the answer
//! comes from the backward family with `s ∈ [0, acos rho_v)`. The primary
//! family has a closed-form inverse (eliminating `s` leaves a quadratic in
//! `tau`). If that fails, the rotation family is searched by bisection in `s`.
//! Along each curve the polar angle grows monotonically, and the radius at
//! the query angle increases with `s`.

mod partition;

pub use partition::{rasterize_partition, CellClass, PartitionMap};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{
    to_reduced, EvaderControls, GameParams, PursuerControls, PursuerWorldControls, RealisticState,
    ReducedState,
};
use crate::synthesis::{Canonical, FieldCurve, TrajectoryPhase};

/// Relative slack on the disk radius.
const DISK_TOL: f64 = 1e-12;
/// `|y| / r_d` below which a state is on the Dispersal Surface.
pub const DISPERSAL_TOL: f64 = 1e-12;
/// Accepted position residual of an inverse solution, relative to `r_d`.
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Unique,
    /// On the x-axis, resolved with the trajectory arriving from `y > 0`.
    DispersalUpper,
    /// On the x-axis, resolved with the trajectory arriving from `y < 0`.
    DispersalLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    /// Terminal angle on the usable part.
    pub s: f64,
    /// Time-to-escape under optimal play.
    pub tau: f64,
    pub phase: TrajectoryPhase,
    pub branch: Branch,
    pub evader: EvaderControls,
    pub pursuer: PursuerControls,
}

impl SynthesisResult {
    /// Switch retro-time of the matched trajectory, if it has one.
    pub fn tau_s(&self, p: &GameParams) -> Option<f64> {
        FieldCurve::new(self.s, p).ok()?.schedule.tau_s()
    }
}

/// Which of the two branches to take on the Dispersal Surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Solves the folded problem. Returns `(s_c, tau, phase)`.
fn solve_canonical(xq: f64, yq: f64, p: &GameParams) -> Result<(f64, f64, TrajectoryPhase)> {
    let (vr, vd, rd) = (p.v_r_max(), p.v_d_max(), p.r_d());
    let a = p.usable_half_width();

    // |(x, y + tau V_r)| = r_d + tau V_d, squared.
    let qa = vr * vr - vd * vd;
    let qb = 2.0 * (yq * vr - rd * vd);
    let qc = (xq * xq + yq * yq - rd * rd).min(0.0);
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let tau = if qb >= 0.0 {
        if qc == 0.0 {
            0.0
        } else {
            -2.0 * qc / (qb + disc)
        }
    } else {
        (disc - qb) / (2.0 * qa)
    };
    let s = xq.atan2(yq + tau * vr);
    if s < a {
        let c = Canonical::from_folded(s, p);
        if tau <= c.tau_s * (1.0 + 1e-12) {
            return Ok((s, tau, TrajectoryPhase::Primary));
        }
    }

    // Rotation family: radius of curve `s` where it crosses the query ray.
    let theta = xq.atan2(yq);
    let rq = xq.hypot(yq);
    let radius_gap = |s: f64| -> f64 {
        let c = Canonical::from_folded(s, p);
        match c.time_at_angle(theta) {
            None => f64::NEG_INFINITY,
            Some((t, _)) => {
                if matches!(c.exit_time(), Some(e) if t > e * (1.0 + 1e-12) + 1e-15) {
                    f64::INFINITY
                } else {
                    let (x, y) = c.point(t);
                    x.hypot(y) - rq
                }
            }
        }
    };
    let (mut lo, mut hi) = (0.0_f64, theta.min(a));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius_gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let c = Canonical::from_folded(s, p);
    let residual = |t: f64| {
        let (x, y) = c.point(t);
        (x - xq).hypot(y - yq)
    };
    match c.time_at_angle(theta) {
        Some((t, phase)) if residual(t) <= RESIDUAL_TOL * rd => Ok((s, t, phase)),
        found => Err(GameError::NoConvergence {
            x: xq,
            y: yq,
            residual: found.map_or(f64::INFINITY, |(t, _)| residual(t)),
        }),
    }
}

fn result_at(
    s: f64,
    tau: f64,
    phase: TrajectoryPhase,
    branch: Branch,
    p: &GameParams,
) -> Result<SynthesisResult> {
    let curve = FieldCurve::new(s, p)?;
    // Near the switch the solved phase wins over rounding in tau.
    let t_ctrl = match (phase, curve.schedule.tau_s()) {
        (TrajectoryPhase::Primary, Some(ts)) => tau.min(ts),
        _ => tau,
    };
    let (evader, pursuer) = curve.controls(t_ctrl);
    Ok(SynthesisResult {
        s,
        tau,
        phase,
        branch,
        evader,
        pursuer,
    })
}

fn check_disk(xr: ReducedState, p: &GameParams) -> Result<()> {
    let radius = xr.radius();
    if !(radius <= p.r_d() * (1.0 + DISK_TOL)) {
        return Err(GameError::OutsideDisk {
            radius,
            r_d: p.r_d(),
        });
    }
    Ok(())
}

/// Synthesis coordinates of `xr` with an explicit choice of branch on the
/// Dispersal Surface. Off the x-axis, `side` is ignored.
pub fn synthesize_branch(xr: ReducedState, side: Side, p: &GameParams) -> Result<SynthesisResult> {
    check_disk(xr, p)?;
    let rd = p.r_d();
    let on_axis = xr.y.abs() <= DISPERSAL_TOL * rd;
    let lower = if on_axis {
        side == Side::Lower
    } else {
        xr.y < 0.0
    };

    if on_axis && xr.x.abs() <= DISPERSAL_TOL * rd {
        // Centre of the disk: every direction is cost-equal; take the
        // forward escape along -y (s = π), or s = 0 for the upper branch.
        let tau = rd / (p.v_r_max() - p.v_d_max());
        let (s, branch) = if side == Side::Upper {
            (0.0, Branch::DispersalUpper)
        } else {
            (PI, Branch::DispersalLower)
        };
        return result_at(s, tau, TrajectoryPhase::Primary, branch, p);
    }

    let (xq, yq) = (xr.x.abs(), if on_axis { 0.0 } else { xr.y.abs() });
    let (sc, tau, phase) = solve_canonical(xq, yq, p)?;
    let mut s = if xr.x < 0.0 { -sc } else { sc };
    if lower {
        s = PI - s;
    }
    let s = crate::game::normalize_angle(s);
    let branch = match (on_axis, lower) {
        (false, _) => Branch::Unique,
        (true, false) => Branch::DispersalUpper,
        (true, true) => Branch::DispersalLower,
    };
    result_at(s, tau, phase, branch, p)
}

/// Synthesis coordinates of a reduced state. On the x-axis the branch
/// arriving from `y > 0` is returned; the other one has the same cost.
/// The disk centre maps to the forward escape `s = π`.
pub fn synthesize(xr: ReducedState, p: &GameParams) -> Result<SynthesisResult> {
    let rd = p.r_d();
    let side = if xr.x.abs() <= DISPERSAL_TOL * rd && xr.y.abs() <= DISPERSAL_TOL * rd {
        Side::Lower
    } else {
        Side::Upper
    };
    synthesize_branch(xr, side, p)
}

/// Optimal time-to-escape.
pub fn value(xr: ReducedState, p: &GameParams) -> Result<f64> {
    synthesize(xr, p).map(|r| r.tau)
}

/// Optimal feedback for both players in the world frame.
pub fn feedback(
    rs: &RealisticState,
    p: &GameParams,
) -> Result<(EvaderControls, PursuerWorldControls)> {
    let r = synthesize(to_reduced(rs), p)?;
    Ok((r.evader, r.pursuer.to_world(rs.theta_e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{optimal_controls, primary_point, rotation_point, RotationPhase};
    use crate::terminal::terminal_controls;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn stationary_disk_on_axis() {
        let p = GameParams::new(1.0, 0.0, 1.0, 2.0).unwrap();
        let r = synthesize(ReducedState::new(0.0, 1.0), &p).unwrap();
        assert_abs_diff_eq!(r.s, 0.0);
        assert_abs_diff_eq!(r.tau, 1.0, epsilon = 1e-14);
        assert_eq!(r.phase, TrajectoryPhase::Primary);
        assert_eq!(r.branch, Branch::Unique);
    }

    #[test]
    fn usable_part_has_zero_value() {
        let p = GameParams::default();
        let s: f64 = 0.3;
        let xr = ReducedState::new(2.0 * s.sin(), 2.0 * s.cos());
        let r = synthesize(xr, &p).unwrap();
        assert_abs_diff_eq!(r.s, s, epsilon = 1e-12);
        assert_abs_diff_eq!(r.tau, 0.0, epsilon = 1e-12);
        let (u, v) = terminal_controls(s, &p).unwrap();
        assert_eq!(r.evader, u);
        assert_abs_diff_eq!(r.pursuer.v2, v.v2, epsilon = 1e-10);
    }

    #[test]
    fn recovers_reference_start_point() {
        let p = GameParams::default();
        let rot = RotationPhase::new(0.3, &p).unwrap().unwrap();
        // Slightly before the axis crossing, so the upper family applies.
        let z = rotation_point(&rot, 0.3, 3.8, &p).unwrap();
        let r = synthesize(z, &p).unwrap();
        assert_abs_diff_eq!(r.s, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(r.tau, 3.8, epsilon = 1e-9);
        assert_eq!(r.phase, TrajectoryPhase::Rotation);

        // tau = 3.84 sits just below the axis: the mirrored forward family
        // owns it, with nearly the same time-to-escape.
        let z = rotation_point(&rot, 0.3, 3.84, &p).unwrap();
        assert!(z.y < 0.0);
        let r = synthesize(z, &p).unwrap();
        assert_abs_diff_eq!(r.s, PI - 0.3, epsilon = 0.01);
        assert_abs_diff_eq!(r.tau, 3.84, epsilon = 2e-2);
        assert_eq!(r.phase, TrajectoryPhase::Rotation);
    }

    #[test]
    fn mirror_symmetry() {
        let p = GameParams::default();
        for (x, y) in [(0.4, 1.1), (1.3, -0.7), (0.2, -1.8), (1.7, 0.3)] {
            let a = synthesize(ReducedState::new(x, y), &p).unwrap();
            let b = synthesize(ReducedState::new(-x, y), &p).unwrap();
            assert_abs_diff_eq!(a.tau, b.tau, epsilon = 1e-12);
            assert_abs_diff_eq!(crate::game::angle_diff(a.s, -b.s), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn outside_disk_rejected() {
        let p = GameParams::default();
        assert!(matches!(
            synthesize(ReducedState::new(1.5, 1.5), &p),
            Err(GameError::OutsideDisk { .. })
        ));
    }

    #[test]
    fn round_trip_primary_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (rho_v, rho_l) in [(0.6, 2.0), (0.0, 4.0), (0.3, 8.0), (0.85, 3.0)] {
            let p = GameParams::from_ratios(rho_v, rho_l).unwrap();
            let a = p.usable_half_width();
            let mut checked = 0;
            while checked < 200 {
                let s =
                    rng.gen_range(-a + 1e-3..a - 1e-3) + if rng.gen::<bool>() { PI } else { 0.0 };
                let curve = FieldCurve::new(s, &p).unwrap();
                let end = curve.horizon();
                let tau = rng.gen_range(0.0..end);
                if (end - tau) < 1e-3 {
                    continue;
                }
                if let Some(ts) = curve.schedule.tau_s() {
                    if (tau - ts).abs() < 1e-3 {
                        continue;
                    }
                }
                let z = curve.point(tau);
                let r = synthesize(z, &p).unwrap();
                assert!(
                    crate::game::angle_diff(r.s, s).abs() < 1e-6 && (r.tau - tau).abs() < 1e-6,
                    "rho_v={rho_v} s={s} tau={tau}: got s={} tau={}",
                    r.s,
                    r.tau
                );
                assert_eq!(r.phase, curve.phase_at(tau));
                checked += 1;
            }
        }
    }

    #[test]
    fn covers_random_disk_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (rho_v, rho_l) in [(0.6, 2.0), (0.0, 2.0), (0.8, 8.0), (0.2, 1.2)] {
            let p = GameParams::from_ratios(rho_v, rho_l).unwrap();
            for _ in 0..500 {
                let r = p.r_d() * rng.gen::<f64>().sqrt();
                let th = rng.gen_range(0.0..TAU);
                let xr = ReducedState::new(r * th.sin(), r * th.cos());
                let res = synthesize(xr, &p).unwrap();
                assert!(res.tau >= 0.0);
                let back = FieldCurve::new(res.s, &p).unwrap().point(res.tau);
                assert!(back.distance(&xr) < 1e-7, "{xr:?} -> {res:?}");
            }
        }
    }

    #[test]
    fn controls_match_costate_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = GameParams::default();
        for _ in 0..300 {
            let r = 2.0 * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..TAU);
            let xr = ReducedState::new(r * th.sin(), r * th.cos());
            let res = synthesize(xr, &p).unwrap();
            let curve = FieldCurve::new(res.s, &p).unwrap();
            if let Ok((u, v)) = optimal_controls(xr, curve.costate(res.tau), &p) {
                if curve
                    .schedule
                    .tau_s()
                    .is_none_or(|ts| (res.tau - ts).abs() > 1e-6)
                {
                    assert_eq!(u, res.evader);
                }
                assert_abs_diff_eq!(
                    crate::game::angle_diff(v.v2, res.pursuer.v2),
                    0.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn dispersal_branches_agree() {
        let p = GameParams::default();
        for x in [-1.9, -1.0, -0.2, 0.3, 1.2, 1.99] {
            let xr = ReducedState::new(x, 0.0);
            let up = synthesize_branch(xr, Side::Upper, &p).unwrap();
            let lo = synthesize_branch(xr, Side::Lower, &p).unwrap();
            assert_eq!(up.branch, Branch::DispersalUpper);
            assert_eq!(lo.branch, Branch::DispersalLower);
            assert_abs_diff_eq!(up.tau, lo.tau, epsilon = 1e-12);
            for r in [up, lo] {
                let z = FieldCurve::new(r.s, &p).unwrap().point(r.tau);
                assert!(z.distance(&xr) < 1e-9);
            }
            assert_eq!(synthesize(xr, &p).unwrap().branch, Branch::DispersalUpper);
        }
    }

    #[test]
    fn centre_and_y_axis() {
        let p = GameParams::default();
        let r = synthesize(ReducedState::new(0.0, 0.0), &p).unwrap();
        assert_abs_diff_eq!(r.s, PI);
        assert_abs_diff_eq!(r.tau, 5.0, epsilon = 1e-12);
        let r = synthesize(ReducedState::new(0.0, -1.0), &p).unwrap();
        assert_abs_diff_eq!(r.s, PI);
        assert_abs_diff_eq!(r.tau, 2.5, epsilon = 1e-12);
        let z = primary_point(0.0, 2.0, &p).unwrap();
        assert_abs_diff_eq!(value(z, &p).unwrap(), 2.0, epsilon = 1e-12);
    }

    /// Worst-case escape time of a pure straight flight along the body
    /// axis, found by bisection on `|z + t V_r ŷ| - (r_d + t V_d)`.
    fn straight_flight_time(x: f64, y: f64, p: &GameParams) -> f64 {
        let gap = |t: f64| x.hypot(y.abs() + t * p.v_r_max()) - (p.r_d() + t * p.v_d_max());
        let (mut lo, mut hi) = (0.0, 1.0);
        while gap(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    #[test]
    fn kinematic_value_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (rho_v, rho_l) in [(0.6, 2.0), (0.2, 6.0), (0.8, 4.0)] {
            let p = GameParams::from_ratios(rho_v, rho_l).unwrap();
            let rd = p.r_d();
            for _ in 0..500 {
                let r = rd * rng.gen::<f64>().sqrt();
                let th = rng.gen_range(0.0..TAU);
                let xr = ReducedState::new(r * th.sin(), r * th.cos());
                let res = synthesize(xr, &p).unwrap();
                let gap = rd - r;
                assert!(res.tau >= gap / (p.v_r_max() + p.v_d_max()) - 1e-12);
                // Straight flight is admissible, so the value cannot exceed it;
                // on the primary family it is the optimal play.
                let flight = straight_flight_time(xr.x, xr.y, &p);
                assert!(res.tau <= flight + 1e-9, "{xr:?}: {} > {flight}", res.tau);
                if res.phase == TrajectoryPhase::Primary {
                    assert_abs_diff_eq!(res.tau, flight, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn feedback_maps_heading_to_world() {
        let p = GameParams::new(1.0, 0.0, 1.0, 2.0).unwrap();
        let rs = RealisticState::new(0.0, 1.0, 0.0, 0.0, FRAC_PI_2);
        let (u, v) = feedback(&rs, &p).unwrap();
        assert_eq!((u.u1, u.u2), (-1.0, -1.0));
        assert_eq!(v.v_p, 0.0);
    }
}
