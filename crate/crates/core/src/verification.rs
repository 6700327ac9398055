//! Independent checks of the closed-form solution: RK4 retro-integration of
//! state and costate under the sign law, pointwise saddle checks of the
//! Hamiltonian, and the barrier probe at the boundary of the usable part.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{reduced_rhs, EvaderControls, GameParams, PursuerControls, ReducedState};
use crate::inverse::synthesize;
use crate::synthesis::{
    costate_scale, hamiltonian, switching_functions, trajectory, Costate, FieldCurve,
};
use crate::terminal::{bup_angles, terminal_controls, EscapeDirection};

/// Switching functions inside this band keep the current evader control.
const HOLD_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericSample {
    pub tau: f64,
    pub state: ReducedState,
    pub costate: Costate,
    pub evader: EvaderControls,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericPath {
    pub s: f64,
    pub samples: Vec<NumericSample>,
    /// Retro-times of evader control switches.
    pub switches: Vec<f64>,
    /// Retro-time at which the path met the x-axis, if it stopped there.
    pub axis_tau: Option<f64>,
    /// Retro-time at which no saturated evader control satisfies the sign
    /// law (a singular arc); integration stops there.
    pub singular_at: Option<f64>,
}

/// More switches than this in one path is treated as chattering.
const MAX_SWITCHES: usize = 64;

type Y = [f64; 4];

fn state_of(y: &Y) -> (ReducedState, Costate) {
    (ReducedState::new(y[0], y[1]), Costate::new(y[2], y[3]))
}

/// Retro-time derivative of state and costate with the evader control held
/// and the pursuer heading taken from the running costate.
fn retro_rhs(y: &Y, u: EvaderControls, p: &GameParams) -> Y {
    let (z, c) = state_of(y);
    let v = PursuerControls::new(p.v_d_max(), c.lambda_x.atan2(c.lambda_y));
    let (fx, fy) = reduced_rhs(z, u, v, p.b());
    let w = u.turn_rate(p.b());
    [-fx, -fy, -w * c.lambda_y, w * c.lambda_x]
}

fn rk4(y: &Y, h: f64, u: EvaderControls, p: &GameParams) -> Y {
    let add = |a: &Y, k: &Y, f: f64| {
        [
            a[0] + f * k[0],
            a[1] + f * k[1],
            a[2] + f * k[2],
            a[3] + f * k[3],
        ]
    };
    let k1 = retro_rhs(y, u, p);
    let k2 = retro_rhs(&add(y, &k1, 0.5 * h), u, p);
    let k3 = retro_rhs(&add(y, &k2, 0.5 * h), u, p);
    let k4 = retro_rhs(&add(y, &k3, h), u, p);
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Smallest `h' ∈ (0, h]` where `f(h')` turns negative, with `f(h) < 0`.
fn first_crossing(h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Wheel `i` (0 or 1) consistency of the held control with the sign law:
/// positive while `u_i = -sgn(A_i) V_r` holds.
fn consistency(y: &Y, u: EvaderControls, i: usize, p: &GameParams) -> f64 {
    let (z, c) = state_of(y);
    let a = switching_functions(z, c, p);
    let (ai, ui) = if i == 0 { (a.0, u.u1) } else { (a.1, u.u2) };
    -ai * ui.signum()
}

/// RK4 retro-integration of state and costate from the target circle with
/// evader controls chosen by the sign law. Switches are located by bisection
/// inside the step. With `stop_at_axis`, integration ends where the path
/// meets the x-axis.
pub fn integrate_from(
    s: f64,
    initial: EvaderControls,
    tau_total: f64,
    p: &GameParams,
    dt: f64,
    stop_at_axis: bool,
) -> Result<NumericPath> {
    if !(dt > 0.0) || !(tau_total >= 0.0) {
        return Err(GameError::InvalidArgument(
            "dt must be > 0 and tau_total >= 0".into(),
        ));
    }
    let (sn, cs) = s.sin_cos();
    let mut y: Y = [p.r_d() * sn, p.r_d() * cs, -sn, -cs];
    let mut u = initial;
    let mut tau = 0.0;
    let mut samples = vec![NumericSample {
        tau,
        state: state_of(&y).0,
        costate: state_of(&y).1,
        evader: u,
    }];
    let mut switches = Vec::new();
    let mut axis_tau = None;
    let mut singular_at = None;
    let axis_band = 1e-12 * p.r_d();

    while tau < tau_total - 1e-15 {
        let mut h = dt.min(tau_total - tau);

        // Wheels whose switching function is tied at the start of the step
        // are set by self-consistency over a trial step, not by bisection.
        let tied: Vec<usize> = (0..2)
            .filter(|&i| consistency(&y, u, i, p).abs() <= HOLD_BAND)
            .collect();
        if !tied.is_empty() {
            let mut candidates = vec![u];
            for &i in &tied {
                for k in 0..candidates.len() {
                    let mut c = candidates[k];
                    if i == 0 {
                        c.u1 = -c.u1;
                    } else {
                        c.u2 = -c.u2;
                    }
                    candidates.push(c);
                }
            }
            match candidates.into_iter().find(|&c| {
                let trial = rk4(&y, h, c, p);
                tied.iter()
                    .all(|&i| consistency(&trial, c, i, p) >= -HOLD_BAND)
            }) {
                Some(c) if c != u => {
                    u = c;
                    switches.push(tau);
                }
                Some(_) => {}
                None => {
                    singular_at = Some(tau);
                    break;
                }
            }
        }
        if switches.len() > MAX_SWITCHES {
            singular_at = Some(tau);
            break;
        }

        let mut next = rk4(&y, h, u, p);
        let mut flip: Option<usize> = None;

        for i in 0..2 {
            if !tied.contains(&i) && consistency(&next, u, i, p) < -HOLD_BAND {
                let hi = first_crossing(h, |hh| consistency(&rk4(&y, hh, u, p), u, i, p));
                if hi < h || flip.is_none() {
                    h = hi;
                    next = rk4(&y, h, u, p);
                    flip = Some(i);
                }
            }
        }

        let mut hit_axis = false;
        if stop_at_axis && y[1].abs() > axis_band && next[1] * y[1].signum() <= 0.0 {
            let sign = y[1].signum();
            let hi = first_crossing(h, |hh| rk4(&y, hh, u, p)[1] * sign);
            if hi <= h {
                if hi < h {
                    flip = None;
                }
                h = hi;
                next = rk4(&y, h, u, p);
                hit_axis = true;
            }
        }

        y = next;
        tau += h;
        if let Some(i) = flip {
            if i == 0 {
                u.u1 = -u.u1;
            } else {
                u.u2 = -u.u2;
            }
            switches.push(tau);
        }
        let (z, c) = state_of(&y);
        samples.push(NumericSample {
            tau,
            state: z,
            costate: c,
            evader: u,
        });
        if hit_axis {
            axis_tau = Some(tau);
            break;
        }
    }
    Ok(NumericPath {
        s,
        samples,
        switches,
        axis_tau,
        singular_at,
    })
}

/// Numerical retro-trajectory from a usable angle, stopping at the x-axis.
pub fn retro_integrate_numeric(
    s: f64,
    tau_total: f64,
    p: &GameParams,
    dt: f64,
) -> Result<NumericPath> {
    let (u, _) = terminal_controls(s, p)?;
    integrate_from(s, u, tau_total, p, dt, true)
}

/// Largest distance between the numerical path and the closed-form field
/// at the numerical sample times.
pub fn closed_form_deviation(path: &NumericPath, p: &GameParams) -> Result<f64> {
    let curve = FieldCurve::new(path.s, p)?;
    Ok(path
        .samples
        .iter()
        .map(|smp| curve.point(smp.tau).distance(&smp.state))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    /// Optimal Hamiltonian value.
    pub h_star: f64,
    /// Smallest `H(u, v*)` over evader deviations.
    pub min_evader: f64,
    /// Largest `H(u*, v)` over pursuer deviations.
    pub max_pursuer: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Grid check that `(u, v)` is a saddle point of `H(x, c, ., .)` with value
/// zero: no evader deviation lowers `H` below `-tol` and no pursuer deviation
/// raises it above `tol`. `n_dirs` samples per control component.
pub fn saddle_check_with(
    xr: ReducedState,
    c: Costate,
    u: EvaderControls,
    v: PursuerControls,
    p: &GameParams,
    n_dirs: usize,
    tol: f64,
) -> SaddleReport {
    let n = n_dirs.max(2);
    let h_star = hamiltonian(xr, c, u, v, p);
    let vr = p.v_r_max();
    let lin = |k: usize| -1.0 + 2.0 * k as f64 / (n - 1) as f64;
    let mut min_evader = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let du = EvaderControls::new(vr * lin(i), vr * lin(j));
            min_evader = min_evader.min(hamiltonian(xr, c, du, v, p));
        }
    }
    let mut max_pursuer = f64::NEG_INFINITY;
    for i in 0..n {
        let v1 = p.v_d_max() * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let dv = PursuerControls::new(v1, j as f64 * TAU / n as f64);
            max_pursuer = max_pursuer.max(hamiltonian(xr, c, u, dv, p));
        }
    }
    let passed = h_star.abs() <= tol && min_evader >= -tol && max_pursuer <= tol;
    SaddleReport {
        h_star,
        min_evader,
        max_pursuer,
        tolerance: tol,
        passed,
    }
}

/// Saddle check at a reduced state using its synthesized costate and controls.
pub fn local_saddle_check(xr: ReducedState, p: &GameParams, n_dirs: usize) -> Result<SaddleReport> {
    let r = synthesize(xr, p)?;
    let curve = FieldCurve::new(r.s, p)?;
    let c = curve.costate(r.tau).scaled(costate_scale(r.s, p));
    Ok(saddle_check_with(
        xr, c, r.evader, r.pursuer, p, n_dirs, 1e-9,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierEntry {
    pub s: f64,
    /// `d(x^2 + y^2)/d tau` after the first step.
    pub initial_rate: f64,
    /// Number of steps until the path is strictly outside the disk.
    pub exit_step: Option<usize>,
    /// Set when the sign law admits no saturated control at the start.
    pub singular_at: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierReport {
    pub rho_v: f64,
    pub rho_l: f64,
    pub entries: Vec<BarrierEntry>,
    pub passed: bool,
}

/// Retro-integrates from each BUP angle with the sign law and checks that the
/// path leaves the disk within ten steps.
pub fn barrier_probe(p: &GameParams, dt: f64) -> Result<BarrierReport> {
    const STEPS: usize = 10;
    let mut entries = Vec::new();
    for (k, s) in bup_angles(p).into_iter().enumerate() {
        // BUP angles a and 2π - a close the backward arc, π ± a the forward one.
        let dir = if k == 0 || k == 3 {
            EscapeDirection::Backward
        } else {
            EscapeDirection::Forward
        };
        let u0 = EvaderControls::translate(dir.sign(), p);
        let path = integrate_from(s, u0, STEPS as f64 * dt, p, dt, false)?;
        let rd2 = p.r_d() * p.r_d();
        let r2 = |i: usize| {
            let z = path.samples[i].state;
            z.x * z.x + z.y * z.y
        };
        if path.samples.len() < 2 {
            entries.push(BarrierEntry {
                s,
                initial_rate: 0.0,
                exit_step: None,
                singular_at: path.singular_at,
                passed: false,
            });
            continue;
        }
        // Rate from the first step, via the derivative at that sample.
        let smp = path.samples[1];
        let y = [
            smp.state.x,
            smp.state.y,
            smp.costate.lambda_x,
            smp.costate.lambda_y,
        ];
        let d = retro_rhs(&y, smp.evader, p);
        let initial_rate = 2.0 * (smp.state.x * d[0] + smp.state.y * d[1]);
        // Exit means clearly outside, not a rounding-level excursion.
        let exit_step = (1..path.samples.len()).find(|&i| r2(i) > rd2 * (1.0 + 1e-12));
        entries.push(BarrierEntry {
            s,
            initial_rate,
            exit_step,
            singular_at: path.singular_at,
            passed: initial_rate > 0.0 && exit_step.is_some_and(|i| i <= STEPS),
        });
    }
    Ok(BarrierReport {
        rho_v: p.rho_v(),
        rho_l: p.rho_l(),
        passed: entries.iter().all(|e| e.passed),
        entries,
    })
}

/// Evenly spaced interior angles of both usable arcs, `n` per arc.
pub fn usable_angles(p: &GameParams, n: usize) -> Vec<f64> {
    let a = p.usable_half_width();
    let mut out = Vec::with_capacity(2 * n);
    for base in [0.0, PI] {
        for k in 0..n {
            let s = -a + (k as f64 + 0.5) * 2.0 * a / n as f64;
            out.push(crate::game::normalize_angle(base + s));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub rho_v: Vec<f64>,
    pub rho_l: Vec<f64>,
    /// Angles per usable arc.
    pub angles_per_arc: usize,
    /// Explicit angles; replaces the evenly spaced ones when non-empty.
    pub angles: Vec<f64>,
    pub tau_max: f64,
    pub numeric_dt: f64,
    pub sample_dt: f64,
    /// Bound on closed-form vs numeric position deviation.
    pub position_tol: f64,
    /// Bound on `|H|` along synthesized trajectories.
    pub hamiltonian_tol: f64,
    pub saddle_dirs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            rho_v: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            rho_l: vec![2.0, 4.0, 6.0, 8.0],
            angles_per_arc: 16,
            angles: Vec::new(),
            tau_max: 5.0,
            numeric_dt: 1e-4,
            sample_dt: 1e-3,
            position_tol: 1e-6,
            hamiltonian_tol: 1e-9,
            saddle_dirs: 9,
        }
    }
}

impl SweepSpec {
    /// A single parameter pair and angle.
    pub fn single(rho_v: f64, rho_l: f64, s: f64) -> Self {
        SweepSpec {
            rho_v: vec![rho_v],
            rho_l: vec![rho_l],
            angles: vec![s],
            ..SweepSpec::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryCheck {
    pub rho_v: f64,
    pub rho_l: f64,
    pub s: f64,
    pub max_deviation: f64,
    pub max_abs_hamiltonian: f64,
    /// Sign-law agreement of the closed-form controls at every sample.
    pub controls_consistent: bool,
    pub saddle: SaddleReport,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: SweepSpec,
    pub trajectories: Vec<TrajectoryCheck>,
    pub barriers: Vec<BarrierReport>,
    pub max_deviation: f64,
    pub max_abs_hamiltonian: f64,
    pub failures: usize,
    pub passed: bool,
}

fn check_trajectory(spec: &SweepSpec, p: &GameParams, s: f64) -> Result<TrajectoryCheck> {
    let curve = FieldCurve::new(s, p)?;
    let horizon = spec.tau_max.min(curve.axis_time());
    let numeric = retro_integrate_numeric(s, horizon, p, spec.numeric_dt)?;
    let max_deviation = closed_form_deviation(&numeric, p)?;

    let path = trajectory(s, horizon, p, spec.sample_dt)?;
    let max_abs_hamiltonian = path
        .hamiltonian_residuals(p)
        .map(f64::abs)
        .fold(0.0, f64::max);
    let ts = path.schedule.tau_s();
    let controls_consistent = path.samples.iter().all(|smp| {
        let (a1, a2) = switching_functions(smp.state, smp.costate, p);
        let near_switch = ts.is_some_and(|t| (smp.tau - t).abs() < 1e-9);
        near_switch
            || ((a1.abs() <= HOLD_BAND || -a1.signum() == smp.evader.u1.signum())
                && (a2.abs() <= HOLD_BAND || -a2.signum() == smp.evader.u2.signum()))
    });

    // Saddle check halfway along the trajectory, with the scaled costate.
    let mid = path.samples[path.samples.len() / 2];
    let saddle = saddle_check_with(
        mid.state,
        mid.costate.scaled(path.costate_scale),
        mid.evader,
        mid.pursuer,
        p,
        spec.saddle_dirs,
        spec.hamiltonian_tol,
    );

    let passed = max_deviation < spec.position_tol
        && max_abs_hamiltonian < spec.hamiltonian_tol
        && controls_consistent
        && saddle.passed;
    Ok(TrajectoryCheck {
        rho_v: p.rho_v(),
        rho_l: p.rho_l(),
        s,
        max_deviation,
        max_abs_hamiltonian,
        controls_consistent,
        saddle,
        passed,
    })
}

/// Runs all checks over the sweep in parallel. The report order is fixed.
pub fn run_sweep(spec: &SweepSpec) -> Result<VerificationReport> {
    let mut params = Vec::new();
    for &rv in &spec.rho_v {
        for &rl in &spec.rho_l {
            params.push(GameParams::from_ratios(rv, rl)?);
        }
    }
    let jobs: Vec<(GameParams, f64)> = params
        .iter()
        .flat_map(|p| {
            let angles = if spec.angles.is_empty() {
                usable_angles(p, spec.angles_per_arc)
            } else {
                spec.angles.clone()
            };
            angles.into_iter().map(move |s| (*p, s))
        })
        .collect();
    let trajectories = jobs
        .par_iter()
        .map(|(p, s)| check_trajectory(spec, p, *s))
        .collect::<Result<Vec<_>>>()?;
    let barriers = params
        .par_iter()
        .map(|p| barrier_probe(p, spec.numeric_dt))
        .collect::<Result<Vec<_>>>()?;

    let failures = trajectories.iter().filter(|t| !t.passed).count()
        + barriers.iter().filter(|b| !b.passed).count();
    Ok(VerificationReport {
        spec: spec.clone(),
        max_deviation: trajectories
            .iter()
            .map(|t| t.max_deviation)
            .fold(0.0, f64::max),
        max_abs_hamiltonian: trajectories
            .iter()
            .map(|t| t.max_abs_hamiltonian)
            .fold(0.0, f64::max),
        trajectories,
        barriers,
        failures,
        passed: failures == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::primary_point;
    use approx::assert_abs_diff_eq;

    #[test]
    fn numeric_matches_primary_before_switch() {
        let p = GameParams::default();
        let path = retro_integrate_numeric(0.3, 3.2, &p, 1e-4).unwrap();
        assert!(path.switches.is_empty());
        let last = path.samples.last().unwrap();
        let z = primary_point(0.3, last.tau, &p).unwrap();
        assert!(z.distance(&last.state) < 1e-8);
        assert!(closed_form_deviation(&path, &p).unwrap() < 1e-8);
    }

    #[test]
    fn numeric_straight_line_at_pi() {
        let p = GameParams::default();
        let path = retro_integrate_numeric(PI, 2.0, &p, 1e-4).unwrap();
        let last = path.samples.last().unwrap();
        assert_abs_diff_eq!(last.tau, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(last.state.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(last.state.y, -2.0 + 2.0 * 0.4, epsilon = 1e-10);
    }

    #[test]
    fn numeric_crosses_switch_and_meets_axis() {
        let p = GameParams::default();
        let path = retro_integrate_numeric(0.3, 5.0, &p, 1e-4).unwrap();
        assert_eq!(path.switches.len(), 1);
        assert_abs_diff_eq!(
            path.switches[0],
            0.3_f64.cos() / 0.3_f64.sin(),
            epsilon = 1e-9
        );
        let axis = path.axis_tau.unwrap();
        assert_abs_diff_eq!(axis, 3.8366642706, epsilon = 1e-8);
        assert!(closed_form_deviation(&path, &p).unwrap() < 1e-6);
    }

    #[test]
    fn saddle_checks() {
        let p = GameParams::default();
        let s = 0.3_f64;
        let xr = ReducedState::new(2.0 * s.sin(), 2.0 * s.cos());
        assert!(local_saddle_check(xr, &p, 11).unwrap().passed);

        let curve = FieldCurve::new(s, &p).unwrap();
        let z = curve.point(3.5);
        let rep = local_saddle_check(z, &p, 11).unwrap();
        assert!(rep.passed, "{rep:?}");

        let sample = curve.sample(3.5);
        let wrong = sample.costate.scaled(-costate_scale(s, &p));
        let rep = saddle_check_with(z, wrong, sample.evader, sample.pursuer, &p, 11, 1e-9);
        assert!(!rep.passed);
    }

    #[test]
    fn barrier_probe_exits() {
        for rho_v in [0.6, 0.9] {
            let p = GameParams::from_ratios(rho_v, 2.0).unwrap();
            let rep = barrier_probe(&p, 1e-4).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn barrier_singular_without_pursuer_speed() {
        // Both switching functions vanish at the start and no saturated
        // control satisfies the sign law, so the probe cannot leave the disk.
        let p = GameParams::from_ratios(0.0, 2.0).unwrap();
        let rep = barrier_probe(&p, 1e-4).unwrap();
        assert!(!rep.passed);
        assert!(rep.entries.iter().all(|e| e.singular_at == Some(0.0)));
    }

    #[test]
    fn single_point_sweep_passes() {
        let rep = run_sweep(&SweepSpec::single(0.6, 2.0, 0.3)).unwrap();
        assert_eq!(rep.trajectories.len(), 1);
        assert!(rep.trajectories[0].passed, "{:?}", rep.trajectories[0]);
    }

    #[test]
    fn tight_tolerance_fails() {
        let mut spec = SweepSpec::single(0.6, 2.0, 0.3);
        spec.position_tol = 1e-15;
        spec.hamiltonian_tol = 1e-18;
        let rep = run_sweep(&spec).unwrap();
        assert!(!rep.passed);
    }
}
