//! Closed-loop simulation in the world frame.
//!
//! Both players are sampled once per step (zero-order hold) and the world
//! dynamics are advanced with RK4. The optimal decision for the current
//! state is computed once per step and handed to both strategies, so that
//! optimal and perturbed strategies can share it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{
    realistic_rhs, to_reduced, EvaderControls, GameParams, PursuerWorldControls, RealisticState,
    ReducedState,
};
use crate::inverse::{synthesize, synthesize_branch, Branch, Side, SynthesisResult};
use crate::synthesis::{TrajectoryPhase, Wheel};
use crate::terminal::EscapeDirection;

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 1e-3;
/// Half-width of the band around the x-axis in which a dispersal branch,
/// once chosen, is kept.
pub const DISPERSAL_BAND: f64 = 1e-6;
/// Escape times are localized to this accuracy (s).
const ESCAPE_TOL: f64 = 1e-9;
/// Rotation time below which the evader is taken to be on the switch.
const SWITCH_EPS: f64 = 1e-9;

/// Optimal play at the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub synthesis: SynthesisResult,
    pub evader: EvaderControls,
    pub pursuer: PursuerWorldControls,
    /// Time left before the optimal evader switches wheels, if it will.
    pub time_to_switch: Option<f64>,
}

/// Everything a strategy may look at.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub t: f64,
    pub state: RealisticState,
    pub reduced: ReducedState,
    pub params: &'a GameParams,
    pub optimal: &'a Decision,
}

pub trait EvaderStrategy: Sync {
    fn controls(&self, ctx: &StepContext<'_>) -> EvaderControls;
}

pub trait PursuerStrategy: Sync {
    fn controls(&self, ctx: &StepContext<'_>) -> PursuerWorldControls;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OptimalEvader;

impl EvaderStrategy for OptimalEvader {
    fn controls(&self, ctx: &StepContext<'_>) -> EvaderControls {
        ctx.optimal.evader
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OptimalPursuer;

impl PursuerStrategy for OptimalPursuer {
    fn controls(&self, ctx: &StepContext<'_>) -> PursuerWorldControls {
        ctx.optimal.pursuer
    }
}

/// Full speed along a fixed world heading.
#[derive(Debug, Clone, Copy)]
pub struct FixedHeadingPursuer {
    pub psi_p: f64,
}

impl PursuerStrategy for FixedHeadingPursuer {
    fn controls(&self, ctx: &StepContext<'_>) -> PursuerWorldControls {
        PursuerWorldControls::new(ctx.params.v_d_max(), self.psi_p)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StationaryPursuer;

impl PursuerStrategy for StationaryPursuer {
    fn controls(&self, _ctx: &StepContext<'_>) -> PursuerWorldControls {
        PursuerWorldControls::stationary()
    }
}

/// A bounded deviation applied on top of a base strategy. Magnitudes are
/// fractions of the relevant control bound (angles: fractions of π/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// Evader: multiply both wheels by `1 - m`. Pursuer: speed by `1 - m`.
    Slow(f64),
    /// Evader: scale only the left (`u1`) or right wheel by `1 - m`.
    WheelScale { wheel: Wheel, m: f64 },
    /// Evader: add `±m V_r` to the turn rate (`u1 -= m V_r, u2 += m V_r`).
    TurnBias(f64),
    /// Evader: add `m V_r` to both wheels.
    ForwardBias(f64),
    /// Pursuer: rotate the heading by `m π/2`.
    HeadingOffset(f64),
    /// Sinusoidal deviation with amplitude `m` and period `period`
    /// (evader: opposite-phase wheel noise; pursuer: heading wobble).
    Wobble { m: f64, period: f64 },
}

/// Base strategy with a perturbation; controls are clamped to the bounds.
#[derive(Debug, Clone, Copy)]
pub struct Perturbed<S> {
    pub base: S,
    pub perturbation: Perturbation,
}

impl<S: EvaderStrategy> EvaderStrategy for Perturbed<S> {
    fn controls(&self, ctx: &StepContext<'_>) -> EvaderControls {
        let u = self.base.controls(ctx);
        let vr = ctx.params.v_r_max();
        let out = match self.perturbation {
            Perturbation::Slow(m) => EvaderControls::new(u.u1 * (1.0 - m), u.u2 * (1.0 - m)),
            Perturbation::WheelScale {
                wheel: Wheel::U1,
                m,
            } => EvaderControls::new(u.u1 * (1.0 - m), u.u2),
            Perturbation::WheelScale {
                wheel: Wheel::U2,
                m,
            } => EvaderControls::new(u.u1, u.u2 * (1.0 - m)),
            Perturbation::TurnBias(m) => EvaderControls::new(u.u1 - m * vr, u.u2 + m * vr),
            Perturbation::ForwardBias(m) => EvaderControls::new(u.u1 + m * vr, u.u2 + m * vr),
            Perturbation::Wobble { m, period } => {
                let d = m * vr * (2.0 * PI * ctx.t / period).sin();
                EvaderControls::new(u.u1 + d, u.u2 - d)
            }
            Perturbation::HeadingOffset(_) => u,
        };
        out.clamped(ctx.params)
    }
}

impl<S: PursuerStrategy> PursuerStrategy for Perturbed<S> {
    fn controls(&self, ctx: &StepContext<'_>) -> PursuerWorldControls {
        let v = self.base.controls(ctx);
        let out = match self.perturbation {
            Perturbation::Slow(m) => PursuerWorldControls::new(v.v_p * (1.0 - m), v.psi_p),
            Perturbation::HeadingOffset(m) => {
                PursuerWorldControls::new(v.v_p, v.psi_p + m * 0.5 * PI)
            }
            Perturbation::Wobble { m, period } => PursuerWorldControls::new(
                v.v_p,
                v.psi_p + m * 0.5 * PI * (2.0 * PI * ctx.t / period).sin(),
            ),
            _ => v,
        };
        out.clamped(ctx.params)
    }
}

/// Eight 20% deviations of the evader's optimal play.
pub fn evader_perturbations() -> Vec<Perturbation> {
    vec![
        Perturbation::Slow(0.2),
        Perturbation::WheelScale {
            wheel: Wheel::U1,
            m: 0.2,
        },
        Perturbation::WheelScale {
            wheel: Wheel::U2,
            m: 0.2,
        },
        Perturbation::TurnBias(0.2),
        Perturbation::TurnBias(-0.2),
        Perturbation::ForwardBias(0.2),
        Perturbation::ForwardBias(-0.2),
        Perturbation::Wobble {
            m: 0.2,
            period: 0.5,
        },
    ]
}

/// Eight 20% deviations of the pursuer's optimal play.
pub fn pursuer_perturbations() -> Vec<Perturbation> {
    vec![
        Perturbation::Slow(0.2),
        Perturbation::Slow(0.1),
        Perturbation::HeadingOffset(0.2),
        Perturbation::HeadingOffset(-0.2),
        Perturbation::HeadingOffset(0.1),
        Perturbation::HeadingOffset(-0.1),
        Perturbation::Wobble {
            m: 0.2,
            period: 0.5,
        },
        Perturbation::Wobble {
            m: 0.2,
            period: 2.0,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSample {
    pub t: f64,
    pub state: RealisticState,
    pub reduced: ReducedState,
    /// Controls held over the step that starts here (the last ones applied,
    /// for the final sample).
    pub evader: EvaderControls,
    pub pursuer: PursuerWorldControls,
    pub phase: TrajectoryPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// An evader wheel command changed sign.
    Switch {
        wheel: Wheel,
        from: f64,
        to: f64,
    },
    /// A dispersal branch was committed to.
    DispersalChoice {
        branch: Branch,
    },
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<SimSample>,
    pub events: Vec<Event>,
    /// `None` when `t_max` was reached first.
    pub escape_time: Option<f64>,
}

impl Trajectory {
    pub fn switches(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Switch { .. }))
    }

    /// Phase labels with consecutive duplicates removed.
    pub fn phase_sequence(&self) -> Vec<TrajectoryPhase> {
        let mut out: Vec<TrajectoryPhase> = Vec::new();
        for smp in &self.samples {
            if out.last() != Some(&smp.phase) {
                out.push(smp.phase);
            }
        }
        out
    }

    pub fn final_sample(&self) -> &SimSample {
        self.samples
            .last()
            .expect("a trajectory has at least one sample")
    }
}

fn rk4(y: &[f64; 5], h: f64, u: EvaderControls, v: PursuerWorldControls, b: f64) -> [f64; 5] {
    let k1 = realistic_rhs(y[4], u, v, b);
    let k2 = realistic_rhs(y[4] + 0.5 * h * k1[4], u, v, b);
    let k3 = realistic_rhs(y[4] + 0.5 * h * k2[4], u, v, b);
    let k4 = realistic_rhs(y[4] + h * k3[4], u, v, b);
    let mut out = *y;
    for i in 0..5 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn reduced_radius(y: &[f64; 5]) -> f64 {
    // The transform is a rotation, so the radius is the world distance.
    (y[0] - y[2]).hypot(y[1] - y[3])
}

/// Optimal decision with the dispersal latch applied.
fn decide(
    rs: &RealisticState,
    p: &GameParams,
    latched: &mut bool,
    events: &mut Vec<Event>,
    t: f64,
) -> Result<Decision> {
    let z = to_reduced(rs);
    let in_band = z.y.abs() <= DISPERSAL_BAND;
    let synthesis = if in_band {
        let centre = z.x.abs() <= DISPERSAL_BAND;
        let r = if centre {
            synthesize(ReducedState::new(0.0, 0.0), p)?
        } else {
            // Play the upper family as if the state sat on the axis.
            let mut r = synthesize_branch(ReducedState::new(z.x, 0.0), Side::Upper, p)?;
            r.branch = Branch::DispersalUpper;
            r
        };
        if !*latched {
            *latched = true;
            events.push(Event {
                t,
                kind: EventKind::DispersalChoice { branch: r.branch },
            });
        }
        r
    } else {
        *latched = false;
        synthesize(z, p)?
    };
    let mut evader = synthesis.evader;
    let mut time_to_switch = None;
    if synthesis.phase == TrajectoryPhase::Rotation {
        if let Some(tau_s) = synthesis.tau_s(p) {
            let rem = synthesis.tau - tau_s;
            if rem > SWITCH_EPS {
                time_to_switch = Some(rem);
            } else if let Some(dir) = EscapeDirection::for_angle(synthesis.s) {
                // Sitting on the Transition Surface: translate from here on.
                evader = EvaderControls::translate(dir.sign(), p);
            }
        }
    }
    Ok(Decision {
        synthesis,
        evader,
        pursuer: synthesis.pursuer.to_world(rs.theta_e),
        time_to_switch,
    })
}

/// Closed-loop RK4 simulation until escape or `t_max`.
pub fn simulate(
    initial: &RealisticState,
    evader: &dyn EvaderStrategy,
    pursuer: &dyn PursuerStrategy,
    p: &GameParams,
    dt: f64,
    t_max: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_max > 0.0) {
        return Err(GameError::InvalidArgument(
            "dt and t_max must be positive".into(),
        ));
    }
    let z0 = to_reduced(initial);
    if !(z0.radius() < p.r_d()) {
        return Err(GameError::OutsideDisk {
            radius: z0.radius(),
            r_d: p.r_d(),
        });
    }

    let mut samples = Vec::with_capacity((t_max / dt).min(1e7) as usize + 2);
    let mut events = Vec::new();
    let mut latched = false;
    let mut y = initial.to_array();
    let mut t = 0.0;
    let mut last_u: Option<EvaderControls> = None;

    while t_max - t > 1e-12 {
        let rs = RealisticState::from_array(y);
        let decision = decide(&rs, p, &mut latched, &mut events, t)?;
        let ctx = StepContext {
            t,
            state: rs,
            reduced: to_reduced(&rs),
            params: p,
            optimal: &decision,
        };
        let u = evader.controls(&ctx).clamped(p);
        let v = pursuer.controls(&ctx).clamped(p);
        if let Some(prev) = last_u {
            for (wheel, a, b) in [(Wheel::U1, prev.u1, u.u1), (Wheel::U2, prev.u2, u.u2)] {
                if a * b < 0.0 {
                    events.push(Event {
                        t,
                        kind: EventKind::Switch {
                            wheel,
                            from: a,
                            to: b,
                        },
                    });
                }
            }
        }
        last_u = Some(u);
        samples.push(SimSample {
            t,
            state: rs,
            reduced: ctx.reduced,
            evader: u,
            pursuer: v,
            phase: decision.synthesis.phase,
        });

        // Steps end exactly on optimal wheel switches so the hold does not
        // overshoot the Transition Surface.
        let mut h = dt.min(t_max - t);
        if let Some(rem) = decision.time_to_switch {
            h = h.min(rem);
        }
        let next = rk4(&y, h, u, v, p.b());
        if reduced_radius(&next) > p.r_d() {
            // Localize the crossing inside the step.
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > ESCAPE_TOL {
                let mid = 0.5 * (lo + hi);
                if reduced_radius(&rk4(&y, mid, u, v, p.b())) > p.r_d() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let y_esc = rk4(&y, hi, u, v, p.b());
            let t_esc = t + hi;
            let rs = RealisticState::from_array(y_esc);
            samples.push(SimSample {
                t: t_esc,
                state: rs,
                reduced: to_reduced(&rs),
                evader: u,
                pursuer: v,
                phase: decision.synthesis.phase,
            });
            events.push(Event {
                t: t_esc,
                kind: EventKind::Escape,
            });
            return Ok(Trajectory {
                samples,
                events,
                escape_time: Some(t_esc),
            });
        }
        y = next;
        t += h;
    }
    let rs = RealisticState::from_array(y);
    let last = *samples.last().expect("at least one step");
    samples.push(SimSample {
        t: t.min(t_max),
        state: rs,
        reduced: to_reduced(&rs),
        ..last
    });
    Ok(Trajectory {
        samples,
        events,
        escape_time: None,
    })
}

/// Escape time under optimal play by both players.
pub fn escape_time(initial: &RealisticState, p: &GameParams, dt: f64) -> Result<Option<f64>> {
    let t_max = crate::inverse::value(to_reduced(initial), p)? * 2.0 + 1.0;
    Ok(simulate(initial, &OptimalEvader, &OptimalPursuer, p, dt, t_max)?.escape_time)
}

/// Runs independent simulations in parallel; results keep the input order.
pub fn simulate_batch<F>(starts: &[RealisticState], run: F) -> Vec<Result<Trajectory>>
where
    F: Fn(&RealisticState) -> Result<Trajectory> + Sync + Send,
{
    starts.par_iter().map(run).collect()
}
