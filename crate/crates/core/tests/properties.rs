use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use ddr_escape::game::{to_reduced, GameParams, RealisticState, ReducedState};
use ddr_escape::inverse::{synthesize, value};
use ddr_escape::io::export::fmt_sig;
use ddr_escape::io::{ScenarioConfig, StartSpec};
use ddr_escape::synthesis::FieldCurve;
use ddr_escape::terminal::classify_boundary;

fn params() -> impl Strategy<Value = GameParams> {
    (0.0..0.9_f64, 1.5..8.0_f64).prop_map(|(rv, rl)| GameParams::from_ratios(rv, rl).unwrap())
}

/// A point strictly inside the disk, away from the rim.
fn inside(p: &GameParams, r: f64, a: f64) -> ReducedState {
    let rad = 0.97 * p.r_d() * r.sqrt();
    ReducedState::new(rad * a.sin(), rad * a.cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduced_state_ignores_common_translation(
        xp in -5.0..5.0_f64, yp in -5.0..5.0_f64, xe in -5.0..5.0_f64, ye in -5.0..5.0_f64,
        th in -PI..PI, dx in -10.0..10.0_f64, dy in -10.0..10.0_f64,
    ) {
        let a = to_reduced(&RealisticState::new(xp, yp, xe, ye, th));
        let b = to_reduced(&RealisticState::new(xp + dx, yp + dy, xe + dx, ye + dy, th));
        prop_assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
        prop_assert!((a.radius() - (xp - xe).hypot(yp - ye)).abs() < 1e-9);
    }

    #[test]
    fn synthesis_recovers_field_coordinates(p in params(), u in 0.0..1.0_f64, v in 0.02..0.98_f64) {
        let a = p.usable_half_width();
        // A usable angle on either arc, kept off the arc ends.
        let s = if u < 0.5 { (2.0 * u - 0.5) * 1.9 * a } else { PI + (2.0 * u - 1.5) * 1.9 * a };
        prop_assume!(classify_boundary(s, &p).is_usable());
        let curve = FieldCurve::new(s, &p).unwrap();
        let tau = v * curve.horizon();
        let z = curve.point(tau);
        let r = synthesize(z, &p).unwrap();
        prop_assert!((r.tau - tau).abs() < 1e-7 * (1.0 + tau), "tau {} vs {}", r.tau, tau);
        let back = FieldCurve::new(r.s, &p).unwrap().point(r.tau);
        prop_assert!(back.distance(&z) < 1e-7 * p.r_d());
    }

    #[test]
    fn value_bounds_and_mirror(p in params(), r in 0.0..1.0_f64, ang in 0.0..2.0 * PI) {
        let z = inside(&p, r, ang);
        let v = value(z, &p).unwrap();
        let gap = p.r_d() - z.radius();
        prop_assert!(v >= gap / (p.v_r_max() + p.v_d_max()) - 1e-9);
        let m = value(ReducedState::new(-z.x, z.y), &p).unwrap();
        prop_assert!((v - m).abs() < 1e-9 * (1.0 + v));
    }

    #[test]
    fn config_round_trip(
        vr in 0.1..5.0_f64, k in 0.0..0.99_f64, b in 0.1..3.0_f64, rl in 1.01..8.0_f64,
        dt in 1e-5..1e-1_f64, t_max in 0.1..100.0_f64,
        pose in proptest::option::of((-9.0..9.0_f64, -9.0..9.0_f64, -9.0..9.0_f64, -9.0..9.0_f64, -PI..PI)),
        s in 0.0..TAU, tau in 0.0..9.0_f64,
    ) {
        let p = GameParams::new(vr, k * vr, b, rl * b).unwrap();
        let start = match pose {
            Some((xp, yp, xe, ye, th)) => StartSpec::Initial(RealisticState::new(xp, yp, xe, ye, th)),
            None => StartSpec::Synthesis { s, tau },
        };
        let cfg = ScenarioConfig { params: p, start, dt, t_max };
        let text = cfg.serialize();
        let parsed = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(parsed, cfg);
        prop_assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn nine_significant_digits(x in -1e12..1e12_f64, e in -12i32..12) {
        let v = x * 10f64.powi(e);
        let back: f64 = fmt_sig(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }
}
