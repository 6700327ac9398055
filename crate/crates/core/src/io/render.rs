//! Standalone SVG figures. Output is a pure function of the inputs.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::inverse::{CellClass, PartitionMap};
use crate::simulator::Trajectory;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const LEGEND_W: f64 = 190.0;

pub fn class_color(c: CellClass) -> Option<&'static str> {
    match c {
        CellClass::OutsideDisk => None,
        CellClass::PrimaryRegion => Some("#2f6fdb"),
        CellClass::RotationRegion => Some("#e0b020"),
        CellClass::TransitionSurface => Some("#d62728"),
        CellClass::DispersalSurface => Some("#2ca02c"),
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#
    );
}

/// Polyline through points on a circle, angles clockwise from +y.
fn arc_points(cx: f64, cy: f64, r: f64, from: f64, to: f64) -> String {
    const N: usize = 64;
    (0..=N)
        .map(|k| {
            let s = from + (to - from) * k as f64 / N as f64;
            format!("{:.2},{:.2}", cx + r * s.sin(), cy - r * s.cos())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Partition figure: class cells, disk boundary with bold usable arcs, dashed
/// circle of radius `b` and a legend.
pub fn render_partition(map: &PartitionMap) -> String {
    let p = &map.params;
    let n = map.resolution;
    let scale = SIZE / (2.0 * p.r_d());
    let cell = SIZE / n as f64;
    let (cx, cy) = (MARGIN + SIZE / 2.0, MARGIN + SIZE / 2.0);
    let mut out = String::new();
    header(
        &mut out,
        SIZE + 2.0 * MARGIN + LEGEND_W,
        SIZE + 2.0 * MARGIN,
    );

    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for row in 0..n {
        let mut col = 0;
        while col < n {
            let c = map.get(row, col);
            let start = col;
            while col < n && map.get(row, col) == c {
                col += 1;
            }
            if let Some(fill) = class_color(c) {
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                    MARGIN + start as f64 * cell,
                    MARGIN + row as f64 * cell,
                    (col - start) as f64 * cell,
                    cell
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let r = p.r_d() * scale;
    let _ = writeln!(
        out,
        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let a = p.usable_half_width();
    for mid in [0.0, PI] {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="5"/>"#,
            arc_points(cx, cy, r, mid - a, mid + a)
        );
    }
    let _ = writeln!(
        out,
        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
        p.b() * scale
    );

    let lx = SIZE + 2.0 * MARGIN + 10.0;
    let items: [(&str, Option<&str>); 6] = [
        ("Primary region", class_color(CellClass::PrimaryRegion)),
        ("Rotation region", class_color(CellClass::RotationRegion)),
        (
            "Transition surface",
            class_color(CellClass::TransitionSurface),
        ),
        (
            "Dispersal surface",
            class_color(CellClass::DispersalSurface),
        ),
        ("Usable part (UP)", None),
        ("Evader radius b", None),
    ];
    for (k, (label, fill)) in items.iter().enumerate() {
        let y = MARGIN + 20.0 + 26.0 * k as f64;
        match (fill, k) {
            (Some(f), _) => {
                let _ = writeln!(
                    out,
                    r#"<rect x="{lx:.0}" y="{:.0}" width="16" height="16" fill="{f}"/>"#,
                    y - 12.0
                );
            }
            (None, 4) => {
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.0}" y1="{:.0}" x2="{:.0}" y2="{:.0}" stroke="black" stroke-width="5"/>"#,
                    y - 4.0,
                    lx + 16.0,
                    y - 4.0
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.0}" y1="{:.0}" x2="{:.0}" y2="{:.0}" stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
                    y - 4.0,
                    lx + 16.0,
                    y - 4.0
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{y:.0}" font-family="sans-serif" font-size="13">{label}</text>"#,
            lx + 24.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{lx:.0}" y="{:.0}" font-family="sans-serif" font-size="13">rho_v = {}, rho_l = {}</text>"#,
        MARGIN + 20.0 + 26.0 * 6.5,
        p.rho_v(),
        p.rho_l()
    );
    out.push_str("</svg>\n");
    out
}

/// World-frame paths of both players, with the detection disk dashed at the
/// start and solid at the end.
pub fn render_trajectory(tr: &Trajectory, r_d: f64) -> String {
    let first = tr.samples.first().map(|s| s.state);
    let last = tr.final_sample().state;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut grow = |x: f64, y: f64, pad: f64| {
        lo[0] = lo[0].min(x - pad);
        lo[1] = lo[1].min(y - pad);
        hi[0] = hi[0].max(x + pad);
        hi[1] = hi[1].max(y + pad);
    };
    for s in &tr.samples {
        grow(s.state.x_e, s.state.y_e, 0.0);
        grow(s.state.x_p, s.state.y_p, 0.0);
    }
    if let Some(f) = first {
        grow(f.x_p, f.y_p, r_d);
    }
    grow(last.x_p, last.y_p, r_d);
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let scale = SIZE / span;
    let px = |x: f64| MARGIN + (x - lo[0]) * scale;
    let py = |y: f64| MARGIN + SIZE - (y - lo[1]) * scale;

    let mut out = String::new();
    header(&mut out, SIZE + 2.0 * MARGIN, SIZE + 2.0 * MARGIN);
    let line = |pts: Vec<String>| pts.join(" ");
    let ev = line(
        tr.samples
            .iter()
            .map(|s| format!("{:.2},{:.2}", px(s.state.x_e), py(s.state.y_e)))
            .collect(),
    );
    let pu = line(
        tr.samples
            .iter()
            .map(|s| format!("{:.2},{:.2}", px(s.state.x_p), py(s.state.y_p)))
            .collect(),
    );
    if let Some(f) = first {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="gray" stroke-dasharray="6,4"/>"#,
            px(f.x_p),
            py(f.y_p),
            r_d * scale
        );
    }
    let _ = writeln!(
        out,
        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="gray"/>"#,
        px(last.x_p),
        py(last.y_p),
        r_d * scale
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{pu}" fill="none" stroke="#d62728" stroke-width="2"/>"##
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{ev}" fill="none" stroke="#2f6fdb" stroke-width="2"/>"##
    );
    if let Some(f) = first {
        let l = 0.1 * SIZE;
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2f6fdb" stroke-width="1"/>"##,
            px(f.x_e),
            py(f.y_e),
            px(f.x_e) + l * f.theta_e.cos(),
            py(f.y_e) - l * f.theta_e.sin()
        );
    }
    let label = match tr.escape_time {
        Some(t) => format!("escape at t = {t:.4} s"),
        None => format!("no escape by t = {:.4} s", last_t(tr)),
    };
    let _ = writeln!(
        out,
        r#"<text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="13">{label} (evader blue, pursuer red)</text>"#,
        MARGIN,
        MARGIN - 5.0
    );
    out.push_str("</svg>\n");
    out
}

fn last_t(tr: &Trajectory) -> f64 {
    tr.final_sample().t
}
