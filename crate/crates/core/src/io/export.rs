use std::io::{Read, Write};

use anyhow::{bail, Context};
use serde::Deserialize;

use crate::game::RealisticState;
use crate::inverse::{CellClass, PartitionMap};
use crate::simulator::Trajectory;
use crate::synthesis::{RetroPath, TrajectoryPhase};

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "x_p", "y_p", "x_e", "y_e", "theta_e", "u1", "u2", "v_p", "psi_p", "x_red", "y_red",
    "phase",
];

/// Formats with 9 significant digits, in the shortest form that keeps them.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("float round trip");
    let a = rounded.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x_p: f64,
    pub y_p: f64,
    pub x_e: f64,
    pub y_e: f64,
    pub theta_e: f64,
    pub u1: f64,
    pub u2: f64,
    pub v_p: f64,
    pub psi_p: f64,
    pub x_red: f64,
    pub y_red: f64,
    pub phase: TrajectoryPhase,
}

impl TrajectoryRow {
    pub fn state(&self) -> RealisticState {
        RealisticState::new(self.x_p, self.y_p, self.x_e, self.y_e, self.theta_e)
    }
}

pub fn write_trajectory<W: Write>(out: W, tr: &Trajectory) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &tr.samples {
        let st = &s.state;
        let nums = [
            s.t,
            st.x_p,
            st.y_p,
            st.x_e,
            st.y_e,
            st.theta_e,
            s.evader.u1,
            s.evader.u2,
            s.pursuer.v_p,
            s.pursuer.psi_p,
            s.reduced.x,
            s.reduced.y,
        ];
        let mut rec: Vec<String> = nums.iter().map(|&x| fmt_sig(x)).collect();
        rec.push(s.phase.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> anyhow::Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRAJECTORY_HEADER {
        bail!("unexpected trajectory header: {}", header.join(","));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("trajectory row {}", i + 1)))
        .collect()
}

/// Retro-time samples of a synthesized trajectory.
pub fn write_retro_path<W: Write>(out: W, path: &RetroPath) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "tau", "x", "y", "lambda_x", "lambda_y", "u1", "u2", "v1", "v2", "phase",
    ])?;
    for s in &path.samples {
        let nums = [
            s.tau,
            s.state.x,
            s.state.y,
            s.costate.lambda_x,
            s.costate.lambda_y,
            s.evader.u1,
            s.evader.u2,
            s.pursuer.v1,
            s.pursuer.v2,
        ];
        let mut rec: Vec<String> = nums.iter().map(|&x| fmt_sig(x)).collect();
        rec.push(s.phase.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Row-major class codes, first row at max y, no header.
pub fn write_partition<W: Write>(out: W, map: &PartitionMap) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in map.cells.chunks(map.resolution) {
        w.write_record(row.iter().map(|c| c.code().to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition<R: Read>(input: R) -> anyhow::Result<Vec<Vec<CellClass>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<u8>()
                    .ok()
                    .and_then(CellClass::from_code)
                    .with_context(|| format!("row {}: bad class code `{f}`", i + 1))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
