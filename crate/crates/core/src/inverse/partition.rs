use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthesize;
use crate::error::{GameError, Result};
use crate::game::{GameParams, ReducedState};
use crate::synthesis::TrajectoryPhase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellClass {
    OutsideDisk = 0,
    PrimaryRegion = 1,
    RotationRegion = 2,
    TransitionSurface = 3,
    DispersalSurface = 4,
}

impl CellClass {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => CellClass::OutsideDisk,
            1 => CellClass::PrimaryRegion,
            2 => CellClass::RotationRegion,
            3 => CellClass::TransitionSurface,
            4 => CellClass::DispersalSurface,
            _ => return None,
        })
    }
}

/// Cell classification of `[-r_d, r_d]^2`, row-major with row 0 at max y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMap {
    pub resolution: usize,
    pub params: GameParams,
    pub cells: Vec<CellClass>,
}

impl PartitionMap {
    pub fn get(&self, row: usize, col: usize) -> CellClass {
        self.cells[row * self.resolution + col]
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.cells.iter().filter(|&&c| c == class).count()
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.params.r_d() / self.resolution as f64
    }

    /// Centre of a cell in reduced coordinates.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        cell_center(self.params.r_d(), self.resolution, row, col)
    }
}

fn cell_center(r_d: f64, n: usize, row: usize, col: usize) -> (f64, f64) {
    let h = 2.0 * r_d / n as f64;
    (-r_d + (col as f64 + 0.5) * h, r_d - (row as f64 + 0.5) * h)
}

/// Phase at a grid node, `None` outside the disk.
fn node_phase(x: f64, y: f64, p: &GameParams) -> Option<TrajectoryPhase> {
    let xr = ReducedState::new(x, y);
    if !xr.is_inside(p) {
        return None;
    }
    synthesize(xr, p).ok().map(|r| r.phase)
}

/// Classifies every cell. A cell is on the Transition Surface when its
/// in-disk corners disagree on the phase, which keeps the surface one cell
/// thick at any resolution. The Dispersal row is the one whose span contains
/// `y = 0`. The output does not depend on the thread count.
pub fn rasterize_partition(p: &GameParams, resolution: usize) -> Result<PartitionMap> {
    if resolution < 16 {
        return Err(GameError::InvalidArgument(format!(
            "partition resolution must be at least 16, got {resolution}"
        )));
    }
    let n = resolution;
    let rd = p.r_d();
    let h = 2.0 * rd / n as f64;

    let nodes: Vec<Option<TrajectoryPhase>> = (0..(n + 1) * (n + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (n + 1), k % (n + 1));
            node_phase(-rd + j as f64 * h, rd - i as f64 * h, p)
        })
        .collect();

    let cells: Vec<CellClass> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (row, col) = (k / n, k % n);
            let (x, y) = cell_center(rd, n, row, col);
            let xr = ReducedState::new(x, y);
            if !xr.is_inside(p) {
                return CellClass::OutsideDisk;
            }
            if y - 0.5 * h < 0.0 && 0.0 <= y + 0.5 * h {
                return CellClass::DispersalSurface;
            }
            let corners = [
                nodes[row * (n + 1) + col],
                nodes[row * (n + 1) + col + 1],
                nodes[(row + 1) * (n + 1) + col],
                nodes[(row + 1) * (n + 1) + col + 1],
            ];
            let mut seen = corners.iter().flatten();
            if let Some(first) = seen.next() {
                if seen.any(|ph| ph != first) {
                    return CellClass::TransitionSurface;
                }
            }
            match node_phase(x, y, p) {
                Some(TrajectoryPhase::Rotation) => CellClass::RotationRegion,
                _ => CellClass::PrimaryRegion,
            }
        })
        .collect();

    Ok(PartitionMap {
        resolution: n,
        params: *p,
        cells,
    })
}
