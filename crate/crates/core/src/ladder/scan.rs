use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{spectrum_report, Boundary, LadderParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub gamma: f64,
    pub omega_y: f64,
    /// Eigenvalues with `|E| < tol_edge`.
    pub n_edge_states: usize,
    /// Largest `|Im E|` among the remaining eigenvalues.
    pub max_bulk_im: f64,
    /// Every eigenvalue has `|Im E| < 1e-10 t`.
    pub spectral_real: bool,
}

/// Open-chain zero-mode census over `gamma_grid × omega_y_grid`, in row-major order
/// (`omega_y` outer, `gamma` inner).
pub fn phase_scan(
    t: f64,
    omega_x: f64,
    length: usize,
    gamma_grid: &[f64],
    omega_y_grid: &[f64],
    tol_edge: f64,
) -> Result<Vec<ScanPoint>> {
    let grid: Vec<(f64, f64)> = omega_y_grid
        .iter()
        .flat_map(|&oy| gamma_grid.iter().map(move |&g| (g, oy)))
        .collect();
    // validate once so that every point fails the same way
    LadderParams::new(t, 0.0, omega_x, 0.0, length, Boundary::Open)?;
    grid.par_iter()
        .map(|&(gamma, omega_y)| {
            let p = LadderParams::new(t, gamma, omega_x, omega_y, length, Boundary::Open)?;
            let spec = spectrum_report(&p)?;
            let (edge, bulk): (Vec<&crate::C64>, Vec<&crate::C64>) =
                spec.eigenvalues.iter().partition(|z| z.norm() < tol_edge);
            Ok(ScanPoint {
                gamma,
                omega_y,
                n_edge_states: edge.len(),
                max_bulk_im: bulk.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
                spectral_real: spec.max_abs_imag() < 1e-10 * t,
            })
        })
        .collect()
}

/// Γ at which zero modes switch on along a line of increasing Γ: the first point with
/// edge states, provided every earlier point has none and every later point has some.
pub fn edge_onset(line: &[ScanPoint]) -> Option<f64> {
    let first = line.iter().position(|s| s.n_edge_states > 0)?;
    line[first..]
        .iter()
        .all(|s| s.n_edge_states > 0)
        .then_some(line[first].gamma)
}
