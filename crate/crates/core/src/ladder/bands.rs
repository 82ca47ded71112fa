use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::model::LadderParams;
use crate::error::{Error, Result};
use crate::numkit::{eig_general, CMatrix, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSweep {
    /// `k_i = -π + 2πi/n_k`, per two-rung cell.
    pub k_grid: Vec<f64>,
    /// Eigenvalues per k, sorted by real part.
    pub bands: Vec<[C64; 4]>,
    /// Per band: (max - min of Re E, max - min of Im E) over the grid.
    pub flatness: [(f64, f64); 4],
}

impl BandSweep {
    pub fn max_flatness(&self) -> f64 {
        self.flatness
            .iter()
            .map(|(a, b)| a.max(*b))
            .fold(0.0, f64::max)
    }
}

/// Bloch Hamiltonian of the two-rung cell, basis `(↑0, ↓0, ↑1, ↓1)`.
pub fn bloch_hamiltonian(p: &LadderParams, k: f64) -> CMatrix {
    let t = C64::new(p.t, 0.0);
    let mut h = CMatrix::zeros(4);
    for rung in 0..2 {
        let (u, d) = (2 * rung, 2 * rung + 1);
        h[(u, u)] = C64::new(p.omega_x, 0.0);
        h[(d, d)] = C64::new(-p.omega_x, 0.0);
        h[(u, d)] = p.t_up();
        h[(d, u)] = p.t_down();
    }
    h[(0, 2)] = t;
    h[(2, 0)] = t;
    // Down bond from rung 1 to rung 0 of the next cell
    h[(3, 1)] = t * C64::from_polar(1.0, k);
    h[(1, 3)] = t * C64::from_polar(1.0, -k);
    h
}

pub fn band_sweep(p: &LadderParams, n_k: usize) -> Result<BandSweep> {
    p.validate()?;
    if n_k < 2 {
        return Err(Error::domain(format!("need at least 2 k points, got {n_k}")));
    }
    let k_grid: Vec<f64> = (0..n_k)
        .map(|i| -PI + 2.0 * PI * i as f64 / n_k as f64)
        .collect();
    let mut bands = Vec::with_capacity(n_k);
    for &k in &k_grid {
        let spec = eig_general(&bloch_hamiltonian(p, k), DEFAULT_TOL)?;
        let mut b = [C64::new(0.0, 0.0); 4];
        b.copy_from_slice(&spec.eigenvalues);
        bands.push(b);
    }
    let mut flatness = [(0.0, 0.0); 4];
    for (j, f) in flatness.iter_mut().enumerate() {
        let spread = |part: fn(&C64) -> f64| {
            let vals = bands.iter().map(|b| part(&b[j]));
            vals.clone().fold(f64::NEG_INFINITY, f64::max) - vals.fold(f64::INFINITY, f64::min)
        };
        *f = (spread(|z| z.re), spread(|z| z.im));
    }
    Ok(BandSweep {
        k_grid,
        bands,
        flatness,
    })
}
