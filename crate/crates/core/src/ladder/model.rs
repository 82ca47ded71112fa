use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{eig_general, CMatrix, Spectrum, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Up,
    Down,
}

impl Leg {
    pub fn index(self) -> usize {
        match self {
            Leg::Up => 0,
            Leg::Down => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Leg::Up => "up",
            Leg::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    /// Dimer tunneling (energy unit).
    pub t: f64,
    /// Gain/loss strength.
    pub gamma: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    /// Number of rungs.
    pub length: usize,
    pub boundary: Boundary,
}

impl LadderParams {
    pub fn new(
        t: f64,
        gamma: f64,
        omega_x: f64,
        omega_y: f64,
        length: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        let p = LadderParams {
            t,
            gamma,
            omega_x,
            omega_y,
            length,
            boundary,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.t, self.gamma, self.omega_x, self.omega_y]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::domain("ladder parameters must be finite"));
        }
        if !(self.t > 0.0) {
            return Err(Error::domain(format!("tunneling t = {} must be positive", self.t)));
        }
        if self.length < 4 {
            return Err(Error::domain(format!(
                "need at least 4 rungs, got {}",
                self.length
            )));
        }
        if self.boundary == Boundary::Periodic && !self.length.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "periodic ladder needs an even number of rungs, got {}",
                self.length
            )));
        }
        Ok(())
    }

    /// Down → Up amplitude on every rung.
    pub fn t_up(&self) -> C64 {
        C64::new(0.0, -self.gamma - self.omega_y)
    }

    /// Up → Down amplitude on every rung.
    pub fn t_down(&self) -> C64 {
        C64::new(0.0, -self.gamma + self.omega_y)
    }

    /// `Γ = -Ω_y` exactly, i.e. `t_up == 0`.
    pub fn is_flat_band_point(&self) -> bool {
        self.gamma + self.omega_y == 0.0
    }

    pub fn dim(&self) -> usize {
        2 * self.length
    }

    pub fn mode(&self, rung: usize, leg: Leg) -> usize {
        2 * rung + leg.index()
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_omega_y(mut self, omega_y: f64) -> Self {
        self.omega_y = omega_y;
        self
    }

    /// Rung bonded to `rung` along `leg`, if any.
    pub fn partner(&self, rung: usize, leg: Leg) -> Option<usize> {
        let l = self.length;
        // Up bonds pair (even, even+1); Down bonds pair (odd, odd+1)
        let forward = match leg {
            Leg::Up => rung.is_multiple_of(2),
            Leg::Down => rung % 2 == 1,
        };
        match (forward, self.boundary) {
            (true, _) if rung + 1 < l => Some(rung + 1),
            (true, Boundary::Periodic) => Some(0),
            (false, _) if rung >= 1 => Some(rung - 1),
            (false, Boundary::Periodic) => Some(l - 1),
            _ => None,
        }
    }

    pub(crate) fn require_flat_band(&self, what: &str) -> Result<()> {
        if self.is_flat_band_point() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} requires the flat-band point Γ = -Ω_y (got Γ = {}, Ω_y = {})",
                self.gamma, self.omega_y
            )))
        }
    }
}

/// Real-space Hamiltonian in the b-basis (dimension `2L`).
pub fn build_ladder_b(p: &LadderParams) -> Result<CMatrix> {
    p.validate()?;
    let mut h = CMatrix::zeros(p.dim());
    let t = C64::new(p.t, 0.0);
    for n in 0..p.length {
        let (up, down) = (p.mode(n, Leg::Up), p.mode(n, Leg::Down));
        h[(up, up)] = C64::new(p.omega_x, 0.0);
        h[(down, down)] = C64::new(-p.omega_x, 0.0);
        h[(up, down)] = p.t_up();
        h[(down, up)] = p.t_down();
        for leg in [Leg::Up, Leg::Down] {
            if let Some(m) = p.partner(n, leg) {
                h[(p.mode(n, leg), p.mode(m, leg))] = t;
            }
        }
    }
    Ok(h)
}

/// Real-space Hamiltonian in the original spin basis `a_{n,σ}`.
///
/// Spin-conserving hops `t/2` between neighbouring rungs, staggered spin-flip hops
/// `(-1)^n t/2` in both flip directions, onsite `iΓ(-n_↑ + n_↓)` and
/// `(Ω_x - iΩ_y) a†_↑ a_↓ + h.c.`. Its per-rung Hadamard transform equals
/// `build_ladder_b` with `Ω_y` negated.
pub fn build_ladder_a(p: &LadderParams) -> Result<CMatrix> {
    p.validate()?;
    let l = p.length;
    let mut h = CMatrix::zeros(p.dim());
    let half_t = p.t / 2.0;
    let bonds: Vec<usize> = match p.boundary {
        Boundary::Open => (0..l - 1).collect(),
        Boundary::Periodic => (0..l).collect(),
    };
    for &n in &bonds {
        let m = (n + 1) % l;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for s in [Leg::Up, Leg::Down] {
            let flip = match s {
                Leg::Up => Leg::Down,
                Leg::Down => Leg::Up,
            };
            let (i, j, k) = (p.mode(n, s), p.mode(m, s), p.mode(m, flip));
            h[(i, j)] += C64::new(half_t, 0.0);
            h[(j, i)] += C64::new(half_t, 0.0);
            h[(i, k)] += C64::new(sign * half_t, 0.0);
            h[(k, i)] += C64::new(sign * half_t, 0.0);
        }
    }
    for n in 0..l {
        let (up, down) = (p.mode(n, Leg::Up), p.mode(n, Leg::Down));
        h[(up, up)] += C64::new(0.0, -p.gamma);
        h[(down, down)] += C64::new(0.0, p.gamma);
        h[(up, down)] += C64::new(p.omega_x, -p.omega_y);
        h[(down, up)] += C64::new(p.omega_x, p.omega_y);
    }
    Ok(h)
}

/// Conjugation by the per-rung Hadamard `(|↑⟩ ± |↓⟩)/√2`. Involutive.
pub fn hadamard_transform(m: &CMatrix) -> Result<CMatrix> {
    let n = m.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "Hadamard transform needs an even dimension, got {n}"
        )));
    }
    let u = |a: usize, b: usize| if a == 1 && b == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Ok(CMatrix::from_fn(n, |i, j| {
        let (ri, ai) = (i / 2, i % 2);
        let (rj, bj) = (j / 2, j % 2);
        let mut s = C64::new(0.0, 0.0);
        for g in 0..2 {
            for d in 0..2 {
                s += u(ai, g) * m[(2 * ri + g, 2 * rj + d)] * u(d, bj);
            }
        }
        s
    }))
}

/// Sorted spectrum of the real-space ladder.
pub fn spectrum_report(p: &LadderParams) -> Result<Spectrum> {
    eig_general(&build_ladder_b(p)?, DEFAULT_TOL)
}
