use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::model::{build_ladder_b, Boundary, LadderParams, Leg};
use super::orbitals::{Orbital, OrbitalLabel};
use crate::error::{Error, Result};
use crate::numkit::{
    cluster_subspace, eig_general, fit_decay, inner, CMatrix, DEFAULT_TOL,
};

/// Default `|E - E_edge|` window for selecting edge states.
pub const DEFAULT_EDGE_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeState {
    /// Rayleigh quotient `⟨ψ|H|ψ⟩`.
    pub energy: C64,
    /// Unit-norm, phase fixed so the largest component is real positive.
    pub vector: Vec<C64>,
    pub side: Side,
    /// Number of modes carrying weight `|ψ|² >= 1e-10`.
    pub support_size: usize,
    /// Decay rate per two-rung cell on the dominant `(leg, rung parity)` class.
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub window: f64,
    pub states: Vec<EdgeState>,
    /// Mean of the per-state decay rates that could be fitted.
    pub fitted_kappa: Option<f64>,
    /// `1/κ` of `fitted_kappa`, in two-rung cells.
    pub fitted_sigma: Option<f64>,
    pub predicted_sigma: Option<f64>,
}

/// `σ = 1/ln(t²/|t_up t_down|)` in two-rung cells; `None` outside the topological
/// regime, `0` at the flat-band point.
pub fn predicted_sigma(p: &LadderParams) -> Option<f64> {
    let r = (p.t_up() * p.t_down()).norm() / (p.t * p.t);
    if r == 0.0 {
        Some(0.0)
    } else if r < 1.0 {
        Some(1.0 / (1.0 / r).ln())
    } else {
        None
    }
}

/// Zero mode anchored at `(0, ↓)` from the recursion
/// `Ψ(2m+1,↑) = -(t_up/t) Ψ(2m,↓)`, `Ψ(2m+2,↓) = -(t_down/t) Ψ(2m+1,↑)`.
pub fn analytic_edge_state(p: &LadderParams, side: Side) -> Result<Orbital> {
    p.validate()?;
    if side != Side::Left {
        return Err(Error::domain("analytic edge state is only derived for the left end"));
    }
    if p.omega_x != 0.0 {
        return Err(Error::domain(format!(
            "analytic zero mode needs Ω_x = 0, got {}",
            p.omega_x
        )));
    }
    if p.boundary != Boundary::Open {
        return Err(Error::domain("analytic edge state needs an open ladder"));
    }
    if (p.t_up() * p.t_down()).norm() >= p.t * p.t {
        return Err(Error::domain(format!(
            "no edge state: |t_up t_down| = {} >= t² = {}",
            (p.t_up() * p.t_down()).norm(),
            p.t * p.t
        )));
    }
    let mut entries = vec![((0, Leg::Down), C64::new(1.0, 0.0))];
    let mut psi = C64::new(1.0, 0.0);
    let mut rung = 0;
    while rung + 1 < p.length {
        psi = -(p.t_up() / p.t) * psi;
        if psi == C64::new(0.0, 0.0) {
            break;
        }
        entries.push(((rung + 1, Leg::Up), psi));
        if rung + 2 >= p.length {
            break;
        }
        psi = -(p.t_down() / p.t) * psi;
        if psi == C64::new(0.0, 0.0) {
            break;
        }
        entries.push(((rung + 2, Leg::Down), psi));
        rung += 2;
    }
    let norm: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(Orbital {
        label: OrbitalLabel::EdgeDown,
        center: 0,
        amplitudes: entries.into_iter().map(|(m, a)| (m, a / norm)).collect(),
        energy: C64::new(0.0, 0.0),
    })
}

fn fix_phase(v: &mut [C64]) {
    let big = v
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    if big.norm() > 0.0 {
        let ph = big.conj() / big.norm();
        v.iter_mut().for_each(|z| *z *= ph);
    }
}

/// Decay rate over cells counted from the edge, using the `(leg, parity)` class with
/// the most weight and samples in the near half of the chain above the noise floor.
fn fit_kappa(p: &LadderParams, v: &[C64], side: Side) -> Option<f64> {
    let l = p.length;
    let mut best = (0.0, Leg::Up, 0);
    for leg in [Leg::Up, Leg::Down] {
        for parity in 0..2 {
            let w: f64 = (parity..l)
                .step_by(2)
                .map(|r| v[p.mode(r, leg)].norm_sqr())
                .sum();
            if w > best.0 {
                best = (w, leg, parity);
            }
        }
    }
    let (_, leg, parity) = best;
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let samples: Vec<(f64, f64)> = (parity..l)
        .step_by(2)
        .filter_map(|r| {
            let from_edge = match side {
                Side::Left => r,
                Side::Right => l - 1 - r,
            };
            let a = v[p.mode(r, leg)].norm();
            (from_edge < l / 2 && a > 1e-12 * peak).then_some(((from_edge / 2) as f64, a))
        })
        .collect();
    fit_decay(&samples).ok()
}

fn weight_right(p: &LadderParams, v: &[C64]) -> f64 {
    (p.length / 2..p.length)
        .flat_map(|r| [p.mode(r, Leg::Up), p.mode(r, Leg::Down)])
        .map(|m| v[m].norm_sqr())
        .sum()
}

/// Eigenstates of the open ladder within `e_window` of the edge energies (`0` when
/// `Ω_x = 0`, otherwise `±Ω_x`), separated into left and right localized combinations.
pub fn numeric_edge_states(p: &LadderParams, e_window: f64) -> Result<EdgeReport> {
    p.validate()?;
    if p.boundary != Boundary::Open {
        return Err(Error::domain("edge states need an open ladder"));
    }
    if !(e_window > 0.0) {
        return Err(Error::domain(format!("edge window must be positive, got {e_window}")));
    }
    let h = build_ladder_b(p)?;
    let spec = eig_general(&h, DEFAULT_TOL)?;
    let targets: Vec<f64> = if p.omega_x == 0.0 {
        vec![0.0]
    } else {
        vec![-p.omega_x.abs(), p.omega_x.abs()]
    };
    let mut states = Vec::new();
    for target in targets {
        let target = C64::new(target, 0.0);
        let k = spec
            .eigenvalues
            .iter()
            .filter(|z| (*z - target).norm() < e_window)
            .count();
        if k == 0 {
            continue;
        }
        let basis = cluster_subspace(&h, target, k)?;
        states.extend(localize(p, &h, &basis));
    }
    let kappas: Vec<f64> = states.iter().filter_map(|s| s.kappa).collect();
    let fitted_kappa = (!kappas.is_empty()).then(|| kappas.iter().sum::<f64>() / kappas.len() as f64);
    Ok(EdgeReport {
        window: e_window,
        states,
        fitted_kappa,
        fitted_sigma: fitted_kappa.map(|k| 1.0 / k),
        predicted_sigma: predicted_sigma(p),
    })
}

/// Diagonalizes the right-half weight operator `V_R^H V_R` on the subspace; its
/// eigenvectors are the maximally left (weight ≈ 0) and right (≈ 1) combinations.
fn localize(p: &LadderParams, h: &CMatrix, basis: &[Vec<C64>]) -> Vec<EdgeState> {
    let k = basis.len();
    let g = CMatrix::from_fn(k, |i, j| {
        (p.length / 2..p.length)
            .flat_map(|r| [p.mode(r, Leg::Up), p.mode(r, Leg::Down)])
            .map(|m| basis[i][m].conj() * basis[j][m])
            .sum()
    });
    let combos: Vec<Vec<C64>> = if k == 1 {
        vec![vec![C64::new(1.0, 0.0)]]
    } else {
        match eig_general(&g, DEFAULT_TOL) {
            Ok(s) => s.right_vectors,
            Err(_) => (0..k)
                .map(|i| (0..k).map(|j| C64::new((i == j) as u8 as f64, 0.0)).collect())
                .collect(),
        }
    };
    let mut out: Vec<EdgeState> = combos
        .iter()
        .map(|c| {
            let mut v = vec![C64::new(0.0, 0.0); basis[0].len()];
            for (coef, b) in c.iter().zip(basis) {
                for (x, y) in v.iter_mut().zip(b) {
                    *x += coef * y;
                }
            }
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= n);
            fix_phase(&mut v);
            let side = if weight_right(p, &v) < 0.5 { Side::Left } else { Side::Right };
            EdgeState {
                energy: inner(&v, &h.mul_vec(&v)),
                support_size: v.iter().filter(|z| z.norm_sqr() >= 1e-10).count(),
                kappa: fit_kappa(p, &v, side),
                vector: v,
                side,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.side as u8)
            .cmp(&(b.side as u8))
            .then(a.energy.re.total_cmp(&b.energy.re))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::residual;

    fn open(gamma: f64, omega_y: f64, l: usize) -> LadderParams {
        LadderParams::new(1.0, gamma, 0.0, omega_y, l, Boundary::Open).unwrap()
    }

    #[test]
    fn analytic_ratios() {
        let p = open(-0.1, 0.3, 40);
        let o = analytic_edge_state(&p, Side::Left).unwrap();
        let v = o.to_vector(&p);
        let a0 = v[p.mode(0, Leg::Down)].norm();
        assert!((v[p.mode(1, Leg::Up)].norm() / a0 - 0.2).abs() < 1e-14);
        assert!((v[p.mode(2, Leg::Down)].norm() / a0 - 0.08).abs() < 1e-14);
        // sublattice: no ↑ on even rungs, no ↓ on odd rungs
        for r in 0..40 {
            let off = if r % 2 == 0 { Leg::Up } else { Leg::Down };
            assert_eq!(v[p.mode(r, off)], C64::new(0.0, 0.0));
        }
        let h = build_ladder_b(&p).unwrap();
        assert!(residual(&h, C64::new(0.0, 0.0), &v) < 1e-12);
    }

    #[test]
    fn analytic_flat_band_limit_is_single_site() {
        let o = analytic_edge_state(&open(-0.3, 0.3, 20), Side::Left).unwrap();
        assert_eq!(o.amplitudes, vec![((0, Leg::Down), C64::new(1.0, 0.0))]);
    }

    #[test]
    fn analytic_preconditions() {
        assert!(analytic_edge_state(&open(0.0, 1.2, 20), Side::Left).is_err());
        assert!(analytic_edge_state(&open(-0.1, 0.3, 20), Side::Right).is_err());
        let p = LadderParams::new(1.0, -0.1, 0.2, 0.3, 20, Boundary::Open).unwrap();
        assert!(analytic_edge_state(&p, Side::Left).is_err());
    }

    #[test]
    fn predicted_sigma_values() {
        assert!((predicted_sigma(&open(-0.1, 0.3, 20)).unwrap() - 1.0 / 12.5f64.ln()).abs() < 1e-15);
        assert_eq!(predicted_sigma(&open(-0.3, 0.3, 20)), Some(0.0));
        assert_eq!(predicted_sigma(&open(0.0, 1.2, 20)), None);
    }

    #[test]
    fn numeric_edge_states_split_left_and_right() {
        let p = open(-0.1, 0.3, 24);
        let rep = numeric_edge_states(&p, DEFAULT_EDGE_WINDOW).unwrap();
        assert_eq!(rep.states.len(), 2);
        assert_eq!(rep.states[0].side, Side::Left);
        assert_eq!(rep.states[1].side, Side::Right);
        let ka = rep.fitted_kappa.unwrap();
        assert!((ka - 12.5f64.ln()).abs() / 12.5f64.ln() < 0.02, "{ka}");
        // left state matches the analytic mode up to phase
        let exact = analytic_edge_state(&p, Side::Left).unwrap().to_vector(&p);
        let overlap = inner(&exact, &rep.states[0].vector).norm();
        assert!((overlap - 1.0).abs() < 1e-10, "{overlap}");
    }

    #[test]
    fn no_states_in_window_gives_empty_report() {
        let rep = numeric_edge_states(&open(0.0, 1.2, 20), 1e-8).unwrap();
        assert!(rep.states.is_empty());
        assert!(rep.fitted_kappa.is_none());
        let periodic = LadderParams::new(1.0, 0.0, 0.0, 0.3, 20, Boundary::Periodic).unwrap();
        assert!(numeric_edge_states(&periodic, 1e-8).is_err());
    }
}
