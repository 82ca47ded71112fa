//! Bosonic exact diagonalization of the ladder with onsite interspecies repulsion
//! `U Σ_n n(n,↑) n(n,↓)`, and checks of the flat-band charge-density-wave state.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{
    build_ladder_b, bulk_orbitals, Boundary, LadderParams, Leg, Orbital, OrbitalLabel,
    OrbitalMode,
};
use crate::numkit::{cluster_subspace, eig_general, inner, CMatrix, DEFAULT_TOL};

pub const DEFAULT_BASIS_LIMIT: usize = 200_000;
/// Largest basis handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockBasis {
    pub n_modes: usize,
    pub particles: usize,
    pub cap: usize,
    /// Occupation vectors in descending lexicographic order.
    pub states: Vec<Vec<u16>>,
    #[serde(skip)]
    index: HashMap<Vec<u16>, usize>,
}

impl FockBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &[u16]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// The empty state, as a basis of its own.
    pub fn vacuum(n_modes: usize) -> Self {
        let states = vec![vec![0; n_modes]];
        let index = states.iter().cloned().zip(0..).collect();
        FockBasis {
            n_modes,
            particles: 0,
            cap: 0,
            states,
            index,
        }
    }
}

/// Number of ways to put `n` bosons in `modes` modes with at most `cap` per mode,
/// saturating at `limit + 1`.
fn count_states(modes: usize, n: usize, cap: usize, limit: usize) -> usize {
    let mut ways = vec![0usize; n + 1];
    ways[0] = 1;
    for _ in 0..modes {
        let mut next = vec![0usize; n + 1];
        for (total, slot) in next.iter_mut().enumerate() {
            let s: usize = (0..=cap.min(total)).map(|k| ways[total - k]).sum();
            *slot = s.min(limit + 1);
        }
        ways = next;
    }
    ways[n]
}

/// All occupations of `2L` modes with `N` bosons, at most `cap` (default `N`) per mode.
pub fn fock_basis(length: usize, particles: usize, cap: Option<usize>) -> Result<FockBasis> {
    fock_basis_with_limit(length, particles, cap, DEFAULT_BASIS_LIMIT)
}

pub fn fock_basis_with_limit(
    length: usize,
    particles: usize,
    cap: Option<usize>,
    limit: usize,
) -> Result<FockBasis> {
    if length < 4 {
        return Err(Error::domain(format!("need at least 4 rungs, got {length}")));
    }
    let cap = cap.unwrap_or(particles);
    if cap > u16::MAX as usize || particles > u16::MAX as usize {
        return Err(Error::domain("occupations beyond 65535 are not supported"));
    }
    let n_modes = 2 * length;
    let size = count_states(n_modes, particles, cap, limit);
    if size > limit {
        return Err(Error::Resource(format!(
            "Fock basis for {n_modes} modes and {particles} particles exceeds the limit of {limit} states"
        )));
    }
    let mut states = Vec::with_capacity(size);
    let mut occ = vec![0u16; n_modes];
    fill(&mut states, &mut occ, 0, particles, cap);
    let index = states.iter().cloned().zip(0..).collect();
    Ok(FockBasis {
        n_modes,
        particles,
        cap,
        states,
        index,
    })
}

fn fill(out: &mut Vec<Vec<u16>>, occ: &mut Vec<u16>, mode: usize, left: usize, cap: usize) {
    if mode + 1 == occ.len() {
        if left <= cap {
            occ[mode] = left as u16;
            out.push(occ.clone());
            occ[mode] = 0;
        }
        return;
    }
    for k in (0..=left.min(cap)).rev() {
        occ[mode] = k as u16;
        fill(out, occ, mode + 1, left - k, cap);
    }
    occ[mode] = 0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    pub basis: FockBasis,
    pub matrix: CMatrix,
    /// Diagonal of the interaction term alone.
    pub interaction: Vec<f64>,
    pub u: f64,
}

impl ManyBodyOperator {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(v)
    }
}

fn interaction_energy(p: &LadderParams, occ: &[u16], u: f64) -> f64 {
    (0..p.length)
        .map(|r| occ[p.mode(r, Leg::Up)] as f64 * occ[p.mode(r, Leg::Down)] as f64)
        .sum::<f64>()
        * u
}

/// Second-quantized `build_ladder_b(p)` plus the onsite interaction on `basis`.
pub fn build_manybody(p: &LadderParams, basis: &FockBasis, u: f64) -> Result<ManyBodyOperator> {
    p.validate()?;
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("interaction U = {u} must be finite and >= 0")));
    }
    if basis.n_modes != p.dim() {
        return Err(Error::domain(format!(
            "basis has {} modes, ladder has {}",
            basis.n_modes,
            p.dim()
        )));
    }
    if basis.len() > DENSE_LIMIT {
        return Err(Error::Resource(format!(
            "basis of {} states exceeds the dense limit of {DENSE_LIMIT}",
            basis.len()
        )));
    }
    let h = build_ladder_b(p)?;
    let hops: Vec<(usize, usize, C64)> = (0..h.dim())
        .flat_map(|i| (0..h.dim()).map(move |j| (i, j)))
        .filter(|&(i, j)| h[(i, j)] != C64::new(0.0, 0.0)).map(|(i, j)| (i, j, h[(i, j)]))
        .collect();
    let columns: Vec<Vec<(usize, C64)>> = basis
        .states
        .par_iter()
        .map(|occ| {
            let mut col = Vec::new();
            let mut target = occ.clone();
            for &(dst, src, amp) in &hops {
                let n_src = occ[src];
                if n_src == 0 {
                    continue;
                }
                if dst == src {
                    col.push((basis.index[occ], amp * n_src as f64));
                    continue;
                }
                if occ[dst] as usize >= basis.cap {
                    continue;
                }
                target[src] -= 1;
                target[dst] += 1;
                let factor = (n_src as f64).sqrt() * ((occ[dst] + 1) as f64).sqrt();
                col.push((basis.index[&target], amp * factor));
                target[src] += 1;
                target[dst] -= 1;
            }
            col
        })
        .collect();
    let mut matrix = CMatrix::zeros(basis.len());
    for (j, col) in columns.into_iter().enumerate() {
        for (i, a) in col {
            matrix[(i, j)] += a;
        }
    }
    let interaction: Vec<f64> = basis
        .states
        .iter()
        .map(|occ| interaction_energy(p, occ, u))
        .collect();
    for (i, e) in interaction.iter().enumerate() {
        matrix[(i, i)] += e;
    }
    Ok(ManyBodyOperator {
        basis: basis.clone(),
        matrix,
        interaction,
        u,
    })
}

/// Applies `D† = Σ φ_m b†_m` to `psi` on `from`, giving a vector on `to`.
pub fn lift_orbital(
    orbital: &Orbital,
    p: &LadderParams,
    from: &FockBasis,
    psi: &[C64],
    to: &FockBasis,
) -> Result<Vec<C64>> {
    if to.particles != from.particles + 1 || to.n_modes != from.n_modes || from.n_modes != p.dim() {
        return Err(Error::domain(format!(
            "cannot lift from {} to {} particles on {}/{} modes",
            from.particles, to.particles, from.n_modes, to.n_modes
        )));
    }
    if psi.len() != from.len() {
        return Err(Error::domain("state length does not match its basis"));
    }
    let mut out = vec![C64::new(0.0, 0.0); to.len()];
    for (occ, &c) in from.states.iter().zip(psi) {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let mut target = occ.clone();
        for &((rung, leg), phi) in &orbital.amplitudes {
            let m = p.mode(rung, leg);
            target[m] += 1;
            let idx = to.index_of(&target).ok_or_else(|| {
                Error::domain(format!(
                    "occupation of mode {m} would exceed the cap {}",
                    to.cap
                ))
            })?;
            out[idx] += c * phi * (target[m] as f64).sqrt();
            target[m] -= 1;
        }
    }
    Ok(out)
}

fn require_cdw_params(p: &LadderParams) -> Result<()> {
    p.validate()?;
    p.require_flat_band("the CDW construction")?;
    if p.boundary != Boundary::Periodic || !p.length.is_multiple_of(4) {
        return Err(Error::domain(format!(
            "the CDW state needs a periodic ladder with L divisible by 4, got L = {} ({:?})",
            p.length, p.boundary
        )));
    }
    if !(p.omega_x < 0.0) {
        return Err(Error::domain(format!(
            "the lowest band is the Up-minus band only for Ω_x < 0, got {}",
            p.omega_x
        )));
    }
    Ok(())
}

/// Lowest-band orbitals `Ω_x - t`, one per Up dimer.
pub fn lowest_band_orbitals(p: &LadderParams) -> Result<Vec<Orbital>> {
    Ok(bulk_orbitals(p, OrbitalMode::Strict)?
        .into_iter()
        .filter(|o| o.label == OrbitalLabel::UpMinus)
        .collect())
}

/// `Π D†(n,↑,-) |0⟩` over centers `n ≡ 2·offset (mod 4)`, normalized, on the
/// `N = L/4` Fock basis.
pub fn cdw_state(p: &LadderParams, offset: usize) -> Result<(FockBasis, Vec<C64>)> {
    require_cdw_params(p)?;
    if offset > 1 {
        return Err(Error::domain(format!("CDW offset must be 0 or 1, got {offset}")));
    }
    let orbitals: Vec<Orbital> = lowest_band_orbitals(p)?
        .into_iter()
        .filter(|o| o.center % 4 == 2 * offset)
        .collect();
    let mut basis = FockBasis::vacuum(p.dim());
    let mut psi = vec![C64::new(1.0, 0.0)];
    for o in &orbitals {
        let next = fock_basis(p.length, basis.particles + 1, None)?;
        psi = lift_orbital(o, p, &basis, &psi, &next)?;
        basis = next;
    }
    // the final cap is N, matching fock_basis(L, N, None)
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok((basis, psi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundManifold {
    /// The `k` eigenvalues of smallest real part.
    pub lowest: Vec<C64>,
    pub energy: C64,
    /// Eigenvalues within `tol` of `energy`.
    pub degeneracy: usize,
    pub tol: f64,
    /// Orthonormal basis of the invariant subspace of the degenerate cluster.
    pub basis: Vec<Vec<C64>>,
}

impl GroundManifold {
    /// `‖P ψ‖² / ‖ψ‖²` for the projector onto `basis`.
    pub fn fidelity(&self, psi: &[C64]) -> f64 {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        self.basis.iter().map(|b| inner(b, psi).norm_sqr()).sum::<f64>() / norm2
    }
}

/// Ground state of a non-Hermitian operator: minimal real part.
pub fn ground_manifold(op: &ManyBodyOperator, k: usize, tol: f64) -> Result<GroundManifold> {
    let dim = op.matrix.dim();
    if k == 0 || k > dim {
        return Err(Error::domain(format!("k = {k} out of range 1..={dim}")));
    }
    let spec = eig_general(&op.matrix, DEFAULT_TOL)?;
    let energy = spec.eigenvalues[0];
    let degeneracy = spec
        .eigenvalues
        .iter()
        .filter(|z| (*z - energy).norm() <= tol)
        .count();
    let basis = cluster_subspace(&op.matrix, energy, degeneracy)?;
    Ok(GroundManifold {
        lowest: spec.eigenvalues[..k].to_vec(),
        energy,
        degeneracy,
        tol,
        basis,
    })
}

/// First-order penalty `V_ij = U Σ_r [ρ_i↑(r) ρ_j↓(r) + ρ_i↓(r) ρ_j↑(r)]`.
pub fn projected_interaction(orbitals: &[Orbital], u: f64) -> Vec<Vec<f64>> {
    let dens = |o: &Orbital| -> HashMap<(usize, Leg), f64> {
        o.amplitudes.iter().map(|&(m, a)| (m, a.norm_sqr())).collect()
    };
    let rho: Vec<_> = orbitals.iter().map(dens).collect();
    let pair = |a: &HashMap<(usize, Leg), f64>, b: &HashMap<(usize, Leg), f64>| -> f64 {
        a.iter()
            .filter(|((_, leg), _)| *leg == Leg::Up)
            .filter_map(|(&(r, _), x)| b.get(&(r, Leg::Down)).map(|y| x * y))
            .fold(0.0, |acc, v| acc + v)
    };
    (0..orbitals.len())
        .map(|i| {
            (0..orbitals.len())
                .map(|j| u * (pair(&rho[i], &rho[j]) + pair(&rho[j], &rho[i])))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdwReport {
    pub params: LadderParams,
    pub u: f64,
    pub particles: usize,
    pub basis_size: usize,
    /// `N (Ω_x - t)`.
    pub target_energy: f64,
    /// `‖H G - E G‖` for offsets 0 and 1.
    pub cdw_residuals: [f64; 2],
    /// `⟨G|H_int|G⟩` for offsets 0 and 1.
    pub cdw_interaction: [f64; 2],
    pub cdw_overlap: f64,
    pub ground_energy: C64,
    pub ground_degeneracy: usize,
    pub degeneracy_tol: f64,
    pub fidelities: [f64; 2],
    pub orbital_centers: Vec<usize>,
    pub penalty: Vec<Vec<f64>>,
    /// Penalty for centers 2 apart.
    pub v_adjacent: f64,
    /// Penalty for centers 4 apart.
    pub v_distance4: f64,
    /// Penalty for doubly occupying one orbital.
    pub v_self: f64,
}

pub const CDW_DEGENERACY_TOL: f64 = 1e-8;

pub fn verify_cdw(p: &LadderParams, u: f64) -> Result<CdwReport> {
    verify_cdw_with_tol(p, u, CDW_DEGENERACY_TOL)
}

pub fn verify_cdw_with_tol(p: &LadderParams, u: f64, degeneracy_tol: f64) -> Result<CdwReport> {
    require_cdw_params(p)?;
    let (basis, g0) = cdw_state(p, 0)?;
    let (_, g1) = cdw_state(p, 1)?;
    let op = build_manybody(p, &basis, u)?;
    let n = basis.particles;
    let target = n as f64 * (p.omega_x - p.t);
    let resid = |g: &[C64]| -> f64 {
        op.apply(g)
            .iter()
            .zip(g)
            .map(|(hg, x)| (hg - x * target).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let int = |g: &[C64]| -> f64 {
        g.iter().zip(&op.interaction).map(|(x, e)| x.norm_sqr() * e).sum()
    };
    let gm = ground_manifold(&op, 1, degeneracy_tol)?;
    let orbitals = lowest_band_orbitals(p)?;
    let penalty = projected_interaction(&orbitals, u);
    let centers: Vec<usize> = orbitals.iter().map(|o| o.center).collect();
    let at = |d: usize| -> f64 {
        let j = centers.iter().position(|&c| c == d % p.length).unwrap_or(0);
        penalty[0][j]
    };
    Ok(CdwReport {
        params: *p,
        u,
        particles: n,
        basis_size: basis.len(),
        target_energy: target,
        cdw_residuals: [resid(&g0), resid(&g1)],
        cdw_interaction: [int(&g0), int(&g1)],
        cdw_overlap: inner(&g0, &g1).norm(),
        ground_energy: gm.energy,
        ground_degeneracy: gm.degeneracy,
        degeneracy_tol,
        fidelities: [gm.fidelity(&g0), gm.fidelity(&g1)],
        v_adjacent: at(2),
        v_distance4: at(4),
        v_self: penalty[0][0],
        orbital_centers: centers,
        penalty,
    })
}
