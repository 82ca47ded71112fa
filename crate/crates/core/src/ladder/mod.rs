//! The gain/loss two-leg ladder.
//!
//! Modes are indexed `(rung, leg)` with `mode = 2 * rung + leg` (`Up = 0`, `Down = 1`).
//! In the normative b-basis the two legs are dimerized chains, `Up` bonds `(2m, 2m+1)` and
//! `Down` bonds `(2m+1, 2m+2)`, coupled on every rung by the asymmetric amplitudes
//! `t_up = -iΓ - iΩ_y` (Down → Up) and `t_down = -iΓ + iΩ_y` (Up → Down). At `Γ = -Ω_y`
//! the Down → Up amplitude vanishes and every band is flat.

mod bands;
mod edges;
mod model;
mod orbitals;
mod scan;

pub use bands::{band_sweep, bloch_hamiltonian, BandSweep};
pub use edges::{
    analytic_edge_state, numeric_edge_states, predicted_sigma, EdgeReport, EdgeState, Side,
    DEFAULT_EDGE_WINDOW,
};
pub use model::{
    build_ladder_a, build_ladder_b, hadamard_transform, spectrum_report, Boundary, LadderParams,
    Leg,
};
pub use orbitals::{
    bulk_orbitals, edge_block, local_block, orbital_set, single_site_edges, Orbital,
    OrbitalLabel, OrbitalMode,
};
pub use scan::{edge_onset, phase_scan, ScanPoint};
