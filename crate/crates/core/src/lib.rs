//! Dark-state restoration by non-Hermitian compensation.
//!
//! * [`numkit`]: dense complex linear algebra for small non-Hermitian matrices
//!   (Schur-based eigendecomposition, defect detection, time evolution, decay fits).
//! * [`lambda`]: the three-level Λ system, its dark/bright basis and the imaginary
//!   field that keeps the dark state an exact eigenstate.
//! * [`ladder`]: the gain/loss two-leg ladder, its flat-band orbitals, edge states and
//!   phase-diagram scans.
//! * [`manybody`]: bosonic exact diagonalization of the ladder with onsite repulsion and
//!   the flat-band charge-density-wave check.

pub mod error;
pub mod lambda;
pub mod ladder;
pub mod manybody;
pub mod numkit;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
