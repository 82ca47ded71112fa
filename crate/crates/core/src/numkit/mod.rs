//! Dense complex linear algebra for small non-Hermitian matrices.

mod eigen;
mod evolve;
mod fit;
mod matrix;
mod schur;

pub use eigen::{
    cluster_radius, cluster_subspace, clusters, defect_report, eig_general, residual,
    DefectReport, Spectrum, DEFAULT_TOL,
};
pub use evolve::{evolve, propagator, MAX_NORM_TIME};
pub use fit::fit_decay;
pub use matrix::{inner, normalized, numerical_rank, orthonormalize, vec_norm, CMatrix};
pub use schur::{schur, Schur, ITERATIONS_PER_EIGENVALUE};

pub(crate) use matrix::lu_solve_many;
