//! One-dimensional Lagrange finite element laboratory for `-u'' = f` on `(0, 1)`.

pub mod banded;
pub mod basis;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod solve;
pub mod study;

pub use mesh::{build_mesh, Mesh1D};
pub use problem::{seminorm_reference, Problem1D};
pub use solve::{assemble_solve, galerkin_residual, h1_error, FemSolution};
pub use study::{
    convergence_study, empirical_superiority, fit_constant, superiority_trials, write_records_csv,
    ConvergenceRecord, FittedLaw, SuperiorityTrial,
};
