//! Finite element discretisation on structured box meshes.

pub mod assembly;
pub mod dirichlet;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod time;

pub use assembly::{
    assemble_advection, assemble_diffusion, assemble_load, assemble_load_with, assemble_mass, assemble_stiffness,
    assemble_weighted_mass, interpolate, l2_error,
};
pub use dirichlet::{apply_dirichlet_lifting, DirichletSystem};
pub use solver::{solve_steady, LinearSolver};
pub use sparse::CsrMatrix;
pub use time::{solve_unsteady_bdf1, Bdf1Stepper, TimeGrid, TimeOperator};
