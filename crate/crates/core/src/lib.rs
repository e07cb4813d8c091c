//! Projection-based reduced-order models for one-way coupled PDE systems.
//!
//! A master problem is solved on its own; its trace on the shared interface
//! becomes Dirichlet data for a slave problem. Both are reduced by POD, and the
//! interface data is compressed by DEIM so the online coupling never touches
//! full-order vectors.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deim;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod expr;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod pod;
pub mod rom;
pub mod sampling;

pub use error::{Result, RomError};
pub use estimator::{estimate_error, ErrorBoundReport, ErrorEstimate, EstimatorConstants};
pub use expr::{Expr, ExprSource};
pub use fem::CsrMatrix;
pub use io::{load_bundle, save_bundle, ExperimentConfig};
pub use mesh::{build_box_mesh, BoxFace, BoxSpec, InterfaceTrace, Mesh};
pub use rom::{
    fom_coupled_solve, run_offline, CoupledFom, CoupledSolution, ProblemSpec, RomArtifacts, RomSolution, RomSolver,
    Tolerances, TrainingOptions,
};
