//! Coupled problem description, full-order solves and the reduced-order model.

pub mod artifacts;
pub mod fom;
pub mod model;
pub mod offline;
pub mod online;
pub mod problems;
pub mod spec;

pub use artifacts::{
    BasisStrategy, CouplingProducts, GroupLift, OfflineTimings, Pairing, ReducedModel, RomArtifacts, Tolerances,
    TrainingOptions, TrainingSet,
};
pub use fom::{fom_coupled_solve, CoupledFom, CoupledSolution};
pub use model::{FullOrderModel, ModelDescription};
pub use offline::{build_artifacts, slave_seed, collect_snapshots, run_offline, run_offline_grid, training_set, training_spectra, TrainingSnapshots, TrainingSpectra};
pub use online::{OnlineDiagnostics, RomSolution, RomSolver};
pub use spec::{DirichletSpec, ForcingTermSpec, InterfaceSpec, ModelSpec, OperatorTermSpec, ProblemSpec, TimeSpec};
