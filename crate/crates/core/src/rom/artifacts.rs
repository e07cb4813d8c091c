//! Offline products consumed by the online phase.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::deim::InterfaceReducer;
use crate::error::Result;
use crate::fem::CsrMatrix;
use crate::sampling::LhsMode;

use super::model::FullOrderModel;
use super::spec::ProblemSpec;

/// Energy tolerances of the master basis, the DEIM basis and the slave basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub master: f64,
    pub deim: f64,
    pub slave: f64,
}

impl Tolerances {
    pub fn uniform(eps: f64) -> Tolerances {
        Tolerances { master: eps, deim: eps, slave: eps }
    }
}

/// How master and slave training parameters are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Sample `k` of the master goes with sample `k` of the slave.
    #[default]
    Paired,
    /// Every master sample with every slave sample.
    Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisStrategy {
    /// Truncated POD bases.
    #[default]
    Pod,
    /// Untruncated bases spanning every free dof, with DEIM on every interface node.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingOptions {
    pub n_train: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampling: LhsMode,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default)]
    pub basis: BasisStrategy,
    /// Reassemble every load term online instead of using precomputed projections.
    #[serde(default)]
    pub reassemble_loads: bool,
}

impl TrainingOptions {
    pub fn new(n_train: usize, seed: u64) -> TrainingOptions {
        TrainingOptions {
            n_train,
            seed,
            sampling: LhsMode::Jittered,
            pairing: Pairing::Paired,
            basis: BasisStrategy::Pod,
            reassemble_loads: false,
        }
    }
}

/// Training parameters and the (master, slave) index pairs solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub master: Vec<Vec<f64>>,
    pub slave: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize)>,
}

/// Projected Dirichlet data of one non-interface group.
///
/// Uniform groups keep one column (the sum over the group's dofs); others
/// keep one column per dof.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLift {
    pub uniform: bool,
    pub mass: DMatrix<f64>,
    pub terms: Vec<DMatrix<f64>>,
}

/// Galerkin projection of one full-order model onto its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub mass: DMatrix<f64>,
    pub terms: Vec<DMatrix<f64>>,
    /// Projected load per forcing term; `None` means reassemble online.
    pub loads: Vec<Option<DVector<f64>>>,
    pub group_lifts: Vec<GroupLift>,
    /// Projected initial state when it does not depend on parameters.
    pub initial: Option<DVector<f64>>,
}

fn project(a: &CsrMatrix, v: &DMatrix<f64>) -> DMatrix<f64> {
    v.tr_mul(&a.mul_dense(v))
}

impl ReducedModel {
    pub fn build(
        model: &FullOrderModel,
        basis: DMatrix<f64>,
        singular_values: Vec<f64>,
        reassemble_loads: bool,
    ) -> Result<ReducedModel> {
        let v = &basis;
        let n = model.num_dofs();
        let mass = project(&model.mass, v);
        let terms = model.matrices.iter().map(|a| project(a, v)).collect();
        let loads = model
            .load_vectors
            .iter()
            .map(|lv| match lv {
                Some(f) if !reassemble_loads => Some(v.tr_mul(&DVector::from_column_slice(f))),
                _ => None,
            })
            .collect();
        let mut group_lifts = Vec::with_capacity(model.groups.len());
        for g in &model.groups {
            let uniform = g.is_uniform();
            let cols = if uniform { 1 } else { g.dofs.len() };
            let mut e = DMatrix::zeros(n, cols);
            for (k, &d) in g.dofs.iter().enumerate() {
                e[(d, if uniform { 0 } else { k })] = 1.0;
            }
            group_lifts.push(GroupLift {
                uniform,
                mass: v.tr_mul(&model.mass.mul_dense(&e)),
                terms: model.matrices.iter().map(|a| v.tr_mul(&a.mul_dense(&e))).collect(),
            });
        }
        let initial = (!model.initial.depends_on_params())
            .then(|| v.tr_mul(&DVector::from_vec(model.initial_state(&vec![0.0; model.space.dim()]))));
        Ok(ReducedModel { basis, singular_values, mass, terms, loads, group_lifts, initial })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Interface coupling products on the slave side.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProducts {
    /// `U V_1`, `M x n1`.
    pub extraction: DMatrix<f64>,
    /// `Phi Phi|_I^{-1} U V_1`, `N_G2 x n1`.
    pub full_transfer: DMatrix<f64>,
    /// `V_2^T A_q E W`, `n2 x M`, per slave operator term.
    pub lift_terms: Vec<DMatrix<f64>>,
    /// `V_2^T M E W`, `n2 x M`.
    pub lift_mass: DMatrix<f64>,
    /// `lift_terms[q] * extraction`, `n2 x n1`.
    pub lift_terms_reduced: Vec<DMatrix<f64>>,
    /// `lift_mass * extraction`, `n2 x n1`.
    pub lift_mass_reduced: DMatrix<f64>,
}

/// Wall-clock seconds per offline stage; excluded from bundle hashes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OfflineTimings {
    pub snapshots_s: f64,
    pub pod_s: f64,
    pub deim_s: f64,
    pub projection_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RomArtifacts {
    pub problem: ProblemSpec,
    pub tolerances: Tolerances,
    pub options: TrainingOptions,
    pub training: TrainingSet,
    pub master: ReducedModel,
    pub slave: ReducedModel,
    pub reducer: InterfaceReducer,
    pub coupling: CouplingProducts,
    pub timings: OfflineTimings,
}

impl RomArtifacts {
    pub fn n1(&self) -> usize {
        self.master.dim()
    }

    pub fn n2(&self) -> usize {
        self.slave.dim()
    }

    pub fn num_deim_points(&self) -> usize {
        self.reducer.num_points()
    }
}
