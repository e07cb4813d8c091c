//! Declarative description of a coupled master/slave problem.

use serde::{Deserialize, Serialize};

use crate::expr::ExprSource;
use crate::mesh::BoxSpec;
use crate::sampling::ParameterSpace;

fn one() -> ExprSource {
    ExprSource("1".into())
}

fn zero() -> ExprSource {
    ExprSource("0".into())
}

/// One affine term `theta(mu, t) * A_q` of a model operator.
///
/// `theta` may depend on parameters and time, the field only on space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OperatorTermSpec {
    /// `theta * int kappa grad u . grad v`
    Diffusion {
        #[serde(default = "one")]
        theta: ExprSource,
        #[serde(default = "one")]
        field: ExprSource,
    },
    /// `theta * int r u v`
    Reaction {
        #[serde(default = "one")]
        theta: ExprSource,
        #[serde(default = "one")]
        field: ExprSource,
    },
    /// `theta * int (b . grad u) v`
    Advection {
        #[serde(default = "one")]
        theta: ExprSource,
        velocity: Vec<ExprSource>,
    },
}

/// One load term `theta(mu, t) * int f(x, t, mu) v`.
///
/// When `field` depends only on space the projected load is precomputed;
/// otherwise it is reassembled whenever it is needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTermSpec {
    #[serde(default = "one")]
    pub theta: ExprSource,
    pub field: ExprSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    pub tag: String,
    #[serde(default = "zero")]
    pub value: ExprSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mesh: BoxSpec,
    #[serde(default)]
    pub parameters: ParameterSpace,
    pub operator: Vec<OperatorTermSpec>,
    #[serde(default)]
    pub forcing: Vec<ForcingTermSpec>,
    /// Listed order decides shared dofs: the first group wins.
    #[serde(default)]
    pub dirichlet: Vec<DirichletSpec>,
    #[serde(default = "zero")]
    pub initial: ExprSource,
    #[serde(default)]
    pub time_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub master_tag: String,
    pub slave_tag: String,
    /// If set, checked against the detected mesh conformity.
    #[serde(default)]
    pub conforming: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub master: ModelSpec,
    pub slave: ModelSpec,
    pub interface: InterfaceSpec,
    #[serde(default)]
    pub time: Option<TimeSpec>,
}

impl ProblemSpec {
    pub fn is_unsteady(&self) -> bool {
        self.master.time_dependent || self.slave.time_dependent
    }
}
