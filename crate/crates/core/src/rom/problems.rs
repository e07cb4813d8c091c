//! Ready-made coupled problems on adjacent boxes.
//!
//! The master occupies the unit cube and the slave the box to its side, so the
//! shared face is `x = 1` (master `x+`, slave `x-`) unless stated otherwise.

use std::collections::BTreeMap;

use crate::expr::ExprSource;
use crate::mesh::{BoxFace, BoxSpec};
use crate::sampling::{ParameterRange, ParameterSpace};

use super::spec::{DirichletSpec, ForcingTermSpec, InterfaceSpec, ModelSpec, OperatorTermSpec, ProblemSpec, TimeSpec};

fn cube(origin: [f64; 3], extent: [f64; 3], n: usize, order: usize, tags: &[(BoxFace, &str)]) -> BoxSpec {
    BoxSpec {
        origin: origin.to_vec(),
        extent: extent.to_vec(),
        subdivisions: vec![n; 3],
        order,
        tags: tags.iter().map(|(f, s)| (*f, s.to_string())).collect::<BTreeMap<_, _>>(),
    }
}

fn space(params: &[(&str, [f64; 2])]) -> ParameterSpace {
    ParameterSpace {
        params: params.iter().map(|(n, r)| ParameterRange { name: n.to_string(), range: *r }).collect(),
    }
}

fn e(s: &str) -> ExprSource {
    ExprSource(s.into())
}

fn diffusion(theta: &str) -> OperatorTermSpec {
    OperatorTermSpec::Diffusion { theta: e(theta), field: e("1") }
}

/// Laplace slave on `[1, 2] x [0, 1]^2`, Neumann away from the interface.
fn laplace_slave(n: usize, order: usize) -> ModelSpec {
    ModelSpec {
        mesh: cube([1.0, 0.0, 0.0], [1.0, 1.0, 1.0], n, order, &[(BoxFace::XMin, "interface")]),
        parameters: ParameterSpace::default(),
        operator: vec![diffusion("1")],
        forcing: Vec::new(),
        dirichlet: Vec::new(),
        initial: e("0"),
        time_dependent: false,
    }
}

fn interface() -> InterfaceSpec {
    InterfaceSpec { master_tag: "interface".into(), slave_tag: "interface".into(), conforming: None }
}

/// Steady reaction-diffusion master `-div(alpha grad u) + beta u = f`, zero on
/// `x = 0`, coupled to a Laplace slave; `alpha, beta` in `[0.5, 5]`.
pub fn steady_reaction_diffusion(n_master: usize, n_slave: usize, order_master: usize, order_slave: usize) -> ProblemSpec {
    let master = ModelSpec {
        mesh: cube(
            [0.0; 3],
            [1.0; 3],
            n_master,
            order_master,
            &[(BoxFace::XMin, "wall"), (BoxFace::XMax, "interface")],
        ),
        parameters: space(&[("alpha", [0.5, 5.0]), ("beta", [0.5, 5.0])]),
        operator: vec![diffusion("alpha"), OperatorTermSpec::Reaction { theta: e("beta"), field: e("1") }],
        forcing: vec![ForcingTermSpec { theta: e("1"), field: e("pi / 4 * y * x^2 * sin(pi / 2 * y) * exp(z - 1)") }],
        dirichlet: vec![DirichletSpec { tag: "wall".into(), value: e("0") }],
        initial: e("0"),
        time_dependent: false,
    };
    ProblemSpec { master, slave: laplace_slave(n_slave, order_slave), interface: interface(), time: None }
}

/// Heat master `u_t - div(alpha grad u) = 1 - sin(pi y) cos(pi x / 2)` on `[0, 1]`,
/// zero on `x = 0` and zero initially, coupled to a Laplace slave; `alpha` in `[1e-3, 5]`.
pub fn heat_laplace(n_master: usize, n_slave: usize, steps: usize) -> ProblemSpec {
    let master = ModelSpec {
        mesh: cube([0.0; 3], [1.0; 3], n_master, 1, &[(BoxFace::XMin, "wall"), (BoxFace::XMax, "interface")]),
        parameters: space(&[("alpha", [1e-3, 5.0])]),
        operator: vec![diffusion("alpha")],
        forcing: vec![ForcingTermSpec { theta: e("1"), field: e("1 - sin(pi * y) * cos(pi / 2 * x)") }],
        dirichlet: vec![DirichletSpec { tag: "wall".into(), value: e("0") }],
        initial: e("0"),
        time_dependent: true,
    };
    ProblemSpec {
        master,
        slave: laplace_slave(n_slave, 1),
        interface: interface(),
        time: Some(TimeSpec { dt: 1.0 / steps as f64, steps }),
    }
}

/// Advection-diffusion master (channel `[0, 1]^3`, inflow value `zeta` on `x = 0`)
/// feeding a diffusive wall `[0, 1] x [1, 1.2] x [0, 1]` through `y = 1`.
pub fn channel_wall(n_master: usize, n_slave: usize, steps: usize, t_final: f64) -> ProblemSpec {
    let master = ModelSpec {
        mesh: cube([0.0; 3], [1.0; 3], n_master, 1, &[(BoxFace::XMin, "inlet"), (BoxFace::YMax, "interface")]),
        parameters: space(&[("alpha_f", [0.05, 0.5]), ("zeta", [0.5, 1.5])]),
        operator: vec![
            diffusion("alpha_f"),
            OperatorTermSpec::Advection { theta: e("1"), velocity: vec![e("4 * y * (1 - y)"), e("0"), e("0")] },
        ],
        forcing: Vec::new(),
        dirichlet: vec![DirichletSpec { tag: "inlet".into(), value: e("zeta") }],
        initial: e("0.258"),
        time_dependent: true,
    };
    let slave = ModelSpec {
        mesh: BoxSpec {
            origin: vec![0.0, 1.0, 0.0],
            extent: vec![1.0, 0.2, 1.0],
            subdivisions: vec![n_slave, (n_slave / 4).max(2), n_slave],
            order: 1,
            tags: [(BoxFace::YMin, "interface".to_string()), (BoxFace::YMax, "outer".to_string())].into_iter().collect(),
        },
        parameters: space(&[("alpha_w", [0.01, 0.1])]),
        operator: vec![diffusion("alpha_w")],
        forcing: Vec::new(),
        dirichlet: vec![DirichletSpec { tag: "outer".into(), value: e("0") }],
        initial: e("0.258"),
        time_dependent: true,
    };
    ProblemSpec {
        master,
        slave,
        interface: interface(),
        time: Some(TimeSpec { dt: t_final / steps as f64, steps }),
    }
}
