//! Full-order one-way coupled solves.

use crate::deim::InterfaceTransfer;
use crate::error::{Result, RomError};
use crate::fem::{Bdf1Stepper, DirichletSystem, TimeGrid};

use super::model::FullOrderModel;
use super::spec::ProblemSpec;

/// Both subproblems assembled, plus the interface transfer between them.
#[derive(Debug, Clone)]
pub struct CoupledFom {
    pub spec: ProblemSpec,
    pub master: FullOrderModel,
    pub slave: FullOrderModel,
    pub transfer: InterfaceTransfer,
    /// Present when either model is time dependent.
    pub grid: Option<TimeGrid>,
}

/// States at `times`; a single entry at `t = 0` for steady problems.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSolution {
    pub times: Vec<f64>,
    pub master: Vec<Vec<f64>>,
    pub slave: Vec<Vec<f64>>,
    /// Transferred master trace on the slave interface, per state.
    pub interface_data: Vec<Vec<f64>>,
}

impl CoupledFom {
    pub fn new(spec: &ProblemSpec) -> Result<CoupledFom> {
        let master = FullOrderModel::new(&spec.master, &spec.interface.master_tag, false)?;
        let slave = FullOrderModel::new(&spec.slave, &spec.interface.slave_tag, true)?;
        let transfer = InterfaceTransfer::new(&master.interface, &slave.interface)?;
        if let Some(expected) = spec.interface.conforming {
            if expected != transfer.is_conforming() {
                return Err(RomError::config(format!(
                    "interface declared conforming = {expected} but meshes are {}conforming",
                    if transfer.is_conforming() { "" } else { "non-" }
                )));
            }
        }
        let grid = if spec.is_unsteady() {
            let ts = spec.time.ok_or_else(|| RomError::config("time-dependent model needs a `time` section"))?;
            if !(ts.dt > 0.0) || ts.steps == 0 {
                return Err(RomError::config(format!("invalid time grid dt = {}, steps = {}", ts.dt, ts.steps)));
            }
            Some(TimeGrid::new(ts.dt, ts.steps))
        } else {
            None
        };
        Ok(CoupledFom { spec: spec.clone(), master, slave, transfer, grid })
    }

    pub fn times(&self, grid: Option<TimeGrid>) -> Vec<f64> {
        match grid {
            Some(g) => (0..=g.steps).map(|n| g.time(n)).collect(),
            None => vec![0.0],
        }
    }

    pub fn solve(&self, mu1: &[f64], mu2: &[f64]) -> Result<CoupledSolution> {
        self.solve_with_grid(mu1, mu2, self.grid)
    }

    /// Solves with an explicit time grid (ignored for steady problems).
    pub fn solve_with_grid(&self, mu1: &[f64], mu2: &[f64], grid: Option<TimeGrid>) -> Result<CoupledSolution> {
        let grid = if self.grid.is_some() { grid } else { None };
        let times = self.times(grid);
        let master = solve_model(&self.master, mu1, grid, &times, None)?;
        let interface_data: Vec<Vec<f64>> =
            master.iter().map(|u| self.transfer.apply(&self.master.interface.restrict(u))).collect();
        let slave = solve_model(&self.slave, mu2, grid, &times, Some(&interface_data))?;
        Ok(CoupledSolution { times, master, slave, interface_data })
    }

    /// Master solve only.
    pub fn solve_master(&self, mu1: &[f64]) -> Result<Vec<Vec<f64>>> {
        solve_model(&self.master, mu1, self.grid, &self.times(self.grid), None)
    }

    /// Slave solve driven by given interface data, one entry per state.
    pub fn solve_slave(&self, mu2: &[f64], interface_data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let times = self.times(self.grid);
        if interface_data.len() != times.len() {
            return Err(RomError::DimensionMismatch(format!(
                "{} interface states for {} times",
                interface_data.len(),
                times.len()
            )));
        }
        solve_model(&self.slave, mu2, self.grid, &times, Some(interface_data))
    }
}

/// Solves one model over `times`; `data[n]` are slave interface values.
fn solve_model(
    model: &FullOrderModel,
    mu: &[f64],
    grid: Option<TimeGrid>,
    times: &[f64],
    data: Option<&[Vec<f64>]>,
) -> Result<Vec<Vec<f64>>> {
    model.check_mu(mu)?;
    let iface = |n: usize| data.map(|d| d[n].as_slice());
    match grid {
        Some(g) if model.time_dependent => {
            let mut u = model.initial_state(mu);
            let mut full = u.clone();
            model.write_constraints(mu, times[0], iface(0), &mut full);
            u.copy_from_slice(&full);
            let mut out = Vec::with_capacity(times.len());
            out.push(u.clone());
            let fixed = if model.operator_is_time_dependent() {
                None
            } else {
                Some(Bdf1Stepper::new(&model.mass, &model.operator(mu, 0.0)?, g.dt, &model.constrained)?)
            };
            for n in 1..times.len() {
                let t = times[n];
                let wrap = |e| RomError::StepFailure { step: n, source: Box::new(e) };
                let g_next = model.constraint_values(mu, t, iface(n));
                let f = model.load(mu, t);
                let next = match &fixed {
                    Some(s) => s.step(&u, &f, &g_next),
                    None => Bdf1Stepper::new(&model.mass, &model.operator(mu, t).map_err(wrap)?, g.dt, &model.constrained)
                        .and_then(|s| s.step(&u, &f, &g_next)),
                }
                .map_err(wrap)?;
                if next.iter().any(|v| !v.is_finite()) {
                    return Err(wrap(RomError::SolverFailure { reason: "non-finite state".into(), residual: f64::NAN }));
                }
                u = next;
                out.push(u.clone());
            }
            Ok(out)
        }
        _ => {
            let quasi_static = grid.is_some()
                && (model.operator_is_time_dependent()
                    || model.load_is_time_dependent()
                    || model.groups.iter().any(|g| g.value.depends_on_time()));
            let mut system: Option<DirichletSystem> = None;
            let mut out: Vec<Vec<f64>> = Vec::with_capacity(times.len());
            for (n, &t) in times.iter().enumerate() {
                if n > 0 && !quasi_static && data.is_none() {
                    out.push(out[0].clone());
                    continue;
                }
                if system.is_none() || model.operator_is_time_dependent() {
                    system = Some(DirichletSystem::new(model.operator(mu, t)?, &model.constrained)?);
                }
                let g = model.constraint_values(mu, t, iface(n));
                let u = system.as_ref().unwrap().solve(&model.load(mu, t), &g).map_err(|e| {
                    if times.len() > 1 {
                        RomError::StepFailure { step: n, source: Box::new(e) }
                    } else {
                        e
                    }
                })?;
                out.push(u);
            }
            Ok(out)
        }
    }
}

/// Full-order coupled solve of `spec` at `(mu1, mu2)`.
pub fn fom_coupled_solve(spec: &ProblemSpec, mu1: &[f64], mu2: &[f64]) -> Result<CoupledSolution> {
    CoupledFom::new(spec)?.solve(mu1, mu2)
}
