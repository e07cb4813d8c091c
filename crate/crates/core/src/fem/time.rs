//! Backward Euler (BDF1) integration of `M u' + A u = f`.

use super::dirichlet::DirichletSystem;
use super::sparse::CsrMatrix;
use crate::error::{Result, RomError};

/// Operator of the semi-discrete system, possibly time dependent.
pub enum TimeOperator<'a> {
    Constant(&'a CsrMatrix),
    Varying(&'a (dyn Fn(f64) -> Result<CsrMatrix> + Sync)),
}

/// Uniform time grid `t_n = t0 + n dt`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> TimeGrid {
        TimeGrid { t0: 0.0, dt, steps }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.steps)
    }
}

/// Factorised `(M/dt + A)` with Dirichlet rows eliminated.
pub struct Bdf1Stepper {
    mass: CsrMatrix,
    system: DirichletSystem,
    dt: f64,
}

impl Bdf1Stepper {
    pub fn new(mass: &CsrMatrix, a: &CsrMatrix, dt: f64, dirichlet_dofs: &[usize]) -> Result<Bdf1Stepper> {
        if !(dt > 0.0) {
            return Err(RomError::config(format!("time step must be positive, got {dt}")));
        }
        let op = mass.lincomb(1.0 / dt, a, 1.0)?;
        Ok(Bdf1Stepper { mass: mass.clone(), system: DirichletSystem::new(op, dirichlet_dofs)?, dt })
    }

    pub fn system(&self) -> &DirichletSystem {
        &self.system
    }

    /// `u^{n+1}` from `u^n`, the load at `t^{n+1}` and boundary values `g^{n+1}`.
    pub fn step(&self, u: &[f64], f_next: &[f64], g_next: &[f64]) -> Result<Vec<f64>> {
        let mu = self.mass.mul_vec(u);
        let rhs: Vec<f64> = f_next.iter().zip(&mu).map(|(f, m)| f + m / self.dt).collect();
        self.system.solve(&rhs, g_next)
    }
}

/// Integrates from `u0` on `grid`; returns all `steps + 1` states.
///
/// `load(t)` gives the full load vector, `boundary(t)` the values on
/// `dirichlet_dofs` (sorted). `u0` is overwritten on constrained dofs by
/// `boundary(t0)`.
pub fn solve_unsteady_bdf1(
    mass: &CsrMatrix,
    operator: TimeOperator<'_>,
    load: &(dyn Fn(f64) -> Vec<f64> + Sync),
    u0: &[f64],
    grid: TimeGrid,
    dirichlet_dofs: &[usize],
    boundary: &(dyn Fn(f64) -> Vec<f64> + Sync),
) -> Result<Vec<Vec<f64>>> {
    let n = mass.nrows();
    if u0.len() != n {
        return Err(RomError::DimensionMismatch(format!("initial state has {} entries, expected {n}", u0.len())));
    }
    let mut u = u0.to_vec();
    for (&d, &g) in dirichlet_dofs.iter().zip(&boundary(grid.t0)) {
        u[d] = g;
    }
    let mut traj = Vec::with_capacity(grid.steps + 1);
    traj.push(u.clone());
    let fixed = match operator {
        TimeOperator::Constant(a) => Some(Bdf1Stepper::new(mass, a, grid.dt, dirichlet_dofs)?),
        TimeOperator::Varying(_) => None,
    };
    for step in 0..grid.steps {
        let t = grid.time(step + 1);
        let wrap = |e: RomError| RomError::StepFailure { step: step + 1, source: Box::new(e) };
        let next = match (&fixed, &operator) {
            (Some(s), _) => s.step(&u, &load(t), &boundary(t)),
            (None, TimeOperator::Varying(f)) => {
                let a = f(t).map_err(wrap)?;
                Bdf1Stepper::new(mass, &a, grid.dt, dirichlet_dofs).and_then(|s| s.step(&u, &load(t), &boundary(t)))
            }
            (None, TimeOperator::Constant(_)) => unreachable!(),
        }
        .map_err(wrap)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(wrap(RomError::SolverFailure { reason: "non-finite state".into(), residual: f64::NAN }));
        }
        u = next;
        traj.push(u.clone());
    }
    Ok(traj)
}
