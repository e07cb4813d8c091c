//! Online phase: reduced master solve, DEIM interface coupling, reduced slave solve.
//!
//! All per-query work happens in reduced coordinates. Full-size vectors are
//! touched only for forcing fields or initial states that depend on the
//! parameters, and when a solution is expanded; the former are counted in
//! [`OnlineDiagnostics::full_order_ops`].

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Result, RomError};
use crate::fem::{assemble_load, TimeGrid};

use super::artifacts::{ReducedModel, RomArtifacts};
use super::fom::CoupledSolution;
use super::model::ModelDescription;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OnlineDiagnostics {
    /// Wall-clock seconds spent producing reduced coordinates.
    pub reduced_seconds: f64,
    /// Wall-clock seconds spent expanding to full-order vectors.
    pub expansion_seconds: f64,
    /// Full-order operations (load reassemblies, initial-state projections).
    pub full_order_ops: usize,
}

/// Reduced trajectory of one query; index `n` matches `times[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RomSolution {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub times: Vec<f64>,
    pub master: Vec<DVector<f64>>,
    pub slave: Vec<DVector<f64>>,
    /// Master values at the magic dofs.
    pub magic: Vec<DVector<f64>>,
    pub diagnostics: OnlineDiagnostics,
}

/// Interface contribution to one slave state.
struct Lift<'a> {
    mass: &'a DMatrix<f64>,
    terms: &'a [DMatrix<f64>],
    prev: &'a DVector<f64>,
    next: &'a DVector<f64>,
}

/// `rhs -= sum_q theta_q T_q next`, plus `M (prev - next) / dt` when stepping in time.
fn apply_lift(rhs: &mut DVector<f64>, lift: &Lift<'_>, thetas: &[f64], dt: Option<f64>) {
    for (t, th) in lift.terms.iter().zip(thetas) {
        if *th != 0.0 {
            rhs.gemv(-th, t, lift.next, 1.0);
        }
    }
    if let Some(dt) = dt {
        rhs.gemv(1.0 / dt, lift.mass, lift.prev, 1.0);
        rhs.gemv(-1.0 / dt, lift.mass, lift.next, 1.0);
    }
}

fn weighted(mats: &[DMatrix<f64>], thetas: &[f64], base: Option<(&DMatrix<f64>, f64)>) -> DMatrix<f64> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut out = match base {
        Some((m, c)) => m * c,
        None => DMatrix::zeros(n, n),
    };
    for (m, th) in mats.iter().zip(thetas) {
        out.zip_apply(m, |a, b| *a += th * b);
    }
    out
}

fn factor(a: DMatrix<f64>) -> Result<LU<f64, Dyn, Dyn>> {
    let empty = a.is_empty();
    let lu = LU::new(a);
    if !empty && !lu.is_invertible() {
        return Err(RomError::SingularRom("reduced operator is singular".into()));
    }
    Ok(lu)
}

fn solve_lu(lu: &LU<f64, Dyn, Dyn>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if rhs.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let x = lu.solve(rhs).ok_or_else(|| RomError::SingularRom("reduced solve failed".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RomError::SingularRom("non-finite reduced state".into()));
    }
    Ok(x)
}

/// Reduced data of one subproblem paired with its description.
struct Side<'a> {
    red: &'a ReducedModel,
    desc: &'a ModelDescription,
}

impl Side<'_> {
    fn load(&self, mu: &[f64], t: f64, ops: &mut usize) -> DVector<f64> {
        let mut f = DVector::zeros(self.red.dim());
        for (k, th) in self.desc.forcing_thetas(mu, t).into_iter().enumerate() {
            if th == 0.0 {
                continue;
            }
            match &self.red.loads[k] {
                Some(v) => f.axpy(th, v, 1.0),
                None => {
                    *ops += 1;
                    let full = DVector::from_vec(assemble_load(&self.desc.mesh, &self.desc.forcing[k].field, mu, t));
                    f.gemv_tr(th, &self.red.basis, &full, 1.0);
                }
            }
        }
        f
    }

    fn initial(&self, mu: &[f64], ops: &mut usize) -> DVector<f64> {
        match &self.red.initial {
            Some(x) => x.clone(),
            None => {
                *ops += 1;
                self.red.basis.tr_mul(&DVector::from_vec(self.desc.initial_state(mu)))
            }
        }
    }

    /// Per group: the scalar value (uniform) or the per-dof values.
    fn group_values(&self, mu: &[f64], t: f64) -> Vec<DVector<f64>> {
        self.desc
            .groups
            .iter()
            .zip(&self.red.group_lifts)
            .map(|(g, l)| {
                if l.uniform {
                    DVector::from_element(1, g.value.eval_global(t, mu))
                } else {
                    DVector::from_vec(g.values(&self.desc.mesh, mu, t))
                }
            })
            .collect()
    }

    fn is_quasi_static(&self, unsteady_problem: bool) -> bool {
        unsteady_problem
            && (self.desc.operator_is_time_dependent()
                || self.desc.load_is_time_dependent()
                || self.desc.constraints_are_time_dependent())
    }

    /// Reduced trajectory; `magic[n]` drives the interface lift when present.
    fn run(
        &self,
        mu: &[f64],
        times: &[f64],
        grid: Option<TimeGrid>,
        interface: Option<(&[DVector<f64>], &DMatrix<f64>, &[DMatrix<f64>])>,
        ops: &mut usize,
    ) -> Result<Vec<DVector<f64>>> {
        let desc = self.desc;
        let red = self.red;
        let time_varying_op = desc.operator_is_time_dependent();
        let lifts_at = |prev_g: &'_ [DVector<f64>], next_g: &'_ [DVector<f64>], n: usize, rhs: &mut DVector<f64>, th: &[f64], dt: Option<f64>| {
            for ((gl, p), q) in red.group_lifts.iter().zip(prev_g).zip(next_g) {
                apply_lift(rhs, &Lift { mass: &gl.mass, terms: &gl.terms, prev: p, next: q }, th, dt);
            }
            if let Some((magic, mass, terms)) = interface {
                let prev = &magic[n.saturating_sub(1)];
                apply_lift(rhs, &Lift { mass, terms, prev, next: &magic[n] }, th, dt);
            }
        };
        let mut out = Vec::with_capacity(times.len());
        match grid {
            Some(g) if desc.time_dependent => {
                let mut x = self.initial(mu, ops);
                out.push(x.clone());
                let mut g_prev = self.group_values(mu, times[0]);
                let mut lu = None;
                for n in 1..times.len() {
                    let t = times[n];
                    let wrap = |e| RomError::StepFailure { step: n, source: Box::new(e) };
                    let th = desc.thetas(mu, t).map_err(wrap)?;
                    if lu.is_none() || time_varying_op {
                        lu = Some(factor(weighted(&red.terms, &th, Some((&red.mass, 1.0 / g.dt)))).map_err(wrap)?);
                    }
                    let g_next = self.group_values(mu, t);
                    let mut rhs = self.load(mu, t, ops);
                    rhs.gemv(1.0 / g.dt, &red.mass, &x, 1.0);
                    lifts_at(&g_prev, &g_next, n, &mut rhs, &th, Some(g.dt));
                    x = solve_lu(lu.as_ref().unwrap(), &rhs).map_err(wrap)?;
                    out.push(x.clone());
                    g_prev = g_next;
                }
            }
            _ => {
                let reuse = !self.is_quasi_static(grid.is_some()) && interface.is_none();
                let mut lu = None;
                for (n, &t) in times.iter().enumerate() {
                    if n > 0 && reuse {
                        out.push(out[0].clone());
                        continue;
                    }
                    let wrap = |e| if times.len() > 1 { RomError::StepFailure { step: n, source: Box::new(e) } } else { e };
                    let th = desc.thetas(mu, t).map_err(wrap)?;
                    if lu.is_none() || time_varying_op {
                        lu = Some(factor(weighted(&red.terms, &th, None)).map_err(wrap)?);
                    }
                    let gv = self.group_values(mu, t);
                    let mut rhs = self.load(mu, t, ops);
                    lifts_at(&gv, &gv, n, &mut rhs, &th, None);
                    out.push(solve_lu(lu.as_ref().unwrap(), &rhs).map_err(wrap)?);
                }
            }
        }
        Ok(out)
    }
}

/// Where a magic dof's master value comes from when it is Dirichlet-constrained.
#[derive(Debug, Clone)]
struct MagicOffset {
    slot: usize,
    group: usize,
    coord: [f64; 3],
}

/// Online solver built from offline artifacts; no full-order assembly.
#[derive(Debug, Clone)]
pub struct RomSolver {
    pub artifacts: RomArtifacts,
    pub master: ModelDescription,
    pub slave: ModelDescription,
    pub grid: Option<TimeGrid>,
    offsets: Vec<MagicOffset>,
}

impl RomSolver {
    pub fn new(artifacts: RomArtifacts) -> Result<RomSolver> {
        let p = &artifacts.problem;
        let master = ModelDescription::new(&p.master, &p.interface.master_tag, false)?;
        let slave = ModelDescription::new(&p.slave, &p.interface.slave_tag, true)?;
        let grid = if p.is_unsteady() {
            let ts = p.time.ok_or_else(|| RomError::config("time-dependent model needs a `time` section"))?;
            Some(TimeGrid::new(ts.dt, ts.steps))
        } else {
            None
        };
        if artifacts.master.basis.nrows() != master.num_dofs() || artifacts.slave.basis.nrows() != slave.num_dofs() {
            return Err(RomError::DimensionMismatch("reduced bases do not match the problem meshes".into()));
        }
        let offsets = artifacts
            .reducer
            .master_dofs
            .iter()
            .enumerate()
            .filter_map(|(slot, &d)| {
                master.group_of(d).map(|group| MagicOffset { slot, group, coord: master.mesh.node_coord(d) })
            })
            .collect();
        Ok(RomSolver { artifacts, master, slave, grid, offsets })
    }

    pub fn times(&self, grid: Option<TimeGrid>) -> Vec<f64> {
        match grid {
            Some(g) => (0..=g.steps).map(|n| g.time(n)).collect(),
            None => vec![0.0],
        }
    }

    pub fn solve(&self, mu1: &[f64], mu2: &[f64]) -> Result<RomSolution> {
        self.solve_with_grid(mu1, mu2, self.grid)
    }

    /// Solves on an explicit time grid (ignored for steady problems).
    pub fn solve_with_grid(&self, mu1: &[f64], mu2: &[f64], grid: Option<TimeGrid>) -> Result<RomSolution> {
        let start = Instant::now();
        self.master.check_mu(mu1)?;
        self.slave.check_mu(mu2)?;
        for (desc, mu, which) in [(&self.master, mu1, "master"), (&self.slave, mu2, "slave")] {
            let out = desc.space.out_of_range(mu);
            if !out.is_empty() {
                log::warn!("{which} parameters {mu:?} outside the training box in components {out:?}");
            }
        }
        let grid = if self.grid.is_some() { grid } else { None };
        let times = self.times(grid);
        let mut ops = 0;
        let a = &self.artifacts;
        let master = Side { red: &a.master, desc: &self.master }.run(mu1, &times, grid, None, &mut ops)?;
        let magic: Vec<DVector<f64>> = master
            .iter()
            .zip(&times)
            .map(|(x, &t)| {
                let mut m = &a.coupling.extraction * x;
                for o in &self.offsets {
                    m[o.slot] = self.master.groups[o.group].value.eval(&o.coord, t, mu1);
                }
                m
            })
            .collect();
        let slave = Side { red: &a.slave, desc: &self.slave }.run(
            mu2,
            &times,
            grid,
            Some((&magic, &a.coupling.lift_mass, &a.coupling.lift_terms)),
            &mut ops,
        )?;
        Ok(RomSolution {
            mu1: mu1.to_vec(),
            mu2: mu2.to_vec(),
            times,
            master,
            slave,
            magic,
            diagnostics: OnlineDiagnostics {
                reduced_seconds: start.elapsed().as_secs_f64(),
                expansion_seconds: 0.0,
                full_order_ops: ops,
            },
        })
    }

    /// Slave interface data `W m` at state `n`.
    pub fn interface_data(&self, sol: &RomSolution, n: usize) -> DVector<f64> {
        self.artifacts.reducer.apply_magic(&sol.magic[n])
    }

    pub fn expand_master(&self, sol: &RomSolution, n: usize) -> Vec<f64> {
        let mut u: Vec<f64> = (&self.artifacts.master.basis * &sol.master[n]).data.into();
        self.master.write_constraints(&sol.mu1, sol.times[n], None, &mut u);
        u
    }

    pub fn expand_slave(&self, sol: &RomSolution, n: usize) -> Vec<f64> {
        let d = self.interface_data(sol, n);
        let mut u: Vec<f64> = (&self.artifacts.slave.basis * &sol.slave[n]).data.into();
        self.slave.write_constraints(&sol.mu2, sol.times[n], Some(d.as_slice()), &mut u);
        u
    }

    /// Full-order vectors of every state; records the expansion time.
    pub fn expand(&self, sol: &mut RomSolution) -> CoupledSolution {
        let start = Instant::now();
        let n = sol.times.len();
        let out = CoupledSolution {
            times: sol.times.clone(),
            master: (0..n).map(|k| self.expand_master(sol, k)).collect(),
            slave: (0..n).map(|k| self.expand_slave(sol, k)).collect(),
            interface_data: (0..n).map(|k| self.interface_data(sol, k).data.into()).collect(),
        };
        sol.diagnostics.expansion_seconds = start.elapsed().as_secs_f64();
        out
    }
}
