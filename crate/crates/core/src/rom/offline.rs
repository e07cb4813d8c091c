//! Offline phase: sampling, full-order snapshots, POD, DEIM and projection.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::deim::{reducer_from_basis, InterfaceReducer};
use crate::error::{Result, RomError};
use crate::pod::{fix_signs, pod_spectrum, truncate, zero_interface_rows, PodSpectrum, ReducedBasis, SnapshotSet};
use crate::sampling::latin_hypercube;

use super::artifacts::{
    BasisStrategy, CouplingProducts, OfflineTimings, Pairing, ReducedModel, RomArtifacts, Tolerances,
    TrainingOptions, TrainingSet,
};
use super::fom::CoupledFom;

/// Seed offset for the slave parameter stream.
const SLAVE_SEED_SALT: u64 = 0x5eed_51a7e;

/// Seed of the slave parameter stream derived from the training seed.
pub fn slave_seed(seed: u64) -> u64 {
    seed ^ SLAVE_SEED_SALT
}

/// Latin hypercube training parameters for both models.
pub fn training_set(fom: &CoupledFom, opts: &TrainingOptions) -> Result<TrainingSet> {
    let master = latin_hypercube(&fom.master.space, opts.n_train, opts.seed, opts.sampling)?;
    let slave_space = &fom.slave.space;
    let slave = if slave_space.dim() == 0 {
        vec![Vec::new()]
    } else {
        latin_hypercube(slave_space, opts.n_train, slave_seed(opts.seed), opts.sampling)?
    };
    let pairs = match opts.pairing {
        Pairing::Paired => (0..master.len()).map(|k| (k, k.min(slave.len() - 1))).collect(),
        Pairing::Tensor => (0..master.len()).flat_map(|i| (0..slave.len()).map(move |j| (i, j))).collect(),
    };
    Ok(TrainingSet { master, slave, pairs })
}

/// Master, slave and transferred-interface snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSnapshots {
    /// Master states with Dirichlet rows zeroed.
    pub master: SnapshotSet,
    /// Slave states with every constrained row (interface included) zeroed.
    pub slave: SnapshotSet,
    /// Master traces transferred onto the slave interface.
    pub interface: SnapshotSet,
}

/// State indices used as snapshots: all steps after the initial one.
fn snapshot_steps(fom: &CoupledFom) -> std::ops::RangeInclusive<usize> {
    match fom.grid {
        Some(g) => 1..=g.steps,
        None => 0..=0,
    }
}

/// Solves the full-order coupled problem at every training pair.
///
/// Solves run in parallel; results are committed in training order.
pub fn collect_snapshots(fom: &CoupledFom, set: &TrainingSet) -> Result<TrainingSnapshots> {
    let steps = snapshot_steps(fom);
    let times = fom.times(fom.grid);
    let mut master_needed: Vec<usize> = set.pairs.iter().map(|p| p.0).collect();
    master_needed.sort_unstable();
    master_needed.dedup();
    let master_solutions: Vec<(usize, Vec<Vec<f64>>)> = master_needed
        .par_iter()
        .map(|&i| fom.solve_master(&set.master[i]).map(|s| (i, s)))
        .collect::<Result<Vec<_>>>()?;
    let lookup = |i: usize| &master_solutions[master_solutions.binary_search_by_key(&i, |e| e.0).unwrap()].1;
    let interface_data: Vec<Vec<Vec<f64>>> = master_solutions
        .iter()
        .map(|(_, traj)| traj.iter().map(|u| fom.transfer.apply(&fom.master.interface.restrict(u))).collect())
        .collect();
    let slave_solutions: Vec<Vec<Vec<f64>>> = set
        .pairs
        .par_iter()
        .map(|&(i, j)| {
            let k = master_solutions.binary_search_by_key(&i, |e| e.0).unwrap();
            fom.solve_slave(&set.slave[j], &interface_data[k])
        })
        .collect::<Result<Vec<_>>>()?;

    let n1 = fom.master.num_dofs();
    let n2 = fom.slave.num_dofs();
    let ng = fom.slave.interface.len();
    let mut master_cols = Vec::new();
    let mut master_params = Vec::new();
    let mut master_times = Vec::new();
    let mut iface_cols = Vec::new();
    for (k, (i, _)) in master_solutions.iter().enumerate() {
        let traj = lookup(*i);
        for n in steps.clone() {
            master_cols.push(traj[n].clone());
            iface_cols.push(interface_data[k][n].clone());
            master_params.push(set.master[*i].clone());
            master_times.push(times[n]);
        }
    }
    let mut slave_cols = Vec::new();
    let mut slave_params = Vec::new();
    let mut slave_times = Vec::new();
    for (p, traj) in set.pairs.iter().zip(&slave_solutions) {
        for n in steps.clone() {
            slave_cols.push(traj[n].clone());
            slave_params.push(set.slave[p.1].clone());
            slave_times.push(times[n]);
        }
    }
    let mut master = SnapshotSet::from_columns(n1, &master_cols, master_params.clone(), master_times.clone());
    zero_interface_rows(&mut master.matrix, &fom.master.constrained);
    let mut slave = SnapshotSet::from_columns(n2, &slave_cols, slave_params, slave_times);
    zero_interface_rows(&mut slave.matrix, &fom.slave.constrained);
    let interface = SnapshotSet::from_columns(ng, &iface_cols, master_params, master_times);
    Ok(TrainingSnapshots { master, slave, interface })
}

/// POD spectra of the three snapshot sets, reusable across tolerances.
#[derive(Debug, Clone)]
pub struct TrainingSpectra {
    pub master: PodSpectrum,
    pub slave: PodSpectrum,
    pub interface: PodSpectrum,
}

pub fn training_spectra(snaps: &TrainingSnapshots) -> Result<TrainingSpectra> {
    let name = |what: &str, e: RomError| match e {
        RomError::DegenerateSnapshots(m) => RomError::DegenerateSnapshots(format!("{what}: {m}")),
        other => other,
    };
    let (master, (slave, interface)) = rayon::join(
        || pod_spectrum(&snaps.master.matrix).map_err(|e| name("master", e)),
        || {
            rayon::join(
                || pod_spectrum(&snaps.slave.matrix).map_err(|e| name("slave", e)),
                || pod_spectrum(&snaps.interface.matrix).map_err(|e| name("interface", e)),
            )
        },
    );
    Ok(TrainingSpectra { master: master?, slave: slave?, interface: interface? })
}

/// Identity columns on the dofs not listed in `constrained`.
fn free_dof_basis(n: usize, constrained: &[usize]) -> DMatrix<f64> {
    let free: Vec<usize> = (0..n).filter(|d| constrained.binary_search(d).is_err()).collect();
    let mut v = DMatrix::zeros(n, free.len());
    for (k, &d) in free.iter().enumerate() {
        v[(d, k)] = 1.0;
    }
    v
}

fn full_basis(n: usize, constrained: &[usize], tol: f64) -> ReducedBasis {
    let vectors = free_dof_basis(n, constrained);
    let k = vectors.ncols();
    ReducedBasis { vectors, singular_values: vec![1.0; k], tolerance: tol }
}

/// Projects both models and the interface coupling for one tolerance triple.
pub fn build_artifacts(
    fom: &CoupledFom,
    spectra: Option<&TrainingSpectra>,
    tolerances: Tolerances,
    options: &TrainingOptions,
    training: TrainingSet,
) -> Result<RomArtifacts> {
    let t0 = Instant::now();
    let (b1, bd, b2) = match options.basis {
        BasisStrategy::Pod => {
            let sp = spectra.ok_or_else(|| RomError::InsufficientSnapshots("POD bases need snapshot spectra".into()))?;
            (
                truncate(&sp.master, tolerances.master)?,
                truncate(&sp.interface, tolerances.deim)?,
                truncate(&sp.slave, tolerances.slave)?,
            )
        }
        BasisStrategy::Full => {
            let ng = fom.slave.interface.len();
            let mut phi = DMatrix::identity(ng, ng);
            fix_signs(&mut phi);
            (
                full_basis(fom.master.num_dofs(), &fom.master.constrained, tolerances.master),
                ReducedBasis { vectors: phi, singular_values: vec![1.0; ng], tolerance: tolerances.deim },
                full_basis(fom.slave.num_dofs(), &fom.slave.constrained, tolerances.slave),
            )
        }
    };
    let pod_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let reducer = reducer_from_basis(bd, &fom.master.interface, &fom.slave.interface)?;
    let deim_s = t1.elapsed().as_secs_f64();
    let t2 = Instant::now();
    let (master, slave) = rayon::join(
        || ReducedModel::build(&fom.master, b1.vectors, b1.singular_values, options.reassemble_loads),
        || ReducedModel::build(&fom.slave, b2.vectors, b2.singular_values, options.reassemble_loads),
    );
    let (master, slave) = (master?, slave?);
    let coupling = coupling_products(fom, &reducer, &master, &slave);
    let projection_s = t2.elapsed().as_secs_f64();
    log::info!(
        "offline: n1 = {}, M = {}, n2 = {} (tolerances {:?})",
        master.dim(),
        reducer.num_points(),
        slave.dim(),
        tolerances
    );
    Ok(RomArtifacts {
        problem: fom.spec.clone(),
        tolerances,
        options: *options,
        training,
        master,
        slave,
        reducer,
        coupling,
        timings: OfflineTimings { snapshots_s: 0.0, pod_s, deim_s, projection_s, total_s: t0.elapsed().as_secs_f64() },
    })
}

pub fn coupling_products(
    fom: &CoupledFom,
    reducer: &InterfaceReducer,
    master: &ReducedModel,
    slave: &ReducedModel,
) -> CouplingProducts {
    let extraction = reducer.extraction(&master.basis);
    let full_transfer = &reducer.interpolant * &extraction;
    let lift_terms: Vec<DMatrix<f64>> =
        fom.slave.matrices.iter().map(|a| reducer.lifting(a, &slave.basis, &fom.slave.interface)).collect();
    let lift_mass = reducer.lifting(&fom.slave.mass, &slave.basis, &fom.slave.interface);
    let lift_terms_reduced = lift_terms.iter().map(|l| l * &extraction).collect();
    let lift_mass_reduced = &lift_mass * &extraction;
    CouplingProducts { extraction, full_transfer, lift_terms, lift_mass, lift_terms_reduced, lift_mass_reduced }
}

/// Complete offline phase for one tolerance triple.
pub fn run_offline(fom: &CoupledFom, options: &TrainingOptions, tolerances: Tolerances) -> Result<RomArtifacts> {
    let t0 = Instant::now();
    let set = training_set(fom, options)?;
    let (spectra, snapshots_s) = match options.basis {
        BasisStrategy::Pod => {
            let snaps = collect_snapshots(fom, &set)?;
            let s = t0.elapsed().as_secs_f64();
            (Some(training_spectra(&snaps)?), s)
        }
        BasisStrategy::Full => (None, 0.0),
    };
    let mut art = build_artifacts(fom, spectra.as_ref(), tolerances, options, set)?;
    art.timings.snapshots_s = snapshots_s;
    art.timings.total_s = t0.elapsed().as_secs_f64();
    Ok(art)
}

/// Offline phase for a grid of tolerance triples sharing one snapshot set.
pub fn run_offline_grid(
    fom: &CoupledFom,
    options: &TrainingOptions,
    grid: &[Tolerances],
) -> Result<Vec<RomArtifacts>> {
    let t0 = Instant::now();
    let set = training_set(fom, options)?;
    let spectra = match options.basis {
        BasisStrategy::Pod => Some(training_spectra(&collect_snapshots(fom, &set)?)?),
        BasisStrategy::Full => None,
    };
    let snapshots_s = t0.elapsed().as_secs_f64();
    grid.iter()
        .map(|&tol| {
            let mut art = build_artifacts(fom, spectra.as_ref(), tol, options, set.clone())?;
            art.timings.snapshots_s = snapshots_s;
            art.timings.total_s += snapshots_s;
            Ok(art)
        })
        .collect()
}
