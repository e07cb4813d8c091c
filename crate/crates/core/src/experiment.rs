//! Experiment drivers shared by the command line and the test suites.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RomError};
use crate::estimator::{estimate_error, ErrorEstimate};
use crate::io::{save_bundle, write_csv, BundleInfo, ExperimentConfig, SweepRow, TestingConfig};
use crate::rom::{
    build_artifacts, collect_snapshots, slave_seed, training_set, training_spectra, BasisStrategy, CoupledFom,
    CoupledSolution, RomArtifacts, RomSolver, Tolerances, TrainingOptions, TrainingSpectra,
};
use crate::sampling::latin_hypercube;

/// Directory of the bundle trained with `tol` under `output`.
pub fn bundle_dir(output: &Path, tol: Tolerances) -> PathBuf {
    output.join("bundles").join(format!("eps_{:e}_{:e}_{:e}", tol.master, tol.deim, tol.slave))
}

/// Paired Latin hypercube test parameters, independent of the training stream.
pub fn test_parameters(fom: &CoupledFom, testing: &TestingConfig) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let m = latin_hypercube(&fom.master.space, testing.n_test, testing.seed, Default::default())?;
    let s = if fom.slave.space.dim() == 0 {
        vec![Vec::new(); testing.n_test]
    } else {
        latin_hypercube(&fom.slave.space, testing.n_test, slave_seed(testing.seed), Default::default())?
    };
    Ok(m.into_iter().zip(s).collect())
}

/// Full-order solution at one test parameter.
#[derive(Debug, Clone)]
pub struct Reference {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub solution: CoupledSolution,
    pub seconds: f64,
}

pub fn reference(fom: &CoupledFom, mu1: &[f64], mu2: &[f64]) -> Result<Reference> {
    let t = Instant::now();
    let solution = fom.solve(mu1, mu2)?;
    Ok(Reference { mu1: mu1.to_vec(), mu2: mu2.to_vec(), solution, seconds: t.elapsed().as_secs_f64() })
}

/// Reference solves run in parallel, so their timings are not comparable to sequential ones.
pub fn references(fom: &CoupledFom, params: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<Reference>> {
    params.par_iter().map(|(m1, m2)| reference(fom, m1, m2)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max_n ||u^n - v^n|| / max_n ||u^n||` over the stored states.
pub fn relative_error(reference: &[Vec<f64>], approx: &[Vec<f64>]) -> f64 {
    let scale = reference.iter().map(|u| norm(u)).fold(0.0, f64::max);
    let err = reference
        .iter()
        .zip(approx)
        .map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Outcome of one online query checked against the full-order model.
#[derive(Debug, Clone, Serialize)]
pub struct QueryReport {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    /// Reduced solve, excluding expansion to full order.
    pub online_s: f64,
    pub expansion_s: f64,
    pub fom_s: f64,
    pub speedup: f64,
    /// Relative slave error, maximum over time.
    pub relative_error: f64,
    /// Slave error bound scaled like `relative_error`.
    pub relative_bound: Option<f64>,
    pub bound_valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ErrorEstimate>,
}

/// Runs the reduced model at the reference parameters and compares.
pub fn evaluate(rom: &RomSolver, fom: &CoupledFom, r: &Reference, with_bound: bool) -> Result<QueryReport> {
    let mut sol = rom.solve(&r.mu1, &r.mu2)?;
    let expanded = rom.expand(&mut sol);
    let relative_error = relative_error(&r.solution.slave, &expanded.slave);
    let scale = r.solution.slave.iter().map(|u| norm(u)).fold(0.0, f64::max);
    let estimate = if with_bound { Some(estimate_error(fom, rom, &sol, Some(&r.solution))?) } else { None };
    let relative_bound = estimate.as_ref().map(|e| if scale > 0.0 { e.max_total() / scale } else { e.max_total() });
    let online_s = sol.diagnostics.reduced_seconds;
    Ok(QueryReport {
        mu1: r.mu1.clone(),
        mu2: r.mu2.clone(),
        online_s,
        expansion_s: sol.diagnostics.expansion_seconds,
        fom_s: r.seconds,
        speedup: if online_s > 0.0 { r.seconds / online_s } else { f64::INFINITY },
        relative_error,
        bound_valid: estimate.as_ref().map(ErrorEstimate::is_valid),
        relative_bound,
        estimate,
    })
}

/// Snapshot-derived data shared by every tolerance triple of one config.
pub struct Trained {
    pub fom: CoupledFom,
    pub options: TrainingOptions,
    pub set: crate::rom::TrainingSet,
    pub spectra: Option<TrainingSpectra>,
    pub snapshots_s: f64,
}

pub fn train(cfg: &ExperimentConfig) -> Result<Trained> {
    let t = Instant::now();
    let fom = CoupledFom::new(&cfg.problem)?;
    let options = cfg.training.options();
    let set = training_set(&fom, &options)?;
    let spectra = match options.basis {
        BasisStrategy::Pod => Some(training_spectra(&collect_snapshots(&fom, &set)?)?),
        BasisStrategy::Full => None,
    };
    Ok(Trained { fom, options, set, spectra, snapshots_s: t.elapsed().as_secs_f64() })
}

impl Trained {
    pub fn artifacts(&self, tol: Tolerances) -> Result<RomArtifacts> {
        let mut art = build_artifacts(&self.fom, self.spectra.as_ref(), tol, &self.options, self.set.clone())?;
        art.timings.snapshots_s = self.snapshots_s;
        art.timings.total_s += self.snapshots_s;
        Ok(art)
    }
}

fn ensure_output(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| RomError::Config {
        path: Some(dir.into()),
        message: format!("output directory is not writable: {e}"),
    })
}

/// Trains once and writes one bundle per tolerance triple, concurrently.
pub fn run_offline_config(cfg: &ExperimentConfig) -> Result<Vec<BundleInfo>> {
    ensure_output(&cfg.output)?;
    let trained = train(cfg)?;
    cfg.training
        .triples()
        .par_iter()
        .map(|&tol| save_bundle(bundle_dir(&cfg.output, tol), &trained.artifacts(tol)?))
        .collect()
}

/// Sweep result: one row per triple plus the per-query reports behind it.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub queries: Vec<Vec<QueryReport>>,
    pub bundles: Vec<String>,
}

/// Trains, writes every bundle and evaluates each against shared references.
///
/// Writes `sweep.csv` into the output directory.
pub fn run_sweep(cfg: &ExperimentConfig, with_bound: bool) -> Result<SweepResult> {
    ensure_output(&cfg.output)?;
    let trained = train(cfg)?;
    let params = test_parameters(&trained.fom, &cfg.testing)?;
    let refs = references(&trained.fom, &params)?;
    let per_triple: Vec<(SweepRow, Vec<QueryReport>, String)> = cfg
        .training
        .triples()
        .par_iter()
        .map(|&tol| {
            let art = trained.artifacts(tol)?;
            let info = save_bundle(bundle_dir(&cfg.output, tol), &art)?;
            let rom = RomSolver::new(art)?;
            let reports = refs.iter().map(|r| evaluate(&rom, &trained.fom, r, with_bound)).collect::<Result<Vec<_>>>()?;
            let n = reports.len() as f64;
            let row = SweepRow {
                eps1: tol.master,
                eps_d: tol.deim,
                eps2: tol.slave,
                mean_error: reports.iter().map(|q| q.relative_error).sum::<f64>() / n,
                mean_bound: reports.iter().map(|q| q.relative_bound.unwrap_or(f64::NAN)).sum::<f64>() / n,
                online_s: reports.iter().map(|q| q.online_s).sum::<f64>() / n,
                n1: rom.artifacts.n1(),
                m: rom.artifacts.num_deim_points(),
                n2: rom.artifacts.n2(),
            };
            Ok((row, reports, info.hash))
        })
        .collect::<Result<_>>()?;
    let mut result = SweepResult { rows: Vec::new(), queries: Vec::new(), bundles: Vec::new() };
    for (row, q, h) in per_triple {
        result.rows.push(row);
        result.queries.push(q);
        result.bundles.push(h);
    }
    write_csv(cfg.output.join("sweep.csv"), &result.rows)?;
    Ok(result)
}
