//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria run one after another so timings are not distorted by other
//! tests. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 4 6`. The process exits non-zero if any
//! selected criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use onewayrom::deim::{deim_indices, InterfaceReducer};
use onewayrom::experiment::{evaluate, references, run_offline_config, run_sweep, test_parameters};
use onewayrom::expr::Expr;
use onewayrom::fem::{assemble_diffusion, assemble_load, l2_error, DirichletSystem, TimeGrid};
use onewayrom::io::{ExperimentConfig, SweepRow, TestingConfig, ToleranceGrid, TrainingConfig};
use onewayrom::mesh::{BoxFace, BoxSpec, Mesh};
use onewayrom::pod::{energy_truncation, pod};
use onewayrom::rom::problems::{heat_laplace, steady_reaction_diffusion};
use onewayrom::rom::{
    fom_coupled_solve, run_offline, BasisStrategy, CoupledFom, ForcingTermSpec, InterfaceSpec, ModelSpec,
    OperatorTermSpec, Pairing, ProblemSpec, RomSolver, TimeSpec, Tolerances, TrainingOptions,
};
use onewayrom::sampling::{LhsMode, ParameterRange, ParameterSpace};
use onewayrom::ExprSource;

// Pinned tolerances and limits.
const Q1_RATE: [f64; 2] = [1.8, 2.2];
const Q2_RATE: [f64; 2] = [2.7, 3.3];
const POD_ORACLE_TOL: f64 = 1e-10;
const DEIM_RECON_TOL: f64 = 1e-10;
const CONFORMING_TOL: f64 = 1e-8;
const HEAT_ERROR_TOL: f64 = 1e-3;
const PLATEAU_FACTOR: f64 = 10.0;
const SPEEDUP_MIN: f64 = 5.0;
const BDF1_RATE: [f64; 2] = [0.8, 1.2];
const LIMITS_S: [f64; 9] = [30.0, 5.0, 5.0, 60.0, 600.0, 600.0, 300.0, 120.0, 120.0];

struct Outcome {
    pass: bool,
    summary: String,
}

/// Bound checks collected by criteria 4 and 5 for criterion 6.
#[derive(Default)]
struct Context {
    conforming_bounds: Option<Vec<(f64, f64)>>,
    heat_bounds: Option<Vec<(f64, f64)>>,
}

fn in_range(v: f64, r: [f64; 2]) -> bool {
    v >= r[0] && v <= r[1]
}

fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn fmt_sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

// 1: manufactured Poisson problem on the unit cube.
fn fe_convergence() -> Outcome {
    let src = "3 * pi^2 * sin(pi * x) * sin(pi * y) * sin(pi * z)";
    let exact = |x: &[f64; 3]| {
        let p = std::f64::consts::PI;
        (p * x[0]).sin() * (p * x[1]).sin() * (p * x[2]).sin()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (order, range) in [(1, Q1_RATE), (2, Q2_RATE)] {
        let mut errs = Vec::new();
        for n in [4, 8, 16] {
            let mesh = Mesh::new(&BoxSpec::unit_cube(n, order)).unwrap();
            let k = assemble_diffusion(&mesh, &Expr::constant(1.0), &[], 0.0).unwrap();
            let f = assemble_load(&mesh, &Expr::parse(src, &[]).unwrap(), &[], 0.0);
            let mut dofs: Vec<usize> = mesh.faces().flat_map(|face| mesh.face_dofs(face)).collect();
            dofs.sort_unstable();
            dofs.dedup();
            let g = vec![0.0; dofs.len()];
            let u = DirichletSystem::new(k, &dofs).unwrap().solve(&f, &g).unwrap();
            errs.push(l2_error(&mesh, &u, exact));
        }
        let r = rates(&errs);
        pass &= r.iter().all(|&x| in_range(x, range));
        parts.push(format!("Q{order} L2 errors [{}] rates [{}] in {range:?}", fmt_sci(&errs), fmt_list(&r)));
    }
    Outcome { pass, summary: parts.join("; ") }
}

// 2: POD against a dense SVD oracle.
fn pod_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_sv: f64 = 0.0;
    let mut worst_proj: f64 = 0.0;
    let mut energy_ok = true;
    let mut minimal_ok = true;
    let sets = 20;
    let tolerances = [1e-1, 1e-2, 1e-3, 1e-4];
    for set in 0..sets {
        // half plain uniform, half with a geometrically decaying spectrum
        let a = DMatrix::from_fn(200, 40, |_, _| rng.random_range(-1.0..1.0));
        let s = if set % 2 == 0 {
            a
        } else {
            let b = DMatrix::from_fn(40, 40, |_, _| rng.random_range(-1.0..1.0));
            let decay = DMatrix::from_diagonal(&DVector::from_fn(40, |i, _| 0.6f64.powi(i as i32)));
            &a * decay * b
        };
        let oracle = s.clone().svd(true, false);
        let mut sv: Vec<f64> = oracle.singular_values.iter().copied().collect();
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
        sv = order.iter().map(|&i| oracle.singular_values[i]).collect();
        let u_all = oracle.u.unwrap();
        let total: f64 = sv.iter().map(|x| x * x).sum();
        for &tol in &tolerances {
            let basis = pod(&s, tol).unwrap();
            let n = basis.vectors.ncols();
            let tail = |k: usize| sv[k..].iter().map(|x| x * x).sum::<f64>();
            energy_ok &= tail(n) <= tol * tol * total * (1.0 + 1e-12);
            minimal_ok &= n == 0 || tail(n - 1) > tol * tol * total;
            minimal_ok &= n == energy_truncation(&sv, tol);
            for (k, &x) in sv.iter().enumerate().take(basis.singular_values.len()) {
                worst_sv = worst_sv.max((basis.singular_values[k] - x).abs() / sv[0]);
            }
            let u = DMatrix::from_fn(200, n, |i, j| u_all[(i, order[j])]);
            let proj = (&basis.vectors * basis.vectors.transpose() - &u * u.transpose()).norm();
            worst_proj = worst_proj.max(proj);
        }
    }
    let pass = energy_ok && minimal_ok && worst_sv <= POD_ORACLE_TOL && worst_proj <= POD_ORACLE_TOL;
    Outcome {
        pass,
        summary: format!(
            "{sets} random 200x40 sets x {} tolerances: energy bound {energy_ok}, minimal n {minimal_ok}, \
             max singular value deviation {worst_sv:.2e}, max projector deviation {worst_proj:.2e} (limit {POD_ORACLE_TOL:e})",
            tolerances.len()
        ),
    }
}

/// Greedy DEIM written directly from its definition with dense solves.
fn brute_force_deim(phi: &DMatrix<f64>) -> Vec<usize> {
    let n = phi.nrows();
    let mut idx: Vec<usize> = Vec::new();
    for j in 0..phi.ncols() {
        let col = phi.column(j).into_owned();
        let r = if idx.is_empty() {
            col
        } else {
            let k = idx.len();
            let p = DMatrix::from_fn(k, k, |a, b| phi[(idx[a], b)]);
            let rhs = DVector::from_fn(k, |a, _| col[idx[a]]);
            let c = p.try_inverse().unwrap() * rhs;
            col - phi.columns(0, k) * c
        };
        let mut best = 0;
        for i in 1..n {
            if r[i].abs() > r[best].abs() {
                best = i;
            }
        }
        idx.push(best);
    }
    idx
}

// 3: DEIM index selection and interpolation.
fn deim_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut matches = 0;
    let mut worst: f64 = 0.0;
    let bases = 20;
    for t in 0..bases {
        let (n, m) = (60 + 5 * t, 3 + t % 8);
        let raw = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let phi = raw.qr().q();
        let idx = deim_indices(&phi).unwrap();
        if idx == brute_force_deim(&phi) {
            matches += 1;
        }
        let red = InterfaceReducer::from_parts(phi.clone(), idx.clone(), idx.clone(), vec![1.0; m], 0.0).unwrap();
        for _ in 0..5 {
            let c = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
            let v = &phi * c;
            let at = DVector::from_fn(m, |k, _| v[idx[k]]);
            let rec = &red.interpolant * at;
            worst = worst.max((rec - &v).norm() / v.norm());
        }
    }
    Outcome {
        pass: matches == bases && worst <= DEIM_RECON_TOL,
        summary: format!(
            "greedy indices match brute-force oracle on {matches}/{bases} bases; \
             max relative reconstruction error {worst:.2e} (limit {DEIM_RECON_TOL:e})"
        ),
    }
}

fn full_options() -> TrainingOptions {
    TrainingOptions { basis: BasisStrategy::Full, ..TrainingOptions::new(1, 1) }
}

// 4: conforming 8^3 meshes with full bases reproduce the full-order model.
fn conforming_exactness(ctx: &mut Context) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut bounds = Vec::new();
    for (name, spec) in [("steady", steady_reaction_diffusion(8, 8, 1, 1)), ("heat", heat_laplace(8, 8, 10))] {
        let fom = CoupledFom::new(&spec).unwrap();
        assert!(fom.transfer.is_conforming());
        let art = run_offline(&fom, &full_options(), Tolerances::uniform(0.5)).unwrap();
        let m = art.num_deim_points();
        let ng = fom.slave.interface.len();
        let rom = RomSolver::new(art).unwrap();
        let params = test_parameters(&fom, &TestingConfig { n_test: 5, seed: 4 }).unwrap();
        let refs = references(&fom, &params).unwrap();
        let mut worst: f64 = 0.0;
        for r in &refs {
            let q = evaluate(&rom, &fom, r, true).unwrap();
            worst = worst.max(q.relative_error);
            bounds.push((q.relative_error, q.relative_bound.unwrap()));
        }
        pass &= worst <= CONFORMING_TOL && m == ng;
        parts.push(format!("{name}: M = {m} of {ng}, max relative slave error {worst:.2e}"));
    }
    ctx.conforming_bounds = Some(bounds);
    Outcome { pass, summary: format!("{} (limit {CONFORMING_TOL:e})", parts.join("; ")) }
}

fn heat_config(out: &std::path::Path, grid: ToleranceGrid) -> ExperimentConfig {
    ExperimentConfig {
        problem: heat_laplace(8, 4, 50),
        training: TrainingConfig {
            n_train: 20,
            seed: 5,
            sampling: LhsMode::default(),
            pairing: Pairing::Paired,
            basis: BasisStrategy::Pod,
            reassemble_loads: false,
            tolerances: None,
            grid: Some(grid),
        },
        testing: TestingConfig { n_test: 5, seed: 55 },
        output: out.to_path_buf(),
    }
}

fn find(rows: &[SweepRow], m: f64, d: f64, s: f64) -> &SweepRow {
    rows.iter().find(|r| r.eps1 == m && r.eps_d == d && r.eps2 == s).unwrap()
}

// 5: non-conforming heat/Laplace pair.
fn heat_laplace_behaviour(ctx: &mut Context) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = heat_config(
        dir.path(),
        ToleranceGrid { master: vec![1e-2, 1e-5], deim: vec![1e-2, 1e-3, 1e-4, 1e-5], slave: vec![1e-2, 1e-5] },
    );
    let res = run_sweep(&cfg, true).unwrap();
    let mut bounds = Vec::new();
    for q in res.queries.iter().flatten() {
        bounds.push((q.relative_error, q.relative_bound.unwrap()));
    }
    ctx.heat_bounds = Some(bounds);
    for r in &res.rows {
        println!(
            "    eps = ({:.0e}, {:.0e}, {:.0e}): n1 = {}, M = {}, n2 = {}, mean error {:.3e}, mean bound {:.3e}",
            r.eps1, r.eps_d, r.eps2, r.n1, r.m, r.n2, r.mean_error, r.mean_bound
        );
    }
    let tight = find(&res.rows, 1e-5, 1e-5, 1e-5).mean_error;
    let loose = find(&res.rows, 1e-2, 1e-2, 1e-2).mean_error;
    let loose_master = find(&res.rows, 1e-2, 1e-5, 1e-5).mean_error;
    let gain = loose / loose_master;
    let a = tight <= HEAT_ERROR_TOL;
    let b = gain < PLATEAU_FACTOR;
    Outcome {
        pass: a && b,
        summary: format!(
            "(a) mean relative slave error at eps = 1e-5: {tight:.3e} (limit {HEAT_ERROR_TOL:e}) {}; \
             (b) eps1 = 1e-2, tightening eps_D, eps2 1e-2 -> 1e-5 improves {loose:.3e} -> {loose_master:.3e}, \
             factor {gain:.2} (limit < {PLATEAU_FACTOR}) {}",
            if a { "ok" } else { "FAILED" },
            if b { "ok" } else { "FAILED" }
        ),
    }
}

// 6: bounds dominate the measured error on every query.
fn estimator_validity(ctx: &mut Context) -> Outcome {
    if ctx.conforming_bounds.is_none() {
        conforming_exactness(ctx);
    }
    if ctx.heat_bounds.is_none() {
        heat_laplace_behaviour(ctx);
    }
    let dir = tempfile::tempdir().unwrap();
    let grid = vec![1e-2, 1e-3, 1e-4, 1e-5];
    let mut cfg = heat_config(dir.path(), ToleranceGrid { master: grid.clone(), deim: grid.clone(), slave: grid.clone() });
    cfg.problem = steady_reaction_diffusion(8, 4, 1, 1);
    cfg.training.grid = None;
    cfg.training.tolerances = None;
    let mut steady = Vec::new();
    for eps in grid {
        cfg.training.tolerances = Some(Tolerances::uniform(eps));
        let res = run_sweep(&cfg, true).unwrap();
        steady.extend(res.queries.iter().flatten().map(|q| (q.relative_error, q.relative_bound.unwrap())));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, set) in [
        ("conforming (4)", ctx.conforming_bounds.as_ref().unwrap()),
        ("heat sweep (5)", ctx.heat_bounds.as_ref().unwrap()),
        ("steady reaction-diffusion", &steady),
    ] {
        let valid = set.iter().filter(|(e, b)| b >= e).count();
        let eff: Vec<f64> = set.iter().filter(|(e, _)| *e > 0.0).map(|(e, b)| b / e).collect();
        let (lo, hi) = eff.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        pass &= valid == set.len();
        let eff = if eff.is_empty() { "n/a".to_string() } else { format!("{lo:.2e}..{hi:.2e}") };
        parts.push(format!("{name}: {valid}/{} valid, effectivity {eff}", set.len()));
    }
    Outcome { pass, summary: parts.join("; ") }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

// 7: online query versus the full-order coupled solve at 16^3.
fn online_speedup() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("heat 16^3/8^3", heat_laplace(16, 8, 50)), ("steady 16^3/8^3", steady_reaction_diffusion(16, 8, 1, 1))] {
        let fom = CoupledFom::new(&spec).unwrap();
        let n1 = fom.master.num_dofs();
        let art = run_offline(&fom, &TrainingOptions::new(8, 3), Tolerances::uniform(1e-4)).unwrap();
        let rom = RomSolver::new(art).unwrap();
        let params = test_parameters(&fom, &TestingConfig { n_test: 3, seed: 8 }).unwrap();
        let (mut t_fom, mut t_solve, mut t_rom) = (Vec::new(), Vec::new(), Vec::new());
        for (m1, m2) in &params {
            let t = Instant::now();
            fom_coupled_solve(&spec, m1, m2).unwrap();
            t_fom.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            fom.solve(m1, m2).unwrap();
            t_solve.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            rom.solve(m1, m2).unwrap();
            t_rom.push(t.elapsed().as_secs_f64());
        }
        let (f, s, r) = (median(t_fom), median(t_solve), median(t_rom));
        pass &= f / r >= SPEEDUP_MIN && n1 >= 4913;
        parts.push(format!(
            "{name} (N1 = {n1}): fom_coupled_solve {f:.3e} s, online {r:.3e} s, speedup {:.1}x (solve only {:.1}x)",
            f / r,
            s / r
        ));
    }
    Outcome { pass, summary: format!("{} (limit >= {SPEEDUP_MIN}x)", parts.join("; ")) }
}

// 8: identical seeds give identical bundles.
fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = heat_config(
        &root.path().join("a"),
        ToleranceGrid { master: vec![1e-3, 1e-5], deim: vec![1e-4], slave: vec![1e-4] },
    );
    cfg.problem = heat_laplace(6, 4, 20);
    cfg.training.n_train = 8;
    let a = run_offline_config(&cfg).unwrap();
    cfg.output = root.path().join("b");
    let b = run_offline_config(&cfg).unwrap();
    let again = run_offline_config(&cfg).unwrap();
    let mut identical_files = true;
    for (x, y) in a.iter().zip(&b) {
        for name in x.manifest.files.keys() {
            identical_files &= std::fs::read(x.dir.join(name)).unwrap() == std::fs::read(y.dir.join(name)).unwrap();
        }
    }
    let hashes_equal = a.iter().zip(&b).all(|(x, y)| x.hash == y.hash) && b.iter().zip(&again).all(|(x, y)| x.hash == y.hash);
    Outcome {
        pass: hashes_equal && identical_files && a.len() == 2,
        summary: format!(
            "{} bundles, hashes equal across runs: {hashes_equal}, files byte-identical: {identical_files} ({})",
            a.len(),
            a.iter().map(|x| &x.hash[..12]).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// `u' + k u = cos t + k sin t + (k - 1) e^{-t}`, `u(0) = 1`, spatially uniform; `u = e^{-t} + sin t`.
fn scalar_problem() -> ProblemSpec {
    let cell = |x0: f64, tag: BoxFace| BoxSpec {
        origin: vec![x0, 0.0, 0.0],
        extent: vec![1.0; 3],
        subdivisions: vec![1; 3],
        order: 1,
        tags: [(tag, "interface".to_string())].into_iter().collect(),
    };
    let e = |s: &str| ExprSource(s.into());
    ProblemSpec {
        master: ModelSpec {
            mesh: cell(0.0, BoxFace::XMax),
            parameters: ParameterSpace { params: vec![ParameterRange { name: "k".into(), range: [0.5, 2.0] }] },
            operator: vec![OperatorTermSpec::Reaction { theta: e("k"), field: e("1") }],
            forcing: vec![ForcingTermSpec { theta: e("cos(t) + k * sin(t) + (k - 1) * exp(-t)"), field: e("1") }],
            dirichlet: Vec::new(),
            initial: e("1"),
            time_dependent: true,
        },
        slave: ModelSpec {
            mesh: cell(1.0, BoxFace::XMin),
            parameters: ParameterSpace::default(),
            operator: vec![OperatorTermSpec::Diffusion { theta: e("1"), field: e("1") }],
            forcing: Vec::new(),
            dirichlet: Vec::new(),
            initial: e("0"),
            time_dependent: false,
        },
        interface: InterfaceSpec { master_tag: "interface".into(), slave_tag: "interface".into(), conforming: None },
        time: Some(TimeSpec { dt: 1.0 / 80.0, steps: 80 }),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

// 9: first-order temporal convergence of full and reduced solvers, max-over-time errors.
fn bdf1_order() -> Outcome {
    let steps = [10usize, 20, 40, 80];
    let grid = |n: usize| Some(TimeGrid::new(1.0 / n as f64, n));
    let mut pass = true;
    let mut parts = Vec::new();

    let spec = scalar_problem();
    let fom = CoupledFom::new(&spec).unwrap();
    let rom = RomSolver::new(run_offline(&fom, &TrainingOptions::new(4, 9), Tolerances::uniform(1e-8)).unwrap()).unwrap();
    let k = 1.3;
    let exact = |t: f64| (-t).exp() + t.sin();
    let (mut ef, mut er) = (Vec::new(), Vec::new());
    for &n in &steps {
        let s = fom.solve_with_grid(&[k], &[], grid(n)).unwrap();
        let r = rom.solve_with_grid(&[k], &[], grid(n)).unwrap();
        let (mut a, mut b): (f64, f64) = (0.0, 0.0);
        for j in 0..=n {
            let u = exact(s.times[j]);
            a = a.max((s.master[j][0] - u).abs());
            b = b.max((rom.expand_master(&r, j)[0] - u).abs());
        }
        ef.push(a);
        er.push(b);
    }
    for (label, e) in [("scalar full", &ef), ("scalar reduced", &er)] {
        let r = rates(e);
        pass &= r.iter().all(|&x| in_range(x, BDF1_RATE));
        parts.push(format!("{label} rates [{}]", fmt_list(&r)));
    }

    // heat: errors against a fine-step solution of the same discrete system at shared instants
    let spec = heat_laplace(4, 2, 80);
    let fom = CoupledFom::new(&spec).unwrap();
    let rom = RomSolver::new(run_offline(&fom, &TrainingOptions::new(8, 9), Tolerances::uniform(1e-7)).unwrap()).unwrap();
    let mu = [0.2];
    let fine = 1280;
    let f_ref = fom.solve_with_grid(&mu, &[], grid(fine)).unwrap();
    let r_sol = rom.solve_with_grid(&mu, &[], grid(fine)).unwrap();
    let (mut ef, mut er) = (Vec::new(), Vec::new());
    for &n in &steps {
        let s = fom.solve_with_grid(&mu, &[], grid(n)).unwrap();
        let r = rom.solve_with_grid(&mu, &[], grid(n)).unwrap();
        let stride = fine / n;
        let (mut a, mut b): (f64, f64) = (0.0, 0.0);
        for j in 0..=n {
            a = a.max(dist(&s.master[j], &f_ref.master[j * stride]));
            b = b.max(dist(&rom.expand_master(&r, j), &rom.expand_master(&r_sol, j * stride)));
        }
        ef.push(a);
        er.push(b);
    }
    for (label, e) in [("heat full", &ef), ("heat reduced", &er)] {
        let r = rates(e);
        pass &= r.iter().all(|&x| in_range(x, BDF1_RATE));
        parts.push(format!("{label} rates [{}]", fmt_list(&r)));
    }
    Outcome { pass, summary: format!("{} in {BDF1_RATE:?}", parts.join("; ")) }
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);
    let names = [
        "FE convergence",
        "POD optimality",
        "DEIM exactness",
        "conforming-interface exactness",
        "heat/Laplace non-conforming behaviour",
        "estimator validity",
        "online speedup",
        "determinism",
        "BDF1 order",
    ];
    let mut ctx = Context::default();
    let mut failed = 0;
    for (i, name) in names.iter().enumerate() {
        let k = i + 1;
        if !wanted(k) {
            continue;
        }
        let t = Instant::now();
        let out = match k {
            1 => fe_convergence(),
            2 => pod_optimality(),
            3 => deim_exactness(),
            4 => conforming_exactness(&mut ctx),
            5 => heat_laplace_behaviour(&mut ctx),
            6 => estimator_validity(&mut ctx),
            7 => online_speedup(),
            8 => determinism(),
            _ => bdf1_order(),
        };
        let secs = t.elapsed().as_secs_f64();
        let in_time = secs <= LIMITS_S[i];
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {k} ({name}): {} [{secs:.1} s, limit {:.0} s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.summary,
            LIMITS_S[i],
            if in_time { "" } else { ", over time" }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
