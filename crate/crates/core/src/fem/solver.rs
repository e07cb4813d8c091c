//! Sparse linear solvers: banded LU for moderate bandwidth, Jacobi-preconditioned
//! Krylov methods otherwise.

use super::sparse::{dot, norm2, CsrMatrix};
use crate::error::{Result, RomError};

/// Relative residual target for all solves.
pub const SOLVE_TOL: f64 = 1e-10;

/// Band storage above which the direct solver is not used (entries).
pub const DIRECT_BAND_LIMIT: usize = 25_000_000;

/// Banded LU factorisation with optional partial pivoting.
///
/// Row `i` stores columns `i - kl ..= i + ku_fill`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Option<Vec<usize>>,
}

impl BandLu {
    /// Factorises `a`; pivots unless `a` is symmetric and factors without it.
    pub fn factor(a: &CsrMatrix) -> Result<BandLu> {
        if a.is_symmetric(1e-13) {
            if let Ok(lu) = BandLu::factor_with(a, false) {
                return Ok(lu);
            }
        }
        BandLu::factor_with(a, true)
    }

    pub fn factor_with(a: &CsrMatrix, pivot: bool) -> Result<BandLu> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let (kl, ku0) = a.bandwidth();
        let ku = if pivot { ku0 + kl } else { ku0 };
        let width = kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                data[i * width + (j + kl - i)] = x;
            }
        }
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * 1e-14 * (n as f64).sqrt();
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        let mut piv = if pivot { Some(vec![0; n]) } else { None };
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            if let Some(p) = piv.as_mut() {
                let mut best = k;
                let mut bv = data[at(k, k)].abs();
                for i in k + 1..=last_row {
                    let v = data[at(i, k)].abs();
                    if v > bv {
                        bv = v;
                        best = i;
                    }
                }
                p[k] = best;
                if best != k {
                    for j in k..=last_col {
                        data.swap(at(k, j), at(best, j));
                    }
                }
            }
            let d = data[at(k, k)];
            if !(d.abs() > tiny) {
                return Err(RomError::SolverFailure {
                    reason: format!("zero pivot at row {k}"),
                    residual: f64::INFINITY,
                });
            }
            let (head, tail) = data.split_at_mut((k + 1) * width);
            let krow = &head[k * width..];
            for i in k + 1..=last_row {
                let row = &mut tail[(i - k - 1) * width..(i - k) * width];
                let lik = row[k + kl - i];
                if lik == 0.0 {
                    continue;
                }
                let l = lik / d;
                row[k + kl - i] = l;
                let src = &krow[kl + 1..=kl + (last_col - k)];
                let dst = &mut row[k + 1 + kl - i..=last_col + kl - i];
                for (x, &y) in dst.iter_mut().zip(src) {
                    *x -= l * y;
                }
            }
        }
        Ok(BandLu { n, kl, ku, width, data, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + (j + self.kl - i)]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            if let Some(p) = &self.piv {
                if p[k] != k {
                    b.swap(k, p[k]);
                }
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.at(i, k) * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.ku).min(n - 1) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // U^T y = b
        for i in 0..n {
            let yi = b[i] / self.at(i, i);
            b[i] = yi;
            for j in i + 1..=(i + self.ku).min(n - 1) {
                b[j] -= self.at(i, j) * yi;
            }
        }
        // L^T with row interchanges in reverse
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                s -= self.at(i, k) * b[i];
            }
            b[k] = s;
            if let Some(p) = &self.piv {
                if p[k] != k {
                    b.swap(k, p[k]);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Direct(BandLu),
    Iterative { inv_diag: Vec<f64>, symmetric: bool },
}

/// A matrix prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    matrix: CsrMatrix,
    backend: Backend,
}

impl LinearSolver {
    pub fn new(a: &CsrMatrix) -> Result<LinearSolver> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(RomError::DimensionMismatch(format!("matrix is {}x{}", n, a.ncols())));
        }
        let (kl, ku) = a.bandwidth();
        let symmetric = a.is_symmetric(1e-13);
        let width = kl + ku + 1 + if symmetric { 0 } else { kl };
        let backend = if n.saturating_mul(width) <= DIRECT_BAND_LIMIT {
            let lu = match BandLu::factor_with(a, !symmetric) {
                Err(_) if symmetric => {
                    if n.saturating_mul(width + kl) > DIRECT_BAND_LIMIT {
                        return Err(RomError::SolverFailure {
                            reason: "symmetric indefinite matrix too large for pivoted band LU".into(),
                            residual: f64::INFINITY,
                        });
                    }
                    BandLu::factor_with(a, true)?
                }
                other => other?,
            };
            Backend::Direct(lu)
        } else {
            let diag = a.diagonal();
            if diag.contains(&0.0) {
                return Err(RomError::SolverFailure {
                    reason: "zero diagonal in Jacobi preconditioner".into(),
                    residual: f64::INFINITY,
                });
            }
            Backend::Iterative { inv_diag: diag.iter().map(|d| 1.0 / d).collect(), symmetric }
        };
        Ok(LinearSolver { matrix: a.clone(), backend })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves `A x = b`, refining until the relative residual is below [`SOLVE_TOL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let bn = norm2(b);
        if bn == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        match &self.backend {
            Backend::Direct(lu) => {
                let mut x = b.to_vec();
                lu.solve_in_place(&mut x);
                let mut rel = 0.0;
                for _ in 0..4 {
                    let ax = self.matrix.mul_vec(&x);
                    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
                    rel = norm2(&r) / bn;
                    if !rel.is_finite() {
                        break;
                    }
                    if rel <= SOLVE_TOL {
                        return Ok(x);
                    }
                    lu.solve_in_place(&mut r);
                    x.iter_mut().zip(&r).for_each(|(xi, ri)| *xi += ri);
                }
                Err(RomError::SolverFailure { reason: "direct solve did not reach tolerance".into(), residual: rel })
            }
            Backend::Iterative { inv_diag, symmetric } => {
                if *symmetric {
                    pcg(&self.matrix, inv_diag, b, SOLVE_TOL, 20 * b.len().max(100))
                } else {
                    bicgstab(&self.matrix, inv_diag, b, SOLVE_TOL, 20 * b.len().max(100))
                }
            }
        }
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Direct(lu) => {
                let mut x = b.to_vec();
                lu.solve_transpose_in_place(&mut x);
                Ok(x)
            }
            Backend::Iterative { symmetric: true, .. } => self.solve(b),
            Backend::Iterative { .. } => LinearSolver::new(&self.matrix.transpose())?.solve(b),
        }
    }
}

/// One-shot solve of `A x = b`.
pub fn solve_steady(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new(a)?.solve(b)
}

fn pcg(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bn = norm2(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(RomError::SolverFailure {
                reason: "CG breakdown (matrix not positive definite)".into(),
                residual: norm2(&r) / bn,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= tol * bn {
            let ax = a.mul_vec(&x);
            let true_res = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt() / bn;
            if true_res <= tol * 10.0 {
                return Ok(x);
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(RomError::SolverFailure { reason: "CG reached the iteration limit".into(), residual: norm2(&r) / bn })
}

fn bicgstab(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bn = norm2(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut zz = vec![0.0; n];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * inv_diag[i];
        }
        a.mul_vec_into(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= tol * bn {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(x);
        }
        for i in 0..n {
            zz[i] = s[i] * inv_diag[i];
        }
        a.mul_vec_into(&zz, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= tol * bn {
            return Ok(x);
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(RomError::SolverFailure { reason: "BiCGStab did not converge".into(), residual: norm2(&r) / bn })
}

/// Iterative solve regardless of size; used to cross-check the direct path.
pub fn solve_iterative(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let inv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    if a.is_symmetric(1e-13) {
        pcg(a, &inv, b, SOLVE_TOL, 20 * b.len().max(100))
    } else {
        bicgstab(a, &inv, b, SOLVE_TOL, 20 * b.len().max(100))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn banded_random(n: usize, kl: usize, ku: usize, seed: u64, sym: bool) -> CsrMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                if j == i {
                    t.push((i, i, 0.3 + rnd()));
                } else {
                    let v = rnd();
                    t.push((i, j, v));
                    if sym {
                        t.push((j, i, v));
                    }
                }
            }
        }
        let m = CsrMatrix::from_triplets(n, n, &t);
        if sym {
            // shift to make SPD
            m.lincomb(1.0, &CsrMatrix::identity(n), (2 * (kl + ku) + 2) as f64).unwrap()
        } else {
            m
        }
    }

    #[test]
    fn pivoted_band_lu_matches_dense_lu() {
        let a = banded_random(40, 3, 2, 7, false);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let lu = BandLu::factor_with(&a, true).unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let dense = a.to_dense().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..40 {
            assert!((x[i] - dense[i]).abs() < 1e-9 * (1.0 + dense[i].abs()));
        }
        let mut xt = b.clone();
        lu.solve_transpose_in_place(&mut xt);
        let dt = a.to_dense().transpose().lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..40 {
            assert!((xt[i] - dt[i]).abs() < 1e-9 * (1.0 + dt[i].abs()));
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 2.0]));
        let x = solve_steady(&a, &[1.0, 2.0, 3.0]).unwrap();
        let r = a.mul_vec(&x);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14 && (r[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_failure() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(solve_steady(&a, &[1.0, 0.0]), Err(RomError::SolverFailure { .. })));
    }

    proptest! {
        #[test]
        fn direct_and_krylov_agree(n in 5usize..60, kl in 1usize..4, seed in 0u64..1000, sym in any::<bool>()) {
            let a = banded_random(n, kl, kl, seed, sym);
            let b: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).cos()).collect();
            let x = solve_steady(&a, &b).unwrap();
            let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            prop_assert!(norm2(&r) <= SOLVE_TOL * norm2(&b));
            if sym {
                let xi = solve_iterative(&a, &b).unwrap();
                for i in 0..n { prop_assert!((x[i] - xi[i]).abs() < 1e-7 * (1.0 + x[i].abs())); }
            }
        }
    }
}
