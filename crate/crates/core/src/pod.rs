//! Proper orthogonal decomposition of snapshot matrices.

use nalgebra::DMatrix;

use crate::error::{Result, RomError};

/// Relative singular value floor; modes below it are indistinguishable from
/// rounding and are never returned.
const SIGMA_FLOOR: f64 = 1e-14;

/// Snapshot columns with the parameter and time each one came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub matrix: DMatrix<f64>,
    pub params: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

impl SnapshotSet {
    pub fn new(rows: usize) -> SnapshotSet {
        SnapshotSet { matrix: DMatrix::zeros(rows, 0), params: Vec::new(), times: Vec::new() }
    }

    /// Builds from columns; all must have the same length.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>], params: Vec<Vec<f64>>, times: Vec<f64>) -> SnapshotSet {
        let mut m = DMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            m.column_mut(j).copy_from_slice(c);
        }
        SnapshotSet { matrix: m, params, times }
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Orthonormal basis with the singular values it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    pub vectors: DMatrix<f64>,
    /// Full computed spectrum in descending order; `vectors.ncols()` of them retained.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn full_dim(&self) -> usize {
        self.vectors.nrows()
    }
}

/// Left singular vectors and singular values of a snapshot matrix.
#[derive(Debug, Clone)]
pub struct PodSpectrum {
    pub vectors: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

/// Smallest `n` with `sum_{i >= n} s_i^2 <= tol^2 * sum_i s_i^2`.
pub fn energy_truncation(singular_values: &[f64], tol: f64) -> usize {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    let budget = tol * tol * total;
    let mut tail = total;
    for (n, s) in singular_values.iter().enumerate() {
        if tail <= budget {
            return n;
        }
        tail -= s * s;
    }
    singular_values.len()
}

/// Computes the POD spectrum.
///
/// The snapshot matrix is first reduced by a thin QR factorization, so only a
/// `min(N, Ns)`-sized SVD is needed. Unlike an eigen-decomposition of the
/// correlation matrix this does not square the condition number, and small
/// singular values keep full relative accuracy.
pub fn pod_spectrum(snapshots: &DMatrix<f64>) -> Result<PodSpectrum> {
    let (n, ns) = snapshots.shape();
    if ns == 0 || n == 0 {
        return Err(RomError::DegenerateSnapshots("no snapshots".into()));
    }
    if snapshots.iter().any(|v| !v.is_finite()) {
        return Err(RomError::DegenerateSnapshots("non-finite entries".into()));
    }
    if snapshots.iter().all(|&v| v == 0.0) {
        return Err(RomError::DegenerateSnapshots("all snapshots are zero".into()));
    }
    // S = Q R (tall) or S^T = Q R (wide); left vectors of S come from the small factor
    let (left, sigma) = if n > ns {
        let qr = snapshots.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let svd = r.svd(true, false);
        (q * svd.u.unwrap(), svd.singular_values)
    } else {
        let qr = snapshots.transpose().qr();
        let svd = qr.r().transpose().svd(true, false);
        (svd.u.unwrap(), svd.singular_values)
    };
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let smax = sigma[order[0]];
    let kept: Vec<usize> = order.iter().copied().filter(|&i| sigma[i] > SIGMA_FLOOR * smax).collect();
    let sigmas: Vec<f64> = kept.iter().map(|&i| sigma[i]).collect();
    let mut vectors = DMatrix::zeros(n, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        vectors.set_column(k, &left.column(i));
    }
    reorthonormalize(&mut vectors);
    fix_signs(&mut vectors);
    Ok(PodSpectrum { vectors, singular_values: sigmas })
}

/// Two passes of modified Gram-Schmidt, in column order.
fn reorthonormalize(v: &mut DMatrix<f64>) {
    for _ in 0..2 {
        for j in 0..v.ncols() {
            for i in 0..j {
                let d = v.column(i).dot(&v.column(j));
                let ci = v.column(i).clone_owned();
                v.column_mut(j).axpy(-d, &ci, 1.0);
            }
            let nrm = v.column(j).norm();
            if nrm > 0.0 {
                v.column_mut(j).scale_mut(1.0 / nrm);
            }
        }
    }
}

/// Makes the first entry of significant magnitude in each column positive.
pub fn fix_signs(v: &mut DMatrix<f64>) {
    for j in 0..v.ncols() {
        let amax = v.column(j).amax();
        if let Some(first) = v.column(j).iter().copied().find(|x| x.abs() > 1e-8 * amax) {
            if first < 0.0 {
                v.column_mut(j).neg_mut();
            }
        }
    }
}

/// POD basis meeting the relative energy tolerance `tol`.
pub fn pod(snapshots: &DMatrix<f64>, tol: f64) -> Result<ReducedBasis> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(RomError::config(format!("POD tolerance must lie in (0, 1), got {tol}")));
    }
    truncate(&pod_spectrum(snapshots)?, tol)
}

/// Cuts a precomputed spectrum at `tol`.
pub fn truncate(spectrum: &PodSpectrum, tol: f64) -> Result<ReducedBasis> {
    let n = energy_truncation(&spectrum.singular_values, tol).max(1);
    Ok(ReducedBasis {
        vectors: spectrum.vectors.columns(0, n).into_owned(),
        singular_values: spectrum.singular_values.clone(),
        tolerance: tol,
    })
}

/// Zeroes the listed rows (Dirichlet dofs) of a snapshot matrix.
pub fn zero_interface_rows(snapshots: &mut DMatrix<f64>, rows: &[usize]) {
    for &r in rows {
        snapshots.row_mut(r).fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn energy_rule_examples() {
        assert_eq!(energy_truncation(&[10.0, 1.0, 0.1, 0.01], 0.05), 2);
        assert_eq!(energy_truncation(&[1.0, 1.0], 0.5), 2);
        assert_eq!(energy_truncation(&[1.0, 0.0], 0.5), 1);
    }

    #[test]
    fn rank_one_snapshots() {
        let u = nalgebra::DVector::from_fn(30, |i, _| (i as f64 * 0.3).sin());
        let s = DMatrix::from_fn(30, 5, |i, j| u[i] * (j + 1) as f64);
        let b = pod(&s, 1e-8).unwrap();
        assert_eq!(b.dim(), 1);
        let cos = (b.vectors.column(0).dot(&u) / u.norm()).abs();
        assert!((cos - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_snapshots_rejected() {
        assert!(matches!(pod(&DMatrix::zeros(4, 3), 0.1), Err(RomError::DegenerateSnapshots(_))));
        assert!(pod(&DMatrix::identity(3, 3), 1.5).is_err());
    }

    #[test]
    fn zeroing_rows() {
        let mut s = DMatrix::from_element(4, 2, 1.0);
        zero_interface_rows(&mut s, &[1, 3]);
        assert_eq!(s.row(1).sum() + s.row(3).sum(), 0.0);
        assert_eq!(s.row(0).sum(), 2.0);
    }

    proptest! {
        #[test]
        fn basis_is_orthonormal_and_truncation_minimal(
            rows in 3usize..40,
            cols in 1usize..25,
            seed in any::<u64>(),
            tol in 1e-6f64..0.5,
        ) {
            let mut s = seed | 1;
            let s_mat = DMatrix::from_fn(rows, cols, |_, _| {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            });
            let b = pod(&s_mat, tol).unwrap();
            let g = b.vectors.tr_mul(&b.vectors);
            prop_assert!((g - DMatrix::identity(b.dim(), b.dim())).amax() < 1e-10);
            let sv = &b.singular_values;
            let total: f64 = sv.iter().map(|x| x * x).sum();
            let tail: f64 = sv[b.dim()..].iter().map(|x| x * x).sum();
            prop_assert!(tail <= tol * tol * total * (1.0 + 1e-12));
            if b.dim() > 1 {
                let tail_less: f64 = sv[b.dim() - 1..].iter().map(|x| x * x).sum();
                prop_assert!(tail_less > tol * tol * total);
            }
        }
    }
}
