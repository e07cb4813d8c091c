//! Greedy selection of DEIM interpolation indices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RomError};

/// Index of the first entry of largest magnitude.
fn argmax_abs(v: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, -1.0);
    for (i, x) in v.enumerate() {
        if x.abs() > best.1 {
            best = (i, x.abs());
        }
    }
    best
}

/// DEIM indices of the columns of `phi`, in selection order.
///
/// The first index maximises `|phi_0|`; index `j` maximises the residual of
/// interpolating `phi_j` at the indices already chosen.
pub fn deim_indices(phi: &DMatrix<f64>) -> Result<Vec<usize>> {
    let (n, m) = phi.shape();
    if m > n {
        return Err(RomError::Oversampling { requested: m, available: n });
    }
    let mut idx = Vec::with_capacity(m);
    for j in 0..m {
        let col = phi.column(j);
        let scale = col.amax();
        if j == 0 {
            let (i, v) = argmax_abs(col.iter().copied());
            if v == 0.0 {
                return Err(RomError::DegenerateBasis { step: 0 });
            }
            idx.push(i);
            continue;
        }
        let p = DMatrix::from_fn(j, j, |r, c| phi[(idx[r], c)]);
        let rhs = DVector::from_fn(j, |r, _| phi[(idx[r], j)]);
        let c = p.lu().solve(&rhs).ok_or(RomError::DegenerateBasis { step: j })?;
        let approx = phi.columns(0, j) * c;
        let (i, v) = argmax_abs(col.iter().zip(approx.iter()).map(|(a, b)| a - b));
        if !(v > 1e-14 * scale) || idx.contains(&i) {
            return Err(RomError::DegenerateBasis { step: j });
        }
        idx.push(i);
    }
    Ok(idx)
}

/// DEIM indices for the first `m` columns of `phi`.
pub fn deim_indices_limited(phi: &DMatrix<f64>, m: usize) -> Result<Vec<usize>> {
    if m > phi.ncols() {
        return Err(RomError::Oversampling { requested: m, available: phi.ncols() });
    }
    deim_indices(&phi.columns(0, m).into_owned())
}
