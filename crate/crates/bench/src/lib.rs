//! Fixtures shared by the benchmarks.

use nalgebra::DMatrix;

/// Deterministic dense basis with well separated DEIM pivots.
pub fn synthetic_basis(rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        let x = (i as f64 + 0.5) / rows as f64;
        ((j + 1) as f64 * std::f64::consts::PI * x).sin() + 1e-3 * ((i * 31 + j * 17) % 97) as f64
    })
}
