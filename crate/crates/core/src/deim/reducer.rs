//! Offline DEIM compression of the transferred interface data.

use nalgebra::{DMatrix, DVector, LU};

use super::greedy::deim_indices;
use super::transfer::nearest_dof_map;
use crate::error::{Result, RomError};
use crate::fem::CsrMatrix;
use crate::mesh::InterfaceTrace;
use crate::pod::{pod_spectrum, truncate, PodSpectrum, ReducedBasis};

/// DEIM interpolant of the slave Dirichlet data in terms of master values at magic points.
///
/// With `W = Phi (Phi|_I)^{-1}` and `m = U u_1` the master values at the
/// magic dofs `I_1`, the slave interface data is approximated by `W m`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceReducer {
    /// `N_G2 x M` orthonormal basis of the interface data.
    pub phi: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    /// Slave trace positions `I_2`, in selection order.
    pub slave_points: Vec<usize>,
    /// Global master dofs `I_1` nearest to `I_2`.
    pub master_dofs: Vec<usize>,
    /// `W = Phi (Phi|_I)^{-1}`.
    pub interpolant: DMatrix<f64>,
    /// `cond_2(Phi|_I)`.
    pub condition_number: f64,
    /// `||(Phi|_I)^{-1}||_2`.
    pub inverse_norm: f64,
}

impl InterfaceReducer {
    /// Builds from an explicit basis and index pairing.
    pub fn from_parts(
        phi: DMatrix<f64>,
        slave_points: Vec<usize>,
        master_dofs: Vec<usize>,
        singular_values: Vec<f64>,
        tolerance: f64,
    ) -> Result<InterfaceReducer> {
        let m = phi.ncols();
        if slave_points.len() != m || master_dofs.len() != m {
            return Err(RomError::DimensionMismatch(format!(
                "{} basis vectors, {} slave points, {} master dofs",
                m,
                slave_points.len(),
                master_dofs.len()
            )));
        }
        let p = DMatrix::from_fn(m, m, |r, c| phi[(slave_points[r], c)]);
        let svd = p.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 0.0) {
            return Err(RomError::DegenerateBasis { step: m.saturating_sub(1) });
        }
        let cond = smax / smin;
        log::info!("DEIM: M = {m}, cond(Phi|I) = {cond:.3e}");
        let lu = LU::new(p);
        let pinv = lu.try_inverse().ok_or(RomError::DegenerateBasis { step: m.saturating_sub(1) })?;
        let interpolant = &phi * pinv;
        Ok(InterfaceReducer {
            phi,
            singular_values,
            tolerance,
            slave_points,
            master_dofs,
            interpolant,
            condition_number: cond,
            inverse_norm: 1.0 / smin,
        })
    }

    pub fn num_points(&self) -> usize {
        self.phi.ncols()
    }

    /// Slave interface values from master values at the magic dofs.
    pub fn apply_magic(&self, magic: &DVector<f64>) -> DVector<f64> {
        &self.interpolant * magic
    }

    /// `U`: gathers the magic dofs of a full master vector.
    pub fn extract(&self, master_full: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.master_dofs.len(), self.master_dofs.iter().map(|&d| master_full[d]))
    }

    /// `U V_1`: rows of the master basis at the magic dofs.
    pub fn extraction(&self, v1: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.master_dofs.len(), v1.ncols(), |r, c| v1[(self.master_dofs[r], c)])
    }

    /// `Phi Phi|_I^{-1} U V_1`, slave interface values from reduced master coordinates.
    pub fn full_transfer(&self, v1: &DMatrix<f64>) -> DMatrix<f64> {
        &self.interpolant * self.extraction(v1)
    }

    /// `||Phi Phi|_I^{-1} U||_2`, with repeated magic dofs merged.
    pub fn transfer_norm(&self) -> f64 {
        let mut uniq: Vec<usize> = self.master_dofs.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let mut merged = DMatrix::zeros(self.interpolant.nrows(), uniq.len());
        for (k, d) in self.master_dofs.iter().enumerate() {
            let col = uniq.binary_search(d).unwrap();
            let src = self.interpolant.column(k).clone_owned();
            merged.column_mut(col).axpy(1.0, &src, 1.0);
        }
        merged.svd(false, false).singular_values.max()
    }

    /// `V_2^T A E W`: the action of interface data on the reduced slave equations.
    ///
    /// `E` embeds trace values at `slave_trace.dof_indices` into the full slave vector.
    pub fn lifting(&self, a: &CsrMatrix, v2: &DMatrix<f64>, slave_trace: &InterfaceTrace) -> DMatrix<f64> {
        let n2 = a.nrows();
        let mut ew = DMatrix::zeros(n2, self.num_points());
        for (pos, &dof) in slave_trace.dof_indices.iter().enumerate() {
            ew.row_mut(dof).copy_from(&self.interpolant.row(pos));
        }
        v2.tr_mul(&a.mul_dense(&ew))
    }
}

/// Builds the interface reducer from transferred-trace snapshots.
pub fn build_interface_reducer(
    interface_snapshots: &DMatrix<f64>,
    tol: f64,
    master_trace: &InterfaceTrace,
    slave_trace: &InterfaceTrace,
) -> Result<InterfaceReducer> {
    let spectrum = pod_spectrum(interface_snapshots)?;
    reducer_from_spectrum(&spectrum, tol, master_trace, slave_trace)
}

pub fn reducer_from_spectrum(
    spectrum: &PodSpectrum,
    tol: f64,
    master_trace: &InterfaceTrace,
    slave_trace: &InterfaceTrace,
) -> Result<InterfaceReducer> {
    let basis = truncate(spectrum, tol)?;
    reducer_from_basis(basis, master_trace, slave_trace)
}

pub fn reducer_from_basis(
    basis: ReducedBasis,
    master_trace: &InterfaceTrace,
    slave_trace: &InterfaceTrace,
) -> Result<InterfaceReducer> {
    if basis.full_dim() != slave_trace.len() {
        return Err(RomError::DimensionMismatch(format!(
            "interface basis has {} rows, slave trace {} nodes",
            basis.full_dim(),
            slave_trace.len()
        )));
    }
    let idx = deim_indices(&basis.vectors)?;
    let points: Vec<[f64; 3]> = idx.iter().map(|&i| slave_trace.coords[i]).collect();
    let master_dofs = nearest_dof_map(master_trace, &points);
    InterfaceReducer::from_parts(basis.vectors, idx, master_dofs, basis.singular_values, basis.tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoxFace, BoxSpec, Mesh};

    fn traces() -> (InterfaceTrace, InterfaceTrace) {
        let m = Mesh::new(&BoxSpec::unit_cube(4, 1).with_tag(BoxFace::XMax, "g")).unwrap();
        let mut s_spec = BoxSpec::unit_cube(2, 1).with_tag(BoxFace::XMin, "g");
        s_spec.origin = vec![1.0, 0.0, 0.0];
        let s = Mesh::new(&s_spec).unwrap();
        (m.extract_interface("g").unwrap(), s.extract_interface("g").unwrap())
    }

    #[test]
    fn reconstructs_span_and_pairs_nearest_dofs() {
        let (mt, st) = traces();
        let fields: Vec<Box<dyn Fn(&[f64; 3]) -> f64>> = vec![
            Box::new(|c| 1.0 + c[1]),
            Box::new(|c| c[1] * c[2]),
            Box::new(|c| (3.0 * c[2]).sin()),
        ];
        let s = DMatrix::from_fn(st.len(), 6, |i, j| {
            let c = &st.coords[i];
            fields[j % 3](c) * (1.0 + j as f64) + if j >= 3 { fields[(j + 1) % 3](c) } else { 0.0 }
        });
        let r = build_interface_reducer(&s, 1e-12, &mt, &st).unwrap();
        assert_eq!(r.num_points(), 3);
        for j in 0..6 {
            let col = s.column(j).clone_owned();
            let magic = DVector::from_iterator(3, r.slave_points.iter().map(|&i| col[i]));
            assert!((r.apply_magic(&magic) - &col).amax() < 1e-10);
        }
        for (&i2, &d1) in r.slave_points.iter().zip(&r.master_dofs) {
            let k = mt.dof_indices.iter().position(|&d| d == d1).unwrap();
            assert_eq!(mt.coords[k], st.coords[i2]);
        }
        assert!(r.condition_number >= 1.0);
        assert!(r.transfer_norm() >= 1.0 - 1e-12);
    }
}
