//! Strong Dirichlet conditions by symmetric elimination.

use std::collections::BTreeMap;

use super::solver::LinearSolver;
use super::sparse::CsrMatrix;
use crate::error::{Result, RomError};

/// Merges `(dof, value)` pairs; repeated dofs must carry identical values.
pub fn merge_constraints(pairs: &[(usize, f64)]) -> Result<BTreeMap<usize, f64>> {
    let mut map = BTreeMap::new();
    for &(dof, value) in pairs {
        if let Some(&prev) = map.get(&dof) {
            if prev != value {
                return Err(RomError::InconsistentConstraint { dof, first: prev, second: value });
            }
        } else {
            map.insert(dof, value);
        }
    }
    Ok(map)
}

/// Replaces constrained rows and columns by the identity.
pub fn lift_matrix(a: &CsrMatrix, constrained: &[bool]) -> CsrMatrix {
    let mut t = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows() {
        if constrained[i] {
            t.push((i, i, 1.0));
            continue;
        }
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            if !constrained[j] {
                t.push((i, j, x));
            }
        }
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &t)
}

/// Returns `(A', f')` with `A'` the lifted matrix and `f' = f - A u_D` off the
/// constrained rows, `f'_i = g_i` on them.
pub fn apply_dirichlet_lifting(
    a: &CsrMatrix,
    f: &[f64],
    dirichlet: &[(usize, f64)],
) -> Result<(CsrMatrix, Vec<f64>)> {
    let n = a.nrows();
    if f.len() != n {
        return Err(RomError::DimensionMismatch(format!("rhs has {} entries, matrix {n}", f.len())));
    }
    let map = merge_constraints(dirichlet)?;
    let mut mask = vec![false; n];
    let mut ud = vec![0.0; n];
    for (&d, &g) in &map {
        if d >= n {
            return Err(RomError::DimensionMismatch(format!("constrained dof {d} >= {n}")));
        }
        mask[d] = true;
        ud[d] = g;
    }
    let aud = a.mul_vec(&ud);
    let rhs = (0..n).map(|i| if mask[i] { ud[i] } else { f[i] - aud[i] }).collect();
    Ok((lift_matrix(a, &mask), rhs))
}

/// A factorised lifted operator for repeated solves with changing Dirichlet data.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    operator: CsrMatrix,
    mask: Vec<bool>,
    dofs: Vec<usize>,
    solver: LinearSolver,
}

impl DirichletSystem {
    /// `dofs` must be sorted and unique.
    pub fn new(operator: CsrMatrix, dofs: &[usize]) -> Result<DirichletSystem> {
        let mut mask = vec![false; operator.nrows()];
        for &d in dofs {
            mask[d] = true;
        }
        let solver = LinearSolver::new(&lift_matrix(&operator, &mask))?;
        Ok(DirichletSystem { operator, mask, dofs: dofs.to_vec(), solver })
    }

    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn constrained(&self) -> &[usize] {
        &self.dofs
    }

    pub fn lifted_solver(&self) -> &LinearSolver {
        &self.solver
    }

    /// Solves with load `f` and Dirichlet values `g` (aligned with `constrained()`).
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(g.len(), self.dofs.len());
        let n = self.operator.nrows();
        let mut ud = vec![0.0; n];
        for (&d, &v) in self.dofs.iter().zip(g) {
            ud[d] = v;
        }
        let aud = self.operator.mul_vec(&ud);
        let rhs: Vec<f64> = (0..n).map(|i| if self.mask[i] { ud[i] } else { f[i] - aud[i] }).collect();
        self.solver.solve(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::fem::assembly::{assemble_diffusion, interpolate};
    use crate::fem::solver::solve_steady;
    use crate::mesh::{BoxSpec, Mesh};

    #[test]
    fn conflicting_duplicates_are_rejected() {
        assert!(merge_constraints(&[(1, 2.0), (1, 2.0)]).is_ok());
        assert!(matches!(
            merge_constraints(&[(1, 2.0), (1, 3.0)]),
            Err(RomError::InconsistentConstraint { dof: 1, .. })
        ));
    }

    #[test]
    fn linear_solution_reproduced_exactly() {
        // Laplace with u = 1 + 2x - y + 0.5z on every face has the linear solution.
        let mesh = Mesh::new(&BoxSpec::unit_cube(3, 2)).unwrap();
        let k = assemble_diffusion(&mesh, &Expr::constant(1.0), &[], 0.0).unwrap();
        let exact = interpolate(&mesh, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]);
        let mut bc = Vec::new();
        for face in mesh.faces() {
            for d in mesh.face_dofs(face) {
                bc.push((d, exact[d]));
            }
        }
        let (a, f) = apply_dirichlet_lifting(&k, &vec![0.0; mesh.num_dofs()], &bc).unwrap();
        assert!(a.is_symmetric(0.0));
        let u = solve_steady(&a, &f).unwrap();
        for i in 0..u.len() {
            assert!((u[i] - exact[i]).abs() < 1e-11);
        }
        let mut dofs: Vec<usize> = bc.iter().map(|p| p.0).collect();
        dofs.sort_unstable();
        dofs.dedup();
        let sys = DirichletSystem::new(k, &dofs).unwrap();
        let g: Vec<f64> = dofs.iter().map(|&d| exact[d]).collect();
        let u2 = sys.solve(&vec![0.0; mesh.num_dofs()], &g).unwrap();
        for i in 0..u.len() {
            assert!((u2[i] - exact[i]).abs() < 1e-11);
        }
    }
}
