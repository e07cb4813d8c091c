//! Global assembly of mass, stiffness, advection and load terms.

use rayon::prelude::*;

use super::quadrature::{gauss_legendre, lagrange_1d};
use super::sparse::CsrMatrix;
use crate::error::{Result, RomError};
use crate::expr::Expr;
use crate::mesh::Mesh;

/// Quadrature points per axis used for bilinear forms.
pub fn operator_points(order: usize) -> usize {
    order + 1
}

/// Quadrature points per axis used for loads and error norms.
pub fn load_points(order: usize) -> usize {
    2 * order + 3
}

/// Shape functions tabulated at the quadrature points of one (any) cell.
///
/// Cells of a structured box mesh are translates of each other, so physical
/// gradients and weights are shared; only the point offsets move.
pub struct Tabulation {
    pub npts: usize,
    pub nloc: usize,
    /// Physical weights including the Jacobian.
    pub weights: Vec<f64>,
    /// Quadrature point offsets from the cell origin.
    pub offsets: Vec<[f64; 3]>,
    /// `phi[p * nloc + a]`.
    pub phi: Vec<f64>,
    /// `dphi[(p * nloc + a) * 3 + d]`, physical gradients.
    pub dphi: Vec<f64>,
}

impl Tabulation {
    pub fn new(mesh: &Mesh, points_per_axis: usize) -> Tabulation {
        let dim = mesh.dim();
        let q = mesh.order();
        let s = mesh.cell_size();
        let (gx, gw) = gauss_legendre(points_per_axis);
        let tab1: Vec<(Vec<f64>, Vec<f64>)> = gx.iter().map(|&x| lagrange_1d(q, x)).collect();
        let npa = points_per_axis;
        let npts = npa.pow(dim as u32);
        let nloc = mesh.nodes_per_cell();
        let nz = if dim == 3 { npa } else { 1 };
        let lz = if dim == 3 { q + 1 } else { 1 };
        let mut weights = Vec::with_capacity(npts);
        let mut offsets = Vec::with_capacity(npts);
        let mut phi = Vec::with_capacity(npts * nloc);
        let mut dphi = Vec::with_capacity(npts * nloc * 3);
        let jac: f64 = (0..dim).map(|a| s[a] / 2.0).product();
        for pz in 0..nz {
            for py in 0..npa {
                for px in 0..npa {
                    let p = [px, py, pz];
                    let mut w = jac;
                    let mut off = [0.0; 3];
                    for a in 0..dim {
                        w *= gw[p[a]];
                        off[a] = (gx[p[a]] + 1.0) * 0.5 * s[a];
                    }
                    weights.push(w);
                    offsets.push(off);
                    for k in 0..lz {
                        for j in 0..=q {
                            for i in 0..=q {
                                let l = [i, j, k];
                                let mut v = 1.0;
                                let mut g = [1.0; 3];
                                for a in 0..dim {
                                    let (val, der) = &tab1[p[a]];
                                    v *= val[l[a]];
                                    for (b, gb) in g.iter_mut().enumerate().take(dim) {
                                        *gb *= if a == b { der[l[a]] * 2.0 / s[a] } else { val[l[a]] };
                                    }
                                }
                                phi.push(v);
                                for gb in g.iter().take(dim) {
                                    dphi.push(*gb);
                                }
                                for _ in dim..3 {
                                    dphi.push(0.0);
                                }
                            }
                        }
                    }
                }
            }
        }
        Tabulation { npts, nloc, weights, offsets, phi, dphi }
    }

    pub fn point(&self, cell_origin: &[f64; 3], p: usize) -> [f64; 3] {
        let o = &self.offsets[p];
        [cell_origin[0] + o[0], cell_origin[1] + o[1], cell_origin[2] + o[2]]
    }

    fn grad(&self, p: usize, a: usize) -> &[f64] {
        let k = (p * self.nloc + a) * 3;
        &self.dphi[k..k + 3]
    }
}

/// Assembles a bilinear form whose element matrix is produced by `local`.
///
/// `local(cell_origin, out)` fills the row-major `nloc x nloc` block.
/// If `uniform`, the block of cell 0 is reused everywhere.
fn assemble_matrix<F>(mesh: &Mesh, nloc: usize, uniform: bool, local: F) -> Result<CsrMatrix>
where
    F: Fn(&[f64; 3], &mut [f64]) -> Result<()> + Sync,
{
    let ncell = mesh.num_cells();
    let blocks: Vec<Vec<f64>> = if uniform {
        let mut b = vec![0.0; nloc * nloc];
        local(&mesh.cell_origin(0), &mut b)?;
        vec![b]
    } else {
        (0..ncell)
            .into_par_iter()
            .map(|c| {
                let mut b = vec![0.0; nloc * nloc];
                local(&mesh.cell_origin(c), &mut b).map(|_| b)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut triplets = Vec::with_capacity(ncell * nloc * nloc);
    let mut dofs = Vec::with_capacity(nloc);
    for c in 0..ncell {
        mesh.cell_dofs(c, &mut dofs);
        let b = if uniform { &blocks[0] } else { &blocks[c] };
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                triplets.push((gi, gj, b[i * nloc + j]));
            }
        }
    }
    let n = mesh.num_dofs();
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    assemble_weighted_mass(mesh, &Expr::constant(1.0), &[], 0.0).expect("unit weight is admissible")
}

/// `M_ij = int w(x) phi_i phi_j`.
pub fn assemble_weighted_mass(mesh: &Mesh, weight: &Expr, mu: &[f64], t: f64) -> Result<CsrMatrix> {
    let tab = Tabulation::new(mesh, operator_points(mesh.order()));
    let nloc = tab.nloc;
    let uniform = !weight.depends_on_space();
    assemble_matrix(mesh, nloc, uniform, |x0, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..tab.npts {
            let w = tab.weights[p] * weight.eval(&tab.point(x0, p), t, mu);
            let ph = &tab.phi[p * nloc..(p + 1) * nloc];
            for i in 0..nloc {
                let wi = w * ph[i];
                for j in 0..nloc {
                    out[i * nloc + j] += wi * ph[j];
                }
            }
        }
        Ok(())
    })
}

/// `K_ij = int kappa(x) grad phi_i . grad phi_j`; errors if `kappa <= 0` at a quadrature point.
pub fn assemble_diffusion(mesh: &Mesh, kappa: &Expr, mu: &[f64], t: f64) -> Result<CsrMatrix> {
    let tab = Tabulation::new(mesh, operator_points(mesh.order()));
    let nloc = tab.nloc;
    let uniform = !kappa.depends_on_space();
    assemble_matrix(mesh, nloc, uniform, |x0, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..tab.npts {
            let x = tab.point(x0, p);
            let k = kappa.eval(&x, t, mu);
            if !(k > 0.0) || !k.is_finite() {
                return Err(RomError::CoefficientDomain(format!(
                    "diffusion `{}` = {k} at ({:.6}, {:.6}, {:.6})",
                    kappa.source(),
                    x[0],
                    x[1],
                    x[2]
                )));
            }
            let w = tab.weights[p] * k;
            for i in 0..nloc {
                let gi = tab.grad(p, i);
                for j in 0..nloc {
                    let gj = tab.grad(p, j);
                    out[i * nloc + j] += w * (gi[0] * gj[0] + gi[1] * gj[1] + gi[2] * gj[2]);
                }
            }
        }
        Ok(())
    })
}

/// Diffusion plus reaction: `int kappa grad u . grad v + r u v`.
pub fn assemble_stiffness(
    mesh: &Mesh,
    kappa: &Expr,
    reaction: Option<&Expr>,
    mu: &[f64],
    t: f64,
) -> Result<CsrMatrix> {
    let k = assemble_diffusion(mesh, kappa, mu, t)?;
    match reaction {
        Some(r) => k.lincomb(1.0, &assemble_weighted_mass(mesh, r, mu, t)?, 1.0),
        None => Ok(k),
    }
}

/// `C_ij = int (v . grad phi_j) phi_i`, no stabilisation.
pub fn assemble_advection(mesh: &Mesh, velocity: &[Expr], mu: &[f64], t: f64) -> Result<CsrMatrix> {
    if velocity.len() != mesh.dim() {
        return Err(RomError::DimensionMismatch(format!(
            "velocity has {} components on a {}D mesh",
            velocity.len(),
            mesh.dim()
        )));
    }
    let tab = Tabulation::new(mesh, operator_points(mesh.order()));
    let nloc = tab.nloc;
    let uniform = velocity.iter().all(|e| !e.depends_on_space());
    assemble_matrix(mesh, nloc, uniform, |x0, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..tab.npts {
            let x = tab.point(x0, p);
            let mut v = [0.0; 3];
            for (a, e) in velocity.iter().enumerate() {
                v[a] = e.eval(&x, t, mu);
            }
            let w = tab.weights[p];
            for j in 0..nloc {
                let gj = tab.grad(p, j);
                let conv = w * (v[0] * gj[0] + v[1] * gj[1] + v[2] * gj[2]);
                for i in 0..nloc {
                    out[i * nloc + j] += conv * tab.phi[p * nloc + i];
                }
            }
        }
        Ok(())
    })
}

/// `f_i = int f(x) phi_i` with the default load rule.
pub fn assemble_load(mesh: &Mesh, source: &Expr, mu: &[f64], t: f64) -> Vec<f64> {
    assemble_load_with(mesh, source, mu, t, load_points(mesh.order()))
}

pub fn assemble_load_with(mesh: &Mesh, source: &Expr, mu: &[f64], t: f64, points: usize) -> Vec<f64> {
    let tab = Tabulation::new(mesh, points);
    let nloc = tab.nloc;
    let locals: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let x0 = mesh.cell_origin(c);
            let mut b = vec![0.0; nloc];
            for p in 0..tab.npts {
                let w = tab.weights[p] * source.eval(&tab.point(&x0, p), t, mu);
                for (a, ba) in b.iter_mut().enumerate() {
                    *ba += w * tab.phi[p * nloc + a];
                }
            }
            b
        })
        .collect();
    let mut f = vec![0.0; mesh.num_dofs()];
    let mut dofs = Vec::with_capacity(nloc);
    for (c, b) in locals.iter().enumerate() {
        mesh.cell_dofs(c, &mut dofs);
        for (a, &g) in dofs.iter().enumerate() {
            f[g] += b[a];
        }
    }
    f
}

/// Nodal interpolant of `f`.
pub fn interpolate(mesh: &Mesh, f: impl Fn(&[f64; 3]) -> f64) -> Vec<f64> {
    (0..mesh.num_dofs()).map(|i| f(&mesh.node_coord(i))).collect()
}

/// `|| u_h - u ||_{L2}` with the load rule.
pub fn l2_error(mesh: &Mesh, uh: &[f64], exact: impl Fn(&[f64; 3]) -> f64 + Sync) -> f64 {
    let tab = Tabulation::new(mesh, load_points(mesh.order()));
    let nloc = tab.nloc;
    let sum: f64 = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let mut dofs = Vec::with_capacity(nloc);
            mesh.cell_dofs(c, &mut dofs);
            let x0 = mesh.cell_origin(c);
            let mut acc = 0.0;
            for p in 0..tab.npts {
                let mut v = 0.0;
                for (a, &g) in dofs.iter().enumerate() {
                    v += tab.phi[p * nloc + a] * uh[g];
                }
                let e = v - exact(&tab.point(&x0, p));
                acc += tab.weights[p] * e * e;
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    sum.sqrt()
}
