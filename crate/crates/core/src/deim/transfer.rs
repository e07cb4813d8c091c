//! Master-to-slave transfer of interface traces.

use crate::error::{Result, RomError};
use crate::fem::CsrMatrix;
use crate::mesh::InterfaceTrace;

/// Relative tolerance for coordinates to count as coincident.
const COINCIDE: f64 = 1e-10;

/// Linear map `Pi` from master trace values to slave trace values.
///
/// Conforming nodes are copied exactly; others are interpolated
/// piecewise-(bi)linearly on the master trace lattice.
#[derive(Debug, Clone)]
pub struct InterfaceTransfer {
    weights: CsrMatrix,
    conforming: bool,
}

struct Lattice {
    normal: usize,
    plane: f64,
    axes: Vec<usize>,
    ticks: Vec<Vec<f64>>,
    /// Trace position of lattice node, row-major over `axes`.
    table: Vec<usize>,
}

fn bounding_scale(trace: &InterfaceTrace) -> f64 {
    trace.coords.iter().flat_map(|c| c.iter()).fold(1.0f64, |m, v| m.max(v.abs()))
}

fn unique_sorted(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().is_none_or(|&l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

fn locate(ticks: &[f64], x: f64, tol: f64) -> Option<usize> {
    let k = ticks.partition_point(|&t| t < x - tol);
    (k < ticks.len() && (ticks[k] - x).abs() <= tol).then_some(k)
}

impl Lattice {
    fn new(trace: &InterfaceTrace) -> Result<Lattice> {
        let dim = trace.parent_dim;
        let tol = COINCIDE * bounding_scale(trace);
        let first = trace.coords[0];
        let normal = (0..dim)
            .find(|&a| trace.coords.iter().all(|c| (c[a] - first[a]).abs() <= tol))
            .ok_or_else(|| RomError::InvalidGeometry("interface trace is not planar".into()))?;
        let axes: Vec<usize> = (0..dim).filter(|&a| a != normal).collect();
        let ticks: Vec<Vec<f64>> =
            axes.iter().map(|&a| unique_sorted(trace.coords.iter().map(|c| c[a]).collect(), tol)).collect();
        let count: usize = ticks.iter().map(Vec::len).product();
        if count != trace.len() {
            return Err(RomError::InvalidGeometry("interface trace is not a tensor lattice".into()));
        }
        let mut table = vec![usize::MAX; count];
        for (pos, c) in trace.coords.iter().enumerate() {
            let mut flat = 0;
            for (k, &a) in axes.iter().enumerate() {
                let i = locate(&ticks[k], c[a], tol).expect("tick built from the same coordinates");
                flat = flat * ticks[k].len() + i;
            }
            table[flat] = pos;
        }
        Ok(Lattice { normal, plane: first[normal], axes, ticks, table })
    }
}

impl InterfaceTransfer {
    pub fn new(master: &InterfaceTrace, slave: &InterfaceTrace) -> Result<InterfaceTransfer> {
        if master.is_empty() || slave.is_empty() {
            return Err(RomError::EmptyTrace("interface".into()));
        }
        let lat = Lattice::new(master)?;
        let tol = COINCIDE * bounding_scale(master).max(bounding_scale(slave));
        let limit = master.h;
        let mut triplets = Vec::new();
        let mut conforming = slave.len() <= master.len();
        for (row, p) in slave.coords.iter().enumerate() {
            let dn = (p[lat.normal] - lat.plane).abs();
            let mut dist2 = dn * dn;
            // per in-plane axis: (lower tick, upper tick, weight of upper)
            let mut brackets = Vec::with_capacity(lat.axes.len());
            for (k, &a) in lat.axes.iter().enumerate() {
                let ticks = &lat.ticks[k];
                let x = p[a];
                let lo = ticks[0];
                let hi = *ticks.last().unwrap();
                let xc = x.clamp(lo, hi);
                if (x - xc).abs() > tol {
                    dist2 += (x - xc) * (x - xc);
                }
                if let Some(i) = locate(ticks, xc, tol) {
                    brackets.push((i, i, 0.0));
                } else {
                    conforming = false;
                    let upper = ticks.partition_point(|&t| t < xc).min(ticks.len() - 1);
                    let lower = upper - 1;
                    let w = (xc - ticks[lower]) / (ticks[upper] - ticks[lower]);
                    brackets.push((lower, upper, w));
                }
            }
            let dist = dist2.sqrt();
            if dist > limit + tol {
                return Err(RomError::ProjectionDistance { point: row, distance: dist, limit });
            }
            if dist > tol {
                conforming = false;
                log::warn!("slave interface point {row} is {dist:.3e} off the master trace; snapped");
            }
            let corners = 1usize << brackets.len();
            for mask in 0..corners {
                let mut w = 1.0;
                let mut flat = 0;
                for (k, &(lo, up, t)) in brackets.iter().enumerate() {
                    let take_up = mask >> k & 1 == 1;
                    if lo == up && take_up {
                        w = 0.0;
                        break;
                    }
                    w *= if take_up { t } else { 1.0 - t };
                    flat = flat * lat.ticks[k].len() + if take_up { up } else { lo };
                }
                if w != 0.0 {
                    triplets.push((row, lat.table[flat], w));
                }
            }
        }
        Ok(InterfaceTransfer { weights: CsrMatrix::from_triplets(slave.len(), master.len(), &triplets), conforming })
    }

    /// True if every slave node coincides with a master node.
    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    pub fn apply(&self, master_values: &[f64]) -> Vec<f64> {
        self.weights.mul_vec(master_values)
    }
}

/// One-shot transfer of master trace values onto the slave trace.
pub fn transfer_linear(master: &InterfaceTrace, values: &[f64], slave: &InterfaceTrace) -> Result<Vec<f64>> {
    if values.len() != master.len() {
        return Err(RomError::DimensionMismatch(format!(
            "{} trace values for {} master nodes",
            values.len(),
            master.len()
        )));
    }
    Ok(InterfaceTransfer::new(master, slave)?.apply(values))
}

/// For each point, the global master dof of the nearest master trace node.
///
/// Ties go to the smallest global index.
pub fn nearest_dof_map(master: &InterfaceTrace, points: &[[f64; 3]]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (c, &g) in master.coords.iter().zip(&master.dof_indices) {
                let d2 = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2) + (c[2] - p[2]).powi(2);
                if d2 < best.0 || (d2 == best.0 && g < best.1) {
                    best = (d2, g);
                }
            }
            best.1
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoxFace, BoxSpec, Mesh};

    fn face(n: usize, order: usize, x0: f64, f: BoxFace) -> InterfaceTrace {
        let spec = BoxSpec {
            origin: vec![x0, 0.0, 0.0],
            extent: vec![1.0; 3],
            subdivisions: vec![n; 3],
            order,
            tags: [(f, "g".to_string())].into(),
        };
        Mesh::new(&spec).unwrap().extract_interface("g").unwrap()
    }

    #[test]
    fn conforming_is_exact_copy() {
        let m = face(4, 1, 0.0, BoxFace::XMax);
        let s = face(4, 1, 1.0, BoxFace::XMin);
        let vals: Vec<f64> = (0..m.len()).map(|i| (i as f64 * 0.77).sin()).collect();
        let t = InterfaceTransfer::new(&m, &s).unwrap();
        assert!(t.is_conforming());
        assert_eq!(t.apply(&vals), vals);
    }

    #[test]
    fn bilinear_fields_are_reproduced_on_nonconforming_traces() {
        let m = face(4, 1, 0.0, BoxFace::XMax);
        let s = face(3, 2, 1.0, BoxFace::XMin);
        let f = |c: &[f64; 3]| 1.0 + 2.0 * c[1] - 3.0 * c[2] + 0.5 * c[1] * c[2];
        let vals: Vec<f64> = m.coords.iter().map(f).collect();
        let out = transfer_linear(&m, &vals, &s).unwrap();
        for (c, v) in s.coords.iter().zip(&out) {
            assert!((v - f(c)).abs() < 1e-13);
        }
        assert!(!InterfaceTransfer::new(&m, &s).unwrap().is_conforming());
    }

    #[test]
    fn distant_slave_is_rejected() {
        let m = face(4, 1, 0.0, BoxFace::XMax);
        let s = face(4, 1, 1.5, BoxFace::XMin);
        assert!(matches!(InterfaceTransfer::new(&m, &s), Err(RomError::ProjectionDistance { .. })));
    }

    #[test]
    fn nearest_prefers_smaller_index_on_ties() {
        let m = face(2, 1, 0.0, BoxFace::XMax);
        // midway between (1, 0, 0) and (1, 0.5, 0)
        let map = nearest_dof_map(&m, &[[1.0, 0.25, 0.0], [1.0, 0.5, 0.49]]);
        let lo = m.dof_indices[0];
        assert_eq!(map[0], lo);
        assert_eq!(map[1], m.dof_indices[m.coords.iter().position(|c| c[1] == 0.5 && c[2] == 0.5).unwrap()]);
    }
}
