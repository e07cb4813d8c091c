//! Structured box meshes with tensor-product Lagrange elements.
//!
//! Degrees of freedom live on the nodal lattice with `order * n_i + 1` points
//! along axis `i` and are numbered lexicographically, x fastest.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};

/// One of the `2 * dim` faces of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoxFace {
    #[serde(rename = "x-")]
    XMin,
    #[serde(rename = "x+")]
    XMax,
    #[serde(rename = "y-")]
    YMin,
    #[serde(rename = "y+")]
    YMax,
    #[serde(rename = "z-")]
    ZMin,
    #[serde(rename = "z+")]
    ZMax,
}

impl BoxFace {
    pub const ALL: [BoxFace; 6] =
        [BoxFace::XMin, BoxFace::XMax, BoxFace::YMin, BoxFace::YMax, BoxFace::ZMin, BoxFace::ZMax];

    pub fn axis(self) -> usize {
        match self {
            BoxFace::XMin | BoxFace::XMax => 0,
            BoxFace::YMin | BoxFace::YMax => 1,
            BoxFace::ZMin | BoxFace::ZMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, BoxFace::XMax | BoxFace::YMax | BoxFace::ZMax)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoxFace::XMin => "x-",
            BoxFace::XMax => "x+",
            BoxFace::YMin => "y-",
            BoxFace::YMax => "y+",
            BoxFace::ZMin => "z-",
            BoxFace::ZMax => "z+",
        }
    }
}

impl fmt::Display for BoxFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometry description of an axis-aligned box mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub subdivisions: Vec<usize>,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Face labels; faces not listed are labelled by their own name (`"x-"` etc).
    #[serde(default)]
    pub tags: BTreeMap<BoxFace, String>,
}

fn default_order() -> usize {
    1
}

impl BoxSpec {
    pub fn unit_cube(n: usize, order: usize) -> BoxSpec {
        BoxSpec {
            origin: vec![0.0; 3],
            extent: vec![1.0; 3],
            subdivisions: vec![n; 3],
            order,
            tags: BTreeMap::new(),
        }
    }

    pub fn with_tag(mut self, face: BoxFace, label: &str) -> BoxSpec {
        self.tags.insert(face, label.to_string());
        self
    }
}

/// Nodes on the tagged part of the boundary, in ascending global dof order.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTrace {
    pub dof_indices: Vec<usize>,
    pub coords: Vec<[f64; 3]>,
    pub parent_dim: usize,
    /// Cell diagonal of the parent mesh.
    pub h: f64,
}

impl InterfaceTrace {
    pub fn len(&self) -> usize {
        self.dof_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dof_indices.is_empty()
    }

    /// Gathers the trace values of a full nodal vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dof_indices.iter().map(|&i| full[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    order: usize,
    origin: [f64; 3],
    extent: [f64; 3],
    cells: [usize; 3],
    tags: BTreeMap<BoxFace, String>,
}

impl Mesh {
    pub fn new(spec: &BoxSpec) -> Result<Mesh> {
        let dim = spec.subdivisions.len();
        if !(dim == 2 || dim == 3) {
            return Err(RomError::InvalidGeometry(format!("dimension must be 2 or 3, got {dim}")));
        }
        if spec.origin.len() != dim || spec.extent.len() != dim {
            return Err(RomError::InvalidGeometry(format!(
                "origin/extent must have {dim} entries, got {}/{}",
                spec.origin.len(),
                spec.extent.len()
            )));
        }
        if spec.subdivisions.contains(&0) {
            return Err(RomError::InvalidGeometry("zero subdivisions".into()));
        }
        if spec.extent.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(RomError::InvalidGeometry("extents must be positive and finite".into()));
        }
        if !(spec.order == 1 || spec.order == 2) {
            return Err(RomError::InvalidGeometry(format!("element order must be 1 or 2, got {}", spec.order)));
        }
        for face in spec.tags.keys() {
            if face.axis() >= dim {
                return Err(RomError::InvalidGeometry(format!("face {face} does not exist in {dim}D")));
            }
        }
        let mut origin = [0.0; 3];
        let mut extent = [0.0; 3];
        let mut cells = [1; 3];
        for a in 0..dim {
            origin[a] = spec.origin[a];
            extent[a] = spec.extent[a];
            cells[a] = spec.subdivisions[a];
        }
        Ok(Mesh { dim, order: spec.order, origin, extent, cells, tags: spec.tags.clone() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn cells_per_axis(&self) -> [usize; 3] {
        self.cells
    }

    /// Nodes per axis; 1 for unused axes.
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for (a, na) in n.iter_mut().enumerate().take(self.dim) {
            *na = self.order * self.cells[a] + 1;
        }
        n
    }

    pub fn num_dofs(&self) -> usize {
        self.nodes_per_axis().iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    pub fn cell_size(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for a in 0..self.dim {
            s[a] = self.extent[a] / self.cells[a] as f64;
        }
        s
    }

    /// Cell diagonal, the mesh size `h`.
    pub fn h(&self) -> f64 {
        self.cell_size().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size()[..self.dim].iter().product()
    }

    pub fn node_index(&self, ijk: [usize; 3]) -> usize {
        let n = self.nodes_per_axis();
        (ijk[2] * n[1] + ijk[1]) * n[0] + ijk[0]
    }

    pub fn node_lattice(&self, dof: usize) -> [usize; 3] {
        let n = self.nodes_per_axis();
        [dof % n[0], (dof / n[0]) % n[1], dof / (n[0] * n[1])]
    }

    pub fn node_coord(&self, dof: usize) -> [f64; 3] {
        let ijk = self.node_lattice(dof);
        let s = self.cell_size();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + ijk[a] as f64 * s[a] / self.order as f64;
        }
        x
    }

    pub fn node_coords(&self) -> Vec<[f64; 3]> {
        (0..self.num_dofs()).map(|i| self.node_coord(i)).collect()
    }

    /// Lattice position of a cell, x fastest.
    pub fn cell_lattice(&self, cell: usize) -> [usize; 3] {
        let c = self.cells;
        [cell % c[0], (cell / c[0]) % c[1], cell / (c[0] * c[1])]
    }

    /// Lower corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> [f64; 3] {
        let ijk = self.cell_lattice(cell);
        let s = self.cell_size();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + ijk[a] as f64 * s[a];
        }
        x
    }

    pub fn nodes_per_cell(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }

    /// Global dofs of a cell in local lexicographic order (x fastest).
    pub fn cell_dofs(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        let c = self.cell_lattice(cell);
        let q = self.order;
        let kz = if self.dim == 3 { q + 1 } else { 1 };
        for k in 0..kz {
            for j in 0..=q {
                for i in 0..=q {
                    out.push(self.node_index([q * c[0] + i, q * c[1] + j, q * c[2] + k]));
                }
            }
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = BoxFace> + '_ {
        BoxFace::ALL.into_iter().filter(move |f| f.axis() < self.dim)
    }

    pub fn face_label(&self, face: BoxFace) -> String {
        self.tags.get(&face).cloned().unwrap_or_else(|| face.name().to_string())
    }

    /// Every boundary face with its label.
    pub fn boundary_tags(&self) -> BTreeMap<BoxFace, String> {
        self.faces().map(|f| (f, self.face_label(f))).collect()
    }

    /// Sorted dofs on a single face.
    pub fn face_dofs(&self, face: BoxFace) -> Vec<usize> {
        let n = self.nodes_per_axis();
        let axis = face.axis();
        let fixed = if face.is_max() { n[axis] - 1 } else { 0 };
        let mut out = Vec::new();
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let ijk = [i, j, k];
                    if ijk[axis] == fixed {
                        out.push(self.node_index(ijk));
                    }
                }
            }
        }
        out
    }

    /// Sorted, deduplicated dofs on every face carrying `tag`.
    pub fn tagged_dofs(&self, tag: &str) -> Result<Vec<usize>> {
        let faces: Vec<BoxFace> = self.faces().filter(|&f| self.face_label(f) == tag).collect();
        if faces.is_empty() {
            return Err(RomError::MissingTag(tag.to_string()));
        }
        let mut dofs: Vec<usize> = faces.iter().flat_map(|&f| self.face_dofs(f)).collect();
        dofs.sort_unstable();
        dofs.dedup();
        Ok(dofs)
    }

    /// Extracts the nodal trace on the boundary portion labelled `tag`.
    pub fn extract_interface(&self, tag: &str) -> Result<InterfaceTrace> {
        let dofs = self.tagged_dofs(tag)?;
        if dofs.is_empty() {
            return Err(RomError::EmptyTrace(tag.to_string()));
        }
        Ok(InterfaceTrace {
            coords: dofs.iter().map(|&d| self.node_coord(d)).collect(),
            dof_indices: dofs,
            parent_dim: self.dim,
            h: self.h(),
        })
    }
}

/// Builds a box mesh; see [`Mesh::new`].
pub fn build_box_mesh(spec: &BoxSpec) -> Result<Mesh> {
    Mesh::new(spec)
}
