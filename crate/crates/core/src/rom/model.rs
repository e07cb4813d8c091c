//! Full-order model of one subproblem.
//!
//! [`ModelDescription`] holds the mesh, the bound expressions and the
//! constraint layout, and is cheap to build. [`FullOrderModel`] adds the
//! assembled affine matrices and load vectors.

use std::ops::Deref;

use crate::error::{Result, RomError};
use crate::expr::{Expr, ExprSource};
use crate::fem::{assemble_advection, assemble_diffusion, assemble_load, assemble_mass, assemble_weighted_mass, CsrMatrix};
use crate::mesh::{InterfaceTrace, Mesh};
use crate::sampling::ParameterSpace;

use super::spec::{ModelSpec, OperatorTermSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Diffusion,
    Reaction,
    Advection,
}

/// `theta(mu, t)` times the form built from spatial `fields`.
#[derive(Debug, Clone)]
pub struct OperatorTerm {
    pub kind: TermKind,
    pub theta: Expr,
    pub fields: Vec<Expr>,
}

#[derive(Debug, Clone)]
pub struct ForcingTerm {
    pub theta: Expr,
    pub field: Expr,
}

impl ForcingTerm {
    /// True if the field depends on space only, so its load vector is fixed.
    pub fn is_separable(&self) -> bool {
        !self.field.depends_on_params() && !self.field.depends_on_time()
    }
}

/// Dirichlet dofs sharing one boundary expression; groups are disjoint.
#[derive(Debug, Clone)]
pub struct DirichletGroup {
    pub tag: String,
    pub dofs: Vec<usize>,
    pub value: Expr,
}

impl DirichletGroup {
    pub fn is_uniform(&self) -> bool {
        !self.value.depends_on_space()
    }

    /// Values on `dofs`.
    pub fn values(&self, mesh: &Mesh, mu: &[f64], t: f64) -> Vec<f64> {
        match self.value.as_constant() {
            Some(c) => vec![c; self.dofs.len()],
            None => self.dofs.iter().map(|&d| self.value.eval(&mesh.node_coord(d), t, mu)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelDescription {
    pub mesh: Mesh,
    pub space: ParameterSpace,
    pub terms: Vec<OperatorTerm>,
    pub forcing: Vec<ForcingTerm>,
    /// Non-interface Dirichlet groups.
    pub groups: Vec<DirichletGroup>,
    pub interface: InterfaceTrace,
    /// True if the interface carries Dirichlet data (slave side).
    pub interface_constrained: bool,
    /// Sorted union of constrained dofs.
    pub constrained: Vec<usize>,
    pub initial: Expr,
    pub time_dependent: bool,
}

fn require_spatial_only(e: &Expr, what: &str) -> Result<()> {
    if e.depends_on_params() || e.depends_on_time() {
        return Err(RomError::config(format!(
            "{what} field `{}` must depend on space only; put parameter and time dependence in theta",
            e.source()
        )));
    }
    Ok(())
}

fn require_global(e: &Expr, what: &str) -> Result<()> {
    if e.depends_on_space() {
        return Err(RomError::config(format!("{what} theta `{}` must not depend on x, y, z", e.source())));
    }
    Ok(())
}

impl ModelDescription {
    /// Binds expressions and lays out constraints. `interface_constrained` marks the slave side.
    pub fn new(spec: &ModelSpec, interface_tag: &str, interface_constrained: bool) -> Result<ModelDescription> {
        let mesh = Mesh::new(&spec.mesh)?;
        let space = ParameterSpace::new(spec.parameters.params.clone())?;
        let names = space.names();
        for n in &names {
            if ["x", "y", "z", "t", "pi", "e"].contains(&n.as_str()) {
                return Err(RomError::config(format!("parameter name `{n}` is reserved")));
            }
        }
        if spec.operator.is_empty() {
            return Err(RomError::config("model operator has no terms"));
        }
        let bind = |s: &ExprSource| s.bind(&names);
        let mut terms = Vec::with_capacity(spec.operator.len());
        for t in &spec.operator {
            let (kind, theta, fields) = match t {
                OperatorTermSpec::Diffusion { theta, field } => (TermKind::Diffusion, theta, vec![field.clone()]),
                OperatorTermSpec::Reaction { theta, field } => (TermKind::Reaction, theta, vec![field.clone()]),
                OperatorTermSpec::Advection { theta, velocity } => {
                    if velocity.len() != mesh.dim() {
                        return Err(RomError::config(format!(
                            "advection velocity has {} components on a {}D mesh",
                            velocity.len(),
                            mesh.dim()
                        )));
                    }
                    (TermKind::Advection, theta, velocity.clone())
                }
            };
            let theta = bind(theta)?;
            require_global(&theta, "operator")?;
            let fields = fields.iter().map(bind).collect::<Result<Vec<_>>>()?;
            for f in &fields {
                require_spatial_only(f, "operator")?;
            }
            terms.push(OperatorTerm { kind, theta, fields });
        }
        let mut forcing = Vec::new();
        for f in &spec.forcing {
            let theta = bind(&f.theta)?;
            require_global(&theta, "forcing")?;
            forcing.push(ForcingTerm { theta, field: bind(&f.field)? });
        }
        let interface = mesh.extract_interface(interface_tag)?;
        let mut taken = vec![false; mesh.num_dofs()];
        if interface_constrained {
            for &d in &interface.dof_indices {
                taken[d] = true;
            }
        }
        let mut groups = Vec::new();
        for d in &spec.dirichlet {
            let value = bind(&d.value)?;
            let dofs: Vec<usize> = mesh.tagged_dofs(&d.tag)?.into_iter().filter(|&i| !taken[i]).collect();
            for &i in &dofs {
                taken[i] = true;
            }
            groups.push(DirichletGroup { tag: d.tag.clone(), dofs, value });
        }
        let constrained: Vec<usize> = (0..mesh.num_dofs()).filter(|&i| taken[i]).collect();
        Ok(ModelDescription {
            mesh,
            space,
            terms,
            forcing,
            groups,
            interface,
            interface_constrained,
            constrained,
            initial: bind(&spec.initial)?,
            time_dependent: spec.time_dependent,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_dofs()
    }

    pub fn check_mu(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.space.dim() {
            return Err(RomError::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.space.dim(),
                mu.len()
            )));
        }
        Ok(())
    }

    /// Affine coefficients at `(mu, t)`; diffusion coefficients must be positive.
    pub fn thetas(&self, mu: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_mu(mu)?;
        self.terms
            .iter()
            .map(|term| {
                let v = term.theta.eval_global(t, mu);
                if !v.is_finite() || (term.kind == TermKind::Diffusion && !(v > 0.0)) {
                    return Err(RomError::CoefficientDomain(format!(
                        "theta `{}` = {v} at mu = {mu:?}, t = {t}",
                        term.theta.source()
                    )));
                }
                Ok(v)
            })
            .collect()
    }

    pub fn forcing_thetas(&self, mu: &[f64], t: f64) -> Vec<f64> {
        self.forcing.iter().map(|f| f.theta.eval_global(t, mu)).collect()
    }

    pub fn operator_is_time_dependent(&self) -> bool {
        self.terms.iter().any(|t| t.theta.depends_on_time())
    }

    pub fn load_is_time_dependent(&self) -> bool {
        self.forcing.iter().any(|f| f.theta.depends_on_time() || f.field.depends_on_time())
    }

    pub fn constraints_are_time_dependent(&self) -> bool {
        self.groups.iter().any(|g| g.value.depends_on_time())
    }

    pub fn has_advection(&self) -> bool {
        self.terms.iter().any(|t| t.kind == TermKind::Advection)
    }

    /// Writes the Dirichlet values into a full vector; interface values are
    /// aligned with the interface trace and required on the slave side.
    pub fn write_constraints(&self, mu: &[f64], t: f64, interface_values: Option<&[f64]>, full: &mut [f64]) {
        for g in &self.groups {
            for (&d, v) in g.dofs.iter().zip(g.values(&self.mesh, mu, t)) {
                full[d] = v;
            }
        }
        if self.interface_constrained {
            let vals = interface_values.expect("slave constraints need interface values");
            for (&d, &v) in self.interface.dof_indices.iter().zip(vals) {
                full[d] = v;
            }
        }
    }

    /// Values on `constrained`.
    pub fn constraint_values(&self, mu: &[f64], t: f64, interface_values: Option<&[f64]>) -> Vec<f64> {
        let mut full = vec![0.0; self.num_dofs()];
        self.write_constraints(mu, t, interface_values, &mut full);
        self.constrained.iter().map(|&d| full[d]).collect()
    }

    pub fn initial_state(&self, mu: &[f64]) -> Vec<f64> {
        if let Some(c) = self.initial.as_constant() {
            return vec![c; self.num_dofs()];
        }
        (0..self.num_dofs()).map(|i| self.initial.eval(&self.mesh.node_coord(i), 0.0, mu)).collect()
    }

    pub fn constrained_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.num_dofs()];
        self.constrained.iter().for_each(|&d| m[d] = true);
        m
    }

    /// Group index owning each constrained dof, if any (interface dofs have none).
    pub fn group_of(&self, dof: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.dofs.binary_search(&dof).is_ok())
    }
}

/// A model description with its assembled affine terms.
#[derive(Debug, Clone)]
pub struct FullOrderModel {
    pub desc: ModelDescription,
    pub mass: CsrMatrix,
    /// One matrix per operator term.
    pub matrices: Vec<CsrMatrix>,
    /// Fixed load vector per separable forcing term.
    pub load_vectors: Vec<Option<Vec<f64>>>,
}

impl Deref for FullOrderModel {
    type Target = ModelDescription;
    fn deref(&self) -> &ModelDescription {
        &self.desc
    }
}

impl FullOrderModel {
    pub fn new(spec: &ModelSpec, interface_tag: &str, interface_constrained: bool) -> Result<FullOrderModel> {
        let desc = ModelDescription::new(spec, interface_tag, interface_constrained)?;
        let mesh = &desc.mesh;
        let zeros = vec![0.0; desc.space.dim()];
        let matrices = desc
            .terms
            .iter()
            .map(|t| match t.kind {
                TermKind::Diffusion => assemble_diffusion(mesh, &t.fields[0], &zeros, 0.0),
                TermKind::Reaction => assemble_weighted_mass(mesh, &t.fields[0], &zeros, 0.0),
                TermKind::Advection => assemble_advection(mesh, &t.fields, &zeros, 0.0),
            })
            .collect::<Result<Vec<_>>>()?;
        let load_vectors = desc
            .forcing
            .iter()
            .map(|f| f.is_separable().then(|| assemble_load(mesh, &f.field, &zeros, 0.0)))
            .collect();
        Ok(FullOrderModel { mass: assemble_mass(mesh), desc, matrices, load_vectors })
    }

    pub fn operator(&self, mu: &[f64], t: f64) -> Result<CsrMatrix> {
        let th = self.thetas(mu, t)?;
        let mats: Vec<&CsrMatrix> = self.matrices.iter().collect();
        CsrMatrix::weighted_sum(&mats, &th)
    }

    /// True if the operator is symmetric positive semi-definite at `mu` for all `t`.
    pub fn is_symmetric_coercive(&self, mu: &[f64]) -> bool {
        if self.has_advection() || self.operator_is_time_dependent() {
            return false;
        }
        self.terms.iter().zip(&self.matrices).all(|(t, m)| match t.kind {
            TermKind::Diffusion => true,
            TermKind::Reaction => t.theta.eval_global(0.0, mu) >= 0.0 && m.values().iter().all(|&v| v >= 0.0),
            TermKind::Advection => false,
        })
    }

    /// Load term `k` at `(mu, t)` without its theta.
    pub fn load_term(&self, k: usize, mu: &[f64], t: f64) -> Vec<f64> {
        match &self.load_vectors[k] {
            Some(v) => v.clone(),
            None => assemble_load(&self.mesh, &self.forcing[k].field, mu, t),
        }
    }

    pub fn load(&self, mu: &[f64], t: f64) -> Vec<f64> {
        let mut f = vec![0.0; self.num_dofs()];
        for (k, th) in self.forcing_thetas(mu, t).into_iter().enumerate() {
            if th == 0.0 {
                continue;
            }
            let owned;
            let v = match &self.load_vectors[k] {
                Some(v) => v,
                None => {
                    owned = assemble_load(&self.mesh, &self.forcing[k].field, mu, t);
                    &owned
                }
            };
            f.iter_mut().zip(v).for_each(|(a, b)| *a += th * b);
        }
        f
    }
}
