//! Finite element spaces of the discrete de Rham complex and the MINI pair.
//!
//! Lowest-order Whitney forms are evaluated directly in physical coordinates
//! from the barycentric coordinates of each cell. For an edge `[p, q]` and a
//! face `[p, q, r]` with ascending global vertex indices,
//!
//! ```text
//! W_e = l_p grad l_q - l_q grad l_p
//! W_f = 2 (l_p grad l_q x grad l_r + l_q grad l_r x grad l_p + l_r grad l_p x grad l_q)
//! ```
//!
//! which is the covariant (edge) and contravariant (face) Piola image of the
//! reference-element basis. In 2D the face space is the clockwise rotation of
//! the edge space, `R(v) = (v_y, -v_x)`, with unit flux through its edge.
//!
//! DG0 functions are indicators with cell averages as degrees of freedom.

mod complex;
mod interp;
mod space;

use std::fmt;
use std::sync::Arc;

pub use complex::{complex_operator, div_values, incidence_curl, incidence_div, incidence_grad};
pub use interp::{
    canonical_interpolate, discrete_curl, interpolate_potential, l2_project, l2_project_field,
    Interpolant,
};
pub(crate) use space::combine as space_combine;
pub use space::{BasisEval, Embed, FieldSpace, PointValue};

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;

/// Boundary treatment of a scalar P1 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarBc {
    Free,
    ZeroTrace,
    /// Full P1 with a scalar Lagrange multiplier enforcing zero mean.
    ZeroMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    P1(ScalarBc),
    /// P1 plus cell bubble in every component; zero trace.
    MiniVector,
    Nedelec0 {
        zero_trace: bool,
    },
    Rt0 {
        zero_trace: bool,
    },
    Dg0,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::P1(bc) => write!(f, "P1({bc:?})"),
            SpaceKind::MiniVector => write!(f, "MiniVector"),
            SpaceKind::Nedelec0 { zero_trace } => write!(f, "Nedelec0(zero_trace={zero_trace})"),
            SpaceKind::Rt0 { zero_trace } => write!(f, "RT0(zero_trace={zero_trace})"),
            SpaceKind::Dg0 => write!(f, "DG0"),
        }
    }
}

impl SpaceKind {
    /// Polynomial degree of the local basis.
    pub fn degree(&self, dim: usize) -> usize {
        match self {
            SpaceKind::P1(_) | SpaceKind::Nedelec0 { .. } | SpaceKind::Rt0 { .. } => 1,
            SpaceKind::MiniVector => dim + 1,
            SpaceKind::Dg0 => 0,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, SpaceKind::P1(_) | SpaceKind::Dg0)
    }
}

/// One finite element space over a mesh: numbering and constrained dofs.
///
/// Numbering: P1 by vertex; MINI component-major, `c * (V + T) + v` for
/// vertex dofs and `c * (V + T) + V + k` for the bubble of cell `k`;
/// Nedelec by edge; RT0 by facet; DG0 by cell.
#[derive(Debug, Clone)]
pub struct DofMap {
    kind: SpaceKind,
    mesh: Arc<SimplicialMesh>,
    n_dofs: usize,
    constrained: Vec<bool>,
    free: Vec<usize>,
}

pub fn build_space(mesh: &Arc<SimplicialMesh>, kind: SpaceKind) -> Result<DofMap> {
    let dim = mesh.dim();
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let (n_dofs, constrained): (usize, Vec<bool>) = match kind {
        SpaceKind::P1(bc) => {
            let c = (0..nv)
                .map(|v| bc == ScalarBc::ZeroTrace && mesh.is_boundary_vertex(v))
                .collect();
            (nv, c)
        }
        SpaceKind::MiniVector => {
            let mut c = Vec::with_capacity(dim * (nv + nc));
            for _ in 0..dim {
                c.extend((0..nv).map(|v| mesh.is_boundary_vertex(v)));
                c.extend(std::iter::repeat_n(false, nc));
            }
            (dim * (nv + nc), c)
        }
        SpaceKind::Nedelec0 { zero_trace } => {
            let c = (0..mesh.n_edges())
                .map(|e| zero_trace && mesh.is_boundary_edge(e))
                .collect();
            (mesh.n_edges(), c)
        }
        SpaceKind::Rt0 { zero_trace } => {
            let c = (0..mesh.n_facets())
                .map(|f| zero_trace && mesh.is_boundary_facet(f))
                .collect();
            (mesh.n_facets(), c)
        }
        SpaceKind::Dg0 => (nc, vec![false; nc]),
    };
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedSpace {
            kind: kind.to_string(),
            dim,
        });
    }
    let free = (0..n_dofs).filter(|i| !constrained[*i]).collect();
    Ok(DofMap {
        kind,
        mesh: Arc::clone(mesh),
        n_dofs,
        constrained,
        free,
    })
}

impl DofMap {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }
    pub fn mesh(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }
    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }
    pub fn n_free(&self) -> usize {
        self.free.len()
    }
    pub fn n_constrained(&self) -> usize {
        self.n_dofs - self.free.len()
    }
    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }
    /// Whether a zero-mean multiplier augments systems posed on this space.
    pub fn has_mean_multiplier(&self) -> bool {
        self.kind == SpaceKind::P1(ScalarBc::ZeroMean)
    }
    /// Number of vector components of the basis (1 for scalar spaces).
    pub fn components(&self) -> usize {
        if self.kind.is_scalar() {
            1
        } else {
            self.dim()
        }
    }
    /// Global dofs touching cell `c`, in local basis order.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let mesh = &self.mesh;
        match self.kind {
            SpaceKind::P1(_) => mesh.cell(c).to_vec(),
            SpaceKind::MiniVector => {
                let stride = mesh.n_vertices() + mesh.n_cells();
                let mut d = Vec::with_capacity(self.dim() * (self.dim() + 2));
                for comp in 0..self.dim() {
                    d.extend(mesh.cell(c).iter().map(|v| comp * stride + v));
                    d.push(comp * stride + mesh.n_vertices() + c);
                }
                d
            }
            SpaceKind::Nedelec0 { .. } => mesh.cell_edges(c).to_vec(),
            SpaceKind::Rt0 { .. } => mesh.cell_facets(c).to_vec(),
            SpaceKind::Dg0 => vec![c],
        }
    }
}

/// Value of a finite element function at barycentric point `lambda` of
/// `cell`. Scalar spaces return the value in the first slot.
pub fn evaluate_field(
    map: &DofMap,
    field: &[f64],
    cell: usize,
    lambda: &[f64],
) -> Result<[f64; 3]> {
    if cell >= map.mesh().n_cells() {
        return Err(Error::CellOutOfRange(cell));
    }
    if field.len() != map.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "field has {} values, space has {} dofs",
            field.len(),
            map.n_dofs()
        )));
    }
    let space = FieldSpace::single(map.clone());
    Ok(space.evaluate(field, cell, lambda).value)
}
