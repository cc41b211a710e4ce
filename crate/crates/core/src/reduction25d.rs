//! Planar operators and component bookkeeping for z-invariant (2.5D) fields.
//!
//! For fields independent of `z` the 3D complex splits into an in-plane part
//! (Nedelec/RT with `rot` and the perpendicular gradient) and out-of-plane
//! scalars. With the conventions
//!
//! ```text
//! v x phi = (v2 phi, -v1 phi),   v x w = v1 w2 - v2 w1
//! curl (0, 0, phi) = grad_perp phi = (d_y phi, -d_x phi)
//! ```
//!
//! the 2.5D system is the 3D one posed on the product spaces built by
//! [`crate::scheme::Discretization`]; this module exposes the pieces.

use crate::assembly::{cross_matrix, curl_pairing_quadrature};
use crate::error::{Error, Result};
use crate::feec::{complex_operator, DofMap, Embed, FieldSpace, ScalarBc, SpaceKind};
use crate::scheme::{Discretization, State};
use crate::sparse::{CsrMatrix, TripletBuilder};

fn require_2d(map: &DofMap) -> Result<()> {
    if map.dim() != 2 {
        return Err(Error::UnsupportedDimension(map.dim()));
    }
    Ok(())
}

/// `grad_perp` from P1 into RT0 as the edge-vertex incidence: the flux of
/// `(d_y phi, -d_x phi)` through `[p, q]` is `phi(q) - phi(p)`.
pub fn perp_gradient_operator(scalar_space: &DofMap, target: &DofMap) -> Result<CsrMatrix> {
    require_2d(scalar_space)?;
    require_2d(target)?;
    match (scalar_space.kind(), target.kind()) {
        (SpaceKind::P1(_), SpaceKind::Rt0 { .. }) => complex_operator(scalar_space, target),
        _ => Err(Error::NotAdjacent {
            from: scalar_space.kind().to_string(),
            to: target.kind().to_string(),
        }),
    }
}

/// `rot` of the in-plane edge space.
///
/// Into DG0 the result maps dofs to cell integrals of `rot v`. Into a P1
/// space it is the Galerkin pairing `R[q, v] = <rot v, q>`.
pub fn rot_operator(inplane_space: &DofMap, target: &DofMap) -> Result<CsrMatrix> {
    require_2d(inplane_space)?;
    require_2d(target)?;
    if !matches!(inplane_space.kind(), SpaceKind::Nedelec0 { .. }) {
        return Err(Error::UnsupportedSpace {
            kind: inplane_space.kind().to_string(),
            dim: 2,
        });
    }
    match target.kind() {
        SpaceKind::Dg0 => complex_operator(inplane_space, target),
        SpaceKind::P1(_) => {
            let edge = FieldSpace::single(inplane_space.clone());
            let scalar = FieldSpace::product(vec![(target.clone(), Embed::Z)]);
            Ok(curl_pairing_quadrature(&edge, &scalar))
        }
        k => Err(Error::UnsupportedSpace {
            kind: k.to_string(),
            dim: 2,
        }),
    }
}

/// Frozen-field cross-product blocks of one 2.5D step.
#[derive(Debug, Clone)]
pub struct PlanarCrossBlocks {
    /// `K[phi, chi] = <chi x B, phi>` with `phi` in the velocity space and
    /// `chi` in the edge space: the Lorentz term of the momentum equation
    /// (its transpose, with opposite sign, is the `u x B` term of Ohm's law).
    pub lorentz: CsrMatrix,
    /// `H[psi, chi] = <chi x B, psi>` on the edge space, exactly skew.
    pub hall: CsrMatrix,
}

impl PlanarCrossBlocks {
    /// Sub-block `(row part, column part)` of the Lorentz coupling, parts
    /// being 0 (in-plane) and 1 (out-of-plane).
    pub fn lorentz_block(&self, disc: &Discretization, row: usize, col: usize) -> CsrMatrix {
        block(&self.lorentz, &disc.velocity, row, &disc.edge, col)
    }

    pub fn hall_block(&self, disc: &Discretization, row: usize, col: usize) -> CsrMatrix {
        block(&self.hall, &disc.edge, row, &disc.edge, col)
    }

    /// The cross-product part of the step operator on `(u, J)`,
    /// `[[0, -K], [K^T, eta H]]`, as one matrix.
    pub fn aggregate(&self, eta: f64) -> CsrMatrix {
        let nu = self.lorentz.nrows();
        let nj = self.hall.nrows();
        let mut t = TripletBuilder::new(nu + nj, nu + nj);
        for (i, j, v) in self.lorentz.iter() {
            t.push(i, nu + j, -v);
            t.push(nu + j, i, v);
        }
        t.add_block(nu, nu, &self.hall, eta);
        t.build()
    }
}

fn block(m: &CsrMatrix, rows: &FieldSpace, rp: usize, cols: &FieldSpace, cp: usize) -> CsrMatrix {
    let range = |s: &FieldSpace, k: usize| {
        let (map, _, off) = s.part(k);
        (off..off + map.n_dofs()).collect::<Vec<_>>()
    };
    m.submatrix(&range(rows, rp), &range(cols, cp))
}

/// Cross-product blocks from the previous magnetic field `(B~, B3)`, given
/// as one vector on the product magnetic space.
pub fn planar_cross_blocks(disc: &Discretization, b_prev: &[f64]) -> Result<PlanarCrossBlocks> {
    if disc.dim() != 2 {
        return Err(Error::UnsupportedDimension(disc.dim()));
    }
    if b_prev.len() != disc.magnetic.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "B has {} values, space has {} dofs",
            b_prev.len(),
            disc.magnetic.n_dofs()
        )));
    }
    Ok(PlanarCrossBlocks {
        lorentz: cross_matrix(&disc.edge, &disc.velocity, &disc.magnetic, b_prev),
        hall: cross_matrix(&disc.edge, &disc.edge, &disc.magnetic, b_prev),
    })
}

/// A 2.5D state split into in-plane and out-of-plane components.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFieldBundle {
    pub u: Vec<f64>,
    pub u3: Vec<f64>,
    pub b: Vec<f64>,
    pub b3: Vec<f64>,
    pub e: Vec<f64>,
    pub e3: Vec<f64>,
    pub j: Vec<f64>,
    pub j3: Vec<f64>,
}

fn split(space: &FieldSpace, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (_, _, off) = space.part(1);
    (v[..off].to_vec(), v[off..].to_vec())
}

impl PlanarFieldBundle {
    pub fn split(disc: &Discretization, state: &State) -> Result<Self> {
        if disc.dim() != 2 {
            return Err(Error::UnsupportedDimension(disc.dim()));
        }
        let (u, u3) = split(&disc.velocity, &state.u);
        let (b, b3) = split(&disc.magnetic, &state.b);
        let (e, e3) = split(&disc.edge, &state.e);
        let (j, j3) = split(&disc.edge, &state.j);
        Ok(Self {
            u,
            u3,
            b,
            b3,
            e,
            e3,
            j,
            j3,
        })
    }

    /// Reassembles the product-space vectors into `state`.
    pub fn join_into(&self, state: &mut State) {
        let cat = |a: &[f64], b: &[f64]| [a, b].concat();
        state.u = cat(&self.u, &self.u3);
        state.b = cat(&self.b, &self.b3);
        state.e = cat(&self.e, &self.e3);
        state.j = cat(&self.j, &self.j3);
    }
}

/// The component spaces of the 2.5D product spaces, in the order
/// `(velocity, magnetic, edge)` as `(in-plane, out-of-plane)` kinds.
pub fn component_kinds() -> [(SpaceKind, SpaceKind); 3] {
    [
        (SpaceKind::MiniVector, SpaceKind::P1(ScalarBc::ZeroTrace)),
        (
            SpaceKind::Rt0 { zero_trace: true },
            SpaceKind::P1(ScalarBc::Free),
        ),
        (
            SpaceKind::Nedelec0 { zero_trace: true },
            SpaceKind::P1(ScalarBc::ZeroTrace),
        ),
    ]
}
