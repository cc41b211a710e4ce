use super::{DofMap, SpaceKind};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Edge-vertex incidence: `G[e, p] = -1`, `G[e, q] = +1` for `e = [p, q]`.
///
/// This is the gradient from P1 into the edge space and, in 2D, also the
/// perpendicular gradient from P1 into the rotated face space.
pub fn incidence_grad(mesh: &SimplicialMesh) -> CsrMatrix {
    let mut t =
        TripletBuilder::with_capacity(mesh.n_edges(), mesh.n_vertices(), 2 * mesh.n_edges());
    for (e, [p, q]) in mesh.edges().iter().enumerate() {
        t.push(e, *p, -1.0);
        t.push(e, *q, 1.0);
    }
    t.build()
}

/// Face-edge incidence (3D): `[a,b,c] -> [a,b] + [b,c] - [a,c]`.
pub fn incidence_curl(mesh: &SimplicialMesh) -> CsrMatrix {
    let mut t = TripletBuilder::with_capacity(mesh.n_faces(), mesh.n_edges(), 3 * mesh.n_faces());
    for f in 0..mesh.n_faces() {
        for (e, s) in mesh.face_edges(f).iter().zip(mesh.face_edge_signs(f)) {
            t.push(f, *e, s as f64);
        }
    }
    t.build()
}

/// Cell-facet incidence with outward signs. Maps face-space dofs to cell
/// integrals of the divergence; in 2D it also maps edge-space dofs to cell
/// integrals of the scalar curl.
pub fn incidence_div(mesh: &SimplicialMesh) -> CsrMatrix {
    let nf = mesh.dim() + 1;
    let mut t = TripletBuilder::with_capacity(mesh.n_cells(), mesh.n_facets(), nf * mesh.n_cells());
    for c in 0..mesh.n_cells() {
        for (f, s) in mesh.cell_facets(c).iter().zip(mesh.cell_facet_signs(c)) {
            t.push(c, *f, *s as f64);
        }
    }
    t.build()
}

/// Exact differential between adjacent spaces of the discrete complex, acting
/// on all dofs (constrained ones included).
///
/// 3D: P1 -> Nedelec (grad), Nedelec -> RT (curl), RT -> DG0 (div).
/// 2D: P1 -> Nedelec (grad), P1 -> RT (perpendicular gradient),
/// Nedelec -> DG0 (rot), RT -> DG0 (div).
///
/// Matrices into DG0 return cell integrals; divide by the cell volume for
/// the DG0 dofs (see [`div_values`]).
pub fn complex_operator(from: &DofMap, to: &DofMap) -> Result<CsrMatrix> {
    let mesh = from.mesh();
    let not_adjacent = || Error::NotAdjacent {
        from: from.kind().to_string(),
        to: to.kind().to_string(),
    };
    if !std::sync::Arc::ptr_eq(mesh, to.mesh()) {
        return Err(not_adjacent());
    }
    let dim = mesh.dim();
    use SpaceKind::*;
    match (from.kind(), to.kind()) {
        (P1(_), Nedelec0 { .. }) => Ok(incidence_grad(mesh)),
        (P1(_), Rt0 { .. }) if dim == 2 => Ok(incidence_grad(mesh)),
        (Nedelec0 { .. }, Rt0 { .. }) if dim == 3 => Ok(incidence_curl(mesh)),
        (Nedelec0 { .. }, Dg0) if dim == 2 => Ok(incidence_div(mesh)),
        (Rt0 { .. }, Dg0) => Ok(incidence_div(mesh)),
        _ => Err(not_adjacent()),
    }
}

/// Piecewise-constant divergence of a face-space field, one value per cell.
pub fn div_values(mesh: &SimplicialMesh, b: &[f64]) -> Vec<f64> {
    (0..mesh.n_cells())
        .map(|c| {
            let s: f64 = mesh
                .cell_facets(c)
                .iter()
                .zip(mesh.cell_facet_signs(c))
                .map(|(f, s)| *s as f64 * b[*f])
                .sum();
            s / mesh.volume(c)
        })
        .collect()
}
