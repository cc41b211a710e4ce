//! Galerkin assembly over product spaces of 3-vector valued functions.
//!
//! Every form is integrated with a collapsed Gauss rule exact for the
//! polynomial degree of its integrand, so skew-symmetry and energy
//! identities hold to rounding.

use super::QuadratureRule;
use crate::feec::{incidence_curl, BasisEval, FieldSpace, PointValue, SpaceKind};
use crate::mesh::{cross, dot};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Degree used for integrals of analytic data.
pub const LOAD_DEGREE: usize = 10;

fn rule_for(space: &FieldSpace, degree: usize) -> QuadratureRule {
    QuadratureRule::simplex(space.mesh().dim(), degree.max(1))
}

/// Generic cell loop for a bilinear form. `kernel` receives the quadrature
/// point and weight, the evaluated trial and test bases and the local matrix
/// (test-major) to accumulate into; `finish` may post-process each local
/// matrix before it is scattered.
fn assemble<K, Fin>(
    trial: &FieldSpace,
    test: &FieldSpace,
    degree: usize,
    mut kernel: K,
    mut finish: Fin,
) -> CsrMatrix
where
    K: FnMut(usize, &[f64; 4], f64, &BasisEval, &BasisEval, &mut [f64]),
    Fin: FnMut(&mut [f64], usize),
{
    let mesh = trial.mesh();
    let rule = rule_for(trial, degree);
    let mut bt = BasisEval::default();
    let mut bs = BasisEval::default();
    let mut local = Vec::new();
    let mut out = TripletBuilder::new(test.n_dofs(), trial.n_dofs());
    for c in 0..mesh.n_cells() {
        let g = mesh.barycentric_gradients(c);
        let mut first = true;
        for (lam, w) in rule.scaled(mesh.volume(c)) {
            trial.eval_basis(c, &g, lam, &mut bt);
            test.eval_basis(c, &g, lam, &mut bs);
            if first {
                local.clear();
                local.resize(bs.len() * bt.len(), 0.0);
                first = false;
            }
            kernel(c, lam, w, &bt, &bs, &mut local);
        }
        finish(&mut local, bt.len());
        for (i, row) in bs.dofs.iter().enumerate() {
            for (j, col) in bt.dofs.iter().enumerate() {
                let v = local[i * bt.len() + j];
                if v != 0.0 {
                    out.push(*row, *col, v);
                }
            }
        }
    }
    out.build()
}

fn no_finish(_: &mut [f64], _: usize) {}

fn antisymmetrise(local: &mut [f64], n: usize) {
    for i in 0..n {
        local[i * n + i] = 0.0;
        for j in i + 1..n {
            let a = 0.5 * (local[i * n + j] - local[j * n + i]);
            local[i * n + j] = a;
            local[j * n + i] = -a;
        }
    }
}

/// Evaluates a frozen coefficient field at quadrature points.
struct Frozen<'a> {
    space: &'a FieldSpace,
    values: &'a [f64],
    basis: BasisEval,
    cell: usize,
    g: [[f64; 3]; 4],
}

impl<'a> Frozen<'a> {
    fn new(space: &'a FieldSpace, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), space.n_dofs(), "frozen field length mismatch");
        Self {
            space,
            values,
            basis: BasisEval::default(),
            cell: usize::MAX,
            g: [[0.0; 3]; 4],
        }
    }

    fn at(&mut self, c: usize, lam: &[f64; 4]) -> PointValue {
        if c != self.cell {
            self.cell = c;
            self.g = self.space.mesh().barycentric_gradients(c);
        }
        self.space.eval_basis(c, &self.g, lam, &mut self.basis);
        crate::feec::space_combine(&self.basis, self.values)
    }
}

/// Mass matrix `M[i, j] = int phi_j . phi_i` on one space.
pub fn mass_matrix(space: &FieldSpace) -> CsrMatrix {
    mixed_mass(space, space)
}

/// Mixed mass matrix with rows indexed by `test` and columns by `trial`.
pub fn mixed_mass(trial: &FieldSpace, test: &FieldSpace) -> CsrMatrix {
    let degree = trial.degree() + test.degree();
    assemble(
        trial,
        test,
        degree,
        |_, _, w, bt, bs, local| {
            let nt = bt.len();
            for i in 0..bs.len() {
                for j in 0..nt {
                    local[i * nt + j] += w * dot(bt.values[j], bs.values[i]);
                }
            }
        },
        no_finish,
    )
}

/// Vector Laplacian form `int grad phi_j : grad phi_i` for H1 spaces.
pub fn stiffness_matrix(space: &FieldSpace) -> CsrMatrix {
    let degree = 2 * space.degree().saturating_sub(1);
    assemble(
        space,
        space,
        degree,
        |_, _, w, bt, bs, local| {
            let nt = bt.len();
            for i in 0..bs.len() {
                for j in 0..nt {
                    let gi = &bs.grads[i];
                    let gj = &bt.grads[j];
                    let s = dot(gi[0], gj[0]) + dot(gi[1], gj[1]) + dot(gi[2], gj[2]);
                    local[i * nt + j] += w * s;
                }
            }
        },
        no_finish,
    )
}

/// `B[q, phi] = int q div phi`, rows on the (scalar) pressure space.
pub fn div_pressure_matrix(velocity: &FieldSpace, pressure: &FieldSpace) -> CsrMatrix {
    let degree = velocity.degree() - 1 + pressure.degree();
    assemble(
        velocity,
        pressure,
        degree,
        |_, _, w, bt, bs, local| {
            let nt = bt.len();
            for i in 0..bs.len() {
                let q = bs.values[i][0];
                for j in 0..nt {
                    local[i * nt + j] += w * q * bt.divs[j];
                }
            }
        },
        no_finish,
    )
}

/// Skew-symmetrised convection with frozen advecting field `w`:
/// `N[i, j] = 1/2 [ int ((w . grad) phi_j) . phi_i - int ((w . grad) phi_i) . phi_j ]`.
pub fn convection_matrix(space: &FieldSpace, w_space: &FieldSpace, w: &[f64]) -> CsrMatrix {
    let degree = w_space.degree() + 2 * space.degree() - 1;
    let mut frozen = Frozen::new(w_space, w);
    assemble(
        space,
        space,
        degree,
        |c, lam, wt, bt, bs, local| {
            let wv = frozen.at(c, lam).value;
            if wv == [0.0; 3] {
                return;
            }
            let nt = bt.len();
            for j in 0..nt {
                let gj = &bt.grads[j];
                let adv = [dot(gj[0], wv), dot(gj[1], wv), dot(gj[2], wv)];
                for i in 0..bs.len() {
                    local[i * nt + j] += wt * dot(adv, bs.values[i]);
                }
            }
        },
        antisymmetrise,
    )
}

/// `K[i, j] = int (psi_j x b) . phi_i` with trial `psi`, test `phi` and
/// frozen field `b`. When trial and test coincide the local matrices are
/// antisymmetrised, so `K + K^T = 0` holds exactly.
pub fn cross_matrix(
    trial: &FieldSpace,
    test: &FieldSpace,
    b_space: &FieldSpace,
    b: &[f64],
) -> CsrMatrix {
    let degree = trial.degree() + test.degree() + b_space.degree();
    let same = trial.same_as(test);
    let mut frozen = Frozen::new(b_space, b);
    assemble(
        trial,
        test,
        degree,
        |c, lam, wt, bt, bs, local| {
            let bv = frozen.at(c, lam).value;
            if bv == [0.0; 3] {
                return;
            }
            let nt = bt.len();
            for j in 0..nt {
                let cj = cross(bt.values[j], bv);
                for i in 0..bs.len() {
                    local[i * nt + j] += wt * dot(cj, bs.values[i]);
                }
            }
        },
        |local, n| {
            if same {
                antisymmetrise(local, n)
            }
        },
    )
}

/// Curl pairing `P[i, j] = int psi_i . curl omega_j`, rows on the face
/// (magnetic) space and columns on the edge space.
///
/// For a 3D single Nedelec/RT pair this is `M_RT C` with the integer curl
/// incidence `C`; otherwise the pairing is integrated directly.
pub fn curl_pairing(edge_space: &FieldSpace, face_space: &FieldSpace) -> CsrMatrix {
    let mesh = edge_space.mesh();
    if mesh.dim() == 3 && edge_space.n_parts() == 1 && face_space.n_parts() == 1 {
        if let (SpaceKind::Nedelec0 { .. }, SpaceKind::Rt0 { .. }) =
            (edge_space.part(0).0.kind(), face_space.part(0).0.kind())
        {
            return mass_matrix(face_space).matmul(&incidence_curl(mesh));
        }
    }
    curl_pairing_quadrature(edge_space, face_space)
}

/// The curl pairing by direct quadrature.
pub fn curl_pairing_quadrature(edge_space: &FieldSpace, face_space: &FieldSpace) -> CsrMatrix {
    let degree = edge_space.degree() - 1 + face_space.degree();
    assemble(
        edge_space,
        face_space,
        degree,
        |_, _, w, bt, bs, local| {
            let nt = bt.len();
            for i in 0..bs.len() {
                for j in 0..nt {
                    local[i * nt + j] += w * dot(bt.curls[j], bs.values[i]);
                }
            }
        },
        no_finish,
    )
}

/// Load vector `int f . phi_i` of an analytic field. Scalar factors see the
/// component they are embedded in.
pub fn load_vector(space: &FieldSpace, f: &dyn Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
    load_with(space, LOAD_DEGREE, &mut |_, _, x| f(x))
}

/// Load vector of a field given per quadrature point as a function of
/// `(cell, barycentric point, physical point)`.
pub fn load_with(
    space: &FieldSpace,
    degree: usize,
    f: &mut dyn FnMut(usize, &[f64; 4], [f64; 3]) -> [f64; 3],
) -> Vec<f64> {
    let mesh = space.mesh();
    let rule = rule_for(space, degree);
    let mut b = BasisEval::default();
    let mut out = vec![0.0; space.n_dofs()];
    for c in 0..mesh.n_cells() {
        let g = mesh.barycentric_gradients(c);
        for (lam, w) in rule.scaled(mesh.volume(c)) {
            let x = mesh.point(c, lam);
            let fx = f(c, lam, x);
            space.eval_basis(c, &g, lam, &mut b);
            for i in 0..b.len() {
                out[b.dofs[i]] += w * dot(fx, b.values[i]);
            }
        }
    }
    out
}

/// Integrals of the basis functions of a scalar space, `m_i = int phi_i`.
pub fn basis_integrals(space: &FieldSpace) -> Vec<f64> {
    load_with(space, space.degree(), &mut |_, _, _| [1.0, 1.0, 1.0])
}
