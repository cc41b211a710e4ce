use std::sync::Arc;

use super::{DofMap, SpaceKind};
use crate::mesh::{cross, dot, SimplicialMesh, LOCAL_EDGES_2D, LOCAL_EDGES_3D};

/// How the values of one component space sit inside a 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embed {
    /// Vector spaces keep their components; scalar spaces use slot 0.
    Natural,
    /// A scalar space used as the out-of-plane component `(0, 0, s)`.
    Z,
}

#[derive(Debug, Clone)]
struct Part {
    map: DofMap,
    embed: Embed,
    offset: usize,
}

/// A product of finite element spaces over one mesh, evaluated as 3-vector
/// fields. A single space is the one-factor product.
///
/// The 2.5D velocity, for instance, is `MINI (x, y) x P1_0 (z)`.
#[derive(Debug, Clone)]
pub struct FieldSpace {
    parts: Vec<Part>,
    n_dofs: usize,
    free: Vec<usize>,
    constrained: Vec<bool>,
}

/// Basis functions supported on one cell, evaluated at one point.
///
/// `grads[i][r]` is the gradient of component `r` of basis function `i`. It is
/// filled for H1 spaces only; curls and divergences are exact for every kind.
#[derive(Debug, Clone, Default)]
pub struct BasisEval {
    pub dofs: Vec<usize>,
    pub values: Vec<[f64; 3]>,
    pub grads: Vec<[[f64; 3]; 3]>,
    pub curls: Vec<[f64; 3]>,
    pub divs: Vec<f64>,
}

impl BasisEval {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    fn clear(&mut self) {
        self.dofs.clear();
        self.values.clear();
        self.grads.clear();
        self.curls.clear();
        self.divs.clear();
    }

    fn push(&mut self, dof: usize, value: [f64; 3], grad: [[f64; 3]; 3], curl: [f64; 3], div: f64) {
        self.dofs.push(dof);
        self.values.push(value);
        self.grads.push(grad);
        self.curls.push(curl);
        self.divs.push(div);
    }
}

/// A finite element function and its derivatives at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValue {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 3],
    pub curl: [f64; 3],
    pub div: f64,
}

const ZERO3: [f64; 3] = [0.0; 3];
const ZERO33: [[f64; 3]; 3] = [[0.0; 3]; 3];

fn unit(k: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[k] = 1.0;
    e
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    a.map(|v| v * s)
}

fn axpy(a: [f64; 3], s: f64, b: [f64; 3]) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

impl From<DofMap> for FieldSpace {
    fn from(map: DofMap) -> Self {
        FieldSpace::single(map)
    }
}

impl FieldSpace {
    pub fn single(map: DofMap) -> Self {
        Self::product(vec![(map, Embed::Natural)])
    }

    /// Panics if the factors live on different meshes.
    pub fn product(factors: Vec<(DofMap, Embed)>) -> Self {
        assert!(!factors.is_empty(), "empty product space");
        let mesh = Arc::clone(factors[0].0.mesh());
        let mut parts = Vec::with_capacity(factors.len());
        let mut offset = 0;
        let mut constrained = Vec::new();
        for (map, embed) in factors {
            assert!(
                Arc::ptr_eq(map.mesh(), &mesh),
                "product factors on different meshes"
            );
            constrained.extend((0..map.n_dofs()).map(|i| map.is_constrained(i)));
            let n = map.n_dofs();
            parts.push(Part { map, embed, offset });
            offset += n;
        }
        let free = (0..offset).filter(|i| !constrained[*i]).collect();
        Self {
            parts,
            n_dofs: offset,
            free,
            constrained,
        }
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh> {
        self.parts[0].map.mesh()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn n_parts(&self) -> usize {
        self.parts.len()
    }

    /// Factor `k` with its embedding and dof offset.
    pub fn part(&self, k: usize) -> (&DofMap, Embed, usize) {
        let p = &self.parts[k];
        (&p.map, p.embed, p.offset)
    }

    /// Whether both spaces have the same factors over the same mesh.
    pub fn same_as(&self, other: &FieldSpace) -> bool {
        Arc::ptr_eq(self.mesh(), other.mesh())
            && self.parts.len() == other.parts.len()
            && self
                .parts
                .iter()
                .zip(&other.parts)
                .all(|(a, b)| a.map.kind() == b.map.kind() && a.embed == b.embed)
    }

    /// Highest polynomial degree of the basis.
    pub fn degree(&self) -> usize {
        let dim = self.mesh().dim();
        self.parts
            .iter()
            .map(|p| p.map.kind().degree(dim))
            .max()
            .unwrap_or(0)
    }

    /// Evaluates every basis function supported on cell `c` at barycentric
    /// point `lambda`, given the cell's barycentric gradients `g`.
    pub fn eval_basis(&self, c: usize, g: &[[f64; 3]; 4], lambda: &[f64; 4], out: &mut BasisEval) {
        out.clear();
        let mesh = self.mesh();
        let dim = mesh.dim();
        let cell = mesh.cell(c);
        for part in &self.parts {
            let off = part.offset;
            match part.map.kind() {
                SpaceKind::P1(_) => {
                    for i in 0..=dim {
                        push_scalar(out, off + cell[i], lambda[i], g[i], part.embed);
                    }
                }
                SpaceKind::Dg0 => push_scalar(out, off + c, 1.0, ZERO3, part.embed),
                SpaceKind::MiniVector => {
                    let stride = mesh.n_vertices() + mesh.n_cells();
                    let (b, gb) = bubble(dim, g, lambda);
                    for comp in 0..dim {
                        let base = off + comp * stride;
                        for i in 0..=dim {
                            push_component(out, base + cell[i], comp, lambda[i], g[i]);
                        }
                        push_component(out, base + mesh.n_vertices() + c, comp, b, gb);
                    }
                }
                SpaceKind::Nedelec0 { .. } => {
                    let local: &[[usize; 2]] = if dim == 2 {
                        &LOCAL_EDGES_2D
                    } else {
                        &LOCAL_EDGES_3D
                    };
                    for (k, [a, b]) in local.iter().enumerate() {
                        let (p, q) = if cell[*a] < cell[*b] {
                            (*a, *b)
                        } else {
                            (*b, *a)
                        };
                        let w = axpy(scale(g[q], lambda[p]), -lambda[q], g[p]);
                        let curl = scale(cross(g[p], g[q]), 2.0);
                        out.push(off + mesh.cell_edges(c)[k], w, ZERO33, curl, 0.0);
                    }
                }
                SpaceKind::Rt0 { .. } => {
                    for k in 0..=dim {
                        let mut v = [0usize; 3];
                        let mut m = 0;
                        for l in (0..=dim).filter(|l| *l != k) {
                            v[m] = l;
                            m += 1;
                        }
                        v[..dim].sort_unstable_by_key(|l| cell[*l]);
                        let f = off + mesh.cell_facets(c)[k];
                        if dim == 2 {
                            let (p, q) = (v[0], v[1]);
                            let w = axpy(scale(g[q], lambda[p]), -lambda[q], g[p]);
                            let div = 2.0 * cross(g[p], g[q])[2];
                            out.push(f, [w[1], -w[0], 0.0], ZERO33, ZERO3, div);
                        } else {
                            let (p, q, r) = (v[0], v[1], v[2]);
                            let mut w = scale(cross(g[q], g[r]), 2.0 * lambda[p]);
                            w = axpy(w, 2.0 * lambda[q], cross(g[r], g[p]));
                            w = axpy(w, 2.0 * lambda[r], cross(g[p], g[q]));
                            let div = 6.0 * dot(g[p], cross(g[q], g[r]));
                            // the curl of a Whitney 2-form vanishes (Jacobi identity)
                            out.push(f, w, ZERO33, ZERO3, div);
                        }
                    }
                }
            }
        }
    }

    /// Value and derivatives of `field` at barycentric point `lambda` of `c`.
    pub fn evaluate(&self, field: &[f64], c: usize, lambda: &[f64]) -> PointValue {
        let g = self.mesh().barycentric_gradients(c);
        let mut lam = [0.0; 4];
        lam[..lambda.len().min(4)].copy_from_slice(&lambda[..lambda.len().min(4)]);
        let mut basis = BasisEval::default();
        self.eval_basis(c, &g, &lam, &mut basis);
        combine(&basis, field)
    }
}

/// Linear combination of evaluated basis functions with global coefficients.
pub(crate) fn combine(basis: &BasisEval, field: &[f64]) -> PointValue {
    let mut pv = PointValue::default();
    for i in 0..basis.len() {
        let a = field[basis.dofs[i]];
        if a == 0.0 {
            continue;
        }
        pv.value = axpy(pv.value, a, basis.values[i]);
        pv.curl = axpy(pv.curl, a, basis.curls[i]);
        pv.div += a * basis.divs[i];
        for r in 0..3 {
            pv.grad[r] = axpy(pv.grad[r], a, basis.grads[i][r]);
        }
    }
    pv
}

fn push_scalar(out: &mut BasisEval, dof: usize, s: f64, gs: [f64; 3], embed: Embed) {
    match embed {
        Embed::Natural => {
            let mut grad = ZERO33;
            grad[0] = gs;
            out.push(dof, [s, 0.0, 0.0], grad, ZERO3, 0.0);
        }
        Embed::Z => {
            let mut grad = ZERO33;
            grad[2] = gs;
            // curl (0, 0, s) = (d_y s, -d_x s, 0); div = d_z s
            out.push(dof, [0.0, 0.0, s], grad, [gs[1], -gs[0], 0.0], gs[2]);
        }
    }
}

fn push_component(out: &mut BasisEval, dof: usize, comp: usize, s: f64, gs: [f64; 3]) {
    let mut grad = ZERO33;
    grad[comp] = gs;
    out.push(
        dof,
        scale(unit(comp), s),
        grad,
        cross(gs, unit(comp)),
        gs[comp],
    );
}

/// Cell bubble `prod lambda_i` and its gradient.
fn bubble(dim: usize, g: &[[f64; 3]; 4], lambda: &[f64; 4]) -> (f64, [f64; 3]) {
    let b: f64 = lambda[..=dim].iter().product();
    let mut gb = ZERO3;
    for i in 0..=dim {
        let others: f64 = (0..=dim).filter(|j| *j != i).map(|j| lambda[j]).product();
        gb = axpy(gb, others, g[i]);
    }
    (b, gb)
}
