//! Brute-force reference implementations for the integration tests.
//!
//! Nothing here calls the library's quadrature, basis or assembly code: cell
//! geometry is rebuilt from vertex coordinates, rules come from collapsed
//! Gauss-Legendre products, and RT0 uses the `(x - x_k) / (d |K|)` form. Only
//! mesh topology and the documented dof numbering are shared.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use hallfem_core::mesh::SimplicialMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type V3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

/// Value and Jacobian `jac[i][k] = d_k v_i` of a 3-vector field.
#[derive(Debug, Clone, Copy, Default)]
pub struct Fn3 {
    pub value: V3,
    pub jac: M3,
}

impl Fn3 {
    pub fn curl(&self) -> V3 {
        let j = &self.jac;
        [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]]
    }
    pub fn div(&self) -> f64 {
        self.jac[0][0] + self.jac[1][1] + self.jac[2][2]
    }
    pub fn axpy(&mut self, a: f64, o: &Fn3) {
        for i in 0..3 {
            self.value[i] += a * o.value[i];
            for k in 0..3 {
                self.jac[i][k] += a * o.jac[i][k];
            }
        }
    }
}

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `sum_ik a_ik b_ik`.
pub fn frob(a: &M3, b: &M3) -> f64 {
    (0..3).map(|i| dot(a[i], b[i])).sum()
}

/// Gauss-Legendre nodes and weights on `[0, 1]` by Newton iteration.
pub fn gauss01(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Collapsed-coordinate product rule on the reference simplex:
/// `(barycentric point, weight)` with weights summing to `1 / d!`.
pub fn simplex_rule(dim: usize, m: usize) -> Vec<([f64; 4], f64)> {
    let g = gauss01(m);
    let mut out = Vec::new();
    if dim == 2 {
        for &(s, ws) in &g {
            for &(t, wt) in &g {
                let (x, y) = (s, t * (1.0 - s));
                out.push(([1.0 - x - y, x, y, 0.0], ws * wt * (1.0 - s)));
            }
        }
    } else {
        for &(s, ws) in &g {
            for &(t, wt) in &g {
                for &(r, wr) in &g {
                    let (x, y, z) = (s, t * (1.0 - s), r * (1.0 - s) * (1.0 - t));
                    out.push((
                        [1.0 - x - y - z, x, y, z],
                        ws * wt * wr * (1.0 - s).powi(2) * (1.0 - t),
                    ));
                }
            }
        }
    }
    out
}

/// Affine geometry of one cell rebuilt from its vertex coordinates.
#[derive(Debug, Clone)]
pub struct Cell {
    pub verts: Vec<usize>,
    pub x: Vec<V3>,
    pub grads: Vec<V3>,
    pub vol: f64,
}

fn invert(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut det = 1.0;
    for k in 0..d {
        let p = (k..d)
            .max_by(|i, j| m[*i][k].abs().total_cmp(&m[*j][k].abs()))
            .unwrap();
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let piv = m[k][k];
        det *= piv;
        for v in m[k].iter_mut() {
            *v /= piv;
        }
        for i in 0..d {
            if i != k {
                let f = m[i][k];
                for j in 0..2 * d {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    (m.into_iter().map(|r| r[d..].to_vec()).collect(), det)
}

pub fn cell_geometry(mesh: &SimplicialMesh, c: usize) -> Cell {
    let d = mesh.dim();
    let verts = mesh.cell(c).to_vec();
    let x: Vec<V3> = verts.iter().map(|v| mesh.vertex(*v)).collect();
    // columns x_i - x_0
    let a: Vec<Vec<f64>> = (0..d)
        .map(|r| (1..=d).map(|i| x[i][r] - x[0][r]).collect())
        .collect();
    let (inv, det) = invert(&a);
    let mut grads = vec![[0.0; 3]; d + 1];
    for i in 1..=d {
        for r in 0..d {
            grads[i][r] = inv[i - 1][r];
        }
    }
    for r in 0..d {
        grads[0][r] = -(1..=d).map(|i| grads[i][r]).sum::<f64>();
    }
    let fact = if d == 2 { 2.0 } else { 6.0 };
    Cell {
        verts,
        x,
        grads,
        vol: det.abs() / fact,
    }
}

impl Cell {
    pub fn point(&self, lam: &[f64; 4]) -> V3 {
        let mut p = [0.0; 3];
        for (i, xi) in self.x.iter().enumerate() {
            for r in 0..3 {
                p[r] += lam[i] * xi[r];
            }
        }
        p
    }
}

fn on_box_boundary(x: V3, dim: usize) -> bool {
    x[..dim]
        .iter()
        .any(|v| v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12)
}

fn mean_point(mesh: &SimplicialMesh, verts: &[usize]) -> V3 {
    let mut p = [0.0; 3];
    for v in verts {
        let x = mesh.vertex(*v);
        for r in 0..3 {
            p[r] += x[r] / verts.len() as f64;
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Scalar P1 placed in slot 0, or in slot 2 when `z`.
    P1 {
        zero_trace: bool,
        z: bool,
    },
    Mini,
    Ned {
        zero_trace: bool,
    },
    Rt {
        zero_trace: bool,
    },
}

/// A product of oracle spaces with the library's documented numbering.
#[derive(Debug, Clone)]
pub struct Space {
    pub parts: Vec<(Kind, usize)>,
    pub n_dofs: usize,
    pub constrained: Vec<bool>,
}

impl Space {
    pub fn free(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|i| !self.constrained[*i]).collect()
    }
}

/// Dense brute-force discretisation on one mesh.
pub struct Oracle {
    pub mesh: Arc<SimplicialMesh>,
    pub cells: Vec<Cell>,
    pub rule: Vec<([f64; 4], f64)>,
    edge_index: HashMap<Vec<usize>, usize>,
    facet_index: HashMap<Vec<usize>, usize>,
}

impl Oracle {
    /// `m` Gauss points per collapsed direction.
    pub fn new(mesh: Arc<SimplicialMesh>, m: usize) -> Self {
        let d = mesh.dim();
        let cells = (0..mesh.n_cells())
            .map(|c| cell_geometry(&mesh, c))
            .collect();
        let edge_index = mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| (e.to_vec(), i))
            .collect();
        let facet_index = if d == 2 {
            mesh.edges()
                .iter()
                .enumerate()
                .map(|(i, e)| (e.to_vec(), i))
                .collect()
        } else {
            mesh.faces()
                .iter()
                .enumerate()
                .map(|(i, f)| (f.to_vec(), i))
                .collect()
        };
        Self {
            rule: simplex_rule(d, m),
            mesh,
            cells,
            edge_index,
            facet_index,
        }
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    fn kind_size(&self, k: Kind) -> (usize, Vec<bool>) {
        let m = &self.mesh;
        let d = m.dim();
        let bv: Vec<bool> = (0..m.n_vertices())
            .map(|v| on_box_boundary(m.vertex(v), d))
            .collect();
        match k {
            Kind::P1 { zero_trace, .. } => {
                (bv.len(), bv.iter().map(|b| zero_trace && *b).collect())
            }
            Kind::Mini => {
                let mut c = Vec::new();
                for _ in 0..d {
                    c.extend(bv.iter().cloned());
                    c.extend(std::iter::repeat_n(false, m.n_cells()));
                }
                (c.len(), c)
            }
            Kind::Ned { zero_trace } => {
                let c: Vec<bool> = m
                    .edges()
                    .iter()
                    .map(|e| zero_trace && on_box_boundary(mean_point(m, e), d))
                    .collect();
                (c.len(), c)
            }
            Kind::Rt { zero_trace } => {
                let facets: Vec<Vec<usize>> = if d == 2 {
                    m.edges().iter().map(|e| e.to_vec()).collect()
                } else {
                    m.faces().iter().map(|f| f.to_vec()).collect()
                };
                let c: Vec<bool> = facets
                    .iter()
                    .map(|f| zero_trace && on_box_boundary(mean_point(m, f), d))
                    .collect();
                (c.len(), c)
            }
        }
    }

    pub fn space(&self, kinds: &[Kind]) -> Space {
        let mut parts = Vec::new();
        let mut constrained = Vec::new();
        for k in kinds {
            let (n, c) = self.kind_size(*k);
            parts.push((*k, constrained.len()));
            constrained.extend(c);
            debug_assert_eq!(n, constrained.len() - parts.last().unwrap().1);
        }
        Space {
            parts,
            n_dofs: constrained.len(),
            constrained,
        }
    }

    /// All basis functions of `space` supported on cell `c`, evaluated at `lam`.
    pub fn basis(&self, space: &Space, c: usize, lam: &[f64; 4]) -> Vec<(usize, Fn3)> {
        let cell = &self.cells[c];
        let d = self.dim();
        let g = &cell.grads;
        let mut out = Vec::new();
        for &(kind, off) in &space.parts {
            match kind {
                Kind::P1 { z, .. } => {
                    let slot = if z { 2 } else { 0 };
                    for i in 0..=d {
                        let mut f = Fn3::default();
                        f.value[slot] = lam[i];
                        f.jac[slot] = g[i];
                        out.push((off + cell.verts[i], f));
                    }
                }
                Kind::Mini => {
                    let stride = self.mesh.n_vertices() + self.mesh.n_cells();
                    let b: f64 = lam[..=d].iter().product();
                    let mut gb = [0.0; 3];
                    for i in 0..=d {
                        let others: f64 = (0..=d).filter(|j| *j != i).map(|j| lam[j]).product();
                        for r in 0..3 {
                            gb[r] += others * g[i][r];
                        }
                    }
                    for comp in 0..d {
                        for i in 0..=d {
                            let mut f = Fn3::default();
                            f.value[comp] = lam[i];
                            f.jac[comp] = g[i];
                            out.push((off + comp * stride + cell.verts[i], f));
                        }
                        let mut f = Fn3::default();
                        f.value[comp] = b;
                        f.jac[comp] = gb;
                        out.push((off + comp * stride + self.mesh.n_vertices() + c, f));
                    }
                }
                Kind::Ned { .. } => {
                    for a in 0..=d {
                        for bb in a + 1..=d {
                            let (p, q) = if cell.verts[a] < cell.verts[bb] {
                                (a, bb)
                            } else {
                                (bb, a)
                            };
                            let key = vec![cell.verts[p], cell.verts[q]];
                            let mut f = Fn3::default();
                            for i in 0..3 {
                                f.value[i] = lam[p] * g[q][i] - lam[q] * g[p][i];
                                for k in 0..3 {
                                    f.jac[i][k] = g[p][k] * g[q][i] - g[q][k] * g[p][i];
                                }
                            }
                            out.push((off + self.edge_index[&key], f));
                        }
                    }
                }
                Kind::Rt { .. } => {
                    let x = cell.point(lam);
                    for k in 0..=d {
                        let mut fv: Vec<usize> =
                            (0..=d).filter(|l| *l != k).map(|l| cell.verts[l]).collect();
                        fv.sort_unstable();
                        let xs: Vec<V3> = fv.iter().map(|v| self.mesh.vertex(*v)).collect();
                        let t = sub(xs[1], xs[0]);
                        let normal = if d == 2 {
                            [t[1], -t[0], 0.0]
                        } else {
                            cross(t, sub(xs[2], xs[0]))
                        };
                        let centre = mean_point(&self.mesh, &fv);
                        let s = dot(normal, sub(centre, cell.x[k])).signum();
                        let scale = s / (d as f64 * cell.vol);
                        let mut f = Fn3::default();
                        for r in 0..d {
                            f.value[r] = scale * (x[r] - cell.x[k][r]);
                            f.jac[r][r] = scale;
                        }
                        out.push((off + self.facet_index[&fv], f));
                    }
                }
            }
        }
        out
    }

    pub fn eval(&self, space: &Space, coeffs: &[f64], c: usize, lam: &[f64; 4]) -> Fn3 {
        let mut f = Fn3::default();
        for (i, b) in self.basis(space, c, lam) {
            f.axpy(coeffs[i], &b);
        }
        f
    }

    /// Visits every quadrature point: `(cell, lambda, physical weight, x)`.
    pub fn for_points(&self, mut visit: impl FnMut(usize, &[f64; 4], f64, V3)) {
        let fact = if self.dim() == 2 { 2.0 } else { 6.0 };
        for (c, cell) in self.cells.iter().enumerate() {
            for (lam, w) in &self.rule {
                visit(c, lam, w * fact * cell.vol, cell.point(lam));
            }
        }
    }

    /// Dense `A[i][j] = sum_q w form(trial_j, test_i, data)` over all dofs,
    /// with `data` computed once per point.
    pub fn dense<T>(
        &self,
        trial: &Space,
        test: &Space,
        pre: impl Fn(usize, &[f64; 4], V3) -> T,
        form: impl Fn(&T, &Fn3, &Fn3) -> f64,
    ) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; trial.n_dofs]; test.n_dofs];
        self.for_points(|c, lam, w, x| {
            let data = pre(c, lam, x);
            let bt = self.basis(trial, c, lam);
            let bs = self.basis(test, c, lam);
            for (i, fi) in &bs {
                for (j, fj) in &bt {
                    a[*i][*j] += w * form(&data, fj, fi);
                }
            }
        });
        a
    }

    /// `b[i] = sum_q w f(x) . phi_i`.
    pub fn load(&self, space: &Space, f: impl Fn(V3) -> V3) -> Vec<f64> {
        let mut b = vec![0.0; space.n_dofs];
        self.for_points(|c, lam, w, x| {
            let fx = f(x);
            for (i, fi) in self.basis(space, c, lam) {
                b[i] += w * dot(fx, fi.value);
            }
        });
        b
    }

    /// `int |f - g|^2` for two fields given pointwise.
    pub fn integrate(&self, f: impl Fn(usize, &[f64; 4], V3) -> f64) -> f64 {
        let mut s = 0.0;
        self.for_points(|c, lam, w, x| s += w * f(c, lam, x));
        s
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|i, j| a[*i][k].abs().total_cmp(&a[*j][k].abs()))
            .unwrap();
        assert!(a[p][k].abs() > 1e-300, "singular oracle system");
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Deterministic pseudo-random values in `[-1, 1]`.
pub fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Random coefficients on the free dofs of `space`, zero elsewhere.
pub fn random_field(space: &Space, seed: u64) -> Vec<f64> {
    let r = noise(seed, space.n_dofs);
    (0..space.n_dofs)
        .map(|i| if space.constrained[i] { 0.0 } else { r[i] })
        .collect()
}

/// The scheme's spaces in oracle form.
pub struct SchemeSpaces {
    pub vel: Space,
    pub pres: Space,
    pub mag: Space,
    pub edge: Space,
}

pub fn scheme_spaces(o: &Oracle) -> SchemeSpaces {
    let pres = o.space(&[Kind::P1 {
        zero_trace: false,
        z: false,
    }]);
    if o.dim() == 3 {
        SchemeSpaces {
            vel: o.space(&[Kind::Mini]),
            pres,
            mag: o.space(&[Kind::Rt { zero_trace: true }]),
            edge: o.space(&[Kind::Ned { zero_trace: true }]),
        }
    } else {
        SchemeSpaces {
            vel: o.space(&[
                Kind::Mini,
                Kind::P1 {
                    zero_trace: true,
                    z: true,
                },
            ]),
            pres,
            mag: o.space(&[
                Kind::Rt { zero_trace: true },
                Kind::P1 {
                    zero_trace: false,
                    z: true,
                },
            ]),
            edge: o.space(&[
                Kind::Ned { zero_trace: true },
                Kind::P1 {
                    zero_trace: true,
                    z: true,
                },
            ]),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepParams {
    pub nu: f64,
    pub sigma: f64,
    pub eta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau: f64,
}

/// Full dof vectors of the five fields.
#[derive(Debug, Clone)]
pub struct Fields {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub j: Vec<f64>,
}

/// One step of the linear scheme written directly from its weak form,
/// tested against every free basis function and solved densely.
pub fn oracle_step(
    o: &Oracle,
    sp: &SchemeSpaces,
    prev: &Fields,
    prm: StepParams,
    force: Option<&dyn Fn(V3) -> V3>,
) -> Fields {
    let StepParams {
        nu,
        sigma,
        eta,
        alpha1,
        alpha2,
        tau,
    } = prm;
    let frozen = |c: usize, lam: &[f64; 4], _x: V3| {
        (
            o.eval(&sp.vel, &prev.u, c, lam),
            o.eval(&sp.mag, &prev.b, c, lam),
        )
    };
    let grad_dot = |a: &Fn3, b: &Fn3| frob(&a.jac, &b.jac);
    let advect = |w: V3, f: &Fn3| -> V3 { [0, 1, 2].map(|i| dot(f.jac[i], w)) };

    let a_uu = o.dense(&sp.vel, &sp.vel, frozen, |(w, _), u, phi| {
        (dot(u.value, phi.value) + alpha1 * grad_dot(u, phi)) / tau
            + nu * grad_dot(u, phi)
            + 0.5 * (dot(advect(w.value, u), phi.value) - dot(advect(w.value, phi), u.value))
    });
    let a_up = o.dense(&sp.pres, &sp.vel, frozen, |_, p, phi| {
        -p.value[0] * phi.div()
    });
    let a_uj = o.dense(&sp.edge, &sp.vel, frozen, |(_, b), j, phi| {
        -dot(cross(j.value, b.value), phi.value)
    });
    let a_pu = o.dense(&sp.vel, &sp.pres, frozen, |_, u, q| u.div() * q.value[0]);
    let m_p = o.load(&sp.pres, |_| [1.0, 0.0, 0.0]);
    let a_bb = o.dense(&sp.mag, &sp.mag, frozen, |_, b, psi| {
        dot(b.value, psi.value) / tau
    });
    let a_be = o.dense(&sp.edge, &sp.mag, frozen, |_, e, psi| {
        dot(e.curl(), psi.value)
    });
    let a_ej = o.dense(&sp.edge, &sp.edge, frozen, |(_, b), j, chi| {
        (alpha2 / tau + sigma) * dot(j.value, chi.value)
            + eta * dot(cross(j.value, b.value), chi.value)
    });
    let a_ee = o.dense(&sp.edge, &sp.edge, frozen, |_, e, chi| {
        -dot(e.value, chi.value)
    });
    let a_eu = o.dense(&sp.vel, &sp.edge, frozen, |(_, b), u, chi| {
        -dot(cross(u.value, b.value), chi.value)
    });
    let a_jj = o.dense(&sp.edge, &sp.edge, frozen, |_, j, omega| {
        dot(j.value, omega.value)
    });
    let a_jb = o.dense(&sp.mag, &sp.edge, frozen, |_, b, omega| {
        -dot(b.value, omega.curl())
    });

    let m_u = o.dense(&sp.vel, &sp.vel, frozen, |_, u, phi| {
        (dot(u.value, phi.value) + alpha1 * grad_dot(u, phi)) / tau
    });
    let mut r_u = matvec(&m_u, &prev.u);
    if let Some(f) = force {
        for (r, l) in r_u.iter_mut().zip(o.load(&sp.vel, f)) {
            *r += l;
        }
    }
    let r_b = matvec(&a_bb, &prev.b);
    let m_j = o.dense(&sp.edge, &sp.edge, frozen, |_, j, chi| {
        alpha2 / tau * dot(j.value, chi.value)
    });
    let r_e = matvec(&m_j, &prev.j);

    let fu = sp.vel.free();
    let fp: Vec<usize> = (0..sp.pres.n_dofs).collect();
    let fb = sp.mag.free();
    let fe = sp.edge.free();
    let (ou, op) = (0, fu.len());
    let ol = op + fp.len();
    let ob = ol + 1;
    let oe = ob + fb.len();
    let oj = oe + fe.len();
    let n = oj + fe.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let mut put = |blk: &[Vec<f64>], rows: &[usize], r0: usize, cols: &[usize], c0: usize| {
        for (ri, r) in rows.iter().enumerate() {
            for (ci, c) in cols.iter().enumerate() {
                a[r0 + ri][c0 + ci] += blk[*r][*c];
            }
        }
    };
    put(&a_uu, &fu, ou, &fu, ou);
    put(&a_up, &fu, ou, &fp, op);
    put(&a_uj, &fu, ou, &fe, oj);
    put(&a_pu, &fp, op, &fu, ou);
    put(&a_bb, &fb, ob, &fb, ob);
    put(&a_be, &fb, ob, &fe, oe);
    put(&a_ej, &fe, oe, &fe, oj);
    put(&a_ee, &fe, oe, &fe, oe);
    put(&a_eu, &fe, oe, &fu, ou);
    put(&a_jj, &fe, oj, &fe, oj);
    put(&a_jb, &fe, oj, &fb, ob);
    for (k, m) in m_p.iter().enumerate() {
        a[op + k][ol] = *m;
        a[ol][op + k] = *m;
    }
    for (k, i) in fu.iter().enumerate() {
        rhs[ou + k] = r_u[*i];
    }
    for (k, i) in fb.iter().enumerate() {
        rhs[ob + k] = r_b[*i];
    }
    for (k, i) in fe.iter().enumerate() {
        rhs[oe + k] = r_e[*i];
    }
    let x = dense_solve(a, rhs);
    let expand = |free: &[usize], n: usize, vals: &[f64]| {
        let mut v = vec![0.0; n];
        for (k, i) in free.iter().enumerate() {
            v[*i] = vals[k];
        }
        v
    };
    Fields {
        u: expand(&fu, sp.vel.n_dofs, &x[ou..op]),
        p: x[op..ol].to_vec(),
        b: expand(&fb, sp.mag.n_dofs, &x[ob..oe]),
        e: expand(&fe, sp.edge.n_dofs, &x[oe..oj]),
        j: expand(&fe, sp.edge.n_dofs, &x[oj..n]),
    }
}
