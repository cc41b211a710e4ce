use super::{incidence_curl, incidence_grad, DofMap, Embed, FieldSpace, ScalarBc, SpaceKind};
use crate::assembly::{
    curl_pairing, load_with, mass_matrix, mixed_mass, QuadratureRule, LOAD_DEGREE,
};
use crate::error::{Error, Result};
use crate::mesh::{dot, sub};
use crate::sparse::{solve, CsrMatrix, SolverConfig};

/// Result of a canonical interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    pub values: Vec<f64>,
    /// Largest boundary dof of a zero-trace space that the field failed to
    /// annihilate (0 when the trace condition holds).
    pub trace_violation: f64,
}

const TRACE_TOL: f64 = 1e-10;

/// Canonical interpolant: vertex values (P1), line integrals along
/// ascending edges (Nedelec), fluxes through canonically oriented facets
/// (RT), cell averages (DG0). The MINI bubble coefficient is chosen so that
/// each component keeps its cell integral.
///
/// Boundary dofs of zero-trace spaces are zeroed when they vanish to
/// `1e-10`; otherwise they are kept and a warning is logged.
pub fn canonical_interpolate(space: &FieldSpace, f: &dyn Fn([f64; 3]) -> [f64; 3]) -> Interpolant {
    let mut values = vec![0.0; space.n_dofs()];
    let mut violation: f64 = 0.0;
    for k in 0..space.n_parts() {
        let (map, embed, offset) = space.part(k);
        let local = interpolate_part(map, embed, f);
        for (i, v) in local.into_iter().enumerate() {
            let mut v = v;
            if map.is_constrained(i) {
                if v.abs() <= TRACE_TOL {
                    v = 0.0;
                } else {
                    violation = violation.max(v.abs());
                }
            }
            values[offset + i] = v;
        }
    }
    if violation > 0.0 {
        log::warn!("interpolated field violates the zero-trace condition (max boundary dof {violation:.3e})");
    }
    Interpolant {
        values,
        trace_violation: violation,
    }
}

fn component(embed: Embed, v: [f64; 3]) -> f64 {
    match embed {
        Embed::Natural => v[0],
        Embed::Z => v[2],
    }
}

fn interpolate_part(map: &DofMap, embed: Embed, f: &dyn Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let mesh = map.mesh();
    let dim = mesh.dim();
    match map.kind() {
        SpaceKind::P1(_) => mesh
            .vertices()
            .iter()
            .map(|x| component(embed, f(*x)))
            .collect(),
        SpaceKind::Dg0 => {
            let rule = QuadratureRule::simplex(dim, LOAD_DEGREE);
            (0..mesh.n_cells())
                .map(|c| {
                    let s: f64 = rule
                        .scaled(1.0)
                        .map(|(lam, w)| w * component(embed, f(mesh.point(c, lam))))
                        .sum();
                    s
                })
                .collect()
        }
        SpaceKind::MiniVector => {
            let nv = mesh.n_vertices();
            let stride = nv + mesh.n_cells();
            let mut out = vec![0.0; dim * stride];
            for (v, x) in mesh.vertices().iter().enumerate() {
                let fx = f(*x);
                for comp in 0..dim {
                    out[comp * stride + v] = fx[comp];
                }
            }
            let rule = QuadratureRule::simplex(dim, LOAD_DEGREE);
            for c in 0..mesh.n_cells() {
                let cell = mesh.cell(c);
                // match the cell integral of every component
                let mut num = [0.0; 3];
                let mut den = 0.0;
                for (lam, w) in rule.scaled(1.0) {
                    let fx = f(mesh.point(c, lam));
                    let b: f64 = lam[..=dim].iter().product();
                    den += w * b;
                    for comp in 0..dim {
                        let lin: f64 = (0..=dim)
                            .map(|i| lam[i] * out[comp * stride + cell[i]])
                            .sum();
                        num[comp] += w * (fx[comp] - lin);
                    }
                }
                for comp in 0..dim {
                    out[comp * stride + nv + c] = num[comp] / den;
                }
            }
            out
        }
        SpaceKind::Nedelec0 { .. } => {
            let rule = QuadratureRule::simplex(1, LOAD_DEGREE);
            mesh.edges()
                .iter()
                .map(|[p, q]| {
                    let (xp, xq) = (mesh.vertex(*p), mesh.vertex(*q));
                    let t = sub(xq, xp);
                    rule.points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(lam, w)| w * dot(f(lerp(xp, xq, lam[1])), t))
                        .sum()
                })
                .collect()
        }
        SpaceKind::Rt0 { .. } => {
            if dim == 2 {
                let rule = QuadratureRule::simplex(1, LOAD_DEGREE);
                mesh.edges()
                    .iter()
                    .map(|[p, q]| {
                        let (xp, xq) = (mesh.vertex(*p), mesh.vertex(*q));
                        let nrm = mesh.canonical_facet_normal(&[*p, *q]);
                        rule.points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(lam, w)| w * dot(f(lerp(xp, xq, lam[1])), nrm))
                            .sum()
                    })
                    .collect()
            } else {
                let rule = QuadratureRule::simplex(2, LOAD_DEGREE);
                mesh.faces()
                    .iter()
                    .map(|face| {
                        let nrm = mesh.canonical_facet_normal(face);
                        let xs = face.map(|v| mesh.vertex(v));
                        // weights sum to 1/2 = area of the reference triangle
                        rule.points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(lam, w)| {
                                let mut x = [0.0; 3];
                                for (l, xv) in lam.iter().zip(&xs) {
                                    for k in 0..3 {
                                        x[k] += l * xv[k];
                                    }
                                }
                                w * dot(f(x), nrm)
                            })
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
    ]
}

/// Face-space dofs of `curl A` built from a potential: in 3D the edge
/// interpolant of `A`, in 2D the vertex values of `A_z`, with all boundary
/// dofs zeroed before applying the exact differential. The result is
/// solenoidal to rounding and has zero normal trace by construction.
///
/// The first factor of `b_space` must be RT0; further factors (the
/// out-of-plane magnetic component in 2D) are set to zero.
pub fn interpolate_potential(
    b_space: &FieldSpace,
    a: &dyn Fn([f64; 3]) -> [f64; 3],
) -> Result<Vec<f64>> {
    let (rt, _, offset) = b_space.part(0);
    if !matches!(rt.kind(), SpaceKind::Rt0 { .. }) {
        return Err(Error::UnsupportedSpace {
            kind: rt.kind().to_string(),
            dim: rt.dim(),
        });
    }
    let mesh = rt.mesh();
    let (pot, d): (Vec<f64>, CsrMatrix) = if mesh.dim() == 3 {
        let ned = super::build_space(mesh, SpaceKind::Nedelec0 { zero_trace: true })?;
        let vals = canonical_interpolate(&FieldSpace::single(ned.clone()), a).values;
        let vals = (0..vals.len())
            .map(|e| if ned.is_constrained(e) { 0.0 } else { vals[e] })
            .collect();
        (vals, incidence_curl(mesh))
    } else {
        let p1 = super::build_space(mesh, SpaceKind::P1(ScalarBc::ZeroTrace))?;
        let vals = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, x)| if p1.is_constrained(v) { 0.0 } else { a(*x)[2] })
            .collect();
        (vals, incidence_grad(mesh))
    };
    let flux = d.matvec(&pot);
    let mut out = vec![0.0; b_space.n_dofs()];
    out[offset..offset + flux.len()].copy_from_slice(&flux);
    Ok(out)
}

/// Solves `A x = b` on the free dofs, with constrained dofs held at zero.
pub(crate) fn solve_free(
    a: &CsrMatrix,
    b: &[f64],
    free: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let sub = a.submatrix(free, free);
    let rhs: Vec<f64> = free.iter().map(|i| b[*i]).collect();
    let mut out = vec![0.0; a.nrows()];
    if rhs.iter().all(|v| *v == 0.0) {
        return Ok(out);
    }
    let (x, _) = solve(&sub, &rhs, cfg)?;
    for (i, v) in free.iter().zip(x) {
        out[*i] = v;
    }
    Ok(out)
}

fn subtract_mean_if_needed(space: &FieldSpace, x: &mut [f64]) {
    if space.n_parts() == 1 && space.part(0).0.has_mean_multiplier() {
        let m = crate::assembly::basis_integrals(space);
        let mean: f64 = m.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        // the domain has unit measure and constants lie in P1
        for v in x.iter_mut() {
            *v -= mean;
        }
    }
}

/// L2 projection of an analytic field onto the (constrained) space.
pub fn l2_project(space: &FieldSpace, f: &dyn Fn([f64; 3]) -> [f64; 3]) -> Result<Vec<f64>> {
    let m = mass_matrix(space);
    let b = load_with(space, LOAD_DEGREE, &mut |_, _, x| f(x));
    let mut x = solve_free(&m, &b, space.free_dofs(), &SolverConfig::default())?;
    subtract_mean_if_needed(space, &mut x);
    Ok(x)
}

/// L2 projection of a finite element function from `source` onto `target`.
pub fn l2_project_field(
    target: &FieldSpace,
    source: &FieldSpace,
    values: &[f64],
) -> Result<Vec<f64>> {
    if values.len() != source.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "source field has {} values, space has {} dofs",
            values.len(),
            source.n_dofs()
        )));
    }
    let m = mass_matrix(target);
    let b = mixed_mass(source, target).matvec(values);
    let mut x = solve_free(&m, &b, target.free_dofs(), &SolverConfig::default())?;
    subtract_mean_if_needed(target, &mut x);
    Ok(x)
}

/// Discrete curl: `J` in the (zero-trace) edge space with
/// `<J, w> = <B, curl w>` for every free edge basis function `w`.
pub fn discrete_curl(b_space: &FieldSpace, e_space: &FieldSpace, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != b_space.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "B has {} values, space has {} dofs",
            b.len(),
            b_space.n_dofs()
        )));
    }
    let m = mass_matrix(e_space);
    let rhs = curl_pairing(e_space, b_space).matvec_transpose(b);
    solve_free(&m, &rhs, e_space.free_dofs(), &SolverConfig::default())
}
