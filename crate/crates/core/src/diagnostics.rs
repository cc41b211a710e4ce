//! Energy, divergence, norms, reference errors and CSV/VTK output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::assembly::QuadratureRule;
use crate::error::{Error, Result};
use crate::feec::{discrete_curl, div_values, BasisEval, FieldSpace};
use crate::mesh::SimplicialMesh;
use crate::scheme::{Discretization, SchemeConfig, State};
use crate::sparse::SolveInfo;

/// One line of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub grad_kinetic: f64,
    pub magnetic: f64,
    pub current: f64,
    pub max_div_b: f64,
    pub solver_iters: usize,
    pub solver_residual: f64,
}

pub const CSV_HEADER: &str =
    "step,time,energy,kinetic,grad_kinetic,magnetic,current,max_div_B,solver_iters,solver_residual";

/// Parts of `1/2 |u|^2 + a1/2 |grad u|^2 + 1/2 |B|^2 + a2/2 |J|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub grad_kinetic: f64,
    pub magnetic: f64,
    pub current: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.grad_kinetic + self.magnetic + self.current
    }
}

/// Energy through the assembled mass and stiffness matrices. In 2D the
/// product-space matrices include the out-of-plane components.
pub fn energy(disc: &Discretization, state: &State, alpha1: f64, alpha2: f64) -> EnergyParts {
    EnergyParts {
        kinetic: 0.5 * disc.mass_v.bilinear(&state.u, &state.u),
        grad_kinetic: 0.5 * alpha1 * disc.stiff_v.bilinear(&state.u, &state.u),
        magnetic: 0.5 * disc.mass_b.bilinear(&state.b, &state.b),
        current: 0.5 * alpha2 * disc.mass_x.bilinear(&state.j, &state.j),
    }
}

/// `max_K |div B|_K|` from the face fluxes; `b` may carry trailing
/// out-of-plane dofs after the RT0 block.
pub fn max_cell_div(mesh: &SimplicialMesh, b: &[f64]) -> f64 {
    div_values(mesh, b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Diagnostics row of a state.
pub fn row(
    disc: &Discretization,
    state: &State,
    cfg: &SchemeConfig,
    info: Option<SolveInfo>,
) -> DiagnosticsRow {
    let e = energy(disc, state, cfg.alpha1, cfg.alpha2);
    DiagnosticsRow {
        step: state.step,
        time: state.time,
        energy: e.total(),
        kinetic: e.kinetic,
        grad_kinetic: e.grad_kinetic,
        magnetic: e.magnetic,
        current: e.current,
        max_div_b: max_cell_div(disc.mesh(), &state.b),
        solver_iters: info.as_ref().map_or(0, |i| i.iterations),
        solver_residual: info.as_ref().map_or(0.0, |i| i.residual),
    }
}

/// `|v_coarse - v_ref|` in L2 (`s = 0`) or H1 (`s = 1`).
///
/// Integrated on the cells of the finer mesh, where both fields are
/// polynomial, so the quadrature is exact up to rounding. Each fine cell is
/// located in the coarse mesh by its centroid through the structured index
/// map.
pub fn error_norm(
    coarse: (&FieldSpace, &[f64]),
    reference: (&FieldSpace, &[f64]),
    s: usize,
) -> Result<f64> {
    let (cs, cv) = coarse;
    let (fs, fv) = reference;
    let (cm, fm) = (cs.mesh(), fs.mesh());
    if s > 1 {
        return Err(Error::Config(format!(
            "error norm order must be 0 or 1, got {s}"
        )));
    }
    if cm.dim() != fm.dim() || fm.resolution() % cm.resolution() != 0 {
        return Err(Error::NotNested {
            coarse: cm.resolution(),
            fine: fm.resolution(),
        });
    }
    for (space, v) in [(cs, cv), (fs, fv)] {
        if space.n_dofs() != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "field has {} values, space has {} dofs",
                v.len(),
                space.n_dofs()
            )));
        }
    }
    let rule = QuadratureRule::simplex(fm.dim(), 2 * cs.degree().max(fs.degree()));
    let mut bc = BasisEval::default();
    let mut bf = BasisEval::default();
    let mut total = 0.0;
    for c in 0..fm.n_cells() {
        let gf = fm.barycentric_gradients(c);
        let (cc, _) = cm.locate(fm.centroid(c));
        let gc = cm.barycentric_gradients(cc);
        for (lam, w) in rule.scaled(fm.volume(c)) {
            let x = fm.point(c, lam);
            let lc = cm.barycentric(cc, x);
            fs.eval_basis(c, &gf, lam, &mut bf);
            cs.eval_basis(cc, &gc, &lc, &mut bc);
            let a = crate::feec::space_combine(&bc, cv);
            let b = crate::feec::space_combine(&bf, fv);
            let mut d2: f64 = (0..3).map(|k| (a.value[k] - b.value[k]).powi(2)).sum();
            if s == 1 {
                for r in 0..3 {
                    d2 += (0..3)
                        .map(|k| (a.grad[r][k] - b.grad[r][k]).powi(2))
                        .sum::<f64>();
                }
            }
            total += w * d2;
        }
    }
    Ok(total.sqrt())
}

/// Terms of the Gaffney-type bound `|B|_{L3} <= |curl_h B| + |div B|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaffneyCheck {
    pub l3: f64,
    pub curl_h: f64,
    pub div: f64,
}

impl GaffneyCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.l3 <= self.curl_h + self.div + tol
    }
}

/// Evaluates the Gaffney diagnostic; `curl_h B` is recomputed by a mass
/// solve rather than read from the state.
pub fn gaffney(disc: &Discretization, b: &[f64]) -> Result<GaffneyCheck> {
    let mesh = disc.mesh();
    let j = discrete_curl(&disc.magnetic, &disc.edge, b)?;
    let curl_h = disc.mass_x.bilinear(&j, &j).max(0.0).sqrt();
    let div: f64 = div_values(mesh, b)
        .iter()
        .zip(mesh.volumes())
        .map(|(d, v)| d * d * v)
        .sum::<f64>()
        .sqrt();
    let rule = QuadratureRule::simplex(mesh.dim(), 6);
    let mut be = BasisEval::default();
    let mut l3 = 0.0;
    for c in 0..mesh.n_cells() {
        let g = mesh.barycentric_gradients(c);
        for (lam, w) in rule.scaled(mesh.volume(c)) {
            disc.magnetic.eval_basis(c, &g, lam, &mut be);
            let v = crate::feec::space_combine(&be, b).value;
            l3 += w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).powf(1.5);
        }
    }
    Ok(GaffneyCheck {
        l3: l3.cbrt(),
        curl_h,
        div,
    })
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes rows under [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[DiagnosticsRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f(r.time),
            fmt_f(r.energy),
            fmt_f(r.kinetic),
            fmt_f(r.grad_kinetic),
            fmt_f(r.magnetic),
            fmt_f(r.current),
            fmt_f(r.max_div_b),
            r.solver_iters,
            fmt_f(r.solver_residual)
        )?;
    }
    Ok(())
}

pub fn csv_path(dir: &Path, run: &str) -> PathBuf {
    dir.join(format!("{run}_diag.csv"))
}

pub fn vtk_path(dir: &Path, run: &str, step: usize) -> PathBuf {
    dir.join(format!("{run}_step{step}.vtk"))
}

pub fn write_csv_file(rows: &[DiagnosticsRow], path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(rows, f)?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid: `u` and `p` as point data; `B`,
/// `div_B`, `J`, `E` as cell averages (values at the centroid, exact for the
/// affine edge and face fields).
pub fn write_vtk<W: Write>(disc: &Discretization, state: &State, mut w: W) -> std::io::Result<()> {
    let mesh = disc.mesh();
    let dim = mesh.dim();
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "step {} time {}", state.step, state.time)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for x in mesh.vertices() {
        writeln!(w, "{} {} {}", x[0], x[1], x[2])?;
    }
    writeln!(w, "CELLS {nc} {}", nc * (dim + 2))?;
    for c in 0..nc {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{} {}", dim + 1, ids.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    let ty = if dim == 2 { 5 } else { 10 };
    for _ in 0..nc {
        writeln!(w, "{ty}")?;
    }

    let mut u = vec![[0.0; 3]; nv];
    for c in 0..nc {
        for (k, v) in mesh.cell(c).iter().enumerate() {
            let mut lam = [0.0; 4];
            lam[k] = 1.0;
            u[*v] = disc.velocity.evaluate(&state.u, c, &lam).value;
        }
    }
    writeln!(w, "POINT_DATA {nv}")?;
    writeln!(w, "VECTORS u double")?;
    for v in &u {
        writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
    }
    writeln!(w, "SCALARS p double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &state.p {
        writeln!(w, "{p}")?;
    }

    writeln!(w, "CELL_DATA {nc}")?;
    let centre = [1.0 / (dim as f64 + 1.0); 4];
    let centre = if dim == 2 {
        [centre[0], centre[1], centre[2], 0.0]
    } else {
        centre
    };
    for (name, space, field) in [
        ("B", &disc.magnetic, &state.b),
        ("J", &disc.edge, &state.j),
        ("E", &disc.edge, &state.e),
    ] {
        writeln!(w, "VECTORS {name} double")?;
        for c in 0..nc {
            let v = space.evaluate(field, c, &centre).value;
            writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
        }
    }
    writeln!(w, "SCALARS div_B double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for d in div_values(mesh, &state.b) {
        writeln!(w, "{d}")?;
    }
    Ok(())
}

pub fn write_vtk_file(disc: &Discretization, state: &State, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_vtk(disc, state, f)?;
    Ok(())
}
