//! Convergence studies against nested reference runs, and the structure
//! self-check battery.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{convection_matrix, cross_matrix};
use crate::diagnostics::error_norm;
use crate::error::{Error, Result};
use crate::feec::{
    build_space, canonical_interpolate, complex_operator, div_values, incidence_curl,
    incidence_div, incidence_grad, FieldSpace, ScalarBc, SpaceKind,
};
use crate::mesh::build_unit_box_mesh;
use crate::scheme::{run_with, Discretization, InitialData, SchemeConfig, State};
use crate::sparse::CsrMatrix;

/// Errors of one coarse run against the reference at the comparison time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    /// `h = 1/n` for spatial studies, `tau` for temporal ones.
    pub step_size: f64,
    pub e0_u: f64,
    pub e1_u: f64,
    pub e0_b: f64,
    pub e0_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Space,
    Time,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub axis: Axis,
    pub rows: Vec<ErrorRow>,
    /// Reference resolution and time step.
    pub reference: (usize, f64),
    pub t_final: f64,
}

/// `log(e_i / e_{i+1}) / log(s_i / s_{i+1})` for consecutive pairs.
pub fn observed_rates(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(s, e)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln())
        .collect()
}

impl ConvergenceTable {
    pub fn column(&self, f: impl Fn(&ErrorRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn steps(&self) -> Vec<f64> {
        self.column(|r| r.step_size)
    }

    pub fn rates(&self, f: impl Fn(&ErrorRow) -> f64) -> Vec<f64> {
        observed_rates(&self.steps(), &self.column(f))
    }

    /// CSV: one error row per run, then one rate row per consecutive pair.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let (label, rn, rt) = (
            match self.axis {
                Axis::Space => "h",
                Axis::Time => "tau",
            },
            self.reference.0,
            self.reference.1,
        );
        writeln!(w, "# reference n={rn} tau={rt} T={}", self.t_final)?;
        writeln!(w, "kind,{label},E0_u,E1_u,E0_B,E0_J")?;
        for r in &self.rows {
            writeln!(
                w,
                "error,{},{},{},{},{}",
                r.step_size, r.e0_u, r.e1_u, r.e0_b, r.e0_j
            )?;
        }
        let cols: [Vec<f64>; 4] = [
            self.rates(|r| r.e0_u),
            self.rates(|r| r.e1_u),
            self.rates(|r| r.e0_b),
            self.rates(|r| r.e0_j),
        ];
        for (i, pair) in self.rows.windows(2).enumerate() {
            writeln!(
                w,
                "rate,{}->{},{},{},{},{}",
                pair[0].step_size,
                pair[1].step_size,
                cols[0][i],
                cols[1][i],
                cols[2][i],
                cols[3][i]
            )?;
        }
        Ok(())
    }
}

fn final_state(disc: &Discretization, cfg: &SchemeConfig) -> Result<State> {
    Ok(run_with(disc, cfg, &mut |_, _, _| Ok(()))?.final_state)
}

fn errors(
    coarse: (&Discretization, &State),
    fine: (&Discretization, &State),
    step: f64,
) -> Result<ErrorRow> {
    let (cd, cs) = coarse;
    let (fd, fs) = fine;
    Ok(ErrorRow {
        step_size: step,
        e0_u: error_norm((&cd.velocity, &cs.u), (&fd.velocity, &fs.u), 0)?,
        e1_u: error_norm((&cd.velocity, &cs.u), (&fd.velocity, &fs.u), 1)?,
        e0_b: error_norm((&cd.magnetic, &cs.b), (&fd.magnetic, &fs.b), 0)?,
        e0_j: error_norm((&cd.edge, &cs.j), (&fd.edge, &fs.j), 0)?,
    })
}

/// Runs `jobs` closures concurrently at most `jobs` at a time, keeping order.
fn parallel_map<T: Send, R: Send>(
    items: Vec<T>,
    jobs: usize,
    f: &(dyn Fn(T) -> R + Sync),
) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let n = items.len();
    let queue = std::sync::Mutex::new(items.into_iter().enumerate().collect::<Vec<_>>());
    let out: std::sync::Mutex<Vec<Option<R>>> =
        std::sync::Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(n) {
            s.spawn(|| loop {
                let next = queue.lock().unwrap().pop();
                let Some((i, item)) = next else { break };
                let r = f(item);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect()
}

/// Spatial study: every `n` in `meshes` with step `base.tau`, against the
/// reference at `n_ref` with the same step.
pub fn converge_space(
    base: &SchemeConfig,
    meshes: &[usize],
    n_ref: usize,
    jobs: usize,
) -> Result<ConvergenceTable> {
    if meshes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "mesh list must be strictly increasing".into(),
        ));
    }
    if let Some(n) = meshes.iter().find(|n| **n == 0 || n_ref % **n != 0) {
        return Err(Error::NotNested {
            coarse: *n,
            fine: n_ref,
        });
    }
    let mut ref_cfg = base.clone();
    ref_cfg.n = n_ref;
    let mut all: Vec<usize> = meshes.to_vec();
    all.push(n_ref);
    let runs = parallel_map(all, jobs, &|n| -> Result<(Discretization, State)> {
        let mut cfg = base.clone();
        cfg.n = n;
        let disc = Discretization::new(n, cfg.dim)?;
        let s = final_state(&disc, &cfg)?;
        Ok((disc, s))
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let (rd, rs) = runs.pop().unwrap();
    let rows = runs
        .iter()
        .zip(meshes)
        .map(|((d, s), n)| errors((d, s), (&rd, &rs), 1.0 / *n as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable {
        axis: Axis::Space,
        rows,
        reference: (n_ref, base.tau),
        t_final: base.t_final,
    })
}

/// Temporal study on the fixed mesh `base.n`: every step in `taus` against
/// the reference step `tau_ref`.
pub fn converge_time(
    base: &SchemeConfig,
    taus: &[f64],
    tau_ref: f64,
    jobs: usize,
) -> Result<ConvergenceTable> {
    if taus.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Config(
            "time steps must be strictly decreasing".into(),
        ));
    }
    let disc = Discretization::new(base.n, base.dim)?;
    let mut all: Vec<f64> = taus.to_vec();
    all.push(tau_ref);
    let runs = parallel_map(all, jobs, &|tau| -> Result<State> {
        let mut cfg = base.clone();
        cfg.tau = tau;
        final_state(&disc, &cfg)
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let rs = runs.pop().unwrap();
    let rows = runs
        .iter()
        .zip(taus)
        .map(|(s, tau)| errors((&disc, s), (&disc, &rs), *tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable {
        axis: Axis::Time,
        rows,
        reference: (base.n, tau_ref),
        t_final: base.t_final,
    })
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Whether `b * a` is exactly the zero matrix.
pub fn composition_vanishes(a: &CsrMatrix, b: &CsrMatrix) -> bool {
    b.matmul(a).iter().all(|(_, _, v)| v == 0.0)
}

fn exactness(n: usize, dim: usize) -> Result<CheckResult> {
    let mesh = build_unit_box_mesh(n, dim)?;
    let ok = if dim == 3 {
        composition_vanishes(&incidence_grad(&mesh), &incidence_curl(&mesh))
            && composition_vanishes(&incidence_curl(&mesh), &incidence_div(&mesh))
    } else {
        // rot . grad and div . grad_perp share the same incidence product
        composition_vanishes(&incidence_grad(&mesh), &incidence_div(&mesh))
    };
    Ok(CheckResult::new(
        format!("exactness dim={dim} n={n}"),
        ok,
        "",
    ))
}

fn commuting(n: usize, dim: usize) -> Result<CheckResult> {
    let mesh = Arc::new(build_unit_box_mesh(n, dim)?);
    let rt = FieldSpace::single(build_space(&mesh, SpaceKind::Rt0 { zero_trace: false })?);
    let dg = FieldSpace::single(build_space(&mesh, SpaceKind::Dg0)?);
    let v = |x: [f64; 3]| [x[0] * x[0], x[0] * x[1], x[2]];
    let div_v = |x: [f64; 3]| {
        let d = 2.0 * x[0] + x[0] + if dim == 3 { 1.0 } else { 0.0 };
        [d, 0.0, 0.0]
    };
    let lhs = div_values(&mesh, &canonical_interpolate(&rt, &v).values);
    let rhs = canonical_interpolate(&dg, &div_v).values;
    let mut err = lhs
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if dim == 3 {
        let ned = FieldSpace::single(build_space(
            &mesh,
            SpaceKind::Nedelec0 { zero_trace: false },
        )?);
        // curl (x^2, xy, z) = (0, 0, y)
        let curl_v = |x: [f64; 3]| [0.0, 0.0, x[1]];
        let c = incidence_curl(&mesh).matvec(&canonical_interpolate(&ned, &v).values);
        let r = canonical_interpolate(&rt, &curl_v).values;
        err = c.iter().zip(&r).fold(err, |m, (a, b)| m.max((a - b).abs()));
    } else {
        let p1 = build_space(&mesh, SpaceKind::P1(ScalarBc::Free))?;
        let rt0 = build_space(&mesh, SpaceKind::Rt0 { zero_trace: false })?;
        // grad_perp of phi = x y^2 + x^2 is (2xy, -(y^2 + 2x))
        let phi: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|x| x[0] * x[1] * x[1] + x[0] * x[0])
            .collect();
        let c = complex_operator(&p1, &rt0)?.matvec(&phi);
        let r = canonical_interpolate(&rt, &|x| {
            [2.0 * x[0] * x[1], -(x[1] * x[1] + 2.0 * x[0]), 0.0]
        })
        .values;
        err = c.iter().zip(&r).fold(err, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(CheckResult::new(
        format!("commuting diagram dim={dim} n={n}"),
        err <= 1e-10,
        format!("max error {err:.2e}"),
    ))
}

fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn skewness(n: usize, dim: usize) -> Result<CheckResult> {
    let disc = Discretization::new(n, dim)?;
    let w = pseudo_random(disc.velocity.n_dofs(), 7);
    let b = pseudo_random(disc.magnetic.n_dofs(), 11);
    let conv = convection_matrix(&disc.velocity, &disc.velocity, &w);
    let hall = cross_matrix(&disc.edge, &disc.edge, &disc.magnetic, &b);
    let skew = |m: &CsrMatrix| m.add_scaled(1.0, &m.transpose(), 1.0).max_abs();
    let err = skew(&conv).max(skew(&hall));
    Ok(CheckResult::new(
        format!("skewness dim={dim} n={n}"),
        err == 0.0,
        format!("max |A + A^T| {err:.2e}"),
    ))
}

fn dynamics(n: usize, dim: usize, tau: f64) -> Result<Vec<CheckResult>> {
    let disc = Discretization::new(n, dim)?;
    let mut cfg = SchemeConfig::preset(
        if dim == 3 {
            crate::scheme::Experiment::Abc3d
        } else {
            crate::scheme::Experiment::OrszagTang
        },
        n,
        tau,
        3.0 * tau,
    );
    if n == 1 {
        // no interior vertices: drive the test with a field that has flux
        cfg.initial = InitialData::Custom {
            velocity: Arc::new(|x| [x[1] * (1.0 - x[1]), 0.0, 0.0]),
            potential: Arc::new(|x| {
                [
                    0.0,
                    0.5 * x[0] * x[0],
                    x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]),
                ]
            }),
        };
    }
    let out = run_with(&disc, &cfg, &mut |_, _, _| Ok(()))?;
    let tag = format!("dim={dim} n={n} tau={tau}");
    Ok(vec![
        CheckResult::new(
            format!("energy monotone {tag}"),
            out.energy_monotone,
            format!(
                "E0 {:.6e} -> E{} {:.6e}",
                out.rows[0].energy,
                out.rows.len() - 1,
                out.rows.last().unwrap().energy
            ),
        ),
        CheckResult::new(format!("div preserved {tag}"), out.div_preserved, ""),
    ])
}

/// The invariant battery on `n in {1, 2}` in both dimensions.
pub fn check_battery() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let wrap = |r: Result<CheckResult>, name: &str| {
        r.unwrap_or_else(|e| CheckResult::new(name.to_string(), false, e.to_string()))
    };
    for dim in [2, 3] {
        for n in [1, 2] {
            out.push(wrap(exactness(n, dim), "exactness"));
            out.push(wrap(commuting(n, dim), "commuting diagram"));
            out.push(wrap(skewness(n, dim), "skewness"));
            for tau in [0.1, 10.0] {
                match dynamics(n, dim, tau) {
                    Ok(r) => out.extend(r),
                    Err(e) => out.push(CheckResult::new(
                        format!("dynamics dim={dim} n={n} tau={tau}"),
                        false,
                        e.to_string(),
                    )),
                }
            }
        }
    }
    out
}
