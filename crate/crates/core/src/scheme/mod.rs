//! The linear, divergence-preserving time stepper for Voigt-regularised
//! Hall-MHD.
//!
//! Every step solves one monolithic system in the free dofs of
//! `[u | p | lambda | B | E | J]`, where `lambda` is the multiplier of the
//! zero-mean pressure constraint. With `tau` the step, frozen `u*`, `B*` from
//! the previous level, and `K[phi, chi] = <chi x B*, phi>`:
//!
//! ```text
//! (M_V + (a1 + tau nu) A_V + tau N(u*)) u - tau D^T p - tau K J      = (M_V + a1 A_V) u* + tau f
//! D u + m lambda = 0,  m^T p = 0
//! M_B B + tau P E                                                    = M_B B*
//! ((a2 + tau sigma) M_X + tau eta H(B*)) J - tau M_X E + tau K^T u   = a2 M_X J*
//! M_X J - P^T B                                                      = 0
//! ```
//!
//! `P = <psi, curl omega>` is the curl pairing and `N`, `H` are exactly skew.
//! In 2D the same system is posed on the 2.5D product spaces; the embedded
//! 3-vector cross products reproduce the planar conventions.

mod experiments;

use std::sync::Arc;

pub use experiments::{
    initial_data, jacobian, parameters, Experiment, Forcing, InitialData, Parameters, VectorField,
    HARRIS_B0, HARRIS_DELTA,
};

use crate::assembly::{
    basis_integrals, convection_matrix, cross_matrix, curl_pairing, div_pressure_matrix,
    load_vector, mass_matrix, stiffness_matrix, QuadratureRule, LOAD_DEGREE,
};
use crate::diagnostics::{self, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::feec::{
    build_space, discrete_curl, interpolate_potential, BasisEval, Embed, FieldSpace, ScalarBc,
    SpaceKind,
};
use crate::mesh::{build_unit_box_mesh, SimplicialMesh};
use crate::sparse::{
    solve, solve_iterative_first, CsrMatrix, SolveInfo, SolverConfig, SolverMethod, TripletBuilder,
};

/// Physical and numerical parameters of a run.
#[derive(Clone)]
pub struct SchemeConfig {
    pub nu: f64,
    pub sigma: f64,
    pub eta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau: f64,
    pub t_final: f64,
    pub dim: usize,
    pub n: usize,
    pub solver: SolverConfig,
    pub initial: InitialData,
    pub forcing: Option<Forcing>,
}

impl std::fmt::Debug for SchemeConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchemeConfig")
            .field("nu", &self.nu)
            .field("sigma", &self.sigma)
            .field("eta", &self.eta)
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("tau", &self.tau)
            .field("t_final", &self.t_final)
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("solver", &self.solver)
            .field("initial", &self.initial)
            .field("forcing", &self.forcing.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl SchemeConfig {
    /// Configuration of a built-in experiment.
    pub fn preset(exp: Experiment, n: usize, tau: f64, t_final: f64) -> Self {
        let p = parameters(exp);
        Self {
            nu: p.nu,
            sigma: p.sigma,
            eta: p.eta,
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            tau,
            t_final,
            dim: p.dim,
            n,
            solver: SolverConfig::default(),
            initial: initial_data(exp),
            forcing: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("nu", self.nu),
            ("sigma", self.sigma),
            ("eta", self.eta),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("T", self.t_final),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !(self.nu > 0.0) {
            return Err(Error::Config("nu must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.sigma == 0.0 && self.alpha2 == 0.0 {
            return Err(Error::Config("sigma = 0 requires alpha2 > 0".into()));
        }
        if !(2..=3).contains(&self.dim) {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if self.n == 0 {
            return Err(Error::InvalidResolution(0));
        }
        self.solver.validate()
    }

    /// Number of steps `floor(T / tau)`, robust to `T / tau` landing just
    /// below an integer in floating point.
    pub fn n_steps(&self) -> usize {
        let r = self.t_final / self.tau;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * k.max(1.0) {
            k as usize
        } else {
            r.floor() as usize
        }
    }
}

/// Spaces and time-independent matrices on one mesh.
///
/// 3D: velocity MINI, pressure P1 (zero mean), magnetic RT0_0, edge
/// Nedelec0_0. 2D: velocity MINI x P1_0, magnetic RT0_0 x P1, edge
/// Nedelec0_0 x P1_0, with the scalar factors as out-of-plane components.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Arc<SimplicialMesh>,
    pub velocity: FieldSpace,
    pub pressure: FieldSpace,
    pub magnetic: FieldSpace,
    pub edge: FieldSpace,
    pub mass_v: CsrMatrix,
    pub stiff_v: CsrMatrix,
    /// `D[q, phi] = <q, div phi>`.
    pub div_p: CsrMatrix,
    pub mass_b: CsrMatrix,
    pub mass_x: CsrMatrix,
    /// `P[psi, omega] = <psi, curl omega>`.
    pub curl: CsrMatrix,
    /// `m_q = int q` over the pressure basis.
    pub mean: Vec<f64>,
}

impl Discretization {
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        Self::on_mesh(Arc::new(build_unit_box_mesh(n, dim)?))
    }

    pub fn on_mesh(mesh: Arc<SimplicialMesh>) -> Result<Self> {
        let dim = mesh.dim();
        let sp = |k| build_space(&mesh, k);
        let mini = sp(SpaceKind::MiniVector)?;
        let rt = sp(SpaceKind::Rt0 { zero_trace: true })?;
        let ned = sp(SpaceKind::Nedelec0 { zero_trace: true })?;
        let (velocity, magnetic, edge) = if dim == 3 {
            (
                FieldSpace::single(mini),
                FieldSpace::single(rt),
                FieldSpace::single(ned),
            )
        } else {
            let p10 = || sp(SpaceKind::P1(ScalarBc::ZeroTrace));
            (
                FieldSpace::product(vec![(mini, Embed::Natural), (p10()?, Embed::Z)]),
                FieldSpace::product(vec![
                    (rt, Embed::Natural),
                    (sp(SpaceKind::P1(ScalarBc::Free))?, Embed::Z),
                ]),
                FieldSpace::product(vec![(ned, Embed::Natural), (p10()?, Embed::Z)]),
            )
        };
        let pressure = FieldSpace::single(sp(SpaceKind::P1(ScalarBc::ZeroMean))?);
        Ok(Self {
            mass_v: mass_matrix(&velocity),
            stiff_v: stiffness_matrix(&velocity),
            div_p: div_pressure_matrix(&velocity, &pressure),
            mass_b: mass_matrix(&magnetic),
            mass_x: mass_matrix(&edge),
            curl: curl_pairing(&edge, &magnetic),
            mean: basis_integrals(&pressure),
            mesh,
            velocity,
            pressure,
            magnetic,
            edge,
        })
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    /// Number of unknowns of the per-step block system.
    pub fn n_unknowns(&self) -> usize {
        Layout::new(self).n
    }
}

/// The discrete fields at one time level. In 2D each vector holds the
/// in-plane dofs followed by the out-of-plane component.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub step: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// Multiplier of the zero-mean pressure constraint.
    pub lambda: f64,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub j: Vec<f64>,
}

impl State {
    pub fn zero(disc: &Discretization) -> Self {
        Self {
            step: 0,
            time: 0.0,
            u: vec![0.0; disc.velocity.n_dofs()],
            p: vec![0.0; disc.pressure.n_dofs()],
            lambda: 0.0,
            b: vec![0.0; disc.magnetic.n_dofs()],
            e: vec![0.0; disc.edge.n_dofs()],
            j: vec![0.0; disc.edge.n_dofs()],
        }
    }
}

const NONE: usize = usize::MAX;

/// Position of every free dof in the block system.
struct Layout {
    vel: Vec<usize>,
    mag: Vec<usize>,
    edge: Vec<usize>,
    pres: Vec<usize>,
    nu: usize,
    np: usize,
    nb: usize,
    ne: usize,
    n: usize,
}

fn local_index(space: &FieldSpace) -> Vec<usize> {
    let mut idx = vec![NONE; space.n_dofs()];
    for (k, d) in space.free_dofs().iter().enumerate() {
        idx[*d] = k;
    }
    idx
}

impl Layout {
    fn new(disc: &Discretization) -> Self {
        let nu = disc.velocity.n_free();
        let np = disc.pressure.n_dofs();
        let nb = disc.magnetic.n_free();
        let ne = disc.edge.n_free();
        Self {
            vel: local_index(&disc.velocity),
            mag: local_index(&disc.magnetic),
            edge: local_index(&disc.edge),
            pres: (0..np).collect(),
            nu,
            np,
            nb,
            ne,
            n: nu + np + 1 + nb + 2 * ne,
        }
    }
    fn off_p(&self) -> usize {
        self.nu
    }
    fn off_l(&self) -> usize {
        self.nu + self.np
    }
    fn off_b(&self) -> usize {
        self.off_l() + 1
    }
    fn off_e(&self) -> usize {
        self.off_b() + self.nb
    }
    fn off_j(&self) -> usize {
        self.off_e() + self.ne
    }
}

/// Adds `s * m` (or `s * m^T`) restricted to free rows/cols at an offset.
#[allow(clippy::too_many_arguments)]
fn scatter(
    t: &mut TripletBuilder,
    m: &CsrMatrix,
    transpose: bool,
    rows: &[usize],
    r0: usize,
    cols: &[usize],
    c0: usize,
    s: f64,
) {
    for (i, j, v) in m.iter() {
        let (i, j) = if transpose { (j, i) } else { (i, j) };
        let (ri, cj) = (rows[i], cols[j]);
        if ri != NONE && cj != NONE && v != 0.0 {
            t.push(r0 + ri, c0 + cj, s * v);
        }
    }
}

fn gather(full: &[f64], idx: &[usize], out: &mut [f64]) {
    for (d, k) in idx.iter().enumerate() {
        if *k != NONE {
            out[*k] = full[d];
        }
    }
}

fn scatter_back(local: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .map(|k| if *k == NONE { 0.0 } else { local[*k] })
        .collect()
}

/// Assembles the block system of one step from the previous state.
pub fn step_system(
    disc: &Discretization,
    prev: &State,
    cfg: &SchemeConfig,
) -> (CsrMatrix, Vec<f64>) {
    let l = Layout::new(disc);
    let tau = cfg.tau;
    let (vel, edge, mag) = (&disc.velocity, &disc.edge, &disc.magnetic);

    let conv = convection_matrix(vel, vel, &prev.u);
    let k_uj = cross_matrix(edge, vel, mag, &prev.b);
    let hall = cross_matrix(edge, edge, mag, &prev.b);

    let mut t = TripletBuilder::new(l.n, l.n);
    let (pu, pp, pl, pb, pe, pj) = (0, l.off_p(), l.off_l(), l.off_b(), l.off_e(), l.off_j());

    // momentum
    scatter(&mut t, &disc.mass_v, false, &l.vel, pu, &l.vel, pu, 1.0);
    scatter(
        &mut t,
        &disc.stiff_v,
        false,
        &l.vel,
        pu,
        &l.vel,
        pu,
        cfg.alpha1 + tau * cfg.nu,
    );
    scatter(&mut t, &conv, false, &l.vel, pu, &l.vel, pu, tau);
    scatter(&mut t, &disc.div_p, true, &l.vel, pu, &l.pres, pp, -tau);
    scatter(&mut t, &k_uj, false, &l.vel, pu, &l.edge, pj, -tau);
    // incompressibility with the mean multiplier
    scatter(&mut t, &disc.div_p, false, &l.pres, pp, &l.vel, pu, 1.0);
    for (q, m) in disc.mean.iter().enumerate() {
        t.push(pp + q, pl, *m);
        t.push(pl, pp + q, *m);
    }
    // induction
    scatter(&mut t, &disc.mass_b, false, &l.mag, pb, &l.mag, pb, 1.0);
    scatter(&mut t, &disc.curl, false, &l.mag, pb, &l.edge, pe, tau);
    // Ohm's law (tested on the edge space, rows at the E block)
    scatter(
        &mut t,
        &disc.mass_x,
        false,
        &l.edge,
        pe,
        &l.edge,
        pj,
        cfg.alpha2 + tau * cfg.sigma,
    );
    scatter(
        &mut t,
        &hall,
        false,
        &l.edge,
        pe,
        &l.edge,
        pj,
        tau * cfg.eta,
    );
    scatter(&mut t, &disc.mass_x, false, &l.edge, pe, &l.edge, pe, -tau);
    scatter(&mut t, &k_uj, true, &l.edge, pe, &l.vel, pu, tau);
    // Ampere's law
    scatter(&mut t, &disc.mass_x, false, &l.edge, pj, &l.edge, pj, 1.0);
    scatter(&mut t, &disc.curl, true, &l.edge, pj, &l.mag, pb, -1.0);
    let a = t.build();

    let mut rhs = vec![0.0; l.n];
    let mut mu = disc.mass_v.matvec(&prev.u);
    let ku = disc.stiff_v.matvec(&prev.u);
    for (a, k) in mu.iter_mut().zip(&ku) {
        *a += cfg.alpha1 * k;
    }
    if let Some(f) = &cfg.forcing {
        let t_n = prev.time + tau;
        let load = load_vector(vel, &|x| f(t_n, x));
        for (a, fl) in mu.iter_mut().zip(&load) {
            *a += tau * fl;
        }
    }
    gather(&mu, &l.vel, &mut rhs[pu..pp]);
    gather(&disc.mass_b.matvec(&prev.b), &l.mag, &mut rhs[pb..pe]);
    let mj: Vec<f64> = disc
        .mass_x
        .matvec(&prev.j)
        .iter()
        .map(|v| cfg.alpha2 * v)
        .collect();
    gather(&mj, &l.edge, &mut rhs[pe..pj]);
    (a, rhs)
}

fn unpack(disc: &Discretization, x: &[f64], step: usize, time: f64) -> State {
    let l = Layout::new(disc);
    let (pp, pl, pb, pe, pj) = (l.off_p(), l.off_l(), l.off_b(), l.off_e(), l.off_j());
    State {
        step,
        time,
        u: scatter_back(&x[..pp], &l.vel),
        p: x[pp..pl].to_vec(),
        lambda: x[pl],
        b: scatter_back(&x[pb..pe], &l.mag),
        e: scatter_back(&x[pe..pj], &l.edge),
        j: scatter_back(&x[pj..], &l.edge),
    }
}

/// 3D systems from this size try ILU(0)-GMRES before sparse LU under
/// [`SolverMethod::Auto`]; LU fill grows quickly on tetrahedral meshes.
pub const ITERATIVE_THRESHOLD_3D: usize = 12_000;

fn solve_step_system(
    disc: &Discretization,
    a: &CsrMatrix,
    rhs: &[f64],
    solver: &SolverConfig,
) -> Result<(Vec<f64>, SolveInfo)> {
    if solver.method == SolverMethod::Auto && disc.dim() == 3 && a.nrows() >= ITERATIVE_THRESHOLD_3D
    {
        solve_iterative_first(a, rhs, solver, 1500)
    } else {
        solve(a, rhs, solver)
    }
}

/// Advances one time step.
pub fn step(disc: &Discretization, prev: &State, cfg: &SchemeConfig) -> Result<(State, SolveInfo)> {
    let (a, rhs) = step_system(disc, prev, cfg);
    let (x, info) = if rhs.iter().all(|v| *v == 0.0) {
        (
            vec![0.0; rhs.len()],
            SolveInfo {
                method: cfg.solver.method,
                iterations: 0,
                residual: 0.0,
            },
        )
    } else {
        solve_step_system(disc, &a, &rhs, &cfg.solver)?
    };
    Ok((unpack(disc, &x, prev.step + 1, prev.time + cfg.tau), info))
}

/// Discrete Stokes projection `(S_h u0, S_h p)` with zero-mean pressure.
/// Gradients of `u0` are taken by fourth-order central differences.
pub fn stokes_project(
    disc: &Discretization,
    nu: f64,
    u0: &dyn Fn([f64; 3]) -> [f64; 3],
    solver: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let vel = &disc.velocity;
    let mesh = disc.mesh();
    let dim = mesh.dim();
    let rule = QuadratureRule::simplex(dim, LOAD_DEGREE);
    let mut rhs_u = vec![0.0; vel.n_dofs()];
    let mut rhs_p = vec![0.0; disc.pressure.n_dofs()];
    let mut bv = BasisEval::default();
    let mut bp = BasisEval::default();
    for c in 0..mesh.n_cells() {
        let g = mesh.barycentric_gradients(c);
        for (lam, w) in rule.scaled(mesh.volume(c)) {
            let x = mesh.point(c, lam);
            let jac = jacobian(u0, x);
            let div: f64 = (0..dim).map(|k| jac[k][k]).sum();
            vel.eval_basis(c, &g, lam, &mut bv);
            for i in 0..bv.len() {
                let gi = &bv.grads[i];
                let s: f64 = (0..3)
                    .map(|r| (0..dim).map(|k| gi[r][k] * jac[r][k]).sum::<f64>())
                    .sum();
                rhs_u[bv.dofs[i]] += w * nu * s;
            }
            disc.pressure.eval_basis(c, &g, lam, &mut bp);
            for i in 0..bp.len() {
                rhs_p[bp.dofs[i]] += w * div * bp.values[i][0];
            }
        }
    }
    if rhs_u.iter().chain(&rhs_p).all(|v| v.abs() == 0.0) {
        return Ok((vec![0.0; vel.n_dofs()], vec![0.0; disc.pressure.n_dofs()]));
    }
    let vidx = local_index(vel);
    let pidx: Vec<usize> = (0..disc.pressure.n_dofs()).collect();
    let nu_f = vel.n_free();
    let np = pidx.len();
    let n = nu_f + np + 1;
    let mut t = TripletBuilder::new(n, n);
    scatter(&mut t, &disc.stiff_v, false, &vidx, 0, &vidx, 0, nu);
    scatter(&mut t, &disc.div_p, true, &vidx, 0, &pidx, nu_f, -1.0);
    scatter(&mut t, &disc.div_p, false, &pidx, nu_f, &vidx, 0, 1.0);
    for (q, m) in disc.mean.iter().enumerate() {
        t.push(nu_f + q, nu_f + np, *m);
        t.push(nu_f + np, nu_f + q, *m);
    }
    let a = t.build();
    let mut rhs = vec![0.0; n];
    gather(&rhs_u, &vidx, &mut rhs[..nu_f]);
    rhs[nu_f..nu_f + np].copy_from_slice(&rhs_p);
    let (x, _) = solve(&a, &rhs, solver)?;
    Ok((scatter_back(&x[..nu_f], &vidx), x[nu_f..nu_f + np].to_vec()))
}

/// Initial level: Stokes-projected velocity, `B` from the potential through
/// the exact differential, `J = curl_h B`, `E = 0`.
pub fn initialize_state(disc: &Discretization, cfg: &SchemeConfig) -> Result<State> {
    let init = &cfg.initial;
    let (u, p) = stokes_project(disc, cfg.nu, &|x| init.velocity(x), &cfg.solver)?;
    let mut b = interpolate_potential(&disc.magnetic, &|x| init.potential(x))?;
    if disc.dim() == 2 {
        // out-of-plane component: nodal values of rot A
        let (_, _, off) = disc.magnetic.part(1);
        for (v, x) in disc.mesh().vertices().iter().enumerate() {
            b[off + v] = init.magnetic(*x)[2];
        }
    }
    let div = diagnostics::max_cell_div(disc.mesh(), &b);
    if div > 1e-8 {
        log::warn!("initial magnetic field is not solenoidal: max cell divergence {div:.3e}");
    }
    let j = discrete_curl(&disc.magnetic, &disc.edge, &b)?;
    Ok(State {
        step: 0,
        time: 0.0,
        u,
        p,
        lambda: 0.0,
        b,
        e: vec![0.0; disc.edge.n_dofs()],
        j,
    })
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: State,
    pub rows: Vec<DiagnosticsRow>,
    /// `tau nu sum |grad u|^2 + tau sigma sum |J|^2` after each step (0 first).
    pub dissipation: Vec<f64>,
    /// Energy nonincreasing within `1e-9` relative at every step.
    pub energy_monotone: bool,
    /// Cell divergences of `B` unchanged within `1e-10` relative.
    pub div_preserved: bool,
}

/// Runs `N = floor(T / tau)` steps.
pub fn run(cfg: &SchemeConfig) -> Result<RunOutput> {
    let disc = Discretization::new(cfg.n, cfg.dim)?;
    run_with(&disc, cfg, &mut |_, _, _| Ok(()))
}

/// Runs on a prebuilt discretisation, calling `observer` on every stored
/// level (the initial one included).
pub fn run_with(
    disc: &Discretization,
    cfg: &SchemeConfig,
    observer: &mut dyn FnMut(&Discretization, &State, &DiagnosticsRow) -> Result<()>,
) -> Result<RunOutput> {
    cfg.validate()?;
    if disc.mesh().resolution() != cfg.n || disc.dim() != cfg.dim {
        return Err(Error::Config(
            "discretisation does not match the configured mesh".into(),
        ));
    }
    let mut state = initialize_state(disc, cfg)?;
    let div0 = crate::feec::div_values(disc.mesh(), &state.b);
    let mut rows = vec![diagnostics::row(disc, &state, cfg, None)];
    observer(disc, &state, &rows[0])?;
    let mut dissipation = vec![0.0];
    let mut energy_monotone = true;
    let mut div_preserved = true;
    let div_scale = div0.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for k in 1..=cfg.n_steps() {
        let (next, info) = step(disc, &state, cfg).map_err(|e| Error::StepFailed {
            step: k,
            source: Box::new(e),
        })?;
        if cfg.solver.method == SolverMethod::Gmres {
            log::debug!(
                "step {k}: {} GMRES iterations, residual {:.2e}",
                info.iterations,
                info.residual
            );
        }
        let row = diagnostics::row(disc, &next, cfg, Some(info));
        let prev_energy = rows.last().map(|r| r.energy).unwrap_or(0.0);
        if row.energy > prev_energy + 1e-9 * prev_energy.max(f64::MIN_POSITIVE) {
            energy_monotone = false;
        }
        let div = crate::feec::div_values(disc.mesh(), &next.b);
        if div
            .iter()
            .zip(&div0)
            .any(|(a, b)| (a - b).abs() > 1e-10 * div_scale)
        {
            div_preserved = false;
        }
        let grad_u = disc.stiff_v.bilinear(&next.u, &next.u);
        let cur = disc.mass_x.bilinear(&next.j, &next.j);
        let last = *dissipation.last().unwrap();
        dissipation.push(last + cfg.tau * (cfg.nu * grad_u + cfg.sigma * cur));
        observer(disc, &next, &row)?;
        rows.push(row);
        state = next;
    }
    Ok(RunOutput {
        final_state: state,
        rows,
        dissipation,
        energy_monotone,
        div_preserved,
    })
}
