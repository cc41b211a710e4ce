//! Command-line front end: `run`, `converge-space`, `converge-time`, `check`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! failure, 4 failed check.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hallfem_core::diagnostics::{self, csv_path, vtk_path};
use hallfem_core::manifest::RunManifest;
use hallfem_core::scheme::{run_with, Discretization, Experiment};
use hallfem_core::sparse::SolverMethod;
use hallfem_core::study::{self, ConvergenceTable};
use hallfem_core::Error;

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "hallfem",
    version,
    about = "Structure-preserving finite elements for Voigt-regularised Hall-MHD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write diagnostics CSV and VTK snapshots.
    #[command(allow_negative_numbers = true)]
    Run(Common),
    /// Spatial convergence study against a nested fine-mesh reference.
    #[command(allow_negative_numbers = true)]
    ConvergeSpace(Common),
    /// Temporal convergence study against a small-step reference.
    #[command(allow_negative_numbers = true)]
    ConvergeTime(Common),
    /// Structural invariant battery on small meshes.
    Check,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Gmres,
    Dense,
    Lu,
    Auto,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// abc3d | orszag-tang | harris | custom
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Manifest of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Concurrent runs in convergence studies.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::SingularMatrix { .. }
            | Error::NotConverged { .. }
            | Error::StepFailed { .. } => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

/// Manifest from `--config` (or the experiment preset) with flag overrides.
pub fn build_manifest(c: &Common) -> Result<RunManifest, Error> {
    let mut m = match &c.config {
        Some(p) => RunManifest::from_file(p)?,
        None => RunManifest::preset(Experiment::OrszagTang),
    };
    if let Some(e) = &c.experiment {
        let exp = Experiment::parse(e)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{e}'")))?;
        if c.config.is_none() || exp != m.experiment {
            m.set("experiment", e)?;
        }
    }
    let cfg = &mut m.config;
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if let Some(v) = c.tau {
        cfg.tau = v;
    }
    if let Some(v) = c.t_final {
        cfg.t_final = v;
    }
    if let Some(v) = c.nu {
        cfg.nu = v;
    }
    if let Some(v) = c.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = c.eta {
        cfg.eta = v;
    }
    if let Some(v) = c.alpha1 {
        cfg.alpha1 = v;
    }
    if let Some(v) = c.alpha2 {
        cfg.alpha2 = v;
    }
    if let Some(s) = c.solver {
        cfg.solver.method = match s {
            SolverArg::Gmres => SolverMethod::Gmres,
            SolverArg::Dense => SolverMethod::DenseLu,
            SolverArg::Lu => SolverMethod::SparseLu,
            SolverArg::Auto => SolverMethod::Auto,
        };
    }
    if let Some(v) = c.tol {
        cfg.solver.tolerance = v;
    }
    if let Some(v) = &c.out {
        m.out = v.clone();
    }
    if let Some(v) = c.jobs {
        m.jobs = v;
    }
    m.validate()?;
    Ok(m)
}

/// Executes `run`; returns the CSV path.
pub fn cmd_run(m: &RunManifest, log: &mut dyn Write) -> Result<PathBuf, Failure> {
    let cfg = &m.config;
    fs::create_dir_all(&m.out)?;
    let disc = Discretization::new(cfg.n, cfg.dim)?;
    let n_steps = cfg.n_steps();
    writeln!(
        log,
        "{}: dim={} n={} tau={} T={} steps={} unknowns={}",
        m.name,
        cfg.dim,
        cfg.n,
        cfg.tau,
        cfg.t_final,
        n_steps,
        disc.n_unknowns()
    )?;
    let out_dir = m.out.clone();
    let name = m.name.clone();
    let every = m.vtk_every;
    let out = run_with(&disc, cfg, &mut |d, s, r| {
        let write = s.step == 0 || s.step == n_steps || (every > 0 && s.step % every == 0);
        if write {
            diagnostics::write_vtk_file(d, s, &vtk_path(&out_dir, &name, s.step))?;
        }
        log::info!(
            "step {} t={:.4} energy={:.8e} max_div_B={:.2e}",
            r.step,
            r.time,
            r.energy,
            r.max_div_b
        );
        Ok(())
    })?;
    let csv = csv_path(&m.out, &m.name);
    diagnostics::write_csv_file(&out.rows, &csv)?;
    let last = out.rows.last().unwrap();
    writeln!(
        log,
        "done: energy {:.8e} -> {:.8e}, energy monotone: {}, div preserved: {}, max div B {:.2e}",
        out.rows[0].energy, last.energy, out.energy_monotone, out.div_preserved, last.max_div_b
    )?;
    writeln!(log, "wrote {}", csv.display())?;
    Ok(csv)
}

fn write_table(table: &ConvergenceTable, path: &Path, log: &mut dyn Write) -> Result<(), Failure> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(path, &buf)?;
    log.write_all(&buf)?;
    writeln!(log, "wrote {}", path.display())?;
    Ok(())
}

pub fn cmd_converge_space(m: &RunManifest, log: &mut dyn Write) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&m.out)?;
    let mut base = m.config.clone();
    base.t_final = m.t_cmp.unwrap_or(base.t_final);
    writeln!(
        log,
        "spatial study: meshes {:?} vs n={} at T={} tau={}",
        m.meshes,
        m.n_reference(),
        base.t_final,
        base.tau
    )?;
    let table = study::converge_space(&base, &m.meshes, m.n_reference(), m.jobs)?;
    let path = m.out.join(format!("{}_converge_space.csv", m.name));
    write_table(&table, &path, log)?;
    Ok(path)
}

pub fn cmd_converge_time(m: &RunManifest, log: &mut dyn Write) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&m.out)?;
    let mut base = m.config.clone();
    base.t_final = m.t_cmp.unwrap_or(base.t_final);
    writeln!(
        log,
        "temporal study: n={} taus {:?} vs tau={} at T={}",
        base.n,
        m.taus,
        m.tau_reference(),
        base.t_final
    )?;
    let table = study::converge_time(&base, &m.taus, m.tau_reference(), m.jobs)?;
    let path = m.out.join(format!("{}_converge_time.csv", m.name));
    write_table(&table, &path, log)?;
    Ok(path)
}

pub fn cmd_check(log: &mut dyn Write) -> Result<(), Failure> {
    let results = study::check_battery();
    let mut failed = 0;
    for r in &results {
        writeln!(
            log,
            "{} {} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        )?;
        failed += usize::from(!r.passed);
    }
    writeln!(log, "{} checks, {} failed", results.len(), failed)?;
    if failed > 0 {
        return Err(Failure {
            code: EXIT_CHECK,
            message: format!("{failed} checks failed"),
        });
    }
    Ok(())
}

/// Runs a parsed command line, returning the exit code.
pub fn execute(cli: &Cli, log: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check => cmd_check(log),
        Command::Run(c) | Command::ConvergeSpace(c) | Command::ConvergeTime(c) => {
            match build_manifest(c) {
                Err(e) => Err(Failure::from(e)),
                Ok(m) => match &cli.command {
                    Command::Run(_) => cmd_run(&m, log).map(|_| ()),
                    Command::ConvergeSpace(_) => cmd_converge_space(&m, log).map(|_| ()),
                    _ => cmd_converge_time(&m, log).map(|_| ()),
                },
            }
        }
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(log, "error: {}", f.message);
            f.code
        }
    }
}
