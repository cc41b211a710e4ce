use std::ops::Range;

use crate::error::{Error, Result};

use super::direct::ScaledSparseLu;
use super::{gmres, norm2, CsrMatrix, DenseLu, Ilu0, SparseLu};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Sparse LU; callers may refine the choice with [`solve_iterative_first`].
    Auto,
    Gmres,
    DenseLu,
    SparseLu,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Ilu0,
    /// Block Jacobi over the given index ranges; each diagonal block is
    /// factorised exactly, singular blocks fall back to the identity.
    BlockDiagonal(Vec<Range<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            tolerance: 1e-10,
            max_iterations: 2000,
            restart: 200,
            preconditioner: Preconditioner::Ilu0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Config(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.restart == 0 {
            return Err(Error::Config("GMRES restart length must be >= 1".into()));
        }
        Ok(())
    }

    pub fn gmres() -> Self {
        Self {
            method: SolverMethod::Gmres,
            ..Self::default()
        }
    }

    pub fn dense() -> Self {
        Self {
            method: SolverMethod::DenseLu,
            ..Self::default()
        }
    }
}

/// Outcome metadata of a linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub method: SolverMethod,
    pub iterations: usize,
    pub residual: f64,
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bn = norm2(b);
    let ax = a.matvec(x);
    let r: f64 = b
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    if bn == 0.0 {
        r
    } else {
        r / bn
    }
}

/// Solves `A x = b`.
pub fn solve(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveInfo)> {
    cfg.validate()?;
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve: matrix {}x{}, rhs {}",
            n,
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok((
            Vec::new(),
            SolveInfo {
                method: cfg.method,
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    match cfg.method {
        SolverMethod::Gmres => solve_gmres(a, b, cfg),
        SolverMethod::DenseLu => {
            let lu = DenseLu::factor(a)?;
            direct_with_refinement(a, b, cfg, SolverMethod::DenseLu, |r| lu.solve(r))
        }
        SolverMethod::SparseLu | SolverMethod::Auto => {
            if a.max_abs() == 0.0 {
                return Err(Error::SingularMatrix {
                    column: 0,
                    pivot: 0.0,
                });
            }
            let lu = ScaledSparseLu::factor(a)?;
            direct_with_refinement(a, b, cfg, SolverMethod::SparseLu, |r| lu.solve(r))
        }
    }
}

/// ILU(0)-preconditioned GMRES capped at `max_iterations`, falling back to
/// equilibrated sparse LU if it stalls.
pub fn solve_iterative_first(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
    max_iterations: usize,
) -> Result<(Vec<f64>, SolveInfo)> {
    let it = SolverConfig {
        method: SolverMethod::Gmres,
        preconditioner: Preconditioner::Ilu0,
        max_iterations: cfg.max_iterations.min(max_iterations),
        ..cfg.clone()
    };
    match solve(a, b, &it) {
        Err(Error::NotConverged {
            iterations,
            residual,
        }) => {
            log::debug!(
                "GMRES stalled ({iterations} its, residual {residual:.2e}); using sparse LU"
            );
            let cfg = SolverConfig {
                method: SolverMethod::SparseLu,
                ..cfg.clone()
            };
            solve(a, b, &cfg)
        }
        r => r,
    }
}

fn direct_with_refinement(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
    method: SolverMethod,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, SolveInfo)> {
    let mut x = apply(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix {
            column: 0,
            pivot: 0.0,
        });
    }
    let mut res = relative_residual(a, &x, b);
    let mut refinements = 0;
    // a couple of refinement sweeps recover accuracy lost to pivot growth
    while res > cfg.tolerance * 1e-2 && refinements < 3 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = apply(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
        let cres = relative_residual(a, &cand, b);
        refinements += 1;
        if cres < res {
            x = cand;
            res = cres;
        } else {
            break;
        }
    }
    if !res.is_finite() {
        return Err(Error::SingularMatrix {
            column: 0,
            pivot: 0.0,
        });
    }
    if res > cfg.tolerance {
        return Err(Error::NotConverged {
            iterations: refinements,
            residual: res,
        });
    }
    Ok((
        x,
        SolveInfo {
            method,
            iterations: refinements,
            residual: res,
        },
    ))
}

fn solve_gmres(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveInfo)> {
    if a.max_abs() == 0.0 && norm2(b) > 0.0 {
        return Err(Error::SingularMatrix {
            column: 0,
            pivot: 0.0,
        });
    }
    let (x, iters, res) = match &cfg.preconditioner {
        Preconditioner::None => gmres(
            a,
            b,
            None,
            &|v| v.to_vec(),
            cfg.tolerance,
            cfg.restart,
            cfg.max_iterations,
        ),
        Preconditioner::Ilu0 => {
            let ilu = Ilu0::new(a);
            gmres(
                a,
                b,
                None,
                &|v| ilu.apply(v),
                cfg.tolerance,
                cfg.restart,
                cfg.max_iterations,
            )
        }
        Preconditioner::BlockDiagonal(ranges) => {
            let blocks: Vec<(Range<usize>, Option<SparseLu>)> = ranges
                .iter()
                .map(|r| {
                    let idx: Vec<usize> = r.clone().collect();
                    let sub = a.submatrix(&idx, &idx);
                    let lu = if sub.max_abs() > 0.0 {
                        SparseLu::factor(&sub).ok()
                    } else {
                        None
                    };
                    (r.clone(), lu)
                })
                .collect();
            let apply = |v: &[f64]| {
                let mut out = v.to_vec();
                for (r, lu) in &blocks {
                    if let Some(lu) = lu {
                        let y = lu.solve(&v[r.clone()]);
                        if y.iter().all(|t| t.is_finite()) {
                            out[r.clone()].copy_from_slice(&y);
                        }
                    }
                }
                out
            };
            gmres(
                a,
                b,
                None,
                &apply,
                cfg.tolerance,
                cfg.restart,
                cfg.max_iterations,
            )
        }
    };
    if !res.is_finite() || res > cfg.tolerance {
        return Err(Error::NotConverged {
            iterations: iters,
            residual: res,
        });
    }
    Ok((
        x,
        SolveInfo {
            method: SolverMethod::Gmres,
            iterations: iters,
            residual: res,
        },
    ))
}
