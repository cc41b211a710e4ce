use faer::prelude::*;
use faer::sparse::{SparseRowMat, SymbolicSparseRowMat};
use faer::Mat;

use crate::error::{Error, Result};

use super::CsrMatrix;

/// Sparse LU with partial pivoting and fill-reducing ordering (backed by faer).
pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "sparse LU needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let sym = SymbolicSparseRowMat::new_checked(
            n,
            n,
            a.row_ptr().to_vec(),
            None,
            a.col_idx().to_vec(),
        );
        let mat = SparseRowMat::new(sym, a.values().to_vec());
        let lu = mat.sp_lu().map_err(|_| Error::SingularMatrix {
            column: 0,
            pivot: 0.0,
        })?;
        Ok(Self { n, lu })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}

/// Ruiz equilibration: diagonal `r`, `c` with `diag(r) A diag(c)` having
/// rows and columns of unit max-norm (approximately).
pub fn equilibrate(a: &CsrMatrix, sweeps: usize) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; n];
    for _ in 0..sweeps {
        let mut rmax = vec![0.0f64; m];
        let mut cmax = vec![0.0f64; n];
        for (i, j, v) in a.iter() {
            let s = (r[i] * v * c[j]).abs();
            rmax[i] = rmax[i].max(s);
            cmax[j] = cmax[j].max(s);
        }
        for (ri, mx) in r.iter_mut().zip(&rmax) {
            if *mx > 0.0 {
                *ri /= mx.sqrt();
            }
        }
        for (cj, mx) in c.iter_mut().zip(&cmax) {
            if *mx > 0.0 {
                *cj /= mx.sqrt();
            }
        }
    }
    (r, c)
}

/// Sparse LU of the equilibrated matrix.
pub struct ScaledSparseLu {
    r: Vec<f64>,
    c: Vec<f64>,
    lu: SparseLu,
}

impl ScaledSparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let (r, c) = equilibrate(a, 8);
        let mut s = a.clone();
        let rp = s.row_ptr().to_vec();
        let ci = s.col_idx().to_vec();
        let vals = s.values_mut();
        for i in 0..rp.len() - 1 {
            for k in rp[i]..rp[i + 1] {
                vals[k] *= r[i] * c[ci[k]];
            }
        }
        Ok(Self {
            lu: SparseLu::factor(&s)?,
            r,
            c,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rb: Vec<f64> = b.iter().zip(&self.r).map(|(b, r)| b * r).collect();
        let y = self.lu.solve(&rb);
        y.iter().zip(&self.c).map(|(y, c)| y * c).collect()
    }
}
