use super::CsrMatrix;

/// ILU(0): incomplete LU restricted to the sparsity pattern of `A` (plus the
/// diagonal). Zero pivots are shifted by `1e-12 * ||A||_inf`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    lu: Vec<f64>,
    diag: Vec<usize>,
    shifted_pivots: usize,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        // make sure every diagonal entry is structurally present
        let mut entries: Vec<_> = a.iter().collect();
        entries.extend((0..n).map(|i| (i, i, 0.0)));
        let a = CsrMatrix::from_triplets(n, n, &entries).unwrap();
        let shift = 1e-12 * a.norm_inf().max(f64::MIN_POSITIVE);

        let row_ptr = a.row_ptr().to_vec();
        let col_idx = a.col_idx().to_vec();
        let mut lu = a.values().to_vec();
        let diag: Vec<usize> = (0..n)
            .map(|i| {
                row_ptr[i]
                    + col_idx[row_ptr[i]..row_ptr[i + 1]]
                        .binary_search(&i)
                        .unwrap()
            })
            .collect();

        let mut shifted_pivots = 0;
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            for k in s..e {
                pos[col_idx[k]] = k;
            }
            for kk in s..diag[i] {
                let k = col_idx[kk];
                let mut piv = lu[diag[k]];
                if piv == 0.0 {
                    piv = shift;
                    lu[diag[k]] = shift;
                    shifted_pivots += 1;
                }
                let f = lu[kk] / piv;
                lu[kk] = f;
                for m in diag[k] + 1..row_ptr[k + 1] {
                    let j = col_idx[m];
                    let p = pos[j];
                    if p != usize::MAX {
                        lu[p] -= f * lu[m];
                    }
                }
            }
            for k in s..e {
                pos[col_idx[k]] = usize::MAX;
            }
        }
        for i in 0..n {
            if lu[diag[i]] == 0.0 {
                lu[diag[i]] = shift;
                shifted_pivots += 1;
            }
        }
        if shifted_pivots > 0 {
            log::debug!("ILU0: shifted {shifted_pivots} zero pivots by {shift:.3e}");
        }
        Self {
            n,
            row_ptr,
            col_idx,
            lu,
            diag,
            shifted_pivots,
        }
    }

    /// Number of zero pivots that were replaced by the diagonal shift.
    pub fn shifted_pivots(&self) -> usize {
        self.shifted_pivots
    }

    /// Solves `(LU) y = x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in self.row_ptr[i]..self.diag[i] {
                s -= self.lu[k] * y[self.col_idx[k]];
            }
            y[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.lu[k] * y[self.col_idx[k]];
            }
            y[i] = s / self.lu[self.diag[i]];
        }
        y
    }
}
