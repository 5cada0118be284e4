//! Compressed sparse row storage for symmetric nonnegative integer-weighted
//! adjacency matrices. Entries are held as f64 (edge multiplicities are
//! exactly representable), column indices as u32.

use num_complex::Complex64;

use crate::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row neighbor lists. Rows must be pre-sorted by column.
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// y = A x for complex x (two real passes).
    pub fn spmv_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xv = x[self.cols[k] as usize];
                re += self.vals[k] * xv.re;
                im += self.vals[k] * xv.im;
            }
            y[i] = Complex64::new(re, im);
        }
    }

    /// Checks structural symmetry A = Aᵀ exactly.
    pub fn verify_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                let v = self.vals[k];
                let back = self.entry(j, i);
                if back != v {
                    return Err(CoreError::InvariantViolation(format!(
                        "adjacency not symmetric at ({i},{j}): {v} vs {back}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(pos) => self.vals[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Row sums, i.e. vertex degrees counted with multiplicity.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> CsrMatrix {
        // 0 - 1 - 2
        CsrMatrix::from_rows(vec![
            vec![(1, 1.0)],
            vec![(0, 1.0), (2, 1.0)],
            vec![(1, 1.0)],
        ])
    }

    #[test]
    fn spmv_path() {
        let a = path3();
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        a.spmv(&x, &mut y);
        assert_eq!(y, [2.0, 4.0, 2.0]);
        a.verify_symmetric().unwrap();
    }

    #[test]
    fn entry_lookup() {
        let a = path3();
        assert_eq!(a.entry(0, 1), 1.0);
        assert_eq!(a.entry(0, 2), 0.0);
    }
}
