//! Dense Hermitian eigenproblems and factorizations used on Gram/covariance
//! matrices (small: O(basis²)) and on full graph truncations below the
//! dense-path cutoff.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::{CoreError, Result};

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending,
/// eigenvectors as columns.
pub fn sym_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = m.clone().symmetric_eigen();
    sort_eigen(se.eigenvalues.as_slice(), &se.eigenvectors, |c| c.clone_owned())
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub fn herm_eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let se = m.clone().symmetric_eigen();
    sort_eigen(se.eigenvalues.as_slice(), &se.eigenvectors, |c| c.clone_owned())
}

fn sort_eigen<T: nalgebra::Scalar>(
    vals: &[f64],
    vecs: &DMatrix<T>,
    clone_col: impl Fn(&nalgebra::DVectorView<T>) -> nalgebra::DVector<T>,
) -> (Vec<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let cols: Vec<nalgebra::DVector<T>> =
        order.iter().map(|&i| clone_col(&vecs.column(i))).collect();
    let sorted_vecs = DMatrix::from_columns(&cols);
    (sorted_vals, sorted_vecs)
}

/// Cholesky of a Hermitian positive-definite matrix; the error names the
/// leading principal block where the factorization broke down.
pub fn cholesky(m: &DMatrix<Complex64>) -> Result<Cholesky<Complex64, Dyn>> {
    m.clone().cholesky().ok_or_else(|| {
        let bad = first_indefinite_block(m);
        CoreError::InvariantViolation(format!(
            "Gram matrix numerically singular or indefinite (leading block of size {bad})"
        ))
    })
}

fn first_indefinite_block(m: &DMatrix<Complex64>) -> usize {
    for k in 1..=m.nrows() {
        if m.view((0, 0), (k, k)).clone_owned().cholesky().is_none() {
            return k;
        }
    }
    m.nrows()
}

/// Matrix of a Hermitian form F in the orthonormal frame of the inner
/// product G: with G = L L^H this is L⁻¹ F L⁻ᴴ. Generalized eigenvalues of
/// (F, G) are its ordinary eigenvalues.
pub fn form_in_gram_frame(
    f: &DMatrix<Complex64>,
    g_chol: &Cholesky<Complex64, Dyn>,
) -> DMatrix<Complex64> {
    let l = g_chol.l();
    let mut w = f.clone();
    l.solve_lower_triangular_mut(&mut w); // W = L⁻¹ F
    let mut wt = w.adjoint();
    l.solve_lower_triangular_mut(&mut wt); // (L⁻¹ W^H) = L⁻¹ F^H L⁻ᴴ, F Hermitian
    // Symmetrize to kill roundoff asymmetry.
    let s = wt.adjoint();
    (&s + s.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Columns of `frame_vecs` (coordinates in the G-orthonormal frame) mapped
/// back to basis coordinates: x = L⁻ᴴ u.
pub fn frame_to_basis(
    frame_vecs: &DMatrix<Complex64>,
    g_chol: &Cholesky<Complex64, Dyn>,
) -> DMatrix<Complex64> {
    let mut out = frame_vecs.clone();
    g_chol.l().adjoint().solve_upper_triangular_mut(&mut out);
    out
}

/// Principal square root of a Hermitian PSD matrix via eigendecomposition.
/// Eigenvalues in [−neg_tol, 0) are clamped to 0; more negative ones are an
/// invariant violation.
pub fn principal_sqrt_psd(
    m: &DMatrix<Complex64>,
    neg_tol: f64,
) -> Result<DMatrix<Complex64>> {
    let (vals, vecs) = herm_eigh(m);
    let mut clamped = Vec::with_capacity(vals.len());
    for &v in &vals {
        if v < -neg_tol {
            return Err(CoreError::InvariantViolation(format!(
                "matrix square root requested for an operator with eigenvalue {v:.3e} < -{neg_tol:.1e}"
            )));
        }
        clamped.push(v.max(0.0).sqrt());
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        clamped.len(),
        clamped.iter().map(|&s| Complex64::new(s, 0.0)),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// Frobenius norm.
pub fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Pivoted conditioning guard on a Hermitian PSD Gram matrix: greedy pivoted
/// Cholesky, keeping columns while the pivot stays above
/// max_pivot / cond_bound. Returns (kept, dropped), each sorted ascending.
pub fn pivoted_gram_keep(g: &DMatrix<Complex64>, cond_bound: f64) -> (Vec<usize>, Vec<usize>) {
    let n = g.nrows();
    let mut work = g.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut kept = Vec::new();

    let first_pivot = (0..n)
        .map(|i| work[(i, i)].re)
        .fold(f64::NEG_INFINITY, f64::max);
    if first_pivot <= 0.0 {
        return (Vec::new(), (0..n).collect());
    }
    let floor = first_pivot / cond_bound;

    for step in 0..n {
        // Select the largest remaining diagonal.
        let (best, best_val) = (step..n)
            .map(|i| (i, work[(i, i)].re))
            .fold((step, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        if best_val < floor {
            break;
        }
        work.swap_rows(step, best);
        work.swap_columns(step, best);
        perm.swap(step, best);
        kept.push(perm[step]);

        // Schur-complement update of the trailing block.
        let piv = work[(step, step)].re;
        for i in (step + 1)..n {
            for j in (step + 1)..n {
                let update = work[(i, step)] * work[(step, j)] / piv;
                work[(i, j)] -= update;
            }
        }
    }

    kept.sort_unstable();
    let dropped: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    (kept, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn herm_eigh_known_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = herm_eigh(&m);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        // Residual ‖Mv − λv‖ per pair.
        for k in 0..2 {
            let v = vecs.column(k);
            let r = &m * v - v * c(vals[k], 0.0);
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn sqrt_of_psd() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let r = principal_sqrt_psd(&m, 1e-12).unwrap();
        let back = &r * &r;
        assert!(frobenius(&(&back - &m)) < 1e-12);
    }

    #[test]
    fn gen_eig_in_frame() {
        // F = diag(1, 0), G = diag(2, 2) → generalized eigenvalues {0, 1/2}.
        let f = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let g = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let chol = cholesky(&g).unwrap();
        let s = form_in_gram_frame(&f, &chol);
        let (vals, _) = herm_eigh(&s);
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn pivot_guard_drops_duplicate() {
        // Two identical vectors: Gram [[1,1],[1,1]] keeps one column.
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let (kept, dropped) = pivoted_gram_keep(&g, 1e12);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped.len(), 1);
    }
}
