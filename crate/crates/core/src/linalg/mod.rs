//! Numerical kernels: sparse symmetric matrices, Lanczos, conjugate
//! gradients, Chebyshev vector calculus, dense Hermitian eigenproblems,
//! Gauss–Hermite rules, and order-fixed summation.

pub mod cg;
pub mod cheby;
pub mod csr;
pub mod dense;
pub mod lanczos;
pub mod quad;

pub use cg::{cg_solve, CgSolution};
pub use csr::CsrMatrix;

use num_complex::Complex64;

/// Pairwise (tree) summation with a fixed recursion structure, so results
/// are independent of chunking and thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// ⟨x, y⟩ with pairwise reduction.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    pairwise_sum(&prods)
}

/// ⟨x, y⟩ = Σ x̄_i y_i, antilinear in the first argument.
pub fn dot_complex(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    let re: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a.conj() * b).re).collect();
    let im: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a.conj() * b).im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn pairwise_deterministic_under_split() {
        // Same slice always reduces through the same tree.
        let xs: Vec<f64> = (0..777).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs));
    }
}
