//! Gauss–Hermite rules via Golub–Welsch: nodes/weights for ∫ e^{−x²} f(x) dx
//! and the rescaled rule for Gaussian probability measures N(0, σ²).

use nalgebra::DMatrix;

use super::dense;

/// Physicists' Gauss–Hermite rule: Σ w_j f(x_j) ≈ ∫ e^{−x²} f(x) dx.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    // Jacobi matrix of the Hermite recurrence: off-diagonals √(k/2).
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let (nodes, vecs) = dense::sym_eigh(&j);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let weights: Vec<f64> = (0..order)
        .map(|i| {
            let v0 = vecs[(0, i)];
            sqrt_pi * v0 * v0
        })
        .collect();
    (nodes, weights)
}

/// Rule for ∫ f dN(0, σ²): Σ w_j f(x_j) with Σ w_j = 1.
pub fn gauss_normal(sigma2: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, weights) = gauss_hermite(order);
    let s = (2.0 * sigma2).sqrt();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    (
        nodes.iter().map(|&x| s * x).collect(),
        weights.iter().map(|&w| w * inv_sqrt_pi).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        assert_abs_diff_eq!(m0, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(m2, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-12);
    }

    /// The characteristic-function identity ∫ e^{ixt} dN(0,σ²) = e^{−σ²t²/2},
    /// the scalar fact behind the Gaussian mixture certificates.
    #[test]
    fn characteristic_function_identity() {
        for &sigma2 in &[0.25, 0.5, 1.0] {
            let (x, w) = gauss_normal(sigma2, 40);
            for &t in &[0.0, 0.5, 1.5, 3.0, 6.0] {
                let mut re = 0.0;
                let mut im = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    re += wi * (xi * t).cos();
                    im += wi * (xi * t).sin();
                }
                assert_abs_diff_eq!(re, (-sigma2 * t * t / 2.0).exp(), epsilon = 1e-12);
                assert_abs_diff_eq!(im, 0.0, epsilon = 1e-12);
            }
        }
    }
}
