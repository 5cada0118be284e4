//! Chebyshev polynomial calculus for functions of a sparse symmetric
//! operator applied to vectors: f(H)v without forming f(H).
//!
//! Coefficients are sampled on Chebyshev nodes of the declared spectral
//! interval; application uses the forward three-term recurrence (stable on
//! the spectrum since |T_k| ≤ 1). Long heat evolutions e^{−τH} are stepped
//! with renormalization and an accumulated log-scale, so no intermediate
//! underflows for τ‖H‖ in the thousands.

use num_complex::Complex64;

use super::norm2;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        SpectralInterval { lo, hi }
    }
    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Chebyshev coefficients of f on the interval, degree chosen adaptively:
/// doubling until the tail quarter of coefficients drops below
/// `tail_tol · max|c|`, capped at `max_deg`.
pub fn chebyshev_coeffs<F>(f: F, interval: SpectralInterval, max_deg: usize, tail_tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    // Coefficient sums bottom out at the rounding floor of the cosine
    // transform, which scales with the sampled sup of |f| (the largest
    // coefficient can be much smaller); never demand a tail below it.
    let mut deg = 16usize;
    loop {
        let (c, f_sup) = coeffs_fixed(&f, interval, deg);
        let max_c = c.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let floor = (tail_tol * max_c).max(64.0 * f64::EPSILON * f_sup);
        let tail = &c[(3 * c.len()) / 4..];
        let tail_max = tail.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if max_c == 0.0 || tail_max <= floor {
            // Trim trailing negligible coefficients.
            let keep = c.iter().rposition(|&x| x.abs() > floor).map_or(1, |p| p + 1);
            return Ok(c[..keep].to_vec());
        }
        if deg >= max_deg {
            return Err(CoreError::NonConvergence {
                iterations: deg,
                context: "Chebyshev coefficient tail did not decay".into(),
            });
        }
        deg = (deg * 2).min(max_deg);
    }
}

fn coeffs_fixed<F: Fn(f64) -> f64>(
    f: &F,
    interval: SpectralInterval,
    deg: usize,
) -> (Vec<f64>, f64) {
    let n = deg + 1;
    let (c0, hw) = (interval.center(), interval.half_width());
    let fx: Vec<f64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            f(c0 + hw * theta.cos())
        })
        .collect();
    let f_sup = fx.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let coeffs = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for (j, &v) in fx.iter().enumerate() {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                acc += v * (k as f64 * theta).cos();
            }
            acc * if k == 0 { 1.0 } else { 2.0 } / n as f64
        })
        .collect();
    (coeffs, f_sup)
}

/// Evaluate a coefficient vector at a scalar point (test oracle path).
pub fn chebyshev_eval(coeffs: &[f64], interval: SpectralInterval, x: f64) -> f64 {
    let t = (x - interval.center()) / interval.half_width();
    let mut tkm1 = 1.0;
    let mut tk = t;
    let mut acc = coeffs[0];
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        if k == 1 {
            acc += c * t;
        } else {
            let tk1 = 2.0 * t * tk - tkm1;
            tkm1 = tk;
            tk = tk1;
            acc += c * tk;
        }
    }
    acc
}

/// y = Σ c_k T_k(L) v with L the affine rescaling of H onto [−1,1].
pub fn chebyshev_apply<F>(apply_h: F, interval: SpectralInterval, coeffs: &[f64], v: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = v.len();
    let (c0, hw) = (interval.center(), interval.half_width());
    let apply_l = |x: &[f64], y: &mut [f64]| {
        apply_h(x, y);
        for i in 0..n {
            y[i] = (y[i] - c0 * x[i]) / hw;
        }
    };

    let mut t_prev = v.to_vec(); // T_0 v
    let mut acc: Vec<f64> = v.iter().map(|&x| coeffs[0] * x).collect();
    if coeffs.len() == 1 {
        return acc;
    }
    let mut t_cur = vec![0.0; n];
    apply_l(v, &mut t_cur); // T_1 v
    for i in 0..n {
        acc[i] += coeffs[1] * t_cur[i];
    }
    let mut work = vec![0.0; n];
    for &c in &coeffs[2..] {
        apply_l(&t_cur, &mut work);
        for i in 0..n {
            let next = 2.0 * work[i] - t_prev[i];
            t_prev[i] = t_cur[i];
            t_cur[i] = next;
            acc[i] += c * next;
        }
    }
    acc
}

/// Complex variant for functions like e^{itH}.
pub fn chebyshev_apply_complex<F>(
    apply_h: F,
    interval: SpectralInterval,
    coeffs: &[Complex64],
    v: &[Complex64],
) -> Vec<Complex64>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = v.len();
    let (c0, hw) = (interval.center(), interval.half_width());
    let apply_l = |x: &[Complex64], y: &mut [Complex64]| {
        apply_h(x, y);
        for i in 0..n {
            y[i] = (y[i] - c0 * x[i]) / hw;
        }
    };

    let mut t_prev = v.to_vec();
    let mut acc: Vec<Complex64> = v.iter().map(|&x| coeffs[0] * x).collect();
    if coeffs.len() == 1 {
        return acc;
    }
    let mut t_cur = vec![Complex64::ZERO; n];
    apply_l(v, &mut t_cur);
    for i in 0..n {
        acc[i] += coeffs[1] * t_cur[i];
    }
    let mut work = vec![Complex64::ZERO; n];
    for &c in &coeffs[2..] {
        apply_l(&t_cur, &mut work);
        for i in 0..n {
            let next = 2.0 * work[i] - t_prev[i];
            t_prev[i] = t_cur[i];
            t_cur[i] = next;
            acc[i] += c * next;
        }
    }
    acc
}

/// Complex Chebyshev coefficients of a complex-valued function on a real
/// interval (adaptive degree as in the real case).
pub fn chebyshev_coeffs_complex<F>(
    f: F,
    interval: SpectralInterval,
    max_deg: usize,
    tail_tol: f64,
) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    let re = chebyshev_coeffs(|x| f(x).re, interval, max_deg, tail_tol)?;
    let im = chebyshev_coeffs(|x| f(x).im, interval, max_deg, tail_tol)?;
    let len = re.len().max(im.len());
    Ok((0..len)
        .map(|k| {
            Complex64::new(
                re.get(k).copied().unwrap_or(0.0),
                im.get(k).copied().unwrap_or(0.0),
            )
        })
        .collect())
}

/// A heat-semigroup snapshot: the unit vector u with
/// e^{−τH} v₀ = e^{log_scale} · u.
pub struct HeatSnapshot {
    pub tau: f64,
    pub unit: Vec<f64>,
    pub log_scale: f64,
}

/// e^{−τH} v₀ at each requested τ (ascending, τ ≥ 0), computed by stepping
/// with per-step Chebyshev factors and renormalization between steps.
pub fn heat_chain<F>(
    apply_h: F,
    interval: SpectralInterval,
    taus: &[f64],
    v0: &[f64],
) -> Result<Vec<HeatSnapshot>>
where
    F: Fn(&[f64], &mut [f64]),
{
    const MAX_STEP: f64 = 4.0;
    let mut out = Vec::with_capacity(taus.len());
    let mut cur = v0.to_vec();
    let nrm = norm2(&cur);
    if nrm == 0.0 {
        return Err(CoreError::InvalidInput("heat chain on zero vector".into()));
    }
    for x in &mut cur {
        *x /= nrm;
    }
    let mut log_scale = nrm.ln();
    let mut tau_cur = 0.0;
    let mut cache: Vec<(f64, Vec<f64>)> = Vec::new();

    for &tau in taus {
        if tau < tau_cur {
            return Err(CoreError::InvalidInput("heat chain times must ascend".into()));
        }
        let mut remaining = tau - tau_cur;
        while remaining > 1e-15 {
            let dt = remaining.min(MAX_STEP);
            let coeffs = match cache.iter().find(|(d, _)| (*d - dt).abs() < 1e-15) {
                Some((_, c)) => c.clone(),
                None => {
                    let c = chebyshev_coeffs(|h| (-dt * h).exp(), interval, 512, 1e-16)?;
                    cache.push((dt, c.clone()));
                    c
                }
            };
            cur = chebyshev_apply(&apply_h, interval, &coeffs, &cur);
            let s = norm2(&cur);
            if s == 0.0 || !s.is_finite() {
                return Err(CoreError::NonConvergence {
                    iterations: 0,
                    context: format!("heat step at τ = {tau_cur} produced scale {s}"),
                });
            }
            for x in &mut cur {
                *x /= s;
            }
            log_scale += s.ln();
            remaining -= dt;
            tau_cur += dt;
        }
        out.push(HeatSnapshot { tau, unit: cur.clone(), log_scale });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;
    use approx::assert_abs_diff_eq;

    fn path(n: usize) -> CsrMatrix {
        CsrMatrix::from_rows(
            (0..n)
                .map(|i| {
                    let mut r = Vec::new();
                    if i > 0 {
                        r.push(((i - 1) as u32, 1.0));
                    }
                    if i + 1 < n {
                        r.push(((i + 1) as u32, 1.0));
                    }
                    r
                })
                .collect(),
        )
    }

    #[test]
    fn coeffs_reproduce_exp() {
        let iv = SpectralInterval::new(0.0, 12.0);
        let c = chebyshev_coeffs(|h| (-0.7 * h).exp(), iv, 512, 1e-16).unwrap();
        for &h in &[0.0, 0.3, 4.0, 11.9] {
            assert_abs_diff_eq!(chebyshev_eval(&c, iv, h), (-0.7f64 * h).exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn heat_chain_matches_dense() {
        // e^{−τH}δ_0 on a short path, H = 2I − A, against scalar eigen sum.
        let n = 31;
        let a = path(n);
        let iv = SpectralInterval::new(0.0, 4.0);
        let apply_h = |x: &[f64], y: &mut [f64]| {
            a.spmv(x, y);
            for i in 0..n {
                y[i] = 2.0 * x[i] - y[i];
            }
        };
        let mut d0 = vec![0.0; n];
        d0[0] = 1.0;
        let snaps = heat_chain(apply_h, iv, &[1.5, 9.0], &d0).unwrap();

        // Dense oracle: eigenvectors of the path are sines.
        for snap in &snaps {
            let tau = snap.tau;
            let mut oracle = vec![0.0; n];
            for k in 1..=n {
                let lam = 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos();
                let h = 2.0 - lam;
                let comp = |j: usize| {
                    (2.0 / (n as f64 + 1.0)).sqrt()
                        * (std::f64::consts::PI * k as f64 * (j as f64 + 1.0) / (n as f64 + 1.0)).sin()
                };
                let w = (-tau * h).exp() * comp(0);
                for (j, o) in oracle.iter_mut().enumerate() {
                    *o += w * comp(j);
                }
            }
            let scale = snap.log_scale.exp();
            for i in 0..n {
                assert_abs_diff_eq!(scale * snap.unit[i], oracle[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn complex_evolution_unitary() {
        let n = 31;
        let a = path(n);
        let iv = SpectralInterval::new(-2.0, 2.0);
        let t = 1.3;
        let coeffs =
            chebyshev_coeffs_complex(|h| (Complex64::i() * t * h).exp(), iv, 256, 1e-16).unwrap();
        let mut v = vec![Complex64::ZERO; n];
        v[n / 2] = Complex64::ONE;
        let w = chebyshev_apply_complex(
            |x: &[Complex64], y: &mut [Complex64]| a.spmv_complex(x, y),
            iv,
            &coeffs,
            &v,
        );
        let nrm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_abs_diff_eq!(nrm, 1.0, epsilon = 1e-12);
    }
}
