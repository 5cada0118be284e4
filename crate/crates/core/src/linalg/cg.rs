//! Conjugate gradients for symmetric positive definite operators, with an
//! indefiniteness certificate: a non-positive curvature p·Ap means the
//! shift sits inside the spectrum and the solve is refused rather than
//! returning a silently wrong vector.

use super::{dot, norm2};
use crate::{CoreError, Result};

pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn cg_solve<F>(apply: F, b: &[f64], tol_rel: f64, max_iter: usize) -> Result<CgSolution>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs = dot(&r, &r);
    let mut best = rs;

    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(CoreError::Refusal(format!(
                "CG detected non-positive curvature at iteration {it}: shift lies inside the spectrum"
            )));
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() <= tol_rel * b_norm {
            return Ok(CgSolution {
                x,
                iterations: it + 1,
                relative_residual: rs_new.sqrt() / b_norm,
            });
        }
        if rs_new > 1e8 * best {
            return Err(CoreError::Refusal(format!(
                "CG residual diverged at iteration {it}"
            )));
        }
        best = best.min(rs_new);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }

    Err(CoreError::NonConvergence { iterations: max_iter, context: "CG".into() })
}
