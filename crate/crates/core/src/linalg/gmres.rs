//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub tol: f64,
    pub restart: usize,
    /// Zero means ten times the system size.
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            restart: 60,
            max_iter: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual estimate after every inner iteration.
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` given `apply(v, out) = A v` and `precond(v, out) ≈ A⁻¹ v`.
/// Convergence is checked on the true residual at every restart.
pub fn gmres(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &GmresConfig,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut residuals = Vec::new();
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residuals,
        });
    }
    let m = cfg.restart.max(1);
    let max_iter = if cfg.max_iter == 0 { 10 * n } else { cfg.max_iter };
    let mut iterations = 0;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    loop {
        apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm(&r);
        if beta / bnorm <= cfg.tol {
            return Ok(GmresOutcome {
                x,
                iterations,
                residuals,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations, residuals });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            precond(&v[k], &mut z);
            apply(&z, &mut w);
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                hess[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hk1 = norm(&w);
            hess[k + 1][k] = hk1;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            let rel = g[k + 1].abs() / bnorm;
            residuals.push(rel);
            if rel <= cfg.tol || hk1 == 0.0 || iterations >= max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hk1).collect());
        }
        // back-substitute y and update x += M⁻¹ V y
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            for (u, vv) in update.iter_mut().zip(vi) {
                *u += yi * vv;
            }
        }
        precond(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}
