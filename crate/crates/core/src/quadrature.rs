//! Gauss–Legendre rules on arbitrary intervals.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_{n}(t), P_{n-1}(t))` by the three-term recurrence.
fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// All `P_0..=P_max` at `t`.
fn legendre_all(max: usize, t: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(max + 1);
    p.push(1.0);
    if max >= 1 {
        p.push(t);
    }
    for k in 2..=max {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * t * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        p.push(next);
    }
    p
}

/// Reference nodes/weights on [-1, 1], ascending, exactly mirror-symmetric.
fn reference_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        // Tricomi initial guess for the k-th largest root.
        let theta = std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        if p != 0.0 {
            dp = nf * (x * p - pm1) / (x * x - 1.0);
        }
        let weight = 2.0 / ((1.0 - x * x) * dp * dp);
        let hi = n - 1 - k;
        t[hi] = x;
        t[k] = -x;
        w[hi] = weight;
        w[k] = weight;
    }
    if n % 2 == 1 {
        t[n / 2] = 0.0;
    }
    (t, w)
}

/// Gauss–Legendre rule with `n` nodes on `[a, b]`.
pub fn gauss_rule(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n < 1 {
        return domain("Gauss rule needs at least one node");
    }
    if !(b > a) {
        return domain(format!("Gauss rule interval [{a}, {b}] is empty"));
    }
    let (t, w) = reference_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        a,
        b,
        nodes: t.iter().map(|&ti| mid + half * ti).collect(),
        weights: w.iter().map(|&wi| half * wi).collect(),
    })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }

    /// Weighted sum of samples taken at the nodes.
    pub fn apply(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.len());
        samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }

    /// Matrix `T` with `T[k][m] = ∫_{node_k}^{b} ℓ_m(y) dy`, where `ℓ_m` are the
    /// Lagrange polynomials on the nodes. `T · f` integrates the interpolant of
    /// `f` from each node up to the right end of the interval.
    pub fn tail_integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let half = 0.5 * (self.b - self.a);
        let mid = 0.5 * (self.a + self.b);
        let t: Vec<f64> = self.nodes.iter().map(|&y| (y - mid) / half).collect();
        // Legendre values at every node up to degree n.
        let p: Vec<Vec<f64>> = t.iter().map(|&tk| legendre_all(n, tk)).collect();
        let mut out = vec![vec![0.0; n]; n];
        for k in 0..n {
            // J_l(t_k) = ∫_{t_k}^1 P_l
            let mut tail = vec![0.0; n];
            tail[0] = 1.0 - t[k];
            for l in 1..n {
                tail[l] = (p[k][l - 1] - p[k][l + 1]) / (2.0 * l as f64 + 1.0);
            }
            for m in 0..n {
                let wref = self.weights[m] / half;
                let mut s = 0.0;
                for l in 0..n {
                    s += 0.5 * (2.0 * l as f64 + 1.0) * p[m][l] * tail[l];
                }
                out[k][m] = half * wref * s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_rule() {
        let r = gauss_rule(1, 0.0, 2.0).unwrap();
        assert_eq!(r.nodes, vec![1.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn two_point_classical_values() {
        let r = gauss_rule(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], s, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cubic_exactness() {
        let r = gauss_rule(3, -0.05, 0.05).unwrap();
        let v = r.integrate(|y| y * y);
        assert_relative_eq!(v, 0.1f64.powi(3) / 12.0, max_relative = 1e-13);
        assert_relative_eq!(v, 8.333_333_333_333e-5, max_relative = 1e-12);
    }

    #[test]
    fn errors() {
        assert!(gauss_rule(0, 0.0, 1.0).is_err());
        assert!(gauss_rule(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn weights_sum_and_symmetry() {
        for n in [1, 2, 5, 6, 46, 64] {
            let r = gauss_rule(n, -0.1, 0.1).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 0.2, max_relative = 1e-12);
            for k in 0..n {
                assert_eq!(r.nodes[k], -r.nodes[n - 1 - k]);
                assert!(r.nodes[k] > -0.1 && r.nodes[k] < 0.1);
                assert!(r.weights[k] > 0.0);
            }
        }
    }

    #[test]
    fn high_degree_exactness() {
        let r = gauss_rule(46, 0.0, 1.0).unwrap();
        // degree 91 monomial
        assert_relative_eq!(r.integrate(|x| x.powi(91)), 1.0 / 92.0, max_relative = 1e-12);
    }

    #[test]
    fn tail_matrix_integrates_polynomials() {
        let r = gauss_rule(8, -0.5, 0.5).unwrap();
        let t = r.tail_integration_matrix();
        let f: Vec<f64> = r.nodes.iter().map(|&y| 3.0 * y * y - y + 0.2).collect();
        for (row, &y) in t.iter().zip(&r.nodes) {
            let antider = |s: f64| s * s * s - 0.5 * s * s + 0.2 * s;
            let exact = antider(0.5) - antider(y);
            let approx: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert_relative_eq!(approx, exact, epsilon = 1e-14);
        }
    }
}
