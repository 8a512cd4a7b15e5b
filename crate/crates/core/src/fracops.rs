//! Dense discretizations of Caputo, Riesz–Caputo and distributed-order
//! derivatives of order `0 < α ≤ 1` on uniform grids.
//!
//! Every fractional derivative is written as a fractional integral of the
//! first derivative, `ᶜD^α f = I^{1-α} f'`. The first derivative is the usual
//! second-order finite-difference matrix (central inside, one-sided at the
//! ends) and the fractional integral uses product-trapezoidal weights, which
//! integrate the piecewise-linear interpolant of `f'` exactly against the
//! weakly singular kernel. At `α = 1` the integral is the identity, so every
//! operator reduces to the finite-difference matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distributions::OrderDistribution;
use crate::error::{domain, Result};
use crate::grid::Grid1D;
use crate::quadrature::gauss_rule;

/// What a [`DenseOperator`] discretizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OrderMeta {
    CaputoLeft {
        alpha: f64,
    },
    CaputoRight {
        alpha: f64,
    },
    RieszCaputo {
        alpha: f64,
    },
    Distributed {
        /// Quadrature nodes in the physical coordinate.
        nodes: Vec<f64>,
        orders: Vec<f64>,
        /// Strength-function weights, normalized to unit sum.
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    pub order_meta: OrderMeta,
}

impl DenseOperator {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        matvec(&self.matrix, f)
    }

    /// Largest row sum relative to that row's largest entry.
    pub fn max_relative_row_sum(&self) -> f64 {
        let m = &self.matrix;
        (0..m.nrows())
            .map(|i| {
                let row = m.row(i);
                let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if scale == 0.0 {
                    0.0
                } else {
                    row.iter().sum::<f64>().abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn matvec(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), f.len());
    let mut out = vec![0.0; m.nrows()];
    for (j, &fj) in f.iter().enumerate() {
        if fj == 0.0 {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(m.column(j).iter()) {
            *o += a * fj;
        }
    }
    out
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("fractional order {alpha} outside (0, 1]"));
    }
    Ok(())
}

/// Sparse second-order first-derivative stencil on a uniform grid.
#[derive(Debug, Clone, Copy)]
pub struct FirstDerivative {
    n: usize,
    inv_2dx: f64,
}

impl FirstDerivative {
    pub fn new(grid: &Grid1D) -> Self {
        Self {
            n: grid.len(),
            inv_2dx: 0.5 / grid.spacing(),
        }
    }

    /// Nonzero `(column, coefficient)` pairs of row `i`.
    pub fn row(&self, i: usize) -> [(usize, f64); 3] {
        let c = self.inv_2dx;
        let n = self.n;
        if i == 0 {
            [(0, -3.0 * c), (1, 4.0 * c), (2, -c)]
        } else if i == n - 1 {
            [(n - 3, c), (n - 2, -4.0 * c), (n - 1, 3.0 * c)]
        } else {
            [(i - 1, -c), (i, 0.0), (i + 1, c)]
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|&(k, c)| c * f[k]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (k, c) in self.row(i) {
                m[(i, k)] += c;
            }
        }
        m
    }

    /// `A · D1` in O(n²).
    pub fn right_apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        assert_eq!(a.ncols(), n);
        let mut out = DMatrix::zeros(a.nrows(), n);
        for m in 0..n {
            for (k, c) in self.row(m) {
                if c == 0.0 {
                    continue;
                }
                let src = a.column(m).clone_owned();
                let mut dst = out.column_mut(k);
                dst.axpy(c, &src, 1.0);
            }
        }
        out
    }

    /// `D1 · A` in O(n²).
    pub fn left_apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        assert_eq!(a.nrows(), n);
        let mut out = DMatrix::zeros(n, a.ncols());
        for col in 0..a.ncols() {
            let src = a.column(col);
            let mut dst = out.column_mut(col);
            for i in 0..n {
                dst[i] = self.row(i).iter().map(|&(k, c)| c * src[k]).sum();
            }
        }
        out
    }
}

/// Dense first-derivative matrix (central interior, second-order one-sided ends).
pub fn first_derivative_matrix(grid: &Grid1D) -> DMatrix<f64> {
    FirstDerivative::new(grid).to_dense()
}

/// Generalized binomial coefficient `C(p, j)`.
fn binomial(p: f64, j: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=j {
        c *= (p - (k as f64 - 1.0)) / k as f64;
    }
    c
}

/// `(m+1)^p - 2 m^p + (m-1)^p` for `m ≥ 1`, accurate for large `m` and `p → 1`.
fn second_difference_power(m: usize, p: f64) -> f64 {
    let mf = m as f64;
    if m < 16 {
        return (mf + 1.0).powf(p) - 2.0 * mf.powf(p) + (mf - 1.0).powf(p);
    }
    let u2 = 1.0 / (mf * mf);
    let mut sum = 0.0;
    let mut upow = 1.0;
    for k in 1..40 {
        upow *= u2;
        let term = 2.0 * binomial(p, 2 * k) * upow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    mf.powf(p) * sum
}

/// `(i-1)^{β+1} - (i-1-β) i^β`, the end weight of the product-trapezoid rule.
fn first_column_weight(i: usize, beta: f64) -> f64 {
    let fi = i as f64;
    if i < 16 {
        return (fi - 1.0).powf(beta + 1.0) - (fi - 1.0 - beta) * fi.powf(beta);
    }
    let p = beta + 1.0;
    let u = 1.0 / fi;
    let mut sum = 0.0;
    let mut upow = 1.0;
    for k in 1..60 {
        upow *= u;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * binomial(p, k + 1) * upow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    fi.powf(beta) * sum
}

/// Lower-triangular product-trapezoid weights for the left fractional
/// integral of order `β = 1 - α`, stored in Toeplitz form:
/// `W[0][0] = first[0]`, `W[i][0] = first[i]`, `W[i][i] = diag` and
/// `W[i][k] = toeplitz[i - k]` for `1 ≤ k < i`.
///
/// Stencils are linear in their weights, so a weighted sum of stencils is the
/// stencil of the weighted sum of integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralStencil {
    diag: f64,
    toeplitz: Vec<f64>,
    first: Vec<f64>,
}

impl IntegralStencil {
    pub fn zero(n: usize) -> Self {
        Self {
            diag: 0.0,
            toeplitz: vec![0.0; n],
            first: vec![0.0; n],
        }
    }

    /// Stencil for the derivative order `alpha`; `alpha = 1` gives the identity.
    pub fn for_order(grid: &Grid1D, alpha: f64) -> Self {
        let n = grid.len();
        let beta = 1.0 - alpha;
        let mut s = Self::zero(n);
        if beta == 0.0 {
            s.diag = 1.0;
            s.first[0] = 1.0;
            return s;
        }
        let scale = grid.spacing().powf(beta) / libm::tgamma(beta + 2.0);
        let p = beta + 1.0;
        s.diag = scale;
        for m in 1..n {
            s.toeplitz[m] = scale * second_difference_power(m, p);
        }
        for i in 1..n {
            s.first[i] = scale * first_column_weight(i, beta);
        }
        s
    }

    pub fn add_scaled(&mut self, other: &Self, weight: f64) {
        self.diag += weight * other.diag;
        for (a, b) in self.toeplitz.iter_mut().zip(&other.toeplitz) {
            *a += weight * b;
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += weight * b;
        }
    }

    fn entry(&self, i: usize, k: usize) -> f64 {
        if k > i {
            0.0
        } else if k == 0 {
            self.first[i]
        } else if k == i {
            self.diag
        } else {
            self.toeplitz[i - k]
        }
    }

    pub fn left_matrix(&self) -> DMatrix<f64> {
        let n = self.first.len();
        DMatrix::from_fn(n, n, |i, k| self.entry(i, k))
    }

    /// Mirror image of the left integral: `W_R[i][k] = W_L[n-1-i][n-1-k]`.
    pub fn right_matrix(&self) -> DMatrix<f64> {
        let n = self.first.len();
        DMatrix::from_fn(n, n, |i, k| self.entry(n - 1 - i, n - 1 - k))
    }

    /// `½ (W_L + W_R)`, the symmetric (Riesz) fractional integral.
    pub fn riesz_matrix(&self) -> DMatrix<f64> {
        let n = self.first.len();
        DMatrix::from_fn(n, n, |i, k| 0.5 * (self.entry(i, k) + self.entry(n - 1 - i, n - 1 - k)))
    }

    /// `½ (W_L + W_R) g` without forming the matrix.
    pub fn apply_riesz(&self, g: &[f64]) -> Vec<f64> {
        let n = self.first.len();
        assert_eq!(g.len(), n);
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            // left part
            let mut left = self.first[i] * g[0];
            if i > 0 {
                left += self.diag * g[i];
                for (k, gk) in g.iter().enumerate().take(i).skip(1) {
                    left += self.toeplitz[i - k] * gk;
                }
            }
            // right part, mirrored
            let r = n - 1 - i;
            let mut right = self.first[r] * g[n - 1];
            if r > 0 {
                right += self.diag * g[i];
                for k in 1..r {
                    right += self.toeplitz[r - k] * g[n - 1 - k];
                }
            }
            *o = 0.5 * (left + right);
        }
        out
    }
}

pub fn caputo_left_matrix(grid: &Grid1D, alpha: f64) -> Result<DenseOperator> {
    check_alpha(alpha)?;
    let d1 = FirstDerivative::new(grid);
    let w = IntegralStencil::for_order(grid, alpha).left_matrix();
    Ok(DenseOperator {
        matrix: d1.right_apply(&w),
        order_meta: OrderMeta::CaputoLeft { alpha },
    })
}

pub fn caputo_right_matrix(grid: &Grid1D, alpha: f64) -> Result<DenseOperator> {
    check_alpha(alpha)?;
    let d1 = FirstDerivative::new(grid);
    let w = IntegralStencil::for_order(grid, alpha).right_matrix();
    let mut m = d1.right_apply(&w);
    m.neg_mut();
    Ok(DenseOperator {
        matrix: m,
        order_meta: OrderMeta::CaputoRight { alpha },
    })
}

/// `½ (ᶜD_left^α - ᶜD_right^α)`.
pub fn riesz_caputo_matrix(grid: &Grid1D, alpha: f64) -> Result<DenseOperator> {
    check_alpha(alpha)?;
    let d1 = FirstDerivative::new(grid);
    let r = IntegralStencil::for_order(grid, alpha).riesz_matrix();
    Ok(DenseOperator {
        matrix: d1.right_apply(&r),
        order_meta: OrderMeta::RieszCaputo { alpha },
    })
}

/// Riesz–Caputo derivative of sampled `f` without forming a matrix.
pub fn apply_riesz_caputo(grid: &Grid1D, alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let g = FirstDerivative::new(grid).apply(f);
    Ok(IntegralStencil::for_order(grid, alpha).apply_riesz(&g))
}

/// Cross-section quadrature of the distributed-order operator: physical
/// coordinates `ỹ ∈ [-h/2 - h_c, h/2 - h_c]`, orders `α(ỹ + h_c)`, and
/// strength weights `ỹ²/Ĩ` renormalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthQuadrature {
    pub nodes: Vec<f64>,
    pub orders: Vec<f64>,
    pub weights: Vec<f64>,
}

impl StrengthQuadrature {
    pub fn new(dist: &OrderDistribution, h: f64, h_c: f64, n_alpha: usize) -> Result<Self> {
        if !(h > 0.0) {
            return domain(format!("thickness {h} must be positive"));
        }
        if !(h_c.abs() < 0.5 * h) {
            return domain(format!("axis offset {h_c} outside (-h/2, h/2)"));
        }
        let rule = gauss_rule(n_alpha, -0.5 * h - h_c, 0.5 * h - h_c)?;
        let raw: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(y, w)| w * y * y).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let orders = rule
            .nodes
            .iter()
            .map(|&yt| dist.to_physical(yt, h, h_c))
            .collect::<Result<Vec<_>>>()?;
        for &a in &orders {
            check_alpha(a)?;
        }
        Ok(Self {
            nodes: rule.nodes,
            orders,
            weights,
        })
    }

    /// Combined integral stencil `Σ_k w_k W(α_k)`.
    pub fn stencil(&self, grid: &Grid1D) -> IntegralStencil {
        let mut acc = IntegralStencil::zero(grid.len());
        for (&a, &w) in self.orders.iter().zip(&self.weights) {
            acc.add_scaled(&IntegralStencil::for_order(grid, a), w);
        }
        acc
    }
}

/// Distributed-order Riesz–Caputo operator weighted by `κ̃(ỹ) = ỹ²/Ĩ`.
pub fn do_operator_matrix(
    grid: &Grid1D,
    dist: &OrderDistribution,
    h: f64,
    h_c: f64,
    n_alpha: usize,
) -> Result<DenseOperator> {
    let quad = StrengthQuadrature::new(dist, h, h_c, n_alpha)?;
    let r = quad.stencil(grid).riesz_matrix();
    let matrix = FirstDerivative::new(grid).right_apply(&r);
    Ok(DenseOperator {
        matrix,
        order_meta: OrderMeta::Distributed {
            nodes: quad.nodes,
            orders: quad.orders,
            weights: quad.weights,
        },
    })
}
