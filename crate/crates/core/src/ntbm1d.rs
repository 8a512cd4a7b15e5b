//! Distributed-order nonlocal Timoshenko beam with self-consistent axis offset
//! `h_c` and shear coefficient `χ`.
//!
//! Unknowns are ordered `[φ_0..φ_{N-1}, w_0..w_{N-1}]`. The first row set is the
//! shear balance `Q' = q` with `Q = hμχ(w' - φ)`; the second is the moment
//! balance `M' + Q = 0` with the nonlocal moment `M = -EĨ 𝒟φ`. Only the second
//! set carries the dense distributed-order block.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{domain, Error, Iterate, Result};
use crate::fracops::{FirstDerivative, IntegralStencil};
use crate::grid::Grid1D;
use crate::linalg::{lu_factor, LinearSystem};
use crate::problem::{BeamProblem, End};
use crate::quadrature::{gauss_rule, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointConfig {
    pub tol_hc: f64,
    pub tol_chi: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol_hc: 1e-6,
            tol_chi: 1e-6,
            max_iter: 50,
            relaxation: 1.0,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_hc > 0.0 && self.tol_chi > 0.0) {
            return domain("fixed-point tolerances must be positive");
        }
        if self.max_iter < 1 {
            return domain("max_iter must be at least 1");
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return domain("relaxation must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Wall-clock and size record of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub dof: usize,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct NtbmSolution {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub phi: Vec<f64>,
    pub h_c: f64,
    pub chi: f64,
    pub iterations: usize,
    pub history: Vec<Iterate>,
    pub moment: Vec<f64>,
    pub shear: Vec<f64>,
    pub axial: Vec<f64>,
    /// `max |N| / max |Q|`.
    pub axial_residual: f64,
    pub stats: SolveStats,
}

impl NtbmSolution {
    pub fn max_abs_w(&self) -> f64 {
        self.w.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Through-thickness Gauss rule on the physical section with one cached
/// fractional-integral stencil per node. The orders `α(y_k)` do not depend on
/// `h_c`; only the strength weights `(y_k - h_c)²` do.
#[derive(Debug, Clone)]
pub struct Section {
    pub grid: Grid1D,
    pub rule: QuadratureRule,
    pub orders: Vec<f64>,
    stencils: Vec<IntegralStencil>,
    d1: FirstDerivative,
}

impl Section {
    pub fn new(problem: &BeamProblem) -> Result<Self> {
        problem.validate()?;
        let grid = problem.grid_x()?;
        let h = problem.thickness;
        let rule = gauss_rule(problem.n_alpha, -0.5 * h, 0.5 * h)?;
        let orders = rule
            .nodes
            .iter()
            .map(|&y| problem.dist.eval(y, h))
            .collect::<Result<Vec<_>>>()?;
        let mut stencils: Vec<IntegralStencil> = Vec::with_capacity(orders.len());
        for (k, &a) in orders.iter().enumerate() {
            let reuse = orders[..k].iter().position(|&b| b == a);
            stencils.push(match reuse {
                Some(p) => stencils[p].clone(),
                None => IntegralStencil::for_order(&grid, a),
            });
        }
        Ok(Self {
            grid,
            rule,
            orders,
            stencils,
            d1: FirstDerivative::new(&grid),
        })
    }

    fn check_offset(&self, h_c: f64) -> Result<()> {
        let h = self.rule.b - self.rule.a;
        if !(h_c.abs() < 0.5 * h) {
            return domain(format!("axis offset {h_c} outside (-h/2, h/2)"));
        }
        Ok(())
    }

    /// Normalized strength weights `w_k (y_k - h_c)² / Σ`.
    pub fn strength_weights(&self, h_c: f64) -> Vec<f64> {
        let raw: Vec<f64> = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(y, w)| w * (y - h_c) * (y - h_c))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    }

    /// Dense distributed-order operator `𝒟` for the axis offset `h_c`.
    pub fn do_matrix(&self, h_c: f64) -> Result<DMatrix<f64>> {
        self.check_offset(h_c)?;
        let mut acc = IntegralStencil::zero(self.grid.len());
        for (s, w) in self.stencils.iter().zip(self.strength_weights(h_c)) {
            acc.add_scaled(s, w);
        }
        Ok(self.d1.right_apply(&acc.riesz_matrix()))
    }

    /// `g_k(x) = RC^{α(y_k)} φ` at every thickness node.
    pub fn layer_derivatives(&self, phi: &[f64]) -> Vec<Vec<f64>> {
        let dphi = self.d1.apply(phi);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.stencils.len());
        for (k, s) in self.stencils.iter().enumerate() {
            let reuse = self.orders[..k].iter().position(|&b| b == self.orders[k]);
            out.push(match reuse {
                Some(p) => out[p].clone(),
                None => s.apply_riesz(&dphi),
            });
        }
        out
    }
}

fn second_difference_row(i: usize, dx: f64) -> [(usize, f64); 3] {
    let c = 1.0 / (dx * dx);
    [(i - 1, c), (i, -2.0 * c), (i + 1, c)]
}

struct Coefficients {
    n: usize,
    shear_stiffness: f64,
    bending_stiffness: f64,
}

fn coefficients(problem: &BeamProblem, h_c: f64, chi: f64) -> Result<Coefficients> {
    if !(chi > 0.0 && chi <= 1.0) {
        return domain(format!("shear coefficient {chi} outside (0, 1]"));
    }
    Ok(Coefficients {
        n: problem.nx,
        shear_stiffness: problem.thickness * problem.mu * chi,
        bending_stiffness: problem.axial_modulus() * problem.second_moment(h_c),
    })
}

fn assemble_with(section: &Section, problem: &BeamProblem, h_c: f64, chi: f64) -> Result<LinearSystem> {
    let c = coefficients(problem, h_c, chi)?;
    let n = c.n;
    let dx = section.grid.spacing();
    let d1 = section.d1;
    let mut sys = LinearSystem::new(2 * n);
    // shear balance: w'' - φ' = q / (hμχ)
    for i in 1..n - 1 {
        for (k, v) in second_difference_row(i, dx) {
            sys.add(i, n + k, v);
        }
        for (k, v) in d1.row(i) {
            sys.add(i, k, -v);
        }
        sys.rhs[i] = problem.q / c.shear_stiffness;
    }
    // moment balance: φ - (EĨ/hμχ)(𝒟φ)' - w' = 0
    let ratio = c.bending_stiffness / c.shear_stiffness;
    for i in 0..n {
        sys.add(n + i, i, 1.0);
        for (k, v) in d1.row(i) {
            sys.add(n + i, n + k, -v);
        }
    }
    if section.orders.iter().all(|&a| a == 1.0) {
        for i in 0..n {
            for (m, a) in d1.row(i) {
                for (k, b) in d1.row(m) {
                    sys.add(n + i, k, -ratio * a * b);
                }
            }
        }
    } else {
        let mut block = d1.left_apply(&section.do_matrix(h_c)?);
        block *= -ratio;
        sys.add_block(n, 0, block);
    }
    Ok(sys)
}

/// Interior equations for given `h_c` and `χ`; end rows are left for
/// [`apply_beam_bcs`].
pub fn assemble_ntbm(problem: &BeamProblem, h_c: f64, chi: f64) -> Result<LinearSystem> {
    let section = Section::new(problem)?;
    assemble_with(&section, problem, h_c, chi)
}

fn bcs_with(sys: &mut LinearSystem, section: &Section, problem: &BeamProblem, h_c: f64, chi: f64) -> Result<()> {
    if problem.supports.is_under_constrained() {
        return Err(Error::Problem(format!(
            "support combination {} leaves rigid-body motion free",
            problem.supports.name()
        )));
    }
    let c = coefficients(problem, h_c, chi)?;
    let n = c.n;
    let do_rows = section.do_matrix(h_c)?;
    let d1 = section.d1;
    for (end, i) in [(problem.supports.left, 0), (problem.supports.right, n - 1)] {
        let moment_row = |moment: f64| -> (Vec<(usize, f64)>, f64) {
            let entries = (0..n).map(|k| (k, -do_rows[(i, k)])).collect();
            (entries, moment / c.bending_stiffness)
        };
        match end {
            End::Clamped => {
                sys.replace_row(i, &[(n + i, 1.0)], 0.0);
                sys.replace_row(n + i, &[(i, 1.0)], 0.0);
            }
            End::Simple { moment } => {
                sys.replace_row(i, &[(n + i, 1.0)], 0.0);
                let (e, r) = moment_row(moment);
                sys.replace_row(n + i, &e, r);
            }
            End::Free { shear, moment } => {
                let mut e: Vec<(usize, f64)> = d1.row(i).iter().map(|&(k, v)| (n + k, v)).collect();
                e.push((i, -1.0));
                sys.replace_row(i, &e, shear / c.shear_stiffness);
                let (e, r) = moment_row(moment);
                sys.replace_row(n + i, &e, r);
            }
        }
    }
    Ok(())
}

/// Replace the end rows by the support conditions of `problem.supports`.
pub fn apply_beam_bcs(sys: &mut LinearSystem, problem: &BeamProblem, h_c: f64, chi: f64) -> Result<()> {
    let section = Section::new(problem)?;
    bcs_with(sys, &section, problem, h_c, chi)
}

/// Trapezoid weights over `[0, L]`.
fn trapezoid_weights(grid: &Grid1D) -> Vec<f64> {
    let dx = grid.spacing();
    let mut w = vec![dx; grid.len()];
    w[0] *= 0.5;
    *w.last_mut().unwrap() *= 0.5;
    w
}

fn hc_from_layers(section: &Section, g: &[Vec<f64>]) -> Result<f64> {
    let n = section.grid.len();
    let rule = &section.rule;
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for (k, gk) in g.iter().enumerate() {
        let (y, wk) = (rule.nodes[k], rule.weights[k]);
        for i in 0..n {
            num[i] += wk * y * gk[i];
            den[i] += wk * gk[i];
        }
    }
    let tw = trapezoid_weights(&section.grid);
    let lo = 3.min(n / 2);
    let hi = n.saturating_sub(3).max(lo);
    let mut ab = 0.0;
    let mut bb = 0.0;
    for i in lo..hi {
        ab += tw[i] * num[i] * den[i];
        bb += tw[i] * den[i] * den[i];
    }
    if !(bb > 0.0) {
        return Err(Error::Degenerate("section curvature vanishes everywhere".into()));
    }
    Ok(ab / bb)
}

/// Axis offset minimizing `∫ N(x)² dx`, the squared axial force along the
/// span, with two cells next to each support excluded. Where the section
/// integral of the layer derivatives is nonzero this is the pointwise
/// zero-axial-force offset weighted by that integral squared.
pub fn compute_hc(phi: &[f64], problem: &BeamProblem) -> Result<f64> {
    let section = Section::new(problem)?;
    hc_from_layers(&section, &section.layer_derivatives(phi))
}

/// Shear stress `σ_xy(x_i, y_k)` at the thickness Gauss nodes.
#[derive(Debug, Clone, Serialize)]
pub struct ShearField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_weights: Vec<f64>,
    /// `sigma[k][i]` at `(x_i, y_k)`.
    pub sigma: Vec<Vec<f64>>,
}

impl ShearField {
    /// Section-average profile `(1/h) ∫ σ dy` along x.
    pub fn section_average(&self) -> Vec<f64> {
        let h: f64 = self.y_weights.iter().sum();
        (0..self.x.len())
            .map(|i| {
                self.sigma
                    .iter()
                    .zip(&self.y_weights)
                    .map(|(s, w)| w * s[i])
                    .sum::<f64>()
                    / h
            })
            .collect()
    }

    /// Profile through the thickness at the station nearest `x0`, with the
    /// traction-free faces appended.
    pub fn profile_at(&self, x0: f64) -> (Vec<f64>, Vec<f64>) {
        let i = self
            .x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x0).abs().total_cmp(&(b.1 - x0).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let h: f64 = self.y_weights.iter().sum();
        let mut ys = vec![-0.5 * h];
        let mut s = vec![0.0];
        for (k, y) in self.y.iter().enumerate() {
            ys.push(*y);
            s.push(self.sigma[k][i]);
        }
        ys.push(0.5 * h);
        s.push(0.0);
        (ys, s)
    }
}

fn shear_from_layers(section: &Section, g: &[Vec<f64>], modulus: f64, h_c: f64) -> ShearField {
    let n = section.grid.len();
    let rule = &section.rule;
    let tail = rule.tail_integration_matrix();
    let gx: Vec<Vec<f64>> = g.iter().map(|gk| section.d1.apply(gk)).collect();
    let na = rule.len();
    let mut sigma = vec![vec![0.0; n]; na];
    for (k, row) in sigma.iter_mut().enumerate() {
        for (m, gm) in gx.iter().enumerate() {
            let c = -modulus * tail[k][m] * (rule.nodes[m] - h_c);
            if c == 0.0 {
                continue;
            }
            for (s, v) in row.iter_mut().zip(gm) {
                *s += c * v;
            }
        }
    }
    ShearField {
        x: section.grid.nodes(),
        y: rule.nodes.clone(),
        y_weights: rule.weights.clone(),
        sigma,
    }
}

/// Shear stress recovered from axial force balance on the part of the
/// section above each thickness node.
pub fn recover_shear_stress_2d(phi: &[f64], problem: &BeamProblem, h_c: f64) -> Result<ShearField> {
    let section = Section::new(problem)?;
    section.check_offset(h_c)?;
    Ok(shear_from_layers(
        &section,
        &section.layer_derivatives(phi),
        problem.axial_modulus(),
        h_c,
    ))
}

/// Numerator and denominator of the shear-coefficient ratio.
pub fn chi_parts(field: &ShearField, grid: &Grid1D) -> (f64, f64) {
    let tw = trapezoid_weights(grid);
    let avg = field.section_average();
    let h: f64 = field.y_weights.iter().sum();
    let num: f64 = avg.iter().zip(&tw).map(|(a, w)| w * h * a * a).sum();
    let mut den = 0.0;
    for (sk, wk) in field.sigma.iter().zip(&field.y_weights) {
        den += wk * sk.iter().zip(&tw).map(|(s, w)| w * s * s).sum::<f64>();
    }
    (num, den)
}

fn chi_from_field(field: &ShearField, grid: &Grid1D) -> Result<f64> {
    let (num, den) = chi_parts(field, grid);
    if !(den > 0.0) {
        return Err(Error::Degenerate("recovered shear stress vanishes".into()));
    }
    Ok(num / den)
}

/// Energy-equivalent shear coefficient of the recovered shear profile.
pub fn compute_chi(phi: &[f64], _w: &[f64], problem: &BeamProblem, h_c: f64) -> Result<f64> {
    let field = recover_shear_stress_2d(phi, problem, h_c)?;
    chi_from_field(&field, &problem.grid_x()?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Resultants {
    pub moment: Vec<f64>,
    pub shear: Vec<f64>,
    pub axial: Vec<f64>,
}

fn resultants_with(
    section: &Section,
    g: &[Vec<f64>],
    problem: &BeamProblem,
    phi: &[f64],
    w: &[f64],
    h_c: f64,
    chi: f64,
) -> Result<Resultants> {
    let e = problem.axial_modulus();
    let ei = e * problem.second_moment(h_c);
    let dphi = section.do_matrix(h_c)? * nalgebra::DVector::from_column_slice(phi);
    let moment = dphi.iter().map(|v| -ei * v).collect();
    let dw = section.d1.apply(w);
    let ga = problem.thickness * problem.mu * chi;
    let shear = dw.iter().zip(phi).map(|(a, p)| ga * (a - p)).collect();
    let n = section.grid.len();
    let mut axial = vec![0.0; n];
    for (k, gk) in g.iter().enumerate() {
        let c = -e * section.rule.weights[k] * (section.rule.nodes[k] - h_c);
        for (a, v) in axial.iter_mut().zip(gk) {
            *a += c * v;
        }
    }
    Ok(Resultants { moment, shear, axial })
}

/// Bending moment, shear force and axial force along the span.
pub fn resultants(solution: &NtbmSolution, problem: &BeamProblem) -> Result<Resultants> {
    let section = Section::new(problem)?;
    let g = section.layer_derivatives(&solution.phi);
    resultants_with(
        &section,
        &g,
        problem,
        &solution.phi,
        &solution.w,
        solution.h_c,
        solution.chi,
    )
}

/// One linear solve at fixed `h_c` and `χ`, returning `(φ, w)`.
pub fn solve_fixed(problem: &BeamProblem, h_c: f64, chi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let section = Section::new(problem)?;
    let (phi, w, _) = solve_with(&section, problem, h_c, chi)?;
    Ok((phi, w))
}

fn solve_with(
    section: &Section,
    problem: &BeamProblem,
    h_c: f64,
    chi: f64,
) -> Result<(Vec<f64>, Vec<f64>, SolveStats)> {
    let t0 = Instant::now();
    let mut sys = assemble_with(section, problem, h_c, chi)?;
    bcs_with(&mut sys, section, problem, h_c, chi)?;
    let dense = sys.to_dense();
    let t1 = Instant::now();
    let x = lu_factor(dense)?.solve(&sys.rhs);
    let t2 = Instant::now();
    let n = problem.nx;
    let stats = SolveStats {
        dof: 2 * n,
        assembly_seconds: (t1 - t0).as_secs_f64(),
        solve_seconds: (t2 - t1).as_secs_f64(),
        iterations: 1,
    };
    Ok((x[..n].to_vec(), x[n..].to_vec(), stats))
}

/// Picard iteration on `(h_c, χ)` starting from `(0, 5/6)`. Relaxation drops
/// to 0.5 once either update alternates sign twice in a row.
pub fn solve_ntbm(problem: &BeamProblem, fp: &FixedPointConfig) -> Result<NtbmSolution> {
    fp.validate()?;
    let section = Section::new(problem)?;
    let h = problem.thickness;
    let (mut h_c, mut chi) = (0.0, 5.0 / 6.0);
    let mut relax = fp.relaxation;
    let mut history = Vec::new();
    let mut last_steps: Vec<(f64, f64)> = Vec::new();
    let mut total = SolveStats::default();
    for it in 1..=fp.max_iter {
        let (phi, w, stats) = solve_with(&section, problem, h_c, chi)?;
        total.dof = stats.dof;
        total.assembly_seconds += stats.assembly_seconds;
        total.solve_seconds += stats.solve_seconds;
        total.iterations = it;
        let t0 = Instant::now();
        let g = section.layer_derivatives(&phi);
        let hc_new = hc_from_layers(&section, &g)?;
        if !(hc_new.abs() < 0.5 * h) {
            return Err(Error::Degenerate(format!(
                "axis offset estimate {hc_new} left the section"
            )));
        }
        let field = shear_from_layers(&section, &g, problem.axial_modulus(), hc_new);
        let chi_new = chi_from_field(&field, &section.grid)?;
        let max_w = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        history.push(Iterate {
            h_c: hc_new,
            chi: chi_new,
            max_w,
        });
        log::debug!("fixed point {it}: h_c = {hc_new:.6e}, chi = {chi_new:.6}, max |w| = {max_w:.6e}");
        let d_hc = hc_new - h_c;
        let d_chi = chi_new - chi;
        total.assembly_seconds += t0.elapsed().as_secs_f64();
        if d_hc.abs() / h < fp.tol_hc && d_chi.abs() / chi < fp.tol_chi {
            let r = resultants_with(&section, &g, problem, &phi, &w, h_c, chi)?;
            let qmax = r.shear.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let nmax = r.axial.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            return Ok(NtbmSolution {
                x: section.grid.nodes(),
                w,
                phi,
                h_c,
                chi,
                iterations: it,
                history,
                moment: r.moment,
                shear: r.shear,
                axial: r.axial,
                axial_residual: if qmax > 0.0 { nmax / qmax } else { 0.0 },
                stats: total,
            });
        }
        last_steps.push((d_hc, d_chi));
        if last_steps.len() >= 3 && relax > 0.5 {
            let s = &last_steps[last_steps.len() - 3..];
            let alternates = |f: fn(&(f64, f64)) -> f64| f(&s[0]) * f(&s[1]) < 0.0 && f(&s[1]) * f(&s[2]) < 0.0;
            if alternates(|p| p.0) || alternates(|p| p.1) {
                relax = 0.5;
            }
        }
        h_c += relax * d_hc;
        chi = (chi + relax * d_chi).clamp(1e-6, 1.0);
    }
    Err(Error::FixedPoint { history })
}
