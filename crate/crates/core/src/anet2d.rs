//! Fully resolved 2D plane-strain beam with a layer-wise nonlocal axial stress.
//!
//! Unknowns are all `u_x` followed by all `u_y`, node `(i, j)` at `j·N_x + i`
//! within each field; rows use the same numbering, the `u_x` rows carrying the
//! x-equilibrium equation and the `u_y` rows the y-equilibrium equation. The
//! axial stress of layer `j` is `(2μ+λ)·RC^{α(y_j)} u_x + λ u_{y,y}`, so every
//! layer contributes one dense `N_x × N_x` block. Rows on the top and bottom
//! faces balance forces over the half cell next to the face, which keeps every
//! row within its own layer and the two neighbouring ones.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{FirstDerivative, IntegralStencil};
use crate::grid::Grid2D;
use crate::linalg::{gmres, solve_block_tridiagonal, BlockDiagonal, GmresConfig, Layering, LinearSystem};
use crate::problem::{BeamProblem, End};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    #[default]
    Direct,
    Iterative,
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "iterative" => Ok(Self::Iterative),
            _ => Err(Error::Problem(format!("unknown solver method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AnetStats {
    pub dof: usize,
    pub dense_blocks: usize,
    pub nonzeros: usize,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StressField {
    pub sigma_xx: Vec<f64>,
    pub sigma_yy: Vec<f64>,
    pub sigma_xy: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnetSolution {
    pub grid: Grid2D,
    /// Node `(i, j)` at `j·N_x + i`.
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
    pub stress: StressField,
    pub stats: AnetStats,
    /// Relative residual history of the iterative path.
    pub residuals: Vec<f64>,
}

impl AnetSolution {
    /// `u_y` along `y = 0`, interpolated between the two central layers when
    /// `N_y` is even.
    pub fn centerline_uy(&self) -> Vec<f64> {
        centerline(&self.grid, &self.u_y)
    }

    pub fn max_abs_centerline_uy(&self) -> f64 {
        self.centerline_uy().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_abs_uy(&self) -> f64 {
        self.u_y.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub(crate) fn centerline(grid: &Grid2D, field: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    if ny % 2 == 1 {
        let j = ny / 2;
        field[j * nx..(j + 1) * nx].to_vec()
    } else {
        let (a, b) = (ny / 2 - 1, ny / 2);
        (0..nx).map(|i| 0.5 * (field[a * nx + i] + field[b * nx + i])).collect()
    }
}

/// Per-layer `RC^{α(y_j)}` and `D1·RC^{α(y_j)}`, shared between layers of equal order.
struct LayerOperators {
    orders: Vec<f64>,
    rc: Vec<Rc<DMatrix<f64>>>,
    d1rc: Vec<Rc<DMatrix<f64>>>,
}

impl LayerOperators {
    fn new(problem: &BeamProblem, grid: &Grid2D) -> Result<Self> {
        let d1 = FirstDerivative::new(&grid.x);
        let orders = grid
            .y
            .nodes()
            .iter()
            .map(|&y| problem.dist.eval(y, problem.thickness))
            .collect::<Result<Vec<_>>>()?;
        let mut cache: HashMap<u64, usize> = HashMap::new();
        let mut rc: Vec<Rc<DMatrix<f64>>> = Vec::new();
        let mut d1rc: Vec<Rc<DMatrix<f64>>> = Vec::new();
        for &a in &orders {
            if let Some(&k) = cache.get(&a.to_bits()) {
                rc.push(rc[k].clone());
                d1rc.push(d1rc[k].clone());
                continue;
            }
            let r = d1.right_apply(&IntegralStencil::for_order(&grid.x, a).riesz_matrix());
            let dr = d1.left_apply(&r);
            cache.insert(a.to_bits(), rc.len());
            rc.push(Rc::new(r));
            d1rc.push(Rc::new(dr));
        }
        Ok(Self { orders, rc, d1rc })
    }

    fn is_local(&self, j: usize) -> bool {
        self.orders[j] == 1.0
    }
}

struct Ctx {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    mu: f64,
    lambda: f64,
    d1: FirstDerivative,
}

impl Ctx {
    fn new(problem: &BeamProblem, grid: &Grid2D) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            dx: grid.x.spacing(),
            dy: grid.y.spacing(),
            mu: problem.mu,
            lambda: problem.lambda,
            d1: FirstDerivative::new(&grid.x),
        }
    }

    fn ux(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn uy(&self, i: usize, j: usize) -> usize {
        self.nx * self.ny + j * self.nx + i
    }

    fn p(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// `∂/∂y` at layer `j` as `(layer, coefficient)`: central inside, first-order one-sided on faces.
    fn dy_compact(&self, j: usize) -> Vec<(usize, f64)> {
        let h = self.dy;
        if j == 0 {
            vec![(0, -1.0 / h), (1, 1.0 / h)]
        } else if j == self.ny - 1 {
            vec![(j - 1, -1.0 / h), (j, 1.0 / h)]
        } else {
            vec![(j - 1, -0.5 / h), (j + 1, 0.5 / h)]
        }
    }

    /// `∂/∂y` at layer `j` with second-order one-sided differences on faces (recovery only).
    fn dy_recovery(&self, j: usize) -> Vec<(usize, f64)> {
        let h = self.dy;
        let n = self.ny;
        if j == 0 {
            vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
        } else if j == n - 1 {
            vec![(n - 3, 0.5 / h), (n - 2, -2.0 / h), (n - 1, 1.5 / h)]
        } else {
            vec![(j - 1, -0.5 / h), (j + 1, 0.5 / h)]
        }
    }
}

/// Equilibrium rows at every node with `0 < i < N_x - 1`. Interior layers use
/// central differences; face layers use the half-cell balance with the face
/// traction left to [`apply_bcs`]. End-face rows are left empty.
pub fn assemble(problem: &BeamProblem) -> Result<LinearSystem> {
    problem.validate()?;
    let grid = problem.grid_2d()?;
    let ops = LayerOperators::new(problem, &grid)?;
    Ok(assemble_with(&Ctx::new(problem, &grid), &ops))
}

fn assemble_with(c: &Ctx, ops: &LayerOperators) -> LinearSystem {
    let (nx, ny, dx, dy, mu, lambda) = (c.nx, c.ny, c.dx, c.dy, c.mu, c.lambda);
    let p = c.p();
    let mut sys = LinearSystem::new(2 * nx * ny);
    let cxy = 1.0 / (4.0 * dx * dy);
    for j in 0..ny {
        // nonlocal axial term (2μ+λ) D1 RC u_x
        if ops.is_local(j) {
            for i in 1..nx - 1 {
                for (m, a) in c.d1.row(i) {
                    for (k, b) in c.d1.row(m) {
                        sys.add(c.ux(i, j), c.ux(k, j), p * a * b);
                    }
                }
            }
        } else {
            let mut block = (*ops.d1rc[j]).clone();
            block *= p;
            block.row_mut(0).fill(0.0);
            block.row_mut(nx - 1).fill(0.0);
            sys.add_block(c.ux(0, j), c.ux(0, j), block);
        }
        let face = if j == 0 {
            Some((-1.0, 1))
        } else if j == ny - 1 {
            Some((1.0, ny - 2))
        } else {
            None
        };
        for i in 1..nx - 1 {
            let (ru, rv) = (c.ux(i, j), c.uy(i, j));
            match face {
                None => {
                    // x-equilibrium
                    let cy = mu / (dy * dy);
                    sys.add(ru, c.ux(i, j - 1), cy);
                    sys.add(ru, c.ux(i, j), -2.0 * cy);
                    sys.add(ru, c.ux(i, j + 1), cy);
                    let cc = (mu + lambda) * cxy;
                    sys.add(ru, c.uy(i + 1, j + 1), cc);
                    sys.add(ru, c.uy(i - 1, j - 1), cc);
                    sys.add(ru, c.uy(i + 1, j - 1), -cc);
                    sys.add(ru, c.uy(i - 1, j + 1), -cc);
                    // y-equilibrium
                    let cxx = mu / (dx * dx);
                    sys.add(rv, c.uy(i - 1, j), cxx);
                    sys.add(rv, c.uy(i, j), -2.0 * cxx);
                    sys.add(rv, c.uy(i + 1, j), cxx);
                    let cyy = p / (dy * dy);
                    sys.add(rv, c.uy(i, j - 1), cyy);
                    sys.add(rv, c.uy(i, j), -2.0 * cyy);
                    sys.add(rv, c.uy(i, j + 1), cyy);
                    sys.add(rv, c.ux(i + 1, j + 1), cc);
                    sys.add(rv, c.ux(i - 1, j - 1), cc);
                    sys.add(rv, c.ux(i + 1, j - 1), -cc);
                    sys.add(rv, c.ux(i - 1, j + 1), -cc);
                }
                Some((s, jn)) => {
                    let k = 2.0 / dy;
                    let oy = s / dy; // one-sided ∂y weight on the face layer
                                     // x row: ∂xσ_xx(face) - s·k·σ_xy(mid)
                                     // λ ∂x(∂y u_y) on the face
                    let cx = 0.5 / dx;
                    for (ii, wx) in [(i + 1, cx), (i - 1, -cx)] {
                        sys.add(ru, c.uy(ii, j), lambda * wx * oy);
                        sys.add(ru, c.uy(ii, jn), -lambda * wx * oy);
                    }
                    // σ_xy(mid) = μ[(u(j)-u(jn))·oy + avg ∂x u_y]
                    let f = -s * k * mu;
                    sys.add(ru, c.ux(i, j), f * oy);
                    sys.add(ru, c.ux(i, jn), -f * oy);
                    let ca = 0.25 / dx;
                    for jj in [j, jn] {
                        sys.add(ru, c.uy(i + 1, jj), f * ca);
                        sys.add(ru, c.uy(i - 1, jj), -f * ca);
                    }
                    // y row: ∂xσ_xy(face) - s·k·σ_yy(mid)
                    for (ii, wx) in [(i + 1, cx), (i - 1, -cx)] {
                        sys.add(rv, c.ux(ii, j), mu * wx * oy);
                        sys.add(rv, c.ux(ii, jn), -mu * wx * oy);
                    }
                    let cxx = mu / (dx * dx);
                    sys.add(rv, c.uy(i - 1, j), cxx);
                    sys.add(rv, c.uy(i, j), -2.0 * cxx);
                    sys.add(rv, c.uy(i + 1, j), cxx);
                    let f = -s * k;
                    for jj in [j, jn] {
                        sys.add(rv, c.ux(i + 1, jj), f * lambda * ca);
                        sys.add(rv, c.ux(i - 1, jj), -f * lambda * ca);
                    }
                    sys.add(rv, c.uy(i, j), f * p * oy);
                    sys.add(rv, c.uy(i, jn), -f * p * oy);
                }
            }
        }
    }
    sys
}

/// End-face support rows and the top-face load. The load `q` acts as the
/// uniform traction `(0, -q)` on `y = +h/2`; the bottom face is traction free.
pub fn apply_bcs(sys: &mut LinearSystem, problem: &BeamProblem) -> Result<()> {
    let grid = problem.grid_2d()?;
    let ops = LayerOperators::new(problem, &grid)?;
    apply_bcs_with(sys, &Ctx::new(problem, &grid), &ops, problem)
}

fn apply_bcs_with(sys: &mut LinearSystem, c: &Ctx, ops: &LayerOperators, problem: &BeamProblem) -> Result<()> {
    if problem.supports.is_under_constrained() {
        return Err(Error::Problem(format!(
            "support combination {} leaves rigid-body motion free",
            problem.supports.name()
        )));
    }
    let (nx, ny) = (c.nx, c.ny);
    let top = ny - 1;
    for i in 1..nx - 1 {
        sys.rhs[c.uy(i, top)] = 2.0 / c.dy * problem.q;
    }
    let p = c.p();
    let scale = 1.0 / c.dx;
    let sigma_xx_row = |i: usize, j: usize| -> Vec<(usize, f64)> {
        let mut e: Vec<(usize, f64)> = if ops.is_local(j) {
            c.d1.row(i).iter().map(|&(k, v)| (c.ux(k, j), scale * p * v)).collect()
        } else {
            let rc = &ops.rc[j];
            (0..nx).map(|k| (c.ux(k, j), scale * p * rc[(i, k)])).collect()
        };
        for (jj, w) in c.dy_compact(j) {
            e.push((c.uy(i, jj), scale * c.lambda * w));
        }
        e
    };
    let sigma_xy_row = |i: usize, j: usize| -> Vec<(usize, f64)> {
        let mut e: Vec<(usize, f64)> =
            c.d1.row(i)
                .iter()
                .map(|&(k, v)| (c.uy(k, j), scale * c.mu * v))
                .collect();
        for (jj, w) in c.dy_compact(j) {
            e.push((c.ux(i, jj), scale * c.mu * w));
        }
        e
    };
    let mid = (ny - 1) / 2;
    let d = p / (c.dx * c.dx);
    for (end, i) in [(problem.supports.left, 0), (problem.supports.right, nx - 1)] {
        for j in 0..ny {
            match end {
                End::Clamped => {
                    sys.replace_row(c.ux(i, j), &[(c.ux(i, j), d)], 0.0);
                    sys.replace_row(c.uy(i, j), &[(c.uy(i, j), d)], 0.0);
                }
                End::Simple { .. } => {
                    if i == 0 && j == mid {
                        sys.replace_row(c.ux(i, j), &[(c.ux(i, j), d)], 0.0);
                    } else {
                        sys.replace_row(c.ux(i, j), &sigma_xx_row(i, j), 0.0);
                    }
                    sys.replace_row(c.uy(i, j), &[(c.uy(i, j), d)], 0.0);
                }
                End::Free { .. } => {
                    sys.replace_row(c.ux(i, j), &sigma_xx_row(i, j), 0.0);
                    sys.replace_row(c.uy(i, j), &sigma_xy_row(i, j), 0.0);
                }
            }
        }
    }
    if let (End::Simple { moment: ml }, End::Simple { moment: mr }) = (problem.supports.left, problem.supports.right) {
        if ml != 0.0 || mr != 0.0 {
            return Err(Error::Problem(
                "prescribed end moments are only supported by the beam model".into(),
            ));
        }
    }
    if let End::Free { shear, moment } = problem.supports.right {
        if shear != 0.0 || moment != 0.0 {
            return Err(Error::Problem(
                "prescribed end loads are only supported by the beam model".into(),
            ));
        }
    }
    Ok(())
}

/// Layer-major permutation `[u_x(·, j), u_y(·, j)]` used by the block solvers.
pub fn layering(grid: &Grid2D) -> Layering {
    let (nx, ny) = (grid.nx(), grid.ny());
    let perm: Vec<usize> = (0..ny)
        .flat_map(|j| {
            (0..nx)
                .map(move |i| j * nx + i)
                .chain((0..nx).map(move |i| nx * ny + j * nx + i))
        })
        .collect();
    Layering::new(perm, 2 * nx).expect("layer permutation is valid by construction")
}

/// Preconditioner from the `u_x`–`u_x` and `u_y`–`u_y` diagonal blocks,
/// each factored exactly over the layers.
pub fn field_split(sys: &LinearSystem, grid: &Grid2D) -> Result<BlockDiagonal> {
    let n = grid.nx() * grid.ny();
    let lay = || Layering::new((0..n).collect(), grid.nx());
    BlockDiagonal::new(sys, vec![(0..n, lay()?), (n..2 * n, lay()?)])
}

/// Stresses from nodal displacements.
pub fn recover_stress(u_x: &[f64], u_y: &[f64], problem: &BeamProblem) -> Result<StressField> {
    let grid = problem.grid_2d()?;
    let ops = LayerOperators::new(problem, &grid)?;
    Ok(recover_with(&Ctx::new(problem, &grid), &ops, u_x, u_y))
}

fn recover_with(c: &Ctx, ops: &LayerOperators, u_x: &[f64], u_y: &[f64]) -> StressField {
    let (nx, ny) = (c.nx, c.ny);
    let p = c.p();
    let mut sxx = vec![0.0; nx * ny];
    let mut syy = vec![0.0; nx * ny];
    let mut sxy = vec![0.0; nx * ny];
    for j in 0..ny {
        let u = &u_x[j * nx..(j + 1) * nx];
        let v = &u_y[j * nx..(j + 1) * nx];
        let rcu = crate::fracops::matvec(&ops.rc[j], u);
        let ux_x = c.d1.apply(u);
        let uy_x = c.d1.apply(v);
        let dy = c.dy_recovery(j);
        for i in 0..nx {
            let vy: f64 = dy.iter().map(|&(jj, w)| w * u_y[jj * nx + i]).sum();
            let uyy: f64 = dy.iter().map(|&(jj, w)| w * u_x[jj * nx + i]).sum();
            let k = j * nx + i;
            sxx[k] = p * rcu[i] + c.lambda * vy;
            syy[k] = c.lambda * ux_x[i] + p * vy;
            sxy[k] = c.mu * (uyy + uy_x[i]);
        }
    }
    StressField {
        sigma_xx: sxx,
        sigma_yy: syy,
        sigma_xy: sxy,
    }
}

/// Solve an assembled system with boundary rows in place.
pub fn solve(
    sys: &LinearSystem,
    problem: &BeamProblem,
    method: SolverMethod,
    gmres_cfg: &GmresConfig,
) -> Result<AnetSolution> {
    let grid = problem.grid_2d()?;
    let ops = LayerOperators::new(problem, &grid)?;
    solve_with(sys, &Ctx::new(problem, &grid), &ops, &grid, method, gmres_cfg, 0.0)
}

fn solve_with(
    sys: &LinearSystem,
    c: &Ctx,
    ops: &LayerOperators,
    grid: &Grid2D,
    method: SolverMethod,
    gmres_cfg: &GmresConfig,
    assembly_seconds: f64,
) -> Result<AnetSolution> {
    let t0 = Instant::now();
    let lay = layering(grid);
    let (x, iterations, residuals) = match method {
        SolverMethod::Direct => (solve_block_tridiagonal(sys, &lay)?, 1, Vec::new()),
        SolverMethod::Iterative => {
            let pre = field_split(sys, grid)?;
            let out = gmres(
                |v, o| sys.matvec(v, o),
                |v, o| pre.apply(v, o),
                &sys.rhs,
                None,
                gmres_cfg,
            )?;
            (out.x, out.iterations, out.residuals)
        }
    };
    let solve_seconds = t0.elapsed().as_secs_f64();
    let n = c.nx * c.ny;
    let (u_x, u_y) = (x[..n].to_vec(), x[n..].to_vec());
    let stress = recover_with(c, ops, &u_x, &u_y);
    let nonzeros = sys.sparse_nnz()
        + sys
            .blocks()
            .iter()
            .map(|b| b.matrix.iter().filter(|v| **v != 0.0).count())
            .sum::<usize>();
    let stats = AnetStats {
        dof: 2 * n,
        dense_blocks: sys.blocks().len(),
        nonzeros,
        assembly_seconds,
        solve_seconds,
        iterations,
        relative_residual: sys.relative_residual(&x),
    };
    Ok(AnetSolution {
        grid: *grid,
        u_x,
        u_y,
        stress,
        stats,
        residuals,
    })
}

/// Assemble, apply supports and load, and solve.
pub fn solve_anet(problem: &BeamProblem, method: SolverMethod, gmres_cfg: &GmresConfig) -> Result<AnetSolution> {
    problem.validate()?;
    let t0 = Instant::now();
    let grid = problem.grid_2d()?;
    let ops = LayerOperators::new(problem, &grid)?;
    let c = Ctx::new(problem, &grid);
    let mut sys = assemble_with(&c, &ops);
    apply_bcs_with(&mut sys, &c, &ops, problem)?;
    sys.compress();
    let assembly_seconds = t0.elapsed().as_secs_f64();
    solve_with(&sys, &c, &ops, &grid, method, gmres_cfg, assembly_seconds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::OrderDistribution;

    fn small(dist: OrderDistribution) -> BeamProblem {
        let mut p = BeamProblem::preset(2, dist).unwrap();
        p.nx = 26;
        p.ny = 6;
        p
    }

    #[test]
    fn dof_and_blocks() {
        let p = small(OrderDistribution::uniform(0.5));
        let sys = assemble(&p).unwrap();
        assert_eq!(sys.n(), 2 * 26 * 6);
        assert_eq!(sys.blocks().len(), 6);
        let p = small(OrderDistribution::local());
        assert_eq!(assemble(&p).unwrap().blocks().len(), 0);
    }

    #[test]
    fn direct_and_dense_agree() {
        let p = small(OrderDistribution::linear());
        let mut sys = assemble(&p).unwrap();
        apply_bcs(&mut sys, &p).unwrap();
        let sol = solve(&sys, &p, SolverMethod::Direct, &GmresConfig::default()).unwrap();
        let reference = crate::linalg::lu_factor(sys.to_dense()).unwrap().solve(&sys.rhs);
        let n = 26 * 6;
        let scale = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for k in 0..n {
            assert!((sol.u_x[k] - reference[k]).abs() < 1e-9 * scale);
            assert!((sol.u_y[k] - reference[n + k]).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn rigid_translation_is_stress_free() {
        let p = small(OrderDistribution::sine());
        let n = 26 * 6;
        let s = recover_stress(&vec![0.3; n], &vec![-0.2; n], &p).unwrap();
        let m = s
            .sigma_xx
            .iter()
            .chain(&s.sigma_yy)
            .chain(&s.sigma_xy)
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m < 1e-3, "{m}");
    }
}
