//! Cross-model comparison, closed-form local references, shear profiles and
//! the convergence and cost studies.

use std::time::Instant;

use serde::Serialize;

use crate::anet2d::{self, AnetSolution, SolverMethod};
use crate::error::{Error, Result};
use crate::linalg::GmresConfig;
use crate::ntbm1d::{self, FixedPointConfig, NtbmSolution};
use crate::problem::{BeamProblem, End, ModulusModel};

/// Closed-form local Timoshenko deflection (negative downwards) on the
/// problem's x grid, `χ = 5/6`, `I = h³/12`.
pub fn local_reference(problem: &BeamProblem, modulus: ModulusModel) -> Result<Vec<f64>> {
    problem.validate()?;
    if !problem.dist.is_constant() || problem.dist.eval(0.0, problem.thickness)? != 1.0 {
        return Err(Error::Problem(
            "closed-form reference needs the local order distribution".into(),
        ));
    }
    let e = match modulus {
        ModulusModel::Young => problem.young(),
        ModulusModel::PlaneStrain => problem.plane_strain_modulus(),
    };
    let (l, h, q) = (problem.length, problem.thickness, problem.q);
    let ei = e * h * h * h / 12.0;
    let ks = h * problem.mu * 5.0 / 6.0;
    let s = problem.supports;
    let profile: Box<dyn Fn(f64) -> f64> = match (s.left, s.right) {
        (End::Clamped, End::Clamped) => {
            Box::new(move |x| q * x * x * (l - x).powi(2) / (24.0 * ei) + q * x * (l - x) / (2.0 * ks))
        }
        (End::Simple { moment: a }, End::Simple { moment: b }) if a == 0.0 && b == 0.0 => Box::new(move |x| {
            q * x * (l.powi(3) - 2.0 * l * x * x + x.powi(3)) / (24.0 * ei) + q * x * (l - x) / (2.0 * ks)
        }),
        (End::Clamped, End::Free { shear, moment }) if shear == 0.0 && moment == 0.0 => Box::new(move |x| {
            q * x * x * (6.0 * l * l - 4.0 * l * x + x * x) / (24.0 * ei) + q * (l * x - 0.5 * x * x) / ks
        }),
        _ => {
            return Err(Error::Problem(format!("no closed form for supports {}", s.name())));
        }
    };
    Ok(problem.grid_x()?.nodes().into_iter().map(|x| -profile(x)).collect())
}

/// Which 2D displacement is compared with the beam deflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Comparand {
    #[default]
    Centerline,
    ThicknessAverage,
}

pub fn comparand_profile(solution: &AnetSolution, comparand: Comparand) -> Vec<f64> {
    match comparand {
        Comparand::Centerline => solution.centerline_uy(),
        Comparand::ThicknessAverage => {
            let (nx, ny) = (solution.grid.nx(), solution.grid.ny());
            (0..nx)
                .map(|i| {
                    let s: f64 = (0..ny)
                        .map(|j| {
                            let w = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
                            w * solution.u_y[j * nx + i]
                        })
                        .sum();
                    s / (ny - 1) as f64
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub distribution: String,
    pub max_uy_2d: f64,
    pub max_uy_1d: f64,
    /// `|max_1d - max_2d| / max_2d`.
    pub relative_gap: f64,
    pub x: Vec<f64>,
    pub uy_2d: Vec<f64>,
    pub uy_1d: Vec<f64>,
    /// `(w_1d - u_y,2d) / max |u_y,2d|` along x.
    pub gap_profile: Vec<f64>,
    pub h_c: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompareOptions {
    pub method: SolverMethod,
    pub gmres: GmresConfig,
    pub fixed_point: FixedPointConfig,
    pub comparand: Comparand,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn compare_models(problem: &BeamProblem, label: &str, opts: &CompareOptions) -> Result<ComparisonReport> {
    let beam = ntbm1d::solve_ntbm(problem, &opts.fixed_point)?;
    let plane = anet2d::solve_anet(problem, opts.method, &opts.gmres)?;
    Ok(comparison(problem, label, &beam, &plane, opts.comparand))
}

pub fn comparison(
    problem: &BeamProblem,
    label: &str,
    beam: &NtbmSolution,
    plane: &AnetSolution,
    comparand: Comparand,
) -> ComparisonReport {
    let uy_2d = comparand_profile(plane, comparand);
    let (m2, m1) = (max_abs(&uy_2d), beam.max_abs_w());
    let gap_profile = beam.w.iter().zip(&uy_2d).map(|(a, b)| (a - b) / m2).collect();
    ComparisonReport {
        label: label.to_string(),
        distribution: problem.dist.name.clone(),
        max_uy_2d: m2,
        max_uy_1d: m1,
        relative_gap: (m1 - m2).abs() / m2,
        x: beam.x.clone(),
        uy_2d,
        uy_1d: beam.w.clone(),
        gap_profile,
        h_c: beam.h_c,
        chi: beam.chi,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShearProfiles {
    pub x_station: f64,
    pub y: Vec<f64>,
    pub sigma_xy: Vec<f64>,
    /// `σ_xy² / (2μ)`.
    pub energy: Vec<f64>,
    pub h_c: f64,
    pub chi: f64,
}

pub fn shear_profiles(problem: &BeamProblem, fp: &FixedPointConfig, x_station: f64) -> Result<ShearProfiles> {
    if !(0.0..=problem.length).contains(&x_station) {
        return Err(Error::Problem(format!(
            "station x = {x_station} outside [0, {}]",
            problem.length
        )));
    }
    let sol = ntbm1d::solve_ntbm(problem, fp)?;
    let field = ntbm1d::recover_shear_stress_2d(&sol.phi, problem, sol.h_c)?;
    let (y, sigma_xy) = field.profile_at(x_station);
    let energy = sigma_xy.iter().map(|s| s * s / (2.0 * problem.mu)).collect();
    Ok(ShearProfiles {
        x_station,
        y,
        sigma_xy,
        energy,
        h_c: sol.h_c,
        chi: sol.chi,
    })
}

/// Template with `N_y = N_α = ny` and `N_x` keeping the template's `(N_x-1)/(N_y-1)`.
pub fn resized(template: &BeamProblem, ny: usize) -> BeamProblem {
    let r = (template.nx - 1) as f64 / (template.ny - 1) as f64;
    let nx = (r * (ny - 1) as f64).round() as usize + 1;
    BeamProblem {
        nx,
        ny,
        n_alpha: ny,
        ..template.clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub ny: usize,
    pub nx: usize,
    pub max_uy_2d: Option<f64>,
    pub max_uy_1d: Option<f64>,
    /// Relative change from the previous row.
    pub change_2d: Option<f64>,
    pub change_1d: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Last successive change below 1% for each model.
    pub plateau_2d: bool,
    pub plateau_1d: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Models {
    pub anet: Option<SolverMethod>,
    pub ntbm: bool,
}

impl Default for Models {
    fn default() -> Self {
        Self {
            anet: Some(SolverMethod::Direct),
            ntbm: true,
        }
    }
}

pub fn convergence_study(
    template: &BeamProblem,
    sweep: &[usize],
    models: Models,
    opts: &CompareOptions,
) -> Result<ConvergenceTable> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(sweep.len());
    for &ny in sweep {
        let p = resized(template, ny);
        let m2 = match models.anet {
            Some(method) => {
                let s = anet2d::solve_anet(&p, method, &opts.gmres)?;
                Some(max_abs(&comparand_profile(&s, opts.comparand)))
            }
            None => None,
        };
        let m1 = if models.ntbm {
            Some(ntbm1d::solve_ntbm(&p, &opts.fixed_point)?.max_abs_w())
        } else {
            None
        };
        let change = |now: Option<f64>, prev: Option<f64>| Some((now? - prev?).abs() / prev?.abs());
        let prev = rows.last();
        let row = ConvergenceRow {
            ny,
            nx: p.nx,
            max_uy_2d: m2,
            max_uy_1d: m1,
            change_2d: change(m2, prev.and_then(|r| r.max_uy_2d)),
            change_1d: change(m1, prev.and_then(|r| r.max_uy_1d)),
        };
        log::info!("convergence N_y = {ny}: 2D {m2:?}, 1D {m1:?}");
        rows.push(row);
    }
    let plateau = |f: fn(&ConvergenceRow) -> Option<f64>| rows.last().and_then(f).is_some_and(|c| c < 0.01);
    Ok(ConvergenceTable {
        plateau_2d: plateau(|r| r.change_2d),
        plateau_1d: plateau(|r| r.change_1d),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    AnetDirect,
    AnetIterative,
    Ntbm,
}

impl SolverPath {
    pub const ALL: [SolverPath; 3] = [SolverPath::AnetDirect, SolverPath::AnetIterative, SolverPath::Ntbm];

    pub fn name(self) -> &'static str {
        match self {
            SolverPath::AnetDirect => "anet-direct",
            SolverPath::AnetIterative => "anet-iterative",
            SolverPath::Ntbm => "ntbm",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingPoint {
    pub ny: usize,
    pub nx: usize,
    pub dof: usize,
    /// Median wall time of assembly plus solve.
    pub seconds: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathTiming {
    pub path: SolverPath,
    pub points: Vec<TimingPoint>,
    /// Least-squares slope of `log t` against `log N_y`.
    pub slope: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub repeats: usize,
    pub paths: Vec<PathTiming>,
}

impl ScalingReport {
    pub fn slope(&self, path: SolverPath) -> Option<f64> {
        self.paths.iter().find(|p| p.path == path).and_then(|p| p.slope)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_once(p: &BeamProblem, path: SolverPath, opts: &CompareOptions) -> Result<(f64, usize, usize)> {
    let t0 = Instant::now();
    let (dof, iterations) = match path {
        SolverPath::AnetDirect | SolverPath::AnetIterative => {
            let method = if path == SolverPath::AnetDirect {
                SolverMethod::Direct
            } else {
                SolverMethod::Iterative
            };
            let s = anet2d::solve_anet(p, method, &opts.gmres)?;
            (s.stats.dof, s.stats.iterations)
        }
        SolverPath::Ntbm => {
            let s = ntbm1d::solve_ntbm(p, &opts.fixed_point)?;
            (s.stats.dof, s.iterations)
        }
    };
    Ok((t0.elapsed().as_secs_f64(), dof, iterations))
}

/// Median wall time over `repeats` runs per sweep point; a path stops at its first failure.
pub fn scaling_study(
    template: &BeamProblem,
    sweep: &[usize],
    repeats: usize,
    paths: &[SolverPath],
    opts: &CompareOptions,
) -> ScalingReport {
    let repeats = repeats.max(1);
    let mut out = Vec::with_capacity(paths.len());
    for &path in paths {
        let mut points = Vec::with_capacity(sweep.len());
        let mut failure = None;
        'sweep: for &ny in sweep {
            let p = resized(template, ny);
            let mut times = Vec::with_capacity(repeats);
            let mut last = (0, 0);
            for _ in 0..repeats {
                match time_once(&p, path, opts) {
                    Ok((t, dof, it)) => {
                        times.push(t);
                        last = (dof, it);
                    }
                    Err(e) => {
                        failure = Some(format!("N_y = {ny}: {e}"));
                        break 'sweep;
                    }
                }
            }
            let seconds = median(times);
            log::info!("{} N_y = {ny}: {seconds:.4} s", path.name());
            points.push(TimingPoint {
                ny,
                nx: p.nx,
                dof: last.0,
                seconds,
                iterations: last.1,
            });
        }
        let x: Vec<f64> = points.iter().map(|t| t.ny as f64).collect();
        let y: Vec<f64> = points.iter().map(|t| t.seconds).collect();
        out.push(PathTiming {
            path,
            slope: loglog_slope(&x, &y),
            points,
            failure,
        });
    }
    ScalingReport { repeats, paths: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::OrderDistribution;
    use crate::problem::Supports;

    #[test]
    fn reference_values() {
        let p = BeamProblem::preset(2, OrderDistribution::local()).unwrap();
        let w = local_reference(&p, ModulusModel::Young).unwrap();
        let m = max_abs(&w);
        assert!((m - 0.0510).abs() < 2e-4, "{m}");
        assert!(w[p.nx / 2] < 0.0);
        let ps = max_abs(&local_reference(&p, ModulusModel::PlaneStrain).unwrap());
        assert!(ps < m);
        let mut c = p.clone();
        c.supports = Supports::CLAMPED_FREE;
        let tip = local_reference(&c, ModulusModel::Young).unwrap()[c.nx - 1];
        let e = c.young() * 0.1f64.powi(3) / 12.0;
        let expected = c.q / (8.0 * e) + c.q / (2.0 * 0.1 * c.mu * 5.0 / 6.0);
        assert!((tip + expected).abs() < 1e-12 * expected);
        assert!(local_reference(&p.with_dist(OrderDistribution::linear()), ModulusModel::Young).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn resize_keeps_aspect() {
        let p = BeamProblem::preset(2, OrderDistribution::local()).unwrap();
        let q = resized(&p, 36);
        assert_eq!((q.nx, q.ny, q.n_alpha), (351, 36, 36));
    }
}
