//! `nlbeam`: run the plane and beam solvers, comparisons and cost studies and
//! write plot-ready CSV/JSON artifacts.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nlbeam_core::analysis::{comparison, convergence_study, scaling_study, shear_profiles, Models, SolverPath};
use nlbeam_core::anet2d::{self, solve_anet};
use nlbeam_core::ntbm1d::{self, solve_ntbm};
use nlbeam_core::{sparsity_report, BeamProblem, OrderDistribution};
use serde::Serialize;

use config::{ConfigError, Format, Resolved, RunConfig, OUT_DIR_ENV};
use output::{num, Provenance, Writer};

#[derive(Parser, Debug)]
#[command(name = "nlbeam", version, about = "Distributed-order nonlocal beam solvers")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON (`.json`) or TOML config file; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in problem 1-4
    #[arg(long, global = true)]
    problem: Option<u8>,
    /// Order distribution name, or `uniform` together with --alpha
    #[arg(long, global = true)]
    dist: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// clamped-clamped, clamped-free or simply-supported
    #[arg(long, global = true)]
    supports: Option<String>,
    #[arg(long, global = true)]
    nx: Option<usize>,
    #[arg(long, global = true)]
    ny: Option<usize>,
    /// direct or iterative
    #[arg(long, global = true)]
    method: Option<String>,
    /// Output directory (the NLBEAM_OUT_DIR environment variable takes precedence over the config file)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<FormatArg>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the 2D plane-strain problem
    Anet2d,
    /// Solve the 1D beam model
    Ntbm,
    /// Run both models and compare deflections
    Compare,
    /// Maximum deflection against mesh refinement at fixed aspect ratio
    Converge {
        #[arg(long, value_delimiter = ',', default_value = "12,24,36,46")]
        sweep: Vec<usize>,
        /// Skip the 2D model
        #[arg(long)]
        beam_only: bool,
    },
    /// Wall-clock scaling of the solver paths
    Scale {
        #[arg(long, value_delimiter = ',', default_value = "12,24,36,48,60")]
        sweep: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, value_delimiter = ',', default_value = "anet-direct,ntbm")]
        paths: Vec<PathArg>,
    },
    /// Stiffness-matrix structure of either model
    Sparsity {
        #[arg(long, value_enum, default_value = "anet2d")]
        model: ModelArg,
        /// Side length of the occupancy bitmap
        #[arg(long, default_value_t = 256)]
        resolution: usize,
    },
    /// Axis offset and shear coefficient for every distribution and problem
    Table2,
    /// Shear stress and shear energy through the thickness at one station
    Shear {
        #[arg(long, default_value_t = 0.3)]
        x: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    AnetDirect,
    AnetIterative,
    Ntbm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Anet2d,
    Ntbm,
}

/// A run finished but some requested result is missing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Incomplete(String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if e.downcast_ref::<Incomplete>().is_some() {
        return 3;
    }
    match e.downcast_ref::<nlbeam_core::Error>() {
        Some(nlbeam_core::Error::NoConvergence { .. } | nlbeam_core::Error::FixedPoint { .. }) => 3,
        _ => 1,
    }
}

fn resolve(common: &Common) -> Result<Resolved, ConfigError> {
    let file = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        problem: common.problem,
        dist: common.dist.clone(),
        alpha: common.alpha,
        supports: common.supports.clone(),
        nx: common.nx,
        ny: common.ny,
        method: common.method.clone(),
        formats: common.format.as_ref().map(|v| {
            v.iter()
                .map(|f| match f {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                })
                .collect()
        }),
        ..RunConfig::default()
    };
    let env_out = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let mut r = file.merge(flags).resolve(env_out)?;
    if let Some(out) = &common.out {
        r.output_dir = out.clone();
    }
    Ok(r)
}

fn run(cli: Cli) -> Result<()> {
    let r = resolve(&cli.common)?;
    log::info!("config: {}", r.echo());
    let command = format!("{:?}", cli.command);
    let mut w = Writer::new(
        &r.output_dir,
        Provenance {
            command,
            config: r.echo(),
        },
    )?;
    let outcome = match cli.command {
        Command::Anet2d => run_anet(&r, &mut w),
        Command::Ntbm => run_ntbm(&r, &mut w),
        Command::Compare => run_compare(&r, &mut w),
        Command::Converge { sweep, beam_only } => run_converge(&r, &mut w, &sweep, beam_only),
        Command::Scale { sweep, repeats, paths } => run_scale(&r, &mut w, &sweep, repeats, &paths),
        Command::Sparsity { model, resolution } => run_sparsity(&r, &mut w, model, resolution),
        Command::Table2 => run_table2(&r, &mut w),
        Command::Shear { x } => run_shear(&r, &mut w, x),
    };
    for p in w.written() {
        println!("{}", p.display());
    }
    outcome
}

#[derive(Serialize)]
struct Failure<'a, T: Serialize> {
    converged: bool,
    error: String,
    history: &'a T,
}

/// Writes what is known about a failed solve, then passes the error on.
fn flag_failure(w: &mut Writer, name: &str, e: nlbeam_core::Error) -> anyhow::Error {
    let written = match &e {
        nlbeam_core::Error::NoConvergence { residuals, .. } => w.json(
            name,
            &Failure {
                converged: false,
                error: e.to_string(),
                history: residuals,
            },
        ),
        nlbeam_core::Error::FixedPoint { history } => w.json(
            name,
            &Failure {
                converged: false,
                error: e.to_string(),
                history,
            },
        ),
        _ => Ok(()),
    };
    if let Err(we) = written {
        log::warn!("could not write failure record: {we:#}");
    }
    e.into()
}

fn run_anet(r: &Resolved, w: &mut Writer) -> Result<()> {
    let p = &r.problem;
    let s = solve_anet(p, r.opts.method, &r.opts.gmres).map_err(|e| flag_failure(w, "anet2d_failed.json", e))?;
    let (nx, ny) = (s.grid.nx(), s.grid.ny());
    let xs = s.grid.x.nodes();
    let ys = s.grid.y.nodes();
    if r.wants(Format::Csv) {
        let rows = (0..ny).flat_map(|j| {
            let s = &s;
            let (xs, ys) = (&xs, &ys);
            (0..nx).map(move |i| {
                let k = j * nx + i;
                vec![
                    xs[i],
                    ys[j],
                    s.u_x[k],
                    s.u_y[k],
                    s.stress.sigma_xx[k],
                    s.stress.sigma_yy[k],
                    s.stress.sigma_xy[k],
                ]
            })
        });
        w.csv(
            "anet2d_fields.csv",
            &["x", "y", "u_x", "u_y", "sigma_xx", "sigma_yy", "sigma_xy"],
            rows,
        )?;
        let c = s.centerline_uy();
        w.csv(
            "anet2d_centerline.csv",
            &["x", "u_y"],
            xs.iter().zip(&c).map(|(x, u)| vec![*x, *u]),
        )?;
    }
    if r.wants(Format::Json) {
        w.json(
            "anet2d.json",
            &serde_json::json!({
                "distribution": p.dist,
                "max_abs_uy": s.max_abs_uy(),
                "max_abs_centerline_uy": s.max_abs_centerline_uy(),
                "stats": s.stats,
            }),
        )?;
    }
    log::info!("max |u_y| on the centre line: {:.6e} m", s.max_abs_centerline_uy());
    Ok(())
}

fn run_ntbm(r: &Resolved, w: &mut Writer) -> Result<()> {
    let p = &r.problem;
    let s = solve_ntbm(p, &r.opts.fixed_point).map_err(|e| flag_failure(w, "ntbm_failed.json", e))?;
    if r.wants(Format::Csv) {
        let rows = (0..s.x.len()).map(|i| vec![s.x[i], s.w[i], s.phi[i], s.moment[i], s.shear[i], s.axial[i]]);
        w.csv("ntbm_profile.csv", &["x", "w", "phi", "moment", "shear", "axial"], rows)?;
    }
    if r.wants(Format::Json) {
        w.json(
            "ntbm.json",
            &serde_json::json!({
                "distribution": p.dist,
                "h_c": s.h_c,
                "chi": s.chi,
                "max_abs_w": s.max_abs_w(),
                "iterations": s.iterations,
                "history": s.history,
                "axial_residual": s.axial_residual,
                "stats": s.stats,
            }),
        )?;
    }
    log::info!(
        "h_c = {:.6e} m, chi = {:.6}, max |w| = {:.6e} m",
        s.h_c,
        s.chi,
        s.max_abs_w()
    );
    Ok(())
}

fn run_compare(r: &Resolved, w: &mut Writer) -> Result<()> {
    let p = &r.problem;
    let beam = solve_ntbm(p, &r.opts.fixed_point).map_err(|e| flag_failure(w, "ntbm_failed.json", e))?;
    let plane = solve_anet(p, r.opts.method, &r.opts.gmres).map_err(|e| flag_failure(w, "anet2d_failed.json", e))?;
    let rep = comparison(p, &r.label(), &beam, &plane, r.opts.comparand);
    if r.wants(Format::Csv) {
        let rows = (0..rep.x.len()).map(|i| vec![rep.x[i], rep.uy_2d[i], rep.uy_1d[i], rep.gap_profile[i]]);
        w.csv("compare.csv", &["x", "uy_2d", "uy_1d", "gap"], rows)?;
    }
    if r.wants(Format::Json) {
        w.json("compare.json", &rep)?;
    }
    log::info!(
        "max |u_y|: 2D {:.6e} m, 1D {:.6e} m, gap {:.2}%",
        rep.max_uy_2d,
        rep.max_uy_1d,
        100.0 * rep.relative_gap
    );
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn run_converge(r: &Resolved, w: &mut Writer, sweep: &[usize], beam_only: bool) -> Result<()> {
    if sweep.is_empty() || sweep.iter().any(|&n| n < 3) {
        return Err(ConfigError::Value {
            key: "sweep",
            message: "values must be at least 3".into(),
        }
        .into());
    }
    let models = Models {
        anet: (!beam_only).then_some(r.opts.method),
        ntbm: true,
    };
    let t = convergence_study(&r.problem, sweep, models, &r.opts)?;
    if r.wants(Format::Csv) {
        let rows = t.rows.iter().map(|row| {
            vec![
                row.ny.to_string(),
                row.nx.to_string(),
                opt(row.max_uy_2d),
                opt(row.max_uy_1d),
                opt(row.change_2d),
                opt(row.change_1d),
            ]
        });
        w.csv_text(
            "converge.csv",
            &["ny", "nx", "max_uy_2d", "max_uy_1d", "change_2d", "change_1d"],
            rows,
        )?;
    }
    if r.wants(Format::Json) {
        w.json("converge.json", &t)?;
    }
    Ok(())
}

fn run_scale(r: &Resolved, w: &mut Writer, sweep: &[usize], repeats: usize, paths: &[PathArg]) -> Result<()> {
    if sweep.len() < 2 || sweep.iter().any(|&n| n < 3) {
        return Err(ConfigError::Value {
            key: "sweep",
            message: "need two or more values of at least 3".into(),
        }
        .into());
    }
    let paths: Vec<SolverPath> = paths
        .iter()
        .map(|p| match p {
            PathArg::AnetDirect => SolverPath::AnetDirect,
            PathArg::AnetIterative => SolverPath::AnetIterative,
            PathArg::Ntbm => SolverPath::Ntbm,
        })
        .collect();
    let rep = scaling_study(&r.problem, sweep, repeats, &paths, &r.opts);
    if r.wants(Format::Csv) {
        let rows = rep.paths.iter().flat_map(|pt| {
            pt.points.iter().map(move |t| {
                vec![
                    pt.path.name().to_string(),
                    t.ny.to_string(),
                    t.nx.to_string(),
                    t.dof.to_string(),
                    num(t.seconds),
                    t.iterations.to_string(),
                ]
            })
        });
        w.csv_text("scale.csv", &["path", "ny", "nx", "dof", "seconds", "iterations"], rows)?;
        let slopes = rep.paths.iter().map(|pt| {
            vec![
                pt.path.name().to_string(),
                opt(pt.slope),
                pt.failure.clone().unwrap_or_default(),
            ]
        });
        w.csv_text("scale_slopes.csv", &["path", "slope", "failure"], slopes)?;
    }
    if r.wants(Format::Json) {
        w.json("scale.json", &rep)?;
    }
    for pt in &rep.paths {
        log::info!("{}: slope {:?}", pt.path.name(), pt.slope);
    }
    let failed: Vec<String> = rep
        .paths
        .iter()
        .filter_map(|p| p.failure.as_ref().map(|f| format!("{}: {f}", p.path.name())))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Incomplete(format!("scaling sweep incomplete ({})", failed.join("; "))).into())
    }
}

fn run_sparsity(r: &Resolved, w: &mut Writer, model: ModelArg, resolution: usize) -> Result<()> {
    let p = &r.problem;
    let (name, sys) = match model {
        ModelArg::Anet2d => {
            let mut sys = anet2d::assemble(p)?;
            anet2d::apply_bcs(&mut sys, p)?;
            ("anet2d", sys)
        }
        ModelArg::Ntbm => ("ntbm", ntbm1d::assemble_ntbm(p, 0.0, 5.0 / 6.0)?),
    };
    let rep = sparsity_report(&sys, resolution);
    w.raw(&format!("sparsity_{name}.pbm"), &rep.to_pbm())?;
    if r.wants(Format::Csv) {
        w.raw(&format!("sparsity_{name}_mask.csv"), &rep.to_csv_mask())?;
    }
    if r.wants(Format::Json) {
        w.json(
            &format!("sparsity_{name}.json"),
            &serde_json::json!({
                "model": name,
                "n": rep.n,
                "dense_blocks": rep.dense_blocks,
                "nonzeros": rep.nonzeros,
                "density": rep.density(),
                "resolution": rep.resolution,
            }),
        )?;
    }
    log::info!(
        "{name}: n = {}, dense blocks = {}, nonzeros = {}",
        rep.n,
        rep.dense_blocks,
        rep.nonzeros
    );
    Ok(())
}

#[derive(Serialize)]
struct Table2Entry {
    distribution: String,
    problem: u8,
    h: f64,
    h_c: f64,
    chi: f64,
}

fn run_table2(r: &Resolved, w: &mut Writer) -> Result<()> {
    let mut entries = Vec::new();
    for dist in OrderDistribution::benchmark_set() {
        for id in 1..=4u8 {
            let mut p = BeamProblem::preset(id, dist.clone())?;
            p.supports = r.problem.supports;
            p.modulus = r.problem.modulus;
            let s = solve_ntbm(&p, &r.opts.fixed_point)
                .map_err(|e| anyhow!(e).context(format!("{} on problem {id}", dist.name)))?;
            entries.push(Table2Entry {
                distribution: dist.name.clone(),
                problem: id,
                h: p.thickness,
                h_c: s.h_c,
                chi: s.chi,
            });
        }
    }
    if r.wants(Format::Csv) {
        let mut cols = vec!["distribution".to_string()];
        for what in ["h_c", "chi"] {
            for e in entries.iter().take(4) {
                cols.push(format!("{what}@{}", e.h));
            }
        }
        let rows = entries.chunks(4).map(|c| {
            let mut row = vec![c[0].distribution.clone()];
            row.extend(c.iter().map(|e| num(e.h_c)));
            row.extend(c.iter().map(|e| num(e.chi)));
            row
        });
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        w.csv_text("table2.csv", &cols, rows)?;
    }
    if r.wants(Format::Json) {
        w.json("table2.json", &entries)?;
    }
    Ok(())
}

fn run_shear(r: &Resolved, w: &mut Writer, x: f64) -> Result<()> {
    let s = shear_profiles(&r.problem, &r.opts.fixed_point, x)?;
    if r.wants(Format::Csv) {
        let rows = (0..s.y.len()).map(|k| vec![s.y[k], s.sigma_xy[k], s.energy[k]]);
        w.csv("shear.csv", &["y", "sigma_xy", "energy"], rows)?;
    }
    if r.wants(Format::Json) {
        w.json("shear.json", &s)?;
    }
    Ok(())
}
