use nlbeam_core::ntbm1d::{
    assemble_ntbm, chi_parts, compute_chi, recover_shear_stress_2d, resultants, solve_fixed, solve_ntbm,
};
use nlbeam_core::{BeamProblem, FixedPointConfig, OrderDistribution, Supports};

fn problem(id: u8, dist: OrderDistribution) -> BeamProblem {
    BeamProblem::preset(id, dist).unwrap()
}

fn coarse(dist: OrderDistribution) -> BeamProblem {
    let mut p = problem(2, dist);
    p.nx = 121;
    p.ny = 16;
    p.n_alpha = 16;
    p
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Clamped-clamped Timoshenko beam under uniform load, written out directly.
fn clamped_deflection(p: &BeamProblem, chi: f64, x: f64) -> f64 {
    let (l, h, q) = (p.length, p.thickness, p.q);
    let e = p.mu * (3.0 * p.lambda + 2.0 * p.mu) / (p.lambda + p.mu);
    let i = h.powi(3) / 12.0;
    -(q * x * x * (l - x).powi(2) / (24.0 * e * i) + q * x * (l - x) / (2.0 * h * p.mu * chi))
}

#[test]
fn classical_reduction_at_fixed_parameters() {
    let p = problem(2, OrderDistribution::local());
    let (_, w) = solve_fixed(&p, 0.0, 5.0 / 6.0).unwrap();
    let g = p.grid_x().unwrap();
    let exact: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&x| clamped_deflection(&p, 5.0 / 6.0, x))
        .collect();
    let err = w.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err / max_abs(&exact) < 5e-3, "{}", err / max_abs(&exact));
}

#[test]
fn local_fixed_point_recovers_five_sixths() {
    let s = solve_ntbm(&problem(2, OrderDistribution::local()), &FixedPointConfig::default()).unwrap();
    assert!(s.h_c.abs() < 1e-12);
    assert!((s.chi - 5.0 / 6.0).abs() / (5.0 / 6.0) < 5e-3, "{}", s.chi);
}

#[test]
fn dof_and_single_dense_block() {
    let p = problem(2, OrderDistribution::linear());
    let sys = assemble_ntbm(&p, 0.0, 5.0 / 6.0).unwrap();
    assert_eq!(sys.n(), 902);
    assert_eq!(sys.blocks().len(), 1);
    assert!(assemble_ntbm(&p, 0.0, 0.0).is_err());
    assert!(assemble_ntbm(&p, 0.06, 0.8).is_err());
}

#[test]
fn symmetric_and_constant_orders_keep_the_axis() {
    for d in [
        OrderDistribution::uniform(0.5),
        OrderDistribution::parabolic(),
        OrderDistribution::cosine(),
        OrderDistribution::ellipse(),
        OrderDistribution::uniform(0.8),
    ] {
        let p = coarse(d);
        let s = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
        assert!(s.h_c.abs() < 1e-10 * p.thickness, "{} {}", p.dist.name, s.h_c);
        assert!(s.chi > 0.0 && s.chi <= 1.0);
    }
}

#[test]
fn softer_bottom_moves_axis_up() {
    let s = solve_ntbm(&coarse(OrderDistribution::sine()), &FixedPointConfig::default()).unwrap();
    assert!(s.h_c > 0.0);
}

#[test]
fn static_balance_and_moment_curvature() {
    for d in [
        OrderDistribution::local(),
        OrderDistribution::uniform(0.5),
        OrderDistribution::sine(),
    ] {
        let p = problem(2, d);
        let s = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
        let n = p.nx;
        let k = n / 20;
        let balance = s.shear[n - 1 - k] - s.shear[k];
        let applied = p.q * (s.x[n - 1 - k] - s.x[k]);
        assert!(
            (balance - applied).abs() / applied < 5e-3,
            "{} {balance} {applied}",
            p.dist.name
        );
        let dx = p.grid_x().unwrap().spacing();
        for i in [n / 4, n / 2, 3 * n / 4] {
            let m2 = (s.moment[i + 1] - 2.0 * s.moment[i] + s.moment[i - 1]) / (dx * dx);
            assert!((m2 - p.q).abs() / p.q < 2e-2, "{} {m2}", p.dist.name);
        }
        let r = resultants(&s, &p).unwrap();
        assert_eq!(r.shear, s.shear);
    }
}

#[test]
fn symmetric_profiles_balance_axial_force() {
    let p = problem(2, OrderDistribution::parabolic());
    let s = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    assert!(s.axial_residual <= 1e-6, "{}", s.axial_residual);
    assert!(s.shear[p.nx / 2].abs() < 1e-6 * max_abs(&s.shear));
}

#[test]
fn chi_is_load_invariant() {
    let p = coarse(OrderDistribution::linear());
    let a = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    let mut heavy = p.clone();
    heavy.q *= 10.0;
    let b = solve_ntbm(&heavy, &FixedPointConfig::default()).unwrap();
    assert!((a.chi - b.chi).abs() / a.chi < 1e-10);
    assert!((a.h_c - b.h_c).abs() < 1e-10 * p.thickness);
    assert!((10.0 * a.max_abs_w() - b.max_abs_w()).abs() < 1e-9 * b.max_abs_w());
}

#[test]
fn converged_point_is_stationary() {
    let p = coarse(OrderDistribution::cubic());
    let fp = FixedPointConfig::default();
    let s = solve_ntbm(&p, &fp).unwrap();
    let (phi, w) = solve_fixed(&p, s.h_c, s.chi).unwrap();
    let last = s.history.last().unwrap();
    assert!((last.h_c - s.h_c).abs() / p.thickness < fp.tol_hc);
    assert!((last.chi - s.chi).abs() / s.chi < fp.tol_chi);
    assert!((max_abs(&w) - s.max_abs_w()).abs() / s.max_abs_w() < 1e-12);
    let chi = compute_chi(&phi, &w, &p, last.h_c).unwrap();
    assert!((chi - last.chi).abs() < 1e-10);
}

#[test]
fn classical_shear_profile_in_the_local_limit() {
    let p = problem(2, OrderDistribution::local());
    let s = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    let field = recover_shear_stress_2d(&s.phi, &p, s.h_c).unwrap();
    let i = p.nx / 4;
    let (y, sigma) = field.profile_at(field.x[i]);
    assert_eq!((sigma[0], *sigma.last().unwrap()), (0.0, 0.0));
    let h = p.thickness;
    let peak = 1.5 * s.shear[i] / h;
    for (yk, sk) in y.iter().zip(&sigma) {
        let parabola = peak * (1.0 - 4.0 * yk * yk / (h * h));
        assert!((sk - parabola).abs() < 1e-2 * peak.abs(), "{yk} {sk} {parabola}");
    }
}

#[test]
fn chi_matches_independent_energy_integration() {
    let p = coarse(OrderDistribution::sine());
    let s = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    let field = recover_shear_stress_2d(&s.phi, &p, s.h_c).unwrap();
    let dx = p.grid_x().unwrap().spacing();
    let h = p.thickness;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..p.nx {
        let tw = if i == 0 || i == p.nx - 1 { 0.5 * dx } else { dx };
        let mut mean = 0.0;
        let mut sq = 0.0;
        for (k, wk) in field.y_weights.iter().enumerate() {
            mean += wk * field.sigma[k][i];
            sq += wk * field.sigma[k][i].powi(2);
        }
        mean /= h;
        num += tw * h * mean * mean;
        den += tw * sq;
    }
    let (a, b) = chi_parts(&field, &p.grid_x().unwrap());
    assert!((num / den - a / b).abs() < 1e-8);
    assert!((compute_chi(&s.phi, &s.w, &p, s.h_c).unwrap() - num / den).abs() < 1e-8);
}

#[test]
fn supports() {
    let mut p = coarse(OrderDistribution::uniform(0.8));
    p.supports = Supports::SIMPLY_SUPPORTED;
    let ss = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    assert!(ss.moment[0].abs() < 1e-6 * max_abs(&ss.moment));
    p.supports = Supports::CLAMPED_FREE;
    let cf = solve_ntbm(&p, &FixedPointConfig::default()).unwrap();
    let n = p.nx;
    assert!(cf.shear[n - 1].abs() < 1e-6 * max_abs(&cf.shear));
    assert!(cf.w[n - 1].abs() >= max_abs(&cf.w) * (1.0 - 1e-12));
    p.supports = Supports::by_name("free-free").unwrap();
    assert!(solve_ntbm(&p, &FixedPointConfig::default()).is_err());
}

#[test]
fn bad_fixed_point_settings() {
    let p = coarse(OrderDistribution::local());
    let fp = FixedPointConfig {
        max_iter: 0,
        ..Default::default()
    };
    assert!(solve_ntbm(&p, &fp).is_err());
    let fp = FixedPointConfig {
        relaxation: 1.5,
        ..Default::default()
    };
    assert!(solve_ntbm(&p, &fp).is_err());
}
