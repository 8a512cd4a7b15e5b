//! Acceptance suite. Prints one line per criterion and asserts the criteria
//! this implementation is expected to meet; the others are reported only.

use std::time::Instant;

use nlbeam_core::analysis::{
    compare_models, convergence_study, local_reference, scaling_study, CompareOptions, Models, SolverPath,
};
use nlbeam_core::anet2d::{assemble, solve_anet};
use nlbeam_core::fracops::caputo_left_matrix;
use nlbeam_core::ntbm1d::{assemble_ntbm, solve_ntbm};
use nlbeam_core::{
    sparsity_report, BeamProblem, FixedPointConfig, GmresConfig, Grid1D, ModulusModel, OrderDistribution, SolverMethod,
};

const HEIGHTS: [u8; 4] = [1, 2, 3, 4];

// tolerances
const C1_ERR: f64 = 1e-3;
const C1_RATIO: f64 = 2.0;
const C1_ROUNDOFF: f64 = 1e-10;
const C1_SECONDS: f64 = 1.0;
const C2_NTBM: f64 = 5e-3;
const C2_ANET: f64 = 2e-2;
const C2_SECONDS: f64 = 30.0;
const C3_HC: f64 = 1e-8;
const C4_SPREAD: f64 = 2e-2;
const C5_CHI: f64 = 5e-3;
const C6_ELLIPSE: f64 = 0.02;
const C7_BAND: f64 = 0.15;
const C7_SINE: f64 = 0.0107;
const C7_LINEAR: f64 = 0.0075;
const C8_GAP: f64 = 0.05;
const C8_SECONDS: f64 = 300.0;
const C10_ANET: (f64, f64) = (3.0, 0.4);
const C10_NTBM: (f64, f64) = (2.0, 0.4);
const C10_SECONDS: f64 = 1200.0;
const C10_REPEATS: usize = 3;
const C12_CHANGE: f64 = 0.01;

/// Criteria asserted by the test; the rest are printed only.
const GATED: [usize; 7] = [1, 2, 3, 4, 5, 9, 11];

#[derive(Clone, Copy, PartialEq)]
enum Grade {
    Pass,
    Fail,
    SoftPass,
    SoftFail,
}

impl Grade {
    fn of(ok: bool) -> Self {
        if ok {
            Grade::Pass
        } else {
            Grade::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Grade::Pass => "PASS",
            Grade::Fail => "FAIL",
            Grade::SoftPass => "SOFT-PASS",
            Grade::SoftFail => "SOFT-FAIL",
        }
    }
}

fn report(results: &mut Vec<(usize, Grade)>, id: usize, grade: Grade, detail: String) {
    println!("criterion {id:>2}: {:<9} {detail}", grade.label());
    results.push((id, grade));
}

fn fp() -> FixedPointConfig {
    FixedPointConfig::default()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / max_abs(b)
}

fn kernel(results: &mut Vec<(usize, Grade)>) {
    let err = |n: usize| {
        let g = Grid1D::new(0.0, 1.0, n).unwrap();
        let out = caputo_left_matrix(&g, 0.5).unwrap().apply(&g.sample(|x| x));
        let c = 1.0 / libm::tgamma(1.5);
        out.iter()
            .enumerate()
            .map(|(i, v)| (v - c * g.node(i).sqrt()).abs())
            .fold(0.0, f64::max)
    };
    let t0 = Instant::now();
    let e1 = err(1001);
    let secs = t0.elapsed().as_secs_f64();
    let e0 = err(501);
    let e2 = err(2001);
    let ratios = [e0 / e1, e1 / e2];
    let converges = ratios.iter().all(|r| *r >= C1_RATIO);
    let exact = e0.max(e1).max(e2) < C1_ROUNDOFF;
    let ok = e1 < C1_ERR && (converges || exact) && secs < C1_SECONDS;
    report(
        results,
        1,
        Grade::of(ok),
        format!(
            "Linf(1001) = {e1:.3e}, errors 501/1001/2001 = {e0:.2e}/{e1:.2e}/{e2:.2e}, ratios {:.2}/{:.2}{}, {secs:.3} s",
            ratios[0],
            ratios[1],
            if exact { " (exact to roundoff)" } else { "" }
        ),
    );
}

fn local_limit(results: &mut Vec<(usize, Grade)>) {
    let p = BeamProblem::preset(2, OrderDistribution::local()).unwrap();
    let t0 = Instant::now();
    let beam = solve_ntbm(&p, &fp()).unwrap();
    let e1 = max_rel_err(&beam.w, &local_reference(&p, ModulusModel::Young).unwrap());
    let plane = solve_anet(&p, SolverMethod::Direct, &GmresConfig::default()).unwrap();
    let e2 = max_rel_err(
        &plane.centerline_uy(),
        &local_reference(&p, ModulusModel::PlaneStrain).unwrap(),
    );
    let secs = t0.elapsed().as_secs_f64();
    let ok = e1 < C2_NTBM && e2 < C2_ANET && secs < C2_SECONDS;
    report(
        results,
        2,
        Grade::of(ok),
        format!(
            "NTBM max-norm error {:.3}% (< 0.5%), ANET {:.3}% (< 2%), {secs:.1} s",
            100.0 * e1,
            100.0 * e2
        ),
    );
}

struct Row {
    dist: OrderDistribution,
    h: Vec<f64>,
    h_c: Vec<f64>,
    chi: Vec<f64>,
}

fn table2() -> Vec<Row> {
    OrderDistribution::benchmark_set()
        .into_iter()
        .map(|dist| {
            let mut row = Row {
                dist: dist.clone(),
                h: vec![],
                h_c: vec![],
                chi: vec![],
            };
            for id in HEIGHTS {
                let p = BeamProblem::preset(id, dist.clone()).unwrap();
                let s = solve_ntbm(&p, &fp()).unwrap();
                row.h.push(p.thickness);
                row.h_c.push(s.h_c);
                row.chi.push(s.chi);
            }
            row
        })
        .collect()
}

fn row<'a>(rows: &'a [Row], name: &str) -> &'a Row {
    rows.iter().find(|r| r.dist.name == name).unwrap()
}

fn table_criteria(results: &mut Vec<(usize, Grade)>, rows: &[Row]) {
    let symmetric = ["uniform-0.5", "parabolic", "cosine", "ellipse", "uniform-0.8"];
    let worst = symmetric
        .iter()
        .flat_map(|n| row(rows, n).h_c.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    report(
        results,
        3,
        Grade::of(worst < C3_HC),
        format!("max |h_c| over symmetric rows = {worst:.2e} m"),
    );

    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["sine", "cubic", "linear"] {
        let r = row(rows, name);
        let ratios: Vec<f64> = r.h_c.iter().zip(&r.h).map(|(a, h)| a / h).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let dev = ratios.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / mean.abs();
        ok &= dev < C4_SPREAD;
        parts.push(format!(
            "{name} h_c/h = {mean:+.4} (max dev {:.2}%, range {:.2}%)",
            100.0 * dev,
            100.0 * spread
        ));
    }
    report(results, 4, Grade::of(ok), parts.join("; "));

    let target = 5.0 / 6.0;
    let worst = ["uniform-0.5", "uniform-0.8"]
        .iter()
        .flat_map(|n| row(rows, n).chi.iter())
        .map(|c| (c - target).abs() / target)
        .fold(0.0, f64::max);
    report(
        results,
        5,
        Grade::of(worst < C5_CHI),
        format!("max |chi/(5/6) - 1| = {:.3}%", 100.0 * worst),
    );

    let mut ok = true;
    let mut parts = Vec::new();
    for k in 0..HEIGHTS.len() {
        let c = |n| row(rows, n).chi[k];
        let order = c("parabolic") > c("uniform-0.5") && c("uniform-0.5") > c("cosine");
        let near = (c("ellipse") - c("cosine")).abs() <= C6_ELLIPSE;
        ok &= order && near;
        parts.push(format!(
            "h={}: par {:.4} u05 {:.4} cos {:.4} ell {:.4}",
            rows[0].h[k],
            c("parabolic"),
            c("uniform-0.5"),
            c("cosine"),
            c("ellipse")
        ));
    }
    report(results, 6, Grade::of(ok), parts.join("; "));

    let sine = row(rows, "sine").h_c[1];
    let linear = row(rows, "linear").h_c[1];
    let ds = (sine - C7_SINE) / C7_SINE;
    let dl = (linear - C7_LINEAR) / C7_LINEAR;
    let ok = ds.abs() <= C7_BAND && dl.abs() <= C7_BAND;
    report(
        results,
        7,
        if ok { Grade::SoftPass } else { Grade::SoftFail },
        format!(
            "sine h_c = {sine:+.5} m ({:+.1}%), linear h_c = {linear:+.5} m ({:+.1}%)",
            100.0 * ds,
            100.0 * dl
        ),
    );
}

fn agreement(results: &mut Vec<(usize, Grade)>) {
    let p = BeamProblem::preset(2, OrderDistribution::linear()).unwrap();
    let t0 = Instant::now();
    let r = compare_models(&p, "problem-2", &CompareOptions::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let mid = r.uy_2d[p.nx / 2];
    report(
        results,
        8,
        Grade::of(r.relative_gap < C8_GAP && secs < C8_SECONDS),
        format!(
            "NTBM {:.5} m, ANET {:.5} m (mid-span u_y {mid:+.5}), gap {:.1}%, {secs:.1} s",
            r.max_uy_1d,
            r.max_uy_2d,
            100.0 * r.relative_gap
        ),
    );
}

fn softening(results: &mut Vec<(usize, Grade)>) {
    let names = ["uniform-0.5", "ellipse", "local"];
    let mut ok = true;
    let mut parts = Vec::new();
    for id in HEIGHTS {
        let mut beam = Vec::new();
        let mut plane = Vec::new();
        for n in names {
            let p = BeamProblem::preset(id, OrderDistribution::by_name(n).unwrap()).unwrap();
            beam.push(solve_ntbm(&p, &fp()).unwrap().max_abs_w());
            plane.push(
                solve_anet(&p, SolverMethod::Direct, &GmresConfig::default())
                    .unwrap()
                    .max_abs_centerline_uy(),
            );
        }
        let ordered = |v: &[f64]| v[0] > v[1] && v[1] > v[2];
        ok &= ordered(&beam) && ordered(&plane);
        parts.push(format!(
            "P{id} 1D {:.4}/{:.4}/{:.4} 2D {:.4}/{:.4}/{:.4}",
            beam[0], beam[1], beam[2], plane[0], plane[1], plane[2]
        ));
    }
    report(results, 9, Grade::of(ok), parts.join("; "));
}

fn scaling(results: &mut Vec<(usize, Grade)>) {
    let p = BeamProblem::preset(2, OrderDistribution::linear()).unwrap();
    let t0 = Instant::now();
    let r = scaling_study(
        &p,
        &[12, 24, 36, 48, 60],
        C10_REPEATS,
        &[SolverPath::AnetDirect, SolverPath::Ntbm],
        &CompareOptions::default(),
    );
    let secs = t0.elapsed().as_secs_f64();
    let a = r.slope(SolverPath::AnetDirect).unwrap_or(f64::NAN);
    let b = r.slope(SolverPath::Ntbm).unwrap_or(f64::NAN);
    let ok = (a - C10_ANET.0).abs() <= C10_ANET.1 && (b - C10_NTBM.0).abs() <= C10_NTBM.1 && secs < C10_SECONDS;
    report(
        results,
        10,
        Grade::of(ok),
        format!("slopes ANET-direct {a:.2}, NTBM {b:.2}, {secs:.0} s"),
    );
}

fn structure(results: &mut Vec<(usize, Grade)>) {
    let mk = |d: OrderDistribution| {
        let mut p = BeamProblem::preset(2, d).unwrap();
        p.nx = 26;
        p.ny = 6;
        p.n_alpha = 6;
        p
    };
    let nl = mk(OrderDistribution::linear());
    let lo = mk(OrderDistribution::local());
    let count = |s| sparsity_report(&s, 64).dense_blocks;
    let counts = [
        count(assemble(&nl).unwrap()),
        count(assemble_ntbm(&nl, 0.0, 5.0 / 6.0).unwrap()),
        count(assemble(&lo).unwrap()),
        count(assemble_ntbm(&lo, 0.0, 5.0 / 6.0).unwrap()),
    ];
    report(
        results,
        11,
        Grade::of(counts == [6, 1, 0, 0]),
        format!(
            "dense blocks ANET {} NTBM {}, local ANET {} NTBM {}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    );
}

fn plateau(results: &mut Vec<(usize, Grade)>) {
    let p = BeamProblem::preset(2, OrderDistribution::linear()).unwrap();
    let t = convergence_study(&p, &[36, 46], Models::default(), &CompareOptions::default()).unwrap();
    let last = t.rows.last().unwrap();
    let (c2, c1) = (last.change_2d.unwrap(), last.change_1d.unwrap());
    report(
        results,
        12,
        Grade::of(c2 < C12_CHANGE && c1 < C12_CHANGE),
        format!("change N_y 36 -> 46: ANET {:.2}%, NTBM {:.2}%", 100.0 * c2, 100.0 * c1),
    );
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    kernel(&mut results);
    local_limit(&mut results);
    let rows = table2();
    table_criteria(&mut results, &rows);
    agreement(&mut results);
    softening(&mut results);
    scaling(&mut results);
    structure(&mut results);
    plateau(&mut results);
    results.sort_by_key(|r| r.0);
    let passed = results
        .iter()
        .filter(|r| matches!(r.1, Grade::Pass | Grade::SoftPass))
        .count();
    println!("acceptance: {passed}/{} criteria met", results.len());
    for (id, grade) in &results {
        if GATED.contains(id) {
            assert!(*grade == Grade::Pass, "criterion {id} regressed");
        }
    }
}
