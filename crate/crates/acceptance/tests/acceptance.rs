//! Acceptance criteria 1-10. Every test writes one `PASS`/`FAIL` line to
//! stderr (unbuffered, so it shows up even when output is captured) and then
//! asserts. Tolerances and time budgets are pinned below.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedgewave::config::{parse_run_config, RunConfig};
use wedgewave::gaussian::psi2d;
use wedgewave::images::{build_wedge_images, verify_closure, wedge_angle, PlaneIsometry};
use wedgewave::momentum::{momentum_stats_series, TransformSettings};
use wedgewave::observables::{
    auto_grid, expect_kinetic, expect_momentum, quad_norm, DEFAULT_K_SIGMA,
};
use wedgewave::run::{mirror_params, run_artifacts};
use wedgewave::wavefunction::{image_sum, psi_wedge, schrodinger_residual};
use wedgewave::{GaussianPacket2D, WedgeSystem};

const SEED: u64 = 0x5EED_0001;

const C1_CONFIGS: usize = 20;
const C1_WALL_SAMPLES: usize = 1000;
const C1_TOLERANCE: f64 = 1e-12;
const C1_BUDGET: Duration = Duration::from_secs(10);

const C2_POINTS: usize = 1000;
const C2_TOLERANCE: f64 = 1e-12;
const C2_BUDGET: Duration = Duration::from_secs(1);

const C3_TIME: f64 = 15.0;
const C3_TAN: f64 = 0.577;
const C3_TAN_BAND: f64 = 0.01;
const C3_ANGLE_BAND_DEG: f64 = 0.5;
const C3_BUDGET: Duration = Duration::from_secs(120);

const C4_TIMES: [f64; 4] = [0.0, 5.0, 10.0, 15.0];
const C4_NORM_TOLERANCE: f64 = 1e-5;
const C4_KINETIC_TOLERANCE: f64 = 5e-3;
const C4_BUDGET: Duration = Duration::from_secs(180);

const C5_TIME: f64 = 10.0;
const C5_MEAN_BAND: f64 = 0.03;
const C5_SPREAD_RATIO: f64 = 0.603;
const C5_SPREAD_BAND: f64 = 0.03;
const C5_P2: f64 = 0.5;
const C5_P2_BAND: f64 = 0.01;
const C5_BUDGET: Duration = Duration::from_secs(30);

const C6_LOCATION_BAND: f64 = 0.02;
const C6_SEARCH_HALF_WIDTH: f64 = 0.3;
const C6_DEPTH: f64 = 0.02;
const C6_BUDGET: Duration = Duration::from_secs(30);

const C7_TIMES: [f64; 3] = [3.0, 5.0, 10.0];
const C7_TOLERANCE: f64 = 0.05;
const C7_BUDGET: Duration = Duration::from_secs(60);

const C8_POINTS: usize = 100;
const C8_STEP: f64 = 1e-3;
const C8_TOLERANCE: f64 = 1e-5;
const C8_ORDER_BAND: (f64, f64) = (1.8, 2.2);
const C8_BUDGET: Duration = Duration::from_secs(5);

const C9_MAX_N: usize = 8;
const C9_BUDGET: Duration = Duration::from_secs(1);

const C10_THREADS: [usize; 3] = [1, 4, 8];
const C10_BUDGET: Duration = Duration::from_secs(180);

const FIG2: &str = include_str!("../../core/configs/fig2.cfg");
const FIG4: &str = include_str!("../../core/configs/fig4.cfg");

fn config(text: &str) -> RunConfig {
    parse_run_config(text).expect("shipped config parses")
}

fn fig2_system() -> WedgeSystem {
    config(FIG2).system().unwrap()
}

fn report(criterion: u32, passed: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let within = elapsed <= budget;
    let mark = if passed && within { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "acceptance criterion {criterion:>2}: {mark} | {detail} | {:.2}s (budget {}s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
    assert!(within, "criterion {criterion} exceeded its time budget");
}

fn random_system(rng: &mut ChaCha8Rng, n: usize) -> WedgeSystem {
    let theta = wedge_angle(n);
    let r = rng.gen_range(1.0..8.0);
    let phi = rng.gen_range(0.05..0.95) * theta;
    let packet = GaussianPacket2D::isotropic(
        (r * phi.cos(), r * phi.sin()),
        (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        rng.gen_range(0.3..2.0),
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..2.0),
    )
    .unwrap();
    WedgeSystem::new(n, packet).unwrap()
}

#[test]
fn criterion_01_boundary_conditions() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3, 4, 6] {
        for _ in 0..C1_CONFIGS {
            let system = random_system(&mut rng, n);
            let t0 = system.packet.px_params.scales().t0;
            let (dir_x, dir_y) = (system.angle().cos(), system.angle().sin());
            for t in [0.0, t0, 5.0 * t0] {
                let peak = system.packet.peak_modulus(t);
                let (cx, cy) = system.packet.center();
                let reach = cx.hypot(cy)
                    + 10.0 * system.packet.max_width_at(t)
                    + t * 2.0 / system.packet.m();
                for k in 0..C1_WALL_SAMPLES {
                    let r = reach * k as f64 / (C1_WALL_SAMPLES - 1) as f64;
                    let lower = image_sum(&system, r, 0.0, t).norm();
                    let upper = image_sum(&system, r * dir_x, r * dir_y, t).norm();
                    worst = worst.max(lower.max(upper) / peak);
                }
            }
        }
    }
    report(
        1,
        worst < C1_TOLERANCE,
        start.elapsed(),
        C1_BUDGET,
        &format!("max |psi| on walls / peak = {worst:.3e} (limit {C1_TOLERANCE:e})"),
    );
}

/// The sixty degree solution written out term by term.
fn psi_sixty(packet: &GaussianPacket2D, x: f64, y: f64, t: f64) -> Complex64 {
    let s = 3f64.sqrt() / 2.0;
    let p = |u: f64, v: f64| psi2d(packet, u, v, t);
    p(x, y) - p(x, -y) + p(-x / 2.0 - s * y, s * x - y / 2.0) - p(-x / 2.0 + s * y, s * x + y / 2.0)
        + p(-x / 2.0 + s * y, -s * x - y / 2.0)
        - p(-x / 2.0 - s * y, -s * x + y / 2.0)
}

#[test]
fn criterion_02_sixty_degree_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let systems: Vec<WedgeSystem> = (0..10).map(|_| random_system(&mut rng, 3)).collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..C2_POINTS {
        let system = &systems[k % systems.len()];
        let r = rng.gen_range(0.0..12.0);
        let phi = rng.gen_range(0.0..PI / 3.0);
        let t = rng.gen_range(0.0..10.0);
        let (x, y) = (r * phi.cos(), r * phi.sin());
        if !system.contains(x, y) {
            continue;
        }
        let ours = psi_wedge(system, x, y, t);
        let reference = psi_sixty(&system.packet, x, y, t);
        worst = worst.max((ours - reference).norm() / reference.norm());
    }
    report(
        2,
        worst < C2_TOLERANCE,
        start.elapsed(),
        C2_BUDGET,
        &format!("max relative difference = {worst:.3e} over {C2_POINTS} points (limit {C2_TOLERANCE:e})"),
    );
}

#[test]
fn criterion_03_late_time_direction() {
    let start = Instant::now();
    let system = fig2_system();
    let spec = auto_grid(&system, C3_TIME, DEFAULT_K_SIGMA).unwrap();
    let (px, py) = expect_momentum(&system, C3_TIME, &spec);
    let tan = py / px;
    let theta_deg = tan.atan().to_degrees();
    let bisector_deg = (system.angle() / 2.0).to_degrees();
    let passed =
        (tan - C3_TAN).abs() <= C3_TAN_BAND && (theta_deg - bisector_deg).abs() < C3_ANGLE_BAND_DEG;
    report(
        3,
        passed,
        start.elapsed(),
        C3_BUDGET,
        &format!("t={C3_TIME}: <py>/<px> = {tan:.5}, theta = {theta_deg:.3} deg (target {C3_TAN} +- {C3_TAN_BAND}, {bisector_deg} +- {C3_ANGLE_BAND_DEG} deg)"),
    );
}

#[test]
fn criterion_04_conservation() {
    let start = Instant::now();
    let system = fig2_system();
    let mut norms = Vec::new();
    let mut kinetic = Vec::new();
    for t in C4_TIMES {
        let spec = auto_grid(&system, t, DEFAULT_K_SIGMA).unwrap();
        norms.push(quad_norm(&system, t, &spec));
        kinetic.push(expect_kinetic(&system, t, &spec));
    }
    let spread = |v: &[f64]| {
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    };
    let norm_drift = spread(&norms);
    let kinetic_drift = spread(&kinetic) / kinetic[0];
    report(
        4,
        norm_drift < C4_NORM_TOLERANCE && kinetic_drift < C4_KINETIC_TOLERANCE,
        start.elapsed(),
        C4_BUDGET,
        &format!(
            "norm drift {norm_drift:.2e} (limit {C4_NORM_TOLERANCE:e}), <T> drift {kinetic_drift:.2e} relative (limit {C4_KINETIC_TOLERANCE:e})"
        ),
    );
}

fn fig4_series() -> (
    wedgewave::PacketParams1D,
    Vec<wedgewave::momentum::MomentumDensity1D>,
) {
    let cfg = config(FIG4);
    let params = mirror_params(&cfg).unwrap();
    let settings = TransformSettings {
        x_max: cfg.momentum1d.x_max,
        n_samples: cfg.momentum1d.n_samples,
    };
    let series = momentum_stats_series(&params, &cfg.times, &settings).unwrap();
    (params, series)
}

#[test]
fn criterion_05_long_time_momentum_statistics() {
    let start = Instant::now();
    let (params, series) = fig4_series();
    let late = series
        .iter()
        .find(|r| r.t == C5_TIME)
        .expect("fig4 samples t = 10");
    let target_mean = 1.0 / PI.sqrt();
    let mean_ok = (late.mean_p / target_mean - 1.0).abs() <= C5_MEAN_BAND;
    let ratio = late.spread_p / params.scales().dp0;
    let ratio_ok = (ratio - C5_SPREAD_RATIO).abs() <= C5_SPREAD_BAND;
    let worst_p2 = series
        .iter()
        .map(|r| (r.mean_p2 / C5_P2 - 1.0).abs())
        .fold(0.0, f64::max);
    report(
        5,
        mean_ok && ratio_ok && worst_p2 <= C5_P2_BAND,
        start.elapsed(),
        C5_BUDGET,
        &format!(
            "t={C5_TIME}: mean_p = {:.5} ({:+.2}% vs 1/sqrt(pi)), spread/dp0 = {ratio:.4}, worst |<p^2>/0.5 - 1| = {worst_p2:.2e}",
            late.mean_p,
            100.0 * (late.mean_p / target_mean - 1.0)
        ),
    );
}

#[test]
fn criterion_06_interference_zeros() {
    let start = Instant::now();
    let (params, series) = fig4_series();
    let late = series.iter().find(|r| r.t == C5_TIME).unwrap();
    let spacing = PI * params.hbar / params.x0;
    let mut passed = true;
    let mut detail = Vec::new();
    for n in [1.0, 2.0] {
        let target = n * spacing;
        let (p_min, d_min) = late
            .local_minimum_near(target, C6_SEARCH_HALF_WIDTH)
            .unwrap();
        let (_, left) = late.maximum_in(target - spacing, target).unwrap();
        let (_, right) = late.maximum_in(target, target + spacing).unwrap();
        let depth = d_min / left.min(right);
        passed &= (p_min - target).abs() <= C6_LOCATION_BAND && depth < C6_DEPTH;
        detail.push(format!(
            "min at {p_min:.4} (target {target:.4}), depth {:.2}%",
            100.0 * depth
        ));
    }
    report(6, passed, start.elapsed(), C6_BUDGET, &detail.join("; "));
}

#[test]
fn criterion_07_asymptotic_form() {
    let start = Instant::now();
    let params = mirror_params(&config(FIG4)).unwrap();
    let series = momentum_stats_series(&params, &C7_TIMES, &TransformSettings::default()).unwrap();
    let deviations: Vec<f64> = series
        .iter()
        .map(|r| r.longterm_deviation(&params).unwrap())
        .collect();
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
    let last = *deviations.last().unwrap();
    let listing: Vec<String> = C7_TIMES
        .iter()
        .zip(&deviations)
        .map(|(t, d)| format!("t={t}: {d:.3}"))
        .collect();
    report(
        7,
        monotone && last < C7_TOLERANCE,
        start.elapsed(),
        C7_BUDGET,
        &format!(
            "relative L1 deviation {} (monotone: {monotone}; limit {C7_TOLERANCE} at t=10)",
            listing.join(", ")
        ),
    );
}

#[test]
fn criterion_08_pde_residual() {
    let start = Instant::now();
    let system = fig2_system();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let margin = 4.0 * C8_STEP;
    let mut worst: f64 = 0.0;
    let (mut coarse, mut fine) = (0.0, 0.0);
    let mut used = 0;
    while used < C8_POINTS {
        let t = rng.gen_range(0.0..15.0);
        let spread = system.packet.max_width_at(t);
        let r = rng.gen_range(0.5..(6.0 + 3.0 * spread));
        let phi = rng.gen_range(0.0..PI / 3.0);
        let (x, y) = (r * phi.cos(), r * phi.sin());
        if y < margin
            || !system.contains(x + margin, y + margin * 3f64.sqrt())
            || !system.contains(x, y)
        {
            continue;
        }
        let peak = system.packet.peak_modulus(t);
        let at_h = schrodinger_residual(&system, x, y, t, C8_STEP).unwrap() / peak;
        let at_2h = schrodinger_residual(&system, x, y, t, 2.0 * C8_STEP).unwrap() / peak;
        worst = worst.max(at_h);
        fine += at_h;
        coarse += at_2h;
        used += 1;
    }
    let order = (coarse / fine).log2();
    let order_ok = order >= C8_ORDER_BAND.0 && order <= C8_ORDER_BAND.1;
    report(
        8,
        worst < C8_TOLERANCE && order_ok,
        start.elapsed(),
        C8_BUDGET,
        &format!(
            "max residual / peak = {worst:.3e} at h={C8_STEP} (limit {C8_TOLERANCE:e}), observed order {order:.3}"
        ),
    );
}

#[test]
fn criterion_09_group_structure() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 1..=C9_MAX_N {
        let terms = build_wedge_images(n).unwrap();
        let closure = verify_closure(&terms);
        let r = PlaneIsometry::rotation(2.0 * wedge_angle(n));
        let f = PlaneIsometry::MIRROR_X_AXIS;
        let mut power = PlaneIsometry::IDENTITY;
        for _ in 0..n {
            power = power.compose(&r);
        }
        let generators = power.distance(&PlaneIsometry::IDENTITY) < 1e-12
            && f.compose(&f).distance(&PlaneIsometry::IDENTITY) < 1e-15
            && f.compose(&r).compose(&f).distance(&r.transpose()) < 1e-12;
        let plus = terms.iter().filter(|t| t.isometry.det() > 0.0).count();
        if !closure.passed || !generators || plus != n || terms.len() != 2 * n {
            failures.push(format!("N={n}: {:?}", closure.failures));
        }
    }
    report(
        9,
        failures.is_empty(),
        start.elapsed(),
        C9_BUDGET,
        &if failures.is_empty() {
            format!(
                "closure, sign = det, N+N split and generator relations hold for N = 1..{C9_MAX_N}"
            )
        } else {
            failures.join("; ")
        },
    );
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let cfg = config(FIG2);
    let root = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for threads in C10_THREADS {
        let out = root.path().join(format!("threads{threads}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_artifacts(&cfg, &cfg.outputs, &out))
            .unwrap();
        snapshots.push(snapshot(&out));
    }
    let identical = snapshots.windows(2).all(|w| w[0] == w[1]);
    let files = snapshots[0].len();
    let bytes: usize = snapshots[0].iter().map(|(_, b)| b.len()).sum();
    report(
        10,
        identical && files == 9,
        start.elapsed(),
        C10_BUDGET,
        &format!(
            "{files} files, {bytes} bytes, identical across threads {C10_THREADS:?}: {identical}"
        ),
    );
}
