#![allow(dead_code)]

use num_complex::Complex64;
use wedgewave::config::{parse_run_config, RunConfig};
use wedgewave::{GaussianPacket2D, WedgeSystem};

pub const FIG2: &str = include_str!("../../configs/fig2.cfg");
pub const FIG3: &str = include_str!("../../configs/fig3.cfg");
pub const FIG4: &str = include_str!("../../configs/fig4.cfg");

pub fn config(text: &str) -> RunConfig {
    parse_run_config(text).expect("shipped config parses")
}

/// (x0, y0) = (5, 3), zero momenta, beta = m = hbar = 1, N = 3.
pub fn fig2_system() -> WedgeSystem {
    config(FIG2).system().unwrap()
}

pub fn isotropic_system(
    n: usize,
    center: (f64, f64),
    momentum: (f64, f64),
    beta: f64,
) -> WedgeSystem {
    let packet = GaussianPacket2D::isotropic(center, momentum, beta, 1.0, 1.0).unwrap();
    WedgeSystem::new(n, packet).unwrap()
}

/// Exact norm of the wedge wavefunction for an isotropic packet:
/// `sum_k s_k <psi_0 | psi_0 o Q_k>`, each term a closed-form Gaussian integral.
/// Time independent, since free evolution commutes with the image isometries.
pub fn analytic_norm(system: &WedgeSystem) -> f64 {
    let beta = system.packet.min_beta();
    let hbar = system.packet.hbar();
    let (cx, cy) = system.packet.center();
    let (px, py) = system.packet.momentum();
    let d = 1.0 / (2.0 * beta * beta);
    let (kx, ky) = (px / hbar, py / hbar);
    let mut total = Complex64::new(0.0, 0.0);
    for term in &system.terms {
        // isotropic D is rotation invariant, so D' = D and A = 2D
        let q = term.isometry;
        let (cpx, cpy) = q.apply_transpose(cx, cy);
        let (kpx, kpy) = q.apply_transpose(kx, ky);
        let a = 2.0 * d;
        let bx = Complex64::new(2.0 * d * (cx + cpx), kpx - kx);
        let by = Complex64::new(2.0 * d * (cy + cpy), kpy - ky);
        let constant = Complex64::new(
            -d * (cx * cx + cy * cy) - d * (cpx * cpx + cpy * cpy),
            kx * cx + ky * cy - kpx * cpx - kpy * cpy,
        );
        let gauss = std::f64::consts::PI / a * ((bx * bx + by * by) / (4.0 * a) + constant).exp();
        total += gauss * term.sign.value() / (std::f64::consts::PI * beta * beta);
    }
    assert!(total.im.abs() < 1e-12, "overlap sum must be real: {total}");
    total.re
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
