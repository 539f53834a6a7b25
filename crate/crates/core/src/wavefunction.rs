//! Evaluation of the signed image sum inside the wedge.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{psi2d, psi2d_with_gradient};
use crate::images::{inside_wedge, WedgeSystem};

/// Uniform sampling of a rectangle, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        let spec = GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("grid", "bounds must be finite"));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::invalid("grid", "x_min must be below x_max"));
        }
        if !(self.y_min < self.y_max) {
            return Err(Error::invalid("grid", "y_min must be below y_max"));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid("grid", "need at least 2 samples per axis"));
        }
        Ok(())
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * (i as f64 / (self.nx - 1) as f64)
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * (j as f64 / (self.ny - 1) as f64)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same box with `factor` times as many intervals per axis.
    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            nx: (self.nx - 1) * factor + 1,
            ny: (self.ny - 1) * factor + 1,
            ..*self
        }
    }
}

/// `|psi|^2` sampled on a [`GridSpec`], stored row-major with one row per y.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub t: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.spec.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Sample indices of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let (k, _) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                    if v > best.1 {
                        (k, v)
                    } else {
                        best
                    }
                });
        (k % self.spec.nx, k / self.spec.nx)
    }
}

/// Unmasked signed sum over all image terms, ascending term index.
#[inline]
pub fn image_sum(system: &WedgeSystem, x: f64, y: f64, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for term in &system.terms {
        let (u, v) = term.isometry.apply(x, y);
        acc += psi2d(&system.packet, u, v, t) * term.sign.value();
    }
    acc
}

/// Unmasked value and gradient of the image sum.
#[inline]
pub fn image_sum_with_gradient(
    system: &WedgeSystem,
    x: f64,
    y: f64,
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut psi, mut gx, mut gy) = (zero, zero, zero);
    for term in &system.terms {
        let q = &term.isometry;
        let s = term.sign.value();
        let (u, v) = q.apply(x, y);
        let (f, du, dv) = psi2d_with_gradient(&system.packet, u, v, t);
        let (dx, dy) = q.apply_transpose(du, dv);
        psi += f * s;
        gx += dx * s;
        gy += dy * s;
    }
    (psi, gx, gy)
}

/// Wedge wavefunction; exactly zero outside the open wedge.
pub fn psi_wedge(system: &WedgeSystem, x: f64, y: f64, t: f64) -> Complex64 {
    if inside_wedge(system.n_wedge, x, y) {
        image_sum(system, x, y, t)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Analytic gradient; the point must be strictly inside the wedge.
pub fn grad_psi_wedge(
    system: &WedgeSystem,
    x: f64,
    y: f64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    if !inside_wedge(system.n_wedge, x, y) {
        return Err(Error::OutsideWedge { x, y });
    }
    let (_, gx, gy) = image_sum_with_gradient(system, x, y, t);
    Ok((gx, gy))
}

/// Samples `|psi_wedge|^2` on the grid. Bit-identical for any thread count.
pub fn density_grid(system: &WedgeSystem, spec: &GridSpec, t: f64) -> DensityGrid {
    let mut values = vec![0.0; spec.len()];
    values
        .par_chunks_mut(spec.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = spec.y(j);
            for (i, out) in row.iter_mut().enumerate() {
                *out = psi_wedge(system, spec.x(i), y, t).norm_sqr();
            }
        });
    DensityGrid {
        spec: *spec,
        t,
        values,
    }
}

/// `|i hbar d_t psi + hbar^2/(2m) laplacian psi|` by central differences.
///
/// The five-point spatial stencil must stay strictly inside the wedge.
pub fn schrodinger_residual(system: &WedgeSystem, x: f64, y: f64, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", "step must be positive"));
    }
    let stencil = [(x, y), (x + h, y), (x - h, y), (x, y + h), (x, y - h)];
    for &(sx, sy) in &stencil {
        if !inside_wedge(system.n_wedge, sx, sy) {
            return Err(Error::OutsideWedge { x: sx, y: sy });
        }
    }
    let f = |x, y, t| image_sum(system, x, y, t);
    let center = f(x, y, t);
    let dt = (f(x, y, t + h) - f(x, y, t - h)) / (2.0 * h);
    let laplacian = (f(x + h, y, t) + f(x - h, y, t) + f(x, y + h, t) + f(x, y - h, t)
        - center * 4.0)
        / (h * h);
    let hbar = system.packet.hbar();
    let m = system.packet.m();
    let residual = Complex64::new(0.0, hbar) * dt + laplacian * (hbar * hbar / (2.0 * m));
    Ok(residual.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianPacket2D;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig2_system() -> WedgeSystem {
        let packet = GaussianPacket2D::isotropic((5.0, 3.0), (0.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        WedgeSystem::new(3, packet).unwrap()
    }

    fn random_interior(rng: &mut ChaCha8Rng, system: &WedgeSystem, radius: f64) -> (f64, f64) {
        loop {
            let r = rng.gen_range(0.3..radius);
            let theta = rng.gen_range(0.02..0.98) * system.angle();
            let (x, y) = (r * theta.cos(), r * theta.sin());
            if system.contains(x, y) {
                return (x, y);
            }
        }
    }

    #[test]
    fn grid_sampling_includes_endpoints() {
        let spec = GridSpec::new(-1.0, 2.0, 0.0, 1.0, 4, 3).unwrap();
        assert_eq!(spec.x(0), -1.0);
        assert_eq!(spec.x(3), 2.0);
        assert_eq!(spec.y(2), 1.0);
        assert_eq!(spec.dx(), 1.0);
        assert!(GridSpec::new(1.0, 1.0, 0.0, 1.0, 4, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 1, 4).is_err());
        assert_eq!(spec.refined(2).nx, 7);
    }

    #[test]
    fn seed_dominates_at_packet_center() {
        let system = fig2_system();
        let value = psi_wedge(&system, 5.0, 3.0, 0.0);
        let seed = psi2d(&system.packet, 5.0, 3.0, 0.0);
        assert_abs_diff_eq!((value - seed).norm(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(value.re, 0.56419, epsilon = 1e-5);
    }

    #[test]
    fn vanishes_on_both_walls() {
        let system = fig2_system();
        let peak = system.packet.peak_modulus(0.0);
        for t in [0.0, 1.0, 5.0, 15.0] {
            for k in 0..200 {
                let r = 0.05 * k as f64;
                let a = image_sum(&system, r, 0.0, t).norm();
                let (cx, cy) = (r * system.angle().cos(), r * system.angle().sin());
                let b = image_sum(&system, cx, cy, t).norm();
                assert!(a < 1e-12 * peak && b < 1e-12 * peak, "{a} {b}");
                assert_eq!(psi_wedge(&system, r, 0.0, t), Complex64::new(0.0, 0.0));
                assert_eq!(
                    psi_wedge(&system, r, r * 3f64.sqrt(), t),
                    Complex64::new(0.0, 0.0)
                );
            }
        }
    }

    #[test]
    fn matches_product_form_for_right_angle() {
        let packet = GaussianPacket2D::isotropic((2.0, 1.5), (0.7, -0.3), 0.9, 1.3, 1.0).unwrap();
        let system = WedgeSystem::new(2, packet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(0.01..6.0), rng.gen_range(0.01..6.0));
            let t = rng.gen_range(0.0..10.0);
            let xi = |x, y| psi2d(&packet, x, y, t);
            let explicit = xi(x, y) - xi(x, -y) - xi(-x, y) + xi(-x, -y);
            let value = psi_wedge(&system, x, y, t);
            assert!(
                (value - explicit).norm() <= 1e-12 * explicit.norm().max(1e-300),
                "{value} {explicit}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let packet = GaussianPacket2D::isotropic((4.0, 2.0), (0.5, 0.2), 1.2, 1.0, 1.0).unwrap();
        let system = WedgeSystem::new(3, packet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        let mut checked = 0;
        while checked < 100 {
            let (x, y) = random_interior(&mut rng, &system, 8.0);
            let t = rng.gen_range(0.0..4.0);
            if !(system.contains(x - h, y)
                && system.contains(x + h, y)
                && system.contains(x, y - h)
                && system.contains(x, y + h))
            {
                continue;
            }
            let (gx, gy) = grad_psi_wedge(&system, x, y, t).unwrap();
            let fx =
                (psi_wedge(&system, x + h, y, t) - psi_wedge(&system, x - h, y, t)) / (2.0 * h);
            let fy =
                (psi_wedge(&system, x, y + h, t) - psi_wedge(&system, x, y - h, t)) / (2.0 * h);
            let scale = gx.norm().max(gy.norm());
            if scale < 1e-4 {
                continue;
            }
            assert!((gx - fx).norm() / scale < 1e-6, "{gx} {fx}");
            assert!((gy - fy).norm() / scale < 1e-6, "{gy} {fy}");
            checked += 1;
        }
    }

    #[test]
    fn gradient_rejects_exterior() {
        let system = fig2_system();
        assert!(matches!(
            grad_psi_wedge(&system, 1.0, 0.0, 0.0),
            Err(Error::OutsideWedge { .. })
        ));
        assert!(grad_psi_wedge(&system, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn gradient_vanishes_at_isolated_center() {
        let system = fig2_system();
        let (gx, gy) = grad_psi_wedge(&system, 5.0, 3.0, 0.0).unwrap();
        assert!(gx.norm().hypot(gy.norm()) < 1e-6);
    }

    #[test]
    fn mirror_gradient_at_seed_peak_is_mirror_term() {
        // N = 1: d/dx of psi(x) - psi(-x) at x0 is only the mirror term's slope
        let packet = GaussianPacket2D::isotropic((1.5, 0.8), (0.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        let system = WedgeSystem::new(1, packet).unwrap();
        let (_, gy) = grad_psi_wedge(&system, 1.5, 0.8, 0.0).unwrap();
        let fx = crate::gaussian::psi1d(&packet.px_params, 1.5, 0.0);
        let expected = fx * crate::gaussian::dpsi1d_dx(&packet.py_params, -0.8, 0.0);
        assert!(expected.norm() > 1e-3);
        assert_abs_diff_eq!((gy - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn density_masks_exterior() {
        let system = fig2_system();
        let spec = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 41, 41).unwrap();
        let grid = density_grid(&system, &spec, 3.0);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (x, y) = (spec.x(i), spec.y(j));
                if !inside_wedge(3, x, y) {
                    assert_eq!(grid.get(i, j), 0.0);
                } else {
                    assert!(grid.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn density_peak_at_start() {
        let system = fig2_system();
        let spec = GridSpec::new(0.0, 12.0, 0.0, 10.0, 241, 201).unwrap();
        let grid = density_grid(&system, &spec, 0.0);
        let (i, j) = grid.argmax();
        assert_abs_diff_eq!(spec.x(i), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.y(j), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.max(), 1.0 / std::f64::consts::PI, epsilon = 1e-6);
    }

    #[test]
    fn residual_is_small_and_second_order() {
        let system = fig2_system();
        let peak = system.packet.peak_modulus(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut coarse, mut fine) = (0.0, 0.0);
        for _ in 0..30 {
            let x = rng.gen_range(3.5..6.5);
            let y = rng.gen_range(1.5..4.0);
            let t = rng.gen_range(0.0..3.0);
            let r = schrodinger_residual(&system, x, y, t, 1e-3).unwrap();
            assert!(r < 1e-5 * peak);
            coarse += schrodinger_residual(&system, x, y, t, 2e-2).unwrap();
            fine += schrodinger_residual(&system, x, y, t, 1e-2).unwrap();
        }
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn residual_rejects_stencil_outside() {
        let system = fig2_system();
        assert!(schrodinger_residual(&system, 1.0, 0.0005, 0.0, 1e-3).is_err());
    }

    #[test]
    fn corrupted_sign_still_solves_pde_but_breaks_boundary() {
        let mut system = fig2_system();
        system.terms[3].sign = system.terms[3].sign.flipped();
        let peak = system.packet.peak_modulus(0.0);
        let r = schrodinger_residual(&system, 4.0, 2.0, 1.0, 1e-3).unwrap();
        assert!(r < 1e-5 * peak);
        let worst = (1..100)
            .map(|k| image_sum(&system, 0.1 * k as f64, 0.0, 2.0).norm())
            .fold(0.0, f64::max);
        assert!(worst > 1e-6 * peak);
    }

    #[test]
    fn linear_in_amplitude() {
        let system = fig2_system();
        let c = Complex64::new(0.3, -1.7);
        let mut scaled = system.clone();
        scaled.packet = scaled.packet.scaled(c);
        for &(x, y, t) in &[(5.0, 3.0, 0.0), (2.0, 1.0, 4.0), (7.0, 0.5, 12.0)] {
            let a = psi_wedge(&scaled, x, y, t);
            let b = psi_wedge(&system, x, y, t) * c;
            assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300));
        }
    }
}
