//! Zero-momentum packet released next to a single hard wall at `x = 0`.
//!
//! The mirror wavefunction `psi(x,t) - psi(-x,t)` (zero for `x < 0`) is
//! transformed numerically to momentum space. Its long-time limit is
//! compared against `(4 alpha / sqrt(pi)) sin^2(p x0 / hbar) exp(-alpha^2 p^2)`
//! for `p > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gaussian::{dpsi1d_dx, psi1d, PacketParams1D};
use crate::observables::check_increasing;

/// Smallest accepted transform length.
pub const MIN_SAMPLES: usize = 1 << 12;
/// Default transform length.
pub const DEFAULT_SAMPLES: usize = 1 << 16;
/// Position window in units of the current width beyond `x0`.
pub const DEFAULT_X_SIGMA: f64 = 12.0;
/// Momentum window half-width in units of `1 / alpha`.
pub const P_WINDOW_ALPHAS: f64 = 8.0;
/// Nyquist momentum as a multiple of the statistics window.
const OVERSAMPLING: f64 = 8.0;
/// Largest allowed `|psi(x_max)|` relative to the packet peak.
const TAIL_TOLERANCE: f64 = 1e-8;

fn require_mirror_params(params: &PacketParams1D) -> Result<()> {
    params.validate()?;
    if params.p0 != 0.0 {
        return Err(Error::NonZeroMomentum(params.p0));
    }
    if !(params.x0 > 0.0) {
        return Err(Error::invalid(
            "x0",
            "packet must start inside the half line (x0 > 0)",
        ));
    }
    Ok(())
}

/// `psi(x,t) - psi(-x,t)` for `x >= 0`, zero otherwise.
pub fn mirror_psi1d(params: &PacketParams1D, x: f64, t: f64) -> Result<Complex64> {
    require_mirror_params(params)?;
    Ok(mirror_value(params, x, t))
}

#[inline]
fn mirror_value(params: &PacketParams1D, x: f64, t: f64) -> Complex64 {
    if x < 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        psi1d(params, x, t) - psi1d(params, -x, t)
    }
}

/// Approximate long-time momentum density; zero for `p <= 0`.
pub fn longterm_momentum_density(params: &PacketParams1D, p: f64) -> Result<f64> {
    if params.p0 != 0.0 {
        return Err(Error::NonZeroMomentum(params.p0));
    }
    Ok(longterm_value(params, p))
}

fn longterm_value(params: &PacketParams1D, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let alpha = params.beta / params.hbar;
    let s = (p * params.x0 / params.hbar).sin();
    4.0 * alpha / PI.sqrt() * s * s * (-alpha * alpha * p * p).exp()
}

/// Long-time `(mean_p, spread_p)` with `sin^2` replaced by its average.
pub fn longterm_expectations(params: &PacketParams1D) -> Result<(f64, f64)> {
    if params.p0 != 0.0 {
        return Err(Error::NonZeroMomentum(params.p0));
    }
    let alpha = params.beta / params.hbar;
    let mean = 1.0 / (alpha * PI.sqrt());
    let spread = ((PI - 2.0) / (2.0 * PI * alpha * alpha)).sqrt();
    Ok((mean, spread))
}

/// Sampled momentum density with its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDensity1D {
    pub t: f64,
    pub p_samples: Vec<f64>,
    /// Normalized to unit trapezoid integral over `p_samples`.
    pub density: Vec<f64>,
    pub mean_p: f64,
    pub spread_p: f64,
    pub mean_p2: f64,
    /// Integral of the density before normalization.
    pub raw_norm: f64,
}

impl MomentumDensity1D {
    fn spacing(&self) -> f64 {
        self.p_samples[1] - self.p_samples[0]
    }

    /// Trapezoid integral of `f(p) * density(p)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        trapezoid(
            self.spacing(),
            self.p_samples
                .iter()
                .zip(&self.density)
                .map(|(&p, &d)| f(p) * d),
        )
    }

    /// Probability carried by `p < 0`.
    pub fn negative_mass(&self) -> f64 {
        self.integrate(|p| if p < 0.0 { 1.0 } else { 0.0 })
    }

    /// Smallest density sample with `|p - center| <= half_width`.
    pub fn local_minimum_near(&self, center: f64, half_width: f64) -> Option<(f64, f64)> {
        self.extremum_in(center - half_width, center + half_width, |a, b| a < b)
    }

    /// Largest density sample with `lo <= p <= hi`.
    pub fn maximum_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.extremum_in(lo, hi, |a, b| a > b)
    }

    fn extremum_in(
        &self,
        lo: f64,
        hi: f64,
        better: impl Fn(f64, f64) -> bool,
    ) -> Option<(f64, f64)> {
        self.p_samples
            .iter()
            .zip(&self.density)
            .filter(|(&p, _)| p >= lo && p <= hi)
            .fold(None, |best: Option<(f64, f64)>, (&p, &d)| match best {
                Some((_, bd)) if !better(d, bd) => best,
                _ => Some((p, d)),
            })
    }

    /// `int |rho - rho_longterm| / int rho_longterm` over the sampled window.
    pub fn longterm_deviation(&self, params: &PacketParams1D) -> Result<f64> {
        if params.p0 != 0.0 {
            return Err(Error::NonZeroMomentum(params.p0));
        }
        let h = self.spacing();
        let diff = trapezoid(
            h,
            self.p_samples
                .iter()
                .zip(&self.density)
                .map(|(&p, &d)| (d - longterm_value(params, p)).abs()),
        );
        let reference = trapezoid(h, self.p_samples.iter().map(|&p| longterm_value(params, p)));
        Ok(diff / reference)
    }
}

fn trapezoid(h: f64, values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for (k, v) in values.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    sum * h
}

/// Transform settings for [`momentum_stats_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSettings {
    /// Position cutoff; `None` uses `x0 + 12 dx_t` per time.
    pub x_max: Option<f64>,
    pub n_samples: usize,
}

impl Default for TransformSettings {
    fn default() -> Self {
        TransformSettings {
            x_max: None,
            n_samples: DEFAULT_SAMPLES,
        }
    }
}

/// `x0 + 12 dx_t`.
pub fn default_x_max(params: &PacketParams1D, t: f64) -> f64 {
    params.x0 + DEFAULT_X_SIGMA * params.width_at(t)
}

/// Half-line Fourier transform of the mirror wavefunction.
///
/// `psi` is sampled at `x_j = j dx` on `[0, x_max]` and continued by zeros
/// to `n_samples` points. The spacing fixes the Nyquist momentum at eight
/// times the `±8/alpha` statistics window, so `n_samples` only sets the
/// momentum resolution `2 pi hbar / (n dx)`. The trapezoid sum carries the
/// Euler-Maclaurin endpoint correction for the kink of the zero continuation
/// at `x = 0`.
pub fn momentum_density_fft(
    params: &PacketParams1D,
    t: f64,
    x_max: f64,
    n_samples: usize,
) -> Result<MomentumDensity1D> {
    require_mirror_params(params)?;
    if n_samples < MIN_SAMPLES || !n_samples.is_power_of_two() {
        return Err(Error::TransformWindow(format!(
            "n_samples must be a power of two >= {MIN_SAMPLES}, got {n_samples}"
        )));
    }
    if !(x_max > params.x0) || !x_max.is_finite() {
        return Err(Error::TransformWindow(format!(
            "x_max = {x_max} does not cover x0"
        )));
    }
    let peak = (PI.sqrt() * params.beta * (1.0 + (t / params.scales().t0).powi(2)).sqrt())
        .sqrt()
        .recip();
    let edge = mirror_value(params, x_max, t).norm();
    if edge > TAIL_TOLERANCE * peak {
        return Err(Error::TransformWindow(format!(
            "|psi(x_max)| = {edge:e} exceeds {TAIL_TOLERANCE:e} of the peak; enlarge x_max"
        )));
    }

    let hbar = params.hbar;
    let alpha = params.beta / hbar;
    let p_max = P_WINDOW_ALPHAS / alpha;
    let dx = PI * hbar / (OVERSAMPLING * p_max);
    let n_in = (x_max / dx).floor() as usize + 1;
    if n_in > n_samples {
        return Err(Error::TransformWindow(format!(
            "x_max = {x_max} needs {n_in} samples at dx = {dx}, only {n_samples} available"
        )));
    }

    let mut buffer: Vec<Complex64> = (0..n_samples)
        .map(|j| {
            if j < n_in {
                mirror_value(params, j as f64 * dx, t) * dx
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    // x = 0 carries trapezoid weight 1/2 (psi vanishes there anyway)
    buffer[0] *= 0.5;
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n_samples).process(&mut buffer);

    // psi(x) - psi(-x) has slope 2 psi'(0) at the wall and vanishes there
    let wall_slope = dpsi1d_dx(params, 0.0, t) * 2.0;
    let slope = wall_slope * (dx * dx / 12.0);
    let scale = (2.0 * PI * hbar).sqrt().recip();

    let dp = 2.0 * PI * hbar / (n_samples as f64 * dx);
    let k_max = (p_max / dp).floor() as i64;
    let n = n_samples as i64;
    let mut p_samples = Vec::with_capacity((2 * k_max + 1) as usize);
    let mut density = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        let idx = k.rem_euclid(n) as usize;
        let phi = (buffer[idx] + slope) * scale;
        p_samples.push(k as f64 * dp);
        density.push(phi.norm_sqr());
    }

    let raw_norm = trapezoid(dp, density.iter().copied());
    for d in density.iter_mut() {
        *d /= raw_norm;
    }
    let mut result = MomentumDensity1D {
        t,
        p_samples,
        density,
        mean_p: 0.0,
        spread_p: 0.0,
        mean_p2: 0.0,
        raw_norm,
    };
    // Beyond the window the density follows the wall-kink tail
    // hbar^3 |psi'(0)|^2 / (2 pi p^4), even in p to leading order.
    let edge = k_max as f64 * dp;
    let c = hbar.powi(3) * wall_slope.norm_sqr() / PI;
    let tail_mass = c / (3.0 * edge.powi(3)) / raw_norm;
    let tail_p2 = c / edge / raw_norm;
    let total = 1.0 + tail_mass;
    result.mean_p = result.integrate(|p| p) / total;
    result.mean_p2 = (result.integrate(|p| p * p) + tail_p2) / total;
    result.spread_p = (result.mean_p2 - result.mean_p * result.mean_p)
        .max(0.0)
        .sqrt();
    Ok(result)
}

pub fn momentum_stats_series(
    params: &PacketParams1D,
    times: &[f64],
    settings: &TransformSettings,
) -> Result<Vec<MomentumDensity1D>> {
    require_mirror_params(params)?;
    check_increasing(times)?;
    times
        .par_iter()
        .map(|&t| {
            let x_max = settings.x_max.unwrap_or_else(|| default_x_max(params, t));
            momentum_density_fft(params, t, x_max, settings.n_samples)
        })
        .collect()
}

/// Position density of the mirror wavefunction, for side-by-side plots.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDensity1D {
    pub t: f64,
    pub x_samples: Vec<f64>,
    pub density: Vec<f64>,
    pub norm: f64,
    pub mean_x: f64,
}

pub fn mirror_position_density(
    params: &PacketParams1D,
    t: f64,
    x_max: f64,
    n: usize,
) -> Result<PositionDensity1D> {
    require_mirror_params(params)?;
    if n < 2 || !(x_max > 0.0) {
        return Err(Error::invalid(
            "x_max",
            "need x_max > 0 and at least two samples",
        ));
    }
    let h = x_max / (n - 1) as f64;
    let x_samples: Vec<f64> = (0..n)
        .map(|j| x_max * (j as f64 / (n - 1) as f64))
        .collect();
    let density: Vec<f64> = x_samples
        .iter()
        .map(|&x| mirror_value(params, x, t).norm_sqr())
        .collect();
    let norm = trapezoid(h, density.iter().copied());
    let mean_x = trapezoid(h, x_samples.iter().zip(&density).map(|(x, d)| x * d)) / norm;
    Ok(PositionDensity1D {
        t,
        x_samples,
        density,
        norm,
        mean_x,
    })
}
