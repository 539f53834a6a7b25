//! Masked trapezoid quadrature over the wedge.
//!
//! Every expectation is divided by the norm computed on the same grid, so the
//! exponentially small normalization defect of the image sum drops out.
//! Rows are summed in parallel, each row in fixed order, and the row sums are
//! combined by a pairwise tree whose shape depends only on the row count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::images::{inside_closed_wedge, WedgeSystem};
use crate::wavefunction::{image_sum, image_sum_with_gradient, GridSpec};

/// Default number of widths covered around each image center.
pub const DEFAULT_K_SIGMA: f64 = 8.0;
/// Grid spacing as a fraction of the smallest `beta`.
pub const DEFAULT_SPACING_FRACTION: f64 = 0.1;
/// Estimated mass outside the grid above which results are flagged.
pub const TAIL_WARNING: f64 = 1e-8;

const N_MOMENTS: usize = 6;

/// Raw trapezoid sums of one grid pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeMoments {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_px: f64,
    pub mean_py: f64,
    pub kinetic: f64,
    /// Rough estimate of the probability outside the grid, relative to norm.
    pub tail_estimate: f64,
}

impl WedgeMoments {
    pub fn tail_warning(&self) -> bool {
        self.tail_estimate > TAIL_WARNING
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pass {
    Density,
    Full,
}

pub(crate) fn pairwise_sum<const K: usize>(items: &[[f64; K]]) -> [f64; K] {
    match items.len() {
        0 => [0.0; K],
        1 => items[0],
        n => {
            let (lo, hi) = items.split_at(n / 2);
            let (a, b) = (pairwise_sum(lo), pairwise_sum(hi));
            let mut out = [0.0; K];
            for k in 0..K {
                out[k] = a[k] + b[k];
            }
            out
        }
    }
}

fn integrate(system: &WedgeSystem, t: f64, spec: &GridSpec, pass: Pass) -> [f64; N_MOMENTS] {
    let n_wedge = system.n_wedge;
    let (nx, ny) = (spec.nx, spec.ny);
    let rows: Vec<[f64; N_MOMENTS]> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = spec.y(j);
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            let mut acc = [0.0; N_MOMENTS];
            for i in 0..nx {
                let x = spec.x(i);
                if !inside_closed_wedge(n_wedge, x, y) {
                    continue;
                }
                let w = wy * if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                match pass {
                    Pass::Density => {
                        let rho = image_sum(system, x, y, t).norm_sqr();
                        acc[0] += w * rho;
                    }
                    Pass::Full => {
                        let (psi, gx, gy) = image_sum_with_gradient(system, x, y, t);
                        let rho = psi.norm_sqr();
                        acc[0] += w * rho;
                        acc[1] += w * x * rho;
                        acc[2] += w * y * rho;
                        acc[3] += w * (psi.conj() * gx).im;
                        acc[4] += w * (psi.conj() * gy).im;
                        acc[5] += w * (gx.norm_sqr() + gy.norm_sqr());
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = pairwise_sum(&rows);
    let cell = spec.dx() * spec.dy();
    for v in total.iter_mut() {
        *v *= cell;
    }
    total
}

/// Mass-weighted density on the outer grid edges times a tail length.
///
/// Edges that lie on a wedge wall carry no tail and are skipped by the mask.
fn tail_estimate(system: &WedgeSystem, t: f64, spec: &GridSpec, norm: f64) -> f64 {
    let width = system.packet.max_width_at(t);
    let rho = |x: f64, y: f64| {
        if inside_closed_wedge(system.n_wedge, x, y) {
            image_sum(system, x, y, t).norm_sqr()
        } else {
            0.0
        }
    };
    let mut edge = 0.0;
    for i in 0..spec.nx {
        let x = spec.x(i);
        if spec.y_min > 0.0 {
            edge += rho(x, spec.y_min) * spec.dx();
        }
        edge += rho(x, spec.y_max) * spec.dx();
    }
    for j in 0..spec.ny {
        let y = spec.y(j);
        if spec.x_min > 0.0 || system.n_wedge == 1 {
            edge += rho(spec.x_min, y) * spec.dy();
        }
        edge += rho(spec.x_max, y) * spec.dy();
    }
    edge * width / norm
}

/// Trapezoid norm of the masked density.
pub fn quad_norm(system: &WedgeSystem, t: f64, spec: &GridSpec) -> f64 {
    integrate(system, t, spec, Pass::Density)[0]
}

/// All first moments and the kinetic energy from a single grid pass.
pub fn wedge_moments(system: &WedgeSystem, t: f64, spec: &GridSpec) -> WedgeMoments {
    let raw = integrate(system, t, spec, Pass::Full);
    let norm = raw[0];
    let hbar = system.packet.hbar();
    let m = system.packet.m();
    WedgeMoments {
        norm,
        mean_x: raw[1] / norm,
        mean_y: raw[2] / norm,
        mean_px: hbar * raw[3] / norm,
        mean_py: hbar * raw[4] / norm,
        kinetic: hbar * hbar / (2.0 * m) * raw[5] / norm,
        tail_estimate: tail_estimate(system, t, spec, norm),
    }
}

pub fn expect_position(system: &WedgeSystem, t: f64, spec: &GridSpec) -> (f64, f64) {
    let m = wedge_moments(system, t, spec);
    (m.mean_x, m.mean_y)
}

/// `hbar Im <psi | grad psi> / norm` from the analytic gradient.
pub fn expect_momentum(system: &WedgeSystem, t: f64, spec: &GridSpec) -> (f64, f64) {
    let m = wedge_moments(system, t, spec);
    (m.mean_px, m.mean_py)
}

/// `(hbar^2 / 2m) int |grad psi|^2 / norm`.
pub fn expect_kinetic(system: &WedgeSystem, t: f64, spec: &GridSpec) -> f64 {
    wedge_moments(system, t, spec).kinetic
}

/// `m (<x>_{t+delta} - <x>_{t-delta}) / (2 delta)` on a fixed grid.
pub fn ehrenfest_momentum(system: &WedgeSystem, t: f64, delta: f64, spec: &GridSpec) -> (f64, f64) {
    let m = system.packet.m();
    let (xp, yp) = expect_position(system, t + delta, spec);
    let (xm, ym) = expect_position(system, t - delta, spec);
    (m * (xp - xm) / (2.0 * delta), m * (yp - ym) / (2.0 * delta))
}

/// Grid covering every image center `± k_sigma` widths, clipped to the
/// quadrant (or half plane for `N = 1`) that contains the wedge.
pub fn auto_grid(system: &WedgeSystem, t: f64, k_sigma: f64) -> Result<GridSpec> {
    auto_grid_with_spacing(system, t, k_sigma, DEFAULT_SPACING_FRACTION)
}

pub fn auto_grid_with_spacing(
    system: &WedgeSystem,
    t: f64,
    k_sigma: f64,
    spacing_fraction: f64,
) -> Result<GridSpec> {
    if !(k_sigma >= 6.0) || !k_sigma.is_finite() {
        return Err(Error::invalid(
            "k_sigma",
            format!("must be at least 6, got {k_sigma}"),
        ));
    }
    if !(spacing_fraction > 0.0) {
        return Err(Error::invalid("spacing", "must be positive"));
    }
    let reach = k_sigma * system.packet.max_width_at(t);
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (cx, cy) in system.image_centers(t) {
        x_min = x_min.min(cx - reach);
        x_max = x_max.max(cx + reach);
        y_min = y_min.min(cy - reach);
        y_max = y_max.max(cy + reach);
    }
    y_min = y_min.max(0.0);
    if system.n_wedge >= 2 {
        x_min = x_min.max(0.0);
    }
    let spacing = spacing_fraction * system.packet.min_beta();
    let count = |lo: f64, hi: f64| ((hi - lo) / spacing).ceil() as usize + 1;
    GridSpec::new(
        x_min,
        x_max,
        y_min,
        y_max,
        count(x_min, x_max),
        count(y_min, y_max),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationRecord {
    pub t: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_px: f64,
    pub mean_py: f64,
    pub kinetic: f64,
    pub tail_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationSeries {
    pub records: Vec<ExpectationRecord>,
}

impl ExpectationSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Times whose tail estimate exceeds [`TAIL_WARNING`].
    pub fn warnings(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.tail_estimate > TAIL_WARNING)
            .map(|r| r.t)
            .collect()
    }
}

pub(crate) fn check_increasing(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("times", "must not be empty"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times", "must be finite"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("times", "must be strictly increasing"));
    }
    Ok(())
}

fn record(system: &WedgeSystem, t: f64, spec: &GridSpec) -> ExpectationRecord {
    let m = wedge_moments(system, t, spec);
    ExpectationRecord {
        t,
        norm: m.norm,
        mean_x: m.mean_x,
        mean_y: m.mean_y,
        mean_px: m.mean_px,
        mean_py: m.mean_py,
        kinetic: m.kinetic,
        tail_estimate: m.tail_estimate,
    }
}

/// One record per time, each on its own [`auto_grid`].
pub fn expectation_series(
    system: &WedgeSystem,
    times: &[f64],
    k_sigma: f64,
) -> Result<ExpectationSeries> {
    check_increasing(times)?;
    let records = times
        .iter()
        .map(|&t| Ok(record(system, t, &auto_grid(system, t, k_sigma)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpectationSeries { records })
}

/// Same as [`expectation_series`] on one fixed grid.
pub fn expectation_series_on(
    system: &WedgeSystem,
    times: &[f64],
    spec: &GridSpec,
) -> Result<ExpectationSeries> {
    check_increasing(times)?;
    spec.validate()?;
    let records = times.iter().map(|&t| record(system, t, spec)).collect();
    Ok(ExpectationSeries { records })
}

/// Estimated probability outside `spec`, relative to the norm on it.
pub fn tail_check(system: &WedgeSystem, t: f64, spec: &GridSpec) -> f64 {
    tail_estimate(system, t, spec, quad_norm(system, t, spec))
}
