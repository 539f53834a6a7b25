//! Free-particle Gaussian packets in one and two dimensions.
//!
//! The 1D packet is
//!
//! ```text
//! psi(x,t) = [sqrt(pi) beta (1 + i t/t0)]^(-1/2)
//!            * exp(i p0 (x - x0)/hbar) * exp(-i p0^2 t / (2 m hbar))
//!            * exp(-(x - x0 - p0 t/m)^2 / (2 beta^2 (1 + i t/t0)))
//! ```
//!
//! with `t0 = m beta^2 / hbar`. Products of two such packets solve the free
//! Schrödinger equation in the plane.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters of a one-dimensional Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams1D {
    pub x0: f64,
    pub p0: f64,
    pub beta: f64,
    pub m: f64,
    pub hbar: f64,
}

/// Scales derived from [`PacketParams1D`]; recomputed on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Spreading time `m beta^2 / hbar`.
    pub t0: f64,
    /// Initial position spread `beta / sqrt(2)`.
    pub dx0: f64,
    /// Initial momentum spread `hbar / (beta sqrt(2))`.
    pub dp0: f64,
    /// Inverse momentum scale `beta / hbar`.
    pub alpha: f64,
}

impl PacketParams1D {
    pub fn new(x0: f64, p0: f64, beta: f64, m: f64, hbar: f64) -> Result<Self> {
        let params = PacketParams1D {
            x0,
            p0,
            beta,
            m,
            hbar,
        };
        params.validate()?;
        Ok(params)
    }

    /// Natural units `beta = m = hbar = 1`.
    pub fn natural(x0: f64, p0: f64) -> Self {
        PacketParams1D {
            x0,
            p0,
            beta: 1.0,
            m: 1.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("beta", self.beta)?;
        positive("m", self.m)?;
        positive("hbar", self.hbar)?;
        if !self.x0.is_finite() {
            return Err(Error::invalid("x0", "must be finite"));
        }
        if !self.p0.is_finite() {
            return Err(Error::invalid("p0", "must be finite"));
        }
        Ok(())
    }

    pub fn scales(&self) -> DerivedScales {
        derived_scales(self)
    }

    /// Position spread at time `t`: `dx0 * sqrt(1 + (t/t0)^2)`.
    pub fn width_at(&self, t: f64) -> f64 {
        let s = self.scales();
        s.dx0 * (1.0 + (t / s.t0).powi(2)).sqrt()
    }

    /// Classical center `x0 + p0 t / m`.
    pub fn center_at(&self, t: f64) -> f64 {
        self.x0 + self.p0 * t / self.m
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

pub fn derived_scales(params: &PacketParams1D) -> DerivedScales {
    let PacketParams1D { beta, m, hbar, .. } = *params;
    DerivedScales {
        t0: m * beta * beta / hbar,
        dx0: beta / 2f64.sqrt(),
        dp0: hbar / (beta * 2f64.sqrt()),
        alpha: beta / hbar,
    }
}

// Shared pieces of psi1d and its derivative: (psi, x - x0 - p0 t/m, 1 + i t/t0).
#[inline]
fn psi1d_parts(params: &PacketParams1D, x: f64, t: f64) -> (Complex64, f64, Complex64) {
    let PacketParams1D {
        x0,
        p0,
        beta,
        m,
        hbar,
    } = *params;
    let t0 = m * beta * beta / hbar;
    let z = Complex64::new(1.0, t / t0);
    let shift = x - x0 - p0 * t / m;

    // principal branch; Re z = 1 keeps z away from the cut
    let prefactor = (PI.sqrt() * beta * z).sqrt().inv();
    let phase = p0 * (x - x0) / hbar - p0 * p0 * t / (2.0 * m * hbar);
    let exponent = Complex64::new(0.0, phase) - shift * shift / (2.0 * beta * beta * z);
    (prefactor * exponent.exp(), shift, z)
}

pub fn psi1d(params: &PacketParams1D, x: f64, t: f64) -> Complex64 {
    psi1d_parts(params, x, t).0
}

/// Analytic `d psi1d / dx`.
pub fn dpsi1d_dx(params: &PacketParams1D, x: f64, t: f64) -> Complex64 {
    let (psi, shift, z) = psi1d_parts(params, x, t);
    let factor =
        Complex64::new(0.0, params.p0 / params.hbar) - shift / (params.beta * params.beta * z);
    factor * psi
}

/// Value and x-derivative in one evaluation.
#[inline]
pub fn psi1d_with_derivative(params: &PacketParams1D, x: f64, t: f64) -> (Complex64, Complex64) {
    let (psi, shift, z) = psi1d_parts(params, x, t);
    let factor =
        Complex64::new(0.0, params.p0 / params.hbar) - shift / (params.beta * params.beta * z);
    (psi, factor * psi)
}

/// Product packet `amplitude * psi_x(x,t) * psi_y(y,t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket2D {
    pub px_params: PacketParams1D,
    pub py_params: PacketParams1D,
    /// Global complex prefactor, 1 for a normalized packet.
    pub amplitude: Complex64,
}

impl GaussianPacket2D {
    pub fn new(px_params: PacketParams1D, py_params: PacketParams1D) -> Result<Self> {
        let packet = GaussianPacket2D {
            px_params,
            py_params,
            amplitude: Complex64::new(1.0, 0.0),
        };
        packet.validate()?;
        Ok(packet)
    }

    /// Isotropic packet sharing `beta`, `m` and `hbar` between both axes.
    pub fn isotropic(
        center: (f64, f64),
        momentum: (f64, f64),
        beta: f64,
        m: f64,
        hbar: f64,
    ) -> Result<Self> {
        Self::new(
            PacketParams1D::new(center.0, momentum.0, beta, m, hbar)?,
            PacketParams1D::new(center.1, momentum.1, beta, m, hbar)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.px_params.validate()?;
        self.py_params.validate()?;
        if self.px_params.m != self.py_params.m {
            return Err(Error::invalid(
                "m",
                "x and y components must share the mass",
            ));
        }
        if self.px_params.hbar != self.py_params.hbar {
            return Err(Error::invalid("hbar", "x and y components must share hbar"));
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        Ok(())
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.amplitude *= c;
        self
    }

    pub fn m(&self) -> f64 {
        self.px_params.m
    }

    pub fn hbar(&self) -> f64 {
        self.px_params.hbar
    }

    pub fn center(&self) -> (f64, f64) {
        (self.px_params.x0, self.py_params.x0)
    }

    pub fn momentum(&self) -> (f64, f64) {
        (self.px_params.p0, self.py_params.p0)
    }

    /// Largest of the two axis widths at time `t`.
    pub fn max_width_at(&self, t: f64) -> f64 {
        self.px_params.width_at(t).max(self.py_params.width_at(t))
    }

    pub fn min_beta(&self) -> f64 {
        self.px_params.beta.min(self.py_params.beta)
    }

    /// Peak modulus of the packet at time `t`.
    pub fn peak_modulus(&self, t: f64) -> f64 {
        let peak = |p: &PacketParams1D| {
            let s = p.scales();
            (PI.sqrt() * p.beta * (1.0 + (t / s.t0).powi(2)).sqrt())
                .sqrt()
                .recip()
        };
        self.amplitude.norm() * peak(&self.px_params) * peak(&self.py_params)
    }
}

pub fn psi2d(packet: &GaussianPacket2D, x: f64, y: f64, t: f64) -> Complex64 {
    packet.amplitude * psi1d(&packet.px_params, x, t) * psi1d(&packet.py_params, y, t)
}

/// Value and gradient `(psi, d/dx, d/dy)` of the product packet.
#[inline]
pub fn psi2d_with_gradient(
    packet: &GaussianPacket2D,
    x: f64,
    y: f64,
    t: f64,
) -> (Complex64, Complex64, Complex64) {
    let (fx, dfx) = psi1d_with_derivative(&packet.px_params, x, t);
    let (fy, dfy) = psi1d_with_derivative(&packet.py_params, y, t);
    let a = packet.amplitude;
    (a * fx * fy, a * dfx * fy, a * fx * dfy)
}

/// Momentum-space amplitude of a zero-momentum free packet.
pub fn phi1d_free(params: &PacketParams1D, p: f64, t: f64) -> Result<Complex64> {
    if params.p0 != 0.0 {
        return Err(Error::NonZeroMomentum(params.p0));
    }
    let alpha = params.beta / params.hbar;
    let norm = (alpha / PI.sqrt()).sqrt();
    let envelope = (-alpha * alpha * p * p / 2.0).exp();
    let phase = -p * p * t / (2.0 * params.m * params.hbar) - p * params.x0 / params.hbar;
    Ok(Complex64::from_polar(norm * envelope, phase))
}
