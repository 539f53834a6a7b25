//! Signed image sets for the wedge `0 < theta < pi/N`.
//!
//! The image set is the dihedral group of order `2N`: the rotations by
//! `2 pi k / N` (sign `+1`) and the same rotations composed with the mirror
//! `y -> -y` (sign `-1`). An image term `(Q, s)` contributes `s * psi(Q v)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::gaussian::GaussianPacket2D;

/// Tolerance for group-structure checks on floating-point matrices.
pub const CLOSURE_TOLERANCE: f64 = 1e-10;

/// `(cos, sin)` of `(pi / 2) * rem / n` for `0 <= rem < n`.
fn quarter_cos_sin(rem: usize, n: usize) -> (f64, f64) {
    let half_root3 = 3f64.sqrt() / 2.0;
    if rem == 0 {
        (1.0, 0.0)
    } else if 2 * rem == n {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if 3 * rem == n {
        (half_root3, 0.5)
    } else if 3 * rem == 2 * n {
        (0.5, half_root3)
    } else if 2 * rem > n {
        let (c, s) = quarter_cos_sin(n - rem, n);
        (s, c)
    } else {
        let (s, c) = (FRAC_PI_2 * rem as f64 / n as f64).sin_cos();
        (c, s)
    }
}

/// Linear isometry of the plane, `(x, y) -> (a x + b y, c x + d y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneIsometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PlaneIsometry {
    pub const IDENTITY: PlaneIsometry = PlaneIsometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Mirror across the x axis, `(x, y) -> (x, -y)`.
    pub const MIRROR_X_AXIS: PlaneIsometry = PlaneIsometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: -1.0,
    };

    /// Counter-clockwise rotation by `phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        PlaneIsometry {
            a: c,
            b: -s,
            c: s,
            d: c,
        }
    }

    /// Rotation by `k / n` of a full turn.
    ///
    /// The angle is reduced to the first quadrant in integer arithmetic and
    /// multiples of 30 and 45 degrees use exact values, so entries are
    /// correctly rounded and symmetries such as `cos(pi - a) = -cos(a)` hold
    /// bit for bit.
    pub fn rotation_turns(k: usize, n: usize) -> Self {
        assert!(n > 0, "turn denominator must be positive");
        let k = k % n;
        let quadrant = 4 * k / n;
        let rem = 4 * k - quadrant * n;
        let (c, s) = quarter_cos_sin(rem, n);
        let (c, s) = match quadrant {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        };
        PlaneIsometry {
            a: c,
            b: -s,
            c: s,
            d: c,
        }
    }

    /// Reflection across the line through the origin at polar angle `phi`.
    pub fn reflection_about(phi: f64) -> Self {
        let (s, c) = (2.0 * phi).sin_cos();
        PlaneIsometry {
            a: c,
            b: s,
            c: s,
            d: -c,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    /// Transpose action, used to pull gradients back through the map.
    #[inline]
    pub fn apply_transpose<T>(&self, gx: T, gy: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        (gx * self.a + gy * self.c, gx * self.b + gy * self.d)
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &PlaneIsometry) -> PlaneIsometry {
        PlaneIsometry {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn transpose(&self) -> PlaneIsometry {
        PlaneIsometry {
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Largest violation of `Q^T Q = I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let cols = [
            (self.a * self.a + self.c * self.c - 1.0).abs(),
            (self.b * self.b + self.d * self.d - 1.0).abs(),
            (self.a * self.b + self.c * self.d).abs(),
        ];
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Entrywise max-abs distance.
    pub fn distance(&self, other: &PlaneIsometry) -> f64 {
        [
            (self.a - other.a).abs(),
            (self.b - other.b).abs(),
            (self.c - other.c).abs(),
            (self.d - other.d).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Sign attached to an image term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageTerm {
    pub isometry: PlaneIsometry,
    pub sign: Sign,
}

/// The `2N` image terms for the wedge of opening `pi/N`.
///
/// Order: rotation by `2 pi k / N`, then its mirrored partner, `k` ascending,
/// so the identity comes first.
pub fn build_wedge_images(n_wedge: usize) -> Result<Vec<ImageTerm>> {
    if n_wedge < 1 {
        return Err(Error::invalid("n_wedge", "must be at least 1"));
    }
    let mut terms = Vec::with_capacity(2 * n_wedge);
    for k in 0..n_wedge {
        let rotation = if k == 0 {
            PlaneIsometry::IDENTITY
        } else {
            PlaneIsometry::rotation_turns(k, n_wedge)
        };
        terms.push(ImageTerm {
            isometry: rotation,
            sign: Sign::Plus,
        });
        terms.push(ImageTerm {
            isometry: rotation.compose(&PlaneIsometry::MIRROR_X_AXIS),
            sign: Sign::Minus,
        });
    }
    Ok(terms)
}

/// Opening angle `pi / N`.
pub fn wedge_angle(n_wedge: usize) -> f64 {
    PI / n_wedge as f64
}

/// Strict interior test: `r > 0` and `0 < theta < pi/N`. Walls are outside.
#[inline]
pub fn inside_wedge(n_wedge: usize, x: f64, y: f64) -> bool {
    if n_wedge == 0 || !(y > 0.0) {
        return false;
    }
    let theta = y.atan2(x);
    theta < wedge_angle(n_wedge)
}

/// Closed wedge including both walls and the apex.
#[inline]
pub(crate) fn inside_closed_wedge(n_wedge: usize, x: f64, y: f64) -> bool {
    if n_wedge == 0 || y < 0.0 || !x.is_finite() || !y.is_finite() {
        return false;
    }
    if y == 0.0 {
        return x >= 0.0 || n_wedge == 1;
    }
    y.atan2(x) <= wedge_angle(n_wedge)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosureFailure {
    Empty,
    IdentityNotFirst,
    NotOrthogonal {
        index: usize,
        defect: f64,
    },
    SignMismatch {
        index: usize,
        sign: Sign,
        det: f64,
    },
    DetSplit {
        plus: usize,
        minus: usize,
    },
    NotClosed {
        left: usize,
        right: usize,
        deviation: f64,
    },
}

impl std::fmt::Display for ClosureFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosureFailure::Empty => write!(f, "empty term list"),
            ClosureFailure::IdentityNotFirst => write!(f, "first term is not the +1 identity"),
            ClosureFailure::NotOrthogonal { index, defect } => {
                write!(f, "term {index} is not orthogonal (defect {defect:e})")
            }
            ClosureFailure::SignMismatch { index, sign, det } => {
                write!(
                    f,
                    "term {index}: sign {} does not match det {det}",
                    sign.symbol()
                )
            }
            ClosureFailure::DetSplit { plus, minus } => {
                write!(f, "det split {plus}/{minus}, expected equal halves")
            }
            ClosureFailure::NotClosed {
                left,
                right,
                deviation,
            } => write!(
                f,
                "term {left} ∘ term {right} not in the set (deviation {deviation:e})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub passed: bool,
    /// Worst entrywise deviation over orthogonality and composition checks.
    pub max_deviation: f64,
    pub failures: Vec<ClosureFailure>,
}

impl ClosureReport {
    pub fn has_sign_mismatch(&self) -> bool {
        self.failures
            .iter()
            .any(|f| matches!(f, ClosureFailure::SignMismatch { .. }))
    }
}

/// Checks group closure, `sign == det`, and the `N + N` determinant split.
pub fn verify_closure(terms: &[ImageTerm]) -> ClosureReport {
    let mut failures = Vec::new();
    let mut max_deviation: f64 = 0.0;

    if terms.is_empty() {
        return ClosureReport {
            passed: false,
            max_deviation: f64::INFINITY,
            failures: vec![ClosureFailure::Empty],
        };
    }

    let first = &terms[0];
    let identity_dev = first.isometry.distance(&PlaneIsometry::IDENTITY);
    max_deviation = max_deviation.max(identity_dev);
    if identity_dev > CLOSURE_TOLERANCE || first.sign != Sign::Plus {
        failures.push(ClosureFailure::IdentityNotFirst);
    }

    let (mut plus, mut minus) = (0, 0);
    for (index, term) in terms.iter().enumerate() {
        let defect = term.isometry.orthogonality_defect();
        max_deviation = max_deviation.max(defect);
        if defect > CLOSURE_TOLERANCE {
            failures.push(ClosureFailure::NotOrthogonal { index, defect });
        }
        let det = term.isometry.det();
        if det > 0.0 {
            plus += 1;
        } else {
            minus += 1;
        }
        let det_sign = if det > 0.0 { Sign::Plus } else { Sign::Minus };
        max_deviation = max_deviation.max((det.abs() - 1.0).abs());
        if det_sign != term.sign || (det.abs() - 1.0).abs() > CLOSURE_TOLERANCE {
            failures.push(ClosureFailure::SignMismatch {
                index,
                sign: term.sign,
                det,
            });
        }
    }
    if plus != minus {
        failures.push(ClosureFailure::DetSplit { plus, minus });
    }

    for (left, l) in terms.iter().enumerate() {
        for (right, r) in terms.iter().enumerate() {
            let product = l.isometry.compose(&r.isometry);
            let deviation = terms
                .iter()
                .map(|t| t.isometry.distance(&product))
                .fold(f64::INFINITY, f64::min);
            max_deviation = max_deviation.max(deviation);
            if deviation > CLOSURE_TOLERANCE {
                failures.push(ClosureFailure::NotClosed {
                    left,
                    right,
                    deviation,
                });
            }
        }
    }

    ClosureReport {
        passed: failures.is_empty(),
        max_deviation,
        failures,
    }
}

/// Wedge index, its image terms and the seed packet.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeSystem {
    pub n_wedge: usize,
    pub terms: Vec<ImageTerm>,
    pub packet: GaussianPacket2D,
}

impl WedgeSystem {
    pub fn new(n_wedge: usize, packet: GaussianPacket2D) -> Result<Self> {
        packet.validate()?;
        Ok(WedgeSystem {
            n_wedge,
            terms: build_wedge_images(n_wedge)?,
            packet,
        })
    }

    /// Assemble without validating the terms; see [`verify_closure`].
    pub fn from_parts(n_wedge: usize, terms: Vec<ImageTerm>, packet: GaussianPacket2D) -> Self {
        WedgeSystem {
            n_wedge,
            terms,
            packet,
        }
    }

    pub fn angle(&self) -> f64 {
        wedge_angle(self.n_wedge)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        inside_wedge(self.n_wedge, x, y)
    }

    /// Centers of every image packet at time `t` (the seed's is first).
    pub fn image_centers(&self, t: f64) -> Vec<(f64, f64)> {
        let (cx, cy) = self.packet.center();
        let (px, py) = self.packet.momentum();
        let m = self.packet.m();
        let (cx, cy) = (cx + px * t / m, cy + py * t / m);
        self.terms
            .iter()
            .map(|term| term.isometry.transpose().apply(cx, cy))
            .collect()
    }
}
