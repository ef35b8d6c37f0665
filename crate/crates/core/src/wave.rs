//! Points, wave context and the complex scalar used throughout.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64;

use crate::error::{CloakError, Result};

/// A complex-valued 2-vector, used for field gradients.
pub type CVec2 = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point2 { x: r * c, y: r * s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Counterclockwise angle from (1, 0), in (-pi, pi].
    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// (x, y) -> (-y, x)
    pub fn perp(self) -> Self {
        Point2 {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point2 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Dot product of a real direction with a complex 2-vector.
pub fn dot_c(n: Point2, v: CVec2) -> Complex64 {
    v[0] * n.x + v[1] * n.y
}

/// Fixed-frequency wave context: the wavenumber `k`, with wavelength `2 pi / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    k: f64,
}

impl WaveContext {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(CloakError::invalid("k", format!("wavenumber must be positive, got {k}")));
        }
        Ok(WaveContext { k })
    }

    pub fn from_wavelength(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(CloakError::invalid(
                "wavelength",
                format!("must be positive, got {lambda}"),
            ));
        }
        Self::new(2.0 * PI / lambda)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}
