#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use cloak_core::fields::{Field, IncidentField, PlaneWave};
use cloak_core::geometry::{equilateral_layout, CloakGeometry, DeviceLayout};
use cloak_core::{fields::plane_wave, CVec2, Complex64, Point2, WaveContext};

pub const INCIDENT_ANGLE: f64 = 5.0 * PI / 13.0;

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `n` low-discrepancy points in the box `[-h, h]^2` satisfying `keep`.
pub fn box_points(h: f64, n: usize, keep: impl Fn(Point2) -> bool) -> Vec<Point2> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1;
    while out.len() < n {
        let p = Point2::new(h * (2.0 * halton(i, 2) - 1.0), h * (2.0 * halton(i, 3) - 1.0));
        if keep(p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// `n` low-discrepancy points uniform in the disk of radius `r` satisfying `keep`.
pub fn disk_points(r: f64, n: usize, keep: impl Fn(Point2) -> bool) -> Vec<Point2> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1;
    while out.len() < n {
        let p = Point2::polar(r * halton(i, 2).sqrt(), TAU * halton(i, 3));
        if keep(p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

pub fn circle_points(r: f64, n: usize) -> Vec<Point2> {
    (0..n).map(|i| Point2::polar(r, TAU * i as f64 / n as f64)).collect()
}

/// `|Δu + k² u| / (k² max |u| over the stencil)` with the 5-point Laplacian.
pub fn helmholtz_residual(f: &dyn Field, k: f64, x: Point2, h: f64) -> f64 {
    let at = |dx: f64, dy: f64| f.value(x + Point2::new(dx, dy)).unwrap();
    let c = at(0.0, 0.0);
    let s = [at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h)];
    let lap = (s[0] + s[1] + s[2] + s[3] - 4.0 * c) / (h * h);
    let scale = s.iter().chain(std::iter::once(&c)).map(|z| z.norm()).fold(0.0, f64::max);
    (lap + k * k * c).norm() / (k * k * scale)
}

/// As [`helmholtz_residual`] with the fourth-order 9-point cross stencil.
pub fn helmholtz_residual4(f: &dyn Field, k: f64, x: Point2, h: f64) -> f64 {
    let at = |dx: f64, dy: f64| f.value(x + Point2::new(dx, dy)).unwrap();
    let c = at(0.0, 0.0);
    let mut lap = -60.0 * c;
    let mut scale = c.norm();
    for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
        let near = at(dx * h, dy * h);
        let far = at(2.0 * dx * h, 2.0 * dy * h);
        lap += 16.0 * near - far;
        scale = scale.max(near.norm()).max(far.norm());
    }
    lap /= 12.0 * h * h;
    (lap + k * k * c).norm() / (k * k * scale)
}

pub fn fd_gradient(f: &dyn Field, x: Point2, h: f64) -> CVec2 {
    let d = |e: Point2| (f.value(x + h * e).unwrap() - f.value(x - h * e).unwrap()) / (2.0 * h);
    [d(Point2::new(1.0, 0.0)), d(Point2::new(0.0, 1.0))]
}

/// Relative mismatch of the analytic gradient against central differences.
pub fn gradient_mismatch(f: &dyn IncidentField, x: Point2, h: f64) -> f64 {
    let g = f.gradient(x).unwrap();
    let fd = fd_gradient(f, x, h);
    let err = ((g[0] - fd[0]).norm_sqr() + (g[1] - fd[1]).norm_sqr()).sqrt();
    let scale = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt().max(1e-300);
    err / scale
}

/// The three-device configuration at `delta = delta_over_lambda * λ`,
/// `sigma = delta / 2`, `k = 1`, plane wave at angle 5π/13.
pub struct Setup {
    pub ctx: WaveContext,
    pub delta: f64,
    pub layout: DeviceLayout,
    pub geometry: CloakGeometry,
    pub incident: PlaneWave,
}

pub fn setup(delta_over_lambda: f64, nodes: usize) -> Setup {
    let ctx = WaveContext::new(1.0).unwrap();
    let delta = delta_over_lambda * ctx.wavelength();
    let (layout, geometry) = equilateral_layout(delta, delta / 2.0, nodes).unwrap();
    Setup {
        ctx,
        delta,
        layout,
        geometry,
        incident: plane_wave(ctx, INCIDENT_ANGLE),
    }
}

/// Smallest distance from `x` to a device, in units of that device's reach.
pub fn clearance(layout: &DeviceLayout, x: Point2) -> f64 {
    layout
        .positions()
        .iter()
        .zip(layout.reach())
        .map(|(c, r)| x.distance(*c) / r)
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff(a: &dyn Field, b: &dyn Field, pts: &[Point2]) -> f64 {
    pts.iter()
        .map(|&p| (a.value(p).unwrap() - b.value(p).unwrap()).norm())
        .fold(0.0, f64::max)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
