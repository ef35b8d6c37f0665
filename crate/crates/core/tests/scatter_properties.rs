mod common;

use common::*;

use cloak_core::fields::{plane_wave, Field};
use cloak_core::geometry::{optimal_effective_radius, Curve};
use cloak_core::interior::build_densities;
use cloak_core::multipole::green_coefficients;
use cloak_core::scatter::{
    fitted_kite, scattering_suppression, solve_scattering, suppression_ratio, ScatteredField,
    SuppressionOptions, DEFAULT_SHRINK,
};
use cloak_core::specfun::{bessel_j, cyl_wave, hankel1, WaveKind};
use cloak_core::{CloakError, Complex64, Point2, WaveContext};
use std::f64::consts::PI;

/// Sound-soft disk of radius `a` at the origin, plane wave in direction
/// `angle`: `u_s = -sum_m J_m(ka)/H_m(ka) i^m e^{-i m angle} V_m(x)`.
fn cylinder_series(ctx: &WaveContext, a: f64, angle: f64, x: Point2) -> Complex64 {
    let terms = (ctx.k() * a).ceil() as i32 + 40;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in -terms..=terms {
        let ratio = bessel_j(m, ctx.k() * a).unwrap() / hankel1(m, ctx.k() * a).unwrap();
        let coeff = ratio * Complex64::i().powi(m) * Complex64::from_polar(1.0, -(m as f64) * angle);
        sum -= coeff * cyl_wave(WaveKind::Radiating, m, ctx, x).unwrap();
    }
    sum
}

fn l2(values: impl Iterator<Item = Complex64>) -> f64 {
    values.map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn circle_matches_cylinder_series() {
    let ctx = WaveContext::new(1.0).unwrap();
    for (a, angle) in [(1.0, 0.0), (2.0, 0.4), (4.0, INCIDENT_ANGLE)] {
        let disk = Curve::circle(a, Point2::ORIGIN, 64).unwrap();
        let sol = solve_scattering(ctx, &disk, &plane_wave(ctx, angle), 128, DEFAULT_SHRINK).unwrap();
        let probe = circle_points(3.0 * a, 256);
        let err = l2(probe.iter().map(|&x| sol.value(x).unwrap() - cylinder_series(&ctx, a, angle, x)));
        let den = l2(probe.iter().map(|&x| cylinder_series(&ctx, a, angle, x)));
        assert!(err / den < 1e-6, "a = {a}: {:e}", err / den);
    }
}

fn kite_at_ten_wavelengths(n: usize) -> (WaveContext, Curve) {
    let s = setup(10.0, 384);
    (s.ctx, fitted_kite(0.8 * optimal_effective_radius(s.delta), Point2::ORIGIN, n).unwrap())
}

#[test]
fn kite_residual_converges() {
    let (ctx, kite) = kite_at_ten_wavelengths(256);
    let pw = plane_wave(ctx, INCIDENT_ANGLE);
    let res: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| solve_scattering(ctx, &kite, &pw, n, DEFAULT_SHRINK).unwrap().residual())
        .collect();
    assert!(res[2] < 1e-6, "{res:?}");
    for w in res.windows(2) {
        assert!(w[1] <= 2.0 * w[0], "{res:?}");
    }
    assert!(res[3] < res[0]);
}

#[test]
fn scattered_field_decays_like_inverse_sqrt() {
    let ctx = WaveContext::new(1.0).unwrap();
    let a = 1.0;
    let disk = Curve::circle(a, Point2::ORIGIN, 64).unwrap();
    let sol = solve_scattering(ctx, &disk, &plane_wave(ctx, 0.3), 64, DEFAULT_SHRINK).unwrap();
    for angle in [0.3, 1.5, 3.4] {
        let near = sol.value(Point2::polar(10.0 * a, angle)).unwrap().norm();
        let far = sol.value(Point2::polar(40.0 * a, angle)).unwrap().norm();
        let ratio = (far / near) / 0.5;
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }
}

/// Far-field pattern of a monopole sum, up to a constant factor.
fn far_field(sol: &ScatteredField, ctx: &WaveContext, dir: f64) -> Complex64 {
    let xhat = Point2::polar(1.0, dir);
    sol.sources()
        .iter()
        .zip(sol.strengths())
        .map(|(s, c)| c * Complex64::from_polar(1.0, -ctx.k() * xhat.dot(*s)))
        .sum()
}

#[test]
fn reciprocity() {
    let ctx = WaveContext::new(1.0).unwrap();
    let obstacles = [
        Curve::circle(1.5, Point2::new(0.5, -0.3), 64).unwrap(),
        fitted_kite(2.0, Point2::new(0.2, 0.1), 256).unwrap(),
    ];
    for obstacle in &obstacles {
        for (t_in, t_out) in [(0.2, 1.9), (INCIDENT_ANGLE, 4.0)] {
            // F(x̂, d) = F(-d, -x̂)
            let a = solve_scattering(ctx, obstacle, &plane_wave(ctx, t_in), 128, DEFAULT_SHRINK).unwrap();
            let b = solve_scattering(ctx, obstacle, &plane_wave(ctx, t_out + PI), 128, DEFAULT_SHRINK).unwrap();
            let fa = far_field(&a, &ctx, t_out);
            let fb = far_field(&b, &ctx, t_in + PI);
            assert!((fa - fb).norm() < 1e-4 * fa.norm(), "{fa} vs {fb}");
        }
    }
}

#[test]
fn suppression_limits() {
    let s = setup(10.0, 384);
    let kite = fitted_kite(0.8 * optimal_effective_radius(s.delta), Point2::ORIGIN, 256).unwrap();
    let sol = green_coefficients(s.ctx, &s.incident, &s.layout, 118).unwrap();

    let none = scattering_suppression(&kite, &s.incident, &sol.zeroed(), 2.0 * s.delta).unwrap();
    assert_eq!(none, 1.0);

    let cloaked = scattering_suppression(&kite, &s.incident, &sol, 2.0 * s.delta).unwrap();
    assert!(cloaked <= 0.01, "{cloaked:e}");

    // the quadrature interior cloak is exact to rounding in D
    let dens = build_densities(s.ctx, &s.incident, s.layout.boundary()).unwrap();
    let perfect =
        suppression_ratio(s.ctx, &kite, &s.incident, &dens, 2.0 * s.delta, SuppressionOptions::default()).unwrap();
    assert!(perfect < 1e-4, "{perfect:e}");

    let too_big = fitted_kite(0.4 * s.delta, Point2::ORIGIN, 256).unwrap();
    assert!(matches!(
        scattering_suppression(&too_big, &s.incident, &sol, 2.0 * s.delta),
        Err(CloakError::Geometry(_))
    ));
}
