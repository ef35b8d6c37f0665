mod common;

use common::*;

use cloak_core::fields::{plane_wave, Field};
use cloak_core::geometry::optimal_effective_radius;
use cloak_core::metrics::interior_error;
use cloak_core::multipole::green_coefficients;
use cloak_core::svd::{build_system, default_samples, svd_solve, DEFAULT_REL_CUTOFF};
use nalgebra::DVector;
use std::f64::consts::TAU;

#[test]
fn enlarging_the_basis_does_not_increase_the_residual() {
    let s = setup(10.0, 384);
    let alpha = optimal_effective_radius(s.delta);
    let gamma = 2.0 * s.delta;
    // the same rows for both orders: the M = 59 basis is a subset of M = 118
    let n = default_samples(118);
    let res = |m| {
        let sys = build_system(s.ctx, &s.incident, &s.layout, alpha, gamma, m, n, n, 1.0).unwrap();
        svd_solve(&sys, DEFAULT_REL_CUTOFF).unwrap().residual
    };
    let (r59, r118) = (res(59), res(118));
    assert!(r118 <= r59, "{r118:e} > {r59:e}");

    // and with the default sample counts of each order
    let res_default = |m| {
        let n = default_samples(m);
        let sys = build_system(s.ctx, &s.incident, &s.layout, alpha, gamma, m, n, n, 1.0).unwrap();
        svd_solve(&sys, DEFAULT_REL_CUTOFF).unwrap().residual
    };
    assert!(res_default(118) <= res_default(59));
}

#[test]
fn reported_residual_matches_the_device_field() {
    let s = setup(10.0, 384);
    let m = 59;
    let n = default_samples(m);
    let alpha = optimal_effective_radius(s.delta);
    let gamma = 2.0 * s.delta;
    let w = 2.0;
    let sys = build_system(s.ctx, &s.incident, &s.layout, alpha, gamma, m, n, n, w).unwrap();
    let out = svd_solve(&sys, DEFAULT_REL_CUTOFF).unwrap();

    let by_matrix = sys.residual(&out.coefficients);
    assert!((by_matrix - out.residual).abs() <= 1e-10 * out.residual);

    // recompute from scratch by evaluating the devices on both circles
    let mut r = Vec::new();
    for x in circle_points(alpha, n) {
        r.push(out.solution.value(x).unwrap() + s.incident.value(x).unwrap());
    }
    for x in circle_points(gamma, n) {
        r.push(w * out.solution.value(x).unwrap());
    }
    let by_field = DVector::from_vec(r).norm();
    assert!((by_field - out.residual).abs() <= 1e-10 * sys.rhs().norm());
}

/// Rotating the wave and the (symmetric) layout together relabels rows and
/// columns by a unitary map, so in exact arithmetic the device field is
/// rotated. In floating point the truncated solution moves by about
/// `eps / rel_cutoff` in the directions kept near the cutoff.
#[test]
fn rotation_equivariance() {
    let s = setup(10.0, 384);
    let m = 59;
    // sample counts divisible by 3 map each circle onto itself
    let n = 3 * (default_samples(m) / 3 + 1);
    let alpha = optimal_effective_radius(s.delta);
    let gamma = 2.0 * s.delta;
    let rot = TAU / 3.0;
    let pts = disk_points(2.0 * s.delta, 100, |p| clearance(&s.layout, p) >= 1.1);
    for (cut, tol) in [(1e-8, 1e-8), (DEFAULT_REL_CUTOFF, 1e-4)] {
        let solve = |angle: f64| {
            let pw = plane_wave(s.ctx, angle);
            let sys = build_system(s.ctx, &pw, &s.layout, alpha, gamma, m, n, n, 1.0).unwrap();
            svd_solve(&sys, cut).unwrap().solution
        };
        let (a, b) = (solve(INCIDENT_ANGLE), solve(INCIDENT_ANGLE + rot));
        let worst = pts
            .iter()
            .map(|&p| (b.value(p.rotate(rot)).unwrap() - a.value(p).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(worst < tol, "cutoff {cut:e}: {worst:e}");
    }
}

#[test]
fn doubling_control_samples_is_stable() {
    let s = setup(10.0, 384);
    let m = 59;
    let n = default_samples(m);
    let alpha = optimal_effective_radius(s.delta);
    let gamma = 2.0 * s.delta;
    let solve = |na| {
        let sys = build_system(s.ctx, &s.incident, &s.layout, alpha, gamma, m, na, n, 1.0).unwrap();
        svd_solve(&sys, DEFAULT_REL_CUTOFF).unwrap().solution
    };
    let (a, b) = (solve(n), solve(2 * n));
    let probe = circle_points(alpha, 256);
    let scale = probe.iter().map(|&x| a.value(x).unwrap().norm()).fold(0.0, f64::max);
    let worst = max_abs_diff(&a, &b, &probe);
    assert!(worst < 0.01 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn svd_beats_green_at_equal_order() {
    let s = setup(10.0, 384);
    let m = 59;
    let n = default_samples(m);
    let alpha = optimal_effective_radius(s.delta);
    let sys = build_system(s.ctx, &s.incident, &s.layout, alpha, 2.0 * s.delta, m, n, n, 1.0).unwrap();
    let svd = svd_solve(&sys, DEFAULT_REL_CUTOFF).unwrap().solution;
    let green = green_coefficients(s.ctx, &s.incident, &s.layout, m).unwrap();
    let e_svd = interior_error(&s.ctx, &s.incident, &svd, s.delta).unwrap();
    let e_green = interior_error(&s.ctx, &s.incident, &green, s.delta).unwrap();
    println!("interior error: svd {e_svd:e}, green {e_green:e}");
    assert!(e_svd < e_green);
}
