mod common;

use common::*;

use cloak_core::fields::{plane_wave, point_source, superpose, Field, IncidentField, ZeroField};
use cloak_core::geometry::DeviceLayout;
use cloak_core::interior::build_densities;
use cloak_core::multipole::{
    coefficients_from_densities, green_coefficients, illusion_coefficients, truncation_m,
    CloakSolution, Provenance,
};
use cloak_core::{Complex64, Point2};
use std::f64::consts::TAU;

fn flat(sol: &CloakSolution) -> Vec<Complex64> {
    sol.sources().iter().flat_map(|s| s.coefficients().iter().copied()).collect()
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Probe points in `R`: uniform in the disk of radius 2δ, clearance >= 1.1.
fn region_points(layout: &DeviceLayout, delta: f64, n: usize) -> Vec<Point2> {
    disk_points(2.0 * delta, n, |p| clearance(layout, p) >= 1.1)
}

#[test]
fn coefficients_are_linear_in_the_incident_field() {
    let s = setup(10.0, 384);
    let f = plane_wave(s.ctx, 0.3);
    let g = point_source(s.ctx, Point2::new(40.0, -150.0));
    let (a, b) = (c(0.7, -1.2), c(-2.0, 0.5));
    let mix = superpose(vec![&f as &dyn IncidentField, &g], vec![a, b]).unwrap();
    let m = 59;
    let cf = flat(&green_coefficients(s.ctx, &f, &s.layout, m).unwrap());
    let cg = flat(&green_coefficients(s.ctx, &g, &s.layout, m).unwrap());
    let cm = flat(&green_coefficients(s.ctx, &mix, &s.layout, m).unwrap());
    let combined: Vec<Complex64> = cf.iter().zip(&cg).map(|(x, y)| a * x + b * y).collect();
    assert!(rel_diff(&cm, &combined) < 1e-12);
    let zero = green_coefficients(s.ctx, &ZeroField, &s.layout, m).unwrap();
    assert!(flat(&zero).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn rotating_the_wave_rotates_the_device_field() {
    // N = 384 is divisible by 3, so a rotation by 2π/3 maps nodes to nodes
    // and arcs to arcs
    let s = setup(10.0, 384);
    let m = 59;
    let rot = TAU / 3.0;
    let sol = green_coefficients(s.ctx, &s.incident, &s.layout, m).unwrap();
    let turned = plane_wave(s.ctx, INCIDENT_ANGLE + rot);
    let sol_rot = green_coefficients(s.ctx, &turned, &s.layout, m).unwrap();
    let pts = box_points(1.5 * s.delta, 100, |p| clearance(&s.layout, p) > 0.2);
    let scale = pts.iter().map(|&p| sol.value(p).unwrap().norm()).fold(0.0, f64::max);
    let worst = pts
        .iter()
        .map(|&p| (sol_rot.value(p.rotate(rot)).unwrap() - sol.value(p).unwrap()).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn agreement_with_interior_cloak_improves_with_order() {
    let s = setup(5.0, 384);
    let dens = build_densities(s.ctx, &s.incident, s.layout.boundary()).unwrap();
    let pts = region_points(&s.layout, s.delta, 200);
    let m = truncation_m(&s.ctx, s.delta).unwrap();
    let err = |order| {
        let sol = green_coefficients(s.ctx, &s.incident, &s.layout, order).unwrap();
        max_abs_diff(&sol, &dens, &pts)
    };
    let (e1, e2) = (err(m), err(2 * m));
    assert!(e2 < e1, "{e2:e} !< {e1:e}");
}

#[test]
fn terms_decay_geometrically_in_region_r() {
    let s = setup(10.0, 384);
    // the probe points reach k|x - x_j| ~ 190; the order must go well beyond
    let m = 236;
    let sol = green_coefficients(s.ctx, &s.incident, &s.layout, m).unwrap();
    let pts = region_points(&s.layout, s.delta, 20);
    for &x in &pts {
        let bound = s
            .layout
            .positions()
            .iter()
            .zip(s.layout.reach())
            .map(|(c, r)| r / x.distance(*c))
            .fold(0.0, f64::max)
            + 0.05;
        for src in sol.sources() {
            let terms = src.terms(&s.ctx, x).unwrap();
            // past |m| ~ k|x - x_j| the Hankel functions decay monotonically
            let start = (s.ctx.k() * x.distance(src.center())).ceil() as usize + 5;
            let (ms, logs): (Vec<f64>, Vec<f64>) = (start..=m)
                .map(|k| {
                    let t = terms[m + k].norm().max(terms[m - k].norm());
                    (k as f64, t.ln())
                })
                .unzip();
            assert!(ms.len() >= 20);
            let n = ms.len() as f64;
            let (mx, my) = (ms.iter().sum::<f64>() / n, logs.iter().sum::<f64>() / n);
            let slope = ms.iter().zip(&logs).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
                / ms.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
            let ratio = slope.exp();
            assert!(ratio <= bound, "ratio {ratio} > {bound} at {x:?}");
        }
    }
}

#[test]
fn device_field_blows_up_near_centers() {
    let s = setup(10.0, 384);
    let sol = green_coefficients(s.ctx, &s.incident, &s.layout, 59).unwrap();
    let lambda = s.ctx.wavelength();
    for &c in s.layout.positions() {
        for i in 0..8 {
            let dir = Point2::polar(1.0, TAU * i as f64 / 8.0);
            let near = sol.value(c + (lambda / 10.0) * dir).unwrap().norm();
            let far = sol.value(c + lambda * dir).unwrap().norm();
            assert!(near > 10.0 * far, "{near:e} vs {far:e}");
        }
    }
}

#[test]
fn small_opening_spoils_the_far_field() {
    let s = setup(10.0, 384);
    let m = 59;
    let dens = build_densities(s.ctx, &s.incident, s.layout.boundary()).unwrap();
    let full = coefficients_from_densities(&dens, &s.layout, m, Provenance::Green).unwrap();
    let arc: Vec<usize> = s.layout.arc_nodes(0).collect();
    let drop = arc.len().div_ceil(10);
    let mid = arc.len() / 2 - drop / 2;
    let open_dens = dens.with_dropped_nodes(&arc[mid..mid + drop]).unwrap();
    let open = coefficients_from_densities(&open_dens, &s.layout, m, Provenance::Green).unwrap();
    let far = circle_points(2.0 * s.delta, 256);
    let err = |sol: &CloakSolution| far.iter().map(|&x| sol.value(x).unwrap().norm()).fold(0.0, f64::max);
    let (e_full, e_open) = (err(&full), err(&open));
    assert!(e_open >= 10.0 * e_full, "{e_open:e} vs {e_full:e}");
}

#[test]
fn illusion_without_virtual_object_is_the_cloak() {
    let s = setup(10.0, 384);
    let green = green_coefficients(s.ctx, &s.incident, &s.layout, 59).unwrap();
    let ill = illusion_coefficients(s.ctx, &s.incident, &ZeroField, &s.layout, 59).unwrap();
    assert_eq!(flat(&green), flat(&ill));
    assert_eq!(ill.provenance(), Provenance::Illusion);
}

#[test]
fn illusion_is_linear() {
    let s = setup(10.0, 384);
    let v = point_source(s.ctx, Point2::new(3.0, -2.0));
    let m = 59;
    let ill = flat(&illusion_coefficients(s.ctx, &s.incident, &v, &s.layout, m).unwrap());
    let gi = flat(&green_coefficients(s.ctx, &s.incident, &s.layout, m).unwrap());
    let gv = flat(&green_coefficients(s.ctx, &v, &s.layout, m).unwrap());
    let sum: Vec<Complex64> = gi.iter().zip(&gv).map(|(a, b)| a + b).collect();
    assert!(rel_diff(&ill, &sum) < 1e-12);
}

#[test]
fn illusion_radiates_the_virtual_field() {
    let s = setup(5.0, 384);
    let v = point_source(s.ctx, Point2::new(1.0, 0.5));
    let m = 2 * truncation_m(&s.ctx, s.delta).unwrap();
    let sol = illusion_coefficients(s.ctx, &ZeroField, &v, &s.layout, m).unwrap();
    let far = circle_points(2.0 * s.delta, 128);
    let scale = far.iter().map(|&x| v.value(x).unwrap().norm()).fold(0.0, f64::max);
    let worst = max_abs_diff(&sol, &v, &far);
    assert!(worst < 1e-4 * scale, "{worst:e} vs {scale:e}");
}
