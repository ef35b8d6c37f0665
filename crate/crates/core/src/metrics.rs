//! Cloak performance measures: relative L2 errors on circles and the size of
//! the region where the device field is large.

use crate::error::{CloakError, Result};
use crate::fields::{Field, FieldSum};
use crate::geometry::optimal_effective_radius;
use crate::multipole::{CloakSolution, Provenance};
use crate::scatter::circle_norm;
use crate::wave::{Point2, WaveContext};

/// Minimum number of samples on a metric circle.
pub const MIN_CIRCLE_SAMPLES: usize = 256;

/// Samples used on the circle of radius `r`: at least
/// [`MIN_CIRCLE_SAMPLES`] and at least four per unit of `k r`, rounded up
/// to a power of two.
pub fn circle_samples(ctx: &WaveContext, r: f64) -> usize {
    let needed = (4.0 * ctx.k() * r).ceil() as usize;
    needed.next_power_of_two().max(MIN_CIRCLE_SAMPLES)
}

/// `||a|| / ||b||` of discrete L2 norms over `n` samples of `|x| = r`.
fn norm_ratio(a: &dyn Field, b: &dyn Field, r: f64, n: usize) -> Result<f64> {
    let den = circle_norm(b, r, n)?;
    if den == 0.0 {
        return Err(CloakError::Domain(format!("reference field vanishes on |x| = {r}")));
    }
    Ok(circle_norm(a, r, n)? / den)
}

/// `||u_i + u_d|| / ||u_i||` on `|x| = (1 - sqrt(3)/2) delta`.
pub fn interior_error(ctx: &WaveContext, incident: &dyn Field, device: &dyn Field, delta: f64) -> Result<f64> {
    let r = optimal_effective_radius(delta);
    interior_error_with(incident, device, delta, circle_samples(ctx, r))
}

pub fn interior_error_with(incident: &dyn Field, device: &dyn Field, delta: f64, n_circ: usize) -> Result<f64> {
    check_args(delta, n_circ)?;
    let total = FieldSum(vec![incident, device]);
    norm_ratio(&total, incident, optimal_effective_radius(delta), n_circ)
}

/// `||u_d|| / ||u_i||` on `|x| = 2 delta`.
pub fn radiation_error(ctx: &WaveContext, incident: &dyn Field, device: &dyn Field, delta: f64) -> Result<f64> {
    radiation_error_with(incident, device, delta, circle_samples(ctx, 2.0 * delta))
}

pub fn radiation_error_with(incident: &dyn Field, device: &dyn Field, delta: f64, n_circ: usize) -> Result<f64> {
    check_args(delta, n_circ)?;
    norm_ratio(device, incident, 2.0 * delta, n_circ)
}

fn check_args(delta: f64, n_circ: usize) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CloakError::invalid("delta", format!("must be positive, got {delta}")));
    }
    if n_circ < 3 {
        return Err(CloakError::invalid("n_circ", format!("need at least 3 samples, got {n_circ}")));
    }
    Ok(())
}

/// Marching step along a segment, in wavelengths.
const MARCH_STEP: f64 = 1.0 / 20.0;
/// Bisection stops at this fraction of `delta`.
const BISECT_TOL: f64 = 1e-6;
/// Halvings of the first step tried when the field is already below `beta`.
const MAX_HALVINGS: usize = 60;

/// Distance from `center` along `dir` to the first point where `|u_d|`
/// drops below `beta`, within `length`.
fn first_crossing(
    sol: &CloakSolution,
    center: Point2,
    dir: Point2,
    length: f64,
    beta: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let above = |s: f64| -> Result<bool> { Ok(sol.value(center + s * dir)?.norm() >= beta) };
    let step = MARCH_STEP * sol.context().wavelength();

    let mut lo = 0.0;
    let mut hi = None;
    let mut s = step.min(length);
    if !above(s)? {
        // the field blows up at the center; find a point still above beta
        let mut t = s;
        for _ in 0..MAX_HALVINGS {
            t *= 0.5;
            if above(t)? {
                lo = t;
                hi = Some(s);
                break;
            }
            s = t;
        }
        if hi.is_none() {
            return Ok(None);
        }
    } else {
        lo = s;
        while lo < length {
            let next = (lo + step).min(length);
            if !above(next)? {
                hi = Some(next);
                break;
            }
            lo = next;
        }
    }
    let Some(mut hi) = hi else { return Ok(None) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Estimated radius of the devices over `delta`, with `delta` the mean
/// distance of the devices from the origin.
///
/// For each device and each other device, finds the closest point on the
/// segment between them (up to its midpoint) where `|u_d| = beta`; returns
/// the largest of these distances.
pub fn device_radius_estimate(sol: &CloakSolution, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(CloakError::invalid("beta", format!("must be positive, got {beta}")));
    }
    let centers: Vec<Point2> = sol.sources().iter().map(|s| s.center()).collect();
    if centers.len() < 2 {
        return Err(CloakError::invalid("sol", "needs at least two devices"));
    }
    let delta = centers.iter().map(|c| c.norm()).sum::<f64>() / centers.len() as f64;
    let tol = BISECT_TOL * delta;
    let mut worst: f64 = 0.0;
    for (i, &a) in centers.iter().enumerate() {
        for (j, &b) in centers.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = b - a;
            let half = 0.5 * d.norm();
            let dir = (1.0 / d.norm()) * d;
            match first_crossing(sol, a, dir, half, beta, tol)? {
                Some(s) => worst = worst.max(s),
                None => {
                    return Err(CloakError::NotFound(format!(
                        "no crossing of |u_d| = {beta} between device {i} and the midpoint towards device {j}"
                    )))
                }
            }
        }
    }
    Ok(worst / delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloakReport {
    pub delta: f64,
    pub sigma: f64,
    pub order: usize,
    pub method: Provenance,
    pub beta: f64,
    pub interior_error: f64,
    pub radiation_error: f64,
    pub device_radius_over_delta: f64,
}

/// All metrics of `sol` for the incident field it was built for.
pub fn cloak_report(
    incident: &dyn Field,
    sol: &CloakSolution,
    delta: f64,
    sigma: f64,
    beta: f64,
) -> Result<CloakReport> {
    let ctx = sol.context();
    Ok(CloakReport {
        delta,
        sigma,
        order: sol.order(),
        method: sol.provenance(),
        beta,
        interior_error: interior_error(&ctx, incident, sol, delta)?,
        radiation_error: radiation_error(&ctx, incident, sol, delta)?,
        device_radius_over_delta: device_radius_estimate(sol, beta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{plane_wave, ZeroField};
    use crate::geometry::equilateral_layout;
    use crate::multipole::green_coefficients;

    #[test]
    fn sample_counts() {
        let ctx = WaveContext::new(1.0).unwrap();
        assert_eq!(circle_samples(&ctx, 1.0), 256);
        assert_eq!(circle_samples(&ctx, 40.0 * std::f64::consts::PI), 512);
        assert!(circle_samples(&ctx, 1000.0).is_power_of_two());
    }

    #[test]
    fn zero_device_field() {
        let ctx = WaveContext::new(1.0).unwrap();
        let pw = plane_wave(ctx, 0.3);
        assert!((interior_error(&ctx, &pw, &ZeroField, 5.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(radiation_error(&ctx, &pw, &ZeroField, 5.0).unwrap(), 0.0);
        assert!(interior_error(&ctx, &ZeroField, &ZeroField, 5.0).is_err());
        assert!(radiation_error_with(&pw, &ZeroField, -1.0, 64).is_err());
    }

    #[test]
    fn device_radius_errors() {
        let ctx = WaveContext::new(1.0).unwrap();
        let delta = 2.0 * ctx.wavelength();
        let (layout, _) = equilateral_layout(delta, delta / 2.0, 96).unwrap();
        let sol = green_coefficients(ctx, &plane_wave(ctx, 0.3), &layout, 10).unwrap();
        assert!(device_radius_estimate(&sol, 0.0).is_err());
        assert!(matches!(
            device_radius_estimate(&sol.zeroed(), 5.0),
            Err(CloakError::NotFound(_))
        ));
        let r = device_radius_estimate(&sol, 5.0).unwrap();
        assert!(r > 0.0 && r < 0.75_f64.sqrt(), "{r}");
    }
}
