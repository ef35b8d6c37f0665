//! Active interior cloak: single- and double-layer potentials on a closed
//! curve, built from the incident field and integrated with the trapezoidal
//! rule on the curve nodes.
//!
//! For `x` inside the curve the field tends to `-u_i(x)`, outside to zero.

use crate::error::{CloakError, Result};
use crate::fields::{Field, IncidentField};
use crate::geometry::Curve;
use crate::specfun::greens_with_grad_y;
use crate::wave::{dot_c, Complex64, Point2, WaveContext};

/// Evaluations closer than this many node spacings to the curve are flagged.
pub const NEAR_BOUNDARY_SPACINGS: f64 = 2.0;

/// Layer densities sampled at the curve nodes.
#[derive(Debug, Clone)]
pub struct LayerDensities {
    ctx: WaveContext,
    curve: Curve,
    /// `-n(y) . grad u_i(y)`
    monopole: Vec<Complex64>,
    /// `u_i(y)`
    dipole: Vec<Complex64>,
}

/// Value of the interior cloak, flagged when the quadrature is unreliable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorValue {
    pub value: Complex64,
    pub near_boundary: bool,
}

pub fn build_densities(
    ctx: WaveContext,
    incident: &dyn IncidentField,
    curve: &Curve,
) -> Result<LayerDensities> {
    let mut monopole = Vec::with_capacity(curve.len());
    let mut dipole = Vec::with_capacity(curve.len());
    for node in curve.nodes() {
        let (u, g) = incident.value_and_gradient(node.position)?;
        monopole.push(-dot_c(node.normal, g));
        dipole.push(u);
    }
    Ok(LayerDensities {
        ctx,
        curve: curve.clone(),
        monopole,
        dipole,
    })
}

impl LayerDensities {
    pub fn context(&self) -> WaveContext {
        self.ctx
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn monopole(&self) -> &[Complex64] {
        &self.monopole
    }

    pub fn dipole(&self) -> &[Complex64] {
        &self.dipole
    }

    /// Copy with the densities at `dropped` node indices set to zero, i.e. an
    /// opening in the curve.
    pub fn with_dropped_nodes(&self, dropped: &[usize]) -> Result<LayerDensities> {
        let mut out = self.clone();
        for &i in dropped {
            if i >= out.monopole.len() {
                return Err(CloakError::invalid("dropped", format!("node {i} out of range")));
            }
            out.monopole[i] = Complex64::new(0.0, 0.0);
            out.dipole[i] = Complex64::new(0.0, 0.0);
        }
        Ok(out)
    }

    pub fn eval(&self, x: Point2) -> Result<InteriorValue> {
        let mut sum = Complex64::new(0.0, 0.0);
        for ((node, q), u) in self.curve.nodes().iter().zip(&self.monopole).zip(&self.dipole) {
            if *q == Complex64::new(0.0, 0.0) && *u == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (g, grad) = greens_with_grad_y(&self.ctx, x, node.position)?;
            sum += (*q * g + *u * dot_c(node.normal, grad)) * node.weight;
        }
        let band = NEAR_BOUNDARY_SPACINGS * self.curve.spacing();
        Ok(InteriorValue {
            value: sum,
            near_boundary: self.curve.distance_to(x) < band,
        })
    }
}

pub fn interior_cloak_eval(dens: &LayerDensities, x: Point2) -> Result<InteriorValue> {
    dens.eval(x)
}

impl Field for LayerDensities {
    fn value(&self, x: Point2) -> Result<Complex64> {
        Ok(self.eval(x)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{plane_wave, ZeroField};
    use std::f64::consts::PI;

    fn disk5() -> (WaveContext, Curve) {
        let ctx = WaveContext::new(1.0).unwrap();
        let lambda = ctx.wavelength();
        (ctx, Curve::circle(5.0 * lambda, Point2::ORIGIN, 256).unwrap())
    }

    #[test]
    fn zero_field_gives_zero_densities_and_field() {
        let (ctx, curve) = disk5();
        let d = build_densities(ctx, &ZeroField, &curve).unwrap();
        assert!(d.monopole().iter().chain(d.dipole()).all(|v| v.norm() == 0.0));
        assert_eq!(d.value(Point2::new(1.0, 2.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn plane_wave_densities() {
        let (ctx, curve) = disk5();
        let angle = 5.0 * PI / 13.0;
        let d = build_densities(ctx, &plane_wave(ctx, angle), &curve).unwrap();
        assert!(d.dipole().iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
        // the normal perpendicular to the propagation direction sees no flux
        let circle = Curve::circle(1.0, Point2::ORIGIN, 64).unwrap();
        let d = build_densities(ctx, &plane_wave(ctx, 0.0), &circle).unwrap();
        assert!(d.monopole()[16].norm() < 1e-15);
        assert!(d.monopole()[48].norm() < 1e-15);
    }

    #[test]
    fn origin_and_exterior() {
        let (ctx, curve) = disk5();
        let lambda = ctx.wavelength();
        let d = build_densities(ctx, &plane_wave(ctx, 5.0 * PI / 13.0), &curve).unwrap();
        let inside = d.eval(Point2::ORIGIN).unwrap();
        assert!(!inside.near_boundary);
        assert!((inside.value + 1.0).norm() < 1e-6, "{}", inside.value);
        let outside = d.eval(Point2::new(10.0 * lambda, 0.0)).unwrap();
        assert!(outside.value.norm() < 1e-6, "{}", outside.value);
    }

    #[test]
    fn near_boundary_flag() {
        let (ctx, curve) = disk5();
        let d = build_densities(ctx, &plane_wave(ctx, 0.2), &curve).unwrap();
        let r = 5.0 * ctx.wavelength();
        assert!(d.eval(Point2::new(r - 0.5 * curve.spacing(), 0.0)).unwrap().near_boundary);
        assert!(!d.eval(Point2::new(r - 3.0 * curve.spacing(), 0.0)).unwrap().near_boundary);
    }

    #[test]
    fn dropped_nodes_out_of_range() {
        let (ctx, curve) = disk5();
        let d = build_densities(ctx, &plane_wave(ctx, 0.2), &curve).unwrap();
        assert!(d.with_dropped_nodes(&[256]).is_err());
        let open = d.with_dropped_nodes(&[0, 1]).unwrap();
        assert_eq!(open.dipole()[0], Complex64::new(0.0, 0.0));
    }
}
