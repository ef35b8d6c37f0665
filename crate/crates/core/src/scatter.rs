//! Sound-soft scattering by the method of fundamental solutions: the
//! scattered field is a sum of monopoles placed on a copy of the obstacle
//! boundary shrunk toward its centroid, with strengths chosen so the total
//! field vanishes at collocation points on the boundary.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{CloakError, Result};
use crate::fields::{Field, FieldSum, IncidentField};
use crate::geometry::{in_region_r, Curve};
use crate::linalg::truncated_lstsq;
use crate::multipole::CloakSolution;
use crate::specfun::{greens, greens_with_grad_y};
use crate::wave::{CVec2, Complex64, Point2, WaveContext};

pub const DEFAULT_SOURCES: usize = 256;
pub const DEFAULT_SHRINK: f64 = 0.85;
pub const MIN_SOURCES: usize = 16;
pub const DEFAULT_PROBE_SAMPLES: usize = 256;
const REL_CUTOFF: f64 = 1e-13;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct ScatteredField {
    ctx: WaveContext,
    sources: Vec<Point2>,
    strengths: Vec<Complex64>,
    obstacle: Curve,
    residual: f64,
}

impl ScatteredField {
    pub fn sources(&self) -> &[Point2] {
        &self.sources
    }

    pub fn strengths(&self) -> &[Complex64] {
        &self.strengths
    }

    pub fn obstacle(&self) -> &Curve {
        &self.obstacle
    }

    /// `max |u_s + u_inc|` over a boundary check set four times denser than
    /// the sources, relative to `max |u_inc|` there (zero if `u_inc = 0`).
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

impl Field for ScatteredField {
    fn value(&self, x: Point2) -> Result<Complex64> {
        self.sources
            .iter()
            .zip(&self.strengths)
            .try_fold(ZERO, |acc, (&s, &c)| Ok(acc + c * greens(&self.ctx, x, s)?))
    }
}

impl IncidentField for ScatteredField {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        let mut u = ZERO;
        let mut g = [ZERO; 2];
        for (&s, &c) in self.sources.iter().zip(&self.strengths) {
            let (v, grad) = greens_with_grad_y(&self.ctx, s, x)?;
            u += c * v;
            g[0] += c * grad[0];
            g[1] += c * grad[1];
        }
        Ok((u, g))
    }
}

fn boundary_points(obstacle: &Curve, n: usize, offset: f64) -> Vec<Point2> {
    (0..n)
        .map(|i| obstacle.point(TAU * (i as f64 + offset) / n as f64))
        .collect()
}

pub fn solve_scattering(
    ctx: WaveContext,
    obstacle: &Curve,
    incident: &dyn Field,
    n_src: usize,
    src_shrink: f64,
) -> Result<ScatteredField> {
    if n_src < MIN_SOURCES {
        return Err(CloakError::invalid("n_src", format!("need at least {MIN_SOURCES}, got {n_src}")));
    }
    if !(src_shrink > 0.0 && src_shrink < 1.0) {
        return Err(CloakError::invalid("src_shrink", format!("must lie in (0, 1), got {src_shrink}")));
    }
    let tau = -src_shrink.ln();
    let shape = obstacle.shape();
    let sources: Vec<Point2> = (0..n_src)
        .map(|i| shape.point_complexified(TAU * i as f64 / n_src as f64, tau))
        .collect();
    if !sources.iter().all(|&p| obstacle.contains(p)) {
        return Err(CloakError::Geometry("auxiliary sources leave the obstacle".into()));
    }
    let colloc = boundary_points(obstacle, 2 * n_src, 0.0);

    let rows: Vec<(Vec<Complex64>, Complex64)> = colloc
        .par_iter()
        .map(|&x| {
            let row = sources.iter().map(|&s| greens(&ctx, x, s)).collect::<Result<Vec<_>>>()?;
            Ok((row, -incident.value(x)?))
        })
        .collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(colloc.len(), n_src);
    let mut b = DVector::zeros(colloc.len());
    for (i, (row, rhs)) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            a[(i, j)] = v;
        }
        b[i] = rhs;
    }
    let sol = truncated_lstsq(&a, &b, REL_CUTOFF)?;
    let mut field = ScatteredField {
        ctx,
        sources,
        strengths: sol.solution.iter().copied().collect(),
        obstacle: obstacle.clone(),
        residual: 0.0,
    };

    let check = boundary_points(obstacle, 4 * n_src, 0.5);
    let (worst, scale) = check
        .par_iter()
        .map(|&x| {
            let u = incident.value(x)?;
            Ok(((field.value(x)? + u).norm(), u.norm()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?
        .into_iter()
        .fold((0.0_f64, 0.0_f64), |(w, s), (e, u)| (w.max(e), s.max(u)));
    field.residual = if scale > 0.0 { worst / scale } else { worst };
    if !field.residual.is_finite() {
        return Err(CloakError::Numerical("scattering residual is not finite".into()));
    }
    Ok(field)
}

/// Discrete L2 norm over `n` equispaced points of the circle `|x| = radius`.
pub(crate) fn circle_norm(field: &dyn Field, radius: f64, n: usize) -> Result<f64> {
    let h = TAU * radius / n as f64;
    let sq = (0..n)
        .into_par_iter()
        .map(|i| Ok(field.value(Point2::polar(radius, TAU * i as f64 / n as f64))?.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((sq.iter().sum::<f64>() * h).sqrt())
}

/// Solver and probe settings for [`suppression_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionOptions {
    pub n_src: usize,
    pub src_shrink: f64,
    pub probe_samples: usize,
}

impl Default for SuppressionOptions {
    fn default() -> Self {
        SuppressionOptions {
            n_src: DEFAULT_SOURCES,
            src_shrink: DEFAULT_SHRINK,
            probe_samples: DEFAULT_PROBE_SAMPLES,
        }
    }
}

/// `||u_s(u_i + u_d)|| / ||u_s(u_i)||` on the circle of radius `probe_radius`
/// for any device field `u_d`; no check on where the obstacle sits.
pub fn suppression_ratio(
    ctx: WaveContext,
    obstacle: &Curve,
    incident: &dyn Field,
    device: &dyn Field,
    probe_radius: f64,
    opts: SuppressionOptions,
) -> Result<f64> {
    let bare = solve_scattering(ctx, obstacle, incident, opts.n_src, opts.src_shrink)?;
    let total = FieldSum(vec![incident, device]);
    let cloaked = solve_scattering(ctx, obstacle, &total, opts.n_src, opts.src_shrink)?;
    let den = circle_norm(&bare, probe_radius, opts.probe_samples)?;
    if den == 0.0 {
        return Err(CloakError::Numerical("bare scattered field vanishes on the probe circle".into()));
    }
    Ok(circle_norm(&cloaked, probe_radius, opts.probe_samples)? / den)
}

/// Scattering suppression of `sol` for an obstacle inside its effective
/// cloaked region.
pub fn scattering_suppression(
    obstacle: &Curve,
    incident: &dyn Field,
    sol: &CloakSolution,
    probe_radius: f64,
) -> Result<f64> {
    scattering_suppression_with(obstacle, incident, sol, probe_radius, SuppressionOptions::default())
}

pub fn scattering_suppression_with(
    obstacle: &Curve,
    incident: &dyn Field,
    sol: &CloakSolution,
    probe_radius: f64,
    opts: SuppressionOptions,
) -> Result<f64> {
    let layout = sol.layout();
    let check = boundary_points(obstacle, 4 * opts.n_src.max(MIN_SOURCES), 0.0);
    if !check.iter().all(|&p| layout.boundary().contains(p) && in_region_r(p, layout)) {
        return Err(CloakError::Geometry("obstacle leaves the effective cloaked region".into()));
    }
    suppression_ratio(sol.context(), obstacle, incident, sol, probe_radius, opts)
}

/// The kite scaled so its nodes lie within `radius` of its area centroid,
/// which is placed at `center`.
pub fn fitted_kite(radius: f64, center: Point2, n: usize) -> Result<Curve> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CloakError::invalid("radius", format!("must be positive, got {radius}")));
    }
    let unit = Curve::kite(1.0, Point2::ORIGIN, n)?;
    let c = unit.area_centroid();
    let scale = radius / unit.max_distance_from(c);
    Curve::kite(scale, center - scale * c, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{plane_wave, ZeroField};

    #[test]
    fn zero_incident() {
        let ctx = WaveContext::new(1.0).unwrap();
        let kite = fitted_kite(2.0, Point2::ORIGIN, 64).unwrap();
        let s = solve_scattering(ctx, &kite, &ZeroField, 32, DEFAULT_SHRINK).unwrap();
        assert!(s.strengths().iter().all(|c| c.norm() == 0.0));
        assert_eq!(s.residual(), 0.0);
    }

    #[test]
    fn validation() {
        let ctx = WaveContext::new(1.0).unwrap();
        let kite = fitted_kite(2.0, Point2::ORIGIN, 64).unwrap();
        let pw = plane_wave(ctx, 0.0);
        assert!(solve_scattering(ctx, &kite, &pw, 8, DEFAULT_SHRINK).is_err());
        // the complexified kite crosses its own boundary this far in
        assert!(matches!(
            solve_scattering(ctx, &kite, &pw, 32, 0.5),
            Err(CloakError::Geometry(_))
        ));
        assert!(solve_scattering(ctx, &kite, &pw, 32, 1.0).is_err());
        assert!(fitted_kite(0.0, Point2::ORIGIN, 64).is_err());
    }

    #[test]
    fn fitted_kite_geometry() {
        let c = Point2::new(0.5, -1.0);
        let kite = fitted_kite(3.0, c, 256).unwrap();
        assert!(kite.area_centroid().distance(c) < 1e-12);
        assert!((kite.max_distance_from(c) - 3.0).abs() < 1e-12);
        assert!(kite.contains(c));
    }
}
