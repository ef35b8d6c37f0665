//! Incident fields with analytic gradients, superposition, and raster
//! evaluation of any field.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{CloakError, Result};
use crate::specfun::{greens, greens_with_grad_y};
use crate::wave::{CVec2, Complex64, Point2, WaveContext};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Anything that can be evaluated pointwise.
pub trait Field: Send + Sync {
    fn value(&self, x: Point2) -> Result<Complex64>;
}

/// A field with an analytic gradient, as required by the layer densities.
pub trait IncidentField: Field {
    fn gradient(&self, x: Point2) -> Result<CVec2>;

    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn value(&self, x: Point2) -> Result<Complex64> {
        (**self).value(x)
    }
}

impl<T: IncidentField + ?Sized> IncidentField for &T {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        (**self).value_and_gradient(x)
    }
}

impl<T: Field + ?Sized> Field for Box<T> {
    fn value(&self, x: Point2) -> Result<Complex64> {
        (**self).value(x)
    }
}

impl<T: IncidentField + ?Sized> IncidentField for Box<T> {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        (**self).value_and_gradient(x)
    }
}

impl<T: Field + ?Sized> Field for Arc<T> {
    fn value(&self, x: Point2) -> Result<Complex64> {
        (**self).value(x)
    }
}

impl<T: IncidentField + ?Sized> IncidentField for Arc<T> {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        (**self).value_and_gradient(x)
    }
}

/// The identically zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl Field for ZeroField {
    fn value(&self, _x: Point2) -> Result<Complex64> {
        Ok(ZERO)
    }
}

impl IncidentField for ZeroField {
    fn gradient(&self, _x: Point2) -> Result<CVec2> {
        Ok([ZERO; 2])
    }
}

/// `exp(i k d . x)` with `d = (cos angle, sin angle)`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    ctx: WaveContext,
    angle: f64,
    direction: Point2,
}

impl PlaneWave {
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn context(&self) -> WaveContext {
        self.ctx
    }
}

pub fn plane_wave(ctx: WaveContext, angle: f64) -> PlaneWave {
    PlaneWave {
        ctx,
        angle,
        direction: Point2::polar(1.0, angle),
    }
}

impl Field for PlaneWave {
    fn value(&self, x: Point2) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, self.ctx.k() * self.direction.dot(x)))
    }
}

impl IncidentField for PlaneWave {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        let u = self.value(x)?;
        let iku = Complex64::new(0.0, self.ctx.k()) * u;
        Ok((u, [iku * self.direction.x, iku * self.direction.y]))
    }
}

/// The radiating field `G(x, y0)` of a unit monopole at `y0`.
#[derive(Debug, Clone, Copy)]
pub struct PointSource {
    ctx: WaveContext,
    source: Point2,
}

impl PointSource {
    pub fn source(&self) -> Point2 {
        self.source
    }
}

pub fn point_source(ctx: WaveContext, source: Point2) -> PointSource {
    PointSource { ctx, source }
}

impl Field for PointSource {
    fn value(&self, x: Point2) -> Result<Complex64> {
        greens(&self.ctx, x, self.source)
    }
}

impl IncidentField for PointSource {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        // G is symmetric, so the gradient in x is grad_y G(source, x)
        greens_with_grad_y(&self.ctx, self.source, x)
    }
}

/// Pointwise weighted sum of incident fields.
pub struct Superposition<'a> {
    terms: Vec<(&'a dyn IncidentField, Complex64)>,
}

pub fn superpose<'a>(
    fields: Vec<&'a dyn IncidentField>,
    weights: Vec<Complex64>,
) -> Result<Superposition<'a>> {
    if fields.len() != weights.len() {
        return Err(CloakError::LengthMismatch {
            expected: fields.len(),
            got: weights.len(),
        });
    }
    Ok(Superposition {
        terms: fields.into_iter().zip(weights).collect(),
    })
}

impl Field for Superposition<'_> {
    fn value(&self, x: Point2) -> Result<Complex64> {
        self.terms
            .iter()
            .try_fold(ZERO, |acc, (f, w)| Ok(acc + *w * f.value(x)?))
    }
}

impl IncidentField for Superposition<'_> {
    fn gradient(&self, x: Point2) -> Result<CVec2> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: Point2) -> Result<(Complex64, CVec2)> {
        let mut u = ZERO;
        let mut g = [ZERO; 2];
        for (f, w) in &self.terms {
            let (fu, fg) = f.value_and_gradient(x)?;
            u += *w * fu;
            g[0] += *w * fg[0];
            g[1] += *w * fg[1];
        }
        Ok((u, g))
    }
}

/// Plain sum of fields, e.g. incident + device + scattered.
pub struct FieldSum<'a>(pub Vec<&'a dyn Field>);

impl Field for FieldSum<'_> {
    fn value(&self, x: Point2) -> Result<Complex64> {
        self.0.iter().try_fold(ZERO, |acc, f| Ok(acc + f.value(x)?))
    }
}

/// Rectangular window `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridWindow {
    pub fn centered(half_width: f64) -> Self {
        GridWindow {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }
}

/// Complex samples on a uniform grid, row-major with `y` increasing with
/// the row index. Singular pixels hold NaN and are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub window: GridWindow,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
    pub singular: Vec<bool>,
}

impl FieldGrid {
    pub fn x(&self, i: usize) -> f64 {
        let w = &self.window;
        w.x_min + (w.x_max - w.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        let w = &self.window;
        w.y_min + (w.y_max - w.y_min) * j as f64 / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.x(i), self.y(j))
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.nx + i]
    }

    pub fn is_singular(&self, i: usize, j: usize) -> bool {
        self.singular[j * self.nx + i]
    }
}

pub fn eval_grid(field: &dyn Field, window: GridWindow, nx: usize, ny: usize) -> Result<FieldGrid> {
    if nx < 2 || ny < 2 {
        return Err(CloakError::invalid(
            "resolution",
            format!("need at least 2x2 samples, got {nx}x{ny}"),
        ));
    }
    if !(window.x_max > window.x_min && window.y_max > window.y_min) {
        return Err(CloakError::invalid("window", "empty window"));
    }
    let mut grid = FieldGrid {
        window,
        nx,
        ny,
        values: Vec::new(),
        singular: Vec::new(),
    };
    let rows: Vec<Vec<(Complex64, bool)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| match field.value(grid.point(i, j)) {
                    Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok((v, false)),
                    Ok(_) | Err(CloakError::Singular(_)) => {
                        Ok((Complex64::new(f64::NAN, f64::NAN), true))
                    }
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for (v, s) in rows.into_iter().flatten() {
        grid.values.push(v);
        grid.singular.push(s);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx() -> WaveContext {
        WaveContext::new(1.0).unwrap()
    }

    #[test]
    fn plane_wave_basics() {
        let pw = plane_wave(ctx(), 5.0 * PI / 13.0);
        assert_eq!(pw.value(Point2::ORIGIN).unwrap(), Complex64::new(1.0, 0.0));
        for &p in &[Point2::new(3.0, -1.0), Point2::new(-20.0, 7.5)] {
            assert!((pw.value(p).unwrap().norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn point_source_is_symmetric_and_flags_its_center() {
        let c = ctx();
        let a = Point2::new(1.0, 2.0);
        let b = Point2::new(-3.0, 0.5);
        let u_ab = point_source(c, b).value(a).unwrap();
        let u_ba = point_source(c, a).value(b).unwrap();
        assert_eq!(u_ab, u_ba);
        assert!(matches!(point_source(c, a).value(a), Err(CloakError::Singular(_))));
    }

    #[test]
    fn superposition_identities() {
        let pw = plane_wave(ctx(), 0.3);
        let one = superpose(vec![&pw], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let zero = superpose(vec![&pw, &pw], vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
            .unwrap();
        for &p in &[Point2::new(0.5, 0.5), Point2::new(-4.0, 9.0)] {
            assert_eq!(one.value(p).unwrap(), pw.value(p).unwrap());
            assert_eq!(zero.value(p).unwrap(), ZERO);
            let g = zero.gradient(p).unwrap();
            assert_eq!(g, [ZERO; 2]);
        }
        assert!(matches!(
            superpose(vec![&pw], vec![]),
            Err(CloakError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn zero_grid() {
        let g = eval_grid(&ZeroField, GridWindow::centered(1.0), 5, 4).unwrap();
        assert!(g.values.iter().all(|v| *v == ZERO));
        assert!(eval_grid(&ZeroField, GridWindow::centered(1.0), 1, 4).is_err());
    }

    #[test]
    fn refined_grid_contains_coarse_samples() {
        let pw = plane_wave(ctx(), 1.1);
        let w = GridWindow {
            x_min: -3.0,
            x_max: 5.0,
            y_min: -2.0,
            y_max: 7.0,
        };
        let coarse = eval_grid(&pw, w, 11, 9).unwrap();
        let fine = eval_grid(&pw, w, 21, 17).unwrap();
        for j in 0..9 {
            for i in 0..11 {
                assert_eq!(coarse.at(i, j), fine.at(2 * i, 2 * j));
            }
        }
    }

    #[test]
    fn singular_pixels_are_flagged_locally() {
        let src = point_source(ctx(), Point2::ORIGIN);
        let g = eval_grid(&src, GridWindow::centered(1.0), 3, 3).unwrap();
        assert!(g.is_singular(1, 1));
        assert!(g.at(1, 1).re.is_nan());
        assert_eq!(g.singular.iter().filter(|s| **s).count(), 1);
        assert!(g.at(0, 1).re.is_finite());
    }
}
