//! Least-squares device design: fit the device field to `-u_i` on a small
//! control circle of radius `alpha` and to zero on a large circle of radius
//! `gamma`, solved by truncated SVD.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{CloakError, Result};
use crate::fields::Field;
use crate::geometry::DeviceLayout;
use crate::linalg::truncated_lstsq;
use crate::multipole::{CloakSolution, MultipoleSource, Provenance};
use crate::specfun::radiating_waves;
use crate::wave::{Complex64, Point2, WaveContext};

pub const DEFAULT_REL_CUTOFF: f64 = 1e-12;
pub const DEFAULT_WEIGHT_RATIO: f64 = 1.0;

/// Samples per control circle used unless configured otherwise: `4M + 2`.
pub fn default_samples(order: usize) -> usize {
    4 * order + 2
}

#[derive(Debug, Clone)]
pub struct LeastSquaresSystem {
    ctx: WaveContext,
    layout: DeviceLayout,
    order: usize,
    alpha: f64,
    gamma: f64,
    n_alpha: usize,
    matrix: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
    row_weights: Vec<f64>,
}

impl LeastSquaresSystem {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<Complex64> {
        &self.rhs
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Rows `0..n_alpha` sample the alpha-circle, the rest the gamma-circle.
    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    /// Weighted residual `||A b - rhs||` of flat coefficients, ordered by
    /// device then `m = -M..=M`.
    pub fn residual(&self, coefficients: &DVector<Complex64>) -> f64 {
        (&self.matrix * coefficients - &self.rhs).norm()
    }
}

/// Result of [`svd_solve`].
#[derive(Debug, Clone)]
pub struct SvdCloak {
    pub solution: CloakSolution,
    /// Flat coefficient vector in column order of the system.
    pub coefficients: DVector<Complex64>,
    pub residual: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

fn circle_point(radius: f64, i: usize, n: usize) -> Point2 {
    Point2::polar(radius, TAU * i as f64 / n as f64)
}

#[allow(clippy::too_many_arguments)]
pub fn build_system(
    ctx: WaveContext,
    incident: &dyn Field,
    layout: &DeviceLayout,
    alpha: f64,
    gamma: f64,
    order: usize,
    n_alpha: usize,
    n_gamma: usize,
    weight_ratio: f64,
) -> Result<LeastSquaresSystem> {
    let dists: Vec<f64> = layout.positions().iter().map(|p| p.norm()).collect();
    let d_min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = dists.iter().copied().fold(0.0, f64::max);
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CloakError::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if alpha >= d_min {
        return Err(CloakError::Geometry(format!(
            "alpha = {alpha} reaches the nearest device at distance {d_min}"
        )));
    }
    if !(gamma > d_max && gamma.is_finite()) {
        return Err(CloakError::Geometry(format!(
            "gamma = {gamma} must exceed the farthest device distance {d_max}"
        )));
    }
    let min_samples = 2 * order + 2;
    for (name, n) in [("n_alpha", n_alpha), ("n_gamma", n_gamma)] {
        if n < min_samples {
            return Err(CloakError::invalid(name, format!("need at least {min_samples}, got {n}")));
        }
    }
    if !(weight_ratio > 0.0 && weight_ratio.is_finite()) {
        return Err(CloakError::invalid("weight_ratio", format!("must be positive, got {weight_ratio}")));
    }

    let rows = n_alpha + n_gamma;
    let width = 2 * order + 1;
    let cols = layout.len() * width;
    let row_data: Vec<(Vec<Complex64>, Complex64, f64)> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let (x, target, w) = if r < n_alpha {
                let x = circle_point(alpha, r, n_alpha);
                (x, -incident.value(x)?, 1.0)
            } else {
                (circle_point(gamma, r - n_alpha, n_gamma), Complex64::new(0.0, 0.0), weight_ratio)
            };
            let mut row = Vec::with_capacity(cols);
            for &c in layout.positions() {
                row.extend(radiating_waves(&ctx, x - c, order)?.into_iter().map(|v| v * w));
            }
            Ok((row, target * w, w))
        })
        .collect::<Result<_>>()?;

    let mut matrix = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    let mut row_weights = Vec::with_capacity(rows);
    for (r, (row, target, w)) in row_data.into_iter().enumerate() {
        if row.iter().chain(std::iter::once(&target)).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(CloakError::Numerical(format!("non-finite entry in row {r}")));
        }
        for (c, v) in row.into_iter().enumerate() {
            matrix[(r, c)] = v;
        }
        rhs[r] = target;
        row_weights.push(w);
    }
    Ok(LeastSquaresSystem {
        ctx,
        layout: layout.clone(),
        order,
        alpha,
        gamma,
        n_alpha,
        matrix,
        rhs,
        row_weights,
    })
}

/// Minimum-norm least-squares coefficients; singular values at or below
/// `rel_cutoff * sigma_max` are discarded, so `rel_cutoff = 1` yields zero.
///
/// Columns are scaled to unit norm before the decomposition. High-order
/// Hankel columns are many decades larger than low-order ones, and without
/// equilibration a relative cutoff removes the useful directions.
pub fn svd_solve(sys: &LeastSquaresSystem, rel_cutoff: f64) -> Result<SvdCloak> {
    let scales: Vec<f64> = sys
        .matrix
        .column_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 { 1.0 / n } else { 1.0 }
        })
        .collect();
    let mut scaled = sys.matrix.clone();
    for (mut col, &s) in scaled.column_iter_mut().zip(&scales) {
        col *= Complex64::new(s, 0.0);
    }
    let mut sol = truncated_lstsq(&scaled, &sys.rhs, rel_cutoff)?;
    for (x, &s) in sol.solution.iter_mut().zip(&scales) {
        *x *= s;
    }
    let width = 2 * sys.order + 1;
    let sources = sys
        .layout
        .positions()
        .iter()
        .enumerate()
        .map(|(j, &x)| MultipoleSource::new(x, sol.solution.rows(j * width, width).iter().copied().collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SvdCloak {
        solution: CloakSolution::new(sys.ctx, sources, sys.layout.clone(), Provenance::Svd)?,
        residual: sys.residual(&sol.solution),
        coefficients: sol.solution,
        rank: sol.rank,
        singular_values: sol.singular_values,
    })
}
