//! Truncated-SVD minimum-norm least squares on complex dense matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{CloakError, Result};
use crate::wave::Complex64;

const MAX_SVD_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub solution: DVector<Complex64>,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Number of singular values kept.
    pub rank: usize,
    /// `|| A x - b ||_2`
    pub residual: f64,
}

/// Minimizes `||A x - b||` keeping only singular values strictly above
/// `rel_cutoff * sigma_max`; among minimizers the one of least norm.
pub fn truncated_lstsq(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rel_cutoff: f64,
) -> Result<TruncatedSolution> {
    if a.nrows() != b.len() {
        return Err(CloakError::LengthMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    if !(rel_cutoff > 0.0 && rel_cutoff <= 1.0) {
        return Err(CloakError::invalid(
            "rel_cutoff",
            format!("must lie in (0, 1], got {rel_cutoff}"),
        ));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(CloakError::Numerical("matrix has non-finite entries".into()));
    }
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_SVD_ITERATIONS)
        .ok_or_else(|| CloakError::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^H requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma_max = order.first().map(|&i| svd.singular_values[i]).unwrap_or(0.0);
    let threshold = rel_cutoff * sigma_max;

    let coeffs = u.adjoint() * b;
    let mut x = DVector::<Complex64>::zeros(a.ncols());
    let mut rank = 0;
    for &i in &order {
        let s = svd.singular_values[i];
        if s > threshold && s > 0.0 {
            rank += 1;
            let c = coeffs[i] / s;
            for (col, xv) in x.iter_mut().enumerate() {
                *xv += v_t[(i, col)].conj() * c;
            }
        }
    }
    let residual = (a * &x - b).norm();
    Ok(TruncatedSolution {
        solution: x,
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        rank,
        residual,
    })
}
