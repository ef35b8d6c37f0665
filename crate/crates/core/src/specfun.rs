//! Integer-order Bessel functions of real positive argument, cylindrical
//! waves and the free-space Helmholtz Green's function in the plane.
//!
//! `J_n` is computed for all orders at once by Miller's downward recurrence,
//! normalized with `1 = J_0 + 2 sum J_2k`. The same downward pass accumulates
//! the Neumann series for `Y_0` and `Y_1`, after which `Y_n` follows from the
//! (stable) upward recurrence. Orders beyond the overflow threshold of `Y_n`
//! saturate to `-inf`.

use std::f64::consts::FRAC_2_PI;

use crate::error::{CloakError, Result};
use crate::wave::{CVec2, Complex64, Point2, WaveContext};

/// Largest supported |order|.
pub const MAX_ORDER: usize = 1024;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_AT: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_n(t)` and `Y_n(t)` for `n = 0..=nmax` at a single argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    t: f64,
    j: Vec<f64>,
    y: Vec<f64>,
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(CloakError::Domain(format!(
            "order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn miller_start(nmax: usize, t: f64) -> usize {
    let top = (nmax as f64).max(t);
    let start = top + 40.0 + (60.0 * top).sqrt();
    // even, so the normalization sum sees J_0 with the right parity
    2 * ((start as usize) / 2 + 1)
}

/// Downward recurrence. Returns `J_0..=J_{nmax+1}` and, when `with_y`,
/// the values `(Y_0, Y_1)`.
fn miller(nmax: usize, t: f64, with_y: bool) -> (Vec<f64>, Option<(f64, f64)>) {
    let keep = nmax + 2;
    let mut j = vec![0.0; keep];
    if t == 0.0 {
        j[0] = 1.0;
        return (j, None);
    }
    let start = miller_start(nmax + 1, t);
    let two_over_t = 2.0 / t;

    // unnormalized values j_{k+1}, j_k while walking k downward
    let mut above = 0.0_f64;
    let mut cur = 1e-30_f64;
    // sum_{k>=1} J_{2k}, sum_{k>=1} (-1)^k J_{2k} / k, sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k
    let mut even_sum = 0.0;
    let mut y0_sum = 0.0;
    let mut y1_sum = 0.0;
    // J_{2k+1} is needed when we reach J_{2k-1}; remember the odd terms
    let mut odd_above = 0.0_f64;
    let mut pending_even: Option<(usize, f64)> = None;

    let mut k = start;
    loop {
        if k < keep {
            j[k] = cur;
        }
        if k.is_multiple_of(2) {
            if k >= 2 {
                even_sum += cur;
                let half = k / 2;
                let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
                y0_sum += sign * cur / half as f64;
                pending_even = Some((half, sign));
            }
        } else {
            // k = 2h - 1 closes the Y_1 term for h = (k + 1) / 2 whose J_{2h+1} is odd_above
            if let Some((half, sign)) = pending_even.take() {
                debug_assert_eq!(2 * half - 1, k);
                y1_sum += sign * (cur - odd_above) / half as f64;
            }
            odd_above = cur;
        }
        if k == 0 {
            break;
        }
        let below = (k as f64) * two_over_t * cur - above;
        above = cur;
        cur = below;
        k -= 1;

        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            odd_above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            y0_sum *= RESCALE_BY;
            y1_sum *= RESCALE_BY;
            for v in j.iter_mut().skip(k + 1) {
                *v *= RESCALE_BY;
            }
        }
    }

    let norm = j[0] + 2.0 * even_sum;
    for v in j.iter_mut() {
        *v /= norm;
    }
    if !with_y {
        return (j, None);
    }
    let log_term = (0.5 * t).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * (y0_sum / norm);
    let y1 = FRAC_2_PI * (log_term * j[1] - j[0] / t) + FRAC_2_PI * (y1_sum / norm);
    (j, Some((y0, y1)))
}

impl BesselTable {
    /// Tabulates `J_n(t)`, `Y_n(t)` for `0 <= n <= nmax` (one extra order is
    /// kept internally for derivatives).
    pub fn new(nmax: usize, t: f64) -> Result<Self> {
        check_order(nmax)?;
        if !(t.is_finite() && t > 0.0) {
            return Err(CloakError::Domain(format!(
                "Bessel Y requires a positive argument, got {t}"
            )));
        }
        let (j, y01) = miller(nmax, t, true);
        let (y0, y1) = y01.expect("requested Y values");
        let keep = nmax + 2;
        let mut y = vec![0.0; keep];
        y[0] = y0;
        y[1] = y1;
        let two_over_t = 2.0 / t;
        for n in 1..keep - 1 {
            let next = (n as f64) * two_over_t * y[n] - y[n - 1];
            y[n + 1] = if next.is_finite() { next } else { f64::NEG_INFINITY };
            if y[n + 1] == f64::NEG_INFINITY {
                for v in y.iter_mut().skip(n + 2) {
                    *v = f64::NEG_INFINITY;
                }
                break;
            }
        }
        Ok(BesselTable { t, j, y })
    }

    /// Tabulates only `J_n`; allows `t = 0`.
    pub fn new_j_only(nmax: usize, t: f64) -> Result<Self> {
        check_order(nmax)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(CloakError::Domain(format!(
                "Bessel J requires a non-negative argument, got {t}"
            )));
        }
        let (j, _) = miller(nmax, t, false);
        Ok(BesselTable { t, j, y: Vec::new() })
    }

    pub fn argument(&self) -> f64 {
        self.t
    }

    pub fn max_order(&self) -> usize {
        self.j.len() - 2
    }

    fn parity(n: i32) -> f64 {
        if n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn j(&self, n: i32) -> f64 {
        Self::parity(n.min(0)) * self.j[n.unsigned_abs() as usize]
    }

    pub fn y(&self, n: i32) -> f64 {
        Self::parity(n.min(0)) * self.y[n.unsigned_abs() as usize]
    }

    /// `J_n'(t)`.
    pub fn jp(&self, n: i32) -> f64 {
        let a = n.unsigned_abs() as usize;
        let d = if a == 0 {
            -self.j[1]
        } else {
            0.5 * (self.j[a - 1] - self.j[a + 1])
        };
        Self::parity(n.min(0)) * d
    }

    /// `Y_n'(t)`.
    pub fn yp(&self, n: i32) -> f64 {
        let a = n.unsigned_abs() as usize;
        let d = if a == 0 {
            -self.y[1]
        } else {
            0.5 * (self.y[a - 1] - self.y[a + 1])
        };
        Self::parity(n.min(0)) * d
    }

    /// `H_n^(1)(t) = J_n(t) + i Y_n(t)`.
    pub fn h1(&self, n: i32) -> Complex64 {
        Complex64::new(self.j(n), self.y(n))
    }

    pub fn h1p(&self, n: i32) -> Complex64 {
        Complex64::new(self.jp(n), self.yp(n))
    }
}

/// `(J_n(t), Y_n(t))` for integer `n`, `|n| <= 1024`, `t > 0`.
pub fn bessel_j_y(n: i32, t: f64) -> Result<(f64, f64)> {
    let table = BesselTable::new(n.unsigned_abs() as usize, t)?;
    Ok((table.j(n), table.y(n)))
}

/// `J_n(t)` for `t >= 0`.
pub fn bessel_j(n: i32, t: f64) -> Result<f64> {
    let table = BesselTable::new_j_only(n.unsigned_abs() as usize, t)?;
    Ok(table.j(n))
}

pub fn hankel1(n: i32, t: f64) -> Result<Complex64> {
    let (j, y) = bessel_j_y(n, t)?;
    Ok(Complex64::new(j, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    /// `U_m(v) = J_m(k|v|) exp(i m arg v)`
    Entire,
    /// `V_m(v) = H_m^(1)(k|v|) exp(i m arg v)`
    Radiating,
}

/// Cylindrical wave `U_m` or `V_m` evaluated at `v`.
pub fn cyl_wave(kind: WaveKind, m: i32, ctx: &WaveContext, v: Point2) -> Result<Complex64> {
    let r = v.norm();
    let phase = Complex64::from_polar(1.0, m as f64 * v.arg());
    match kind {
        WaveKind::Entire => Ok(bessel_j(m, ctx.k() * r)? * phase),
        WaveKind::Radiating => {
            if r == 0.0 {
                return Err(CloakError::Singular(v));
            }
            Ok(hankel1(m, ctx.k() * r)? * phase)
        }
    }
}

/// `grad_y conj(U_m(y - c))` at `v = y - c`, including the angular term
/// through `grad arg v = v^perp / |v|^2`.
pub fn grad_conj_entire(m: i32, ctx: &WaveContext, v: Point2) -> Result<CVec2> {
    let r = v.norm();
    if r == 0.0 {
        return Err(CloakError::Singular(v));
    }
    let table = BesselTable::new_j_only(m.unsigned_abs() as usize, ctx.k() * r)?;
    Ok(grad_conj_entire_from(&table, m, ctx.k(), v))
}

pub(crate) fn grad_conj_entire_from(table: &BesselTable, m: i32, k: f64, v: Point2) -> CVec2 {
    let r2 = v.norm_sqr();
    let r = r2.sqrt();
    let e = Complex64::from_polar(1.0, -(m as f64) * v.arg());
    let radial = e * (k * table.jp(m) / r);
    let angular = e * Complex64::new(0.0, -(m as f64) * table.j(m) / r2);
    let vp = v.perp();
    [radial * v.x + angular * vp.x, radial * v.y + angular * vp.y]
}

/// `G(x, y) = (i/4) H_0^(1)(k|x - y|)`.
pub fn greens(ctx: &WaveContext, x: Point2, y: Point2) -> Result<Complex64> {
    let r = x.distance(y);
    if r == 0.0 {
        return Err(CloakError::Singular(x));
    }
    Ok(Complex64::new(0.0, 0.25) * hankel1(0, ctx.k() * r)?)
}

/// `grad_y G(x, y) = -(i k / 4) H_1^(1)(k|x - y|) (y - x)/|x - y|`.
pub fn greens_grad_y(ctx: &WaveContext, x: Point2, y: Point2) -> Result<CVec2> {
    let d = y - x;
    let r = d.norm();
    if r == 0.0 {
        return Err(CloakError::Singular(x));
    }
    let scale = Complex64::new(0.0, -0.25 * ctx.k()) * hankel1(1, ctx.k() * r)? / r;
    Ok([scale * d.x, scale * d.y])
}

/// `G` and `grad_y G` together, sharing one Bessel evaluation.
pub fn greens_with_grad_y(ctx: &WaveContext, x: Point2, y: Point2) -> Result<(Complex64, CVec2)> {
    let d = y - x;
    let r = d.norm();
    if r == 0.0 {
        return Err(CloakError::Singular(x));
    }
    let table = BesselTable::new(1, ctx.k() * r)?;
    let g = Complex64::new(0.0, 0.25) * table.h1(0);
    let scale = Complex64::new(0.0, -0.25 * ctx.k()) * table.h1(1) / r;
    Ok((g, [scale * d.x, scale * d.y]))
}

/// `V_m(v)` for `m = -mmax..=mmax`, indexed by `m + mmax`.
pub fn radiating_waves(ctx: &WaveContext, v: Point2, mmax: usize) -> Result<Vec<Complex64>> {
    let r = v.norm();
    if r == 0.0 {
        return Err(CloakError::Singular(v));
    }
    let table = BesselTable::new(mmax, ctx.k() * r)?;
    let base = Complex64::from_polar(1.0, v.arg());
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * mmax + 1];
    let mut phase = Complex64::new(1.0, 0.0);
    for m in 0..=mmax as i32 {
        let h = table.h1(m);
        out[mmax + m as usize] = h * phase;
        if m > 0 {
            // V_{-m} = (-1)^m H_m e^{-i m theta}
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            out[mmax - m as usize] = h * phase.conj() * sign;
        }
        phase *= base;
    }
    Ok(out)
}
