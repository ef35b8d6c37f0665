//! Multipolar cloaking devices.
//!
//! Each device `j` at `x_j` radiates `sum_m b_{j,m} V_m(x - x_j)`. Splitting
//! Green's formula over the arcs of the boundary and expanding the Green's
//! function with Graf's addition theorem about `x_j` gives
//!
//! ```text
//! b_{j,m} = (i/4) ∫_{arc j} [ -(n . grad u_i) conj U_m(y - x_j)
//!                             + u_i n . grad conj U_m(y - x_j) ] dS_y
//! ```
//!
//! and the device field then equals the interior cloak wherever
//! `|x - x_j| > sup_{y in arc j} |y - x_j|` for all `j`.

use crate::error::{CloakError, Result};
use crate::fields::{superpose, Field, IncidentField};
use crate::geometry::DeviceLayout;
use crate::interior::{build_densities, LayerDensities};
use crate::specfun::{grad_conj_entire_from, BesselTable};
use crate::wave::{dot_c, Complex64, Point2, WaveContext};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `ceil((k delta / 2)(1 + sqrt(3)/2))`, the number of multipole orders per
/// device used for a device distance `delta`.
pub fn truncation_m(ctx: &WaveContext, delta: f64) -> Result<usize> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CloakError::invalid("delta", format!("must be positive, got {delta}")));
    }
    Ok((0.5 * ctx.k() * delta * (1.0 + 0.75_f64.sqrt())).ceil() as usize)
}

/// One device: a center and coefficients `b_m`, `|m| <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleSource {
    center: Point2,
    order: usize,
    coefficients: Vec<Complex64>,
}

impl MultipoleSource {
    pub fn new(center: Point2, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len().is_multiple_of(2) {
            return Err(CloakError::invalid(
                "coefficients",
                format!("need 2M+1 coefficients, got {}", coefficients.len()),
            ));
        }
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(CloakError::invalid("coefficients", "non-finite coefficient"));
        }
        let order = coefficients.len() / 2;
        Ok(MultipoleSource {
            center,
            order,
            coefficients,
        })
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients for `m = -M..=M`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, m: i32) -> Complex64 {
        self.coefficients[(m + self.order as i32) as usize]
    }

    /// Products `b_m V_m(x - center)` ordered by `m = -M..=M`. Products that
    /// overflow are reported as infinite.
    pub fn terms(&self, ctx: &WaveContext, x: Point2) -> Result<Vec<Complex64>> {
        let v = x - self.center;
        let r = v.norm();
        if r == 0.0 {
            return Err(CloakError::Singular(x));
        }
        let m_max = self.order;
        let table = BesselTable::new(m_max, ctx.k() * r)?;
        let base = Complex64::from_polar(1.0, v.arg());
        let mut out = vec![ZERO; 2 * m_max + 1];
        let mut phase = Complex64::new(1.0, 0.0);
        for m in 0..=m_max as i32 {
            let h = table.h1(m);
            let mut put = |idx: usize, wave: Complex64| {
                let b = self.coefficients[idx];
                out[idx] = if b == ZERO { ZERO } else { saturate(b * wave) };
            };
            put(m_max + m as usize, h * phase);
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                put(m_max - m as usize, h * phase.conj() * sign);
            }
            phase *= base;
        }
        Ok(out)
    }

    pub fn eval(&self, ctx: &WaveContext, x: Point2) -> Result<Complex64> {
        let terms = self.terms(ctx, x)?;
        Ok(sum_by_order(&terms, self.order))
    }

    fn scaled(&self, c: Complex64) -> MultipoleSource {
        MultipoleSource {
            center: self.center,
            order: self.order,
            coefficients: self.coefficients.iter().map(|b| *b * c).collect(),
        }
    }
}

fn saturate(z: Complex64) -> Complex64 {
    if z.re.is_finite() && z.im.is_finite() {
        z
    } else {
        Complex64::new(f64::INFINITY, 0.0)
    }
}

fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => ZERO,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Sums terms indexed by `m + order`, ascending in `|m|`, pairwise.
fn sum_by_order(terms: &[Complex64], order: usize) -> Complex64 {
    let mut ordered = Vec::with_capacity(terms.len());
    ordered.push(terms[order]);
    for m in 1..=order {
        ordered.push(terms[order + m]);
        ordered.push(terms[order - m]);
    }
    if ordered.iter().any(|z| z.re.is_infinite()) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    pairwise_sum(&ordered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Green,
    Svd,
    Illusion,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Green => "green",
            Provenance::Svd => "svd",
            Provenance::Illusion => "illusion",
        }
    }
}

/// A set of devices, one per layout position.
#[derive(Debug, Clone)]
pub struct CloakSolution {
    ctx: WaveContext,
    sources: Vec<MultipoleSource>,
    layout: DeviceLayout,
    provenance: Provenance,
}

impl CloakSolution {
    pub fn new(
        ctx: WaveContext,
        sources: Vec<MultipoleSource>,
        layout: DeviceLayout,
        provenance: Provenance,
    ) -> Result<Self> {
        if sources.len() != layout.len() {
            return Err(CloakError::LengthMismatch {
                expected: layout.len(),
                got: sources.len(),
            });
        }
        for (s, &x) in sources.iter().zip(layout.positions()) {
            if s.center != x {
                return Err(CloakError::Geometry(
                    "device center differs from layout position".into(),
                ));
            }
        }
        Ok(CloakSolution {
            ctx,
            sources,
            layout,
            provenance,
        })
    }

    pub fn context(&self) -> WaveContext {
        self.ctx
    }

    pub fn sources(&self) -> &[MultipoleSource] {
        &self.sources
    }

    pub fn layout(&self) -> &DeviceLayout {
        &self.layout
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Largest per-device truncation order.
    pub fn order(&self) -> usize {
        self.sources.iter().map(|s| s.order).max().unwrap_or(0)
    }

    /// Same devices with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> CloakSolution {
        CloakSolution {
            sources: self.sources.iter().map(|s| s.scaled(c)).collect(),
            ..self.clone()
        }
    }

    /// Zero coefficients of the same shape.
    pub fn zeroed(&self) -> CloakSolution {
        self.scaled(ZERO)
    }
}

/// Device coefficients from layer densities sampled on the layout boundary.
pub fn coefficients_from_densities(
    dens: &LayerDensities,
    layout: &DeviceLayout,
    order: usize,
    provenance: Provenance,
) -> Result<CloakSolution> {
    if dens.curve() != layout.boundary() {
        return Err(CloakError::Geometry(
            "densities were not sampled on the layout boundary".into(),
        ));
    }
    let ctx = dens.context();
    let k = ctx.k();
    let m_max = order as i32;
    let mut coeffs = vec![vec![ZERO; 2 * order + 1]; layout.len()];
    let nodes = dens.curve().nodes();
    for (i, node) in nodes.iter().enumerate() {
        let q = dens.monopole()[i];
        let u = dens.dipole()[i];
        if q == ZERO && u == ZERO {
            continue;
        }
        let j = layout.owner()[i];
        let v = node.position - layout.positions()[j];
        let table = BesselTable::new_j_only(order, k * v.norm())?;
        let theta = v.arg();
        let row = &mut coeffs[j];
        for m in -m_max..=m_max {
            let conj_u = Complex64::from_polar(table.j(m), -(m as f64) * theta);
            let grad = grad_conj_entire_from(&table, m, k, v);
            row[(m + m_max) as usize] += (q * conj_u + u * dot_c(node.normal, grad)) * node.weight;
        }
    }
    let quarter_i = Complex64::new(0.0, 0.25);
    let sources = coeffs
        .into_iter()
        .zip(layout.positions())
        .map(|(row, &x)| MultipoleSource::new(x, row.into_iter().map(|b| b * quarter_i).collect()))
        .collect::<Result<Vec<_>>>()?;
    CloakSolution::new(ctx, sources, layout.clone(), provenance)
}

/// Devices reproducing the interior cloak of `incident` on the region `R`.
pub fn green_coefficients(
    ctx: WaveContext,
    incident: &dyn IncidentField,
    layout: &DeviceLayout,
    order: usize,
) -> Result<CloakSolution> {
    let dens = build_densities(ctx, incident, layout.boundary())?;
    coefficients_from_densities(&dens, layout, order, Provenance::Green)
}

/// Devices that cloak and, in addition, radiate the field `virtual_scattered`
/// of a virtual object outside `D`, so that far away the total field looks
/// like `incident + virtual_scattered`.
///
/// For a radiating `v`, the layer potentials built from `v` reproduce `+v`
/// outside `D` and vanish inside, so the coefficients are those of
/// `incident + virtual_scattered`.
pub fn illusion_coefficients(
    ctx: WaveContext,
    incident: &dyn IncidentField,
    virtual_scattered: &dyn IncidentField,
    layout: &DeviceLayout,
    order: usize,
) -> Result<CloakSolution> {
    let one = Complex64::new(1.0, 0.0);
    let sum = superpose(vec![incident, virtual_scattered], vec![one, one])?;
    let dens = build_densities(ctx, &sum, layout.boundary())?;
    coefficients_from_densities(&dens, layout, order, Provenance::Illusion)
}

/// `sum_j sum_{|m| <= M} b_{j,m} V_m(x - x_j)`.
pub fn eval_device_field(sol: &CloakSolution, x: Point2) -> Result<Complex64> {
    let mut total = ZERO;
    for s in &sol.sources {
        total += s.eval(&sol.ctx, x)?;
    }
    Ok(saturate(total))
}

impl Field for CloakSolution {
    fn value(&self, x: Point2) -> Result<Complex64> {
        eval_device_field(self, x)
    }
}
