//! Boundary curves with trapezoidal quadrature nodes, device layouts and the
//! closed-form geometry of the three-device equilateral cloak.

use std::f64::consts::{PI, TAU};

use crate::error::{CloakError, Result};
use crate::wave::{Complex64, Point2, WaveContext};

/// Kite shape constants: `(cos t + A cos 2t - A, B sin t)`.
const KITE_A: f64 = 0.65;
const KITE_B: f64 = 1.5;

/// Samples per arc used to estimate the reach of a device.
const REACH_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle { radius: f64, center: Point2 },
    Kite { scale: f64, center: Point2 },
}

impl Shape {
    pub fn point(&self, t: f64) -> Point2 {
        match *self {
            Shape::Circle { radius, center } => center + Point2::polar(radius, t),
            Shape::Kite { scale, center } => {
                let p = Point2::new(
                    t.cos() + KITE_A * (2.0 * t).cos() - KITE_A,
                    KITE_B * t.sin(),
                );
                center + scale * p
            }
        }
    }

    /// The parametrization read as `z(t) = x(t) + i y(t)` and evaluated at
    /// the complex parameter `t + i tau`. For `tau > 0` this traces a smooth
    /// curve inside a counterclockwise boundary; for a circle it is the
    /// concentric circle scaled by `exp(-tau)`.
    pub fn point_complexified(&self, t: f64, tau: f64) -> Point2 {
        match *self {
            Shape::Circle { radius, center } => center + Point2::polar(radius * (-tau).exp(), t),
            Shape::Kite { scale, center } => {
                let w = Complex64::new(t, tau);
                let i = Complex64::i();
                let z = w.cos() + KITE_A * (2.0 * w).cos() - KITE_A + i * KITE_B * w.sin();
                center + scale * Point2::new(z.re, z.im)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        match *self {
            Shape::Circle { radius, .. } => Point2::new(-radius * t.sin(), radius * t.cos()),
            Shape::Kite { scale, .. } => {
                let d = Point2::new(
                    -t.sin() - 2.0 * KITE_A * (2.0 * t).sin(),
                    KITE_B * t.cos(),
                );
                scale * d
            }
        }
    }
}

/// One trapezoidal quadrature node on a closed curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveNode {
    /// Parameter value in `[0, 2 pi)`.
    pub param: f64,
    pub position: Point2,
    /// Unit outward normal.
    pub normal: Point2,
    /// Arclength weight `|p'(t)| 2 pi / N`.
    pub weight: f64,
}

/// A closed, counterclockwise parametrized curve sampled at `N` equispaced
/// parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    shape: Shape,
    nodes: Vec<CurveNode>,
}

fn is_circle_count(n: usize) -> bool {
    n >= 8 && (n.is_power_of_two() || (n.is_multiple_of(3) && (n / 3).is_power_of_two()))
}

impl Curve {
    fn sample(shape: Shape, n: usize) -> Curve {
        let h = TAU / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let t = h * i as f64;
                let d = shape.derivative(t);
                let speed = d.norm();
                CurveNode {
                    param: t,
                    position: shape.point(t),
                    normal: Point2::new(d.y / speed, -d.x / speed),
                    weight: speed * h,
                }
            })
            .collect();
        Curve { shape, nodes }
    }

    /// Circle with `n` equispaced nodes; `n >= 8` must be a power of two or
    /// three times a power of two.
    pub fn circle(radius: f64, center: Point2, n: usize) -> Result<Curve> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CloakError::invalid("radius", format!("must be positive, got {radius}")));
        }
        if !center.is_finite() {
            return Err(CloakError::invalid("center", "must be finite"));
        }
        if !is_circle_count(n) {
            return Err(CloakError::invalid(
                "N",
                format!("node count must be >= 8 and 2^p or 3*2^p, got {n}"),
            ));
        }
        Ok(Self::sample(Shape::Circle { radius, center }, n))
    }

    /// The kite `scale (cos t + 0.65 cos 2t - 0.65, 1.5 sin t) + center`.
    pub fn kite(scale: f64, center: Point2, n: usize) -> Result<Curve> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CloakError::invalid("scale", format!("must be positive, got {scale}")));
        }
        if !center.is_finite() {
            return Err(CloakError::invalid("center", "must be finite"));
        }
        if n < 32 {
            return Err(CloakError::invalid("N", format!("kite needs at least 32 nodes, got {n}")));
        }
        Ok(Self::sample(Shape::Kite { scale, center }, n))
    }

    /// Same shape resampled with a different node count.
    pub fn with_nodes(&self, n: usize) -> Result<Curve> {
        match self.shape {
            Shape::Circle { radius, center } => Curve::circle(radius, center, n),
            Shape::Kite { scale, center } => Curve::kite(scale, center, n),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn nodes(&self) -> &[CurveNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, t: f64) -> Point2 {
        self.shape.point(t)
    }

    pub fn perimeter(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Mean node spacing, `perimeter / N`.
    pub fn spacing(&self) -> f64 {
        self.perimeter() / self.len() as f64
    }

    /// Mean of the node positions.
    pub fn centroid(&self) -> Point2 {
        let n = self.len() as f64;
        let (sx, sy) = self
            .nodes
            .iter()
            .fold((0.0, 0.0), |(sx, sy), c| (sx + c.position.x, sy + c.position.y));
        Point2::new(sx / n, sy / n)
    }

    /// Enclosed area by the trapezoidal rule on `(x dy - y dx) / 2`.
    pub fn area(&self) -> f64 {
        0.5 * self
            .nodes
            .iter()
            .map(|n| n.position.dot(n.normal) * n.weight)
            .sum::<f64>()
    }

    /// Centroid of the enclosed region (not of the nodes).
    pub fn area_centroid(&self) -> Point2 {
        let a = self.area();
        let (mx, my) = self.nodes.iter().fold((0.0, 0.0), |(mx, my), n| {
            let p = n.position;
            (
                mx + 0.5 * p.x * p.x * n.normal.x * n.weight,
                my + 0.5 * p.y * p.y * n.normal.y * n.weight,
            )
        });
        Point2::new(mx / a, my / a)
    }

    /// `(x_min, x_max, y_min, y_max)` of the nodes.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.nodes.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), n| {
                let p = n.position;
                (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y))
            },
        )
    }

    /// Point-in-polygon test on the node polygon.
    pub fn contains(&self, p: Point2) -> bool {
        let pts = &self.nodes;
        let mut inside = false;
        let mut j = pts.len() - 1;
        for i in 0..pts.len() {
            let a = pts[i].position;
            let b = pts[j].position;
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the node polygon.
    pub fn distance_to(&self, p: Point2) -> f64 {
        let pts = &self.nodes;
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            let a = pts[i].position;
            let b = pts[(i + 1) % pts.len()].position;
            let ab = b - a;
            let s = ((p - a).dot(ab) / ab.norm_sqr()).clamp(0.0, 1.0);
            best = best.min(p.distance(a + s * ab));
        }
        best
    }

    /// Largest distance from `p` to a node.
    pub fn max_distance_from(&self, p: Point2) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.position.distance(p))
            .fold(0.0, f64::max)
    }
}

/// Smallest admissible circle node count `>= base` (with the family of
/// `base`, 2^p or 3*2^p) that keeps at least 8 nodes per wavelength.
pub fn circle_node_count(ctx: &WaveContext, radius: f64, base: usize) -> usize {
    let needed = 8.0 * TAU * radius / ctx.wavelength();
    let mut n = base;
    while (n as f64) < needed {
        n *= 2;
    }
    n
}

/// A half-open parameter interval `[start, start + length)` taken mod 2 pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcInterval {
    pub start: f64,
    pub length: f64,
}

impl ArcInterval {
    pub fn contains(&self, t: f64) -> bool {
        let mut frac = ((t - self.start) / TAU).rem_euclid(1.0);
        if frac > 1.0 - 1e-12 {
            frac = 0.0;
        }
        frac * TAU < self.length * (1.0 - 1e-12)
    }
}

/// Devices `x_j` together with the partition of the boundary into arcs,
/// arc `j` being served by device `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceLayout {
    positions: Vec<Point2>,
    arcs: Vec<ArcInterval>,
    reach: Vec<f64>,
    owner: Vec<usize>,
    boundary: Curve,
}

impl DeviceLayout {
    /// Builds a layout; arcs must tile `[0, 2 pi)` in order, each starting
    /// where the previous one ends.
    pub fn new(positions: Vec<Point2>, arcs: Vec<ArcInterval>, boundary: Curve) -> Result<Self> {
        if positions.is_empty() {
            return Err(CloakError::invalid("positions", "at least one device is required"));
        }
        if positions.len() != arcs.len() {
            return Err(CloakError::LengthMismatch {
                expected: positions.len(),
                got: arcs.len(),
            });
        }
        let total: f64 = arcs.iter().map(|a| a.length).sum();
        if (total - TAU).abs() > 1e-9 || arcs.iter().any(|a| !(a.length > 0.0)) {
            return Err(CloakError::Geometry(format!(
                "arcs must have positive lengths summing to 2 pi, got {total}"
            )));
        }
        for (i, a) in arcs.iter().enumerate() {
            let next = arcs[(i + 1) % arcs.len()];
            let gap = ((a.start + a.length - next.start) / TAU).rem_euclid(1.0);
            if gap.min(1.0 - gap) > 1e-9 {
                return Err(CloakError::Geometry(format!(
                    "arc {i} does not end where arc {} starts",
                    (i + 1) % arcs.len()
                )));
            }
        }
        let scale = boundary.max_distance_from(boundary.centroid());
        for (j, &x) in positions.iter().enumerate() {
            if boundary.distance_to(x) <= 1e-9 * scale {
                return Err(CloakError::Geometry(format!("device {j} lies on the boundary")));
            }
        }

        let owner = boundary
            .nodes()
            .iter()
            .map(|n| {
                arcs.iter()
                    .position(|a| a.contains(n.param))
                    .ok_or_else(|| CloakError::Geometry("node not covered by any arc".into()))
            })
            .collect::<Result<Vec<_>>>()?;

        let reach = arcs
            .iter()
            .zip(&positions)
            .map(|(arc, &x)| {
                (0..=REACH_SAMPLES)
                    .map(|s| {
                        let t = arc.start + arc.length * s as f64 / REACH_SAMPLES as f64;
                        boundary.point(t).distance(x)
                    })
                    .fold(0.0, f64::max)
            })
            .collect();

        Ok(DeviceLayout {
            positions,
            arcs,
            reach,
            owner,
            boundary,
        })
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn arcs(&self) -> &[ArcInterval] {
        &self.arcs
    }

    /// `sup_{y in arc j} |y - x_j|` per device.
    pub fn reach(&self) -> &[f64] {
        &self.reach
    }

    pub fn boundary(&self) -> &Curve {
        &self.boundary
    }

    /// Device index owning each boundary node.
    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Node indices of arc `j`.
    pub fn arc_nodes(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == j)
            .map(|(i, _)| i)
    }
}

/// `delta`: distance of the devices from the origin; `sigma`: radius of `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakGeometry {
    pub delta: f64,
    pub sigma: f64,
}

impl CloakGeometry {
    pub fn new(delta: f64, sigma: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(CloakError::invalid("delta", format!("must be positive, got {delta}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CloakError::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(CloakGeometry { delta, sigma })
    }

    pub fn shadow_radius(&self) -> f64 {
        shadow_radius(self.sigma, self.delta)
    }

    pub fn effective_radius(&self) -> f64 {
        effective_radius(self.sigma, self.delta)
    }

    pub fn optimal_effective_radius(&self) -> f64 {
        optimal_effective_radius(self.delta)
    }
}

/// Radius of the exclusion disks of the equilateral layout,
/// `((sigma - delta/2)^2 + 3 delta^2 / 4)^(1/2)`.
pub fn shadow_radius(sigma: f64, delta: f64) -> f64 {
    let a = sigma - 0.5 * delta;
    (a * a + 0.75 * delta * delta).sqrt()
}

/// Radius of the largest disk inscribed in the effective cloaked region;
/// non-positive when that region is empty.
pub fn effective_radius(sigma: f64, delta: f64) -> f64 {
    delta - shadow_radius(sigma, delta)
}

/// `(1 - sqrt(3)/2) delta`, attained at `sigma = delta / 2`.
pub fn optimal_effective_radius(delta: f64) -> f64 {
    (1.0 - 0.75_f64.sqrt()) * delta
}

/// Angles of the three equilateral devices; the first sits on the positive y-axis.
pub fn equilateral_angles() -> [f64; 3] {
    [PI / 2.0, PI / 2.0 + TAU / 3.0, PI / 2.0 + 2.0 * TAU / 3.0]
}

/// Three devices at distance `delta` forming an equilateral triangle, `D`
/// the disk of radius `sigma` at the origin, cut into three equal arcs each
/// centered on the direction of its device.
pub fn equilateral_layout(
    delta: f64,
    sigma: f64,
    n: usize,
) -> Result<(DeviceLayout, CloakGeometry)> {
    let geometry = CloakGeometry::new(delta, sigma)?;
    let boundary = Curve::circle(sigma, Point2::ORIGIN, n)?;
    let angles = equilateral_angles();
    let positions = angles.iter().map(|&a| Point2::polar(delta, a)).collect();
    let arcs = angles
        .iter()
        .map(|&a| ArcInterval {
            start: (a - PI / 3.0).rem_euclid(TAU),
            length: TAU / 3.0,
        })
        .collect();
    Ok((DeviceLayout::new(positions, arcs, boundary)?, geometry))
}

/// Whether `x` lies strictly outside every exclusion disk.
pub fn in_region_r(x: Point2, layout: &DeviceLayout) -> bool {
    layout
        .positions
        .iter()
        .zip(&layout.reach)
        .all(|(&c, &r)| x.distance(c) > r)
}

/// Grid resolution used by [`min_device_check`].
pub const REGION_CHECK_GRID: usize = 512;

/// Samples `D` on a grid over its bounding box and reports whether any
/// sample lies in the effective cloaked region `D ∩ R`.
pub fn min_device_check(layout: &DeviceLayout, domain: &Curve) -> bool {
    let (x0, x1, y0, y1) = domain.bounding_box();
    let n = REGION_CHECK_GRID;
    (0..n).any(|iy| {
        let y = y0 + (y1 - y0) * (iy as f64 + 0.5) / n as f64;
        (0..n).any(|ix| {
            let x = x0 + (x1 - x0) * (ix as f64 + 0.5) / n as f64;
            let p = Point2::new(x, y);
            domain.contains(p) && in_region_r(p, layout)
        })
    })
}
