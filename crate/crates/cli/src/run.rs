//! Scenario and sweep orchestration.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use cloak_core::fields::{
    eval_grid, plane_wave, point_source, Field, FieldGrid, FieldSum, GridWindow, IncidentField,
};
use cloak_core::geometry::{
    circle_node_count, equilateral_angles, optimal_effective_radius, ArcInterval, Curve, DeviceLayout,
};
use cloak_core::interior::build_densities;
use cloak_core::metrics::{device_radius_estimate, interior_error, radiation_error};
use cloak_core::multipole::{green_coefficients, illusion_coefficients, truncation_m, CloakSolution};
use cloak_core::scatter::{
    fitted_kite, scattering_suppression_with, solve_scattering, ScatteredField, SuppressionOptions,
    DEFAULT_PROBE_SAMPLES,
};
use cloak_core::svd::{build_system, default_samples, svd_solve};
use cloak_core::{CloakError, Complex64, Point2, WaveContext};

use crate::config::{
    GridRequest, IncidentConfig, MethodKind, Quantity, ScenarioConfig, ScattererConfig, Task, VirtualConfig,
};
use crate::error::{CliError, Context, Result};
use crate::io::{coefficient_text, jsonl, Artifacts, GridMeta, Manifest};

/// Node count used when `geometry.nodes` is `auto`.
pub const AUTO_NODES_BASE: usize = 384;
/// Samples on the probe circles of the interior task.
pub const INTERIOR_PROBE_SAMPLES: usize = 256;

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const SWEEP_FILE: &str = "sweep.jsonl";

/// Lengths converted to absolute units for one configuration.
struct Scene {
    ctx: WaveContext,
    lambda: f64,
    incident: Box<dyn IncidentField>,
}

impl Scene {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let ctx = WaveContext::new(cfg.wave.k).context("wave")?;
        let lambda = ctx.wavelength();
        let incident: Box<dyn IncidentField> = match cfg.incident {
            IncidentConfig::Plane { angle } => Box::new(plane_wave(ctx, angle)),
            IncidentConfig::Point { position } => Box::new(point_source(ctx, point(position, lambda))),
        };
        Ok(Scene { ctx, lambda, incident })
    }

    fn nodes(&self, cfg: &ScenarioConfig, sigma: f64) -> usize {
        cfg.geometry
            .nodes
            .fixed()
            .unwrap_or_else(|| circle_node_count(&self.ctx, sigma, AUTO_NODES_BASE))
    }
}

fn point(p: [f64; 2], scale: f64) -> Point2 {
    Point2::new(p[0] * scale, p[1] * scale)
}

/// The equilateral three-device layout rotated by `orientation`.
fn layout(delta: f64, sigma: f64, nodes: usize, orientation: f64) -> Result<DeviceLayout> {
    let boundary = Curve::circle(sigma, Point2::ORIGIN, nodes).context("geometry")?;
    let angles = equilateral_angles().map(|a| a + orientation);
    let positions = angles.iter().map(|&a| Point2::polar(delta, a)).collect();
    let arcs = angles
        .iter()
        .map(|&a| ArcInterval {
            start: (a - PI / 3.0).rem_euclid(TAU),
            length: TAU / 3.0,
        })
        .collect();
    DeviceLayout::new(positions, arcs, boundary).context("geometry")
}

fn obstacle(cfg: &ScenarioConfig, lambda: f64) -> Result<Option<(Curve, SuppressionOptions)>> {
    let (kite, radius, fraction, center, nodes, n_src, shrink) = match cfg.scatterer {
        ScattererConfig::None => return Ok(None),
        ScattererConfig::Kite { radius, fraction, center, nodes, n_src, shrink } => {
            (true, radius, fraction, center, nodes, n_src, shrink)
        }
        ScattererConfig::Circle { radius, fraction, center, nodes, n_src, shrink } => {
            (false, radius, fraction, center, nodes, n_src, shrink)
        }
    };
    let r = match radius {
        Some(r) => r * lambda,
        // validation guarantees delta is present here
        None => fraction * optimal_effective_radius(cfg.geometry.delta.unwrap_or(0.0) * lambda),
    };
    let c = point(center, lambda);
    let curve = if kite {
        fitted_kite(r, c, nodes)
    } else {
        Curve::circle(r, c, nodes)
    }
    .context("scatterer")?;
    let opts = SuppressionOptions {
        n_src,
        src_shrink: shrink,
        probe_samples: DEFAULT_PROBE_SAMPLES,
    };
    Ok(Some((curve, opts)))
}

/// NaN inside an obstacle, where the total field has no meaning.
struct Masked<'a> {
    inner: &'a dyn Field,
    hole: Option<&'a Curve>,
}

impl Field for Masked<'_> {
    fn value(&self, x: Point2) -> cloak_core::Result<Complex64> {
        match self.hole {
            Some(c) if c.contains(x) => Err(CloakError::Singular(x)),
            _ => self.inner.value(x),
        }
    }
}

fn window(req: &GridRequest, lambda: f64) -> GridWindow {
    match (req.window, req.half_width) {
        (Some([x0, x1, y0, y1]), _) => GridWindow {
            x_min: x0 * lambda,
            x_max: x1 * lambda,
            y_min: y0 * lambda,
            y_max: y1 * lambda,
        },
        (None, h) => GridWindow::centered(h.unwrap_or(1.0) * lambda),
    }
}

fn grid(field: &dyn Field, req: &GridRequest, lambda: f64) -> Result<FieldGrid> {
    eval_grid(field, window(req, lambda), req.nx, req.ny.unwrap_or(req.nx)).context("grid")
}

fn grid_stem(req_index: usize, quantity: Quantity, method: Option<MethodKind>) -> String {
    match method {
        Some(m) => format!("grid{req_index:02}_{}_{}", quantity.as_str(), m.as_str()),
        None => format!("grid{req_index:02}_{}", quantity.as_str()),
    }
}

/// One line of `metrics.jsonl` or `sweep.jsonl` for a device design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloakRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<usize>,
    pub method: MethodKind,
    pub k: f64,
    /// Device distance in wavelengths.
    pub delta_wavelengths: f64,
    pub delta: f64,
    pub sigma: f64,
    pub nodes: usize,
    pub multiplier: usize,
    pub order: usize,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radiation_error: Option<f64>,
    /// `None` when the level set `|u_d| = β` is not found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_radius_over_delta: Option<f64>,
    /// `||u_d - v|| / ||v||` on `|x| = 2δ` for the virtual field `v`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub illusion_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svd_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svd_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suppression: Option<f64>,
    /// `max |u_i + u_d + u_s|` on the obstacle over `max |u_i|` there. The
    /// solver's own residual is relative to `u_i + u_d`, which a good cloak
    /// drives to round-off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatter_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct InteriorRecord {
    task: &'static str,
    k: f64,
    sigma: f64,
    nodes: usize,
    /// `max |u_d + u_i|` on `|x| = σ/2`.
    inside_max: f64,
    /// `max |u_d|` on `|x| = 2σ`.
    outside_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ScatterRecord {
    task: &'static str,
    k: f64,
    shape: &'static str,
    n_src: usize,
    shrink: f64,
    residual: f64,
}

/// A designed cloak plus solver diagnostics.
struct Design {
    solution: CloakSolution,
    svd: Option<(f64, usize)>,
    virtual_field: Option<Box<dyn Field>>,
}

/// The radiating field an illusion mimics, which must come from inside `D`.
fn virtual_field(
    ctx: WaveContext,
    lambda: f64,
    incident: &dyn IncidentField,
    v: &VirtualConfig,
    sigma: f64,
) -> Result<Box<dyn IncidentField>> {
    match *v {
        VirtualConfig::Point { position, amplitude } => {
            let p = point(position, lambda);
            if p.norm() >= sigma {
                return Err(CliError::Core {
                    context: "illusion".into(),
                    source: CloakError::Geometry("virtual source must lie inside D".into()),
                });
            }
            Ok(Box::new(WeightedPoint {
                source: point_source(ctx, p),
                amplitude: Complex64::new(amplitude[0], amplitude[1]),
            }))
        }
        VirtualConfig::Circle { radius, center } => {
            let c = point(center, lambda);
            let r = radius * lambda;
            if c.norm() + r >= sigma {
                return Err(CliError::Core {
                    context: "illusion".into(),
                    source: CloakError::Geometry("virtual obstacle must lie inside D".into()),
                });
            }
            let disk = Curve::circle(r, c, 256).context("illusion")?;
            let opts = SuppressionOptions::default();
            Ok(Box::new(
                solve_scattering(ctx, &disk, incident, opts.n_src, opts.src_shrink).context("illusion")?,
            ))
        }
    }
}

struct WeightedPoint {
    source: cloak_core::fields::PointSource,
    amplitude: Complex64,
}

impl Field for WeightedPoint {
    fn value(&self, x: Point2) -> cloak_core::Result<Complex64> {
        Ok(self.amplitude * self.source.value(x)?)
    }
}

impl IncidentField for WeightedPoint {
    fn gradient(&self, x: Point2) -> cloak_core::Result<cloak_core::CVec2> {
        let g = self.source.gradient(x)?;
        Ok([self.amplitude * g[0], self.amplitude * g[1]])
    }
}

/// Owns a boxed incident field so it can be returned as a `dyn Field`.
struct Owned(Box<dyn IncidentField>);

impl Field for Owned {
    fn value(&self, x: Point2) -> cloak_core::Result<Complex64> {
        self.0.value(x)
    }
}

fn design(
    cfg: &ScenarioConfig,
    scene: &Scene,
    kind: MethodKind,
    layout: &DeviceLayout,
    delta: f64,
    order: usize,
) -> Result<Design> {
    let ctx = scene.ctx;
    let m = &cfg.method;
    match kind {
        MethodKind::Green => Ok(Design {
            solution: green_coefficients(ctx, scene.incident.as_ref(), layout, order).context("green")?,
            svd: None,
            virtual_field: None,
        }),
        MethodKind::Svd => {
            let s = &m.svd;
            let alpha = s.alpha.map_or(optimal_effective_radius(delta), |a| a * scene.lambda);
            let gamma = s.gamma.map_or(2.0 * delta, |g| g * scene.lambda);
            let n_alpha = s.n_alpha.fixed().unwrap_or(default_samples(order));
            let n_gamma = s.n_gamma.fixed().unwrap_or(default_samples(order));
            let sys = build_system(
                ctx,
                scene.incident.as_ref(),
                layout,
                alpha,
                gamma,
                order,
                n_alpha,
                n_gamma,
                s.weight_ratio,
            )
            .context("svd")?;
            let out = svd_solve(&sys, s.rel_cutoff).context("svd")?;
            Ok(Design {
                solution: out.solution,
                svd: Some((out.residual, out.rank)),
                virtual_field: None,
            })
        }
        MethodKind::Illusion => {
            let v_cfg = m
                .illusion
                .as_ref()
                .ok_or_else(|| CliError::config("method.illusion", "missing"))?;
            let sigma = layout.boundary().max_distance_from(Point2::ORIGIN);
            let v = virtual_field(ctx, scene.lambda, scene.incident.as_ref(), v_cfg, sigma)?;
            let solution =
                illusion_coefficients(ctx, scene.incident.as_ref(), v.as_ref(), layout, order).context("illusion")?;
            Ok(Design {
                solution,
                svd: None,
                virtual_field: Some(Box::new(Owned(v))),
            })
        }
    }
}

fn sampled_ratio(a: &dyn Field, b: &dyn Field, radius: f64, n: usize) -> Result<f64> {
    let (num, den) = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = Point2::polar(radius, TAU * i as f64 / n as f64);
            let vb = b.value(x)?;
            Ok(((a.value(x)? - vb).norm_sqr(), vb.norm_sqr()))
        })
        .collect::<cloak_core::Result<Vec<(f64, f64)>>>()
        .context("metrics")?
        .into_iter()
        .fold((0.0, 0.0), |(p, q), (x, y)| (p + x, q + y));
    Ok((num / den).sqrt())
}

/// `max |total| / max |reference|` at `n` points of `curve` offset half a
/// step from the solver's collocation points.
fn boundary_residual(curve: &Curve, total: &dyn Field, reference: &dyn Field, n: usize) -> Result<f64> {
    let (worst, scale) = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = curve.point(TAU * (i as f64 + 0.5) / n as f64);
            Ok((total.value(x)?.norm(), reference.value(x)?.norm()))
        })
        .collect::<cloak_core::Result<Vec<(f64, f64)>>>()
        .context("scatter")?
        .into_iter()
        .fold((0.0_f64, 0.0_f64), |(w, s), (a, b)| (w.max(a), s.max(b)));
    Ok(worst / scale)
}

/// File stem, samples, and what they show.
type NamedGrid = (String, FieldGrid, Quantity);

struct CellSpec {
    delta_wl: f64,
    kind: MethodKind,
    multiplier: usize,
}

/// Designs one cloak and measures it. Grids are returned alongside when
/// requested.
fn cloak_cell(
    cfg: &ScenarioConfig,
    scene: &Scene,
    cell: &CellSpec,
    grids: &[(usize, GridRequest)],
) -> Result<(CloakRecord, Design, Vec<NamedGrid>)> {
    let delta = cell.delta_wl * scene.lambda;
    let sigma = cfg.geometry.sigma.map_or(delta / 2.0, |s| s * scene.lambda);
    let nodes = scene.nodes(cfg, sigma);
    let lay = layout(delta, sigma, nodes, cfg.geometry.orientation)?;
    let base = match cfg.method.order.fixed() {
        Some(m) => m,
        None => truncation_m(&scene.ctx, delta).context("multipole")?,
    };
    let order = base * cell.multiplier;
    let d = design(cfg, scene, cell.kind, &lay, delta, order)?;
    let sol = &d.solution;
    let inc: &dyn Field = scene.incident.as_ref();

    let mut rec = CloakRecord {
        cell: None,
        method: cell.kind,
        k: scene.ctx.k(),
        delta_wavelengths: cell.delta_wl,
        delta,
        sigma,
        nodes,
        multiplier: cell.multiplier,
        order,
        beta: cfg.method.beta,
        interior_error: None,
        radiation_error: None,
        device_radius_over_delta: None,
        illusion_error: None,
        svd_residual: d.svd.map(|s| s.0),
        svd_rank: d.svd.map(|s| s.1),
        suppression: None,
        scatter_residual: None,
        error: None,
    };
    if cfg.outputs.metrics {
        rec.interior_error = Some(interior_error(&scene.ctx, inc, sol, delta).context("metrics")?);
        if let Some(v) = &d.virtual_field {
            rec.illusion_error = Some(sampled_ratio(sol, v.as_ref(), 2.0 * delta, 512)?);
        } else {
            rec.radiation_error = Some(radiation_error(&scene.ctx, inc, sol, delta).context("metrics")?);
        }
        rec.device_radius_over_delta = match device_radius_estimate(sol, cfg.method.beta) {
            Ok(r) => Some(r),
            Err(CloakError::NotFound(_)) => None,
            Err(e) => return Err(e).context("metrics"),
        };
    }

    let mut out = Vec::new();
    if let Some((curve, opts)) = obstacle(cfg, scene.lambda)? {
        if cfg.outputs.metrics {
            rec.suppression = Some(
                scattering_suppression_with(&curve, inc, sol, 2.0 * delta, opts).context("scatter")?,
            );
        }
        let needs_us = cfg.outputs.metrics
            || grids.iter().any(|(_, r)| matches!(r.quantity, Quantity::Scattered | Quantity::Total));
        if needs_us {
            let drive = FieldSum(vec![inc, sol]);
            let us = solve_scattering(scene.ctx, &curve, &drive, opts.n_src, opts.src_shrink).context("scatter")?;
            rec.scatter_residual = Some(boundary_residual(&curve, &FieldSum(vec![inc, sol, &us]), inc, 4 * opts.n_src)?);
            cloak_grids(scene, cell.kind, sol, Some((&us, &curve)), grids, &mut out)?;
        }
    } else {
        cloak_grids(scene, cell.kind, sol, None, grids, &mut out)?;
    }
    Ok((rec, d, out))
}

fn cloak_grids(
    scene: &Scene,
    kind: MethodKind,
    sol: &CloakSolution,
    scattered: Option<(&ScatteredField, &Curve)>,
    grids: &[(usize, GridRequest)],
    out: &mut Vec<NamedGrid>,
) -> Result<()> {
    let inc: &dyn Field = scene.incident.as_ref();
    for (i, req) in grids {
        let g = match req.quantity {
            Quantity::Incident => continue,
            Quantity::Device => grid(sol, req, scene.lambda)?,
            Quantity::Scattered => match scattered {
                Some((us, curve)) => grid(&Masked { inner: us, hole: Some(curve) }, req, scene.lambda)?,
                None => continue,
            },
            Quantity::Total => {
                let mut parts: Vec<&dyn Field> = vec![inc, sol];
                if let Some((us, _)) = scattered {
                    parts.push(us);
                }
                let total = FieldSum(parts);
                grid(&Masked { inner: &total, hole: scattered.map(|s| s.1) }, req, scene.lambda)?
            }
        };
        out.push((grid_stem(*i, req.quantity, Some(kind)), g, req.quantity));
    }
    Ok(())
}

/// What a scenario run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub records: usize,
}

/// Runs `cfg` and writes every artifact plus `manifest.json` into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let scene = Scene::new(cfg)?;
    let mut files = Artifacts::create(out_dir)?;
    let clip = cfg.outputs.image.then_some(cfg.outputs.clip);
    let indexed: Vec<(usize, GridRequest)> = cfg.outputs.grids.iter().copied().enumerate().collect();
    let mut lines = String::new();
    let mut records = 0;

    // the incident field is the same for every method
    for (i, req) in &indexed {
        if req.quantity == Quantity::Incident {
            let g = grid(scene.incident.as_ref(), req, scene.lambda)?;
            let meta = GridMeta::new(&g, &scene.ctx, "incident", None);
            files.write_grid(&grid_stem(*i, req.quantity, None), &g, &meta, clip)?;
        }
    }

    match cfg.task {
        Task::Interior => {
            let sigma = cfg.geometry.sigma.unwrap_or(0.0) * scene.lambda;
            let nodes = scene.nodes(cfg, sigma);
            let curve = Curve::circle(sigma, Point2::ORIGIN, nodes).context("geometry")?;
            let dens = build_densities(scene.ctx, scene.incident.as_ref(), &curve).context("interior")?;
            let inc: &dyn Field = scene.incident.as_ref();
            for (i, req) in &indexed {
                let g = match req.quantity {
                    Quantity::Device => grid(&dens, req, scene.lambda)?,
                    Quantity::Total => grid(&FieldSum(vec![inc, &dens]), req, scene.lambda)?,
                    _ => continue,
                };
                let meta = GridMeta::new(&g, &scene.ctx, req.quantity.as_str(), None);
                files.write_grid(&grid_stem(*i, req.quantity, None), &g, &meta, clip)?;
            }
            if cfg.outputs.metrics {
                let max_on = |f: &dyn Field, r: f64| -> Result<f64> {
                    (0..INTERIOR_PROBE_SAMPLES)
                        .into_par_iter()
                        .map(|j| f.value(Point2::polar(r, TAU * j as f64 / INTERIOR_PROBE_SAMPLES as f64)))
                        .collect::<cloak_core::Result<Vec<_>>>()
                        .context("interior")
                        .map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max))
                };
                let rec = InteriorRecord {
                    task: "interior",
                    k: scene.ctx.k(),
                    sigma,
                    nodes,
                    inside_max: max_on(&FieldSum(vec![inc, &dens]), sigma / 2.0)?,
                    outside_max: max_on(&dens, 2.0 * sigma)?,
                };
                lines = jsonl(&[rec]);
                records = 1;
            }
        }
        Task::Scatter => {
            let (curve, opts) = obstacle(cfg, scene.lambda)?.expect("validated scatterer");
            let inc: &dyn Field = scene.incident.as_ref();
            let us = solve_scattering(scene.ctx, &curve, inc, opts.n_src, opts.src_shrink).context("scatter")?;
            for (i, req) in &indexed {
                let g = match req.quantity {
                    Quantity::Scattered => grid(&Masked { inner: &us, hole: Some(&curve) }, req, scene.lambda)?,
                    Quantity::Total => {
                        let total = FieldSum(vec![inc, &us]);
                        grid(&Masked { inner: &total, hole: Some(&curve) }, req, scene.lambda)?
                    }
                    _ => continue,
                };
                let meta = GridMeta::new(&g, &scene.ctx, req.quantity.as_str(), None);
                files.write_grid(&grid_stem(*i, req.quantity, None), &g, &meta, clip)?;
            }
            if cfg.outputs.metrics {
                let rec = ScatterRecord {
                    task: "scatter",
                    k: scene.ctx.k(),
                    shape: match cfg.scatterer {
                        ScattererConfig::Kite { .. } => "kite",
                        _ => "circle",
                    },
                    n_src: opts.n_src,
                    shrink: opts.src_shrink,
                    residual: us.residual(),
                };
                lines = jsonl(&[rec]);
                records = 1;
            }
        }
        Task::Cloak | Task::Metrics => {
            let delta_wl = cfg.geometry.delta.unwrap_or(0.0);
            let wanted = if cfg.task == Task::Cloak { &indexed[..] } else { &[] };
            if cfg.outputs.metrics || cfg.outputs.coefficients || !wanted.is_empty() {
                let mut recs = Vec::new();
                for &kind in &cfg.method.kinds {
                    let cell = CellSpec {
                        delta_wl,
                        kind,
                        multiplier: cfg.method.multiplier,
                    };
                    let (rec, d, grids) = cloak_cell(cfg, &scene, &cell, wanted)?;
                    for (stem, g, q) in grids {
                        let meta = GridMeta::new(&g, &scene.ctx, q.as_str(), Some(kind.as_str()));
                        files.write_grid(&stem, &g, &meta, clip)?;
                    }
                    if cfg.outputs.coefficients {
                        let text = coefficient_text(&d.solution);
                        files.write(&format!("coefficients_{}.txt", kind.as_str()), text.as_bytes())?;
                    }
                    recs.push(rec);
                }
                if cfg.outputs.metrics {
                    lines = jsonl(&recs);
                    records = recs.len();
                }
            }
        }
    }
    if cfg.outputs.metrics {
        files.write(METRICS_FILE, lines.as_bytes())?;
    }
    Ok(RunSummary {
        manifest: files.finish()?,
        records,
    })
}

/// One record per `(δ, method, multiplier)` cell, in that nesting order.
/// Cells run in parallel; a failing cell is logged with its error and the
/// sweep carries on. `D` has radius `δ/2` in every cell.
pub fn run_sweep(
    template: &ScenarioConfig,
    deltas: &[f64],
    methods: &[MethodKind],
    multipliers: &[usize],
) -> Result<Vec<CloakRecord>> {
    let mut cfg = template.clone();
    cfg.geometry.sigma = None;
    cfg.outputs.grids.clear();
    cfg.outputs.metrics = true;
    cfg.task = Task::Metrics;
    let scene = Scene::new(&cfg)?;
    let mut cells = Vec::new();
    for &delta_wl in deltas {
        for &kind in methods {
            for &multiplier in multipliers {
                cells.push(CellSpec { delta_wl, kind, multiplier });
            }
        }
    }
    Ok(cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut rec = match cloak_cell(&cfg, &scene, cell, &[]) {
                Ok((rec, _, _)) => rec,
                Err(e) => failed_record(&cfg, &scene, cell, e),
            };
            rec.cell = Some(i);
            rec
        })
        .collect())
}

fn failed_record(cfg: &ScenarioConfig, scene: &Scene, cell: &CellSpec, e: CliError) -> CloakRecord {
    let delta = cell.delta_wl * scene.lambda;
    CloakRecord {
        cell: None,
        method: cell.kind,
        k: scene.ctx.k(),
        delta_wavelengths: cell.delta_wl,
        delta,
        sigma: delta / 2.0,
        nodes: cfg.geometry.nodes.fixed().unwrap_or(0),
        multiplier: cell.multiplier,
        order: 0,
        beta: cfg.method.beta,
        interior_error: None,
        radiation_error: None,
        device_radius_over_delta: None,
        illusion_error: None,
        svd_residual: None,
        svd_rank: None,
        suppression: None,
        scatter_residual: None,
        error: Some(e.to_string()),
    }
}

/// Runs the sweep block of `cfg` and writes `sweep.jsonl` plus the manifest.
pub fn run_sweep_to_dir(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep", "the config has no sweep block"))?;
    let recs = run_sweep(cfg, &sweep.deltas, &sweep.methods, &sweep.multipliers)?;
    let mut files = Artifacts::create(out_dir)?;
    files.write(SWEEP_FILE, jsonl(&recs).as_bytes())?;
    Ok(RunSummary {
        manifest: files.finish()?,
        records: recs.len(),
    })
}
