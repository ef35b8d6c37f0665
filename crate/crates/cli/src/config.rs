//! Scenario files.
//!
//! All lengths and positions are in wavelengths `λ = 2π/k`; angles are in
//! radians. The JSON schema is documented in `configs/README.md`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub task: Task,
    pub wave: WaveConfig,
    pub incident: IncidentConfig,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub scatterer: ScattererConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Layer potentials on the circle of radius `sigma`.
    Interior,
    /// Multipolar devices, optionally with a hidden obstacle.
    Cloak,
    /// Bare obstacle in the incident field.
    Scatter,
    /// Cloak metrics only; grid requests are ignored.
    Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum IncidentConfig {
    Plane { angle: f64 },
    Point { position: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// A count that is either given or chosen by the library heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Auto {
    Fixed(usize),
    Keyword(AutoKeyword),
}

impl Default for Auto {
    fn default() -> Self {
        Auto::Keyword(AutoKeyword::Auto)
    }
}

impl Auto {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Auto::Fixed(n) => Some(n),
            Auto::Keyword(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Device distance from the origin.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Radius of `D`; defaults to `delta / 2`.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Nodes on `∂D`; `auto` keeps 8 per wavelength starting from 384.
    #[serde(default)]
    pub nodes: Auto,
    /// Rotation of the device triangle, radians.
    #[serde(default)]
    pub orientation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Green,
    Svd,
    Illusion,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Green => "green",
            MethodKind::Svd => "svd",
            MethodKind::Illusion => "illusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default = "default_kinds")]
    pub kinds: Vec<MethodKind>,
    /// Truncation order; `auto` is the `M(δ)` heuristic.
    #[serde(default)]
    pub order: Auto,
    /// Multiplies the order, e.g. 2 for `2M(δ)`.
    #[serde(default = "one")]
    pub multiplier: usize,
    /// Cut-off for the device-size estimate.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub svd: SvdConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illusion: Option<VirtualConfig>,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            kinds: default_kinds(),
            order: Auto::default(),
            multiplier: 1,
            beta: default_beta(),
            svd: SvdConfig::default(),
            illusion: None,
        }
    }
}

fn default_kinds() -> Vec<MethodKind> {
    vec![MethodKind::Green]
}

fn one() -> usize {
    1
}

fn default_beta() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvdConfig {
    #[serde(default = "default_cutoff")]
    pub rel_cutoff: f64,
    #[serde(default = "default_weight")]
    pub weight_ratio: f64,
    /// Samples on the inner circle; `auto` is `4M + 2`.
    #[serde(default)]
    pub n_alpha: Auto,
    #[serde(default)]
    pub n_gamma: Auto,
    /// Inner radius; defaults to `(1 - √3/2) δ`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Outer radius; defaults to `2δ`.
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            rel_cutoff: default_cutoff(),
            weight_ratio: default_weight(),
            n_alpha: Auto::default(),
            n_gamma: Auto::default(),
            alpha: None,
            gamma: None,
        }
    }
}

fn default_cutoff() -> f64 {
    cloak_core::svd::DEFAULT_REL_CUTOFF
}

fn default_weight() -> f64 {
    cloak_core::svd::DEFAULT_WEIGHT_RATIO
}

/// The radiating field the illusion should mimic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum VirtualConfig {
    /// A monopole `amplitude · G(x, position)`.
    Point {
        position: [f64; 2],
        #[serde(default = "unit_amplitude")]
        amplitude: [f64; 2],
    },
    /// The field scattered by a sound-soft disk.
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScattererConfig {
    #[default]
    None,
    Kite {
        /// Every node within this distance of the kite's area centroid.
        #[serde(default)]
        radius: Option<f64>,
        /// Used when `radius` is absent: `fraction · (1 - √3/2) δ`.
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "default_obstacle_nodes")]
        nodes: usize,
        #[serde(default = "default_sources")]
        n_src: usize,
        #[serde(default = "default_shrink")]
        shrink: f64,
    },
    Circle {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "default_obstacle_nodes")]
        nodes: usize,
        #[serde(default = "default_sources")]
        n_src: usize,
        #[serde(default = "default_shrink")]
        shrink: f64,
    },
}

fn default_fraction() -> f64 {
    0.8
}

fn default_obstacle_nodes() -> usize {
    256
}

fn default_sources() -> usize {
    cloak_core::scatter::DEFAULT_SOURCES
}

fn default_shrink() -> f64 {
    cloak_core::scatter::DEFAULT_SHRINK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Incident,
    /// Device field: layer potentials for `interior`, multipoles for `cloak`.
    Device,
    /// Scattered field of the obstacle.
    Scattered,
    /// Everything present: incident + device + scattered.
    Total,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Incident => "incident",
            Quantity::Device => "device",
            Quantity::Scattered => "scattered",
            Quantity::Total => "total",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    pub quantity: Quantity,
    /// Square window `[-h, h]²`; ignored when `window` is given.
    #[serde(default)]
    pub half_width: Option<f64>,
    /// `[x_min, x_max, y_min, y_max]`.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    #[serde(default = "default_resolution")]
    pub nx: usize,
    /// Defaults to `nx`.
    #[serde(default)]
    pub ny: Option<usize>,
}

fn default_resolution() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub grids: Vec<GridRequest>,
    #[serde(default = "yes")]
    pub metrics: bool,
    /// A PPM heatmap next to every grid.
    #[serde(default)]
    pub image: bool,
    #[serde(default)]
    pub coefficients: bool,
    /// Heatmap clip level for `Re u`.
    #[serde(default = "unit")]
    pub clip: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            grids: Vec::new(),
            metrics: true,
            image: false,
            coefficients: false,
            clip: 1.0,
        }
    }
}

fn yes() -> bool {
    true
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Device distances, wavelengths.
    pub deltas: Vec<f64>,
    pub methods: Vec<MethodKind>,
    #[serde(default = "default_multipliers")]
    pub multipliers: Vec<usize>,
}

fn default_multipliers() -> Vec<usize> {
    vec![1]
}

const BUNDLED: &[(&str, &str)] = &[
    ("fig1_interior", include_str!("../configs/fig1_interior.json")),
    ("fig4_compare", include_str!("../configs/fig4_compare.json")),
    ("fig5_sweep", include_str!("../configs/fig5_sweep.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Config text from a file, or a bundled config by name.
pub fn config_source(name_or_path: &str) -> Result<String> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| CliError::io(path, e));
    }
    let stem = name_or_path.strip_suffix(".json").unwrap_or(name_or_path);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == stem)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| {
            CliError::config(
                "--config",
                format!(
                    "`{name_or_path}` is neither a file nor a bundled config ({})",
                    bundled_names().join(", ")
                ),
            )
        })
}

/// Sets `key` (dotted path, array indices allowed) to `value`, parsed as
/// JSON when possible and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config("--override", format!("expected key=value, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::config("--override", format!("empty path segment in `{key}`")));
        }
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| CliError::config(key, format!("`{part}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| CliError::config(key, format!("index {i} out of range (len {len})")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert(Value::Null),
            slot @ Value::Null => {
                *slot = Value::Object(Default::default());
                slot.as_object_mut().unwrap().entry(part.to_string()).or_insert(Value::Null)
            }
            _ => return Err(CliError::config(key, format!("`{part}` indexes into a scalar"))),
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    Ok(())
}

impl ScenarioConfig {
    /// Parses, applies overrides in order, and validates.
    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| CliError::config("<root>", e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self> {
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(name_or_path: &str, overrides: &[String]) -> Result<Self> {
        Self::from_str_with(&config_source(name_or_path)?, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        positive("wave.k", self.wave.k)?;
        match self.incident {
            IncidentConfig::Plane { angle } => finite("incident.angle", angle)?,
            IncidentConfig::Point { position } => finite2("incident.position", position)?,
        }

        let g = &self.geometry;
        if let Some(d) = g.delta {
            positive("geometry.delta", d)?;
        }
        if let Some(s) = g.sigma {
            positive("geometry.sigma", s)?;
        }
        finite("geometry.orientation", g.orientation)?;
        if let Some(n) = g.nodes.fixed() {
            if n < 8 {
                return Err(CliError::config("geometry.nodes", format!("need at least 8 nodes, got {n}")));
            }
        }
        let needs_devices = matches!(self.task, Task::Cloak | Task::Metrics) || self.sweep.is_some();
        if needs_devices {
            let d = g
                .delta
                .ok_or_else(|| CliError::config("geometry.delta", "required for device methods"))?;
            if let Some(s) = g.sigma {
                if s >= d {
                    return Err(CliError::config("geometry.sigma", format!("must be below delta = {d}, got {s}")));
                }
            }
        }
        if self.task == Task::Interior && g.sigma.is_none() {
            return Err(CliError::config("geometry.sigma", "required for the interior task"));
        }
        if self.task == Task::Scatter && self.scatterer == ScattererConfig::None {
            return Err(CliError::config("scatterer", "the scatter task needs an obstacle"));
        }

        let m = &self.method;
        if matches!(self.task, Task::Cloak | Task::Metrics) && m.kinds.is_empty() {
            return Err(CliError::config("method.kinds", "at least one method is required"));
        }
        let mut seen = m.kinds.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != m.kinds.len() {
            return Err(CliError::config("method.kinds", "methods listed twice"));
        }
        if m.order.fixed() == Some(0) {
            return Err(CliError::config("method.order", "must be at least 1"));
        }
        if m.multiplier == 0 {
            return Err(CliError::config("method.multiplier", "must be at least 1"));
        }
        positive("method.beta", m.beta)?;
        let svd = &m.svd;
        if !(svd.rel_cutoff > 0.0 && svd.rel_cutoff <= 1.0) {
            return Err(CliError::config("method.svd.rel_cutoff", format!("must lie in (0, 1], got {}", svd.rel_cutoff)));
        }
        positive("method.svd.weight_ratio", svd.weight_ratio)?;
        if let Some(a) = svd.alpha {
            positive("method.svd.alpha", a)?;
        }
        if let Some(c) = svd.gamma {
            positive("method.svd.gamma", c)?;
        }
        let sweep_methods = self.sweep.as_ref().map(|s| s.methods.clone()).unwrap_or_default();
        let wants_illusion = m.kinds.contains(&MethodKind::Illusion) || sweep_methods.contains(&MethodKind::Illusion);
        match (&m.illusion, wants_illusion) {
            (None, true) => {
                return Err(CliError::config("method.illusion", "the illusion method needs a virtual field"))
            }
            (Some(_), false) => {
                return Err(CliError::config("method.illusion", "set but the illusion method is not requested"))
            }
            (Some(VirtualConfig::Point { position, amplitude }), true) => {
                finite2("method.illusion.position", *position)?;
                finite2("method.illusion.amplitude", *amplitude)?;
            }
            (Some(VirtualConfig::Circle { radius, center }), true) => {
                positive("method.illusion.radius", *radius)?;
                finite2("method.illusion.center", *center)?;
            }
            (None, false) => {}
        }

        match self.scatterer {
            ScattererConfig::None => {}
            ScattererConfig::Kite { radius, fraction, center, nodes, n_src, shrink }
            | ScattererConfig::Circle { radius, fraction, center, nodes, n_src, shrink } => {
                match radius {
                    Some(r) => positive("scatterer.radius", r)?,
                    None => {
                        positive("scatterer.fraction", fraction)?;
                        if g.delta.is_none() {
                            return Err(CliError::config(
                                "scatterer.radius",
                                "required when geometry.delta is not set",
                            ));
                        }
                    }
                }
                finite2("scatterer.center", center)?;
                if nodes < 8 {
                    return Err(CliError::config("scatterer.nodes", format!("need at least 8, got {nodes}")));
                }
                if n_src < cloak_core::scatter::MIN_SOURCES {
                    return Err(CliError::config(
                        "scatterer.n_src",
                        format!("need at least {}, got {n_src}", cloak_core::scatter::MIN_SOURCES),
                    ));
                }
                if !(shrink > 0.0 && shrink < 1.0) {
                    return Err(CliError::config("scatterer.shrink", format!("must lie in (0, 1), got {shrink}")));
                }
            }
        }

        for (i, req) in self.outputs.grids.iter().enumerate() {
            let field = |f: &str| format!("outputs.grids.{i}.{f}");
            match (req.window, req.half_width) {
                (Some(w), _) => {
                    if !(w.iter().all(|v| v.is_finite()) && w[1] > w[0] && w[3] > w[2]) {
                        return Err(CliError::config(field("window"), "need x_min < x_max and y_min < y_max"));
                    }
                }
                (None, Some(h)) => positive(&field("half_width"), h)?,
                (None, None) => return Err(CliError::config(field("half_width"), "give half_width or window")),
            }
            if req.nx < 2 || req.ny.is_some_and(|n| n < 2) {
                return Err(CliError::config(field("nx"), "need at least 2 samples per axis"));
            }
            let available = match self.task {
                Task::Interior => !matches!(req.quantity, Quantity::Scattered),
                Task::Cloak => self.scatterer != ScattererConfig::None || req.quantity != Quantity::Scattered,
                Task::Scatter => req.quantity != Quantity::Device,
                // grid requests are ignored
                Task::Metrics => true,
            };
            if !available {
                return Err(CliError::config(
                    field("quantity"),
                    format!("`{}` is not produced by the {:?} task", req.quantity.as_str(), self.task),
                ));
            }
        }
        positive("outputs.clip", self.outputs.clip)?;

        if let Some(s) = &self.sweep {
            for (i, &d) in s.deltas.iter().enumerate() {
                positive(&format!("sweep.deltas.{i}"), d)?;
            }
            if s.methods.is_empty() {
                return Err(CliError::config("sweep.methods", "at least one method is required"));
            }
            if s.multipliers.is_empty() || s.multipliers.contains(&0) {
                return Err(CliError::config("sweep.multipliers", "need positive multipliers"));
            }
        }
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be finite, got {v}")))
    }
}

fn finite2(field: &str, v: [f64; 2]) -> Result<()> {
    finite(field, v[0])?;
    finite(field, v[1])
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive, got {v}")))
    }
}
