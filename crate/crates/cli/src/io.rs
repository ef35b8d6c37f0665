//! File formats.
//!
//! * Field grid: header `# x y re im`, then one record per sample, row-major
//!   with `y` increasing from row to row, every number printed with 17
//!   significant digits (`{:.16e}`); singular samples are `NaN`. The sidecar
//!   `<grid>.meta.json` holds the window and resolution.
//! * Coefficients: `# j m re im`, then one line per `(j, m)` sorted by device
//!   and order, again with 17 significant digits so a read-back is exact.
//! * Heatmap: binary PPM (P6). `Re u` is clipped to `[-c, c]` and mapped
//!   linearly through blue (0, 0, 255) at `-c`, white at 0 and red
//!   (255, 0, 0) at `+c`; singular pixels are black. The top row is `y_max`.
//! * Manifest: `manifest.json` with the size and SHA-256 of every file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cloak_core::fields::{FieldGrid, GridWindow};
use cloak_core::geometry::DeviceLayout;
use cloak_core::multipole::{CloakSolution, MultipoleSource, Provenance};
use cloak_core::{Complex64, WaveContext};

use crate::error::{CliError, Context, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub k: f64,
    pub wavelength: f64,
    /// `[x_min, x_max, y_min, y_max]` in the same units as the grid file.
    pub window: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub singular_samples: usize,
}

impl GridMeta {
    pub fn new(grid: &FieldGrid, ctx: &WaveContext, quantity: &str, method: Option<&str>) -> Self {
        let w = grid.window;
        GridMeta {
            quantity: quantity.to_string(),
            method: method.map(str::to_string),
            k: ctx.k(),
            wavelength: ctx.wavelength(),
            window: [w.x_min, w.x_max, w.y_min, w.y_max],
            nx: grid.nx,
            ny: grid.ny,
            singular_samples: grid.singular.iter().filter(|&&s| s).count(),
        }
    }
}

pub fn grid_text(grid: &FieldGrid) -> String {
    let mut out = String::with_capacity(80 * grid.nx * grid.ny + 16);
    out.push_str("# x y re im\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let u = if grid.is_singular(i, j) {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                grid.at(i, j)
            };
            writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e}", grid.x(i), grid.y(j), u.re, u.im).unwrap();
        }
    }
    out
}

fn bad(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Format {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(path: &str, line: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| bad(path, format!("line {line}: `{s}` is not a number")))
}

/// Reads a grid written by [`grid_text`]; `path` only labels errors.
pub fn parse_grid(path: &str, text: &str, meta: &GridMeta) -> Result<FieldGrid> {
    let [x_min, x_max, y_min, y_max] = meta.window;
    let mut values = Vec::with_capacity(meta.nx * meta.ny);
    let mut singular = Vec::with_capacity(meta.nx * meta.ny);
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(bad(path, format!("line {}: expected 4 columns", n + 1)));
        }
        let re = parse_f64(path, n + 1, cols[2])?;
        let im = parse_f64(path, n + 1, cols[3])?;
        let sing = !(re.is_finite() && im.is_finite());
        values.push(if sing { Complex64::new(f64::NAN, f64::NAN) } else { Complex64::new(re, im) });
        singular.push(sing);
    }
    if values.len() != meta.nx * meta.ny {
        return Err(bad(
            path,
            format!("{} samples for a {}x{} grid", values.len(), meta.nx, meta.ny),
        ));
    }
    Ok(FieldGrid {
        window: GridWindow { x_min, x_max, y_min, y_max },
        nx: meta.nx,
        ny: meta.ny,
        values,
        singular,
    })
}

/// Reads `path` and its `.meta.json` sidecar.
pub fn read_grid(path: &Path) -> Result<(FieldGrid, GridMeta)> {
    let meta_path = meta_path(path);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta: GridMeta = serde_json::from_str(&meta_text)
        .map_err(|e| bad(&meta_path.display().to_string(), e.to_string()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok((parse_grid(&path.display().to_string(), &text, &meta)?, meta))
}

pub fn meta_path(grid: &Path) -> PathBuf {
    let mut name = grid.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    grid.with_file_name(name)
}

/// RGB for `Re u = v` with clip level `c`.
pub fn ramp(v: f64, c: f64) -> [u8; 3] {
    if !v.is_finite() {
        return [0, 0, 0];
    }
    let t = (v / c).clamp(-1.0, 1.0);
    let fade = |s: f64| (255.0 * (1.0 - s)).round() as u8;
    if t < 0.0 {
        [fade(-t), fade(-t), 255]
    } else {
        [255, fade(t), fade(t)]
    }
}

pub fn ppm(grid: &FieldGrid, clip: f64) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", grid.nx, grid.ny);
    let mut out = Vec::with_capacity(header.len() + 3 * grid.nx * grid.ny);
    out.extend_from_slice(header.as_bytes());
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let v = if grid.is_singular(i, j) { f64::NAN } else { grid.at(i, j).re };
            out.extend_from_slice(&ramp(v, clip));
        }
    }
    out
}

pub fn coefficient_text(sol: &CloakSolution) -> String {
    let mut out = String::from("# j m re im\n");
    for (j, s) in sol.sources().iter().enumerate() {
        let m_max = s.order() as i32;
        for m in -m_max..=m_max {
            let b = s.coefficient(m);
            writeln!(out, "{j} {m} {:.16e} {:.16e}", b.re, b.im).unwrap();
        }
    }
    out
}

/// Per-device coefficients `b_{j,-M..M}` from a coefficient file.
pub fn parse_coefficients(path: &str, text: &str) -> Result<Vec<Vec<Complex64>>> {
    let mut devices: Vec<Vec<(i32, Complex64)>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(bad(path, format!("line {}: expected `j m re im`", n + 1)));
        }
        let j: usize = cols[0].parse().map_err(|_| bad(path, format!("line {}: bad device index", n + 1)))?;
        let m: i32 = cols[1].parse().map_err(|_| bad(path, format!("line {}: bad order", n + 1)))?;
        let b = Complex64::new(parse_f64(path, n + 1, cols[2])?, parse_f64(path, n + 1, cols[3])?);
        if j == devices.len() {
            devices.push(Vec::new());
        } else if j + 1 != devices.len() {
            return Err(bad(path, format!("line {}: devices must appear in order", n + 1)));
        }
        devices[j].push((m, b));
    }
    devices
        .into_iter()
        .enumerate()
        .map(|(j, terms)| {
            let order = (terms.len() / 2) as i32;
            let expected = (-order..=order).collect::<Vec<_>>();
            if terms.iter().map(|t| t.0).collect::<Vec<_>>() != expected {
                return Err(bad(path, format!("device {j}: orders must run from -M to M")));
            }
            Ok(terms.into_iter().map(|t| t.1).collect())
        })
        .collect()
}

/// Rebuilds a solution from coefficients read back for a known layout.
pub fn solution_from_coefficients(
    ctx: WaveContext,
    layout: &DeviceLayout,
    coefficients: Vec<Vec<Complex64>>,
    provenance: Provenance,
) -> Result<CloakSolution> {
    let sources = layout
        .positions()
        .iter()
        .zip(coefficients)
        .map(|(&x, b)| MultipoleSource::new(x, b))
        .collect::<cloak_core::Result<Vec<_>>>()
        .context("coefficients")?;
    CloakSolution::new(ctx, sources, layout.clone(), provenance).context("coefficients")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files under one directory and records them for the manifest.
pub struct Artifacts {
    root: PathBuf,
    entries: BTreeMap<String, ManifestEntry>,
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Artifacts {
            root: root.to_path_buf(),
            entries: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.entries.insert(
            name.to_string(),
            ManifestEntry {
                path: name.to_string(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            },
        );
        Ok(())
    }

    pub fn write_grid(&mut self, stem: &str, grid: &FieldGrid, meta: &GridMeta, clip: Option<f64>) -> Result<()> {
        self.write(&format!("{stem}.txt"), grid_text(grid).as_bytes())?;
        let meta_json = serde_json::to_string_pretty(meta).expect("grid meta serializes") + "\n";
        self.write(&format!("{stem}.txt.meta.json"), meta_json.as_bytes())?;
        if let Some(c) = clip {
            self.write(&format!("{stem}.ppm"), &ppm(grid, c))?;
        }
        Ok(())
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self) -> Result<Manifest> {
        let manifest = Manifest {
            files: self.entries.into_values().collect(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.root.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

/// One JSON object per line.
pub fn jsonl<T: Serialize>(records: &[T]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(-1.0, 1.0), [0, 0, 255]);
        assert_eq!(ramp(0.0, 1.0), [255, 255, 255]);
        assert_eq!(ramp(1.0, 1.0), [255, 0, 0]);
        assert_eq!(ramp(7.0, 1.0), [255, 0, 0]);
        assert_eq!(ramp(-0.5, 1.0), [128, 128, 255]);
        assert_eq!(ramp(f64::NAN, 1.0), [0, 0, 0]);
    }

    #[test]
    fn ppm_orientation() {
        let grid = FieldGrid {
            window: GridWindow::centered(1.0),
            nx: 2,
            ny: 2,
            values: vec![
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(f64::NAN, 0.0),
            ],
            singular: vec![false, false, false, true],
        };
        let img = ppm(&grid, 1.0);
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&img[..header.len()], header);
        // top row is y_max: red, then black
        assert_eq!(&img[header.len()..], &[255, 0, 0, 0, 0, 0, 0, 0, 255, 255, 255, 255]);
    }

    #[test]
    fn grid_round_trip() {
        let ctx = WaveContext::new(1.0).unwrap();
        let grid = FieldGrid {
            window: GridWindow { x_min: -1.0, x_max: 2.0, y_min: 0.1, y_max: 0.7 },
            nx: 3,
            ny: 2,
            values: (0..6).map(|i| Complex64::new(0.1 * i as f64, 1.0 / (i + 1) as f64)).collect(),
            singular: vec![false; 6],
        };
        let meta = GridMeta::new(&grid, &ctx, "total", Some("green"));
        let back = parse_grid("mem", &grid_text(&grid), &meta).unwrap();
        assert_eq!(back, grid);
    }
}
