use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cloak_cli::config::{apply_override, bundled_names, config_source, Task};
use cloak_cli::io::{ppm, read_grid, Artifacts};
use cloak_cli::{run_scenario, run_sweep_to_dir, CliError, Result, RunSummary, ScenarioConfig};

/// Active exterior cloaks for the 2D Helmholtz equation.
///
/// Exit status: 0 on success, 1 for invalid input, 2 for numerical failure.
#[derive(Parser)]
#[command(name = "cloak", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or the name of a bundled config.
    #[arg(long)]
    config: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace a config value, e.g. `geometry.delta=20` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the scenario exactly as configured.
    Run(Common),
    /// Layer-potential cloak on the circle of radius sigma.
    Interior(Common),
    /// Multipolar devices from Green's formula.
    CloakGreen(Common),
    /// Multipolar devices from the SVD least-squares design.
    CloakSvd(Common),
    /// Devices that mimic the virtual field in `method.illusion`.
    Illusion(Common),
    /// Bare obstacle in the incident field.
    Scatter(Common),
    /// Metrics of the configured methods, no grids.
    Metrics(Common),
    /// Metrics over the `sweep` block of the config.
    Sweep(Common),
    /// Heatmaps of grid files.
    Render {
        #[arg(long, required = true)]
        grid: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Re u is clipped to [-clip, clip].
        #[arg(long, default_value_t = 1.0)]
        clip: f64,
    },
    /// List the bundled configs.
    Configs,
}

fn load(common: &Common, adjust: impl FnOnce(&mut Value)) -> Result<ScenarioConfig> {
    let text = config_source(&common.config)?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| CliError::config("<root>", e.to_string()))?;
    for o in &common.overrides {
        apply_override(&mut doc, o)?;
    }
    adjust(&mut doc);
    ScenarioConfig::from_value(doc)
}

fn set_task(doc: &mut Value, task: Task) {
    doc["task"] = serde_json::to_value(task).unwrap();
}

/// Switches the config to a single device method.
fn only_method(doc: &mut Value, kind: &str) {
    set_task(doc, Task::Cloak);
    if !doc["method"].is_object() {
        doc["method"] = Value::Object(Default::default());
    }
    doc["method"]["kinds"] = serde_json::json!([kind]);
    if kind != "illusion" {
        if let Some(m) = doc["method"].as_object_mut() {
            m.remove("illusion");
        }
    }
}

fn render(grids: &[PathBuf], out: &Path, clip: f64) -> Result<RunSummary> {
    if !(clip > 0.0 && clip.is_finite()) {
        return Err(CliError::config("--clip", format!("must be positive, got {clip}")));
    }
    let mut files = Artifacts::create(out)?;
    for path in grids {
        let (grid, _) = read_grid(path)?;
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        files.write(&format!("{stem}.ppm"), &ppm(&grid, clip))?;
    }
    Ok(RunSummary {
        manifest: files.finish()?,
        records: 0,
    })
}

fn dispatch(cmd: Cmd) -> Result<Option<(PathBuf, RunSummary)>> {
    let scenario = |c: Common, adjust: &dyn Fn(&mut Value)| -> Result<Option<(PathBuf, RunSummary)>> {
        let cfg = load(&c, adjust)?;
        Ok(Some((c.out.clone(), run_scenario(&cfg, &c.out)?)))
    };
    match cmd {
        Cmd::Run(c) => scenario(c, &|_| {}),
        Cmd::Interior(c) => scenario(c, &|d| set_task(d, Task::Interior)),
        Cmd::CloakGreen(c) => scenario(c, &|d| only_method(d, "green")),
        Cmd::CloakSvd(c) => scenario(c, &|d| only_method(d, "svd")),
        Cmd::Illusion(c) => scenario(c, &|d| only_method(d, "illusion")),
        Cmd::Scatter(c) => scenario(c, &|d| set_task(d, Task::Scatter)),
        Cmd::Metrics(c) => scenario(c, &|d| set_task(d, Task::Metrics)),
        Cmd::Sweep(c) => {
            let cfg = load(&c, |_| {})?;
            Ok(Some((c.out.clone(), run_sweep_to_dir(&cfg, &c.out)?)))
        }
        Cmd::Render { grid, out, clip } => Ok(Some((out.clone(), render(&grid, &out, clip)?))),
        Cmd::Configs => {
            for name in bundled_names() {
                println!("{name}");
            }
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.cmd) {
        Ok(Some((out, summary))) => {
            for f in &summary.manifest.files {
                println!("{}  {}", f.sha256, out.join(&f.path).display());
            }
            if summary.records > 0 {
                eprintln!("{} metric record(s)", summary.records);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
