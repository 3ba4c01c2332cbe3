use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use floquet_cli::config::{Command, ExperimentConfig, FgrMethod, ModelKind};
use floquet_cli::{recipes, HarnessError};
use floquet_core::dirac::DiracPreset;
use floquet_core::Boundary;

/// Defect-mode decay experiments under periodic forcing.
#[derive(Parser)]
#[command(name = "floquet", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Band structure and Dirac parameters: bands.csv, dirac_params.json.
    Bands {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k_points: Option<usize>,
        #[arg(long)]
        n_bands: Option<usize>,
    },
    /// Defect mode: mode.csv, mode_envelope.csv, mode.json.
    Mode {
        #[command(flatten)]
        run: RunArgs,
    },
    /// One time evolution from the defect mode: trace.csv, snapshots.csv, fit.json.
    Evolve {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated snapshot times.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// Decay rates over forcing amplitudes: sweep.csv, powerlaw.csv, sweep.json.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
    },
    /// Golden-rule rate over frequencies: fgr.csv, fgr.json.
    Fgr {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        omegas: Option<Vec<f64>>,
        #[arg(long)]
        method: Option<FgrMethod>,
        /// Multiplies the slow half-length.
        #[arg(long)]
        box_factor: Option<f64>,
    },
    /// Schrödinger vs effective Dirac envelope: envelope.csv, envelope.json.
    Envelope {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Runs a named recipe into OUT/<experiment id>.
    Recipe {
        /// Recipe name, or a path to a recipe file.
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict to these experiment ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List built-in recipes.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Physical,
    Normalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Vanishing,
    Periodic,
}

/// Flags shared by the experiment commands; each overrides the config file.
#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    family: Option<u8>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    half_length: Option<f64>,
    #[arg(long)]
    points_per_period: Option<usize>,
    #[arg(long)]
    boundary: Option<BoundaryArg>,
    /// Dirac coefficients.
    #[arg(long)]
    preset: Option<PresetArg>,
}

impl RunArgs {
    fn config(&self, command: Command) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::new(command, ModelKind::Schrodinger, self.family.unwrap_or(1)),
        };
        cfg.command = command;
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.family {
            cfg.family = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.beta {
            cfg.forcing.beta = v;
        }
        if let Some(v) = self.omega {
            cfg.forcing.omega = v;
        }
        if self.dt.is_some() {
            cfg.time.dt = self.dt;
        }
        if self.t_end.is_some() {
            cfg.time.t_end = self.t_end;
        }
        if self.stride.is_some() {
            cfg.time.stride = self.stride;
        }
        if self.half_length.is_some() {
            cfg.grid.half_length = self.half_length;
        }
        if self.points_per_period.is_some() {
            cfg.grid.points_per_period = self.points_per_period;
        }
        if let Some(b) = self.boundary {
            cfg.grid.boundary = match b {
                BoundaryArg::Vanishing => Boundary::Vanishing,
                BoundaryArg::Periodic => Boundary::Periodic,
            };
        }
        if let Some(p) = self.preset {
            cfg.dirac.preset = match p {
                PresetArg::Physical => DiracPreset::Physical,
                PresetArg::Normalized => DiracPreset::Normalized,
            };
        }
        Ok(cfg)
    }
}

fn execute(cmd: Cmd) -> anyhow::Result<()> {
    let (cfg, out) = match cmd {
        Cmd::Recipe { name, out, only, list } => return recipe(name, out, only, list),
        Cmd::Bands { run, k_points, n_bands } => {
            let mut c = run.config(Command::Bands)?;
            if let Some(k) = k_points {
                c.bands.k_points = k;
            }
            if let Some(n) = n_bands {
                c.bands.n_bands = n;
            }
            (c, run.out)
        }
        Cmd::Mode { run } => (run.config(Command::Mode)?, run.out),
        Cmd::Evolve { run, snapshots } => {
            let mut c = run.config(Command::Evolve)?;
            if let Some(s) = snapshots {
                c.time.snapshots = s;
            }
            (c, run.out)
        }
        Cmd::Sweep { run, betas } => {
            let mut c = run.config(Command::Sweep)?;
            if let Some(b) = betas {
                c.sweep.betas = b;
            }
            (c, run.out)
        }
        Cmd::Fgr { run, omegas, method, box_factor } => {
            let mut c = run.config(Command::Fgr)?;
            if c.model == ModelKind::Schrodinger {
                c.model = ModelKind::Dirac;
            }
            if let Some(o) = omegas {
                c.fgr.omegas = o;
            }
            if let Some(m) = method {
                c.fgr.method = m;
            }
            if let Some(b) = box_factor {
                c.fgr.box_factor = b;
            }
            (c, run.out)
        }
        Cmd::Envelope { run, times } => {
            let mut c = run.config(Command::Envelope)?;
            if let Some(t) = times {
                c.envelope.times = t;
            }
            (c, run.out)
        }
    };
    let summary = floquet_cli::run(&cfg, &out).with_context(|| format!("{} run into {}", cfg.command.name(), out.display()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn recipe(name: Option<String>, out: Option<PathBuf>, only: Vec<String>, list: bool) -> anyhow::Result<()> {
    if list {
        for n in recipes::names() {
            let r = recipes::builtin(n)?;
            println!("{n}\t{}", r.description);
        }
        return Ok(());
    }
    let name = name.ok_or_else(|| HarnessError::field("recipe", "name required (or --list)"))?;
    let out = out.ok_or_else(|| HarnessError::field("out", "output directory required"))?;
    let r = if name.ends_with(".toml") {
        let text = std::fs::read_to_string(&name).map_err(|e| HarnessError::field("recipe", format!("{name}: {e}")))?;
        floquet_cli::Recipe::from_toml(&text)?
    } else {
        recipes::builtin(&name)?
    };
    for (id, summary) in recipes::run_recipe(&r, &out, &only)? {
        println!("{id}: {}", serde_json::to_string(&summary)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<HarnessError>().map_or(3, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
