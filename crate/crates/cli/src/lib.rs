//! Command-line driver for the `fracheat` spectral laboratory.
//!
//! Each run reads an optional config, applies flag overrides, executes one
//! command and writes `<out>/<command>.json` and `<out>/<command>.csv`.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use commands::CommandName;
pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("malformed config{}: {msg}", at_line(.line))]
    Config { line: Option<usize>, msg: String },

    #[error(transparent)]
    Lab(#[from] fracheat::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

impl CliError {
    pub fn io(context: String, source: std::io::Error) -> Self {
        CliError::Io { context, source }
    }

    /// 2 for a violated hypothesis of the underlying estimate or solver,
    /// 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lab(e) if e.is_precondition() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracheat", version, about = "Spectral lab for the fractional heat semigroup")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandName,

    /// Config file: `key = value` lines under `[section]` headers.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Report directory (default `reports`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Single-threaded, and no timing in the report.
    #[arg(long)]
    pub deterministic: bool,

    /// Override any config value; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Estimate for `verify`.
    #[arg(long)]
    pub estimate: Option<String>,

    /// Spatial dimension (`grid.dim`).
    #[arg(long = "n")]
    pub n: Option<String>,

    /// Grid points per axis (`grid.size`).
    #[arg(long)]
    pub size: Option<String>,

    /// Box side (`grid.length`).
    #[arg(long)]
    pub length: Option<String>,

    #[arg(long)]
    pub alpha: Option<String>,

    #[arg(long)]
    pub r: Option<String>,

    #[arg(long)]
    pub p: Option<String>,

    #[arg(long)]
    pub q: Option<String>,

    #[arg(long)]
    pub h: Option<String>,

    #[arg(long = "t-end")]
    pub t_end: Option<String>,

    #[arg(long)]
    pub steps: Option<String>,
}

impl Cli {
    /// Config with every flag applied; the later source wins:
    /// file, then named flags, then `--set`.
    pub fn resolved_input(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::new(),
        };
        if let Some(seed) = self.seed {
            cfg.set("", "seed", &seed.to_string())?;
        }
        if let Some(out) = &self.out {
            cfg.set("", "out", &out.to_string_lossy())?;
        }
        let section = self.command.section();
        let named = [
            ("verify", "estimate", &self.estimate),
            ("grid", "dim", &self.n),
            ("grid", "size", &self.size),
            ("grid", "length", &self.length),
            (section, "alpha", &self.alpha),
            (section, "r", &self.r),
            (section, "p", &self.p),
            (section, "q", &self.q),
            (section, "h", &self.h),
            (section, "t_end", &self.t_end),
            (section, "steps", &self.steps),
        ];
        for (s, k, v) in named {
            if let Some(v) = v {
                cfg.set(s, k, v)?;
            }
        }
        for o in &self.overrides {
            cfg.set_dotted(o)?;
        }
        Ok(cfg)
    }
}

/// Paths written by a successful run.
#[derive(Debug)]
pub struct RunSummary {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut cfg = cli.resolved_input()?;
    // The report location is not part of the experiment.
    let out = cfg.remove("", "out").map_or_else(|| PathBuf::from("reports"), PathBuf::from);
    let (resolved, outcome) = commands::execute(cli.command, &cfg)?;

    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    let stem = cli.command.section();
    let mut report = report::Report::new(stem, &resolved, &outcome.inputs, &outcome.result);
    if !cli.deterministic {
        report.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    let json = report::write_file(&out, &format!("{stem}.json"), report.to_json().as_bytes())?;
    let csv = report::write_file(&out, &format!("{stem}.csv"), outcome.csv.as_bytes())?;
    let files = outcome
        .files
        .iter()
        .map(|(name, bytes)| report::write_file(&out, name, bytes))
        .collect::<Result<_, _>>()?;
    Ok(RunSummary { json, csv, files })
}
