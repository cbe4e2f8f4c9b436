//! The `qsl` command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad input or I/O failure.

pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{QslError, Result};
use crate::models::{ChannelSpec, OhmicSpec, RtnSpec};
use crate::oracles::{run_validation, Fault, Level, ValidationOptions, ValidationReport};
use crate::qsl::{sweep, SweepRow};
use config::{Format, PartialConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limit times for filtered qubit dephasing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce one of the preset figure sweeps.
    Figure(FigureArgs),
    /// Run a custom (k, τ) sweep.
    Sweep(Box<SweepArgs>),
    /// Compare the engine against the brute-force oracles.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    /// Phase damping with s = 0.5, 1, 3.5 or telegraph noise with αΔ = 1/5, 2
    /// at Δ = 1; every other setting takes its default.
    pub fn config(&self) -> RunConfig {
        let channel = match self {
            Figure::Fig1 => ChannelSpec::PhaseDamping(OhmicSpec::new(0.5, 1.0).expect("preset")),
            Figure::Fig2 => ChannelSpec::PhaseDamping(OhmicSpec::new(1.0, 1.0).expect("preset")),
            Figure::Fig3 => ChannelSpec::PhaseDamping(OhmicSpec::new(3.5, 1.0).expect("preset")),
            Figure::Fig4 => ChannelSpec::Rtn(RtnSpec::new(0.2, 1.0).expect("preset")),
            Figure::Fig5 => ChannelSpec::Rtn(RtnSpec::new(2.0, 1.0).expect("preset")),
        };
        let mut cfg = RunConfig::resolve(PartialConfig::default()).expect("defaults are valid");
        cfg.channel = channel;
        cfg
    }

    pub fn title(&self) -> &'static str {
        match self {
            Figure::Fig1 => "phase damping, s = 0.5",
            Figure::Fig2 => "phase damping, s = 1",
            Figure::Fig3 => "phase damping, s = 3.5",
            Figure::Fig4 => "random telegraph noise, αΔ = 1/5",
            Figure::Fig5 => "random telegraph noise, αΔ = 2",
        }
    }
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    pub name: Figure,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write `<name>.svg`.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// Flat TOML config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// phase-damping | rtn
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "omega-c")]
    pub omega_c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated filter parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub k: Option<Vec<f64>>,
    #[arg(long = "tau-start", allow_hyphen_values = true)]
    pub tau_start: Option<f64>,
    #[arg(long = "tau-end", allow_hyphen_values = true)]
    pub tau_end: Option<f64>,
    /// Number of τ intervals; 0 evaluates tau-start only.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "tau-d", allow_hyphen_values = true)]
    pub tau_d: Option<f64>,
    /// paper | ml
    #[arg(long)]
    pub variant: Option<String>,
    /// Quadrature points per driving window.
    #[arg(long)]
    pub points: Option<usize>,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json | svg
    #[arg(long)]
    pub format: Option<String>,
}

impl SweepArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            model: self.model.clone(),
            s: self.s,
            omega_c: self.omega_c,
            alpha: self.alpha,
            delta: self.delta,
            k: self.k.clone(),
            tau_start: self.tau_start,
            tau_end: self.tau_end,
            steps: self.steps,
            tau_d: self.tau_d,
            variant: self.variant.clone(),
            points: self.points,
            out: self.out.clone(),
            format: self.format.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    RtnRateSign,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: LevelArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Deliberately break a component to exercise the suite.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

/// Failure modes of a command, each mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Input(QslError),
    Io { path: PathBuf, source: std::io::Error },
    Validation(ValidationReport),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            _ => EXIT_BAD_INPUT,
        }
    }
}

impl From<QslError> for CliError {
    fn from(e: QslError) -> Self {
        CliError::Input(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Validation(report) => {
                let n = report.failures().count();
                write!(f, "{n} of {} checks failed", report.checks.len())
            }
        }
    }
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the sweep described by `cfg`.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    sweep(&cfg.sweep_spec())
}

/// One polyline of the selected-variant τ_QSL(τ) per filter parameter.
pub fn render_svg(title: &str, cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let mut ks = cfg.ks.clone();
    ks.sort_by(f64::total_cmp);
    let series: Vec<svg::Series> = ks
        .iter()
        .map(|&k| svg::Series {
            label: format!("k = {k}"),
            points: rows
                .iter()
                .filter(|r| r.k == k)
                .map(|r| (r.tau(), r.selected(cfg.variant)))
                .collect(),
        })
        .collect();
    let y_label = format!("τ_QSL ({} variant)", cfg.variant.as_str());
    svg::line_plot(title, "τ", &y_label, &series)
}

/// Renders rows in the configured format.
pub fn render(cfg: &RunConfig, rows: &[SweepRow], title: &str) -> String {
    match cfg.format {
        Format::Csv => output::render_csv(cfg, rows),
        Format::Json => output::render_json(cfg, rows),
        Format::Svg => render_svg(title, cfg, rows),
    }
}

/// `figure`: writes `<name>.csv` (and `<name>.svg`) into `dir`; returns the
/// paths written.
pub fn cmd_figure(fig: Figure, dir: &Path, with_svg: bool) -> std::result::Result<Vec<PathBuf>, CliError> {
    let cfg = fig.config();
    let rows = run_sweep(&cfg)?;
    let csv_path = dir.join(format!("{}.csv", fig.name()));
    write_file(&csv_path, &output::render_csv(&cfg, &rows))?;
    let mut written = vec![csv_path];
    if with_svg {
        let svg_path = dir.join(format!("{}.svg", fig.name()));
        write_file(&svg_path, &render_svg(fig.title(), &cfg, &rows))?;
        written.push(svg_path);
    }
    Ok(written)
}

/// `sweep`: resolves flags over the optional config file and renders the
/// table to `out` or returns it for standard output.
pub fn cmd_sweep(args: &SweepArgs) -> std::result::Result<Option<String>, CliError> {
    let base = match &args.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    let cfg = RunConfig::resolve(args.partial().over(base))?;
    let rows = run_sweep(&cfg)?;
    let text = render(&cfg, &rows, &format!("{} sweep", cfg.channel.label()));
    match &cfg.out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

/// `validate`: runs the oracle suite and formats its report.
pub fn cmd_validate(args: &ValidateArgs) -> (String, std::result::Result<(), CliError>) {
    let opts = ValidationOptions {
        level: match args.level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        },
        seed: args.seed,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::RtnRateSign => Fault::RtnRateSign,
        }),
    };
    let report = run_validation(&opts);
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!(
            "{} {}: expected {:.6e}, got {:.6e}, deviation {:.3e}, tolerance {:.3e}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.got,
            c.deviation,
            c.tolerance
        ));
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    text.push_str(&format!("{passed}/{} checks passed\n", report.checks.len()));
    if report.passed() {
        (text, Ok(()))
    } else {
        (text, Err(CliError::Validation(report)))
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// to the given streams. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Figure(a) => cmd_figure(a.name, &a.out, a.svg).map(|paths| {
            for p in paths {
                let _ = writeln!(stdout, "wrote {}", p.display());
            }
        }),
        Command::Sweep(a) => cmd_sweep(a).map(|text| {
            if let Some(text) = text {
                let _ = stdout.write_all(text.as_bytes());
            }
        }),
        Command::Validate(a) => {
            let (report, result) = cmd_validate(a);
            let _ = stdout.write_all(report.as_bytes());
            result
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let CliError::Validation(report) = &e {
                for c in report.failures() {
                    let _ = writeln!(
                        stderr,
                        "  {}: expected {:e}, got {:e}, tolerance {:e}",
                        c.name, c.expected, c.got, c.tolerance
                    );
                }
            }
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
