//! `copulascope`: empirical-copula measures, heatmaps, plots, synthetic data
//! and sign tests from the command line.
//!
//! Exit status is 0 on success, 2 for usage or validation problems and 3 for
//! numerical failures. Diagnostics go to standard error.

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use copulascope::{CopulaError, FieldKind, PaletteId};

#[derive(Parser)]
#[command(
    name = "copulascope",
    version,
    about = "Copula-based views of bivariate dependence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct PairArgs {
    /// Input CSV with a header row
    #[arg(long, short)]
    pub input: PathBuf,
    /// X column, by header name or 0-based index
    #[arg(long, short, default_value = "0")]
    pub x: String,
    /// Y column, by header name or 0-based index
    #[arg(long, short, default_value = "1")]
    pub y: String,
}

#[derive(Args)]
pub struct FieldArgs {
    /// Lattice resolution m (default: n up to 512 observations, else 256)
    #[arg(long)]
    pub m: Option<usize>,
    /// rdbu, purples, or auto (purples for sigma, rdbu otherwise)
    #[arg(long, default_value = "auto", value_parser = parse_palette)]
    pub palette: PaletteId,
}

#[derive(Args)]
pub struct PlotArgs {
    #[arg(long, default_value_t = 480)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    #[arg(long, default_value_t = 2.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 40.0)]
    pub margin: f64,
    #[arg(long)]
    pub no_axes: bool,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PlotKind {
    Scatter,
    Pseudo,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MatrixFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SignFormat {
    Json,
    Table,
}

fn parse_palette(s: &str) -> Result<PaletteId, String> {
    s.parse().map_err(|e: CopulaError| e.to_string())
}

fn parse_kind(s: &str) -> Result<FieldKind, String> {
    s.parse().map_err(|e: CopulaError| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Write pseudo-observations (u, v) as CSV
    Pseudo {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Compute ρₙ, σₙ, Λₙ and Lp distances as JSON
    Measures {
        #[command(flatten)]
        pair: PairArgs,
        /// Exponents p ≥ 1 for the Lp distances
        #[arg(long = "p", value_delimiter = ',', default_value = "1,2")]
        ps: Vec<f64>,
        /// Slack for the quadrant classification
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Build a heatmap field; writes CSV and SVG, prints a JSON summary
    Heatmap {
        #[command(flatten)]
        pair: PairArgs,
        /// rho, sigma or normalized
        #[arg(long, default_value = "normalized", value_parser = parse_kind)]
        kind: FieldKind,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        plot: PlotArgs,
        /// Where to write the JSON summary (default: stdout)
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Render a plot colored by a heatmap field
    Colorize {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value = "pseudo")]
        plot_kind: PlotKind,
        #[arg(long, default_value = "normalized", value_parser = parse_kind)]
        kind: FieldKind,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        plot: PlotArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Pairwise ρₙ and σₙ for every pair of columns
    Matrix {
        #[arg(long, short)]
        input: PathBuf,
        /// Columns to include (default: all)
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: MatrixFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset
    Synth {
        /// Named recipe
        #[arg(long, conflicts_with_all = ["copula", "x_marginal", "y_marginal"])]
        preset: Option<String>,
        /// Copula spec, e.g. gaussian:0.6
        #[arg(long)]
        copula: Option<String>,
        /// Marginal of x, e.g. normal:0,1
        #[arg(long, default_value = "uniform:0,1")]
        x_marginal: String,
        #[arg(long, default_value = "uniform:0,1")]
        y_marginal: String,
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Bayesian paired sign test on two columns of assessments
    Signtest {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value = "s")]
        s: String,
        #[arg(long, default_value = "t")]
        t: String,
        /// Credibility level
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: SignFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> commands::CmdResult {
    match cli.command {
        Command::Pseudo { pair, out } => commands::pseudo(&pair, out.as_deref()),
        Command::Measures { pair, ps, tol, out } => {
            commands::measures(&pair, &ps, tol, out.as_deref())
        }
        Command::Heatmap {
            pair,
            kind,
            field,
            svg,
            csv,
            plot,
            out,
        } => commands::heatmap(
            &pair,
            kind,
            &field,
            &plot,
            commands::HeatmapOutputs {
                svg: svg.as_deref(),
                csv: csv.as_deref(),
                summary: out.as_deref(),
            },
        ),
        Command::Colorize {
            pair,
            plot_kind,
            kind,
            field,
            plot,
            out,
        } => commands::colorize(&pair, plot_kind, kind, &field, &plot, out.as_deref()),
        Command::Matrix {
            input,
            columns,
            format,
            out,
        } => commands::matrix(&input, &columns, format, out.as_deref()),
        Command::Synth {
            preset,
            copula,
            x_marginal,
            y_marginal,
            n,
            seed,
            out,
        } => {
            let source = match preset {
                Some(name) => commands::SynthSource::Preset(name),
                None => commands::SynthSource::Spec {
                    copula: copula.unwrap_or_else(|| "independent".into()),
                    x_marginal,
                    y_marginal,
                },
            };
            commands::synth(source, n, seed, out.as_deref())
        }
        Command::Signtest {
            input,
            s,
            t,
            gamma,
            format,
            out,
        } => commands::signtest(&input, &s, &t, gamma, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("copulascope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
