use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use copulascope::render::Margins;
use copulascope::samples::ColumnTable;
use copulascope::synth::{apply_marginals, sample_copula, write_sample_csv};
use copulascope::{
    coarse_heatmap, colorize_pairs, empirical_copula, load_csv, measure_report,
    pseudo_observations, read_columns, render_heatmap, render_parallel, render_pseudo,
    render_scatter, schweizer_sigma_n, sign_test, spearman_rho_n, ColumnSelector, CopulaError,
    CopulaSamplerSpec, FieldKind, HeatmapField, LoadedSample, PairedAssessments, PairedSample,
    PlotConfig, Preset,
};

use crate::{parse, FieldArgs, MatrixFormat, PairArgs, PlotArgs, PlotKind, SignFormat};

#[derive(Debug)]
pub enum CliError {
    Lib(CopulaError),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(CopulaError::Numeric(_)) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<CopulaError> for CliError {
    fn from(e: CopulaError) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(CopulaError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(CopulaError::Io(e.into()))
    }
}

pub type CmdResult = Result<(), CliError>;

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CmdResult {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn warn_dropped(dropped: usize) {
    if dropped > 0 {
        eprintln!(
            "copulascope: warning: dropped {dropped} rows with missing or non-numeric values"
        );
    }
}

fn load_pair(pair: &PairArgs) -> Result<PairedSample, CliError> {
    let LoadedSample { sample, dropped } = load_csv(&pair.input, pair.x.as_str(), pair.y.as_str())?;
    warn_dropped(dropped);
    Ok(sample)
}

fn plot_config(plot: &PlotArgs, field: Option<&FieldArgs>) -> Result<PlotConfig, CliError> {
    let cfg = PlotConfig {
        width_px: plot.width,
        height_px: plot.height,
        point_radius_px: plot.radius,
        margins_px: Margins::uniform(plot.margin),
        show_axes: !plot.no_axes,
        palette: field.map(|f| f.palette).unwrap_or_default(),
        title: plot.title.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Full lattice when m = n, otherwise the coarse step lattice.
fn build_field(
    s: &PairedSample,
    kind: FieldKind,
    m: Option<usize>,
) -> Result<HeatmapField, CliError> {
    let n = s.n();
    let m = m.unwrap_or(if n <= 512 { n } else { 256 });
    if m == n {
        Ok(copulascope::heatmap(&empirical_copula(s)?, kind))
    } else {
        Ok(coarse_heatmap(&pseudo_observations(s), kind, m)?)
    }
}

pub fn pseudo(pair: &PairArgs, out: Option<&Path>) -> CmdResult {
    let po = pseudo_observations(&load_pair(pair)?);
    let mut w = sink(out)?;
    writeln!(w, "u,v")?;
    for (u, v) in po.us.iter().zip(&po.vs) {
        writeln!(w, "{u},{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn measures(pair: &PairArgs, ps: &[f64], tol: f64, out: Option<&Path>) -> CmdResult {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "tolerance {tol} must be non-negative"
        )));
    }
    if let Some(p) = ps.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return Err(CliError::Usage(format!(
            "Lp exponent {p} must be at least 1"
        )));
    }
    let s = load_pair(pair)?;
    let g = empirical_copula(&s)?;
    write_json(&measure_report(&s, &g, ps, tol)?, out)
}

pub struct HeatmapOutputs<'a> {
    pub svg: Option<&'a Path>,
    pub csv: Option<&'a Path>,
    pub summary: Option<&'a Path>,
}

pub fn heatmap(
    pair: &PairArgs,
    kind: FieldKind,
    field_args: &FieldArgs,
    plot: &PlotArgs,
    outputs: HeatmapOutputs,
) -> CmdResult {
    let cfg = plot_config(plot, Some(field_args))?;
    let s = load_pair(pair)?;
    let field = build_field(&s, kind, field_args.m)?;
    if let Some(path) = outputs.csv {
        let mut w = sink(Some(path))?;
        field.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = outputs.svg {
        std::fs::write(path, render_heatmap(&field, &cfg)?)?;
    }
    write_json(&field.summary(), outputs.summary)
}

pub fn colorize(
    pair: &PairArgs,
    plot_kind: PlotKind,
    kind: FieldKind,
    field_args: &FieldArgs,
    plot: &PlotArgs,
    out: Option<&Path>,
) -> CmdResult {
    let cfg = plot_config(plot, Some(field_args))?;
    let s = load_pair(pair)?;
    let field = build_field(&s, kind, field_args.m)?;
    let po = pseudo_observations(&s);
    let colors = colorize_pairs(&po, &field, cfg.palette)?;
    let doc = match plot_kind {
        PlotKind::Scatter => render_scatter(&s, Some(&colors), &cfg)?,
        PlotKind::Pseudo => render_pseudo(&po, Some(&colors), &cfg)?,
        PlotKind::Parallel => render_parallel(&s, Some(&colors), &cfg)?,
    };
    let mut w = sink(out)?;
    w.write_all(doc.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PairwiseMatrix {
    columns: Vec<String>,
    rho_n: Vec<Vec<f64>>,
    sigma_n: Vec<Vec<f64>>,
    /// Rows used for each pair after dropping missing cells.
    n: Vec<Vec<usize>>,
}

struct PairResult {
    rho: f64,
    sigma: f64,
    n: usize,
}

fn pair_measures(table: &ColumnTable, a: usize, b: usize) -> Result<PairResult, CopulaError> {
    let loaded = table.pair(a, b)?;
    let g = empirical_copula(&loaded.sample)?;
    Ok(PairResult {
        rho: spearman_rho_n(&g),
        sigma: schweizer_sigma_n(&g),
        n: loaded.sample.n(),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("COPULASCOPE_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "COPULASCOPE_THREADS='{value}' is not a positive integer"
                ))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

pub fn matrix(
    input: &Path,
    columns: &[String],
    format: MatrixFormat,
    out: Option<&Path>,
) -> CmdResult {
    let selectors: Vec<ColumnSelector> = columns.iter().map(|c| c.as_str().into()).collect();
    let table = read_columns(input, &selectors)?;
    let d = table.names.len();
    if d < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 numeric columns, found {d}"
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    // collect keeps job order, so output does not depend on scheduling
    let results: Vec<PairResult> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(a, b)| pair_measures(&table, a, b))
            .collect::<Result<_, _>>()
    })?;

    let mut m = PairwiseMatrix {
        columns: table.names.clone(),
        rho_n: vec![vec![0.0; d]; d],
        sigma_n: vec![vec![0.0; d]; d],
        n: vec![vec![0; d]; d],
    };
    for (&(a, b), r) in jobs.iter().zip(&results) {
        for (i, j) in [(a, b), (b, a)] {
            m.rho_n[i][j] = r.rho;
            m.sigma_n[i][j] = r.sigma;
            m.n[i][j] = r.n;
        }
    }
    let dropped = results
        .iter()
        .map(|r| table.rows() - r.n)
        .max()
        .unwrap_or(0);
    warn_dropped(dropped);
    match format {
        MatrixFormat::Json => write_json(&m, out),
        MatrixFormat::Csv => {
            let mut w = sink(out)?;
            writeln!(w, "x,y,n,rho_n,sigma_n")?;
            for i in 0..d {
                for j in 0..d {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        m.columns[i], m.columns[j], m.n[i][j], m.rho_n[i][j], m.sigma_n[i][j]
                    )?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub enum SynthSource {
    Preset(String),
    Spec {
        copula: String,
        x_marginal: String,
        y_marginal: String,
    },
}

pub fn synth(source: SynthSource, n: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    if n < 2 {
        return Err(CliError::Usage(format!("n must be at least 2, got {n}")));
    }
    let sample = match source {
        SynthSource::Preset(name) => name.parse::<Preset>()?.generate(n, seed)?.0,
        SynthSource::Spec {
            copula,
            x_marginal,
            y_marginal,
        } => {
            let spec = CopulaSamplerSpec::new(parse::copula_kind(&copula)?, seed);
            let (mx, my) = (parse::marginal(&x_marginal)?, parse::marginal(&y_marginal)?);
            apply_marginals(&sample_copula(&spec, n)?, &mx, &my)?
        }
    };
    let mut w = sink(out)?;
    write_sample_csv(&sample, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn signtest(
    input: &Path,
    s_col: &str,
    t_col: &str,
    gamma: f64,
    format: SignFormat,
    out: Option<&Path>,
) -> CmdResult {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(CliError::Usage(format!(
            "gamma = {gamma} must lie in (0, 1)"
        )));
    }
    let table = read_columns(input, &[s_col.into(), t_col.into()])?;
    let (mut s, mut t) = (Vec::new(), Vec::new());
    for (a, b) in table.columns[0].iter().zip(&table.columns[1]) {
        if let (Some(a), Some(b)) = (a, b) {
            s.push(*a);
            t.push(*b);
        }
    }
    warn_dropped(table.rows() - s.len());
    let summary = sign_test(&PairedAssessments::new(s, t)?, gamma)?;
    match format {
        SignFormat::Json => write_json(&summary, out),
        SignFormat::Table => {
            let mut w = sink(out)?;
            writeln!(w, "m\tsum_z\ta\ttheta_hat\tb\tsignificant")?;
            writeln!(
                w,
                "{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{}",
                summary.m,
                summary.sum_z,
                summary.interval[0],
                summary.theta_hat,
                summary.interval[1],
                if summary.significant { "Yes" } else { "No" }
            )?;
            w.flush()?;
            Ok(())
        }
    }
}
