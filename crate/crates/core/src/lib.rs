//! Empirical copulas and copula-based views of bivariate dependence.
//!
//! The pipeline is: load a [`PairedSample`], turn it into ranks and
//! pseudo-observations, build the [`EmpiricalCopulaGrid`] with a 2D prefix
//! sum, and derive scalar measures (Spearman's ρₙ, Schweizer–Wolff σₙ, Λₙ,
//! δₙ(p)) or heatmap fields from it. The `synth` module goes the other way
//! and builds data with a prescribed copula and marginals; `render` emits
//! SVG; `signtest` holds the Bayesian paired sign test.

pub mod copula;
pub mod error;
pub mod heatmaps;
pub mod measures;
mod quadrature;
pub mod render;
pub mod samples;
pub mod signtest;
pub mod synth;

pub use copula::{
    check_frechet, empirical_copula, empirical_copula_with_limit, AnalyticCopula,
    EmpiricalCopulaGrid, FrechetViolation, DEFAULT_LATTICE_LIMIT,
};
pub use error::{CopulaError, Result};
pub use heatmaps::{
    coarse_heatmap, colorize_pairs, heatmap, heatmap_normalized, heatmap_rho, heatmap_sigma,
    palette_map, ColorAssignment, FieldKind, HeatmapField, PaletteId, Rgb,
};
pub use measures::{
    linf_lambda_n, lp_distance_n, measure_report, normalize_constant, pearson_r,
    quadrant_classification, schweizer_sigma_n, spearman_rho_n, LpDistance, MeasureReport,
    Quadrant,
};
pub use render::{
    render_heatmap, render_parallel, render_pseudo, render_scatter, Margins, PlotConfig,
};
pub use samples::{
    empirical_cdf_value, load_csv, max_ranks, pseudo_observations, read_columns, ColumnSelector,
    LoadedSample, PairedSample, PseudoObservations, RankVector, TiePolicy,
};
pub use signtest::{
    indicator_counts, posterior, regularized_incomplete_beta, sign_test, PairedAssessments,
    PosteriorSummary,
};
pub use synth::{
    apply_marginals, preset, quantile, sample_copula, write_sample_csv, Cluster, CopulaKind,
    CopulaSamplerSpec, MarginalSpec, MixtureComponent, Preset,
};
