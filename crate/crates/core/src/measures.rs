//! Association measures computed from the empirical copula.
//!
//! Every lattice deviation `Cₙ(i/n, j/n) − ij/n²` is handled as the integer
//! `n·count(i, j) − i·j` over the common denominator n², so ρₙ, σₙ and Λₙ
//! are exact up to a single final rounding. This is what makes them
//! bit-identical under strictly increasing transforms of the data and under
//! reflection of y.

use serde::Serialize;

use crate::copula::EmpiricalCopulaGrid;
use crate::error::{CopulaError, Result};
use crate::quadrature;
use crate::samples::PairedSample;

/// `n·count(i, j) − i·j` for `i, j` in `1..=n`, row by row.
fn deviations(g: &EmpiricalCopulaGrid) -> impl Iterator<Item = i64> + '_ {
    let n = g.n();
    (1..=n)
        .flat_map(move |i| (1..=n).map(move |j| n as i64 * g.count(i, j) as i64 - (i * j) as i64))
}

fn scaled_sum(g: &EmpiricalCopulaGrid, sum: i128) -> f64 {
    let n = g.n() as i128;
    (12 * sum) as f64 / ((n * n - 1) * n * n) as f64
}

/// Spearman's ρₙ: `12/(n²−1) Σᵢⱼ [Cₙ(i/n, j/n) − ij/n²]`.
pub fn spearman_rho_n(g: &EmpiricalCopulaGrid) -> f64 {
    scaled_sum(g, deviations(g).map(i128::from).sum())
}

/// Schweizer–Wolff σₙ: `12/(n²−1) Σᵢⱼ |Cₙ(i/n, j/n) − ij/n²|`.
pub fn schweizer_sigma_n(g: &EmpiricalCopulaGrid) -> f64 {
    scaled_sum(g, deviations(g).map(|d| i128::from(d.abs())).sum())
}

/// Λₙ: `4 max |Cₙ(i/n, j/n) − ij/n²|`.
pub fn linf_lambda_n(g: &EmpiricalCopulaGrid) -> f64 {
    let n = g.n() as f64;
    let max = deviations(g).map(i64::abs).max().unwrap_or(0);
    4.0 * max as f64 / (n * n)
}

/// Empirical Lp distance between Cₙ and Π, normalized by `k_p` and averaged
/// over the lattice with the same `1/(n²−1)` weight as σₙ. At p = 1 this is
/// σₙ.
pub fn lp_distance_n(g: &EmpiricalCopulaGrid, p: f64) -> Result<f64> {
    let k = normalize_constant(p)?;
    if p == 1.0 {
        return Ok(schweizer_sigma_n(g));
    }
    let n = g.n() as f64;
    let n2 = n * n;
    let sum: f64 = deviations(g).map(|d| (d.abs() as f64 / n2).powf(p)).sum();
    Ok((k * sum / (n2 - 1.0)).powf(1.0 / p))
}

/// `k_p = 1 / ∬ |M(u,v) − uv|^p du dv`, the constant that makes the Lp
/// distance equal 1 at C = M (and, by u ↦ 1 − u, at C = W).
///
/// p = 1 returns the Schweizer–Wolff constant 12 exactly; other p go through
/// [`normalize_constant_quadrature`].
pub fn normalize_constant(p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 1.0 {
        return Ok(12.0);
    }
    normalize_constant_quadrature(p)
}

/// `k_p` by nested adaptive Gauss–Kronrod over the triangle u <= v, where
/// `M − Π = u(1 − v)`; the other triangle contributes the same by symmetry.
pub fn normalize_constant_quadrature(p: f64) -> Result<f64> {
    check_p(p)?;
    // the integrand peaks at 4^-p; scale the absolute tolerance with it
    let tol = 1e-13 * 0.25f64.powf(p);
    let inner = |v: f64| {
        quadrature::integrate(|u| (u * (1.0 - v)).powf(p), 0.0, v, 0.1 * tol).unwrap_or(f64::NAN)
    };
    let half = quadrature::integrate(inner, 0.0, 1.0, tol)
        .filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| CopulaError::Numeric(format!("k_p quadrature failed at p={p}")))?;
    Ok(1.0 / (2.0 * half))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(CopulaError::Domain(format!(
            "p must be finite and >= 1, got {p}"
        )));
    }
    Ok(())
}

/// Sample Pearson correlation, clamped to [−1, 1].
pub fn pearson_r(s: &PairedSample) -> Result<f64> {
    let n = s.n() as f64;
    let mx = s.xs().iter().sum::<f64>() / n;
    let my = s.ys().iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in s.xs().iter().zip(s.ys()) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(CopulaError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(CopulaError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sign pattern of Cₙ − Π implied by the pair (ρₙ, σₙ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    /// ρ = σ: Cₙ >= Π everywhere.
    PqdConsistent,
    /// ρ = −σ: Cₙ <= Π everywhere.
    NqdConsistent,
    /// Cₙ is above Π in some region and below it in another.
    Mixed,
}

pub fn quadrant_classification(rho_n: f64, sigma_n: f64, tol: f64) -> Result<Quadrant> {
    if rho_n.abs() > sigma_n + tol {
        return Err(CopulaError::InconsistentInputs(format!(
            "|rho| = {} exceeds sigma = {sigma_n}",
            rho_n.abs()
        )));
    }
    Ok(if sigma_n - rho_n <= tol {
        Quadrant::PqdConsistent
    } else if sigma_n + rho_n <= tol {
        Quadrant::NqdConsistent
    } else {
        Quadrant::Mixed
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpDistance {
    pub p: f64,
    pub delta: f64,
}

/// All measures for one pair of variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub n: usize,
    pub rho_n: f64,
    pub sigma_n: f64,
    pub lambda_n: f64,
    /// `None` when either variable is constant.
    pub pearson_r: Option<f64>,
    #[serde(rename = "lp")]
    pub lp_distances: Vec<LpDistance>,
    pub quadrant: Quadrant,
}

pub fn measure_report(
    s: &PairedSample,
    g: &EmpiricalCopulaGrid,
    ps: &[f64],
    tol: f64,
) -> Result<MeasureReport> {
    let rho_n = spearman_rho_n(g);
    let sigma_n = schweizer_sigma_n(g);
    let lp_distances = ps
        .iter()
        .map(|&p| {
            Ok(LpDistance {
                p,
                delta: lp_distance_n(g, p)?,
            })
        })
        .collect::<Result<_>>()?;
    let pearson_r = match pearson_r(s) {
        Ok(r) => Some(r),
        Err(CopulaError::ZeroVariance(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(MeasureReport {
        n: g.n(),
        rho_n,
        sigma_n,
        lambda_n: linf_lambda_n(g),
        pearson_r,
        lp_distances,
        quadrant: quadrant_classification(rho_n, sigma_n, tol)?,
    })
}
