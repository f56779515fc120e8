//! Synthetic samples with a prescribed copula and prescribed marginals.
//!
//! Uniform coordinates `(u, v)` are drawn from a copula and then pushed
//! through marginal quantile functions, `x = F⁻¹(u)`, `y = G⁻¹(v)`. Since
//! quantile functions are strictly increasing, the result has the same ranks
//! (and so the same empirical copula) as the uniform pairs.
//!
//! All randomness comes from a ChaCha8 stream seeded with a 64-bit seed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use statrs::function::erf::erfc;

use crate::error::{CopulaError, Result};
use crate::samples::{max_ranks, PairedSample};

/// One bivariate normal cluster of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub weight: f64,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl Cluster {
    /// Lower Cholesky factor, or `None` unless symmetric positive-definite.
    fn cholesky(&self) -> Option<[f64; 3]> {
        let [[a, b], [c, d]] = self.covariance;
        if b != c || a <= 0.0 {
            return None;
        }
        let l11 = a.sqrt();
        let l21 = b / l11;
        let rest = d - l21 * l21;
        (rest > 0.0).then(|| [l11, l21, rest.sqrt()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CopulaKind {
    Independent,
    Comonotone,
    Countermonotone,
    Gaussian { r: f64 },
    ClusterMixture { components: Vec<Cluster> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSamplerSpec {
    pub kind: CopulaKind,
    pub seed: u64,
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(CopulaError::Spec(format!(
                "mixture weight {w} must be positive"
            )));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(CopulaError::Spec("mixture has no components".into()));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(CopulaError::Spec(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

impl CopulaSamplerSpec {
    pub fn new(kind: CopulaKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            CopulaKind::Gaussian { r } if !(*r > -1.0 && *r < 1.0) => Err(CopulaError::Spec(
                format!("gaussian correlation {r} must lie in (-1, 1)"),
            )),
            CopulaKind::ClusterMixture { components } => {
                check_weights(components.iter().map(|c| c.weight))?;
                for c in components {
                    if c.cholesky().is_none() || c.mean.iter().any(|m| !m.is_finite()) {
                        return Err(CopulaError::Spec(format!(
                            "cluster covariance {:?} is not positive-definite",
                            c.covariance
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CopulaError::Domain(format!(
            "probability {p} outside (0, 1)"
        )));
    }
    // 1 − p is exact here, and the lower tail keeps the Halley step accurate
    if p > 0.5 {
        return Ok(-normal_quantile(1.0 - p)?);
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

// largest double below 1
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

fn open_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, ONE_BELOW)
}

/// Draws a cluster label and a point from a bivariate normal mixture.
fn draw_cluster(rng: &mut ChaCha8Rng, components: &[Cluster]) -> (usize, [f64; 2]) {
    let pick: f64 = rng.random();
    let mut acc = 0.0;
    let mut label = components.len() - 1;
    for (k, c) in components.iter().enumerate() {
        acc += c.weight;
        if pick < acc {
            label = k;
            break;
        }
    }
    let c = &components[label];
    let [l11, l21, l22] = c.cholesky().expect("validated covariance");
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    (
        label,
        [c.mean[0] + l11 * z1, c.mean[1] + l21 * z1 + l22 * z2],
    )
}

/// Raw draws from a cluster mixture together with their cluster labels.
pub fn sample_mixture(
    components: &[Cluster],
    n: usize,
    seed: u64,
) -> Result<(PairedSample, Vec<usize>)> {
    let spec = CopulaSamplerSpec::new(
        CopulaKind::ClusterMixture {
            components: components.to_vec(),
        },
        seed,
    );
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut xs, mut ys, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let (label, [x, y]) = draw_cluster(&mut rng, components);
        xs.push(x);
        ys.push(y);
        labels.push(label);
    }
    Ok((PairedSample::new(xs, ys)?, labels))
}

/// Draws n pairs in the open unit square from the copula in `spec`.
///
/// Cluster mixtures are mapped to the square by their own ranks,
/// `rank / (n + 1)`, which keeps every coordinate strictly inside (0, 1).
pub fn sample_copula(spec: &CopulaSamplerSpec, n: usize) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if n < 2 {
        return Err(CopulaError::TooFewRows(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairs = match &spec.kind {
        CopulaKind::Independent => (0..n)
            .map(|_| (rng.sample(Open01), rng.sample(Open01)))
            .collect(),
        CopulaKind::Comonotone => (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                (u, u)
            })
            .collect(),
        // Open01 yields multiples of 2^-53 offset by half a step, so 1 − u
        // is exact and stays in (0, 1)
        CopulaKind::Countermonotone => (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                (u, 1.0 - u)
            })
            .collect(),
        CopulaKind::Gaussian { r } => {
            let s = (1.0 - r * r).sqrt();
            (0..n)
                .map(|_| {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    (
                        open_unit(normal_cdf(z1)),
                        open_unit(normal_cdf(r * z1 + s * z2)),
                    )
                })
                .collect()
        }
        CopulaKind::ClusterMixture { components } => {
            let (sample, _) = sample_mixture(components, n, spec.seed)?;
            let scale = (n + 1) as f64;
            let rx = max_ranks(sample.xs());
            let ry = max_ranks(sample.ys());
            rx.ranks
                .iter()
                .zip(&ry.ranks)
                .map(|(&r, &s)| (r as f64 / scale, s as f64 / scale))
                .collect()
        }
    };
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mu: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSpec {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sd: f64 },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sd: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
}

impl MarginalSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CopulaError::Spec(msg));
        match self {
            MarginalSpec::Uniform { a, b } if !(b > a && a.is_finite() && b.is_finite()) => {
                bad(format!("uniform needs a < b, got ({a}, {b})"))
            }
            MarginalSpec::Normal { mu, sd } | MarginalSpec::LogNormal { mu, sd }
                if !(*sd > 0.0 && mu.is_finite() && sd.is_finite()) =>
            {
                bad(format!("sd must be positive, got {sd}"))
            }
            MarginalSpec::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                bad(format!("rate must be positive, got {rate}"))
            }
            MarginalSpec::GaussianMixture { components } => {
                check_weights(components.iter().map(|c| c.weight))?;
                match components
                    .iter()
                    .find(|c| !(c.sd > 0.0 && c.mu.is_finite()))
                {
                    Some(c) => bad(format!("mixture component {c:?} is invalid")),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            MarginalSpec::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            MarginalSpec::Normal { mu, sd } => normal_cdf((x - mu) / sd),
            MarginalSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            MarginalSpec::LogNormal { mu, sd } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sd)
                }
            }
            MarginalSpec::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * normal_cdf((x - c.mu) / c.sd))
                .sum(),
        }
    }
}

/// Inverse CDF of a marginal at `p ∈ (0, 1)`.
///
/// Mixtures have no closed form and are inverted by bisection on the CDF,
/// carried down to adjacent doubles.
pub fn quantile(m: &MarginalSpec, p: f64) -> Result<f64> {
    m.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(CopulaError::Domain(format!(
            "probability {p} outside (0, 1)"
        )));
    }
    Ok(match m {
        MarginalSpec::Uniform { a, b } => a + (b - a) * p,
        MarginalSpec::Normal { mu, sd } => mu + sd * normal_quantile(p)?,
        MarginalSpec::Exponential { rate } => -(-p).ln_1p() / rate,
        MarginalSpec::LogNormal { mu, sd } => (mu + sd * normal_quantile(p)?).exp(),
        MarginalSpec::GaussianMixture { components } => {
            let mut lo = components
                .iter()
                .map(|c| c.mu - 40.0 * c.sd)
                .fold(f64::INFINITY, f64::min);
            let mut hi = components
                .iter()
                .map(|c| c.mu + 40.0 * c.sd)
                .fold(f64::NEG_INFINITY, f64::max);
            for _ in 0..2100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if m.cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    })
}

/// Imposes marginals on uniform pairs: `x = F⁻¹(u)`, `y = G⁻¹(v)`.
pub fn apply_marginals(
    uv_pairs: &[(f64, f64)],
    mx: &MarginalSpec,
    my: &MarginalSpec,
) -> Result<PairedSample> {
    let mut xs = Vec::with_capacity(uv_pairs.len());
    let mut ys = Vec::with_capacity(uv_pairs.len());
    for &(u, v) in uv_pairs {
        xs.push(quantile(mx, u)?);
        ys.push(quantile(my, v)?);
    }
    PairedSample::new(xs, ys)
}

/// Named dataset recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Independent uniform marginals.
    IndependentUniform,
    /// Five clusters along the diagonal, each negatively correlated inside.
    SimpsonClusters,
    /// Two independent bimodal marginals, giving four clusters.
    FourClustersIndependent,
    /// A strictly decreasing relation.
    CountermonotoneLine,
    /// A V of two elongated clusters: one falling, one rising.
    WeakMixed,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::IndependentUniform,
        Preset::SimpsonClusters,
        Preset::FourClustersIndependent,
        Preset::CountermonotoneLine,
        Preset::WeakMixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::IndependentUniform => "independent_uniform",
            Preset::SimpsonClusters => "simpson_clusters",
            Preset::FourClustersIndependent => "four_clusters_independent",
            Preset::CountermonotoneLine => "countermonotone_line",
            Preset::WeakMixed => "weak_mixed",
        }
    }

    /// Generates the dataset; mixture presets also return cluster labels.
    pub fn generate(self, n: usize, seed: u64) -> Result<(PairedSample, Option<Vec<usize>>)> {
        let uniform = MarginalSpec::Uniform { a: 0.0, b: 1.0 };
        let standard = MarginalSpec::Normal { mu: 0.0, sd: 1.0 };
        let from_copula = |kind: CopulaKind, mx: &MarginalSpec, my: &MarginalSpec| {
            let pairs = sample_copula(&CopulaSamplerSpec::new(kind, seed), n)?;
            apply_marginals(&pairs, mx, my).map(|s| (s, None))
        };
        match self {
            Preset::IndependentUniform => from_copula(CopulaKind::Independent, &uniform, &uniform),
            Preset::CountermonotoneLine => {
                from_copula(CopulaKind::Countermonotone, &standard, &standard)
            }
            Preset::FourClustersIndependent => {
                let bimodal = MarginalSpec::GaussianMixture {
                    components: vec![
                        MixtureComponent {
                            weight: 0.5,
                            mu: -3.0,
                            sd: 1.0,
                        },
                        MixtureComponent {
                            weight: 0.5,
                            mu: 3.0,
                            sd: 1.0,
                        },
                    ],
                };
                from_copula(CopulaKind::Independent, &bimodal, &bimodal)
            }
            Preset::SimpsonClusters => {
                let components: Vec<Cluster> = (0..5)
                    .map(|k| Cluster {
                        weight: 0.2,
                        mean: [2.0 * k as f64, 2.0 * k as f64],
                        covariance: [[0.5, -0.4], [-0.4, 0.5]],
                    })
                    .collect();
                sample_mixture(&components, n, seed).map(|(s, l)| (s, Some(l)))
            }
            Preset::WeakMixed => {
                let components = vec![
                    Cluster {
                        weight: 0.5,
                        mean: [-1.5, 0.0],
                        covariance: [[1.0, -0.9], [-0.9, 1.0]],
                    },
                    Cluster {
                        weight: 0.5,
                        mean: [1.5, 0.0],
                        covariance: [[1.0, 0.9], [0.9, 1.0]],
                    },
                ];
                sample_mixture(&components, n, seed).map(|(s, l)| (s, Some(l)))
            }
        }
    }
}

impl FromStr for Preset {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CopulaError::UnknownPreset(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn preset(name: &str, n: usize, seed: u64) -> Result<PairedSample> {
    Ok(name.parse::<Preset>()?.generate(n, seed)?.0)
}

/// Writes a sample as CSV with header `x,y`. Values use the shortest
/// representation that parses back to the same double.
pub fn write_sample_csv<W: Write>(s: &PairedSample, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in s.xs().iter().zip(s.ys()) {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}
