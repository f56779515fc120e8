//! Empirical copula lattice and the analytic copulas Π, W and M.

use std::fmt;
use std::io::Write;

use crate::error::{CopulaError, Result};
use crate::samples::{pseudo_observations, PairedSample, PseudoObservations};

/// Largest n for which [`empirical_copula`] allocates the full lattice.
pub const DEFAULT_LATTICE_LIMIT: usize = 8192;

/// Cumulative counts on an (m+1)×(m+1) lattice over a sample of size n.
///
/// `count(i, j)` is the number of observations whose pseudo-observation
/// lies in `[0, i/m] × [0, j/m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CountLattice {
    pub n: usize,
    pub m: usize,
    counts: Vec<u32>,
}

impl CountLattice {
    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * (self.m + 1) + j]
    }

    /// Scatters `(bin_u[k], bin_v[k])` onto the lattice and takes the 2D
    /// prefix sum.
    fn from_bins(n: usize, m: usize, bins: impl Iterator<Item = (usize, usize)>) -> Self {
        let w = m + 1;
        let mut counts = vec![0u32; w * w];
        for (a, b) in bins {
            counts[a * w + b] += 1;
        }
        for row in counts.chunks_exact_mut(w) {
            for j in 1..w {
                row[j] += row[j - 1];
            }
        }
        for i in 1..w {
            let (prev, cur) = counts.split_at_mut(i * w);
            let prev = &prev[(i - 1) * w..];
            for (c, p) in cur[..w].iter_mut().zip(prev) {
                *c += *p;
            }
        }
        Self { n, m, counts }
    }

    /// Step-function completion of Cₙ evaluated on the m-lattice:
    /// `count(i, j) = #{k : û_k <= i/m, v̂_k <= j/m}`.
    pub fn step(po: &PseudoObservations, m: usize) -> Self {
        let n = po.n();
        // smallest i with r/n <= i/m, i.e. ceil(r*m/n), in exact integers
        let bin = |r: u32| (r as usize * m).div_ceil(n);
        let bins = po
            .x_ranks
            .ranks
            .iter()
            .zip(&po.y_ranks.ranks)
            .map(|(&r, &s)| (bin(r), bin(s)));
        Self::from_bins(n, m, bins)
    }
}

/// The empirical copula Cₙ on the lattice `{0, 1/n, ..., 1}²`, including the
/// zero row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCopulaGrid {
    lattice: CountLattice,
}

impl EmpiricalCopulaGrid {
    pub fn n(&self) -> usize {
        self.lattice.n
    }

    /// n·Cₙ(i/n, j/n), an integer count.
    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.lattice.count(i, j)
    }

    /// Cₙ(i/n, j/n) for `i, j` in `0..=n`.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.n() as f64
    }

    pub(crate) fn lattice(&self) -> &CountLattice {
        &self.lattice
    }

    /// Wraps raw counts (row-major, (n+1)² entries). No copula properties
    /// are checked; see [`check_frechet`].
    pub fn from_counts(n: usize, counts: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(CopulaError::TooFewRows(n));
        }
        if counts.len() != (n + 1) * (n + 1) {
            return Err(CopulaError::LengthMismatch(counts.len(), (n + 1) * (n + 1)));
        }
        Ok(Self {
            lattice: CountLattice { n, m: n, counts },
        })
    }

    /// Dumps the (n+1)×(n+1) matrix of values as CSV; row i is the u-index.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.n();
        for i in 0..=n {
            let row: Vec<String> = (0..=n).map(|j| self.value(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Builds Cₙ from a sample with the default lattice limit.
pub fn empirical_copula(s: &PairedSample) -> Result<EmpiricalCopulaGrid> {
    empirical_copula_with_limit(s, DEFAULT_LATTICE_LIMIT)
}

/// Builds Cₙ in O(n²) by scattering rank pairs and prefix-summing.
///
/// Ties follow the `<=` counting rule: the row for the i-th order statistic
/// is the row of its max-rank.
pub fn empirical_copula_with_limit(s: &PairedSample, limit: usize) -> Result<EmpiricalCopulaGrid> {
    let n = s.n();
    if n < 2 {
        return Err(CopulaError::TooFewRows(n));
    }
    if n > limit {
        return Err(CopulaError::TooLarge { n, limit });
    }
    let po = pseudo_observations(s);
    let mut lattice = CountLattice::from_bins(
        n,
        n,
        po.x_ranks
            .ranks
            .iter()
            .zip(&po.y_ranks.ranks)
            .map(|(&r, &s)| (r as usize, s as usize)),
    );

    let row_src = po.x_ranks.order_statistic_ranks();
    let col_src = po.y_ranks.order_statistic_ranks();
    let w = n + 1;
    // source index is never below the target, and a source row maps to itself
    for (i, &src) in row_src.iter().enumerate() {
        let (i, src) = (i + 1, src as usize);
        if src != i {
            lattice.counts.copy_within(src * w..(src + 1) * w, i * w);
        }
    }
    if col_src
        .iter()
        .enumerate()
        .any(|(j, &s)| s as usize != j + 1)
    {
        for row in lattice.counts.chunks_exact_mut(w) {
            for (j, &src) in col_src.iter().enumerate() {
                row[j + 1] = row[src as usize];
            }
        }
    }
    Ok(EmpiricalCopulaGrid { lattice })
}

/// A cell where Cₙ leaves the Fréchet–Hoeffding band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetViolation {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Display for FrechetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C({}, {}) = {} outside [{}, {}]",
            self.i, self.j, self.value, self.lower, self.upper
        )
    }
}

/// Checks `W <= Cₙ <= M` at every lattice cell, in exact integer arithmetic.
///
/// Holds for every tie-free sample; heavy ties can break it.
pub fn check_frechet(g: &EmpiricalCopulaGrid) -> std::result::Result<(), FrechetViolation> {
    let n = g.n();
    for i in 0..=n {
        for j in 0..=n {
            let c = g.count(i, j) as usize;
            let lower = (i + j).saturating_sub(n);
            let upper = i.min(j);
            if c < lower || c > upper {
                return Err(FrechetViolation {
                    i,
                    j,
                    value: g.value(i, j),
                    lower: lower as f64 / n as f64,
                    upper: upper as f64 / n as f64,
                });
            }
        }
    }
    Ok(())
}

/// The product copula and the two Fréchet–Hoeffding bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticCopula {
    /// Π(u, v) = uv
    Product,
    /// W(u, v) = max(u + v − 1, 0)
    LowerBound,
    /// M(u, v) = min(u, v)
    UpperBound,
}

impl AnalyticCopula {
    pub fn evaluate(self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(CopulaError::Domain(format!(
                "copula arguments ({u}, {v}) outside [0,1]²"
            )));
        }
        Ok(match self {
            AnalyticCopula::Product => u * v,
            AnalyticCopula::LowerBound => (u + v - 1.0).max(0.0),
            AnalyticCopula::UpperBound => u.min(v),
        })
    }
}

pub fn evaluate_analytic(c: AnalyticCopula, u: f64, v: f64) -> Result<f64> {
    c.evaluate(u, v)
}
