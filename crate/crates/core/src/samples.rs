//! Paired samples, ranks and pseudo-observations.

use std::cmp::Ordering;
use std::fs::File;
use std::path::Path;

use crate::error::{CopulaError, Result};

/// n observation pairs of two continuous variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    /// Builds a sample, checking equal lengths, `n >= 2` and finiteness.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(CopulaError::LengthMismatch(xs.len(), ys.len()));
        }
        if xs.len() < 2 {
            return Err(CopulaError::TooFewRows(xs.len()));
        }
        if let Some(k) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(CopulaError::NonFinite(k));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// Applies `fx` to every x and `fy` to every y.
    pub fn map(&self, fx: impl Fn(f64) -> f64, fy: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.xs.iter().map(|&x| fx(x)).collect(),
            self.ys.iter().map(|&y| fy(y)).collect(),
        )
    }

    /// The sample with x and y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// A tied value gets the largest rank of its tie block, i.e. the
    /// count of observations `<=` it.
    MaxRank,
}

/// Ranks in `{1, ..., n}` for one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector {
    pub ranks: Vec<u32>,
    pub tie_policy: TiePolicy,
}

impl RankVector {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// `rank_at_position[i - 1]` is the rank shared by the i-th order
    /// statistic. Without ties this is the identity.
    pub fn order_statistic_ranks(&self) -> Vec<u32> {
        let mut sorted = self.ranks.clone();
        sorted.sort_unstable();
        sorted
    }
}

/// Max-rank of every value: `#{l : values[l] <= values[k]}`, in O(n log n).
pub fn max_ranks(values: &[f64]) -> RankVector {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0u32; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        for &k in &order[start..end] {
            ranks[k] = end as u32;
        }
        start = end;
    }
    RankVector {
        ranks,
        tie_policy: TiePolicy::MaxRank,
    }
}

/// Empirical CDF `(1/n) #{k : sample_k <= x}`.
pub fn empirical_cdf_value(sample: &[f64], x: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(CopulaError::EmptySample);
    }
    let count = sample.iter().filter(|&&s| s <= x).count();
    Ok(count as f64 / sample.len() as f64)
}

/// Pseudo-observations `(G_n(x_k), H_n(y_k))` together with the integer
/// ranks they are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    pub us: Vec<f64>,
    pub vs: Vec<f64>,
    pub x_ranks: RankVector,
    pub y_ranks: RankVector,
}

impl PseudoObservations {
    pub fn n(&self) -> usize {
        self.us.len()
    }
}

pub fn pseudo_observations(s: &PairedSample) -> PseudoObservations {
    let n = s.n() as f64;
    let x_ranks = max_ranks(s.xs());
    let y_ranks = max_ranks(s.ys());
    PseudoObservations {
        us: x_ranks.ranks.iter().map(|&r| r as f64 / n).collect(),
        vs: y_ranks.ranks.iter().map(|&r| r as f64 / n).collect(),
        x_ranks,
        y_ranks,
    }
}

/// Selects a CSV column by header name or by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// A name that matches no header falls back to a 0-based index if it
    /// parses as one.
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ColumnSelector::Index(i) if *i < headers.len() => Ok(*i),
            ColumnSelector::Index(i) => Err(CopulaError::ColumnNotFound(i.to_string())),
            ColumnSelector::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < headers.len()))
                .ok_or_else(|| CopulaError::ColumnNotFound(name.clone())),
        }
    }
}

impl From<&str> for ColumnSelector {
    fn from(s: &str) -> Self {
        ColumnSelector::Name(s.to_string())
    }
}

impl From<usize> for ColumnSelector {
    fn from(i: usize) -> Self {
        ColumnSelector::Index(i)
    }
}

/// Raw numeric columns; `None` marks a missing or non-numeric cell.
#[derive(Debug, Clone)]
pub struct ColumnTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

/// A sample plus the number of rows that were dropped while building it.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub sample: PairedSample,
    pub dropped: usize,
}

impl ColumnTable {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Pairs columns `a` and `b`, dropping rows where either cell is missing.
    pub fn pair(&self, a: usize, b: usize) -> Result<LoadedSample> {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (x, y) in self.columns[a].iter().zip(&self.columns[b]) {
            if let (Some(x), Some(y)) = (x, y) {
                xs.push(*x);
                ys.push(*y);
            }
        }
        let dropped = self.rows() - xs.len();
        if xs.len() < 2 {
            return Err(CopulaError::TooFewRows(xs.len()));
        }
        Ok(LoadedSample {
            sample: PairedSample::new(xs, ys)?,
            dropped,
        })
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads the selected columns of a headed CSV file. An empty selector list
/// reads every column.
pub fn read_columns(path: &Path, selectors: &[ColumnSelector]) -> Result<ColumnTable> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CopulaError::FileNotFound(path.to_path_buf()),
        _ => CopulaError::Io(e),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let indices: Vec<usize> = if selectors.is_empty() {
        (0..headers.len()).collect()
    } else {
        selectors
            .iter()
            .map(|s| s.resolve(&headers))
            .collect::<Result<_>>()?
    };
    let mut columns = vec![Vec::new(); indices.len()];
    for record in reader.records() {
        let record = record?;
        for (col, &idx) in columns.iter_mut().zip(&indices) {
            col.push(record.get(idx).and_then(parse_cell));
        }
    }
    Ok(ColumnTable {
        names: indices.iter().map(|&i| headers[i].clone()).collect(),
        columns,
    })
}

/// Loads two columns from a CSV file as a [`PairedSample`].
///
/// Rows with a missing or non-numeric entry in either column are dropped and
/// counted in [`LoadedSample::dropped`].
pub fn load_csv(
    path: &Path,
    x_col: impl Into<ColumnSelector>,
    y_col: impl Into<ColumnSelector>,
) -> Result<LoadedSample> {
    let table = read_columns(path, &[x_col.into(), y_col.into()])?;
    table.pair(0, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_simple() {
        let f = write_csv("x,y\n1,2\n3,4\n");
        let loaded = load_csv(f.path(), "x", "y").unwrap();
        assert_eq!(loaded.sample.xs(), &[1.0, 3.0]);
        assert_eq!(loaded.sample.ys(), &[2.0, 4.0]);
        assert_eq!(loaded.dropped, 0);
    }

    #[test]
    fn load_single_row_is_too_few() {
        let f = write_csv("x,y\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), "x", "y"),
            Err(CopulaError::TooFewRows(1))
        ));
    }

    #[test]
    fn load_drops_missing() {
        let f = write_csv("x,y\n1,2\n,4\n5,6\n");
        let loaded = load_csv(f.path(), "x", "y").unwrap();
        assert_eq!(loaded.sample.n(), 2);
        assert_eq!(loaded.dropped, 1);
        assert_eq!(loaded.sample.xs(), &[1.0, 5.0]);
    }

    #[test]
    fn load_drops_non_numeric_and_non_finite() {
        let f = write_csv("a,b\n1,2\nfoo,4\n5,inf\n7,8\n");
        let loaded = load_csv(f.path(), 0usize, "b").unwrap();
        assert_eq!(loaded.dropped, 2);
        assert_eq!(loaded.sample.ys(), &[2.0, 8.0]);
    }

    #[test]
    fn load_by_index_string() {
        let f = write_csv("a,b\n1,2\n3,4\n");
        let loaded = load_csv(f.path(), "1", "0").unwrap();
        assert_eq!(loaded.sample.xs(), &[2.0, 4.0]);
    }

    #[test]
    fn load_errors() {
        let f = write_csv("x,y\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(f.path(), "x", "z"),
            Err(CopulaError::ColumnNotFound(c)) if c == "z"
        ));
        assert!(matches!(
            load_csv(Path::new("/nonexistent/file.csv"), "x", "y"),
            Err(CopulaError::FileNotFound(_))
        ));
    }

    #[test]
    fn ecdf_examples() {
        let s = [10.0, 2.0, 7.0];
        assert_eq!(empirical_cdf_value(&s, 7.0).unwrap(), 2.0 / 3.0);
        assert_eq!(empirical_cdf_value(&s, 1.0).unwrap(), 0.0);
        assert_eq!(empirical_cdf_value(&s, 100.0).unwrap(), 1.0);
        assert!(matches!(
            empirical_cdf_value(&[], 1.0),
            Err(CopulaError::EmptySample)
        ));
    }

    #[test]
    fn pseudo_examples() {
        let s = PairedSample::new(vec![10.0, 2.0, 7.0], vec![5.0, 6.0, 4.0]).unwrap();
        let po = pseudo_observations(&s);
        assert_eq!(po.us, vec![1.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(po.vs, vec![2.0 / 3.0, 1.0, 1.0 / 3.0]);

        let s = PairedSample::new(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let po = pseudo_observations(&s);
        assert_eq!(po.us, vec![0.5, 1.0]);
        assert_eq!(po.vs, vec![0.5, 1.0]);
    }

    #[test]
    fn ties_take_max_rank() {
        let r = max_ranks(&[3.0, 1.0, 3.0, 2.0, 3.0]);
        assert_eq!(r.ranks, vec![5, 1, 5, 2, 5]);
        assert_eq!(r.order_statistic_ranks(), vec![1, 2, 5, 5, 5]);
        // -0.0 and 0.0 compare equal under <=
        assert_eq!(max_ranks(&[0.0, -0.0]).ranks, vec![2, 2]);
    }

    #[test]
    fn pseudo_matches_ecdf_with_ties() {
        let s = PairedSample::new(vec![1.0, 1.0, 2.0, 0.5], vec![4.0, 3.0, 3.0, 3.0]).unwrap();
        let po = pseudo_observations(&s);
        for k in 0..4 {
            assert_eq!(po.us[k], empirical_cdf_value(s.xs(), s.xs()[k]).unwrap());
            assert_eq!(po.vs[k], empirical_cdf_value(s.ys(), s.ys()[k]).unwrap());
        }
    }

    #[test]
    fn sample_validation() {
        assert!(matches!(
            PairedSample::new(vec![1.0], vec![1.0]),
            Err(CopulaError::TooFewRows(1))
        ));
        assert!(matches!(
            PairedSample::new(vec![1.0, 2.0], vec![1.0]),
            Err(CopulaError::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            PairedSample::new(vec![1.0, f64::NAN], vec![1.0, 2.0]),
            Err(CopulaError::NonFinite(1))
        ));
    }
}
