//! Heatmap fields H_ρ, H_σ and the normalized field H built from Dₙ, plus
//! the palette used to turn field values into per-pair colors.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::copula::{CountLattice, EmpiricalCopulaGrid};
use crate::error::{CopulaError, Result};
use crate::samples::PseudoObservations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `12 [Cₙ − Π]`, in [−3, 3]
    Rho,
    /// `12 |Cₙ − Π|`, in [0, 3]
    Sigma,
    /// Dₙ: Cₙ − Π relative to the distance to the nearer bound, in [−1, 1]
    Normalized,
}

impl FieldKind {
    pub fn declared_range(self) -> (f64, f64) {
        match self {
            FieldKind::Rho => (-3.0, 3.0),
            FieldKind::Sigma => (0.0, 3.0),
            FieldKind::Normalized => (-1.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Rho => "rho",
            FieldKind::Sigma => "sigma",
            FieldKind::Normalized => "normalized",
        }
    }
}

impl FromStr for FieldKind {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(FieldKind::Rho),
            "sigma" => Ok(FieldKind::Sigma),
            "normalized" | "d" => Ok(FieldKind::Normalized),
            _ => Err(CopulaError::Domain(format!("unknown field kind '{s}'"))),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Field values on the interior cells `i, j ∈ {1, ..., m−1}` of an m-lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapField {
    pub kind: FieldKind,
    pub m: usize,
    /// Row-major, row index i (u direction), `(m−1)²` entries.
    pub values: Vec<f64>,
    pub declared_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSummary {
    pub kind: FieldKind,
    pub m: usize,
    pub range: [f64; 2],
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl HeatmapField {
    /// Value at interior cell `(i, j)`, `1 <= i, j <= m−1`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * (self.m - 1) + (j - 1)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn summary(&self) -> FieldSummary {
        let (lo, hi) = self.declared_range;
        FieldSummary {
            kind: self.kind,
            m: self.m,
            range: [lo, hi],
            min: self.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: self
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            mean: self.mean(),
        }
    }

    /// CSV matrix, one row per i.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.values.chunks(self.m - 1) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Applies the field formula to every interior cell of a count lattice.
///
/// With `num = m²·count − n·ij` (n·m² times Cₙ − Π) all three fields are a
/// ratio of two exact integers. Ties can push the raw value past the declared
/// range; such values are clamped.
fn field_from_lattice(kind: FieldKind, lat: &CountLattice) -> HeatmapField {
    let (n, m) = (lat.n as i128, lat.m as i128);
    let (lo, hi) = kind.declared_range();
    let mut values = Vec::with_capacity((lat.m - 1) * (lat.m - 1));
    for i in 1..m {
        for j in 1..m {
            let num = m * m * lat.count(i as usize, j as usize) as i128 - n * i * j;
            let v = match kind {
                FieldKind::Rho => (12 * num) as f64 / (n * m * m) as f64,
                FieldKind::Sigma => (12 * num.abs()) as f64 / (n * m * m) as f64,
                FieldKind::Normalized if num >= 0 => {
                    num as f64 / (n * (m * i.min(j) - i * j)) as f64
                }
                FieldKind::Normalized => num as f64 / (n * (i * j - m * (i + j - m).max(0))) as f64,
            };
            values.push(v.clamp(lo, hi));
        }
    }
    HeatmapField {
        kind,
        m: lat.m,
        values,
        declared_range: (lo, hi),
    }
}

/// Builds any of the three fields at full resolution m = n.
pub fn heatmap(g: &EmpiricalCopulaGrid, kind: FieldKind) -> HeatmapField {
    field_from_lattice(kind, g.lattice())
}

/// H_ρ: `12 [Cₙ(i/n, j/n) − ij/n²]`.
pub fn heatmap_rho(g: &EmpiricalCopulaGrid) -> HeatmapField {
    heatmap(g, FieldKind::Rho)
}

/// H_σ: `12 |Cₙ(i/n, j/n) − ij/n²|`.
pub fn heatmap_sigma(g: &EmpiricalCopulaGrid) -> HeatmapField {
    heatmap(g, FieldKind::Sigma)
}

/// H: Dₙ(i/n, j/n) on the interior cells, where both denominators
/// `M − Π` and `Π − W` are strictly positive.
pub fn heatmap_normalized(g: &EmpiricalCopulaGrid) -> HeatmapField {
    heatmap(g, FieldKind::Normalized)
}

/// A field on a coarser m-lattice, using the step-function completion
/// `Cₙ(a, b) = (1/n) #{k : û_k <= a, v̂_k <= b}` at `(i/m, j/m)`.
///
/// Runs in O(n + m²) and never allocates the n-lattice.
pub fn coarse_heatmap(po: &PseudoObservations, kind: FieldKind, m: usize) -> Result<HeatmapField> {
    let n = po.n();
    if m < 2 || m > n {
        return Err(CopulaError::Resolution { m, n });
    }
    Ok(field_from_lattice(kind, &CountLattice::step(po, m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PaletteId {
    /// RdBu for signed fields, Purples for H_σ.
    #[default]
    Auto,
    /// Blue – white – red.
    RdBu,
    /// White – purple.
    Purples,
}

impl FromStr for PaletteId {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(PaletteId::Auto),
            "rdbu" => Ok(PaletteId::RdBu),
            "purples" => Ok(PaletteId::Purples),
            _ => Err(CopulaError::Domain(format!("unknown palette '{s}'"))),
        }
    }
}

// blue end first; the centre stop is pure white so that 0 maps to white
const RDBU: [Rgb; 11] = [
    Rgb(5, 48, 97),
    Rgb(33, 102, 172),
    Rgb(67, 147, 195),
    Rgb(146, 197, 222),
    Rgb(209, 229, 240),
    Rgb(255, 255, 255),
    Rgb(253, 219, 199),
    Rgb(244, 165, 130),
    Rgb(214, 96, 77),
    Rgb(178, 24, 43),
    Rgb(103, 0, 31),
];

const PURPLES: [Rgb; 9] = [
    Rgb(255, 255, 255),
    Rgb(239, 237, 245),
    Rgb(218, 218, 235),
    Rgb(188, 189, 220),
    Rgb(158, 154, 200),
    Rgb(128, 125, 186),
    Rgb(106, 81, 163),
    Rgb(84, 39, 143),
    Rgb(63, 0, 125),
];

fn ramp(stops: &[Rgb], t: f64) -> Rgb {
    let pos = t.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let k = (pos.floor() as usize).min(stops.len() - 2);
    let f = pos - k as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (stops[k], stops[k + 1]);
    Rgb(mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn resolve_palette(kind: FieldKind, palette: PaletteId) -> &'static [Rgb] {
    match (palette, kind) {
        (PaletteId::RdBu, _) => &RDBU,
        (PaletteId::Purples, _) => &PURPLES,
        (PaletteId::Auto, FieldKind::Sigma) => &PURPLES,
        (PaletteId::Auto, _) => &RDBU,
    }
}

/// Maps a field value to a color by linear interpolation along the ramp,
/// with the declared range of `kind` stretched over the whole ramp.
pub fn palette_map(value: f64, kind: FieldKind, palette: PaletteId) -> Result<Rgb> {
    let (lo, hi) = kind.declared_range();
    if !(lo..=hi).contains(&value) {
        return Err(CopulaError::Range { value, lo, hi });
    }
    Ok(ramp(
        resolve_palette(kind, palette),
        (value - lo) / (hi - lo),
    ))
}

/// One color per observation pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColorAssignment {
    pub colors: Vec<Rgb>,
    pub palette: PaletteId,
}

impl ColorAssignment {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// Index of the lattice point `i/m` nearest to `rank/n`, ties to the
/// smaller index, clamped to the interior `1..=m−1`.
fn nearest_interior(rank: u32, n: usize, m: usize) -> usize {
    let num = rank as usize * m;
    let (floor, rem) = (num / n, num % n);
    let nearest = if 2 * rem > n { floor + 1 } else { floor };
    nearest.clamp(1, m - 1)
}

/// Colors each pair with the field value at the lattice point closest to its
/// pseudo-observation.
pub fn colorize_pairs(
    po: &PseudoObservations,
    field: &HeatmapField,
    palette: PaletteId,
) -> Result<ColorAssignment> {
    let n = po.n();
    let colors = po
        .x_ranks
        .ranks
        .iter()
        .zip(&po.y_ranks.ranks)
        .map(|(&r, &s)| {
            let i = nearest_interior(r, n, field.m);
            let j = nearest_interior(s, n, field.m);
            palette_map(field.value(i, j), field.kind, palette)
        })
        .collect::<Result<_>>()?;
    Ok(ColorAssignment { colors, palette })
}
