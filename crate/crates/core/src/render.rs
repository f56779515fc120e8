//! Deterministic SVG output for scatter, pseudo-observation, parallel
//! coordinate and heatmap plots.
//!
//! Coordinates are written with three decimals, so identical inputs give
//! byte-identical documents.

use std::fmt::Write as _;

use crate::error::{CopulaError, Result};
use crate::heatmaps::{palette_map, ColorAssignment, HeatmapField, PaletteId, Rgb};
use crate::samples::{PairedSample, PseudoObservations};

const DEFAULT_FILL: Rgb = Rgb(77, 77, 77);
const AXIS_STROKE: &str = "#333333";
const LEGEND_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
    pub left: f64,
}

impl Margins {
    pub fn uniform(px: f64) -> Self {
        Self {
            top: px,
            right: px,
            bottom: px,
            left: px,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotConfig {
    pub width_px: u32,
    pub height_px: u32,
    pub point_radius_px: f64,
    pub margins_px: Margins,
    pub show_axes: bool,
    pub palette: PaletteId,
    pub title: Option<String>,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            width_px: 480,
            height_px: 480,
            point_radius_px: 2.5,
            margins_px: Margins::uniform(40.0),
            show_axes: true,
            palette: PaletteId::Auto,
            title: None,
        }
    }
}

impl PlotConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CopulaError::Config(msg));
        if self.width_px < 64 || self.height_px < 64 {
            return bad(format!(
                "plot size {}x{} is below the 64 px minimum",
                self.width_px, self.height_px
            ));
        }
        if !(self.point_radius_px > 0.0 && self.point_radius_px.is_finite()) {
            return bad(format!(
                "point radius {} must be positive",
                self.point_radius_px
            ));
        }
        let Margins {
            top,
            right,
            bottom,
            left,
        } = self.margins_px;
        if [top, right, bottom, left]
            .iter()
            .any(|m| !(*m >= 0.0 && m.is_finite()))
        {
            return bad("margins must be non-negative".into());
        }
        if left + right >= self.width_px as f64 || top + bottom >= self.height_px as f64 {
            return bad("margins leave no room for the plot".into());
        }
        Ok(())
    }

    fn plot_area(&self) -> Area {
        let m = self.margins_px;
        Area {
            x0: m.left,
            y0: m.top,
            w: self.width_px as f64 - m.left - m.right,
            h: self.height_px as f64 - m.top - m.bottom,
        }
    }
}

/// Pixel rectangle; y grows downward.
#[derive(Debug, Clone, Copy)]
struct Area {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Area {
    /// Maps unit coordinates (t, s) with s pointing up.
    fn at(&self, t: f64, s: f64) -> (f64, f64) {
        (self.x0 + t * self.w, self.y0 + (1.0 - s) * self.h)
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(cfg: &PlotConfig) -> Self {
        let (w, h) = (cfg.width_px, cfg.height_px);
        let mut body = String::new();
        body.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
        );
        let _ = writeln!(
            body,
            "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>"
        );
        if let Some(title) = &cfg.title {
            let _ = writeln!(
                body,
                "<text class=\"title\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
                num(w as f64 / 2.0),
                num((cfg.margins_px.top / 2.0).max(14.0)),
                escape(title)
            );
        }
        Self { body }
    }

    fn text(&mut self, class: &str, x: f64, y: f64, anchor: &str, label: &str) {
        let _ = writeln!(
            self.body,
            "<text class=\"{class}\" x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"11\">{}</text>",
            num(x),
            num(y),
            escape(label)
        );
    }

    fn path(&mut self, class: &str, points: &[(f64, f64)]) {
        let d: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(k, (x, y))| format!("{}{} {}", if k == 0 { 'M' } else { 'L' }, num(*x), num(*y)))
            .collect();
        let _ = writeln!(
            self.body,
            "<path class=\"{class}\" d=\"{}\" fill=\"none\" stroke=\"{AXIS_STROKE}\"/>",
            d.join(" ")
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn check_colors(colors: Option<&ColorAssignment>, n: usize) -> Result<()> {
    match colors {
        Some(c) if c.len() != n => Err(CopulaError::Config(format!(
            "{} colors supplied for {n} pairs",
            c.len()
        ))),
        _ => Ok(()),
    }
}

fn fill_of(colors: Option<&ColorAssignment>, k: usize) -> String {
    colors.map_or(DEFAULT_FILL, |c| c.colors[k]).hex()
}

/// Padded axis range; a constant column gets a unit-wide window.
fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn frame(svg: &mut Svg, area: Area, xr: (f64, f64), yr: (f64, f64)) {
    let (bl, tl, br) = (area.at(0.0, 0.0), area.at(0.0, 1.0), area.at(1.0, 0.0));
    svg.path("axis", &[tl, bl, br]);
    svg.text("tick", bl.0, bl.1 + 14.0, "middle", &label(xr.0));
    svg.text("tick", br.0, br.1 + 14.0, "middle", &label(xr.1));
    svg.text("tick", bl.0 - 4.0, bl.1, "end", &label(yr.0));
    svg.text("tick", tl.0 - 4.0, tl.1 + 4.0, "end", &label(yr.1));
}

fn points_plot(
    xs: &[f64],
    ys: &[f64],
    xr: (f64, f64),
    yr: (f64, f64),
    colors: Option<&ColorAssignment>,
    cfg: &PlotConfig,
) -> Result<String> {
    cfg.validate()?;
    check_colors(colors, xs.len())?;
    let area = cfg.plot_area();
    let mut svg = Svg::new(cfg);
    if cfg.show_axes {
        frame(&mut svg, area, xr, yr);
    }
    let r = num(cfg.point_radius_px);
    for (k, (x, y)) in xs.iter().zip(ys).enumerate() {
        let (px, py) = area.at((x - xr.0) / (xr.1 - xr.0), (y - yr.0) / (yr.1 - yr.0));
        let _ = writeln!(
            svg.body,
            "<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"{}\"/>",
            num(px),
            num(py),
            fill_of(colors, k)
        );
    }
    Ok(svg.finish())
}

/// Scatter plot in data coordinates, axes spanning the data with 5% padding.
pub fn render_scatter(
    s: &PairedSample,
    colors: Option<&ColorAssignment>,
    cfg: &PlotConfig,
) -> Result<String> {
    let (xr, yr) = (padded_range(s.xs()), padded_range(s.ys()));
    points_plot(s.xs(), s.ys(), xr, yr, colors, cfg)
}

/// Pseudo-observations on the unit square.
pub fn render_pseudo(
    po: &PseudoObservations,
    colors: Option<&ColorAssignment>,
    cfg: &PlotConfig,
) -> Result<String> {
    points_plot(&po.us, &po.vs, (0.0, 1.0), (0.0, 1.0), colors, cfg)
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

/// Two-axis parallel coordinates: one segment per pair from the x axis
/// (left) to the y axis (right).
pub fn render_parallel(
    s: &PairedSample,
    colors: Option<&ColorAssignment>,
    cfg: &PlotConfig,
) -> Result<String> {
    cfg.validate()?;
    check_colors(colors, s.n())?;
    let area = cfg.plot_area();
    let mut svg = Svg::new(cfg);
    if cfg.show_axes {
        for (t, name) in [(0.0, "x"), (1.0, "y")] {
            let (top, bottom) = (area.at(t, 1.0), area.at(t, 0.0));
            svg.path("axis", &[top, bottom]);
            svg.text("axis-label", bottom.0, bottom.1 + 14.0, "middle", name);
        }
    }
    let (xn, yn) = (min_max_normalize(s.xs()), min_max_normalize(s.ys()));
    for (k, (a, b)) in xn.iter().zip(&yn).enumerate() {
        let (x1, y1) = area.at(0.0, *a);
        let (x2, y2) = area.at(1.0, *b);
        let _ = writeln!(
            svg.body,
            "<line class=\"segment\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            fill_of(colors, k)
        );
    }
    Ok(svg.finish())
}

/// Heatmap of interior lattice cells, u to the right and v upward, with a
/// vertical legend bar on the right.
pub fn render_heatmap(field: &HeatmapField, cfg: &PlotConfig) -> Result<String> {
    cfg.validate()?;
    let area = cfg.plot_area();
    let legend_w = (0.12 * area.w).clamp(12.0, 60.0);
    let map = Area {
        w: area.w - 2.0 * legend_w,
        ..area
    };
    if map.w <= 0.0 {
        return Err(CopulaError::Config("plot too narrow for the legend".into()));
    }
    let mut svg = Svg::new(cfg);
    let cells = field.m - 1;
    let (cw, ch) = (map.w / cells as f64, map.h / cells as f64);
    let (cw_s, ch_s) = (num(cw), num(ch));
    for i in 1..=cells {
        for j in 1..=cells {
            let color = palette_map(field.value(i, j), field.kind, cfg.palette)?;
            let x = map.x0 + (i - 1) as f64 * cw;
            let y = map.y0 + (cells - j) as f64 * ch;
            let _ = writeln!(
                svg.body,
                "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{cw_s}\" height=\"{ch_s}\" fill=\"{}\"/>",
                num(x),
                num(y),
                color.hex()
            );
        }
    }
    if cfg.show_axes {
        frame(&mut svg, map, (0.0, 1.0), (0.0, 1.0));
    }

    let (lo, hi) = field.declared_range;
    let bar = Area {
        x0: map.x0 + map.w + 0.5 * legend_w,
        w: 0.5 * legend_w,
        ..area
    };
    svg.body.push_str("<g class=\"legend\">\n");
    let step_h = bar.h / LEGEND_STEPS as f64;
    for k in 0..LEGEND_STEPS {
        let t = (k as f64 + 0.5) / LEGEND_STEPS as f64;
        let color = palette_map(lo + t * (hi - lo), field.kind, cfg.palette)?;
        let (x, y) = bar.at(0.0, (k + 1) as f64 / LEGEND_STEPS as f64);
        let _ = writeln!(
            svg.body,
            "<rect class=\"legend-step\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            num(x),
            num(y),
            num(bar.w),
            num(step_h),
            color.hex()
        );
    }
    let mut ticks = vec![lo, hi];
    if lo < 0.0 && 0.0 < hi {
        ticks.insert(1, 0.0);
    }
    for v in ticks {
        let (x, y) = bar.at(1.0, (v - lo) / (hi - lo));
        svg.text("legend-label", x + 4.0, y + 4.0, "start", &label(v));
    }
    svg.body.push_str("</g>\n");
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::empirical_copula;
    use crate::heatmaps::{colorize_pairs, heatmap_normalized, heatmap_rho, heatmap_sigma};
    use crate::samples::pseudo_observations;

    fn sample(pairs: &[(f64, f64)]) -> PairedSample {
        PairedSample::from_pairs(pairs).unwrap()
    }

    fn line(n: usize, increasing: bool) -> PairedSample {
        let pairs: Vec<_> = (0..n)
            .map(|k| {
                let x = k as f64 * 0.37 - 2.0;
                (x, if increasing { 2.0 * x + 1.0 } else { 5.0 - x })
            })
            .collect();
        sample(&pairs)
    }

    fn parse(doc: &str) -> roxmltree::Document<'_> {
        let d = roxmltree::Document::parse(doc).expect("well-formed SVG");
        assert_eq!(d.root_element().tag_name().name(), "svg");
        d
    }

    fn elements<'a>(d: &'a roxmltree::Document<'a>, tag: &str) -> Vec<roxmltree::Node<'a, 'a>> {
        d.descendants().filter(|n| n.has_tag_name(tag)).collect()
    }

    fn with_class<'a>(d: &'a roxmltree::Document<'a>, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
        d.descendants()
            .filter(|n| n.attribute("class") == Some(class))
            .collect()
    }

    fn attr(n: &roxmltree::Node, name: &str) -> f64 {
        n.attribute(name).unwrap().parse().unwrap()
    }

    #[test]
    fn config_validation() {
        let cfg = PlotConfig {
            width_px: 63,
            ..PlotConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CopulaError::Config(_))));
        let cfg = PlotConfig {
            point_radius_px: 0.0,
            ..PlotConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PlotConfig {
            margins_px: Margins::uniform(40.0),
            width_px: 64,
            ..PlotConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(render_scatter(&line(3, true), None, &cfg).is_err());
    }

    #[test]
    fn two_point_scatter() {
        let s = sample(&[(1.0, 2.0), (3.0, 1.0)]);
        let doc = render_scatter(&s, None, &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        let circles = elements(&d, "circle");
        assert_eq!(circles.len(), 2);
        assert!(circles
            .iter()
            .all(|c| c.attribute("fill") == Some("#4d4d4d")));
        assert_eq!(
            doc,
            render_scatter(&s, None, &PlotConfig::default()).unwrap()
        );
    }

    #[test]
    fn scatter_axes_are_padded() {
        let s = sample(&[(0.0, 0.0), (10.0, 10.0)]);
        let doc = render_scatter(&s, None, &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        let ticks: Vec<_> = with_class(&d, "tick")
            .iter()
            .map(|n| n.text().unwrap().to_string())
            .collect();
        assert_eq!(ticks, ["-0.5", "10.5", "-0.5", "10.5"]);
    }

    #[test]
    fn pseudo_points_on_rank_grid() {
        let s = sample(&[(1.0, 5.0), (2.0, 4.0), (3.0, 6.0)]);
        let cfg = PlotConfig {
            margins_px: Margins::uniform(0.0),
            width_px: 300,
            height_px: 300,
            ..PlotConfig::default()
        };
        let doc = render_pseudo(&pseudo_observations(&s), None, &cfg).unwrap();
        let d = parse(&doc);
        let mut xs: Vec<f64> = elements(&d, "circle")
            .iter()
            .map(|c| attr(c, "cx"))
            .collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, [100.0, 200.0, 300.0]);
        let ticks: Vec<_> = with_class(&d, "tick")
            .iter()
            .map(|n| n.text().unwrap().to_string())
            .collect();
        assert_eq!(ticks, ["0", "1", "0", "1"]);
    }

    #[test]
    fn countermonotone_is_monochrome() {
        let s = line(40, false);
        let po = pseudo_observations(&s);
        let g = empirical_copula(&s).unwrap();
        let colors = colorize_pairs(&po, &heatmap_normalized(&g), PaletteId::Auto).unwrap();
        let cfg = PlotConfig::default();
        for doc in [
            render_scatter(&s, Some(&colors), &cfg).unwrap(),
            render_pseudo(&po, Some(&colors), &cfg).unwrap(),
        ] {
            let d = parse(&doc);
            let c = elements(&d, "circle");
            assert_eq!(c.len(), 40);
            assert!(c.iter().all(|n| n.attribute("fill") == Some("#053061")));
        }
        let doc = render_parallel(&s, Some(&colors), &cfg).unwrap();
        let d = parse(&doc);
        let segs = elements(&d, "line");
        assert_eq!(segs.len(), 40);
        assert!(segs
            .iter()
            .all(|n| n.attribute("stroke") == Some("#053061")));
    }

    fn segments(doc: &str) -> Vec<(f64, f64)> {
        let d = parse(doc);
        let segs = elements(&d, "line");
        segs.iter()
            .map(|n| (attr(n, "y1"), attr(n, "y2")))
            .collect()
    }

    #[test]
    fn parallel_crossings() {
        let cfg = PlotConfig::default();
        let co = segments(&render_parallel(&line(25, true), None, &cfg).unwrap());
        let counter = segments(&render_parallel(&line(25, false), None, &cfg).unwrap());
        for a in 0..25 {
            for b in 0..25 {
                if a == b {
                    continue;
                }
                let (p, q) = (co[a], co[b]);
                assert!(
                    (p.0 - q.0) * (p.1 - q.1) >= 0.0,
                    "comonotone segments cross"
                );
                let (p, q) = (counter[a], counter[b]);
                assert!(
                    (p.0 - q.0) * (p.1 - q.1) < 0.0,
                    "countermonotone segments miss"
                );
            }
        }
        let d_doc = render_parallel(&line(5, true), None, &cfg).unwrap();
        let d = parse(&d_doc);
        assert_eq!(elements(&d, "path").len(), 2);
    }

    #[test]
    fn heatmap_layout() {
        let s = sample(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0)]);
        let g = empirical_copula(&s).unwrap();
        let doc = render_heatmap(&heatmap_rho(&g), &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        assert_eq!(with_class(&d, "cell").len(), 4);
        let legend = with_class(&d, "legend");
        assert_eq!(legend.len(), 1);
        let labels: Vec<_> = with_class(&d, "legend-label")
            .iter()
            .map(|n| n.text().unwrap().to_string())
            .collect();
        assert_eq!(labels, ["-3", "0", "3"]);
        assert_eq!(
            doc,
            render_heatmap(&heatmap_rho(&g), &PlotConfig::default()).unwrap()
        );

        let doc = render_heatmap(&heatmap_sigma(&g), &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        let labels: Vec<_> = with_class(&d, "legend-label")
            .iter()
            .map(|n| n.text().unwrap().to_string())
            .collect();
        assert_eq!(labels, ["0", "3"]);
    }

    #[test]
    fn heatmap_orientation() {
        // cell (i=1, j=m−1) sits top-left, (m−1, 1) bottom-right
        let g = empirical_copula(&line(4, true)).unwrap();
        let f = heatmap_rho(&g);
        let doc = render_heatmap(&f, &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        let cells = with_class(&d, "cell");
        let first = &cells[0];
        let top_left = cells
            .iter()
            .map(|c| attr(c, "y"))
            .fold(f64::INFINITY, f64::min);
        assert!((attr(first, "y") - (top_left + 2.0 * attr(first, "height"))).abs() < 2e-3);
        assert_eq!(attr(&cells[2], "y"), top_left);
    }

    #[test]
    fn comonotone_normalized_is_uniform() {
        let g = empirical_copula(&line(30, true)).unwrap();
        let doc = render_heatmap(&heatmap_normalized(&g), &PlotConfig::default()).unwrap();
        let d = parse(&doc);
        let cells = with_class(&d, "cell");
        assert_eq!(cells.len(), 29 * 29);
        assert!(cells.iter().all(|c| c.attribute("fill") == Some("#67001f")));
    }

    #[test]
    fn titles_are_escaped() {
        let cfg = PlotConfig {
            title: Some("x < y & \"z\"".into()),
            ..PlotConfig::default()
        };
        let doc = render_scatter(&line(3, true), None, &cfg).unwrap();
        let d = parse(&doc);
        assert_eq!(with_class(&d, "title")[0].text(), Some("x < y & \"z\""));
    }

    #[test]
    fn color_count_must_match() {
        let s = line(4, true);
        let colors = ColorAssignment {
            colors: vec![Rgb::WHITE; 3],
            palette: PaletteId::Auto,
        };
        assert!(render_scatter(&s, Some(&colors), &PlotConfig::default()).is_err());
        assert!(render_parallel(&s, Some(&colors), &PlotConfig::default()).is_err());
    }
}
