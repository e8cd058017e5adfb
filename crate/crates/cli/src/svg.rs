//! Scatter plots of category-space coordinates.

use std::fmt::Write as _;

use catspace::linalg::Matrix;

use crate::error::{CliError, CliResult};

pub const WIDTH: f64 = 480.0;
pub const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 0.05;
const RADIUS: f64 = 3.0;

/// Marker colours by class index, cycled past ten classes.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Data window, always containing the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Viewport {
    /// Extent of the points and the origin, widened by 5% of the span on
    /// each side. A zero span becomes `[-1, 1]` around its value.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(0.0f64, f64::min);
            let hi = v.iter().copied().fold(0.0f64, f64::max);
            let span = hi - lo;
            if span > 0.0 {
                (lo - MARGIN * span, hi + MARGIN * span)
            } else {
                (lo - 1.0, hi + 1.0)
            }
        };
        let (x_min, x_max) = range(xs);
        let (y_min, y_max) = range(ys);
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn px(&self, x: f64) -> f64 {
        (x - self.x_min) / (self.x_max - self.x_min) * WIDTH
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - (y - self.y_min) / (self.y_max - self.y_min) * HEIGHT
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders columns `axes.0` and `axes.1` of `coords` as an SVG document.
/// The two category axes are drawn as rays from the origin, labelled with
/// `names` when given.
pub fn scatter_svg(
    coords: &Matrix,
    labels: &[usize],
    axes: (usize, usize),
    names: &[String],
) -> CliResult<String> {
    let (i, j) = axes;
    if coords.rows() == 0 {
        return Err(CliError::Data("nothing to plot".into()));
    }
    if labels.len() != coords.rows() {
        return Err(CliError::Data(format!(
            "{} labels for {} points",
            labels.len(),
            coords.rows()
        )));
    }
    if i >= coords.cols() || j >= coords.cols() || i == j {
        return Err(CliError::Usage(format!(
            "invalid axes ({i}, {j}) for {} components",
            coords.cols()
        )));
    }
    let xs = coords.column(i);
    let ys = coords.column(j);
    let vp = Viewport::fit(&xs, &ys);
    let name = |k: usize| {
        names
            .get(k)
            .map_or_else(|| format!("y{}", k + 1), |n| escape(n))
    };
    let (ox, oy) = (vp.px(0.0), vp.py(0.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{ox:.2}" y1="{oy:.2}" x2="{WIDTH:.2}" y2="{oy:.2}"/><line x1="{ox:.2}" y1="{oy:.2}" x2="{ox:.2}" y2="0.00"/></g>"#
    );
    let _ = writeln!(
        s,
        r#"<g font-family="sans-serif" font-size="12"><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text><text x="{:.2}" y="12.00">{}</text></g>"#,
        WIDTH - 4.0,
        oy - 4.0,
        name(i),
        ox + 4.0,
        name(j)
    );
    s.push_str("<g stroke=\"none\">\n");
    for (r, &l) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{RADIUS}" fill="{}"/>"#,
            vp.px(xs[r]),
            vp.py(ys[r]),
            PALETTE[l % PALETTE.len()]
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Every pair of components `(i, j)` with `i < j`: one panel for two classes,
/// three for three.
pub fn panel_axes(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect()
}
