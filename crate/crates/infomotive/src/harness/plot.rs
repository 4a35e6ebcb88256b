//! Static learning-curve charts: ERF and IRF versus batch for one gamma,
//! rendered to SVG.

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::harness::{GammaBatchStats, SweepSummary};

const WIDTH: u32 = 900;
const HEIGHT: u32 = 600;

/// Renders the two learning-curve panels of one gamma branch: mean ERF
/// (with a mean +/- std band unless `mean_only`) on top, mean IRF below.
pub fn render_gamma_plot(summary: &SweepSummary, gamma: f64, mean_only: bool) -> Result<String> {
    let rows: Vec<&GammaBatchStats> =
        summary.rows.iter().filter(|r| r.gamma == gamma).collect();
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (WIDTH, HEIGHT)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let (top, bottom) = root.split_vertically(HEIGHT / 2);

        draw_panel(
            &top,
            &format!("ERF, gamma = {gamma}"),
            &rows,
            |r| (r.erf_mean, r.erf_std),
            mean_only,
            &BLUE,
        )?;
        draw_panel(
            &bottom,
            &format!("IRF, gamma = {gamma}"),
            &rows,
            |r| (r.irf_mean, r.irf_std),
            mean_only,
            &RED,
        )?;
        root.present().map_err(|e| Error::Parse(format!("svg: {e}")))?;
    }
    Ok(svg)
}

fn draw_panel<DB: DrawingBackend>(
    area: &DrawingArea<DB, plotters::coord::Shift>,
    title: &str,
    rows: &[&GammaBatchStats],
    value: impl Fn(&GammaBatchStats) -> (f64, f64),
    mean_only: bool,
    color: &RGBColor,
) -> Result<()> {
    let max_batch = rows.iter().map(|r| r.batch).max().unwrap_or(1).max(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in rows {
        let (mean, std) = value(r);
        let spread = if mean_only { 0.0 } else { std };
        lo = lo.min(mean - spread);
        hi = hi.max(mean + spread);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.05;

    let mut chart = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(28)
        .y_label_area_size(48)
        .build_cartesian_2d(0f64..max_batch as f64, (lo - pad)..(hi + pad))
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("batch")
        .max_light_lines(2)
        .draw()
        .map_err(draw_err)?;

    if !mean_only {
        let band = color.mix(0.35);
        for sign in [-1.0, 1.0] {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| {
                    let (m, s) = value(r);
                    (r.batch as f64, m + sign * s)
                })
                .collect();
            chart
                .draw_series(LineSeries::new(pts, band.stroke_width(1)))
                .map_err(draw_err)?;
        }
    }
    let mean_points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let (m, _) = value(r);
            (r.batch as f64, m)
        })
        .collect();
    chart
        .draw_series(LineSeries::new(mean_points, color.stroke_width(2)))
        .map_err(draw_err)?;
    Ok(())
}

fn draw_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Parse(format!("chart rendering: {e}"))
}
