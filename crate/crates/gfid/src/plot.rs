//! Quick-look SVG charts. The CSV stays the authoritative output.
//!
//! Scenarios with a noise grid get median error against σ on log axes,
//! bandwidth sweeps get success rate against k, and single-cell ℓ1 runs get
//! histograms of the diag column split by outcome.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::output::{summarize, CellSummary};
use crate::runner::ResultRow;

type PlotResult<T> = Result<T, Box<dyn std::error::Error>>;

const SIZE: (u32, u32) = (800, 560);
/// Histograms drop `diag` values above this.
const HIST_MAX: f64 = 5.0;
const HIST_BINS: usize = 25;

fn color(i: usize) -> RGBColor {
    const P: [RGBColor; 8] = [
        RGBColor(31, 119, 180),
        RGBColor(255, 127, 14),
        RGBColor(44, 160, 44),
        RGBColor(214, 39, 40),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
        RGBColor(227, 119, 194),
        RGBColor(127, 127, 127),
    ];
    P[i % P.len()]
}

fn series_label(c: &CellSummary, with_k: bool) -> String {
    match (with_k, c.k) {
        (true, Some(k)) => format!("{} k={k}", c.setting),
        _ => c.setting.clone(),
    }
}

/// Writes the chart(s) for `rows` next to `csv_path` and returns their paths.
pub fn plot_rows(scenario: &str, rows: &[ResultRow], csv_path: &Path) -> PlotResult<Vec<PathBuf>> {
    let cells = summarize(rows);
    let stem = csv_path.with_extension("");
    let n_sigma = {
        let mut s: Vec<u64> = cells.iter().map(|c| c.sigma.to_bits()).collect();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    let n_k = {
        let mut k: Vec<Option<usize>> = cells.iter().map(|c| c.k).collect();
        k.sort_unstable();
        k.dedup();
        k.len()
    };
    if n_sigma > 1 {
        let path = stem.with_extension("svg");
        error_vs_sigma(scenario, &cells, n_k > 1, &path)?;
        Ok(vec![path])
    } else if n_k > 1 {
        let path = stem.with_extension("svg");
        rate_vs_k(scenario, &cells, &path)?;
        Ok(vec![path])
    } else {
        let mut paths = Vec::new();
        let mut labels: Vec<&str> = rows.iter().map(|r| r.setting.as_str()).collect();
        labels.dedup();
        for (i, label) in labels.iter().enumerate() {
            let path = PathBuf::from(format!("{}_{i}.svg", stem.display()));
            let subset: Vec<&ResultRow> = rows.iter().filter(|r| r.setting == *label).collect();
            diag_histogram(&format!("{scenario}: {label}"), &subset, &path)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

fn error_vs_sigma(title: &str, cells: &[CellSummary], with_k: bool, path: &Path) -> PlotResult<()> {
    let finite: Vec<&CellSummary> =
        cells.iter().filter(|c| c.median_error.is_finite() && c.median_error > 0.0 && c.sigma > 0.0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = finite.iter().map(|c| (c.sigma, c.median_error)).unzip();
    let bounds = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        if lo.is_finite() && hi > 0.0 {
            (lo / 2.0, hi * 2.0)
        } else {
            (1e-6, 1.0)
        }
    };
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())?;
    chart.configure_mesh().x_desc("sigma").y_desc("median error").draw()?;

    let mut labels: Vec<String> = finite.iter().map(|c| series_label(c, with_k)).collect();
    labels.dedup();
    for (i, label) in labels.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> =
            finite.iter().filter(|c| &series_label(c, with_k) == label).map(|c| (c.sigma, c.median_error)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let col = color(i);
        chart
            .draw_series(LineSeries::new(pts.clone(), col.stroke_width(2)).point_size(3))?
            .label(label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], col.stroke_width(2)));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}

fn rate_vs_k(title: &str, cells: &[CellSummary], path: &Path) -> PlotResult<()> {
    let k_max = cells.iter().filter_map(|c| c.k).max().unwrap_or(1) as f64;
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..k_max + 1.0, 0.0..1.05)?;
    chart.configure_mesh().x_desc("|Omega_1|").y_desc("recovery rate").draw()?;
    let mut labels: Vec<&str> = cells.iter().map(|c| c.setting.as_str()).collect();
    labels.dedup();
    for (i, label) in labels.iter().enumerate() {
        let pts: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.setting == *label)
            .filter_map(|c| c.k.map(|k| (k as f64, c.success_rate)))
            .collect();
        let col = color(i);
        chart
            .draw_series(LineSeries::new(pts, col.stroke_width(2)).point_size(3))?
            .label(label.to_string())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], col.stroke_width(2)));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}

fn diag_histogram(title: &str, rows: &[&ResultRow], path: &Path) -> PlotResult<()> {
    let width = HIST_MAX / HIST_BINS as f64;
    let mut counts = [[0u32; HIST_BINS]; 2];
    for r in rows {
        if let Some(v) = r.diag_value().filter(|v| (0.0..HIST_MAX).contains(v)) {
            counts[usize::from(!r.success)][((v / width) as usize).min(HIST_BINS - 1)] += 1;
        }
    }
    let top = counts.iter().flatten().copied().max().unwrap_or(1).max(1);

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..HIST_MAX, 0u32..top + top / 10 + 1)?;
    chart.configure_mesh().x_desc("diag").y_desc("count").draw()?;
    for (series, name) in [(0, "success"), (1, "failure")] {
        let col = color(series);
        let half = width / 2.0;
        let bars = (0..HIST_BINS).map(|b| {
            let x = b as f64 * width + half * series as f64;
            Rectangle::new([(x, 0), (x + half, counts[series][b])], col.mix(0.8).filled())
        });
        chart
            .draw_series(bars)?
            .label(name)
            .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 12, y + 5)], col.filled()));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}
