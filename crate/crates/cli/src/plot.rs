use std::path::Path;

use anyhow::{anyhow, Result};
use delaywave_core::{SpaceTimeField, WaveProfile};
use plotters::prelude::*;

const COLORS: [RGBColor; 4] = [BLUE, RED, GREEN, MAGENTA];
const MAX_POINTS: usize = 2000;

fn plot_err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plot: {e}")
}

pub fn profile_svg(path: &Path, profile: &WaveProfile, title: &str) -> Result<()> {
    let g = profile.grid;
    let stride = (g.len / MAX_POINTS).max(1);
    let ymax = profile.max_values().iter().copied().fold(0.0f64, f64::max) * 1.1;
    let root = SVGBackend::new(path, (900, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(g.xi_min..g.xi_max(), 0.0..ymax.max(1e-12))
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("xi").y_desc("psi").draw().map_err(plot_err)?;
    for i in 0..profile.n() {
        let color = COLORS[i % COLORS.len()];
        let pts = (0..g.len).step_by(stride).map(|k| (g.xi(k), profile.values[i][k]));
        chart
            .draw_series(LineSeries::new(pts, color))
            .map_err(plot_err)?
            .label(format!("psi_{}", i + 1))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart.configure_series_labels().border_style(BLACK).background_style(WHITE).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Space-time heatmap of one species, time upward.
pub fn heatmap_svg(path: &Path, field: &SpaceTimeField, species: usize) -> Result<()> {
    let g = field.grid;
    let cols = 200.min(g.len);
    let t_end = field.last().t.max(f64::MIN_POSITIVE);
    let vmax = field
        .snapshots
        .iter()
        .flat_map(|s| s.values[species].iter().copied())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("u_{}(x, t)", species + 1), ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(g.xi_min..g.xi_max(), 0.0..t_end)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("x").y_desc("t").draw().map_err(plot_err)?;
    let dx = (g.xi_max() - g.xi_min) / cols as f64;
    for w in field.snapshots.windows(2) {
        let (t0, t1) = (w[0].t, w[1].t);
        let cells = (0..cols).map(|c| {
            let x0 = g.xi_min + c as f64 * dx;
            let k = g.index_at_or_after(x0 + 0.5 * dx);
            let v = (w[1].values[species][k] / vmax).clamp(0.0, 1.0);
            let color = HSLColor(0.66 * (1.0 - v), 0.9, 0.5);
            Rectangle::new([(x0, t0), (x0 + dx, t1)], color.filled())
        });
        chart.draw_series(cells).map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}
