//! Minimal hand-rolled SVG figures.
//!
//! These are deliberately dependency-free static images: trajectories
//! as per-coordinate lines, heatmaps as colored grids, boundary curves
//! as polylines, histograms as per-community median bars. Layout is
//! fixed-size; the point is a quick visual check, not publication
//! output.

use netq::dynamics::Trajectory;
use netq::experiments::{BoundaryResult, HeatmapResult, HistogramResult};
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"20\">{title}</text>\n"
    );
}

fn axis_box(out: &mut String) {
    let _ = write!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
}

fn plot_x(fraction: f64) -> f64 {
    MARGIN + fraction * (WIDTH - 2.0 * MARGIN)
}

fn plot_y(fraction: f64) -> f64 {
    // SVG y grows downward.
    HEIGHT - MARGIN - fraction * (HEIGHT - 2.0 * MARGIN)
}

/// Every strategy coordinate against time, one line per
/// (agent, action).
pub fn trajectory_svg(traj: &Trajectory) -> String {
    let mut out = String::new();
    header(&mut out, "strategy trajectory");
    axis_box(&mut out);
    let states = traj.states();
    let steps = states.len().max(2);
    let counts = traj.initial().action_counts();
    let mut series = 0usize;
    for (agent, &actions) in counts.iter().enumerate() {
        for action in 0..actions {
            let mut points = String::new();
            for (t, s) in states.iter().enumerate() {
                let x = plot_x(t as f64 / (steps - 1) as f64);
                let y = plot_y(s.part(agent)[action].clamp(0.0, 1.0));
                let _ = write!(points, "{x:.1},{y:.1} ");
            }
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n",
                points.trim_end(),
                PALETTE[series % PALETTE.len()]
            );
            series += 1;
        }
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">step</text>\n<text x=\"8\" y=\"{}\">x</text>\n</svg>\n",
        WIDTH / 2.0 - 16.0,
        HEIGHT - 12.0,
        HEIGHT / 2.0
    );
    out
}

fn heat_color(proportion: f64) -> String {
    // White (all converge) through orange to dark red (all diverge).
    let p = proportion.clamp(0.0, 1.0);
    let r = 255.0 - 75.0 * p;
    let g = 255.0 * (1.0 - 0.85 * p);
    let b = 255.0 * (1.0 - p);
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Divergence-proportion grids, one horizontal band per agent count.
pub fn heatmap_svg(result: &HeatmapResult) -> String {
    let mut n_values: Vec<usize> = result.cells.iter().map(|c| c.n).collect();
    n_values.sort_unstable();
    n_values.dedup();
    let mut out = String::new();
    header(&mut out, "divergence proportion by (T, p)");
    let band_height = (HEIGHT - 2.0 * MARGIN) / n_values.len() as f64;
    for (band, &n) in n_values.iter().enumerate() {
        let cells: Vec<_> = result.cells.iter().filter(|c| c.n == n).collect();
        let mut ts: Vec<f64> = cells.iter().map(|c| c.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut rows: Vec<(f64, Option<f64>)> = cells.iter().map(|c| (c.p, c.q)).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.unwrap_or(0.0).total_cmp(&b.1.unwrap_or(0.0))));
        rows.dedup();
        let cell_w = (WIDTH - 2.0 * MARGIN) / ts.len() as f64;
        let cell_h = (band_height - 18.0) / rows.len() as f64;
        let top = MARGIN + band as f64 * band_height;
        let _ = write!(out, "<text x=\"{MARGIN}\" y=\"{}\">N={n}</text>\n", top + 12.0);
        for cell in &cells {
            let col = ts.iter().position(|&t| t == cell.t).unwrap();
            let row = rows
                .iter()
                .position(|&(p, q)| p == cell.p && q == cell.q)
                .unwrap();
            let _ = write!(
                out,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\" \
                 stroke=\"#ccc\" stroke-width=\"0.5\"/>\n",
                MARGIN + col as f64 * cell_w,
                top + 16.0 + row as f64 * cell_h,
                cell_w,
                cell_h,
                heat_color(cell.proportion)
            );
        }
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">T (low to high); rows: p</text>\n</svg>\n",
        WIDTH / 2.0 - 90.0,
        HEIGHT - 12.0
    );
    out
}

/// Minimal convergence temperature against edge probability, one curve
/// per agent count.
pub fn boundary_svg(result: &BoundaryResult) -> String {
    let mut out = String::new();
    header(&mut out, "convergence boundary min T(p)");
    axis_box(&mut out);
    let mut n_values: Vec<usize> = result.points.iter().map(|p| p.n).collect();
    n_values.sort_unstable();
    n_values.dedup();
    let p_max = result.points.iter().map(|p| p.p).fold(0.0f64, f64::max).max(1e-9);
    let t_max = result
        .points
        .iter()
        .filter_map(|p| p.min_t)
        .fold(0.0f64, f64::max)
        .max(1e-9);
    for (i, &n) in n_values.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = result
            .points
            .iter()
            .filter(|pt| pt.n == n)
            .filter_map(|pt| pt.min_t.map(|t| (pt.p, t)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut line = String::new();
        for (p, t) in &pts {
            let x = plot_x(p / p_max);
            let y = plot_y(t / t_max);
            let _ = write!(line, "{x:.1},{y:.1} ");
            let _ = write!(
                out,
                "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3\" fill=\"{color}\"/>\n"
            );
        }
        let _ = write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"{color}\">N={n}</text>\n",
            line.trim_end(),
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * (i + 1) as f64
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">p (max {p_max})</text>\n\
         <text x=\"8\" y=\"{}\">T (max {t_max})</text>\n</svg>\n",
        WIDTH / 2.0 - 30.0,
        HEIGHT - 12.0,
        HEIGHT / 2.0
    );
    out
}

/// Median tail variation per community.
pub fn histogram_svg(result: &HistogramResult) -> String {
    let mut out = String::new();
    header(&mut out, "median strategy variation per community");
    axis_box(&mut out);
    let mut communities: Vec<usize> = result.rows.iter().map(|r| r.community).collect();
    communities.sort_unstable();
    communities.dedup();
    let count = communities.len().max(1);
    let slot = (WIDTH - 2.0 * MARGIN) / count as f64;
    for (i, &c) in communities.iter().enumerate() {
        let median = result.median_for_community(c).unwrap_or(0.0);
        let p_within = result
            .rows
            .iter()
            .find(|r| r.community == c)
            .map(|r| r.p_within)
            .unwrap_or(f64::NAN);
        let x = MARGIN + i as f64 * slot + 0.15 * slot;
        let y = plot_y(median.clamp(0.0, 1.0));
        let _ = write!(
            out,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\"/>\n\
             <text x=\"{x:.1}\" y=\"{}\">p={p_within}</text>\n",
            0.7 * slot,
            (HEIGHT - MARGIN) - y,
            PALETTE[i % PALETTE.len()],
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = write!(out, "<text x=\"8\" y=\"{}\">med</text>\n</svg>\n", HEIGHT / 2.0);
    out
}
