//! CSV and SVG emission.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use super::experiment::{normalize, ExperimentReport};
use super::scenario::Scenario;
use crate::planner::Trajectory;

pub const CSV_HEADER: &str = "algorithm,seed,iteration,elapsed_s,best_cost,normalized_cost";

/// One row per incumbent event of every run, in report order.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for rep in reports {
        for run in &rep.runs {
            for e in &run.trace.events {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    rep.algorithm,
                    run.seed_label(),
                    e.iteration,
                    e.elapsed_s,
                    e.best_cost,
                    normalize(e.best_cost, run.lower_bound)
                )?;
            }
        }
    }
    Ok(())
}

pub fn emit_csv(reports: &[ExperimentReport], path: impl AsRef<Path>) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_csv(reports, &mut w)?;
    w.flush()
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Draws the workspace bounds, obstacles, and each robot's path with start
/// (circle) and goal (square) markers. Coordinates are written in world
/// units; a group transform flips the y axis.
pub fn render_svg(scenario: &Scenario, trajectory: Option<&Trajectory>) -> String {
    let b = scenario.environment.bounds;
    let scale = 600.0 / b.width().max(b.height());
    let (w, h) = (b.width() * scale, b.height() * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<g transform="matrix({scale} 0 0 {neg} {tx} {ty})" stroke-linejoin="round">"#,
        neg = -scale,
        tx = -b.min.x * scale,
        ty = b.max.y * scale
    );
    let _ = writeln!(
        s,
        r##"<rect class="bounds" x="{}" y="{}" width="{}" height="{}" fill="#ffffff" stroke="#000000" stroke-width="{}"/>"##,
        b.min.x,
        b.min.y,
        b.width(),
        b.height(),
        2.0 / scale
    );
    for poly in &scenario.environment.obstacles {
        let pts: Vec<String> = poly.vertices.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(s, r##"<polygon class="obstacle" points="{}" fill="#808080"/>"##, pts.join(" "));
    }
    for (i, spec) in scenario.robots.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(tr) = trajectory {
            let pts: Vec<String> = tr.robot_path(i).iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(
                s,
                r#"<polyline class="path" data-robot="{i}" points="{}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
                pts.join(" "),
                3.0 / scale
            );
        }
        let _ = writeln!(
            s,
            r#"<circle class="start" data-robot="{i}" cx="{}" cy="{}" r="{}" fill="{color}"/>"#,
            spec.start.x, spec.start.y, spec.radius
        );
        let _ = writeln!(
            s,
            r#"<rect class="goal" data-robot="{i}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            spec.goal.x - spec.radius,
            spec.goal.y - spec.radius,
            2.0 * spec.radius,
            2.0 * spec.radius,
            2.0 / scale
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn emit_svg(scenario: &Scenario, trajectory: Option<&Trajectory>, path: impl AsRef<Path>) -> io::Result<()> {
    std::fs::write(path, render_svg(scenario, trajectory))
}
