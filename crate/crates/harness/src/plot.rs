//! SVG rendering of 2-d particle trajectories over a heat map of the
//! objective.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sbs_core::benchmarks::make_benchmark;

use crate::error::{HarnessError, Result};
use crate::trajectory::TrajectoryLog;

/// Cells per axis of the background grid.
pub const HEAT_GRID: usize = 100;
const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

const LOW: [f64; 3] = [58.0, 76.0, 192.0];
const MID: [f64; 3] = [221.0, 221.0, 221.0];
const HIGH: [f64; 3] = [179.0, 3.0, 38.0];

/// Diverging blue-grey-red colour for `t` in `[0, 1]`.
fn colour(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 1.0 };
    let (a, b, u) = if t < 0.5 { (LOW, MID, 2.0 * t) } else { (MID, HIGH, 2.0 * t - 1.0) };
    let c: Vec<u8> = (0..3).map(|i| (a[i] + u * (b[i] - a[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Particle paths keyed by id, in snapshot order.
pub fn paths(log: &TrajectoryLog) -> BTreeMap<usize, Vec<[f64; 2]>> {
    let mut out: BTreeMap<usize, Vec<[f64; 2]>> = BTreeMap::new();
    for s in &log.snapshots {
        for (id, x) in s.ids.iter().zip(&s.positions) {
            out.entry(*id).or_default().push([x[0], x[1]]);
        }
    }
    out
}

pub fn render_svg(log: &TrajectoryLog) -> Result<String> {
    if log.header.dim != 2 {
        return Err(HarnessError::NotTwoDimensional { dim: log.header.dim });
    }
    if log.snapshots.is_empty() {
        return Err(HarnessError::BadLog("has no snapshots".into()));
    }
    let obj = make_benchmark(&log.header.function, 2)?;
    let (lo, hi) = (obj.domain().lower(), obj.domain().upper());
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - lo[0]) / (hi[0] - lo[0]) * plot;
    let sy = |y: f64| MARGIN + (hi[1] - y) / (hi[1] - lo[1]) * plot;

    let cell = plot / HEAT_GRID as f64;
    let centre = |i: usize, axis: usize| lo[axis] + (i as f64 + 0.5) / HEAT_GRID as f64 * (hi[axis] - lo[axis]);
    let mut grid = Vec::with_capacity(HEAT_GRID * HEAT_GRID);
    for row in 0..HEAT_GRID {
        for col in 0..HEAT_GRID {
            grid.push(obj.value(&[centre(col, 0), centre(HEAT_GRID - 1 - row, 1)]));
        }
    }
    let finite = grid.iter().copied().filter(|v| v.is_finite());
    let f_min = finite.clone().fold(f64::INFINITY, f64::min);
    let f_max = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if f_max > f_min { f_max - f_min } else { 1.0 };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(
        svg,
        "<title>{} {}-d, {} (seed {})</title>",
        log.header.function, log.header.dim, log.header.method, log.header.seed
    )
    .unwrap();
    writeln!(svg, r#"<g id="heat" shape-rendering="crispEdges">"#).unwrap();
    for (k, v) in grid.iter().enumerate() {
        let (row, col) = (k / HEAT_GRID, k % HEAT_GRID);
        writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            MARGIN + col as f64 * cell,
            MARGIN + row as f64 * cell,
            cell + 0.05,
            cell + 0.05,
            colour((v - f_min) / span)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g id="paths" fill="none" stroke="black" stroke-width="0.8" stroke-opacity="0.7">"#).unwrap();
    let all = paths(log);
    for (id, pts) in &all {
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
        writeln!(svg, r#"<polyline data-id="{id}" points="{}"/>"#, coords.join(" ")).unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g id="final" fill="black">"#).unwrap();
    let last = log.snapshots.last().expect("checked non-empty");
    for x in &last.positions {
        writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(x[0]), sy(x[1])).unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

pub fn plot_trajectories(log: &TrajectoryLog, out: &Path) -> Result<()> {
    let svg = render_svg(log)?;
    std::fs::write(out, svg).map_err(|e| HarnessError::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::LogHeader;
    use sbs_core::optimizers::Snapshot;

    fn log(dim: usize, snapshots: Vec<Snapshot>) -> TrajectoryLog {
        TrajectoryLog {
            header: LogHeader {
                function: if dim == 2 { "Ackley".into() } else { "Sphere".into() },
                dim,
                method: "sbs".into(),
                seed: 0,
                kappa: 1000.0,
            },
            snapshots,
        }
    }

    fn snap(iteration: usize, ids: Vec<usize>, positions: Vec<Vec<f64>>) -> Snapshot {
        let values = vec![0.0; ids.len()];
        Snapshot {
            iteration,
            sigma: 1e-4,
            ids,
            positions,
            values,
        }
    }

    #[test]
    fn one_particle_two_snapshots() {
        let l = log(2, vec![snap(0, vec![0], vec![vec![1.0, 2.0]]), snap(5, vec![0], vec![vec![0.0, 0.0]])]);
        let svg = render_svg(&l).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.split("points=\"").nth(1).unwrap().split_whitespace().count(), 2);
        assert_eq!(svg.matches("<rect").count(), HEAT_GRID * HEAT_GRID);
    }

    #[test]
    fn filtered_particles_end_early() {
        let l = log(
            2,
            vec![
                snap(0, vec![0, 1, 2], vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]),
                snap(10, vec![0, 2], vec![vec![0.5, 0.5], vec![2.5, 2.5]]),
                snap(20, vec![0], vec![vec![0.1, 0.1]]),
            ],
        );
        let p = paths(&l);
        assert_eq!(p.len(), 3);
        assert_eq!((p[&0].len(), p[&1].len(), p[&2].len()), (3, 1, 2));
        assert_eq!(render_svg(&l).unwrap().matches("<polyline").count(), 3);
    }

    #[test]
    fn rejects_other_dimensions() {
        let l = log(3, vec![snap(0, vec![0], vec![vec![0.0; 3]])]);
        assert!(matches!(render_svg(&l), Err(HarnessError::NotTwoDimensional { dim: 3 })));
    }

    #[test]
    fn colour_ends() {
        assert_eq!(colour(0.0), "#3a4cc0");
        assert_eq!(colour(1.0), "#b30326");
        assert_eq!(colour(f64::NAN), "#b30326");
    }
}
