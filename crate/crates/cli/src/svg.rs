//! Static SVG plot of a planar scenario and its planned paths.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use seqpar_core::{Error, Point, Result, Scenario, Segment, TrajectoryBundle};

const WIDTH: f64 = 800.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// World-to-screen map: uniform scale, y axis flipped.
struct View {
    min: [f64; 2],
    max_y: f64,
    scale: f64,
}

impl View {
    fn fit(points: &[[f64; 2]]) -> (View, f64) {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-9);
        let scale = (WIDTH - 2.0 * PAD) / span;
        let height = (max[1] - min[1]) * scale + 2.0 * PAD;
        (
            View {
                min,
                max_y: max[1],
                scale,
            },
            height,
        )
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        (
            PAD + (p[0] - self.min[0]) * self.scale,
            PAD + (self.max_y - p[1]) * self.scale,
        )
    }
}

fn extent(seg: &Segment, out: &mut Vec<[f64; 2]>) {
    match seg {
        Segment::Line { start, end } => {
            out.push([start[0], start[1]]);
            out.push([end[0], end[1]]);
        }
        Segment::Arc(a) => {
            let c = &a.center;
            out.push([c[0] - a.radius, c[1] - a.radius]);
            out.push([c[0] + a.radius, c[1] + a.radius]);
        }
    }
}

fn path_data(view: &View, pieces: &[seqpar_core::geometry::Piece]) -> String {
    let mut d = String::new();
    let (x, y) = view.map(&pieces[0].segment.start());
    write!(d, "M {x:.3} {y:.3}").unwrap();
    for piece in pieces {
        match &piece.segment {
            Segment::Line { start, end } => {
                if start != end {
                    let (x, y) = view.map(end);
                    write!(d, " L {x:.3} {y:.3}").unwrap();
                }
            }
            Segment::Arc(a) => {
                let sweep_angle = a.angle_to - a.angle_from;
                // orientation of the (u, v) frame in the plane
                let frame = a.u.coords()[0] * a.v.coords()[1] - a.u.coords()[1] * a.v.coords()[0];
                // counterclockwise in world coordinates is clockwise on screen
                let sweep = u8::from(frame * sweep_angle > 0.0);
                let r = a.radius * view.scale;
                let chunks = (sweep_angle.abs() / FRAC_PI_2).ceil().max(1.0) as usize;
                for k in 1..=chunks {
                    let (x, y) = view.map(&piece.segment.at(k as f64 / chunks as f64));
                    write!(d, " A {r:.3} {r:.3} 0 0 {sweep} {x:.3} {y:.3}").unwrap();
                }
            }
        }
    }
    d
}

/// Renders obstacles as filled disks, waypoints as labeled markers and one
/// stroke per robot. Only planar scenarios are supported.
pub fn render(scenario: &Scenario, bundle: &TrajectoryBundle) -> Result<String> {
    if scenario.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "SVG output needs a planar scenario (d = 2), got d = {}",
            scenario.dim()
        )));
    }
    let mut pts: Vec<[f64; 2]> = scenario.obstacles().iter().map(|o| [o[0], o[1]]).collect();
    pts.extend(scenario.waypoints().iter().flatten().map(|z| [z[0], z[1]]));
    for path in &bundle.robot_paths {
        for piece in path.pieces() {
            extent(&piece.segment, &mut pts);
        }
    }
    let (view, height) = View::fit(&pts);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.3}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    for (i, path) in bundle.robot_paths.iter().enumerate() {
        writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            path_data(&view, path.pieces()),
            COLORS[i % COLORS.len()]
        )
        .unwrap();
    }
    for (k, o) in scenario.obstacles().iter().enumerate() {
        let (x, y) = view.map(o);
        writeln!(svg, r#"<circle cx="{x:.3}" cy="{y:.3}" r="6" fill="black"/>"#).unwrap();
        writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="sans-serif">o{}</text>"#,
            x + 8.0,
            y - 8.0,
            k + 1
        )
        .unwrap();
    }
    for (l, stage) in scenario.waypoints().iter().enumerate() {
        for (i, z) in stage.iter().enumerate() {
            let (x, y) = view.map(z);
            let color = COLORS[i % COLORS.len()];
            writeln!(
                svg,
                r#"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="white" stroke="{color}" stroke-width="2"/>"#,
                x - 4.0,
                y - 4.0
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="sans-serif" fill="{color}">z{}.{}</text>"#,
                x + 8.0,
                y + 14.0,
                l + 1,
                i + 1
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
