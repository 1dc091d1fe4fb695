//! SVG output: partition panels and discrepancy scaling.

use std::f64::consts::PI;
use std::fmt::Write as _;

use diamond_core::partition::Partition;
use diamond_core::{PointSet, Region, RegionKind};

const PANEL: f64 = 360.0;
const RADIUS: f64 = 160.0;

/// Orthographic view of one hemisphere: looking down on the north pole, or
/// up at the south pole (mirrored so longitudes keep their orientation).
#[derive(Clone, Copy)]
enum Panel {
    North,
    South,
}

impl Panel {
    fn center(self) -> (f64, f64) {
        match self {
            Panel::North => (PANEL / 2.0, PANEL / 2.0 + 20.0),
            Panel::South => (1.5 * PANEL, PANEL / 2.0 + 20.0),
        }
    }

    fn project(self, h: f64, phi: f64) -> (f64, f64) {
        let (cx, cy) = self.center();
        let rho = RADIUS * (1.0 - h * h).max(0.0).sqrt();
        match self {
            Panel::North => (cx + rho * phi.cos(), cy - rho * phi.sin()),
            Panel::South => (cx + rho * phi.cos(), cy + rho * phi.sin()),
        }
    }
}

/// Region outline in the panel of its hemisphere. Equatorial sectors are
/// drawn by their northern half.
fn region_path(region: &Region) -> (Panel, String) {
    let (panel, h_near, h_far) = match region.kind {
        RegionKind::NorthCap => (Panel::North, 1.0, region.h_lo),
        RegionKind::SouthCap => (Panel::South, -1.0, region.h_hi),
        RegionKind::Equatorial { .. } => (Panel::North, region.h_hi, 0.0),
        _ if region.h_lo >= 0.0 => (Panel::North, region.h_hi, region.h_lo),
        _ => (Panel::South, region.h_lo, region.h_hi),
    };
    let mut d = String::new();
    if region.is_cap() {
        let (cx, cy) = panel.center();
        let rho = RADIUS * (1.0 - h_far * h_far).max(0.0).sqrt();
        write!(d, "M {:.3} {:.3} m {:.3} 0 a {rho:.3} {rho:.3} 0 1 0 {:.3} 0 a {rho:.3} {rho:.3} 0 1 0 {:.3} 0 Z", cx, cy, -rho, 2.0 * rho, -2.0 * rho)
            .unwrap();
        return (panel, d);
    }
    let width = region.phi_hi - region.phi_lo;
    let steps = ((width / (2.0 * PI) * 96.0).ceil() as usize).max(2);
    let arc = |h: f64, reverse: bool| -> Vec<(f64, f64)> {
        (0..=steps)
            .map(|k| {
                let k = if reverse { steps - k } else { k };
                panel.project(h, region.phi_lo + width * k as f64 / steps as f64)
            })
            .collect()
    };
    let mut pts = arc(h_near, false);
    pts.extend(arc(h_far, true));
    for (k, (x, y)) in pts.iter().enumerate() {
        write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M " } else { "L " }).unwrap();
    }
    d.push('Z');
    (panel, d)
}

pub fn partition_svg(partition: &Partition, points: &PointSet, title: &str) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = 2.0 * PANEL,
        h = PANEL + 40.0
    )
    .unwrap();
    writeln!(svg, r#"<title>{title}</title>"#).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (panel, label) in [
        (Panel::North, "northern hemisphere"),
        (Panel::South, "southern hemisphere"),
    ] {
        let (cx, cy) = panel.center();
        writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="{RADIUS}" fill="none" stroke="black" stroke-width="1.5"/>"#).unwrap();
        writeln!(svg, r#"<text x="{cx}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{label}</text>"#).unwrap();
    }
    writeln!(
        svg,
        r#"<g id="regions" fill="none" stroke="steelblue" stroke-width="0.6">"#
    )
    .unwrap();
    for region in partition.regions() {
        let (_, d) = region_path(region);
        writeln!(
            svg,
            r#"<g class="region" data-id="{}"><path d="{d}"/></g>"#,
            region.id
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g id="points" fill="crimson">"#).unwrap();
    for p in points.points() {
        let panel = if p.z >= 0.0 {
            Panel::North
        } else {
            Panel::South
        };
        let (x, y) = panel.project(p.z, p.longitude());
        writeln!(
            svg,
            r#"<circle class="point" cx="{x:.3}" cy="{y:.3}" r="2"/>"#
        )
        .unwrap();
    }
    writeln!(svg, "</g>\n</svg>").unwrap();
    svg
}

/// One point of the scaling plot.
pub struct ScalingPoint {
    pub m: u32,
    pub sqrt_n_d: f64,
    pub exact: bool,
}

/// `√N · D` against `M`, with horizontal guides at the given levels.
pub fn scaling_svg(series: &[ScalingPoint], guides: &[(f64, &str)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 60.0);
    let m_lo = series.iter().map(|s| s.m).min().unwrap_or(1) as f64;
    let m_hi = (series.iter().map(|s| s.m).max().unwrap_or(1) as f64).max(m_lo + 1.0);
    let y_hi = guides
        .iter()
        .map(|g| g.0)
        .chain(series.iter().map(|s| s.sqrt_n_d))
        .fold(0.0, f64::max)
        * 1.1;
    let sx = |m: f64| pad + (m - m_lo) / (m_hi - m_lo) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - v / y_hi * (h - 2.0 * pad);

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<g id="axes" stroke="black">"#).unwrap();
    writeln!(
        svg,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}"/>"#,
        h - pad,
        w - pad,
        h - pad
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}"/>"#,
        h - pad
    )
    .unwrap();
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">M</text>"#, w / 2.0, h - 20.0).unwrap();
    writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">sqrt(N) * D</text>"#,
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for &(value, label) in guides {
        let y = sy(value);
        writeln!(
            svg,
            r#"<line class="guide" data-value="{value}" x1="{pad}" y1="{y:.3}" x2="{}" y2="{y:.3}" stroke="gray" stroke-dasharray="6 4"/>"#,
            w - pad
        )
        .unwrap();
        writeln!(svg, r#"<text x="{}" y="{:.3}" font-family="sans-serif" font-size="11" fill="gray">{label}</text>"#, w - pad + 4.0, y + 4.0).unwrap();
    }
    let line: Vec<String> = series
        .iter()
        .map(|s| format!("{:.3},{:.3}", sx(s.m as f64), sy(s.sqrt_n_d)))
        .collect();
    writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        line.join(" ")
    )
    .unwrap();
    for s in series {
        let fill = if s.exact { "steelblue" } else { "white" };
        writeln!(
            svg,
            r#"<circle class="sample" data-m="{}" data-value="{}" cx="{:.3}" cy="{:.3}" r="3" fill="{fill}" stroke="steelblue"/>"#,
            s.m,
            s.sqrt_n_d,
            sx(s.m as f64),
            sy(s.sqrt_n_d)
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    svg
}
