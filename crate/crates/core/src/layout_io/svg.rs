// SPDX-License-Identifier: Apache-2.0

//! SVG rendering of a decomposed layout: one fill per mask, stitch cut
//! lines in black, conflicting features outlined in red.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::cover::Solution;
use crate::graph::LayoutGraph;

use super::{Axis, Layout};

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f"];

pub fn mask_fill(mask: u8) -> &'static str {
    PALETTE[mask as usize % PALETTE.len()]
}

pub fn render(layout: &Layout, graph: &LayoutGraph, solution: &Solution) -> String {
    let margin = layout.spacing_nm;
    let (mut x0, mut y0, mut x1, mut y1) = (0i64, 0i64, 1i64, 1i64);
    if let Some(first) = layout.rects.first() {
        (x0, y0, x1, y1) = (first.x_lo, first.y_lo, first.x_hi, first.y_hi);
    }
    for r in &layout.rects {
        x0 = x0.min(r.x_lo);
        y0 = y0.min(r.y_lo);
        x1 = x1.max(r.x_hi);
        y1 = y1.max(r.y_hi);
    }
    let (w, h) = (x1 - x0 + 2 * margin, y1 - y0 + 2 * margin);
    // SVG y grows downward; flip so layout y grows up.
    let fy = |y: i64| y1 + margin - y;
    let fx = |x: i64| x - x0 + margin;

    let conflicted: HashSet<usize> = solution.conflicts.iter().flat_map(|&(a, b)| [a, b]).collect();

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#)
        .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    for v in &graph.vertices {
        let g = &v.geometry;
        let mask = solution.colors.get(v.id).copied().unwrap_or(0);
        let stroke = if conflicted.contains(&v.id) { r#" stroke="red" stroke-width="4""# } else { "" };
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"{stroke}><title>rect {} seg {} mask {mask}</title></rect>"#,
            fx(g.x_lo),
            fy(g.y_hi),
            g.width(),
            g.height(),
            mask_fill(mask),
            v.feature_id,
            v.segment_index,
        )
        .unwrap();
    }
    for f in &graph.features {
        for &v in f.segments.iter().skip(1) {
            let g = &graph.vertices[v].geometry;
            let (x_a, y_a, x_b, y_b) = match f.axis {
                Axis::X => (g.x_lo, g.y_lo, g.x_lo, g.y_hi),
                Axis::Y => (g.x_lo, g.y_lo, g.x_hi, g.y_lo),
            };
            writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="3" stroke-dasharray="6,3"/>"#,
                fx(x_a),
                fy(y_a),
                fx(x_b),
                fy(y_b)
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
