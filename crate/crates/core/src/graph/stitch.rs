// SPDX-License-Identifier: Apache-2.0

//! Stitch candidate generation by projection gaps.
//!
//! For a piece of a feature, project every conflicting neighbor piece onto
//! the feature's long axis and merge overlapping projections into groups.
//! A gap between two consecutive groups that lies inside the piece is a
//! stitch site; the piece is cut at the gap midpoint. A cut is only kept
//! when at least one neighbor ends up within spacing of just one of the two
//! new pieces, otherwise the stitch could never remove a conflict.

use crate::layout_io::{Axis, Rect};

use super::LayoutGraph;

/// Maximum pieces per feature, i.e. at most one stitch per feature.
pub const DEFAULT_SEGMENT_CAP: usize = 2;

fn interval(r: &Rect, axis: Axis) -> (i64, i64) {
    r.extent(axis)
}

/// Returns the cut coordinate for `piece`, if it has a legal one.
fn find_cut(piece: &Rect, axis: Axis, neighbors: &[Rect], spacing: i64) -> Option<i64> {
    if neighbors.len() < 2 {
        return None;
    }
    let (lo, hi) = interval(piece, axis);
    let mut spans: Vec<(i64, i64)> = neighbors.iter().map(|n| interval(n, axis)).collect();
    spans.sort_unstable();
    let mut groups: Vec<(i64, i64)> = Vec::new();
    for (a, b) in spans {
        match groups.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => groups.push((a, b)),
        }
    }
    // (width, position) of every in-piece gap, widest first, leftmost on ties
    let mut gaps: Vec<(i64, i64, i64)> = groups
        .windows(2)
        .filter_map(|w| {
            let a = w[0].1.max(lo);
            let b = w[1].0.min(hi);
            (a < b).then_some((b - a, a, b))
        })
        .collect();
    gaps.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));

    let limit = spacing * spacing;
    gaps.into_iter().find_map(|(_, a, b)| {
        let cut = a + (b - a) / 2;
        if cut <= lo || cut >= hi {
            return None;
        }
        let (low, high) = piece.split(axis, cut);
        let separates = neighbors.iter().any(|n| (low.distance_sq(n) < limit) != (high.distance_sq(n) < limit));
        separates.then_some(cut)
    })
}

/// Splits features at projection gaps until no legal stitch remains or every
/// splittable feature has `segment_cap` pieces.
///
/// Conflict edges are recomputed per piece: a piece keeps an edge to a
/// neighbor piece exactly when the two are within spacing.
pub fn insert_stitch_candidates(graph: &LayoutGraph, segment_cap: usize) -> LayoutGraph {
    let spacing = graph.spacing_nm;
    let limit = spacing * spacing;
    let feature_pairs = graph.feature_conflicts();
    let mut feature_adj = vec![Vec::new(); graph.features.len()];
    for &(f, g) in &feature_pairs {
        feature_adj[f].push(g);
        feature_adj[g].push(f);
    }
    let mut pieces: Vec<Vec<Rect>> =
        graph.features.iter().map(|f| f.segments.iter().map(|&v| graph.vertices[v].geometry).collect()).collect();

    loop {
        let mut changed = false;
        for f in 0..pieces.len() {
            if pieces[f].len() >= segment_cap {
                continue;
            }
            let axis = graph.features[f].axis;
            for p in 0..pieces[f].len() {
                let piece = pieces[f][p];
                let neighbors: Vec<Rect> = feature_adj[f]
                    .iter()
                    .flat_map(|&g| pieces[g].iter().copied())
                    .filter(|n| piece.distance_sq(n) < limit)
                    .collect();
                if let Some(cut) = find_cut(&piece, axis, &neighbors, spacing) {
                    let (low, high) = piece.split(axis, cut);
                    log::debug!("stitch on rect {} at {cut}", graph.features[f].rect.id);
                    pieces[f][p] = low;
                    pieces[f].insert(p + 1, high);
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let features = graph.features.iter().map(|f| f.rect).zip(pieces).collect();
    LayoutGraph::from_segments(features, &feature_pairs, spacing, graph.k, graph.alpha)
}
