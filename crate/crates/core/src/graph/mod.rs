// SPDX-License-Identifier: Apache-2.0

//! Layout graph: one vertex per feature piece, conflict edges between pieces
//! of different features closer than the minimum coloring spacing, and
//! stitch edges between adjacent pieces of one split feature.

mod simplify;
mod stitch;

pub use simplify::{recover_colors, simplify_graph, HiddenVertex, SimplifiedGraph};
pub use stitch::{insert_stitch_candidates, DEFAULT_SEGMENT_CAP};

use crate::cover::Alpha;
use crate::error::{MpldError, Result};
use crate::layout_io::{Axis, Layout, Rect};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    /// Id of the originating rectangle.
    pub feature_id: u32,
    /// Position of the originating rectangle in [`LayoutGraph::features`].
    pub feature_index: usize,
    /// Ordinal along the feature's long axis, 0 for unsplit features.
    pub segment_index: u32,
    pub geometry: Rect,
}

/// An original rectangle and the vertices it was cut into, ordered along `axis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feature {
    pub rect: Rect,
    pub axis: Axis,
    pub segments: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutGraph {
    pub vertices: Vec<Vertex>,
    pub features: Vec<Feature>,
    /// CE, stored as `(u, v)` with `u < v`, sorted.
    pub conflict_edges: Vec<(usize, usize)>,
    /// SE, stored as `(u, v)` with `u < v`, sorted.
    pub stitch_edges: Vec<(usize, usize)>,
    pub k: usize,
    pub alpha: Alpha,
    pub spacing_nm: i64,
}

impl LayoutGraph {
    pub fn num_edges(&self) -> usize {
        self.conflict_edges.len() + self.stitch_edges.len()
    }

    /// Conflict adjacency lists, neighbors ascending.
    pub fn conflict_adjacency(&self) -> Vec<Vec<usize>> {
        adjacency(self.vertices.len(), &self.conflict_edges)
    }

    /// Builds a graph from per-feature segment geometry, deriving CE from
    /// distances between pieces of different features and SE between
    /// consecutive pieces of the same feature.
    ///
    /// `feature_pairs` restricts which feature pairs are tested.
    pub(crate) fn from_segments(
        features: Vec<(Rect, Vec<Rect>)>,
        feature_pairs: &[(usize, usize)],
        spacing_nm: i64,
        k: usize,
        alpha: Alpha,
    ) -> Self {
        let limit = spacing_nm * spacing_nm;
        let mut vertices = Vec::new();
        let mut feats = Vec::with_capacity(features.len());
        let mut stitch_edges = Vec::new();
        for (fi, (rect, segs)) in features.into_iter().enumerate() {
            let mut ids = Vec::with_capacity(segs.len());
            for (si, g) in segs.into_iter().enumerate() {
                let id = vertices.len();
                if si > 0 {
                    stitch_edges.push((id - 1, id));
                }
                vertices.push(Vertex {
                    id,
                    feature_id: rect.id,
                    feature_index: fi,
                    segment_index: si as u32,
                    geometry: g,
                });
                ids.push(id);
            }
            feats.push(Feature { rect, axis: rect.long_axis(), segments: ids });
        }
        let mut conflict_edges = Vec::new();
        for &(f, g) in feature_pairs {
            for &a in &feats[f].segments {
                for &b in &feats[g].segments {
                    if vertices[a].geometry.distance_sq(&vertices[b].geometry) < limit {
                        conflict_edges.push((a.min(b), a.max(b)));
                    }
                }
            }
        }
        conflict_edges.sort_unstable();
        conflict_edges.dedup();
        LayoutGraph { vertices, features: feats, conflict_edges, stitch_edges, k, alpha, spacing_nm }
    }

    /// Feature-level conflict pairs `(f, g)` with `f < g`, sorted and deduplicated.
    pub fn feature_conflicts(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .conflict_edges
            .iter()
            .map(|&(u, v)| {
                let (f, g) = (self.vertices[u].feature_index, self.vertices[v].feature_index);
                (f.min(g), f.max(g))
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

pub(crate) fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// One vertex per rectangle; a conflict edge joins every pair of rectangles
/// whose closed boundaries are strictly closer than the spacing.
///
/// Candidate pairs come from a sweep over rectangles sorted by `x_lo`, so
/// only pairs within `spacing` along x are measured.
pub fn build_layout_graph(layout: &Layout) -> Result<LayoutGraph> {
    layout.validate()?;
    let rects = &layout.rects;
    let spacing = layout.spacing_nm;
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_by_key(|&i| (rects[i].x_lo, i));

    let mut pairs = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let a = &rects[i];
        for &j in &order[pos + 1..] {
            let b = &rects[j];
            if b.x_lo >= a.x_hi + spacing {
                break;
            }
            if a.overlaps(b) {
                return Err(MpldError::Validation(format!("rects {} and {} overlap", a.id, b.id)));
            }
            if a.distance_sq(b) < spacing * spacing {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    let features = rects.iter().map(|r| (*r, vec![*r])).collect();
    Ok(LayoutGraph::from_segments(features, &pairs, spacing, layout.k, layout.alpha))
}
