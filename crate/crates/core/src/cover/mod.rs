// SPDX-License-Identifier: Apache-2.0

//! Exact-cover encoding of a component and its solvers.
//!
//! Every feature owns one column. A feature cut into `s` pieces contributes
//! `k^s` rows, one per mask assignment of its pieces, so choosing exactly one
//! row per column colors every piece. Conflict edges between features do not
//! add columns; instead each row lists the rows of other features that would
//! put two conflicting pieces on the same mask ("affected rows"). Choosing a
//! row hides its affected rows. When a column runs out of live rows the
//! search does not fail: it picks a hidden row and pays for the conflicts.

mod cost;
mod dlx;
mod flat;
mod oracle;
mod parallel;
mod search;

use std::collections::VecDeque;
use std::ops::Range;

use num_rational::Ratio;

pub use cost::{format_ratio, Alpha, CostScale};
pub use dlx::LinkedMatrix;
pub use flat::FlatMatrix;
pub use oracle::{brute_force_oracle, ORACLE_LIMIT};
pub use parallel::{run_schedule, solve_parallel, ParallelSchedule, WorkItem, DEFAULT_ITEMS_PER_GROUP};
pub use search::{ColumnPolicy, ColumnScan};

use crate::error::{MpldError, Result};

/// Largest number of rows a single feature may expand to.
pub const MAX_ROWS_PER_FEATURE: usize = 1 << 16;

/// A connected piece of the simplified graph, in solver-local indexing.
///
/// Local vertex `i` is `vertices[i]` in the parent graph. Vertices are
/// ordered by (feature id, piece index); that order defines the
/// lexicographic tie-break between equal-cost colorings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub features: Vec<u32>,
    pub conflict_edges: Vec<(usize, usize)>,
    pub stitch_edges: Vec<(usize, usize)>,
}

impl Component {
    /// Builds a component over local vertices `0..features.len()`.
    pub fn new(
        features: Vec<u32>,
        conflict_edges: Vec<(usize, usize)>,
        stitch_edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = features.len();
        let norm = |edges: Vec<(usize, usize)>, what: &str| -> Result<Vec<(usize, usize)>> {
            let mut out = Vec::with_capacity(edges.len());
            for (u, v) in edges {
                if u == v || u >= n || v >= n {
                    return Err(MpldError::Parameter(format!("bad {what} edge ({u}, {v})")));
                }
                out.push((u.min(v), u.max(v)));
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        };
        let c = Component {
            vertices: (0..n).collect(),
            conflict_edges: norm(conflict_edges, "conflict")?,
            stitch_edges: norm(stitch_edges, "stitch")?,
            features,
        };
        if c.features.windows(2).any(|w| w[0] > w[1]) {
            return Err(MpldError::Parameter("component vertices must be grouped by ascending feature id".into()));
        }
        if let Some(&(u, v)) = c.stitch_edges.iter().find(|&&(u, v)| c.features[u] != c.features[v]) {
            return Err(MpldError::Parameter(format!("stitch edge ({u}, {v}) joins different features")));
        }
        if let Some(&(u, v)) = c.conflict_edges.iter().find(|e| c.stitch_edges.binary_search(e).is_ok()) {
            return Err(MpldError::Parameter(format!("edge ({u}, {v}) is both conflict and stitch")));
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum SearchStatus {
    #[default]
    Optimal,
    /// The node budget ran out; the coloring is the best one found.
    BudgetExhausted,
}

/// A coloring with its conflict and stitch sets and exact cost.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Solution {
    pub colors: Vec<u8>,
    /// Conflict edges whose endpoints share a mask.
    pub conflicts: Vec<(usize, usize)>,
    /// Stitch edges whose endpoints differ.
    pub stitches: Vec<(usize, usize)>,
    pub cost: Ratio<i64>,
    /// Feature-id pairs `(cl, cl')`: `cl` took a row that `cl'` had hidden.
    pub conflict_candidates: Vec<(u32, u32)>,
    pub status: SearchStatus,
    /// Search nodes expanded.
    pub nodes: u64,
}

impl Solution {
    pub fn from_colors(
        colors: Vec<u8>,
        conflict_edges: &[(usize, usize)],
        stitch_edges: &[(usize, usize)],
        alpha: Alpha,
    ) -> Self {
        let conflicts: Vec<_> = conflict_edges.iter().copied().filter(|&(u, v)| colors[u] == colors[v]).collect();
        let stitches: Vec<_> = stitch_edges.iter().copied().filter(|&(u, v)| colors[u] != colors[v]).collect();
        let cost = alpha.cost(conflicts.len(), stitches.len());
        Solution { colors, conflicts, stitches, cost, ..Default::default() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Upper bound on search nodes; `None` searches to completion.
    pub budget: Option<u64>,
    /// Branch-and-bound pruning. Disabling it only makes the search slower.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: None, prune: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverRow {
    pub feature_column: usize,
    /// One mask per piece of the feature, first piece most significant.
    pub color_config: Vec<u8>,
    pub stitch_cost: u32,
    /// Rows of other features this row excludes, ascending.
    pub conflict_row_ids: Vec<usize>,
    /// Number of conflict edges made monochrome by each pair, parallel to
    /// `conflict_row_ids`.
    pub conflict_weights: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct CoverMatrix {
    pub num_columns: usize,
    pub k: usize,
    pub alpha: Alpha,
    pub rows: Vec<CoverRow>,
    /// Rows of column `c` are `column_start[c]..column_start[c + 1]`.
    pub column_start: Vec<usize>,
    /// Columns in breadth-first order over the feature conflict graph,
    /// starting from the lowest feature id.
    pub column_order: Vec<usize>,
    pub column_feature: Vec<u32>,
    /// Local vertices of each column's pieces.
    pub column_vertices: Vec<Vec<usize>>,
    pub component: Component,
}

impl CoverMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_rows(&self, col: usize) -> Range<usize> {
        self.column_start[col]..self.column_start[col + 1]
    }

    /// Expands one chosen row per column into per-vertex masks.
    pub fn colors_for(&self, chosen_rows: &[usize]) -> Vec<u8> {
        let mut colors = vec![0u8; self.component.len()];
        for &r in chosen_rows {
            let row = &self.rows[r];
            for (&v, &c) in self.column_vertices[row.feature_column].iter().zip(&row.color_config) {
                colors[v] = c;
            }
        }
        colors
    }
}

pub fn build_cover_matrix(component: &Component, k: usize, alpha: Alpha) -> Result<CoverMatrix> {
    if k < 2 {
        return Err(MpldError::Parameter(format!("mask count must be at least 2, got {k}")));
    }
    if k > u8::MAX as usize + 1 {
        return Err(MpldError::Parameter(format!("mask count {k} does not fit in a byte")));
    }
    if component.is_empty() {
        return Err(MpldError::Parameter("empty component".into()));
    }
    // columns: runs of equal feature id
    let mut column_vertices: Vec<Vec<usize>> = Vec::new();
    let mut column_feature = Vec::new();
    let mut column_of = vec![0usize; component.len()];
    let mut position = vec![0usize; component.len()];
    for (v, &f) in component.features.iter().enumerate() {
        if column_feature.last() != Some(&f) {
            column_feature.push(f);
            column_vertices.push(Vec::new());
        }
        let c = column_feature.len() - 1;
        column_of[v] = c;
        position[v] = column_vertices[c].len();
        column_vertices[c].push(v);
    }
    let num_columns = column_feature.len();

    let mut stitch_by_col: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_columns];
    for &(u, v) in &component.stitch_edges {
        stitch_by_col[column_of[u]].push((position[u], position[v]));
    }

    let mut rows = Vec::new();
    let mut column_start = Vec::with_capacity(num_columns + 1);
    for c in 0..num_columns {
        column_start.push(rows.len());
        let pieces = column_vertices[c].len();
        let count = (k as u128).checked_pow(pieces as u32).filter(|&n| n <= MAX_ROWS_PER_FEATURE as u128);
        let Some(count) = count else {
            return Err(MpldError::Size(format!(
                "feature {} with {pieces} pieces exceeds {MAX_ROWS_PER_FEATURE} rows at k={k}",
                column_feature[c]
            )));
        };
        for idx in 0..count as usize {
            let mut config = vec![0u8; pieces];
            let mut rest = idx;
            for slot in config.iter_mut().rev() {
                *slot = (rest % k) as u8;
                rest /= k;
            }
            let stitch_cost = stitch_by_col[c].iter().filter(|&&(a, b)| config[a] != config[b]).count() as u32;
            rows.push(CoverRow {
                feature_column: c,
                color_config: config,
                stitch_cost,
                conflict_row_ids: Vec::new(),
                conflict_weights: Vec::new(),
            });
        }
    }
    column_start.push(rows.len());

    // conflict edges grouped by column pair (c < d) as piece positions
    let mut pair_edges: std::collections::BTreeMap<(usize, usize), Vec<(usize, usize)>> = Default::default();
    for &(u, v) in &component.conflict_edges {
        let (cu, cv) = (column_of[u], column_of[v]);
        if cu == cv {
            return Err(MpldError::Parameter(format!("conflict edge ({u}, {v}) inside one feature")));
        }
        let (c, d, pc, pd) =
            if cu < cv { (cu, cv, position[u], position[v]) } else { (cv, cu, position[v], position[u]) };
        pair_edges.entry((c, d)).or_default().push((pc, pd));
    }
    let mut feature_adj = vec![Vec::new(); num_columns];
    for (&(c, d), edges) in &pair_edges {
        feature_adj[c].push(d);
        feature_adj[d].push(c);
        for r in column_start[c]..column_start[c + 1] {
            for s in column_start[d]..column_start[d + 1] {
                let w = edges.iter().filter(|&&(pc, pd)| rows[r].color_config[pc] == rows[s].color_config[pd]).count()
                    as u32;
                if w > 0 {
                    rows[r].conflict_row_ids.push(s);
                    rows[r].conflict_weights.push(w);
                    rows[s].conflict_row_ids.push(r);
                    rows[s].conflict_weights.push(w);
                }
            }
        }
    }
    for row in &mut rows {
        let mut pairs: Vec<(usize, u32)> =
            row.conflict_row_ids.iter().copied().zip(row.conflict_weights.iter().copied()).collect();
        pairs.sort_unstable();
        row.conflict_row_ids = pairs.iter().map(|p| p.0).collect();
        row.conflict_weights = pairs.iter().map(|p| p.1).collect();
    }
    for list in &mut feature_adj {
        list.sort_unstable();
    }

    let mut column_order = Vec::with_capacity(num_columns);
    let mut seen = vec![false; num_columns];
    for root in 0..num_columns {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(c) = queue.pop_front() {
            column_order.push(c);
            for &d in &feature_adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
    }

    Ok(CoverMatrix {
        num_columns,
        k,
        alpha,
        rows,
        column_start,
        column_order,
        column_feature,
        column_vertices,
        component: component.clone(),
    })
}

/// Sequential dancing-links search.
pub fn solve_sequential(matrix: &CoverMatrix, options: &SolveOptions) -> Solution {
    search::run(matrix, LinkedMatrix::new(matrix), options)
}

/// Flat-array search for one component, as run by each parallel worker.
pub fn solve_flat(matrix: &CoverMatrix, options: &SolveOptions) -> Solution {
    search::run(matrix, FlatMatrix::new(matrix), options)
}
