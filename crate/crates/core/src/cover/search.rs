// SPDX-License-Identifier: Apache-2.0

//! Depth-first cover search shared by both matrix engines.
//!
//! The search runs in two passes over the same state:
//!
//! 1. Guided: pick a column with a single live row if one exists, else the
//!    next column in BFS order; try live rows before hidden ones and prune
//!    on `cost + forced conflicts >= best`. This finds the optimal cost.
//! 2. Canonical: visit columns in feature-id order and rows in mask order,
//!    pruning on `> optimum`. The first complete cover that reaches the
//!    optimum is the lexicographically smallest optimal coloring.
//!
//! Both passes bound the remaining conflicts by the uncovered columns with
//! no live row plus a packing of vertex-disjoint cliques larger than `k`
//! whose columns are all uncovered. Those edge sets are disjoint, so the sum
//! never overestimates.

use super::cost::CostScale;
use super::{CoverMatrix, SearchStatus, Solution, SolveOptions};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ColumnPolicy {
    /// Single-live-row column first, otherwise BFS order.
    Guided,
    /// Lowest column index.
    Canonical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ColumnScan {
    pub selected: Option<usize>,
    /// Uncovered columns with no live row; each forces at least one conflict.
    pub zero_live: usize,
}

/// Matrix state manipulated by the search. `depth` is unique per level of
/// the current path, so it can tag deletions.
pub(crate) trait CoverState {
    fn scan(&self, policy: ColumnPolicy) -> ColumnScan;
    fn cover_column(&mut self, col: usize, depth: u32);
    fn uncover_column(&mut self, col: usize, depth: u32);
    fn first_live_row(&self, col: usize) -> Option<usize>;
    fn next_live_row(&self, col: usize, row: usize) -> Option<usize>;
    fn is_live(&self, row: usize) -> bool;
    /// Column whose chosen row hid `row`.
    fn killer(&self, row: usize) -> Option<usize>;
    /// Hides the live rows of uncovered columns that conflict with `row`.
    fn cover_affected(&mut self, row: usize, depth: u32);
    fn uncover_affected(&mut self, row: usize, depth: u32);
}

struct Search<'m, S> {
    m: &'m CoverMatrix,
    state: S,
    scale: CostScale,
    prune: bool,
    budget: Option<u64>,
    policy: ColumnPolicy,
    /// Canonical pass: the optimum to reach.
    target: Option<i64>,
    nodes: u64,
    stop: bool,
    exhausted: bool,
    cost: i64,
    chosen: Vec<bool>,
    path: Vec<usize>,
    candidates: Vec<(usize, usize)>,
    best: Option<Best>,
    cliques: CliqueBound,
}

#[derive(Clone)]
struct Best {
    cost: i64,
    rows: Vec<usize>,
    candidates: Vec<(usize, usize)>,
}

impl<S: CoverState> Search<'_, S> {
    fn exceeds(&self, bound: i64) -> bool {
        match (self.target, &self.best) {
            (Some(t), _) => bound > t,
            (None, Some(b)) => bound >= b.cost,
            (None, None) => false,
        }
    }

    fn dfs(&mut self, depth: u32) {
        self.nodes += 1;
        if let Some(limit) = self.budget {
            if self.nodes > limit && (self.best.is_some() || self.target.is_some()) {
                self.exhausted = true;
                self.stop = true;
                return;
            }
        }
        let scan = self.state.scan(self.policy);
        let Some(col) = scan.selected else {
            self.leaf();
            return;
        };
        let forced = scan.zero_live as i64 + self.cliques.open_weight;
        if self.prune && self.exceeds(self.cost + forced * self.scale.conflict) {
            return;
        }
        self.state.cover_column(col, depth);
        self.cliques.cover(col);
        match self.policy {
            ColumnPolicy::Guided => {
                let mut next = self.state.first_live_row(col);
                while let (Some(row), false) = (next, self.stop) {
                    self.branch(col, row, depth);
                    next = self.state.next_live_row(col, row);
                }
                for row in self.m.column_rows(col) {
                    if self.stop {
                        break;
                    }
                    if !self.state.is_live(row) {
                        self.branch(col, row, depth);
                    }
                }
            }
            ColumnPolicy::Canonical => {
                for row in self.m.column_rows(col) {
                    if self.stop {
                        break;
                    }
                    self.branch(col, row, depth);
                }
            }
        }
        self.cliques.uncover(col);
        self.state.uncover_column(col, depth);
    }

    fn branch(&mut self, col: usize, row: usize, depth: u32) {
        let r = &self.m.rows[row];
        let conflicts: u32 = r
            .conflict_row_ids
            .iter()
            .zip(&r.conflict_weights)
            .filter(|(&other, _)| self.chosen[other])
            .map(|(_, &w)| w)
            .sum();
        let inc = self.scale.of(conflicts as i64, r.stitch_cost as i64);
        if self.prune && self.exceeds(self.cost + inc) {
            return;
        }
        let recorded = if self.state.is_live(row) {
            false
        } else if let Some(by) = self.state.killer(row) {
            self.candidates.push((col, by));
            true
        } else {
            false
        };
        self.chosen[row] = true;
        self.path.push(row);
        self.cost += inc;
        self.state.cover_affected(row, depth);
        self.dfs(depth + 1);
        self.state.uncover_affected(row, depth);
        self.cost -= inc;
        self.path.pop();
        self.chosen[row] = false;
        if recorded {
            self.candidates.pop();
        }
    }

    fn leaf(&mut self) {
        let better = match (self.target, &self.best) {
            (Some(t), _) => self.cost <= t,
            (None, Some(b)) => self.cost < b.cost,
            (None, None) => true,
        };
        if better {
            self.best = Some(Best { cost: self.cost, rows: self.path.clone(), candidates: self.candidates.clone() });
            if self.target.is_some() {
                self.stop = true;
            }
        }
    }
}

/// Fewest monochrome edges in a clique of `size` vertices under `k` masks:
/// the masks split the clique as evenly as possible.
fn min_monochrome(size: usize, k: usize) -> i64 {
    let (q, r) = (size / k, size % k);
    let pairs = |n: usize| (n * n.saturating_sub(1) / 2) as i64;
    r as i64 * pairs(q + 1) + (k - r) as i64 * pairs(q)
}

/// Largest number of cliques examined when packing.
const CLIQUE_SEARCH_LIMIT: usize = 20_000;

/// Vertex-disjoint cliques of more than `k` vertices and, per column, the
/// cliques touching it.
struct CliqueBound {
    weight: Vec<i64>,
    /// Covered columns touching each clique.
    covered: Vec<u32>,
    by_column: Vec<Vec<usize>>,
    /// Total weight of cliques with no covered column.
    open_weight: i64,
}

impl CliqueBound {
    fn new(m: &CoverMatrix) -> Self {
        let c = &m.component;
        let n = c.len();
        let k = m.k;
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in &c.conflict_edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let nbrs: Vec<Vec<usize>> = (0..n).map(|u| (u + 1..n).filter(|&v| adj[u][v]).collect()).collect();
        let mut used = vec![false; n];
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut budget = CLIQUE_SEARCH_LIMIT;
        for v in 0..n {
            if used[v] || nbrs[v].len() < k {
                continue;
            }
            let mut clique = vec![v];
            if grow(&adj, &nbrs[v], &used, &mut clique, k + 1, &mut budget) {
                // extend to a maximal clique among unused vertices
                for u in 0..n {
                    if !used[u] && !clique.contains(&u) && clique.iter().all(|&w| adj[u][w]) {
                        clique.push(u);
                    }
                }
                for &u in &clique {
                    used[u] = true;
                }
                found.push(clique);
            }
            if budget == 0 {
                break;
            }
        }
        let column_of = |v: usize| m.column_vertices.iter().position(|vs| vs.contains(&v)).expect("vertex in a column");
        let mut by_column = vec![Vec::new(); m.num_columns];
        let mut weight = Vec::with_capacity(found.len());
        for (i, clique) in found.iter().enumerate() {
            let mut cols: Vec<usize> = clique.iter().map(|&v| column_of(v)).collect();
            cols.sort_unstable();
            cols.dedup();
            for col in cols {
                by_column[col].push(i);
            }
            weight.push(min_monochrome(clique.len(), k));
        }
        let open_weight = weight.iter().sum();
        CliqueBound { covered: vec![0; weight.len()], weight, by_column, open_weight }
    }

    fn total(&self) -> i64 {
        self.weight.iter().sum()
    }

    fn cover(&mut self, col: usize) {
        for &i in &self.by_column[col] {
            if self.covered[i] == 0 {
                self.open_weight -= self.weight[i];
            }
            self.covered[i] += 1;
        }
    }

    fn uncover(&mut self, col: usize) {
        for &i in &self.by_column[col] {
            self.covered[i] -= 1;
            if self.covered[i] == 0 {
                self.open_weight += self.weight[i];
            }
        }
    }
}

/// Extends `clique` to `target` vertices from `candidates`, first match in
/// ascending order.
fn grow(
    adj: &[Vec<bool>],
    candidates: &[usize],
    used: &[bool],
    clique: &mut Vec<usize>,
    target: usize,
    budget: &mut usize,
) -> bool {
    if clique.len() == target {
        return true;
    }
    for (i, &u) in candidates.iter().enumerate() {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if used[u] || !clique.iter().all(|&w| adj[u][w]) {
            continue;
        }
        clique.push(u);
        if grow(adj, &candidates[i + 1..], used, clique, target, budget) {
            return true;
        }
        clique.pop();
    }
    false
}

pub(crate) fn run<S: CoverState>(m: &CoverMatrix, state: S, options: &SolveOptions) -> Solution {
    let mut s = Search {
        m,
        state,
        scale: m.alpha.scale(),
        prune: options.prune,
        budget: options.budget,
        policy: ColumnPolicy::Guided,
        target: None,
        nodes: 0,
        stop: false,
        exhausted: false,
        cost: 0,
        chosen: vec![false; m.num_rows()],
        path: Vec::with_capacity(m.num_columns),
        candidates: Vec::new(),
        best: None,
        cliques: CliqueBound::new(m),
    };
    s.dfs(0);
    let guided = s.best.take().expect("the guided pass always reaches a complete cover");
    let mut result = guided.clone();
    if !s.exhausted {
        s.policy = ColumnPolicy::Canonical;
        s.target = Some(guided.cost);
        s.stop = false;
        s.dfs(0);
        match s.best.take() {
            Some(canonical) if !s.exhausted => result = canonical,
            _ => {}
        }
    }
    debug_assert!(s.path.is_empty() && s.cost == 0 && s.cliques.open_weight == s.cliques.total());

    let colors = m.colors_for(&result.rows);
    let mut sol = Solution::from_colors(colors, &m.component.conflict_edges, &m.component.stitch_edges, m.alpha);
    debug_assert_eq!(
        s.scale.of(sol.conflicts.len() as i64, sol.stitches.len() as i64),
        result.cost,
        "search cost disagrees with recomputed cost"
    );
    sol.conflict_candidates =
        result.candidates.iter().map(|&(a, b)| (m.column_feature[a], m.column_feature[b])).collect();
    sol.status = if s.exhausted { SearchStatus::BudgetExhausted } else { SearchStatus::Optimal };
    sol.nodes = s.nodes;
    sol
}
