// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use crate::cover::{Component, SearchStatus, Solution};
use crate::error::{MpldError, Result};

use super::{adjacency, LayoutGraph};

/// A vertex removed by low-degree hiding together with its conflict
/// neighbors that were still present at removal time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenVertex {
    pub vertex: usize,
    pub neighbors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplifiedGraph {
    pub components: Vec<Component>,
    /// Removal order; recovery pops from the back.
    pub hidden_stack: Vec<HiddenVertex>,
}

/// Hides every vertex with conflict degree below `k` and no stitch edge,
/// repeating as degrees drop, then splits what remains into connected
/// components over CE ∪ SE.
pub fn simplify_graph(graph: &LayoutGraph) -> SimplifiedGraph {
    let n = graph.vertices.len();
    let k = graph.k;
    let adj = graph.conflict_adjacency();
    let mut has_stitch = vec![false; n];
    for &(u, v) in &graph.stitch_edges {
        has_stitch[u] = true;
        has_stitch[v] = true;
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut hidden = vec![false; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if !has_stitch[v] && degree[v] < k {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    let mut hidden_stack = Vec::new();
    while let Some(v) = queue.pop_front() {
        hidden[v] = true;
        let neighbors: Vec<usize> = adj[v].iter().copied().filter(|&u| !hidden[u]).collect();
        for &u in &neighbors {
            degree[u] -= 1;
            if !queued[u] && !has_stitch[u] && degree[u] < k {
                queued[u] = true;
                queue.push_back(u);
            }
        }
        hidden_stack.push(HiddenVertex { vertex: v, neighbors });
    }

    let mut all_edges = graph.conflict_edges.clone();
    all_edges.extend_from_slice(&graph.stitch_edges);
    let full_adj = adjacency(n, &all_edges);
    let mut seen = hidden.clone();
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut frontier = VecDeque::from([start]);
        while let Some(v) = frontier.pop_front() {
            for &u in &full_adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    members.push(u);
                    frontier.push_back(u);
                }
            }
        }
        components.push(induced_component(graph, members));
    }
    SimplifiedGraph { components, hidden_stack }
}

fn induced_component(graph: &LayoutGraph, mut members: Vec<usize>) -> Component {
    members.sort_by_key(|&v| {
        let vx = &graph.vertices[v];
        (vx.feature_id, vx.segment_index, v)
    });
    let mut local = std::collections::HashMap::with_capacity(members.len());
    for (i, &v) in members.iter().enumerate() {
        local.insert(v, i);
    }
    let induced = |edges: &[(usize, usize)]| -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (*local.get(&u)?, *local.get(&v)?);
                Some((a.min(b), a.max(b)))
            })
            .collect();
        out.sort_unstable();
        out
    };
    Component {
        features: members.iter().map(|&v| graph.vertices[v].feature_id).collect(),
        conflict_edges: induced(&graph.conflict_edges),
        stitch_edges: induced(&graph.stitch_edges),
        vertices: members,
    }
}

/// Merges per-component colorings and re-inserts hidden vertices in LIFO
/// order, each taking the smallest mask unused by its colored neighbors.
pub fn recover_colors(
    simplified: &SimplifiedGraph,
    component_solutions: &[Solution],
    graph: &LayoutGraph,
) -> Result<Solution> {
    if component_solutions.len() != simplified.components.len() {
        return Err(MpldError::Invariant(format!(
            "{} component solutions for {} components",
            component_solutions.len(),
            simplified.components.len()
        )));
    }
    let n = graph.vertices.len();
    let mut colors: Vec<Option<u8>> = vec![None; n];
    let mut status = SearchStatus::Optimal;
    let mut nodes = 0;
    let mut candidates = Vec::new();
    for (ci, (comp, sol)) in simplified.components.iter().zip(component_solutions).enumerate() {
        if sol.colors.len() != comp.vertices.len() {
            return Err(MpldError::Invariant(format!(
                "component {ci}: solution has {} colors for {} vertices",
                sol.colors.len(),
                comp.vertices.len()
            )));
        }
        for (&v, &c) in comp.vertices.iter().zip(&sol.colors) {
            colors[v] = Some(c);
        }
        if sol.status == SearchStatus::BudgetExhausted {
            status = SearchStatus::BudgetExhausted;
        }
        nodes += sol.nodes;
        candidates.extend_from_slice(&sol.conflict_candidates);
    }
    let mut used = vec![false; graph.k];
    for h in simplified.hidden_stack.iter().rev() {
        used.iter_mut().for_each(|u| *u = false);
        for &u in &h.neighbors {
            if let Some(c) = colors[u] {
                used[c as usize] = true;
            }
        }
        let free = used
            .iter()
            .position(|u| !u)
            .ok_or_else(|| MpldError::Invariant(format!("no free mask for hidden vertex {}", h.vertex)))?;
        colors[h.vertex] = Some(free as u8);
    }
    let colors: Vec<u8> = colors
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| MpldError::Invariant(format!("vertex {v} left uncolored"))))
        .collect::<Result<_>>()?;
    let mut out = Solution::from_colors(colors, &graph.conflict_edges, &graph.stitch_edges, graph.alpha);
    out.status = status;
    out.nodes = nodes;
    out.conflict_candidates = candidates;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_layout_graph;
    use crate::graph::tests::layout;

    fn path_graph() -> LayoutGraph {
        // a - b - c along x, 100 nm gaps
        build_layout_graph(&layout(&[(0, 0, 40, 40), (140, 0, 180, 40), (280, 0, 320, 40)], 120, 3)).unwrap()
    }

    fn k4(offset: i64) -> Vec<(i64, i64, i64, i64)> {
        [(0, 0, 40, 40), (80, 0, 120, 40), (0, 80, 40, 120), (80, 80, 120, 120)]
            .iter()
            .map(|&(a, b, c, d)| (a + offset, b, c + offset, d))
            .collect()
    }

    #[test]
    fn path_is_fully_hidden() {
        let s = simplify_graph(&path_graph());
        assert!(s.components.is_empty());
        assert_eq!(s.hidden_stack.len(), 3);
    }

    #[test]
    fn k4_survives_with_k3() {
        let g = build_layout_graph(&layout(&k4(0), 120, 3)).unwrap();
        let s = simplify_graph(&g);
        assert!(s.hidden_stack.is_empty());
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].vertices, vec![0, 1, 2, 3]);
        assert_eq!(s.components[0].conflict_edges.len(), 6);
    }

    #[test]
    fn disjoint_k4s_are_separate_components() {
        let mut rects = k4(0);
        rects.extend(k4(1000));
        let g = build_layout_graph(&layout(&rects, 120, 3)).unwrap();
        let s = simplify_graph(&g);
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[1].vertices, vec![4, 5, 6, 7]);
        assert_eq!(s.components[1].conflict_edges, s.components[0].conflict_edges);
    }

    #[test]
    fn empty_stack_keeps_component_colors() {
        let g = build_layout_graph(&layout(&k4(0), 120, 3)).unwrap();
        let s = simplify_graph(&g);
        let comp = Solution::from_colors(vec![0, 1, 2, 0], &s.components[0].conflict_edges, &[], g.alpha);
        let out = recover_colors(&s, &[comp], &g).unwrap();
        assert_eq!(out.colors, vec![0, 1, 2, 0]);
        assert_eq!(out.conflicts, vec![(0, 3)]);
    }

    #[test]
    fn path_recovers_with_smallest_free_color() {
        let g = path_graph();
        let s = simplify_graph(&g);
        let out = recover_colors(&s, &[], &g).unwrap();
        assert_eq!(out.colors, vec![0, 1, 0]);
        assert!(out.conflicts.is_empty());
    }

    #[test]
    fn missing_component_vertex_is_an_error() {
        let g = build_layout_graph(&layout(&k4(0), 120, 3)).unwrap();
        let s = simplify_graph(&g);
        let short = Solution::from_colors(vec![0, 1, 2], &[], &[], g.alpha);
        assert!(matches!(recover_colors(&s, &[short], &g), Err(MpldError::Invariant(_))));
        assert!(matches!(recover_colors(&s, &[], &g), Err(MpldError::Invariant(_))));
    }
}
