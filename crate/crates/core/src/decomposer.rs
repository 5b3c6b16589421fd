// SPDX-License-Identifier: Apache-2.0

//! End-to-end flow and solution checking.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;

use crate::cover::{
    brute_force_oracle, build_cover_matrix, run_schedule, solve_flat, solve_sequential, Component, CoverMatrix,
    ParallelSchedule, Solution, SolveOptions, DEFAULT_ITEMS_PER_GROUP,
};
use crate::error::{MpldError, Result};
use crate::graph::{
    build_layout_graph, insert_stitch_candidates, recover_colors, simplify_graph, LayoutGraph, DEFAULT_SEGMENT_CAP,
};
use crate::layout_io::Layout;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Sequential,
    Parallel,
    Oracle,
}

impl FromStr for Engine {
    type Err = MpldError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Engine::Sequential),
            "parallel" => Ok(Engine::Parallel),
            "oracle" => Ok(Engine::Oracle),
            _ => Err(MpldError::Parameter(format!("unknown engine '{s}'"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Sequential => "sequential",
            Engine::Parallel => "parallel",
            Engine::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub engine: Engine,
    pub workers: usize,
    pub items_per_group: usize,
    /// Maximum pieces per feature; 1 disables stitch insertion.
    pub stitch_cap: usize,
    pub budget: Option<u64>,
    /// Shuffles which component lands on which work index.
    pub schedule_seed: Option<u64>,
    pub name: String,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            engine: Engine::Sequential,
            workers: 1,
            items_per_group: DEFAULT_ITEMS_PER_GROUP,
            stitch_cap: DEFAULT_SEGMENT_CAP,
            budget: None,
            schedule_seed: None,
            name: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    pub size: usize,
    pub nodes: u64,
    pub time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DecompositionStats {
    pub name: String,
    /// Vertices of the graph after stitch insertion.
    pub vertices: usize,
    /// CE plus SE after stitch insertion.
    pub edges: usize,
    /// Simplification, matrix build, solving and recovery.
    pub time_s: f64,
    pub stitches: usize,
    pub conflicts: usize,
    pub per_component: Vec<ComponentStats>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub graph: LayoutGraph,
    pub solution: Solution,
    pub stats: DecompositionStats,
}

pub fn decompose(layout: &Layout, options: &DecomposeOptions) -> Result<Decomposition> {
    layout.validate()?;
    if options.workers == 0 {
        return Err(MpldError::Parameter("workers must be positive".into()));
    }
    if options.stitch_cap == 0 {
        return Err(MpldError::Parameter("stitch cap must be positive".into()));
    }
    let base = build_layout_graph(layout)?;
    let graph = insert_stitch_candidates(&base, options.stitch_cap);

    let start = Instant::now();
    let simplified = simplify_graph(&graph);
    let solve_opts = SolveOptions { budget: options.budget, ..Default::default() };
    let timed = |size: usize, f: &dyn Fn() -> Result<Solution>| -> Result<(Solution, ComponentStats)> {
        let t = Instant::now();
        let s = f()?;
        let stats = ComponentStats { size, nodes: s.nodes, time_s: t.elapsed().as_secs_f64() };
        Ok((s, stats))
    };
    let results: Vec<(Solution, ComponentStats)> = match options.engine {
        Engine::Oracle => simplified
            .components
            .iter()
            .map(|c| timed(c.len(), &|| brute_force_oracle(c, graph.k, graph.alpha)))
            .collect::<Result<_>>()?,
        Engine::Sequential => build_matrices(&graph, &simplified.components)?
            .iter()
            .map(|m| timed(m.component.len(), &|| Ok(solve_sequential(m, &solve_opts))))
            .collect::<Result<_>>()?,
        Engine::Parallel => {
            let matrices = build_matrices(&graph, &simplified.components)?;
            let mut schedule = ParallelSchedule::new(matrices.len(), options.items_per_group)?;
            if let Some(seed) = options.schedule_seed {
                schedule = schedule.reassigned(seed);
            }
            run_schedule(&schedule, options.workers, |c| {
                let m = &matrices[c];
                timed(m.component.len(), &|| Ok(solve_flat(m, &solve_opts)))
            })?
            .into_iter()
            .map(|r| r.and_then(|x| x))
            .collect::<Result<_>>()?
        }
    };
    let (solutions, per_component): (Vec<Solution>, Vec<ComponentStats>) = results.into_iter().unzip();
    let solution = recover_colors(&simplified, &solutions, &graph)?;
    let time_s = start.elapsed().as_secs_f64();
    log::debug!(
        "{}: {} components, {} hidden, cost {}",
        options.name,
        simplified.components.len(),
        simplified.hidden_stack.len(),
        solution.cost
    );

    let report = verify_solution(&solution, &graph);
    if !report.is_clean() {
        return Err(MpldError::Verification(report.to_string()));
    }
    let stats = DecompositionStats {
        name: options.name.clone(),
        vertices: graph.vertices.len(),
        edges: graph.num_edges(),
        time_s,
        stitches: solution.stitches.len(),
        conflicts: solution.conflicts.len(),
        per_component,
    };
    Ok(Decomposition { graph, solution, stats })
}

fn build_matrices(graph: &LayoutGraph, components: &[Component]) -> Result<Vec<CoverMatrix>> {
    components.iter().map(|c| build_cover_matrix(c, graph.k, graph.alpha)).collect()
}

/// Counts monochrome conflict edges and split stitch edges and returns
/// them with the exact weighted cost.
pub fn evaluate_cost(colors: &[u8], graph: &LayoutGraph) -> Result<(usize, usize, Ratio<i64>)> {
    if colors.len() != graph.vertices.len() {
        return Err(MpldError::Validation(format!("{} colors for {} vertices", colors.len(), graph.vertices.len())));
    }
    if let Some((v, c)) = colors.iter().enumerate().find(|(_, &c)| c as usize >= graph.k) {
        return Err(MpldError::Validation(format!("vertex {v} has mask {c}, k = {}", graph.k)));
    }
    let conflicts = graph.conflict_edges.iter().filter(|&&(u, v)| colors[u] == colors[v]).count();
    let stitches = graph.stitch_edges.iter().filter(|&&(u, v)| colors[u] != colors[v]).count();
    Ok((conflicts, stitches, graph.alpha.cost(conflicts, stitches)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ColorCountMismatch {
        expected: usize,
        found: usize,
    },
    ColorOutOfRange {
        vertex: usize,
        color: u8,
    },
    /// `missing` are monochrome conflict edges not listed; `extra` are listed
    /// edges that are not monochrome conflict edges.
    ConflictListMismatch {
        missing: Vec<(usize, usize)>,
        extra: Vec<(usize, usize)>,
    },
    StitchListMismatch {
        missing: Vec<(usize, usize)>,
        extra: Vec<(usize, usize)>,
    },
    CostMismatch {
        expected: Ratio<i64>,
        stored: Ratio<i64>,
    },
    /// A candidate pair names features with no monochrome conflict edge
    /// between them.
    UnsoundCandidate {
        a: u32,
        b: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColorCountMismatch { expected, found } => {
                write!(f, "expected {expected} colors, found {found}")
            }
            Violation::ColorOutOfRange { vertex, color } => write!(f, "vertex {vertex} has mask {color} out of range"),
            Violation::ConflictListMismatch { missing, extra } => {
                write!(f, "conflict list: missing {missing:?}, extra {extra:?}")
            }
            Violation::StitchListMismatch { missing, extra } => {
                write!(f, "stitch list: missing {missing:?}, extra {extra:?}")
            }
            Violation::CostMismatch { expected, stored } => {
                write!(f, "cost mismatch: expected {expected}, stored {stored}")
            }
            Violation::UnsoundCandidate { a, b } => {
                write!(f, "conflict candidate ({a}, {b}) has no monochrome conflict edge")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

type EdgeDiff = (Vec<(usize, usize)>, Vec<(usize, usize)>);

fn diff(listed: &[(usize, usize)], actual: &[(usize, usize)]) -> EdgeDiff {
    let norm =
        |e: &[(usize, usize)]| -> HashSet<(usize, usize)> { e.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect() };
    let (l, a) = (norm(listed), norm(actual));
    let mut missing: Vec<_> = a.difference(&l).copied().collect();
    let mut extra: Vec<_> = l.difference(&a).copied().collect();
    // a repeated entry is also a list error
    if listed.len() != l.len() {
        let mut seen = HashSet::new();
        extra.extend(listed.iter().filter(|e| !seen.insert(**e)).copied());
    }
    missing.sort_unstable();
    extra.sort_unstable();
    (missing, extra)
}

/// Recomputes the objective from `solution.colors` and reports every
/// disagreement with the stored fields.
pub fn verify_solution(solution: &Solution, graph: &LayoutGraph) -> VerificationReport {
    let mut violations = Vec::new();
    let n = graph.vertices.len();
    if solution.colors.len() != n {
        violations.push(Violation::ColorCountMismatch { expected: n, found: solution.colors.len() });
        return VerificationReport { violations };
    }
    for (vertex, &color) in solution.colors.iter().enumerate() {
        if color as usize >= graph.k {
            violations.push(Violation::ColorOutOfRange { vertex, color });
        }
    }
    let colors = &solution.colors;
    let conflicts: Vec<_> = graph.conflict_edges.iter().copied().filter(|&(u, v)| colors[u] == colors[v]).collect();
    let stitches: Vec<_> = graph.stitch_edges.iter().copied().filter(|&(u, v)| colors[u] != colors[v]).collect();
    let (missing, extra) = diff(&solution.conflicts, &conflicts);
    if !missing.is_empty() || !extra.is_empty() {
        violations.push(Violation::ConflictListMismatch { missing, extra });
    }
    let (missing, extra) = diff(&solution.stitches, &stitches);
    if !missing.is_empty() || !extra.is_empty() {
        violations.push(Violation::StitchListMismatch { missing, extra });
    }
    let expected = graph.alpha.cost(conflicts.len(), stitches.len());
    if expected != solution.cost {
        violations.push(Violation::CostMismatch { expected, stored: solution.cost });
    }
    let monochrome: HashSet<(u32, u32)> = conflicts
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (graph.vertices[u].feature_id, graph.vertices[v].feature_id);
            (a.min(b), a.max(b))
        })
        .collect();
    for &(a, b) in &solution.conflict_candidates {
        if !monochrome.contains(&(a.min(b), a.max(b))) {
            violations.push(Violation::UnsoundCandidate { a, b });
        }
    }
    VerificationReport { violations }
}
