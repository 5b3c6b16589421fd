// SPDX-License-Identifier: Apache-2.0

//! Multiple-patterning layout decomposition.
//!
//! A layout of axis-aligned rectangles is turned into a conflict/stitch
//! graph, simplified into independent components, encoded as exact-cover
//! matrices and solved either with sequential dancing links or with a
//! flat-array engine whose inner loops are element-wise passes that run
//! across a pool of workers. The objective is the number of same-mask
//! conflict edges plus `alpha` times the number of used stitches.

pub mod cli;
pub mod cover;
pub mod decomposer;
pub mod error;
pub mod graph;
pub mod layout_io;

pub use cover::{
    brute_force_oracle, build_cover_matrix, solve_parallel, solve_sequential, Alpha, Component, CoverMatrix, CoverRow,
    LinkedMatrix, ParallelSchedule, SearchStatus, Solution, SolveOptions,
};
pub use decomposer::{
    decompose, evaluate_cost, verify_solution, DecomposeOptions, DecompositionStats, Engine, VerificationReport,
    Violation,
};
pub use error::{MpldError, Result};
pub use graph::{
    build_layout_graph, insert_stitch_candidates, recover_colors, simplify_graph, LayoutGraph, SimplifiedGraph, Vertex,
};
pub use layout_io::{parse_layout, Layout, ParseOptions, Rect};
