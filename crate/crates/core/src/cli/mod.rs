// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when verification finds violations, 2 for
//! usage, parse and other errors.

pub mod bench;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cover::{format_ratio, Alpha, Solution, DEFAULT_ITEMS_PER_GROUP};
use crate::decomposer::{decompose, verify_solution, DecomposeOptions, Engine};
use crate::error::{MpldError, Result};
use crate::graph::{build_layout_graph, LayoutGraph, DEFAULT_SEGMENT_CAP};
use crate::layout_io::{
    parse_layout, write_results, write_stats_csv, ColoredLayout, Layout, OutputSinks, ParseOptions,
};

use bench::{run_bench, write_results_csv, write_timing_csv, BenchConfig};

#[derive(Parser, Debug)]
#[command(name = "mpld", version, about = "Multiple-patterning layout decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assign masks to every rectangle of one or more layouts.
    Decompose(DecomposeArgs),
    /// Re-check a colored file against its layout.
    Verify(VerifyArgs),
    /// Generate a seeded corpus and compare engines on it.
    Bench(BenchArgs),
}

/// Values given here override the layout file header.
#[derive(Args, Debug, Clone)]
struct LayoutArgs {
    /// Number of masks.
    #[arg(long)]
    k: Option<usize>,
    /// Minimum same-mask spacing in nm.
    #[arg(long)]
    spacing: Option<i64>,
    /// Stitch weight, as a decimal or n/d.
    #[arg(long)]
    alpha: Option<Alpha>,
}

impl LayoutArgs {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions { k: self.k, spacing_nm: self.spacing, alpha: self.alpha }
    }
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    #[arg(long, default_value = "sequential")]
    engine: Engine,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long = "items-per-group", default_value_t = DEFAULT_ITEMS_PER_GROUP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    items_per_group: u64,
    /// Maximum pieces per feature; 1 disables stitch insertion.
    #[arg(long = "stitch-cap", default_value_t = DEFAULT_SEGMENT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    stitch_cap: u64,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Search-node budget per component.
    #[arg(long)]
    budget: Option<u64>,
    /// Seed for shuffling the parallel schedule.
    #[arg(long)]
    seed: Option<u64>,
    /// Colored output; a directory when several inputs are given. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stats CSV, one row per input.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// SVG rendering; a directory when several inputs are given.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Layout file.
    #[arg(long)]
    input: PathBuf,
    /// Colored file to check.
    #[arg(long)]
    colored: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Corpus sizes in rectangles.
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    layout: LayoutArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long = "items-per-group", default_value_t = DEFAULT_ITEMS_PER_GROUP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    items_per_group: u64,
    #[arg(long = "stitch-cap", default_value_t = DEFAULT_SEGMENT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    stitch_cap: u64,
    /// Results CSV (deterministic). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timing CSV with per-engine seconds and a ratio row. Defaults to stderr.
    #[arg(long)]
    timing: Option<PathBuf>,
    /// Directory for the generated layouts and their colored outputs.
    #[arg(long = "emit-dir")]
    emit_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("MPLD_LOG")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Decompose(a) => cmd_decompose(a).map(|()| 0),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a).map(|()| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mpld: {e}");
            match e {
                MpldError::Verification(_) => 1,
                _ => 2,
            }
        }
    }
}

fn read_layout(path: &Path, args: &LayoutArgs) -> Result<Layout> {
    let file = File::open(path).map_err(|e| MpldError::Usage(format!("{}: {e}", path.display())))?;
    parse_layout(file, &args.parse_options()).map_err(|e| match e {
        MpldError::Parse { line, msg } => MpldError::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "layout".into())
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let many = a.input.len() > 1;
    let mut all_stats = Vec::with_capacity(a.input.len());
    for input in &a.input {
        let layout = read_layout(input, &a.layout)?;
        let name = stem(input);
        let opts = DecomposeOptions {
            engine: a.engine.engine,
            workers: a.engine.workers as usize,
            items_per_group: a.engine.items_per_group as usize,
            stitch_cap: a.engine.stitch_cap as usize,
            budget: a.budget,
            schedule_seed: a.seed,
            name: name.clone(),
        };
        let d = decompose(&layout, &opts)?;
        log::info!(
            "{name}: cost {} ({} conflicts, {} stitches)",
            format_ratio(d.solution.cost),
            d.stats.conflicts,
            d.stats.stitches
        );
        let target = |base: &Option<PathBuf>, ext: &str| -> Option<PathBuf> {
            base.as_ref().map(|p| if many { p.join(format!("{name}.{ext}")) } else { p.clone() })
        };
        let mut colored_file = target(&a.out, "col").map(|p| create(&p)).transpose()?;
        let mut svg_file = target(&a.svg, "svg").map(|p| create(&p)).transpose()?;
        let stdout = io::stdout();
        let mut stdout_lock;
        let colored: &mut dyn Write = match colored_file.as_mut() {
            Some(f) => f,
            None => {
                stdout_lock = stdout.lock();
                &mut stdout_lock
            }
        };
        let sinks =
            OutputSinks { colored: Some(colored), stats: None, svg: svg_file.as_mut().map(|f| f as &mut dyn Write) };
        write_results(&layout, &d.graph, &d.solution, &d.stats, sinks)?;
        if let Some(f) = colored_file.as_mut() {
            f.flush()?;
        }
        if let Some(f) = svg_file.as_mut() {
            f.flush()?;
        }
        all_stats.push(d.stats);
    }
    if let Some(p) = &a.stats {
        let mut f = create(p)?;
        write_stats_csv(&all_stats, &mut f)?;
        f.flush()?;
    }
    Ok(())
}

/// Rebuilds the decomposed graph from the layout and the file's own stitch
/// cuts, so the check does not depend on the stitch policy used to produce it.
fn graph_from_colored(layout: &Layout, colored: &ColoredLayout) -> Result<LayoutGraph> {
    let base = build_layout_graph(layout)?;
    let mut features = Vec::with_capacity(base.features.len());
    for f in &base.features {
        let mut cuts: Vec<i64> = colored.stitches.iter().filter(|s| s.id == f.rect.id).map(|s| s.cut).collect();
        cuts.sort_unstable();
        let (lo, hi) = f.rect.extent(f.axis);
        if cuts.windows(2).any(|w| w[0] == w[1]) || cuts.iter().any(|&c| c <= lo || c >= hi) {
            return Err(MpldError::Verification(format!("rect {} has an invalid stitch cut", f.rect.id)));
        }
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut rest = f.rect;
        for c in cuts {
            let (a, b) = rest.split(f.axis, c);
            pieces.push(a);
            rest = b;
        }
        pieces.push(rest);
        features.push((f.rect, pieces));
    }
    let known: std::collections::HashSet<u32> = base.features.iter().map(|f| f.rect.id).collect();
    if let Some(s) = colored.stitches.iter().find(|s| !known.contains(&s.id)) {
        return Err(MpldError::Verification(format!("STITCH for unknown rect {}", s.id)));
    }
    Ok(LayoutGraph::from_segments(features, &base.feature_conflicts(), layout.spacing_nm, layout.k, layout.alpha))
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let layout = read_layout(&a.input, &a.layout)?;
    let file = File::open(&a.colored).map_err(|e| MpldError::Usage(format!("{}: {e}", a.colored.display())))?;
    let colored = ColoredLayout::parse(file)?;
    let graph = graph_from_colored(&layout, &colored)?;
    let mut problems = Vec::new();
    let mut ids: Vec<u32> = colored.colors.iter().map(|c| c.0).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        problems.push(format!("rect {} colored twice", w[0]));
    }
    match colored.vertex_colors(&graph) {
        Err(e) => problems.push(e.to_string()),
        Ok(colors) => {
            if let Some((v, &c)) = colors.iter().enumerate().find(|(_, &c)| c as usize >= layout.k) {
                problems.push(format!("rect {} has mask {c}, k = {}", graph.vertices[v].feature_id, layout.k));
            } else {
                let solution = Solution::from_colors(colors, &graph.conflict_edges, &graph.stitch_edges, layout.alpha);
                let report = verify_solution(&solution, &graph);
                problems.extend(report.violations.iter().map(|v| v.to_string()));
                let expected = ColoredLayout::from_solution(&graph, &solution)?;
                let sorted = |v: &[(u32, u32)]| {
                    let mut v: Vec<(u32, u32)> = v.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                    v.sort_unstable();
                    v
                };
                let (want, got) = (sorted(&expected.conflicts), sorted(&colored.conflicts));
                if want != got {
                    problems.push(format!("CONFLICT lines {got:?} but the coloring has {want:?}"));
                }
                println!(
                    "cost {} ({} conflicts, {} stitches)",
                    format_ratio(solution.cost),
                    solution.conflicts.len(),
                    solution.stitches.len()
                );
            }
        }
    }
    if problems.is_empty() {
        return Ok(0);
    }
    for p in &problems {
        eprintln!("violation: {p}");
    }
    Ok(1)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let defaults = Layout::default();
    let cfg = BenchConfig {
        sizes: a.sizes,
        trials: a.trials as usize,
        seed: a.seed,
        k: a.layout.k.unwrap_or(defaults.k),
        spacing_nm: a.layout.spacing.unwrap_or(defaults.spacing_nm),
        alpha: a.layout.alpha.unwrap_or(defaults.alpha),
        workers: a.workers as usize,
        items_per_group: a.items_per_group as usize,
        stitch_cap: a.stitch_cap as usize,
    };
    let rows = run_bench(&cfg)?;
    match &a.out {
        Some(p) => {
            let mut f = create(p)?;
            write_results_csv(&cfg, &rows, &mut f)?;
            f.flush()?;
        }
        None => write_results_csv(&cfg, &rows, io::stdout().lock())?,
    }
    match &a.timing {
        Some(p) => {
            let mut f = create(p)?;
            write_timing_csv(&cfg, &rows, &mut f)?;
            f.flush()?;
        }
        None => write_timing_csv(&cfg, &rows, io::stderr().lock())?,
    }
    if let Some(dir) = &a.emit_dir {
        fs::create_dir_all(dir)?;
        for r in &rows {
            let mut lay = create(&dir.join(format!("{}.lay", r.name)))?;
            r.layout.write(&mut lay)?;
            lay.flush()?;
            let mut col = create(&dir.join(format!("{}.col", r.name)))?;
            ColoredLayout::from_solution(&r.result.graph, &r.result.solution)?.write(&mut col)?;
            col.flush()?;
        }
    }
    Ok(())
}
