// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic corpus and engine comparison.
//!
//! A corpus layout is a field of independent clusters separated by at least
//! twice the spacing. Each cluster is one of a handful of recipes whose
//! component structure is known: four mutually close squares (a 4-clique),
//! staggered grids of bars, long bars flanked at both ends (stitch sites),
//! plain chains (removed by simplification) and the two-stitch clique.

use std::fmt::Write as _;
use std::io::Write;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::{format_ratio, Alpha, ORACLE_LIMIT};
use crate::decomposer::{decompose, DecomposeOptions, Decomposition, Engine};
use crate::error::{MpldError, Result};
use crate::layout_io::{Layout, Rect};

/// Bumped whenever the same seed would produce a different corpus.
pub const GENERATOR_VERSION: &str = "synth-v1";

/// Largest component the brute-force oracle is run on during a bench.
pub const ORACLE_MAX_VERTICES: usize = 10;

type Shape = Vec<(i64, i64, i64, i64)>;

/// Generates a layout with at least `num_rects` rectangles. The corpus for a
/// given `(seed, num_rects)` does not depend on any other size requested.
pub fn generate_layout(num_rects: usize, seed: u64, k: usize, spacing_nm: i64, alpha: Alpha) -> Result<Layout> {
    if spacing_nm < 6 {
        return Err(MpldError::Parameter(format!("spacing {spacing_nm} too small for the generator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(num_rects as u64);
    let s = spacing_nm;
    let row_width = 160 * s;
    let mut rects = Vec::with_capacity(num_rects + 20);
    let (mut cx, mut cy, mut row_h) = (0i64, 0i64, 0i64);
    while rects.len() < num_rects {
        let shape = match rng.gen_range(0..10) {
            0 | 1 => clique(s),
            2..=5 => grid(&mut rng, s),
            6 | 7 => flanked_bar(&mut rng, s),
            8 => chain(&mut rng, s),
            _ => two_stitch_clique(s),
        };
        let x0 = shape.iter().map(|r| r.0).min().unwrap_or(0);
        let y0 = shape.iter().map(|r| r.1).min().unwrap_or(0);
        let w = shape.iter().map(|r| r.2).max().unwrap_or(0) - x0;
        let h = shape.iter().map(|r| r.3).max().unwrap_or(0) - y0;
        if cx > 0 && cx + w > row_width {
            cx = 0;
            cy += row_h + 2 * s;
            row_h = 0;
        }
        for (a, b, c, d) in shape {
            let id = rects.len() as u32;
            rects.push(Rect::new(id, cx + a - x0, cy + b - y0, cx + c - x0, cy + d - y0));
        }
        cx += w + 2 * s;
        row_h = row_h.max(h);
    }
    Layout::new(rects, spacing_nm, k, alpha)
}

fn clique(s: i64) -> Shape {
    let (w, g) = (s / 3, s / 3);
    vec![(0, 0, w, w), (w + g, 0, 2 * w + g, w), (0, w + g, w, 2 * w + g), (w + g, w + g, 2 * w + g, 2 * w + g)]
}

/// Rows of horizontal bars; odd rows are shifted so bars interlock.
fn grid(rng: &mut ChaCha8Rng, s: i64) -> Shape {
    let w = s / 3;
    let rows = rng.gen_range(1..=4);
    let cols = rng.gen_range(1..=5);
    let len = rng.gen_range(2 * w..=10 * w);
    let hgap = rng.gen_range(s / 3..=4 * s / 3);
    let vgap = rng.gen_range(s / 3..=4 * s / 3);
    let stagger = rng.gen_range(0..=len / 2);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows as i64 {
        let y = r * (w + vgap);
        let shift = if r % 2 == 1 { stagger } else { 0 };
        for c in 0..cols as i64 {
            let x = shift + c * (len + hgap);
            out.push((x, y, x + len, y + w));
        }
    }
    out
}

fn flanked_bar(rng: &mut ChaCha8Rng, s: i64) -> Shape {
    let w = s / 3;
    let len = rng.gen_range(3 * s..=5 * s);
    let arm = rng.gen_range(s..=3 * s / 2);
    let g = rng.gen_range(s / 3..s);
    let mut out = vec![(0, 0, len, w), (0, w + g, arm, 2 * w + g), (len - arm, w + g, len, 2 * w + g)];
    if rng.gen_bool(0.5) {
        // a square under the middle ties the flanks together
        let mid = len / 2;
        out.iter_mut().for_each(|r| {
            r.1 += w + g;
            r.3 += w + g;
        });
        out.push((mid - w / 2, 0, mid - w / 2 + w, w));
    }
    out
}

fn chain(rng: &mut ChaCha8Rng, s: i64) -> Shape {
    let w = s / 3;
    let n = rng.gen_range(2..=6);
    let gap = rng.gen_range(s / 3..s);
    (0..n as i64).map(|i| (i * (w + gap), 0, i * (w + gap) + w, 3 * w)).collect()
}

/// Four features that pairwise conflict; two of them admit a stitch.
fn two_stitch_clique(s: i64) -> Shape {
    [(130, 170, 150, 610), (250, 170, 270, 390), (260, 80, 280, 140), (170, 40, 230, 60)]
        .iter()
        .map(|&(a, b, c, d)| (a * s / 120, b * s / 120, c * s / 120, d * s / 120))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub k: usize,
    pub spacing_nm: i64,
    pub alpha: Alpha,
    pub workers: usize,
    pub items_per_group: usize,
    pub stitch_cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let base = DecomposeOptions::default();
        let layout = Layout::default();
        BenchConfig {
            sizes: vec![100, 1000],
            trials: 3,
            seed: 1,
            k: layout.k,
            spacing_nm: layout.spacing_nm,
            alpha: layout.alpha,
            workers: 1,
            items_per_group: base.items_per_group,
            stitch_cap: base.stitch_cap,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub layout: Layout,
    pub result: Decomposition,
    pub components: usize,
    pub largest_component: usize,
    pub oracle_cost: Option<Ratio<i64>>,
    /// Median `time_s` over the trials.
    pub sequential_s: f64,
    pub parallel_s: f64,
    pub oracle_s: Option<f64>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Runs every engine on every corpus size. Sequential and parallel results
/// must match exactly; the oracle only runs when every component is small.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.trials == 0 {
        return Err(MpldError::Parameter("trials must be positive".into()));
    }
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &size in &cfg.sizes {
        let name = format!("synth-{size}");
        let layout = generate_layout(size, cfg.seed, cfg.k, cfg.spacing_nm, cfg.alpha)?;
        let opts = |engine| DecomposeOptions {
            engine,
            workers: cfg.workers,
            items_per_group: cfg.items_per_group,
            stitch_cap: cfg.stitch_cap,
            name: name.clone(),
            ..Default::default()
        };
        let mut seq_times = Vec::new();
        let mut par_times = Vec::new();
        let mut first: Option<Decomposition> = None;
        for _ in 0..cfg.trials {
            let seq = decompose(&layout, &opts(Engine::Sequential))?;
            let par = decompose(&layout, &opts(Engine::Parallel))?;
            if seq.solution != par.solution {
                return Err(MpldError::Invariant(format!("{name}: sequential and parallel solutions differ")));
            }
            seq_times.push(seq.stats.time_s);
            par_times.push(par.stats.time_s);
            match &first {
                Some(f) if f.solution != seq.solution => {
                    return Err(MpldError::Invariant(format!("{name}: solution changed between trials")));
                }
                Some(_) => {}
                None => first = Some(seq),
            }
        }
        let result = first.expect("at least one trial");
        let sizes: Vec<usize> = result.stats.per_component.iter().map(|c| c.size).collect();
        let largest_component = sizes.iter().copied().max().unwrap_or(0);
        let oracle_fits = largest_component <= ORACLE_MAX_VERTICES
            && (cfg.k as u128).checked_pow(largest_component as u32).is_some_and(|n| n <= ORACLE_LIMIT as u128);
        let (oracle_cost, oracle_s) = if oracle_fits {
            let mut times = Vec::new();
            let mut cost = None;
            for _ in 0..cfg.trials {
                let o = decompose(&layout, &opts(Engine::Oracle))?;
                times.push(o.stats.time_s);
                cost = Some(o.solution.cost);
            }
            (cost, Some(median(times)))
        } else {
            (None, None)
        };
        log::info!("{name}: {} components, largest {largest_component}", sizes.len());
        rows.push(BenchRow {
            name,
            layout,
            components: sizes.len(),
            largest_component,
            oracle_cost,
            sequential_s: median(seq_times),
            parallel_s: median(par_times),
            oracle_s,
            result,
        });
    }
    Ok(rows)
}

/// Deterministic per-layout results: counts, costs and search effort.
pub fn write_results_csv<W: Write>(cfg: &BenchConfig, rows: &[BenchRow], mut w: W) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "# generator={GENERATOR_VERSION} seed={} k={} spacing={} alpha={} stitch_cap={}",
        cfg.seed, cfg.k, cfg.spacing_nm, cfg.alpha, cfg.stitch_cap
    )
    .unwrap();
    out.push_str("name,rects,vertices,edges,components,largest_component,stitches,conflicts,cost,oracle_cost,nodes\n");
    for r in rows {
        let s = &r.result.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.name,
            r.layout.rects.len(),
            s.vertices,
            s.edges,
            r.components,
            r.largest_component,
            s.stitches,
            s.conflicts,
            format_ratio(r.result.solution.cost),
            r.oracle_cost.map(format_ratio).unwrap_or_else(|| "NA".into()),
            r.result.solution.nodes
        )
        .unwrap();
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Wall-clock medians per engine and a closing row of mean time ratios
/// against the sequential engine.
pub fn write_timing_csv<W: Write>(cfg: &BenchConfig, rows: &[BenchRow], mut w: W) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# trials={} workers={} items_per_group={}", cfg.trials, cfg.workers, cfg.items_per_group).unwrap();
    out.push_str("name,sequential_s,parallel_s,oracle_s\n");
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    let (mut par, mut ora, mut ora_n) = (0.0, 0.0, 0usize);
    for r in rows {
        let o = r.oracle_s.map(|t| format!("{t:.6}")).unwrap_or_else(|| "NA".into());
        writeln!(out, "{},{:.6},{:.6},{o}", r.name, r.sequential_s, r.parallel_s).unwrap();
        par += ratio(r.parallel_s, r.sequential_s);
        if let Some(t) = r.oracle_s {
            ora += ratio(t, r.sequential_s);
            ora_n += 1;
        }
    }
    if !rows.is_empty() {
        let o = if ora_n > 0 { format!("{:.4}", ora / ora_n as f64) } else { "NA".into() };
        writeln!(out, "ratio,1.0000,{:.4},{o}", par / rows.len() as f64).unwrap();
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
