// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::cover::Solution;
use crate::decomposer::DecompositionStats;
use crate::error::{MpldError, Result};
use crate::graph::LayoutGraph;

use super::{svg, write_stats_csv, Layout};

/// A stitch cut on a feature plus the mask of the piece above the cut.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StitchRecord {
    pub id: u32,
    pub cut: i64,
    pub mask: u8,
}

/// Colored-layout file contents.
///
/// `COLOR <id> <mask>` gives the mask of the feature's first (lowest) piece;
/// every inserted stitch adds `STITCH <id> <cut> <mask>` with the mask of
/// the piece that starts at `cut`. `CONFLICT` lines list every conflict
/// edge whose endpoints share a mask, by feature id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColoredLayout {
    pub colors: Vec<(u32, u8)>,
    pub conflicts: Vec<(u32, u32)>,
    pub stitches: Vec<StitchRecord>,
}

impl ColoredLayout {
    pub fn from_solution(graph: &LayoutGraph, solution: &Solution) -> Result<Self> {
        if solution.colors.len() != graph.vertices.len() {
            return Err(MpldError::Invariant(format!(
                "solution colors {} vertices, graph has {}",
                solution.colors.len(),
                graph.vertices.len()
            )));
        }
        let mut out = ColoredLayout::default();
        for feature in &graph.features {
            let first = *feature
                .segments
                .first()
                .ok_or_else(|| MpldError::Invariant(format!("feature {} has no segments", feature.rect.id)))?;
            out.colors.push((feature.rect.id, solution.colors[first]));
            for &v in &feature.segments[1..] {
                let (cut, _) = graph.vertices[v].geometry.extent(feature.axis);
                out.stitches.push(StitchRecord { id: feature.rect.id, cut, mask: solution.colors[v] });
            }
        }
        out.conflicts = solution
            .conflicts
            .iter()
            .map(|&(u, v)| (graph.vertices[u].feature_id, graph.vertices[v].feature_id))
            .collect();
        Ok(out)
    }

    /// Expands the file records back into one color per graph vertex.
    pub fn vertex_colors(&self, graph: &LayoutGraph) -> Result<Vec<u8>> {
        let mut colors = vec![None; graph.vertices.len()];
        let by_id: std::collections::HashMap<u32, usize> =
            graph.features.iter().enumerate().map(|(i, f)| (f.rect.id, i)).collect();
        for &(id, mask) in &self.colors {
            let f = by_id.get(&id).ok_or_else(|| MpldError::Validation(format!("COLOR for unknown rect {id}")))?;
            colors[graph.features[*f].segments[0]] = Some(mask);
        }
        for s in &self.stitches {
            let f =
                by_id.get(&s.id).ok_or_else(|| MpldError::Validation(format!("STITCH for unknown rect {}", s.id)))?;
            let feature = &graph.features[*f];
            let v = feature
                .segments
                .iter()
                .copied()
                .find(|&v| graph.vertices[v].geometry.extent(feature.axis).0 == s.cut && v != feature.segments[0])
                .ok_or_else(|| MpldError::Validation(format!("rect {} has no stitch at {}", s.id, s.cut)))?;
            colors[v] = Some(s.mask);
        }
        colors
            .into_iter()
            .enumerate()
            .map(|(v, c)| {
                c.ok_or_else(|| {
                    let vx = &graph.vertices[v];
                    MpldError::Invariant(format!("no color for rect {} segment {}", vx.feature_id, vx.segment_index))
                })
            })
            .collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::new();
        for (id, mask) in &self.colors {
            writeln!(out, "COLOR {id} {mask}").unwrap();
        }
        for (a, b) in &self.conflicts {
            writeln!(out, "CONFLICT {a} {b}").unwrap();
        }
        for s in &self.stitches {
            writeln!(out, "STITCH {} {} {}", s.id, s.cut, s.mask).unwrap();
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn parse<R: Read>(source: R) -> Result<Self> {
        let mut out = ColoredLayout::default();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = text.split_whitespace().collect();
            let num = |i: usize| -> Result<i64> {
                toks.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| MpldError::Parse { line: lineno, msg: format!("bad field {i} in '{text}'") })
            };
            let arity = |n: usize| -> Result<()> {
                if toks.len() == n {
                    Ok(())
                } else {
                    Err(MpldError::Parse { line: lineno, msg: format!("expected {n} fields in '{text}'") })
                }
            };
            let id = |v: i64| -> Result<u32> {
                u32::try_from(v).map_err(|_| MpldError::Parse { line: lineno, msg: format!("bad id {v}") })
            };
            let mask = |v: i64| -> Result<u8> {
                u8::try_from(v).map_err(|_| MpldError::Parse { line: lineno, msg: format!("bad mask {v}") })
            };
            match toks[0] {
                "COLOR" => {
                    arity(3)?;
                    out.colors.push((id(num(1)?)?, mask(num(2)?)?));
                }
                "CONFLICT" => {
                    arity(3)?;
                    out.conflicts.push((id(num(1)?)?, id(num(2)?)?));
                }
                "STITCH" => {
                    arity(4)?;
                    out.stitches.push(StitchRecord { id: id(num(1)?)?, cut: num(2)?, mask: mask(num(3)?)? });
                }
                other => {
                    return Err(MpldError::Parse { line: lineno, msg: format!("unknown record '{other}'") });
                }
            }
        }
        Ok(out)
    }
}

/// Output targets for [`write_results`]; absent sinks are skipped.
#[derive(Default)]
pub struct OutputSinks<'a> {
    pub colored: Option<&'a mut dyn Write>,
    pub stats: Option<&'a mut dyn Write>,
    pub svg: Option<&'a mut dyn Write>,
}

pub fn write_results(
    layout: &Layout,
    graph: &LayoutGraph,
    solution: &Solution,
    stats: &DecompositionStats,
    sinks: OutputSinks<'_>,
) -> Result<()> {
    let colored = ColoredLayout::from_solution(graph, solution)?;
    let colored_ids: std::collections::HashSet<u32> = colored.colors.iter().map(|(id, _)| *id).collect();
    for r in &layout.rects {
        if !colored_ids.contains(&r.id) {
            return Err(MpldError::Invariant(format!("no color for rect {}", r.id)));
        }
    }
    if let Some(k) = solution.colors.iter().find(|&&c| c as usize >= layout.k) {
        return Err(MpldError::Invariant(format!("mask {k} outside [0, {})", layout.k)));
    }
    if let Some(w) = sinks.colored {
        colored.write(w)?;
    }
    if let Some(w) = sinks.stats {
        write_stats_csv(std::slice::from_ref(stats), w)?;
    }
    if let Some(w) = sinks.svg {
        w.write_all(svg::render(layout, graph, solution).as_bytes())?;
    }
    Ok(())
}
