// SPDX-License-Identifier: Apache-2.0

//! Layout files, colored results and statistics.
//!
//! The layout format is line oriented:
//!
//! ```text
//! # comment
//! K 3
//! SPACING 120
//! ALPHA 0.1
//! RECT <id> <x_lo> <y_lo> <x_hi> <y_hi>
//! ```
//!
//! Header lines are optional and default to `K 3`, `SPACING 120` and
//! `ALPHA 0.1`. Coordinates are integer nanometers.

mod colored;
pub mod svg;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

pub use colored::{write_results, ColoredLayout, OutputSinks, StitchRecord};

use crate::cover::Alpha;
use crate::decomposer::DecompositionStats;
use crate::error::{MpldError, Result};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_SPACING_NM: i64 = 120;

/// An axis-aligned rectangle, closed on all sides.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub id: u32,
    pub x_lo: i64,
    pub y_lo: i64,
    pub x_hi: i64,
    pub y_hi: i64,
}

/// Axis of a rectangle, used for stitch placement.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Rect {
    pub fn new(id: u32, x_lo: i64, y_lo: i64, x_hi: i64, y_hi: i64) -> Self {
        Rect { id, x_lo, y_lo, x_hi, y_hi }
    }

    pub fn width(&self) -> i64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> i64 {
        self.y_hi - self.y_lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.x_lo >= self.x_hi || self.y_lo >= self.y_hi
    }

    /// Squared minimum Euclidean distance between the two closed rectangles.
    pub fn distance_sq(&self, other: &Rect) -> i64 {
        let dx = (other.x_lo - self.x_hi).max(self.x_lo - other.x_hi).max(0);
        let dy = (other.y_lo - self.y_hi).max(self.y_lo - other.y_hi).max(0);
        dx * dx + dy * dy
    }

    /// True when the interiors intersect. Touching edges do not overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_lo < other.x_hi && other.x_lo < self.x_hi && self.y_lo < other.y_hi && other.y_lo < self.y_hi
    }

    /// The longer axis; squares use `X`.
    pub fn long_axis(&self) -> Axis {
        if self.width() >= self.height() {
            Axis::X
        } else {
            Axis::Y
        }
    }

    pub fn extent(&self, axis: Axis) -> (i64, i64) {
        match axis {
            Axis::X => (self.x_lo, self.x_hi),
            Axis::Y => (self.y_lo, self.y_hi),
        }
    }

    /// Splits at `cut` along `axis`, returning the low and high pieces.
    pub fn split(&self, axis: Axis, cut: i64) -> (Rect, Rect) {
        let (mut lo, mut hi) = (*self, *self);
        match axis {
            Axis::X => {
                lo.x_hi = cut;
                hi.x_lo = cut;
            }
            Axis::Y => {
                lo.y_hi = cut;
                hi.y_lo = cut;
            }
        }
        (lo, hi)
    }
}

/// A single-layer layout plus decomposition parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub rects: Vec<Rect>,
    pub spacing_nm: i64,
    pub k: usize,
    pub alpha: Alpha,
}

impl Default for Layout {
    fn default() -> Self {
        Layout { rects: Vec::new(), spacing_nm: DEFAULT_SPACING_NM, k: DEFAULT_K, alpha: Alpha::DEFAULT }
    }
}

impl Layout {
    pub fn new(rects: Vec<Rect>, spacing_nm: i64, k: usize, alpha: Alpha) -> Result<Self> {
        let layout = Layout { rects, spacing_nm, k, alpha };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spacing_nm <= 0 {
            return Err(MpldError::Validation(format!("spacing must be positive, got {}", self.spacing_nm)));
        }
        if self.k < 2 {
            return Err(MpldError::Validation(format!("mask count must be at least 2, got {}", self.k)));
        }
        let mut seen = HashSet::with_capacity(self.rects.len());
        for r in &self.rects {
            if r.is_degenerate() {
                return Err(MpldError::Validation(format!("rect {} is degenerate", r.id)));
            }
            if !seen.insert(r.id) {
                return Err(MpldError::Validation(format!("duplicate rect id {}", r.id)));
            }
        }
        Ok(())
    }

    /// Serializes header and rectangles in the layout file format.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::new();
        writeln!(out, "K {}", self.k).unwrap();
        writeln!(out, "SPACING {}", self.spacing_nm).unwrap();
        writeln!(out, "ALPHA {}", self.alpha).unwrap();
        for r in &self.rects {
            writeln!(out, "RECT {} {} {} {} {}", r.id, r.x_lo, r.y_lo, r.x_hi, r.y_hi).unwrap();
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Values that take precedence over the file header.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub k: Option<usize>,
    pub spacing_nm: Option<i64>,
    pub alpha: Option<Alpha>,
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| MpldError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| MpldError::Parse { line, msg: format!("bad {what} '{tok}'") })
}

pub fn parse_layout<R: Read>(source: R, options: &ParseOptions) -> Result<Layout> {
    let mut layout = Layout::default();
    let reader = BufReader::new(source);
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_whitespace();
        let keyword = toks.next().unwrap_or_default();
        match keyword {
            "K" => layout.k = parse_field(toks.next(), lineno, "mask count")?,
            "SPACING" => layout.spacing_nm = parse_field(toks.next(), lineno, "spacing")?,
            "ALPHA" => {
                let tok = toks.next();
                layout.alpha = tok
                    .ok_or_else(|| MpldError::Parse { line: lineno, msg: "missing alpha".into() })?
                    .parse()
                    .map_err(|e: MpldError| MpldError::Parse { line: lineno, msg: e.to_string() })?;
            }
            "RECT" => {
                let id = parse_field(toks.next(), lineno, "rect id")?;
                let x_lo = parse_field(toks.next(), lineno, "x_lo")?;
                let y_lo = parse_field(toks.next(), lineno, "y_lo")?;
                let x_hi = parse_field(toks.next(), lineno, "x_hi")?;
                let y_hi = parse_field(toks.next(), lineno, "y_hi")?;
                let r = Rect::new(id, x_lo, y_lo, x_hi, y_hi);
                if r.is_degenerate() {
                    return Err(MpldError::Validation(format!("line {lineno}: rect {id} is degenerate")));
                }
                layout.rects.push(r);
            }
            other => {
                return Err(MpldError::Parse { line: lineno, msg: format!("unknown record '{other}'") });
            }
        }
        if let Some(extra) = toks.next() {
            return Err(MpldError::Parse { line: lineno, msg: format!("unexpected token '{extra}'") });
        }
    }
    if let Some(k) = options.k {
        layout.k = k;
    }
    if let Some(s) = options.spacing_nm {
        layout.spacing_nm = s;
    }
    if let Some(a) = options.alpha {
        layout.alpha = a;
    }
    layout.validate()?;
    Ok(layout)
}

/// Writes the stats CSV header followed by one row per record.
pub fn write_stats_csv<W: Write>(rows: &[DecompositionStats], mut w: W) -> Result<()> {
    let mut out = String::from("name,vertices,edges,time_s,stitches,conflicts\n");
    for s in rows {
        writeln!(out, "{},{},{},{:.6},{},{}", s.name, s.vertices, s.edges, s.time_s, s.stitches, s.conflicts).unwrap();
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
