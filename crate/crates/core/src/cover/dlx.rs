// SPDX-License-Identifier: Apache-2.0

//! Dancing links over the cover matrix.
//!
//! Node 0 is the root, nodes `1..=C` are column headers linked
//! horizontally in BFS order, and every row is a single node in its
//! column's vertical list. Covering a column unlinks its header; choosing a
//! row unlinks its affected rows from their columns. Both are undone by
//! relinking in reverse order.

use super::search::{ColumnPolicy, ColumnScan, CoverState};
use super::CoverMatrix;
use crate::error::{MpldError, Result};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct LinkedMatrix<'m> {
    m: &'m CoverMatrix,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub up: Vec<usize>,
    pub down: Vec<usize>,
    /// Live rows per column.
    pub len: Vec<usize>,
    covered: Vec<bool>,
    cover_stack: Vec<usize>,
    killer: Vec<usize>,
}

impl PartialEq for LinkedMatrix<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.m, other.m)
            && self.left == other.left
            && self.right == other.right
            && self.up == other.up
            && self.down == other.down
            && self.len == other.len
            && self.covered == other.covered
            && self.cover_stack == other.cover_stack
            && self.killer == other.killer
    }
}

impl Eq for LinkedMatrix<'_> {}

impl<'m> LinkedMatrix<'m> {
    pub fn new(m: &'m CoverMatrix) -> Self {
        let cols = m.num_columns;
        let nodes = 1 + cols + m.num_rows();
        let mut left: Vec<usize> = (0..nodes).collect();
        let mut right: Vec<usize> = (0..nodes).collect();
        let mut up: Vec<usize> = (0..nodes).collect();
        let mut down: Vec<usize> = (0..nodes).collect();

        let mut prev = 0;
        for &c in &m.column_order {
            let h = c + 1;
            right[prev] = h;
            left[h] = prev;
            prev = h;
        }
        right[prev] = 0;
        left[0] = prev;

        for c in 0..cols {
            let h = c + 1;
            let mut last = h;
            for r in m.column_rows(c) {
                let x = 1 + cols + r;
                down[last] = x;
                up[x] = last;
                last = x;
            }
            down[last] = h;
            up[h] = last;
        }
        let len = (0..cols).map(|c| m.column_rows(c).len()).collect();
        LinkedMatrix {
            m,
            left,
            right,
            up,
            down,
            len,
            covered: vec![false; cols],
            cover_stack: Vec::new(),
            killer: vec![NONE; m.num_rows()],
        }
    }

    #[inline]
    fn header(&self, col: usize) -> usize {
        col + 1
    }

    #[inline]
    fn node(&self, row: usize) -> usize {
        1 + self.m.num_columns + row
    }

    #[inline]
    fn row_of(&self, node: usize) -> Option<usize> {
        (node > self.m.num_columns).then(|| node - 1 - self.m.num_columns)
    }

    pub fn is_covered(&self, col: usize) -> bool {
        self.covered[col]
    }

    /// Uncovered columns in header-list (BFS) order.
    pub fn live_columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut h = self.right[0];
        while h != 0 {
            out.push(h - 1);
            h = self.right[h];
        }
        out
    }

    /// Live rows of `col` in list order.
    pub fn live_rows(&self, col: usize) -> Vec<usize> {
        let h = self.header(col);
        let mut out = Vec::new();
        let mut x = self.down[h];
        while x != h {
            out.push(self.row_of(x).expect("row node"));
            x = self.down[x];
        }
        out
    }

    /// Unlinks the column header: `L[R[x]] = L[x]`, `R[L[x]] = R[x]`.
    pub fn cover(&mut self, col: usize) -> Result<()> {
        if col >= self.m.num_columns || self.covered[col] {
            return Err(MpldError::Usage(format!("column {col} is not live")));
        }
        self.unlink_header(col);
        Ok(())
    }

    /// Relinks the most recently covered column: `L[R[x]] = x`, `R[L[x]] = x`.
    pub fn uncover(&mut self, col: usize) -> Result<()> {
        if self.cover_stack.last() != Some(&col) {
            return Err(MpldError::Usage(format!(
                "uncover({col}) out of order, last covered is {:?}",
                self.cover_stack.last()
            )));
        }
        self.relink_header(col);
        Ok(())
    }

    fn unlink_header(&mut self, col: usize) {
        let x = self.header(col);
        let (l, r) = (self.left[x], self.right[x]);
        self.left[r] = l;
        self.right[l] = r;
        self.covered[col] = true;
        self.cover_stack.push(col);
    }

    fn relink_header(&mut self, col: usize) {
        debug_assert_eq!(self.cover_stack.last(), Some(&col), "LIFO violation");
        let x = self.header(col);
        let (l, r) = (self.left[x], self.right[x]);
        self.left[r] = x;
        self.right[l] = x;
        self.covered[col] = false;
        self.cover_stack.pop();
    }

    /// First live column with exactly one live row, else the first live
    /// column in BFS order; `None` once every column is covered.
    pub fn select_column(&self) -> Option<usize> {
        self.scan(ColumnPolicy::Guided).selected
    }

    /// Includes `row`: hides every live row of an uncovered column that
    /// conflicts with it.
    pub fn cover_row(&mut self, row: usize) {
        let by = self.m.rows[row].feature_column;
        for &other in &self.m.rows[row].conflict_row_ids {
            let c = self.m.rows[other].feature_column;
            if self.covered[c] || self.killer[other] != NONE {
                continue;
            }
            let x = self.node(other);
            let (u, d) = (self.up[x], self.down[x]);
            self.down[u] = d;
            self.up[d] = u;
            self.len[c] -= 1;
            self.killer[other] = by;
        }
    }

    /// Exact inverse of [`cover_row`](Self::cover_row).
    pub fn uncover_row(&mut self, row: usize) {
        let by = self.m.rows[row].feature_column;
        for &other in self.m.rows[row].conflict_row_ids.iter().rev() {
            if self.killer[other] != by {
                continue;
            }
            let c = self.m.rows[other].feature_column;
            let x = self.node(other);
            let (u, d) = (self.up[x], self.down[x]);
            self.down[u] = x;
            self.up[d] = x;
            self.len[c] += 1;
            self.killer[other] = NONE;
        }
    }
}

impl CoverState for LinkedMatrix<'_> {
    fn scan(&self, policy: ColumnPolicy) -> ColumnScan {
        let mut zero_live = 0;
        let mut first = None;
        let mut single = None;
        let mut lowest = None;
        let mut h = self.right[0];
        while h != 0 {
            let c = h - 1;
            match self.len[c] {
                0 => zero_live += 1,
                1 if single.is_none() => single = Some(c),
                _ => {}
            }
            first.get_or_insert(c);
            if lowest.is_none_or(|l| c < l) {
                lowest = Some(c);
            }
            h = self.right[h];
        }
        let selected = match policy {
            ColumnPolicy::Guided => single.or(first),
            ColumnPolicy::Canonical => lowest,
        };
        ColumnScan { selected, zero_live }
    }

    fn cover_column(&mut self, col: usize, _depth: u32) {
        self.unlink_header(col);
    }

    fn uncover_column(&mut self, col: usize, _depth: u32) {
        self.relink_header(col);
    }

    fn first_live_row(&self, col: usize) -> Option<usize> {
        self.row_of(self.down[self.header(col)])
    }

    fn next_live_row(&self, _col: usize, row: usize) -> Option<usize> {
        self.row_of(self.down[self.node(row)])
    }

    fn is_live(&self, row: usize) -> bool {
        self.killer[row] == NONE
    }

    fn killer(&self, row: usize) -> Option<usize> {
        (self.killer[row] != NONE).then_some(self.killer[row])
    }

    fn cover_affected(&mut self, row: usize, _depth: u32) {
        self.cover_row(row);
    }

    fn uncover_affected(&mut self, row: usize, _depth: u32) {
        self.uncover_row(row);
    }
}
