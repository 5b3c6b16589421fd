// SPDX-License-Identifier: Apache-2.0

//! Flat-array cover state for data-parallel execution.
//!
//! Nothing is unlinked. Each column and row carries the search depth at
//! which it was removed (`NONE` while live) and each column a live-row
//! counter. Covering and restoring are element-wise passes over a row's
//! conflict list in CSR form: every element decides independently from its
//! own epoch, so the passes can run in any order or all at once on a
//! device. Column selection is a reduction over the column arrays.

use super::search::{ColumnPolicy, ColumnScan, CoverState};
use super::CoverMatrix;

pub const NONE: u32 = u32::MAX;

/// Element-wise passes; the only writes to shared counters are
/// decrements/increments that commute.
pub mod kernels {
    use super::NONE;

    /// Marks every live target row in an uncovered column as removed at
    /// `epoch` by `killer`, decrementing its column's live count.
    #[allow(clippy::too_many_arguments)]
    pub fn delete_rows(
        targets: &[u32],
        row_column: &[u32],
        col_epoch: &[u32],
        row_epoch: &mut [u32],
        row_killer: &mut [u32],
        live: &mut [u32],
        epoch: u32,
        killer: u32,
    ) {
        targets.iter().for_each(|&t| {
            let t = t as usize;
            let c = row_column[t] as usize;
            if row_epoch[t] == NONE && col_epoch[c] == NONE {
                row_epoch[t] = epoch;
                row_killer[t] = killer;
                live[c] -= 1;
            }
        });
    }

    /// Restores exactly the rows removed at `epoch`.
    pub fn recover_rows(
        targets: &[u32],
        row_column: &[u32],
        row_epoch: &mut [u32],
        row_killer: &mut [u32],
        live: &mut [u32],
        epoch: u32,
    ) {
        targets.iter().for_each(|&t| {
            let t = t as usize;
            if row_epoch[t] == epoch {
                row_epoch[t] = NONE;
                row_killer[t] = NONE;
                live[row_column[t] as usize] += 1;
            }
        });
    }

    /// Reduction over live columns: `(first single-row column by rank,
    /// first column by rank, lowest index, zero-live count)`.
    pub fn select_columns(
        col_epoch: &[u32],
        live: &[u32],
        rank: &[u32],
    ) -> (Option<usize>, Option<usize>, Option<usize>, usize) {
        let key = |c: usize| (rank[c], c);
        col_epoch.iter().enumerate().filter(|(_, &e)| e == NONE).map(|(c, _)| c).fold(
            (None, None, None, 0),
            |(single, first, lowest, zero), c| {
                let better = |cur: Option<usize>| {
                    if cur.is_none_or(|o| key(c) < key(o)) {
                        Some(c)
                    } else {
                        cur
                    }
                };
                (
                    if live[c] == 1 { better(single) } else { single },
                    better(first),
                    Some(lowest.map_or(c, |l: usize| l.min(c))),
                    zero + usize::from(live[c] == 0),
                )
            },
        )
    }
}

#[derive(Clone, Debug)]
pub struct FlatMatrix<'m> {
    m: &'m CoverMatrix,
    conflict_offsets: Vec<u32>,
    conflict_targets: Vec<u32>,
    row_column: Vec<u32>,
    /// Position of each column in the BFS order.
    rank: Vec<u32>,
    pub col_epoch: Vec<u32>,
    pub row_epoch: Vec<u32>,
    pub row_killer: Vec<u32>,
    pub live: Vec<u32>,
}

impl PartialEq for FlatMatrix<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.m, other.m)
            && self.col_epoch == other.col_epoch
            && self.row_epoch == other.row_epoch
            && self.row_killer == other.row_killer
            && self.live == other.live
    }
}

impl<'m> FlatMatrix<'m> {
    pub fn new(m: &'m CoverMatrix) -> Self {
        let mut conflict_offsets = Vec::with_capacity(m.num_rows() + 1);
        let mut conflict_targets = Vec::new();
        conflict_offsets.push(0);
        for row in &m.rows {
            conflict_targets.extend(row.conflict_row_ids.iter().map(|&r| r as u32));
            conflict_offsets.push(conflict_targets.len() as u32);
        }
        let mut rank = vec![0u32; m.num_columns];
        for (pos, &c) in m.column_order.iter().enumerate() {
            rank[c] = pos as u32;
        }
        FlatMatrix {
            m,
            conflict_offsets,
            conflict_targets,
            row_column: m.rows.iter().map(|r| r.feature_column as u32).collect(),
            rank,
            col_epoch: vec![NONE; m.num_columns],
            row_epoch: vec![NONE; m.num_rows()],
            row_killer: vec![NONE; m.num_rows()],
            live: (0..m.num_columns).map(|c| m.column_rows(c).len() as u32).collect(),
        }
    }

    fn targets(&self, row: usize) -> std::ops::Range<usize> {
        self.conflict_offsets[row] as usize..self.conflict_offsets[row + 1] as usize
    }
}

impl CoverState for FlatMatrix<'_> {
    fn scan(&self, policy: ColumnPolicy) -> ColumnScan {
        let (single, first, lowest, zero_live) = kernels::select_columns(&self.col_epoch, &self.live, &self.rank);
        let selected = match policy {
            ColumnPolicy::Guided => single.or(first),
            ColumnPolicy::Canonical => lowest,
        };
        ColumnScan { selected, zero_live }
    }

    fn cover_column(&mut self, col: usize, depth: u32) {
        debug_assert_eq!(self.col_epoch[col], NONE);
        self.col_epoch[col] = depth;
    }

    fn uncover_column(&mut self, col: usize, depth: u32) {
        debug_assert_eq!(self.col_epoch[col], depth, "LIFO violation");
        self.col_epoch[col] = NONE;
    }

    fn first_live_row(&self, col: usize) -> Option<usize> {
        self.m.column_rows(col).find(|&r| self.row_epoch[r] == NONE)
    }

    fn next_live_row(&self, col: usize, row: usize) -> Option<usize> {
        (row + 1..self.m.column_rows(col).end).find(|&r| self.row_epoch[r] == NONE)
    }

    fn is_live(&self, row: usize) -> bool {
        self.row_epoch[row] == NONE
    }

    fn killer(&self, row: usize) -> Option<usize> {
        (self.row_killer[row] != NONE).then_some(self.row_killer[row] as usize)
    }

    fn cover_affected(&mut self, row: usize, depth: u32) {
        let range = self.targets(row);
        let killer = self.row_column[row];
        kernels::delete_rows(
            &self.conflict_targets[range],
            &self.row_column,
            &self.col_epoch,
            &mut self.row_epoch,
            &mut self.row_killer,
            &mut self.live,
            depth,
            killer,
        );
    }

    fn uncover_affected(&mut self, row: usize, depth: u32) {
        let range = self.targets(row);
        kernels::recover_rows(
            &self.conflict_targets[range],
            &self.row_column,
            &mut self.row_epoch,
            &mut self.row_killer,
            &mut self.live,
            depth,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::tests::unsplit;
    use crate::cover::{build_cover_matrix, Alpha};

    #[test]
    fn delete_and_recover_are_order_independent() {
        let m = build_cover_matrix(&unsplit(4, &[(0, 1), (0, 2), (0, 3)]), 3, Alpha::DEFAULT).unwrap();
        let base = FlatMatrix::new(&m);
        let mut forward = base.clone();
        forward.cover_column(0, 0);
        forward.cover_affected(0, 0);

        let mut reversed = base.clone();
        reversed.cover_column(0, 0);
        let mut targets: Vec<u32> = reversed.conflict_targets[reversed.targets(0)].to_vec();
        targets.reverse();
        kernels::delete_rows(
            &targets,
            &reversed.row_column.clone(),
            &reversed.col_epoch.clone(),
            &mut reversed.row_epoch,
            &mut reversed.row_killer,
            &mut reversed.live,
            0,
            0,
        );
        assert_eq!(forward, reversed);
        assert_eq!(forward.live[1..], [2, 2, 2]);

        forward.uncover_affected(0, 0);
        forward.uncover_column(0, 0);
        assert_eq!(forward, base);
    }

    #[test]
    fn flat_and_linked_select_the_same_column() {
        let m = build_cover_matrix(&unsplit(3, &[(0, 1), (1, 2)]), 2, Alpha::DEFAULT).unwrap();
        let mut flat = FlatMatrix::new(&m);
        let mut linked = crate::cover::LinkedMatrix::new(&m);
        for p in [ColumnPolicy::Guided, ColumnPolicy::Canonical] {
            assert_eq!(flat.scan(p), linked.scan(p));
        }
        let row = m.column_rows(2).start;
        flat.cover_column(2, 0);
        flat.cover_affected(row, 0);
        linked.cover_column(2, 0);
        linked.cover_affected(row, 0);
        for p in [ColumnPolicy::Guided, ColumnPolicy::Canonical] {
            assert_eq!(flat.scan(p), linked.scan(p));
        }
    }
}
