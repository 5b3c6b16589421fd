// SPDX-License-Identifier: Apache-2.0

use super::{Alpha, Component, Solution};
use crate::error::{MpldError, Result};

/// Largest number of colorings the oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 10_000_000;

/// Enumerates every coloring of the component in lexicographic order and
/// returns the first one of minimum cost.
pub fn brute_force_oracle(component: &Component, k: usize, alpha: Alpha) -> Result<Solution> {
    if !(2..=256).contains(&k) {
        return Err(MpldError::Parameter(format!("mask count {k} out of range")));
    }
    let n = component.len();
    let total = (k as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= ORACLE_LIMIT)
        .ok_or_else(|| MpldError::Size(format!("{k}^{n} colorings exceed the oracle limit of {ORACLE_LIMIT}")))?;
    let scale = alpha.scale();
    let mut colors = vec![0u8; n];
    let mut best: Option<(i64, Vec<u8>)> = None;
    for _ in 0..total {
        let conflicts = component.conflict_edges.iter().filter(|&&(u, v)| colors[u] == colors[v]).count();
        let stitches = component.stitch_edges.iter().filter(|&&(u, v)| colors[u] != colors[v]).count();
        let cost = scale.of(conflicts as i64, stitches as i64);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, colors.clone()));
        }
        // odometer, last vertex fastest
        for slot in colors.iter_mut().rev() {
            *slot += 1;
            if (*slot as usize) < k {
                break;
            }
            *slot = 0;
        }
    }
    let (_, colors) = best.expect("at least one coloring");
    Ok(Solution::from_colors(colors, &component.conflict_edges, &component.stitch_edges, alpha))
}
