// SPDX-License-Identifier: Apache-2.0

//! Component-level parallelism.
//!
//! Work items are laid out like thread blocks: item `(group, slot)` has work
//! index `group * items_per_group + slot`. Workers claim work indices from a
//! shared counter in increasing order, so dispatch follows the index law no
//! matter how the item list itself is ordered. Results are keyed by
//! component id.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{solve_flat, CoverMatrix, Solution, SolveOptions};
use crate::error::{MpldError, Result};

/// Threads per block in the reference GPU setup; scheduling only.
pub const DEFAULT_ITEMS_PER_GROUP: usize = 32;

const WORKER_STACK: usize = 256 << 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct WorkItem {
    pub component_id: usize,
    pub group: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelSchedule {
    work_items: Vec<WorkItem>,
    items_per_group: usize,
    /// `by_index[work_index]` is the position of that item in `work_items`.
    by_index: Vec<usize>,
}

impl ParallelSchedule {
    /// Component `i` gets work index `i`.
    pub fn new(num_components: usize, items_per_group: usize) -> Result<Self> {
        if items_per_group == 0 {
            return Err(MpldError::Parameter("items_per_group must be positive".into()));
        }
        let items = (0..num_components)
            .map(|i| WorkItem { component_id: i, group: i / items_per_group, slot: i % items_per_group })
            .collect();
        Self::from_items(items, items_per_group)
    }

    /// Validates that components and work indices are both in bijection with
    /// `0..items.len()`.
    pub fn from_items(work_items: Vec<WorkItem>, items_per_group: usize) -> Result<Self> {
        if items_per_group == 0 {
            return Err(MpldError::Parameter("items_per_group must be positive".into()));
        }
        let n = work_items.len();
        let mut by_index = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        for (pos, item) in work_items.iter().enumerate() {
            if item.slot >= items_per_group {
                return Err(MpldError::Parameter(format!("slot {} >= items_per_group {items_per_group}", item.slot)));
            }
            let idx = item.group * items_per_group + item.slot;
            if idx >= n || by_index[idx] != usize::MAX {
                return Err(MpldError::Parameter(format!("work index {idx} out of range or repeated")));
            }
            if item.component_id >= n || seen[item.component_id] {
                return Err(MpldError::Parameter(format!("component {} missing or repeated", item.component_id)));
            }
            by_index[idx] = pos;
            seen[item.component_id] = true;
        }
        Ok(ParallelSchedule { work_items, items_per_group, by_index })
    }

    pub fn work_items(&self) -> &[WorkItem] {
        &self.work_items
    }

    pub fn items_per_group(&self) -> usize {
        self.items_per_group
    }

    pub fn len(&self) -> usize {
        self.work_items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.work_items.is_empty()
    }

    pub fn work_index(&self, item: &WorkItem) -> usize {
        item.group * self.items_per_group + item.slot
    }

    /// Component handled at `work_index`.
    pub fn component_at(&self, work_index: usize) -> usize {
        self.work_items[self.by_index[work_index]].component_id
    }

    /// Same schedule with the item list shuffled.
    pub fn shuffled(&self, seed: u64) -> Self {
        let mut items = self.work_items.clone();
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_items(items, self.items_per_group).expect("a permutation keeps the bijection")
    }

    /// Shuffles which component sits at which work index.
    pub fn reassigned(&self, seed: u64) -> Self {
        let mut ids: Vec<usize> = self.work_items.iter().map(|w| w.component_id).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let items = self.work_items.iter().zip(ids).map(|(w, component_id)| WorkItem { component_id, ..*w }).collect();
        Self::from_items(items, self.items_per_group).expect("a permutation keeps the bijection")
    }
}

/// Runs `task(component_id)` for every item on `workers` threads. A panic
/// in one task becomes an error for that component only.
pub fn run_schedule<T, F>(schedule: &ParallelSchedule, workers: usize, task: F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers == 0 {
        return Err(MpldError::Parameter("workers must be positive".into()));
    }
    let n = schedule.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for w in 0..workers.min(n.max(1)) {
            let (next, results, task) = (&next, &results, &task);
            let handle = thread::Builder::new()
                .name(format!("mpld-worker-{w}"))
                .stack_size(WORKER_STACK)
                .spawn_scoped(scope, move || loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= n {
                        break;
                    }
                    let component = schedule.component_at(index);
                    let out = catch_unwind(AssertUnwindSafe(|| task(component))).map_err(|payload| {
                        let msg = payload
                            .downcast_ref::<&str>()
                            .map(|s| s.to_string())
                            .or_else(|| payload.downcast_ref::<String>().cloned())
                            .unwrap_or_else(|| "panic".into());
                        MpldError::Worker { component, msg }
                    });
                    results.lock().unwrap_or_else(|e| e.into_inner())[component] = Some(out);
                })?;
            handles.push(handle);
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    })?;
    Ok(results
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .enumerate()
        .map(|(component, r)| r.unwrap_or_else(|| Err(MpldError::Worker { component, msg: "not executed".into() })))
        .collect())
}

/// Solves one flat-array search per component across `workers` threads.
/// Output `i` belongs to component `i`.
pub fn solve_parallel(
    matrices: &[CoverMatrix],
    schedule: &ParallelSchedule,
    workers: usize,
    options: &SolveOptions,
) -> Result<Vec<Result<Solution>>> {
    if schedule.len() != matrices.len() {
        return Err(MpldError::Parameter(format!(
            "schedule has {} items for {} matrices",
            schedule.len(),
            matrices.len()
        )));
    }
    run_schedule(schedule, workers, |c| solve_flat(&matrices[c], options))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_law_and_bijection() {
        let s = ParallelSchedule::new(70, 32).unwrap();
        let item = s.work_items()[65];
        assert_eq!((item.group, item.slot), (2, 1));
        assert_eq!(s.work_index(&item), 65);
        let shuffled = s.shuffled(9);
        assert_ne!(shuffled.work_items(), s.work_items());
        for i in 0..70 {
            assert_eq!(shuffled.component_at(i), s.component_at(i));
        }
        let moved = s.reassigned(3);
        let mut comps: Vec<usize> = (0..70).map(|i| moved.component_at(i)).collect();
        comps.sort_unstable();
        assert_eq!(comps, (0..70).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_broken_schedules() {
        let dup =
            vec![WorkItem { component_id: 0, group: 0, slot: 0 }, WorkItem { component_id: 0, group: 0, slot: 1 }];
        assert!(ParallelSchedule::from_items(dup, 4).is_err());
        let gap = vec![WorkItem { component_id: 0, group: 1, slot: 0 }];
        assert!(ParallelSchedule::from_items(gap, 4).is_err());
        assert!(ParallelSchedule::new(3, 0).is_err());
    }

    #[test]
    fn panicking_task_only_fails_its_component() {
        let s = ParallelSchedule::new(5, 2).unwrap();
        let out = run_schedule(&s, 3, |c| {
            if c == 3 {
                panic!("boom");
            }
            c * 10
        })
        .unwrap();
        for (c, r) in out.iter().enumerate() {
            match r {
                Ok(v) => assert_eq!(*v, c * 10),
                Err(MpldError::Worker { component, msg }) => {
                    assert_eq!((*component, msg.as_str()), (3, "boom"));
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(out[3].is_err());
    }
}
