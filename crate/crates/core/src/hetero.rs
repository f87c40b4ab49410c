//! Heterogeneous-worker support: capacity-proportional virtualization,
//! ordered multi-task assignment and partial-computation verification.
//!
//! A physical worker with integer capacity c behaves like c consecutive
//! virtual nodes of the weakest type: it stores c encoded submatrices and
//! computes them in slot order. Splitting the sorted capacity list at a
//! boundary index gives `k = sum of capacities before the boundary` and
//! `s = the rest`, and the homogeneous plan on `n = k + s` virtual nodes is
//! resilient to the loss of any s virtual slots. Any Q = n - s = k block
//! products collected in slot order suffice to decode (Q/Delta = 1).

use crate::decoder::stacked_rows_full_rank;
use crate::encoder::{encode_tasks, EncodeInput, EncodingPlan, WorkerTask};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Physical workers with integer capacity multipliers, weakest type = 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeterogeneousProfile {
    /// (worker id, capacity), sorted non-ascending by capacity.
    pub workers: Vec<(usize, usize)>,
}

impl HeterogeneousProfile {
    /// Normalize a capacity list: stable sort non-ascending, so ties keep
    /// the caller's order. The weakest capacity must be exactly 1.
    pub fn new(workers: Vec<(usize, usize)>) -> Result<Self> {
        if workers.is_empty() {
            return Err(Error::InvalidProfile("no workers".into()));
        }
        if workers.iter().any(|&(_, c)| c == 0) {
            return Err(Error::InvalidProfile("capacities must be >= 1".into()));
        }
        let min = workers.iter().map(|&(_, c)| c).min().unwrap();
        if min != 1 {
            return Err(Error::InvalidProfile(format!(
                "weakest capacity must be 1, found {min}"
            )));
        }
        let mut sorted = workers;
        sorted.sort_by(|a, b| b.1.cmp(&a.1));
        Ok(Self { workers: sorted })
    }

    pub fn physical_count(&self) -> usize {
        self.workers.len()
    }

    pub fn total_capacity(&self) -> usize {
        self.workers.iter().map(|&(_, c)| c).sum()
    }

    /// Parse a profile file: one `worker_id capacity` pair per line,
    /// `#`-comments and blank lines ignored.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut workers = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::ParseError {
                    line: i + 1,
                    message: "expected `worker_id capacity`".into(),
                });
            }
            let id = fields[0].parse::<usize>().map_err(|e| Error::ParseError {
                line: i + 1,
                message: format!("bad worker id: {e}"),
            })?;
            let cap = fields[1].parse::<usize>().map_err(|e| Error::ParseError {
                line: i + 1,
                message: format!("bad capacity: {e}"),
            })?;
            workers.push((id, cap));
        }
        Self::new(workers)
    }

    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        for &(id, cap) in &self.workers {
            let _ = writeln!(out, "{id} {cap}");
        }
        out
    }
}

/// The homogeneous view of a heterogeneous fleet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualMapping {
    pub n_virtual: usize,
    /// Virtual node -> (physical worker id, slot order within that worker).
    pub virtual_to_physical: Vec<(usize, usize)>,
    /// Slot count per physical worker, profile order.
    pub slots_per_physical: Vec<(usize, usize)>,
    /// Unknown-count side of the split (k_A or k_A * k_B).
    pub k: usize,
    pub s: usize,
}

/// Partial-computation utilization of a mapping/plan pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QDelta {
    /// Block products needed in the worst case.
    pub q: usize,
    /// Unknowns to recover.
    pub delta: usize,
    pub ratio: f64,
}

/// Ordered task list for one physical worker.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhysicalAssignment {
    pub physical_id: usize,
    /// Tasks in computation order; task j is virtual slot j of this worker.
    pub tasks: Vec<WorkerTask>,
}

/// Split a normalized profile at `k_bar`: the first `k_bar` workers'
/// capacities sum to k, the rest to s.
pub fn virtualize(profile: &HeterogeneousProfile, k_bar: usize) -> Result<VirtualMapping> {
    let n_bar = profile.physical_count();
    if k_bar == 0 || k_bar > n_bar - 1 {
        return Err(Error::InvalidBoundary(format!(
            "k_bar = {k_bar} outside 1..={}",
            n_bar - 1
        )));
    }
    let k: usize = profile.workers[..k_bar].iter().map(|&(_, c)| c).sum();
    let s: usize = profile.workers[k_bar..].iter().map(|&(_, c)| c).sum();
    let mut virtual_to_physical = Vec::with_capacity(k + s);
    let mut slots_per_physical = Vec::with_capacity(n_bar);
    for &(id, cap) in &profile.workers {
        for slot in 0..cap {
            virtual_to_physical.push((id, slot));
        }
        slots_per_physical.push((id, cap));
    }
    Ok(VirtualMapping { n_virtual: k + s, virtual_to_physical, slots_per_physical, k, s })
}

/// Encode on the virtual homogeneous system and hand each physical worker
/// its consecutive virtual slots in computation order.
pub fn assign_hetero_tasks(
    a: &SparseMatrix,
    rhs: EncodeInput<'_>,
    mapping: &VirtualMapping,
    plan: &EncodingPlan,
) -> Result<Vec<PhysicalAssignment>> {
    if plan.n != mapping.n_virtual {
        return Err(Error::PlanMismatch { plan_n: plan.n, mapping_n: mapping.n_virtual });
    }
    let tasks = encode_tasks(a, rhs, plan)?;
    let mut assignments: Vec<PhysicalAssignment> = mapping
        .slots_per_physical
        .iter()
        .map(|&(physical_id, _)| PhysicalAssignment { physical_id, tasks: Vec::new() })
        .collect();
    // virtual ids are consecutive per physical worker, in profile order,
    // so pushing in ascending virtual order preserves slot order
    for (task, &(physical, _slot)) in tasks.into_iter().zip(&mapping.virtual_to_physical) {
        let owner = assignments
            .iter_mut()
            .find(|a| a.physical_id == physical)
            .expect("every physical worker has an assignment");
        owner.tasks.push(task);
    }
    Ok(assignments)
}

/// Q and Delta for a mapping/plan pair: Delta = k_A * k_B unknowns and
/// Q = n - s collected block products; the ratio is 1 by construction.
pub fn q_over_delta(mapping: &VirtualMapping, plan: &EncodingPlan) -> Result<QDelta> {
    if plan.n != mapping.n_virtual {
        return Err(Error::PlanMismatch { plan_n: plan.n, mapping_n: mapping.n_virtual });
    }
    let delta = plan.tau();
    let q = mapping.n_virtual - mapping.s;
    Ok(QDelta { q, delta, ratio: q as f64 / delta as f64 })
}

/// Virtual ids collected when each physical worker completes an
/// order-respecting prefix of its slots.
pub fn prefix_survivors(mapping: &VirtualMapping, completion_counts: &[usize]) -> Vec<usize> {
    let mut survivors = Vec::new();
    for (virtual_id, &(physical, slot)) in mapping.virtual_to_physical.iter().enumerate() {
        let idx = mapping
            .slots_per_physical
            .iter()
            .position(|&(id, _)| id == physical)
            .expect("physical id present");
        if slot < completion_counts[idx] {
            survivors.push(virtual_id);
        }
    }
    survivors
}

/// True iff the order-respecting prefixes decode: the induced virtual
/// survivor set has size >= Q and its stacked rows have full column rank.
pub fn verify_partial_recovery(
    mapping: &VirtualMapping,
    plan: &EncodingPlan,
    completion_counts: &[usize],
    rcond: f64,
) -> Result<bool> {
    if plan.n != mapping.n_virtual {
        return Err(Error::PlanMismatch { plan_n: plan.n, mapping_n: mapping.n_virtual });
    }
    if completion_counts.len() != mapping.slots_per_physical.len() {
        return Err(Error::InconsistentParams(format!(
            "{} completion counts for {} physical workers",
            completion_counts.len(),
            mapping.slots_per_physical.len()
        )));
    }
    for (count, &(id, cap)) in completion_counts.iter().zip(&mapping.slots_per_physical) {
        if *count > cap {
            return Err(Error::InconsistentParams(format!(
                "worker {id} completed {count} of {cap} slots"
            )));
        }
    }
    let survivors = prefix_survivors(mapping, completion_counts);
    let q = mapping.n_virtual - mapping.s;
    if survivors.len() < q {
        return Ok(false);
    }
    Ok(stacked_rows_full_rank(plan, &survivors, rcond))
}

/// All completion-count patterns (order-respecting prefixes) whose totals
/// sum to `total`. Exhaustive audit helper for small fleets.
pub fn prefix_patterns(mapping: &VirtualMapping, total: usize) -> Vec<Vec<usize>> {
    let caps: Vec<usize> = mapping.slots_per_physical.iter().map(|&(_, c)| c).collect();
    let mut out = Vec::new();
    let mut current = vec![0usize; caps.len()];
    fn recurse(
        caps: &[usize],
        idx: usize,
        remaining: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if idx == caps.len() {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        let tail: usize = caps[idx..].iter().sum();
        if remaining > tail {
            return;
        }
        for take in 0..=caps[idx].min(remaining) {
            current[idx] = take;
            recurse(caps, idx + 1, remaining - take, current, out);
        }
        current[idx] = 0;
    }
    recurse(&caps, 0, total, &mut current, &mut out);
    out
}
