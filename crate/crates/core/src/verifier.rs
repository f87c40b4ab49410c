//! Combinatorial decodability oracles, independent of the numeric decoder.
//!
//! Three witnesses back the scheme's resilience claims at desk scale:
//! - a bipartite support graph per survivor set and an augmenting-path
//!   perfect-matching test (a matching certifies generic full rank);
//! - the cyclic union and participating-unknown counting bounds, including
//!   the class rearrangement that orders non-increasing selection counts
//!   and breaks ties toward smaller classes;
//! - exhaustive numeric rank audits over every threshold subset.
//!
//! The two decodability oracles cross-validate each other: a matching must
//! imply numeric full rank, and any full-rank system without a matching
//! would expose a structural-zero anomaly.

use crate::combinatorics::{binomial, k_subsets, random_k_subset};
use crate::decoder::{is_recoverable, system_rcond};
use crate::encoder::{EncodingPlan, PlanKind};
use crate::error::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Bipartite graph between a worker subset (equations) and the tau unknowns.
#[derive(Clone, Debug)]
pub struct SupportGraph {
    /// adjacency[e] lists the unknown columns worker subset[e] touches.
    pub adjacency: Vec<Vec<usize>>,
    pub workers: Vec<usize>,
    pub unknowns: usize,
}

/// Exact union size vs the cyclic lower bound for a class selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionBound {
    pub exact: usize,
    pub bound: usize,
}

/// Which participating-unknown formula applies to a class in the rearranged
/// order: the first class counts full products, later classes only the
/// additional unknowns introduced by their extra A-block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoPosition {
    First,
    Later,
}

/// Result of the rearranged counting bound on one worker subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallBound {
    pub m: usize,
    pub lower_bound: usize,
    pub exact_neighborhood: usize,
}

impl HallBound {
    /// The chain the audits assert: exact >= bound >= m.
    pub fn holds(&self) -> bool {
        self.exact_neighborhood >= self.lower_bound && self.lower_bound >= self.m
    }
}

/// Outcome of a full rank sweep over every threshold subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankAudit {
    pub subsets_tested: usize,
    pub failure_count: usize,
    /// Up to 1000 failing survivor sets, enumeration order.
    pub failures: Vec<Vec<usize>>,
}

/// Cross-validation of the matching and rank oracles on random subsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgreementReport {
    pub trials: usize,
    pub agreements: usize,
    /// matching present but numerically rank deficient (must stay zero).
    pub matching_without_rank: usize,
    /// full rank without a perfect matching (structural-zero anomaly).
    pub rank_without_matching: usize,
}

impl AgreementReport {
    pub fn agreement_rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.agreements as f64 / self.trials as f64
        }
    }
}

/// One audited subset for CSV reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRow {
    pub subset: Vec<usize>,
    pub matched: bool,
    pub rcond: f64,
    pub pass: bool,
}

/// Edges connect each worker equation to every unknown in its effective
/// support (`T_i` for matvec, `T_i x S_i` for matmat).
pub fn support_bipartite_graph(plan: &EncodingPlan, worker_subset: &[usize]) -> SupportGraph {
    let adjacency = worker_subset
        .iter()
        .map(|&w| {
            let mut cols = Vec::with_capacity(plan.omega_a * plan.omega_b);
            for &u in &plan.supports_a[w] {
                for &v in &plan.supports_b[w] {
                    cols.push(u * plan.k_b + v);
                }
            }
            cols.sort_unstable();
            cols
        })
        .collect();
    SupportGraph { adjacency, workers: worker_subset.to_vec(), unknowns: plan.tau() }
}

fn try_augment(
    g: &SupportGraph,
    e: usize,
    seen: &mut [bool],
    matched_to: &mut [Option<usize>],
) -> bool {
    for &u in &g.adjacency[e] {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        if matched_to[u].is_none() || try_augment(g, matched_to[u].unwrap(), seen, matched_to) {
            matched_to[u] = Some(e);
            return true;
        }
    }
    false
}

/// Size of a maximum matching (augmenting paths; the graphs are tiny).
pub fn maximum_matching(g: &SupportGraph) -> usize {
    let mut matched_to: Vec<Option<usize>> = vec![None; g.unknowns];
    let mut count = 0;
    for e in 0..g.adjacency.len() {
        let mut seen = vec![false; g.unknowns];
        if try_augment(g, e, &mut seen, &mut matched_to) {
            count += 1;
        }
    }
    count
}

/// True iff a perfect matching saturates both sides. Requires equal sides.
pub fn has_perfect_matching(g: &SupportGraph) -> Result<bool> {
    if g.adjacency.len() != g.unknowns {
        return Err(Error::SideSizeMismatch { left: g.adjacency.len(), right: g.unknowns });
    }
    Ok(maximum_matching(g) == g.unknowns)
}

/// Exact cardinality of the union of the selected classes' A-support sets
/// `D^A_i = {i, ..., i + w_A - 1}`, with the cyclic lower bound
/// `w_A + q - 1` (valid for q <= k_A - w_A + 1 selections).
pub fn min_participating_unknowns_union(
    plan: &EncodingPlan,
    class_subset: &[usize],
) -> Result<UnionBound> {
    let q = class_subset.len();
    let max = plan.k_a - plan.omega_a + 1;
    if q > max {
        return Err(Error::TooManyClasses { got: q, max });
    }
    let mut member = vec![false; plan.k_a];
    for &class in class_subset {
        if class >= plan.k_a {
            return Err(Error::InconsistentParams(format!(
                "class {class} outside 0..{}",
                plan.k_a
            )));
        }
        for o in 0..plan.omega_a {
            member[(class + o) % plan.k_a] = true;
        }
    }
    let exact = member.iter().filter(|&&b| b).count();
    let bound = if q == 0 { 0 } else { plan.omega_a + q - 1 };
    Ok(UnionBound { exact, bound })
}

/// Minimum participating-unknown count for `delta` workers chosen from one
/// class, by the piecewise cyclic-shift formulas. `First` also multiplies by
/// w_A (all products of the class's A-blocks count); `Later` counts only the
/// unknowns of the one additional A-block.
pub fn rho_bound(
    plan: &EncodingPlan,
    class_id: usize,
    delta: usize,
    position: RhoPosition,
) -> Result<usize> {
    let classes = plan.class_structure();
    if class_id >= classes.len() {
        return Err(Error::InconsistentParams(format!(
            "class {class_id} outside 0..{}",
            classes.len()
        )));
    }
    let class_size = classes[class_id].len();
    if delta == 0 || delta > class_size {
        return Err(Error::DeltaOutOfRange { delta, max: class_size });
    }
    Ok(rho_value(plan, class_size, delta, position))
}

fn rho_value(plan: &EncodingPlan, class_size: usize, delta: usize, position: RhoPosition) -> usize {
    let b_count = if delta == 1 {
        plan.omega_b
    } else if class_size == plan.k_b {
        (plan.omega_b + delta - 1).min(plan.k_b)
    } else {
        // class of size k_B + 1: two members share the same B-support
        (plan.omega_b + delta - 2).min(plan.k_b)
    };
    match position {
        RhoPosition::First => plan.omega_a * b_count,
        RhoPosition::Later => b_count,
    }
}

/// The rearranged counting bound for an arbitrary worker subset: per-class
/// selection counts are sorted non-increasing (ties place the smaller class
/// first), the first class contributes the full rho and the next
/// `k_A - w_A` classes their additional-unknown rho. Returns the bound and
/// the exact effective-support neighborhood size.
pub fn rearranged_hall_bound(plan: &EncodingPlan, worker_subset: &[usize]) -> Result<HallBound> {
    let m = worker_subset.len();
    let tau = plan.tau();
    if m > tau {
        return Err(Error::SubsetTooLarge { got: m, max: tau });
    }

    // exact neighborhood: distinct (u, v) products across the subset
    let mut seen = vec![false; tau];
    for &w in worker_subset {
        if w >= plan.n {
            return Err(Error::InconsistentParams(format!(
                "worker {w} outside 0..{}",
                plan.n
            )));
        }
        for &u in &plan.supports_a[w] {
            for &v in &plan.supports_b[w] {
                seen[u * plan.k_b + v] = true;
            }
        }
    }
    let exact_neighborhood = seen.iter().filter(|&&b| b).count();

    let classes = plan.class_structure();
    let mut deltas = vec![0usize; plan.k_a];
    for &w in worker_subset {
        deltas[w % plan.k_a] += 1;
    }
    // rearrangement: delta non-increasing, ties put the k_B-sized class first
    let mut order: Vec<usize> = (0..plan.k_a).collect();
    order.sort_by(|&i, &j| {
        deltas[j]
            .cmp(&deltas[i])
            .then(classes[i].len().cmp(&classes[j].len()))
            .then(i.cmp(&j))
    });

    let mut lower_bound = 0usize;
    let last = plan.k_a.saturating_sub(plan.omega_a);
    for (pos, &class) in order.iter().enumerate() {
        if pos > last {
            break;
        }
        let delta = deltas[class];
        if delta == 0 {
            continue;
        }
        let position = if pos == 0 { RhoPosition::First } else { RhoPosition::Later };
        lower_bound += rho_value(plan, classes[class].len(), delta, position);
    }
    Ok(HallBound { m, lower_bound, exact_neighborhood })
}

/// Numeric rank check of every tau-subset. Expected zero failures for valid
/// plans; stores at most 1000 failing subsets.
pub fn exhaustive_rank_audit(plan: &EncodingPlan, rcond: f64, budget: u64) -> Result<RankAudit> {
    let tau = plan.tau();
    let count = binomial(plan.n, tau);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { needed: count, budget });
    }
    let subsets = k_subsets(plan.n, tau);
    let verdicts: Vec<bool> = subsets
        .par_iter()
        .map(|s| is_recoverable(plan, s, rcond).expect("subset size is tau"))
        .collect();
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for (subset, ok) in subsets.iter().zip(&verdicts) {
        if !ok {
            failure_count += 1;
            if failures.len() < 1000 {
                failures.push(subset.clone());
            }
        }
    }
    Ok(RankAudit { subsets_tested: subsets.len(), failure_count, failures })
}

/// Cross-validate the matching oracle against the numeric rank oracle on
/// random tau-subsets.
pub fn matching_rank_agreement(
    plan: &EncodingPlan,
    trials: usize,
    seed: u64,
    rcond: f64,
) -> AgreementReport {
    let tau = plan.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AgreementReport {
        trials,
        agreements: 0,
        matching_without_rank: 0,
        rank_without_matching: 0,
    };
    for _ in 0..trials {
        let subset = random_k_subset(plan.n, tau, &mut rng);
        let graph = support_bipartite_graph(plan, &subset);
        let matched = has_perfect_matching(&graph).expect("equal sides by construction");
        let full_rank = is_recoverable(plan, &subset, rcond).expect("subset size is tau");
        if matched == full_rank {
            report.agreements += 1;
        } else if matched {
            report.matching_without_rank += 1;
        } else {
            report.rank_without_matching += 1;
        }
    }
    report
}

/// Audit rows (matching verdict + rcond) for a list of survivor subsets.
/// `pass` records agreement between the two oracles at the given threshold.
pub fn subset_audit_rows(
    plan: &EncodingPlan,
    subsets: &[Vec<usize>],
    rcond: f64,
) -> Vec<AuditRow> {
    subsets
        .par_iter()
        .map(|subset| {
            let graph = support_bipartite_graph(plan, subset);
            let matched = has_perfect_matching(&graph).expect("threshold-sized subset");
            let value = system_rcond(plan, subset).expect("threshold-sized subset");
            AuditRow {
                subset: subset.clone(),
                matched,
                rcond: value,
                pass: matched == (value > rcond),
            }
        })
        .collect()
}

/// CSV text for audit rows: `subset,matched,rcond,pass`.
pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut out = String::from("subset,matched,rcond,pass\n");
    for row in rows {
        let ids: Vec<String> = row.subset.iter().map(|w| w.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            ids.join(" "),
            row.matched,
            row.rcond,
            row.pass
        ));
    }
    out
}

/// Straggler patterns for which the weight constraint w_A w_B > s is tight
/// and violated: taking all members of the first `alpha` (k_B + 1)-sized
/// classes yields a neighborhood smaller than the subset, so Hall's
/// condition fails and the extended survivor set is structurally singular.
/// Used by tests to demonstrate the constraint's necessity.
pub fn hall_violation_witness(plan: &EncodingPlan) -> Option<Vec<usize>> {
    if plan.kind != PlanKind::MatMat {
        return None;
    }
    let classes = plan.class_structure();
    for alpha in 1..=plan.s.min(plan.k_a) {
        let mut subset: Vec<usize> = Vec::new();
        for class in classes.iter().take(alpha) {
            subset.extend_from_slice(class);
        }
        if subset.len() > plan.tau() {
            continue;
        }
        if let Ok(bound) = rearranged_hall_bound(plan, &subset) {
            if bound.exact_neighborhood < bound.m {
                subset.sort_unstable();
                return Some(subset);
            }
        } else {
            // subset larger than tau, cannot be part of a survivor set
            continue;
        }
    }
    None
}
