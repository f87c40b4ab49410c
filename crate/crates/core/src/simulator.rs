//! Deterministic local execution: per-worker compute with MAC-proportional
//! cost, straggler and failure injection, order-respecting collection of
//! partial results, decode and oracle comparison.
//!
//! Time is a virtual event clock, never the host's wall clock, so identical
//! (seed, inputs, spec) produce identical reports on any machine. A worker's
//! slot j finishes at the cumulative duration of slots 0..=j scaled by its
//! slowdown factor; the central node collects block products in finish-time
//! order until the recovery threshold is reached.

use crate::decoder::decode;
use crate::encoder::{plan_dense_baseline, EncodeInput, EncodingPlan, WorkerTask};
use crate::error::{Error, Result};
use crate::hetero::{PhysicalAssignment, VirtualMapping};
use crate::sparse::{DenseMatrix, SparseMatrix};
use crate::stability::kappa_worst;
use num_integer::Integer;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// Per-slot compute-time model in seconds per MAC, plus a fixed shift and
/// optional exponential noise (the usual straggler tail model).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayModel {
    Deterministic { base_rate: f64, shift: f64 },
    ShiftedExponential { base_rate: f64, shift: f64, exp_mean: f64, seed: u64 },
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel::Deterministic { base_rate: 1e-9, shift: 1e-3 }
    }
}

impl DelayModel {
    fn validate(&self) -> Result<()> {
        let (rate, shift, mean) = match *self {
            DelayModel::Deterministic { base_rate, shift } => (base_rate, shift, 0.0),
            DelayModel::ShiftedExponential { base_rate, shift, exp_mean, .. } => {
                (base_rate, shift, exp_mean)
            }
        };
        if rate < 0.0 || shift < 0.0 || mean < 0.0 {
            return Err(Error::InconsistentParams(
                "delay parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Noise per virtual slot, drawn once in virtual-id order.
    fn noise(&self, n_virtual: usize) -> Vec<f64> {
        match *self {
            DelayModel::Deterministic { .. } => vec![0.0; n_virtual],
            DelayModel::ShiftedExponential { exp_mean, seed, .. } => {
                if exp_mean == 0.0 {
                    return vec![0.0; n_virtual];
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let exp = Exp::new(1.0 / exp_mean).expect("positive mean");
                (0..n_virtual).map(|_| exp.sample(&mut rng)).collect()
            }
        }
    }

    fn slot_duration(&self, flops: u64, noise: f64) -> f64 {
        match *self {
            DelayModel::Deterministic { base_rate, shift }
            | DelayModel::ShiftedExponential { base_rate, shift, .. } => {
                shift + base_rate * flops as f64 + noise
            }
        }
    }
}

/// Straggler injection, addressed by physical worker id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StragglerSpec {
    /// Designated straggler pattern: these workers' results are discarded.
    ExplicitSet { targets: Vec<usize> },
    /// These workers run `factor` times slower.
    SlowdownFactor { targets: Vec<usize>, factor: f64 },
    /// These workers crash and never return.
    Failure { targets: Vec<usize> },
}

/// Per-physical-worker execution record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerStats {
    pub physical_id: usize,
    pub compute_flops: u64,
    pub nnz_received: usize,
    /// Finish time of the last slot; None for failed/discarded workers.
    pub finish_time: Option<f64>,
    /// Slots finished by the time the decoder had enough results.
    pub completed_slots: usize,
}

/// Outcome of one simulated run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationReport {
    pub per_worker: Vec<WorkerStats>,
    /// Virtual ids collected, in collection order.
    pub survivor_set: Vec<usize>,
    pub decode_ok: bool,
    /// Relative Frobenius error against the oracle, when one was supplied.
    pub relative_error: Option<f64>,
    /// Event-clock time at which the threshold-th result arrived.
    pub total_time: f64,
    pub communication_nnz_total: usize,
    /// The decoded product; not part of the serialized report.
    #[serde(skip)]
    pub product: Option<DenseMatrix>,
}

/// Communication proxy: stored nonzeros of the encoded blocks each worker
/// receives (the vector x is broadcast and not counted).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommunicationCost {
    pub per_worker: Vec<(usize, usize)>,
    pub total: usize,
}

pub fn communication_cost(tasks: &[WorkerTask]) -> CommunicationCost {
    let per_worker: Vec<(usize, usize)> = tasks
        .iter()
        .map(|t| {
            let nnz = t.encoded_a.nnz()
                + t.encoded_b.as_ref().map(|b| b.nnz()).unwrap_or(0);
            (t.worker_id, nnz)
        })
        .collect();
    let total = per_worker.iter().map(|&(_, n)| n).sum();
    CommunicationCost { per_worker, total }
}

fn task_nnz(task: &WorkerTask) -> usize {
    task.encoded_a.nnz() + task.encoded_b.as_ref().map(|b| b.nnz()).unwrap_or(0)
}

/// Run one worker's slot: the block product plus its MAC count. Matrix-
/// vector slots cost one MAC per stored nonzero of the encoded block.
fn run_slot(task: &WorkerTask) -> Result<(DenseMatrix, u64)> {
    match (&task.encoded_b, &task.vector_x) {
        (Some(b), _) => task.encoded_a.spgemm_transpose(b),
        (None, Some(x)) => {
            let result = task.encoded_a.spmv_transpose(x)?;
            Ok((result, task.encoded_a.nnz() as u64))
        }
        (None, None) => Err(Error::InconsistentParams(format!(
            "task {} has neither B nor x",
            task.worker_id
        ))),
    }
}

struct StragglerEffects {
    excluded: Vec<bool>,
    factor: Vec<f64>,
}

fn straggler_effects(specs: &[StragglerSpec], physical_ids: &[usize]) -> Result<StragglerEffects> {
    let max_id = physical_ids.iter().copied().max().unwrap_or(0);
    let mut excluded = vec![false; max_id + 1];
    let mut factor = vec![1.0f64; max_id + 1];
    let check = |targets: &[usize]| -> Result<()> {
        for &t in targets {
            if !physical_ids.contains(&t) {
                return Err(Error::InconsistentParams(format!(
                    "straggler target {t} is not a worker id"
                )));
            }
        }
        Ok(())
    };
    for spec in specs {
        match spec {
            StragglerSpec::ExplicitSet { targets } | StragglerSpec::Failure { targets } => {
                check(targets)?;
                for &t in targets {
                    excluded[t] = true;
                }
            }
            StragglerSpec::SlowdownFactor { targets, factor: f } => {
                check(targets)?;
                if *f < 1.0 {
                    return Err(Error::InconsistentParams(format!(
                        "slowdown factor {f} must be >= 1"
                    )));
                }
                for &t in targets {
                    factor[t] *= f;
                }
            }
        }
    }
    Ok(StragglerEffects { excluded, factor })
}

/// Simulate a homogeneous run: one task per worker, worker id = physical id.
pub fn simulate(
    tasks: &[WorkerTask],
    plan: &EncodingPlan,
    delay: &DelayModel,
    stragglers: &[StragglerSpec],
    oracle: Option<&DenseMatrix>,
) -> Result<SimulationReport> {
    let assignments: Vec<PhysicalAssignment> = tasks
        .iter()
        .map(|t| PhysicalAssignment { physical_id: t.worker_id, tasks: vec![t.clone()] })
        .collect();
    simulate_assignments(&assignments, None, plan, delay, stragglers, oracle)
}

/// Simulate a heterogeneous run: each physical worker computes its slots in
/// order; collection respects per-worker slot order by construction.
pub fn simulate_hetero(
    assignments: &[PhysicalAssignment],
    mapping: &VirtualMapping,
    plan: &EncodingPlan,
    delay: &DelayModel,
    stragglers: &[StragglerSpec],
    oracle: Option<&DenseMatrix>,
) -> Result<SimulationReport> {
    simulate_assignments(assignments, Some(mapping), plan, delay, stragglers, oracle)
}

fn simulate_assignments(
    assignments: &[PhysicalAssignment],
    mapping: Option<&VirtualMapping>,
    plan: &EncodingPlan,
    delay: &DelayModel,
    stragglers: &[StragglerSpec],
    oracle: Option<&DenseMatrix>,
) -> Result<SimulationReport> {
    delay.validate()?;
    let n_virtual: usize = assignments.iter().map(|a| a.tasks.len()).sum();
    if plan.n != n_virtual {
        return Err(Error::PlanMismatch {
            plan_n: plan.n,
            mapping_n: n_virtual,
        });
    }
    if let Some(m) = mapping {
        if m.n_virtual != n_virtual {
            return Err(Error::PlanMismatch { plan_n: m.n_virtual, mapping_n: n_virtual });
        }
    }
    let physical_ids: Vec<usize> = assignments.iter().map(|a| a.physical_id).collect();
    let effects = straggler_effects(stragglers, &physical_ids)?;
    let noise = delay.noise(n_virtual);

    // run every slot; record (finish, virtual id, result) for live workers
    let tau = plan.tau();
    let mut events: Vec<(f64, usize)> = Vec::new();
    let mut results: Vec<Option<DenseMatrix>> = vec![None; n_virtual];
    let mut slot_finish: Vec<Vec<f64>> = Vec::with_capacity(assignments.len());
    let mut stats: Vec<WorkerStats> = Vec::with_capacity(assignments.len());
    let mut virtual_id = 0usize;
    for assignment in assignments {
        let pid = assignment.physical_id;
        let excluded = effects.excluded[pid];
        let factor = effects.factor[pid];
        let mut clock = 0.0f64;
        let mut flops_total = 0u64;
        let mut nnz_total = 0usize;
        let mut finishes = Vec::with_capacity(assignment.tasks.len());
        for task in &assignment.tasks {
            let (result, flops) = run_slot(task)?;
            flops_total += flops;
            nnz_total += task_nnz(task);
            clock += delay.slot_duration(flops, noise[virtual_id]);
            let finish = clock * factor;
            finishes.push(finish);
            if !excluded {
                events.push((finish, virtual_id));
                results[virtual_id] = Some(result);
            }
            virtual_id += 1;
        }
        stats.push(WorkerStats {
            physical_id: pid,
            compute_flops: flops_total,
            nnz_received: nnz_total,
            finish_time: if excluded { None } else { finishes.last().copied() },
            completed_slots: 0,
        });
        slot_finish.push(finishes);
    }

    if events.len() < tau {
        return Err(Error::NotEnoughSurvivors { alive: events.len(), needed: tau });
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let collected = &events[..tau];
    let cutoff = collected.last().expect("tau >= 1").0;
    let survivor_set: Vec<usize> = collected.iter().map(|&(_, v)| v).collect();

    for (i, assignment) in assignments.iter().enumerate() {
        if effects.excluded[assignment.physical_id] {
            continue;
        }
        stats[i].completed_slots =
            slot_finish[i].iter().filter(|&&f| f <= cutoff).count();
    }

    let survivor_results: Vec<DenseMatrix> = survivor_set
        .iter()
        .map(|&v| results[v].clone().expect("collected results exist"))
        .collect();
    let communication_nnz_total: usize =
        assignments.iter().flat_map(|a| a.tasks.iter().map(task_nnz)).sum();

    let (decode_ok, product) = match decode(plan, &survivor_set, &survivor_results) {
        Ok(p) => (true, Some(p)),
        Err(Error::SingularSystem { .. }) => (false, None),
        Err(e) => return Err(e),
    };
    let relative_error = match (&product, oracle) {
        (Some(p), Some(o)) => Some(p.relative_error(o)),
        _ => None,
    };

    Ok(SimulationReport {
        per_worker: stats,
        survivor_set,
        decode_ok,
        relative_error,
        total_time: cutoff,
        communication_nnz_total,
        product,
    })
}

/// Configuration of a proposed-vs-dense comparison run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareConfig {
    pub plan: EncodingPlan,
    pub delay: DelayModel,
    /// Straggler sets are drawn uniformly per repetition from this seed.
    pub seed: u64,
    pub repetitions: usize,
    /// Budget for the optional worst-case condition number columns.
    pub kappa_budget: Option<u64>,
}

/// One scheme's aggregate row in a comparison table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub mean_worker_time: f64,
    pub mean_worker_flops: f64,
    pub communication_nnz: usize,
    pub mean_decode_error: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa_worst: Option<f64>,
}

/// Head-to-head comparison of the low-weight scheme against the dense
/// full-support baseline on the same inputs and straggler draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub flop_ratio_dense_over_proposed: f64,
    pub comm_ratio_dense_over_proposed: f64,
    /// The analytic prediction k_A k_B / (w_A w_B).
    pub expected_flop_ratio: f64,
}

impl ComparisonTable {
    pub const CSV_HEADER: &'static str =
        "method,mean_worker_time,mean_worker_flops,communication_nnz,mean_decode_error,kappa_worst";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.method,
                row.mean_worker_time,
                row.mean_worker_flops,
                row.communication_nnz,
                row.mean_decode_error,
                row.kappa_worst.map(|k| k.to_string()).unwrap_or_default(),
            ));
        }
        out.push_str(&format!(
            "ratio dense/proposed,{},{},{},,\n",
            self.flop_ratio_dense_over_proposed,
            self.flop_ratio_dense_over_proposed,
            self.comm_ratio_dense_over_proposed,
        ));
        out
    }
}

fn scheme_row(
    name: &str,
    plan: &EncodingPlan,
    a: &SparseMatrix,
    rhs: EncodeInput<'_>,
    config: &CompareConfig,
    oracle: Option<&DenseMatrix>,
) -> Result<(ComparisonRow, f64, f64)> {
    use crate::combinatorics::random_k_subset;

    let tasks = crate::encoder::encode_tasks(a, rhs, plan)?;
    let comm = communication_cost(&tasks);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut time_acc = 0.0f64;
    let mut flops_acc = 0.0f64;
    let mut err_acc = 0.0f64;
    let mut err_count = 0usize;
    for _ in 0..config.repetitions.max(1) {
        let stragglers = random_k_subset(plan.n, plan.s, &mut rng);
        let spec = vec![StragglerSpec::ExplicitSet { targets: stragglers }];
        let report = simulate(&tasks, plan, &config.delay, &spec, oracle)?;
        let n = report.per_worker.len() as f64;
        time_acc += report
            .per_worker
            .iter()
            .filter_map(|w| w.finish_time)
            .sum::<f64>()
            / n;
        flops_acc += report.per_worker.iter().map(|w| w.compute_flops as f64).sum::<f64>() / n;
        if let Some(e) = report.relative_error {
            err_acc += e;
            err_count += 1;
        }
    }
    let reps = config.repetitions.max(1) as f64;
    let kappa = match config.kappa_budget {
        Some(budget) => Some(kappa_worst(plan, budget)?.kappa_worst),
        None => None,
    };
    let row = ComparisonRow {
        method: name.to_string(),
        mean_worker_time: time_acc / reps,
        mean_worker_flops: flops_acc / reps,
        communication_nnz: comm.total,
        mean_decode_error: if err_count > 0 { err_acc / err_count as f64 } else { 0.0 },
        kappa_worst: kappa,
    };
    let flops = flops_acc / reps;
    Ok((row, flops, comm.total as f64))
}

/// Compare the proposed plan against the dense baseline of the same shape
/// (same n, k_A, k_B, s; full supports) over `repetitions` straggler draws.
pub fn compare_schemes(
    a: &SparseMatrix,
    rhs: EncodeInput<'_>,
    config: &CompareConfig,
    oracle: Option<&DenseMatrix>,
) -> Result<ComparisonTable> {
    let plan = &config.plan;
    let mut dense = plan_dense_baseline(
        plan.kind,
        plan.n,
        plan.k_a,
        plan.k_b,
        plan.s,
        plan.distribution,
        plan.seed,
    )?;
    dense.dims = plan.dims;

    let (proposed_row, p_flops, p_comm) =
        scheme_row("proposed", plan, a, rhs, config, oracle)?;
    let (dense_row, d_flops, d_comm) = scheme_row("dense", &dense, a, rhs, config, oracle)?;

    let expected_flop_ratio =
        (plan.k_a * plan.k_b) as f64 / (plan.omega_a * plan.omega_b) as f64;
    Ok(ComparisonTable {
        rows: vec![proposed_row, dense_row],
        flop_ratio_dense_over_proposed: d_flops / p_flops,
        comm_ratio_dense_over_proposed: d_comm / p_comm,
        expected_flop_ratio,
    })
}

/// Reduced-fraction view of the analytic complexity ratio against the
/// class-based LCM-partition scheme (weight zeta on the B side):
/// `zeta * k_A * (k_B + s) / (n * w_A * w_B)` with `n = k_A k_B + s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRatio {
    pub numer: u64,
    pub denom: u64,
}

impl ComplexityRatio {
    pub fn value(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl std::fmt::Display for ComplexityRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

/// The class-based scheme's B-side weight: `zeta = 1 + k_B - ceil(k_B / c)`
/// with `c = 1 + ceil(s / k_B)`.
pub fn class_based_weight_zeta(k_b: usize, s: usize) -> usize {
    let c = 1 + s.div_ceil(k_b);
    1 + k_b - k_b.div_ceil(c)
}

/// Analytic per-worker compute ratio class-based / proposed. The weight
/// factor `zeta / (w_A w_B)` is cancelled by its gcd first, matching the
/// two-factor form `k_A (k_B + s) / n * zeta / (w_A w_B)`.
pub fn class_based_complexity_ratio(
    k_a: usize,
    k_b: usize,
    s: usize,
    zeta: usize,
    omega_a: usize,
    omega_b: usize,
) -> ComplexityRatio {
    let n = k_a * k_b + s;
    let weight_product = omega_a * omega_b;
    let g = zeta.gcd(&weight_product).max(1);
    ComplexityRatio {
        numer: (k_a * (k_b + s) * (zeta / g)) as u64,
        denom: (n * (weight_product / g)) as u64,
    }
}
