//! Encoding plans and per-worker task construction.
//!
//! A plan fixes the scheme parameters (n, k_A, k_B, s, weights), the cyclic
//! support set of every worker and the random coefficients. Matrix-vector
//! plans are stored as the k_B = 1 special case with an all-ones B side, so
//! decoding, audits and the simulator share one code path.
//!
//! Support layout:
//! - worker i combines A-blocks `T_i = {i, i+1, ..., i+w_A-1} (mod k_A)`;
//! - for matrix-matrix, worker i combines B-blocks
//!   `S_i = {j, ..., j+w_B-1} (mod k_B)` with `j = floor(i / k_A)`.
//!
//! Recovery threshold is `tau = k_A * k_B` and `n = tau + s`.

use crate::error::{Error, Result};
use crate::sparse::{sparse_linear_combination, DenseMatrix, SparseMatrix};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which product the plan encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    MatVec,
    MatMat,
}

/// Coefficient distribution for the random linear combinations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CoefficientDistribution {
    Normal { mean: f64, std_dev: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl Default for CoefficientDistribution {
    fn default() -> Self {
        // the standard normal gave the best worst-case conditioning among
        // the distributions we compared
        CoefficientDistribution::Normal { mean: 0.0, std_dev: 1.0 }
    }
}

impl CoefficientDistribution {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CoefficientDistribution::Normal { mean, std_dev } => {
                Normal::new(mean, std_dev).expect("valid normal parameters").sample(rng)
            }
            CoefficientDistribution::Uniform { lower, upper } => {
                Uniform::new(lower, upper).expect("valid uniform bounds").sample(rng)
            }
        }
    }
}

impl fmt::Display for CoefficientDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CoefficientDistribution::Normal { mean, std_dev } => {
                write!(f, "normal({mean},{std_dev})")
            }
            CoefficientDistribution::Uniform { lower, upper } => {
                write!(f, "uniform({lower},{upper})")
            }
        }
    }
}

impl FromStr for CoefficientDistribution {
    type Err = Error;

    /// Accepts `normal(c,d)` and `uniform(lb,ub)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InconsistentParams(format!("cannot parse distribution {s:?}"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let parts: Vec<f64> = args
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if parts.len() != 2 {
            return Err(bad());
        }
        match name.trim() {
            "normal" => Ok(CoefficientDistribution::Normal { mean: parts[0], std_dev: parts[1] }),
            "uniform" => {
                Ok(CoefficientDistribution::Uniform { lower: parts[0], upper: parts[1] })
            }
            _ => Err(bad()),
        }
    }
}

/// Original input widths, recorded so the decoder can strip zero padding and
/// undo the k_A/k_B role swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductDims {
    /// Columns of the user's matrix A (rows of the product).
    pub a_cols: usize,
    /// Columns of the user's matrix B (columns of the product; 1 for matvec).
    pub b_cols: usize,
}

/// A complete encoding plan: parameters, support sets and coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingPlan {
    pub kind: PlanKind,
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub omega_a: usize,
    pub omega_b: usize,
    pub seed: u64,
    pub distribution: CoefficientDistribution,
    /// True when the caller's k_B exceeded k_A and the roles were swapped;
    /// the decoder transposes the final product back.
    #[serde(default)]
    pub swapped: bool,
    /// Present once the plan has been bound to concrete inputs.
    #[serde(default)]
    pub dims: Option<ProductDims>,
    /// Per-worker A-support in cyclic enumeration order, |T_i| = omega_a.
    pub supports_a: Vec<Vec<usize>>,
    /// Per-worker B-support, |S_i| = omega_b ({0} for matvec).
    pub supports_b: Vec<Vec<usize>>,
    /// Dense n x k_A coefficient rows, zero outside the support.
    pub coeffs_a: Vec<Vec<f64>>,
    /// Dense n x k_B coefficient rows (all-ones column for matvec).
    pub coeffs_b: Vec<Vec<f64>>,
}

/// Encoded submatrices for one worker.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkerTask {
    pub worker_id: usize,
    pub encoded_a: SparseMatrix,
    pub encoded_b: Option<SparseMatrix>,
    pub vector_x: Option<DenseMatrix>,
}

/// Right-hand operand for task encoding.
#[derive(Clone, Copy, Debug)]
pub enum EncodeInput<'a> {
    Vector(&'a DenseMatrix),
    Matrix(&'a SparseMatrix),
}

fn cyclic_support(start: usize, weight: usize, modulus: usize) -> Vec<usize> {
    (0..weight).map(|o| (start + o) % modulus).collect()
}

fn fill_coefficients(
    supports: &[Vec<usize>],
    k: usize,
    distribution: &CoefficientDistribution,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    supports
        .iter()
        .map(|support| {
            let mut row = vec![0.0; k];
            for &q in support {
                row[q] = distribution.sample(rng);
            }
            row
        })
        .collect()
}

impl EncodingPlan {
    /// Recovery threshold: the number of unknown blocks.
    pub fn tau(&self) -> usize {
        self.k_a * self.k_b
    }

    /// Bind the plan to the original input widths (pre-padding, pre-swap).
    pub fn with_input_dims(mut self, a_cols: usize, b_cols: usize) -> Self {
        self.dims = Some(ProductDims { a_cols, b_cols });
        self
    }

    /// Same skeleton, coefficients redrawn from `distribution` under `seed`.
    pub fn resampled(&self, distribution: CoefficientDistribution, seed: u64) -> EncodingPlan {
        let mut out = self.clone();
        out.seed = seed;
        out.distribution = distribution;
        sample_coefficients(&mut out);
        out
    }

    /// Worker classes `M_i = { j : j = i (mod k_A) }`. All members of a
    /// class share the same A-support; exactly `s` classes (those with
    /// `i < s`) have k_B + 1 members, the rest k_B.
    pub fn class_structure(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.k_a];
        for w in 0..self.n {
            classes[w % self.k_a].push(w);
        }
        classes
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<EncodingPlan> {
        serde_json::from_str(text).map_err(|e| Error::ParseError {
            line: e.line(),
            message: format!("plan JSON: {e}"),
        })
    }
}

/// Draw the coefficient matrices of `plan` in place, deterministically from
/// `(plan.seed, plan.distribution)`. Worker rows are filled in order, the
/// A-side support first, then the B side.
pub fn sample_coefficients(plan: &mut EncodingPlan) {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    match plan.kind {
        PlanKind::MatVec => {
            plan.coeffs_a =
                fill_coefficients(&plan.supports_a, plan.k_a, &plan.distribution, &mut rng);
            plan.coeffs_b = vec![vec![1.0]; plan.n];
        }
        PlanKind::MatMat => {
            let mut coeffs_a = Vec::with_capacity(plan.n);
            let mut coeffs_b = Vec::with_capacity(plan.n);
            for i in 0..plan.n {
                let mut row_a = vec![0.0; plan.k_a];
                for &q in &plan.supports_a[i] {
                    row_a[q] = plan.distribution.sample(&mut rng);
                }
                let mut row_b = vec![0.0; plan.k_b];
                for &q in &plan.supports_b[i] {
                    row_b[q] = plan.distribution.sample(&mut rng);
                }
                coeffs_a.push(row_a);
                coeffs_b.push(row_b);
            }
            plan.coeffs_a = coeffs_a;
            plan.coeffs_b = coeffs_b;
        }
    }
}

/// Matrix-vector plan: weight `w_A = min(s+1, k_A)`, cyclic supports,
/// resilient to any `s = n - k_A` stragglers.
pub fn plan_matvec(
    n: usize,
    k_a: usize,
    s: usize,
    distribution: CoefficientDistribution,
    seed: u64,
) -> Result<EncodingPlan> {
    if k_a == 0 {
        return Err(Error::InconsistentParams("k_A must be at least 1".into()));
    }
    if n != k_a + s {
        return Err(Error::InconsistentParams(format!(
            "n = {n} but k_A + s = {}",
            k_a + s
        )));
    }
    let omega_a = (s + 1).min(k_a);
    let supports_a: Vec<Vec<usize>> = (0..n).map(|i| cyclic_support(i, omega_a, k_a)).collect();
    let supports_b = vec![vec![0]; n];
    let mut plan = EncodingPlan {
        kind: PlanKind::MatVec,
        n,
        k_a,
        k_b: 1,
        s,
        omega_a,
        omega_b: 1,
        seed,
        distribution,
        swapped: false,
        dims: None,
        supports_a,
        supports_b,
        coeffs_a: Vec::new(),
        coeffs_b: Vec::new(),
    };
    sample_coefficients(&mut plan);
    Ok(plan)
}

/// Matrix-matrix plan with explicit weights. Requires `n = k_A k_B + s`,
/// `s <= max(k_A, k_B)`, `1 < w_A < k_A`, `1 < w_B < k_B`, `w_A >= w_B` and
/// `w_A w_B > s`. If the caller passes `k_B > k_A`, the roles of the two
/// operands are swapped (the product is computed as `(B^T A)^T`).
pub fn plan_matmat(
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    omega_a: usize,
    omega_b: usize,
    distribution: CoefficientDistribution,
    seed: u64,
) -> Result<EncodingPlan> {
    let (k_a, k_b, omega_a, omega_b, swapped) = if k_b > k_a {
        (k_b, k_a, omega_b, omega_a, true)
    } else {
        (k_a, k_b, omega_a, omega_b, false)
    };
    if n != k_a * k_b + s {
        return Err(Error::InconsistentParams(format!(
            "n = {n} but k_A * k_B + s = {}",
            k_a * k_b + s
        )));
    }
    if s > k_a {
        return Err(Error::InconsistentParams(format!(
            "s = {s} exceeds max(k_A, k_B) = {k_a}"
        )));
    }
    if omega_a <= 1 || omega_a >= k_a {
        return Err(Error::WeightConstraintViolated(format!(
            "1 < omega_A < k_A fails: omega_A = {omega_a}, k_A = {k_a}"
        )));
    }
    if omega_b <= 1 || omega_b >= k_b {
        return Err(Error::WeightConstraintViolated(format!(
            "1 < omega_B < k_B fails: omega_B = {omega_b}, k_B = {k_b}"
        )));
    }
    if omega_a < omega_b {
        return Err(Error::WeightConstraintViolated(format!(
            "omega_A >= omega_B fails: omega_A = {omega_a}, omega_B = {omega_b}"
        )));
    }
    if omega_a * omega_b <= s {
        return Err(Error::WeightConstraintViolated(format!(
            "omega_A * omega_B > s fails: {omega_a} * {omega_b} = {} <= s = {s}",
            omega_a * omega_b
        )));
    }
    Ok(build_matmat(n, k_a, k_b, s, omega_a, omega_b, distribution, seed, swapped))
}

/// Matrix-matrix plan with the default weight choice: the lexicographically
/// smallest `(w_B, w_A)` with `w_A >= w_B`, `w_A w_B > s` and both weights
/// strictly inside `(1, k)`.
pub fn plan_matmat_default_weights(
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    distribution: CoefficientDistribution,
    seed: u64,
) -> Result<EncodingPlan> {
    let (hi, lo) = if k_b > k_a { (k_b, k_a) } else { (k_a, k_b) };
    for w_lo in 2..lo {
        for w_hi in w_lo..hi {
            if w_hi * w_lo > s {
                // weights follow the swapped orientation handled by plan_matmat
                return plan_matmat(
                    n,
                    k_a,
                    k_b,
                    s,
                    if k_b > k_a { w_lo } else { w_hi },
                    if k_b > k_a { w_hi } else { w_lo },
                    distribution,
                    seed,
                );
            }
        }
    }
    Err(Error::WeightConstraintViolated(format!(
        "no weights with omega_A * omega_B > s = {s} fit 1 < omega_A < {hi}, 1 < omega_B < {lo}"
    )))
}

/// Matrix-matrix plan that skips the weight checks. Diagnostic constructor:
/// with `w_A w_B <= s` the scheme is provably not resilient, and the audit
/// oracles use such plans to demonstrate the constraint's necessity.
#[allow(clippy::too_many_arguments)]
pub fn plan_matmat_unchecked(
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    omega_a: usize,
    omega_b: usize,
    distribution: CoefficientDistribution,
    seed: u64,
) -> EncodingPlan {
    build_matmat(n, k_a, k_b, s, omega_a, omega_b, distribution, seed, false)
}

/// Full-support random plan (`w_A = k_A`, `w_B = k_B`): the dense baseline
/// the comparisons run against.
pub fn plan_dense_baseline(
    kind: PlanKind,
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    distribution: CoefficientDistribution,
    seed: u64,
) -> Result<EncodingPlan> {
    match kind {
        PlanKind::MatVec => {
            if n != k_a + s {
                return Err(Error::InconsistentParams(format!(
                    "n = {n} but k_A + s = {}",
                    k_a + s
                )));
            }
            let supports_a: Vec<Vec<usize>> = (0..n).map(|_| (0..k_a).collect()).collect();
            let supports_b = vec![vec![0]; n];
            let mut plan = EncodingPlan {
                kind,
                n,
                k_a,
                k_b: 1,
                s,
                omega_a: k_a,
                omega_b: 1,
                seed,
                distribution,
                swapped: false,
                dims: None,
                supports_a,
                supports_b,
                coeffs_a: Vec::new(),
                coeffs_b: Vec::new(),
            };
            sample_coefficients(&mut plan);
            Ok(plan)
        }
        PlanKind::MatMat => {
            if n != k_a * k_b + s {
                return Err(Error::InconsistentParams(format!(
                    "n = {n} but k_A * k_B + s = {}",
                    k_a * k_b + s
                )));
            }
            let supports_a: Vec<Vec<usize>> = (0..n).map(|_| (0..k_a).collect()).collect();
            let supports_b: Vec<Vec<usize>> = (0..n).map(|_| (0..k_b).collect()).collect();
            let mut plan = EncodingPlan {
                kind,
                n,
                k_a,
                k_b,
                s,
                omega_a: k_a,
                omega_b: k_b,
                seed,
                distribution,
                swapped: false,
                dims: None,
                supports_a,
                supports_b,
                coeffs_a: Vec::new(),
                coeffs_b: Vec::new(),
            };
            sample_coefficients(&mut plan);
            Ok(plan)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_matmat(
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    omega_a: usize,
    omega_b: usize,
    distribution: CoefficientDistribution,
    seed: u64,
    swapped: bool,
) -> EncodingPlan {
    let supports_a: Vec<Vec<usize>> = (0..n).map(|i| cyclic_support(i, omega_a, k_a)).collect();
    let supports_b: Vec<Vec<usize>> =
        (0..n).map(|i| cyclic_support(i / k_a, omega_b, k_b)).collect();
    let mut plan = EncodingPlan {
        kind: PlanKind::MatMat,
        n,
        k_a,
        k_b,
        s,
        omega_a,
        omega_b,
        seed,
        distribution,
        swapped,
        dims: None,
        supports_a,
        supports_b,
        coeffs_a: Vec::new(),
        coeffs_b: Vec::new(),
    };
    sample_coefficients(&mut plan);
    plan
}

/// Encode the per-worker tasks: worker i receives the combination of the
/// A-blocks in `T_i` weighted by row i of the coefficient matrix (and the
/// corresponding B combination, or the vector x).
pub fn encode_tasks(
    a: &SparseMatrix,
    rhs: EncodeInput<'_>,
    plan: &EncodingPlan,
) -> Result<Vec<WorkerTask>> {
    // the swap normalization encodes B on the plan's A side
    let (a_side, b_side): (&SparseMatrix, Option<&SparseMatrix>) = match (plan.kind, rhs) {
        (PlanKind::MatVec, EncodeInput::Vector(_)) => (a, None),
        (PlanKind::MatMat, EncodeInput::Matrix(b)) => {
            if a.rows() != b.rows() {
                return Err(Error::ShapeMismatch(format!(
                    "A has {} rows, B has {}",
                    a.rows(),
                    b.rows()
                )));
            }
            if plan.swapped {
                (b, Some(a))
            } else {
                (a, Some(b))
            }
        }
        (PlanKind::MatVec, EncodeInput::Matrix(_)) => {
            return Err(Error::InconsistentParams(
                "matvec plan encodes a vector, got a matrix".into(),
            ))
        }
        (PlanKind::MatMat, EncodeInput::Vector(_)) => {
            return Err(Error::InconsistentParams(
                "matmat plan encodes a matrix, got a vector".into(),
            ))
        }
    };

    let x = match rhs {
        EncodeInput::Vector(x) => {
            if x.rows() != a.rows() || x.cols() != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "x is {}x{}, need {}x1",
                    x.rows(),
                    x.cols(),
                    a.rows()
                )));
            }
            Some(x)
        }
        EncodeInput::Matrix(_) => None,
    };

    let blocks_a = a_side.partition_block_columns(plan.k_a)?;
    let blocks_b = match b_side {
        Some(b) => Some(b.partition_block_columns(plan.k_b)?),
        None => None,
    };

    let mut tasks = Vec::with_capacity(plan.n);
    for i in 0..plan.n {
        let support_refs: Vec<&SparseMatrix> =
            plan.supports_a[i].iter().map(|&q| &blocks_a[q]).collect();
        let weights: Vec<f64> =
            plan.supports_a[i].iter().map(|&q| plan.coeffs_a[i][q]).collect();
        let encoded_a = sparse_linear_combination(&support_refs, &weights)?;

        let encoded_b = match &blocks_b {
            Some(blocks) => {
                let refs: Vec<&SparseMatrix> =
                    plan.supports_b[i].iter().map(|&q| &blocks[q]).collect();
                let weights: Vec<f64> =
                    plan.supports_b[i].iter().map(|&q| plan.coeffs_b[i][q]).collect();
                Some(sparse_linear_combination(&refs, &weights)?)
            }
            None => None,
        };

        tasks.push(WorkerTask {
            worker_id: i,
            encoded_a,
            encoded_b,
            vector_x: x.cloned(),
        });
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::generate_random_sparse;

    fn normal01() -> CoefficientDistribution {
        CoefficientDistribution::default()
    }

    /// 12 workers, 2 stragglers, k_A = 10: w_A = 3 with cyclic supports.
    #[test]
    fn matvec_plan_supports() {
        let plan = plan_matvec(12, 10, 2, normal01(), 1).unwrap();
        assert_eq!(plan.omega_a, 3);
        assert_eq!(plan.tau(), 10);
        assert_eq!(plan.supports_a[0], vec![0, 1, 2]);
        assert_eq!(plan.supports_a[9], vec![9, 0, 1]);
        assert_eq!(plan.supports_a[11], vec![1, 2, 3]);
        for row in &plan.coeffs_a {
            assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 3);
        }
    }

    #[test]
    fn matvec_weight_saturates_at_k() {
        let plan = plan_matvec(3, 2, 1, normal01(), 4).unwrap();
        assert_eq!(plan.omega_a, 2);
        for t in &plan.supports_a {
            let mut sorted = t.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1]);
        }
    }

    #[test]
    fn matvec_uncoded_when_no_stragglers() {
        let plan = plan_matvec(5, 5, 0, normal01(), 9).unwrap();
        assert_eq!(plan.omega_a, 1);
        for (i, t) in plan.supports_a.iter().enumerate() {
            assert_eq!(t, &vec![i]);
        }
    }

    #[test]
    fn matvec_rejects_inconsistent_n() {
        assert!(matches!(
            plan_matvec(12, 10, 3, normal01(), 1),
            Err(Error::InconsistentParams(_))
        ));
    }

    /// n = 27, k_A = 6, k_B = 4, s = 3 with w_A = w_B = 2.
    #[test]
    fn matmat_plan_supports() {
        let plan = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 2).unwrap();
        assert_eq!(plan.tau(), 24);
        assert_eq!(plan.supports_a[0], vec![0, 1]);
        assert_eq!(plan.supports_b[0], vec![0, 1]);
        assert_eq!(plan.supports_a[6], vec![0, 1]);
        assert_eq!(plan.supports_b[6], vec![1, 2]);
        assert_eq!(plan.supports_a[26], vec![2, 3]);
        assert_eq!(plan.supports_b[26], vec![0, 1]);
        for i in 0..plan.n {
            assert_eq!(plan.supports_a[i].len(), 2);
            assert_eq!(plan.supports_b[i].len(), 2);
        }
    }

    #[test]
    fn matmat_weight_constraint_is_strict() {
        // omega_A * omega_B = 4 is not > s = 4
        let err = plan_matmat(40, 6, 6, 4, 2, 2, normal01(), 3).unwrap_err();
        match err {
            Error::WeightConstraintViolated(msg) => {
                assert!(msg.contains("omega_A * omega_B > s"), "{msg}")
            }
            other => panic!("expected WeightConstraintViolated, got {other:?}"),
        }
    }

    #[test]
    fn matmat_square_instance() {
        let plan = plan_matmat(39, 6, 6, 3, 2, 2, normal01(), 5).unwrap();
        assert_eq!(plan.tau(), 36);
        assert_eq!(plan.n, 39);
    }

    #[test]
    fn matmat_swaps_roles_when_kb_larger() {
        let plan = plan_matmat(27, 4, 6, 3, 2, 2, normal01(), 6).unwrap();
        assert!(plan.swapped);
        assert_eq!(plan.k_a, 6);
        assert_eq!(plan.k_b, 4);
    }

    #[test]
    fn default_weights_pick_smallest_product() {
        let plan = plan_matmat_default_weights(27, 6, 4, 3, normal01(), 7).unwrap();
        assert_eq!((plan.omega_a, plan.omega_b), (2, 2));
        // s = 6 forces omega_A * omega_B >= 7: smallest (w_B, w_A) is (2, 4)
        let plan = plan_matmat_default_weights(30, 6, 4, 6, normal01(), 7).unwrap();
        assert_eq!((plan.omega_a, plan.omega_b), (4, 2));
    }

    #[test]
    fn class_structure_matches_modulus() {
        let plan = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 2).unwrap();
        let classes = plan.class_structure();
        assert_eq!(classes[0], vec![0, 6, 12, 18, 24]);
        // exactly s classes have k_B + 1 members
        let big = classes.iter().filter(|c| c.len() == plan.k_b + 1).count();
        assert_eq!(big, plan.s);
        for (i, class) in classes.iter().enumerate() {
            let expected = if i < plan.s { plan.k_b + 1 } else { plan.k_b };
            assert_eq!(class.len(), expected);
            for &w in class {
                assert_eq!(plan.supports_a[w], plan.supports_a[i]);
            }
        }
    }

    #[test]
    fn class_structure_uniform_when_no_stragglers() {
        let plan = plan_matmat_unchecked(24, 6, 4, 0, 2, 2, normal01(), 1);
        assert!(plan.class_structure().iter().all(|c| c.len() == 4));
    }

    #[test]
    fn coefficients_deterministic_under_seed() {
        let a = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 42).unwrap();
        let b = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 42).unwrap();
        assert_eq!(a, b);
        let c = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 43).unwrap();
        assert_ne!(a.coeffs_a, c.coeffs_a);
    }

    #[test]
    fn uniform_coefficients_stay_in_support() {
        let dist = CoefficientDistribution::Uniform { lower: -1.0, upper: 1.0 };
        let plan = plan_matvec(12, 10, 2, dist, 11).unwrap();
        for row in &plan.coeffs_a {
            for &v in row {
                assert!((-1.0..1.0).contains(&v) || v == 0.0);
            }
        }
    }

    #[test]
    fn all_studied_distributions_parse_and_sample() {
        for text in [
            "normal(0,0.5)",
            "normal(0,1)",
            "normal(0,5)",
            "uniform(0,1)",
            "uniform(-1,1)",
            "uniform(-5,5)",
        ] {
            let dist: CoefficientDistribution = text.parse().unwrap();
            assert_eq!(dist.to_string(), text);
            plan_matvec(12, 10, 2, dist, 1).unwrap();
        }
        assert!("cauchy(0,1)".parse::<CoefficientDistribution>().is_err());
    }

    #[test]
    fn encode_uncoded_tasks_scale_blocks() {
        let a = generate_random_sparse(12, 6, 0.5, 8).unwrap();
        let x = DenseMatrix::column_vector((0..12).map(|i| i as f64).collect());
        let plan = plan_matvec(3, 3, 0, normal01(), 3).unwrap();
        let tasks = encode_tasks(&a, EncodeInput::Vector(&x), &plan).unwrap();
        let blocks = a.partition_block_columns(3).unwrap();
        for (i, task) in tasks.iter().enumerate() {
            let r = plan.coeffs_a[i][i];
            let expected = sparse_linear_combination(&[&blocks[i]], &[r]).unwrap();
            assert_eq!(task.encoded_a, expected);
            assert!(task.vector_x.is_some());
        }
    }

    #[test]
    fn encode_support_union_matches_plan() {
        let a = generate_random_sparse(30, 20, 0.3, 9).unwrap();
        let x = DenseMatrix::column_vector(vec![1.0; 30]);
        let plan = plan_matvec(12, 10, 2, normal01(), 10).unwrap();
        let tasks = encode_tasks(&a, EncodeInput::Vector(&x), &plan).unwrap();
        assert_eq!(tasks.len(), 12);
        // worker 0 combines blocks 0..3, so its support is their union
        let blocks = a.partition_block_columns(10).unwrap();
        let refs: Vec<&SparseMatrix> = (0..3).map(|q| &blocks[q]).collect();
        let manual = sparse_linear_combination(
            &refs,
            &[plan.coeffs_a[0][0], plan.coeffs_a[0][1], plan.coeffs_a[0][2]],
        )
        .unwrap();
        assert_eq!(tasks[0].encoded_a, manual);
    }

    #[test]
    fn encoding_is_linear_in_a() {
        let a = generate_random_sparse(20, 12, 0.4, 13).unwrap();
        let doubled = sparse_linear_combination(&[&a], &[2.0]).unwrap();
        let b = generate_random_sparse(20, 8, 0.4, 14).unwrap();
        let plan = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 15).unwrap();
        let t1 = encode_tasks(&a, EncodeInput::Matrix(&b), &plan).unwrap();
        let t2 = encode_tasks(&doubled, EncodeInput::Matrix(&b), &plan).unwrap();
        for (u, v) in t1.iter().zip(&t2) {
            let scaled = sparse_linear_combination(&[&u.encoded_a], &[2.0]).unwrap();
            assert_eq!(&scaled, &v.encoded_a);
        }
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = plan_matmat(27, 6, 4, 3, 2, 2, normal01(), 42)
            .unwrap()
            .with_input_dims(20, 12);
        let text = plan.to_json();
        let back = EncodingPlan::from_json(&text).unwrap();
        assert_eq!(plan, back);
    }
}
