//! Reconstruction of the product from any recovery-threshold subset of
//! worker results.
//!
//! Every survivor contributes one linear equation over the tau = k_A * k_B
//! unknown blocks `A_u^T B_v`. The effective coefficient of unknown
//! `(u, v)` in worker i's equation is `R_A[i,u] * R_B[i,v]` (the Kronecker
//! product of the worker's two coefficient rows), so stacking tau survivor
//! rows gives a square system that is full rank for any straggler pattern
//! within the scheme's budget. The system is factored once (LU with partial
//! pivoting) and reused across every entry of the unknown blocks.

use crate::encoder::EncodingPlan;
use crate::error::{Error, Result};
use crate::sparse::DenseMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default reciprocal-condition threshold for the numeric full-rank test.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// The square system tying survivor equations to unknown blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecodingSystem {
    pub tau: usize,
    /// tau x tau effective coefficients, row i belonging to survivor_ids[i].
    pub matrix: DenseMatrix,
    /// Column j corresponds to unknown block (u, v) = unknown_index_map[j];
    /// v is always 0 for matrix-vector plans.
    pub unknown_index_map: Vec<(usize, usize)>,
    pub survivor_ids: Vec<usize>,
}

/// Length-tau effective coefficient row of one worker: entry `u * k_B + v`
/// is `R_A[i,u] * R_B[i,v]`.
pub fn effective_row(plan: &EncodingPlan, worker_id: usize) -> Vec<f64> {
    let mut row = vec![0.0; plan.tau()];
    for &u in &plan.supports_a[worker_id] {
        let ra = plan.coeffs_a[worker_id][u];
        for &v in &plan.supports_b[worker_id] {
            row[u * plan.k_b + v] = ra * plan.coeffs_b[worker_id][v];
        }
    }
    row
}

/// Stack the effective rows of `survivor_ids` (in the given order).
pub fn build_decoding_system(
    plan: &EncodingPlan,
    survivor_ids: &[usize],
) -> Result<DecodingSystem> {
    let tau = plan.tau();
    if survivor_ids.len() != tau {
        return Err(Error::WrongSubsetSize { got: survivor_ids.len(), expected: tau });
    }
    let mut seen = vec![false; plan.n];
    for &id in survivor_ids {
        if id >= plan.n {
            return Err(Error::InconsistentParams(format!(
                "worker id {id} outside 0..{}",
                plan.n
            )));
        }
        if seen[id] {
            return Err(Error::InconsistentParams(format!("duplicate worker id {id}")));
        }
        seen[id] = true;
    }
    let mut matrix = DenseMatrix::zeros(tau, tau);
    for (r, &id) in survivor_ids.iter().enumerate() {
        for (c, v) in effective_row(plan, id).into_iter().enumerate() {
            matrix.set(r, c, v);
        }
    }
    let unknown_index_map = (0..tau).map(|j| (j / plan.k_b, j % plan.k_b)).collect();
    Ok(DecodingSystem { tau, matrix, unknown_index_map, survivor_ids: survivor_ids.to_vec() })
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_iterator(m.rows(), m.cols(), m.values().iter().copied())
}

/// Reciprocal condition number sigma_min / sigma_max of a stacked system.
fn rcond_of(matrix: &DMatrix<f64>) -> f64 {
    let sv = matrix.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Reciprocal condition number of the survivor decoding system.
pub fn system_rcond(plan: &EncodingPlan, survivor_ids: &[usize]) -> Result<f64> {
    let system = build_decoding_system(plan, survivor_ids)?;
    Ok(rcond_of(&to_nalgebra(&system.matrix)))
}

/// Numeric full-rank test: true iff sigma_min / sigma_max of the survivor
/// system exceeds `rcond_threshold`.
pub fn is_recoverable(
    plan: &EncodingPlan,
    survivor_ids: &[usize],
    rcond_threshold: f64,
) -> Result<bool> {
    Ok(system_rcond(plan, survivor_ids)? > rcond_threshold)
}

/// Full-column-rank test on the stacked rows of an arbitrary worker set
/// (at least tau rows). Used for partial-computation verification where
/// more than tau results may be available.
pub fn stacked_rows_full_rank(
    plan: &EncodingPlan,
    worker_ids: &[usize],
    rcond_threshold: f64,
) -> bool {
    let tau = plan.tau();
    if worker_ids.len() < tau {
        return false;
    }
    let rows: Vec<Vec<f64>> = worker_ids.iter().map(|&id| effective_row(plan, id)).collect();
    let m = DMatrix::from_fn(worker_ids.len(), tau, |r, c| rows[r][c]);
    rcond_of(&m) > rcond_threshold
}

fn check_result_shapes(results: &[DenseMatrix]) -> Result<(usize, usize)> {
    let (bh, bw) = (results[0].rows(), results[0].cols());
    for r in results {
        if r.rows() != bh || r.cols() != bw {
            return Err(Error::ShapeMismatch(format!(
                "worker results differ in shape: {}x{} vs {bh}x{bw}",
                r.rows(),
                r.cols()
            )));
        }
    }
    Ok((bh, bw))
}

/// Reassemble the product from solved unknown blocks, undoing the role swap
/// and stripping padding when the plan records the original widths.
fn assemble(plan: &EncodingPlan, solved: &DMatrix<f64>, bh: usize, bw: usize) -> DenseMatrix {
    let mut grid = DenseMatrix::zeros(plan.k_a * bh, plan.k_b * bw);
    for j in 0..plan.tau() {
        let (u, v) = (j / plan.k_b, j % plan.k_b);
        for e in 0..bh * bw {
            let (er, ec) = (e / bw, e % bw);
            grid.set(u * bh + er, v * bw + ec, solved[(j, e)]);
        }
    }
    let oriented = if plan.swapped { grid.transpose() } else { grid };
    match plan.dims {
        Some(dims) => oriented.truncate(dims.a_cols, dims.b_cols),
        None => oriented,
    }
}

/// Exact decode from exactly tau survivor results.
///
/// `results[i]` must be the block product returned by `survivor_ids[i]`:
/// an (r/k_A x 1) vector for matvec, an (r/k_A x w/k_B) block for matmat.
pub fn decode(
    plan: &EncodingPlan,
    survivor_ids: &[usize],
    results: &[DenseMatrix],
) -> Result<DenseMatrix> {
    let system = build_decoding_system(plan, survivor_ids)?;
    if results.len() != system.tau {
        return Err(Error::WrongSubsetSize { got: results.len(), expected: system.tau });
    }
    let (bh, bw) = check_result_shapes(results)?;

    let coeffs = to_nalgebra(&system.matrix);
    if rcond_of(&coeffs) <= DEFAULT_RCOND {
        return Err(Error::SingularSystem { rcond: DEFAULT_RCOND });
    }
    // one factorization, one solve for all block entries stacked as columns
    let rhs = DMatrix::from_fn(system.tau, bh * bw, |r, e| {
        results[r].get(e / bw, e % bw)
    });
    let lu = coeffs.lu();
    let solved = lu
        .solve(&rhs)
        .ok_or(Error::SingularSystem { rcond: DEFAULT_RCOND })?;
    Ok(assemble(plan, &solved, bh, bw))
}

/// Least-squares decode from at least tau results (worker id, block product).
/// Agrees with [`decode`] when exactly tau results are supplied.
pub fn decode_least_squares(
    plan: &EncodingPlan,
    available: &[(usize, DenseMatrix)],
) -> Result<DenseMatrix> {
    let tau = plan.tau();
    let m = available.len();
    if m < tau {
        return Err(Error::RankDeficient { rank: m, needed: tau });
    }
    let results: Vec<&DenseMatrix> = available.iter().map(|(_, r)| r).collect();
    let (bh, bw) = {
        let owned: Vec<DenseMatrix> = results.iter().map(|r| (*r).clone()).collect();
        check_result_shapes(&owned)?
    };

    let rows: Vec<Vec<f64>> =
        available.iter().map(|(id, _)| effective_row(plan, *id)).collect();
    let coeffs = DMatrix::from_fn(m, tau, |r, c| rows[r][c]);
    let rhs = DMatrix::from_fn(m, bh * bw, |r, e| results[r].get(e / bw, e % bw));

    let svd = coeffs.svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&sv| sv > s_max * DEFAULT_RCOND)
        .count();
    if rank < tau {
        return Err(Error::RankDeficient { rank, needed: tau });
    }
    let solved = svd
        .solve(&rhs, s_max * DEFAULT_RCOND)
        .map_err(|_| Error::RankDeficient { rank, needed: tau })?;
    Ok(assemble(plan, &solved, bh, bw))
}
