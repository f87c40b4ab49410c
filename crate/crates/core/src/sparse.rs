//! Sparse-matrix core: CSR storage, random generation, block-column
//! partitioning, linear combination and the transpose-product kernels the
//! workers run.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. The product kernels return dense blocks: encoded operands carry
//! the union of several supports, so their products are effectively dense.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Compressed sparse row matrix over f64.
///
/// Invariants, established by every constructor:
/// - `row_offsets` is non-decreasing with `row_offsets[0] == 0` and
///   `row_offsets[rows] == nnz`;
/// - column indices are strictly increasing within each row and `< cols`;
/// - no explicit zeros are stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Row-major dense matrix over f64. Holds vectors (`cols == 1`) and the
/// decoded product blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Description of an even block-column split: `k * block_width == parent_cols`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockColumnPartition {
    pub parent_cols: usize,
    pub k: usize,
    pub block_width: usize,
}

impl BlockColumnPartition {
    pub fn new(parent_cols: usize, k: usize) -> Result<Self> {
        if k == 0 || parent_cols % k != 0 {
            return Err(Error::NonDivisibleWidth { cols: parent_cols, k });
        }
        Ok(Self { parent_cols, k, block_width: parent_cols / k })
    }
}

impl SparseMatrix {
    /// Build from coordinate triplets. Duplicates are summed, exact zeros
    /// dropped, entries sorted row-major.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::ShapeMismatch(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_offsets.push(0);
        let mut row = 0usize;
        let mut i = 0usize;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            while row < r {
                row_offsets.push(col_indices.len());
                row += 1;
            }
            if v != 0.0 {
                col_indices.push(c);
                values.push(v);
            }
        }
        while row < rows {
            row_offsets.push(col_indices.len());
            row += 1;
        }
        debug_assert_eq!(row_offsets.len(), rows + 1);
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_offsets: vec![0; rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Identity pattern (ones on the diagonal).
    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored nonzeros.
    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[r];
        let hi = self.row_offsets[r + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Iterate stored entries as (row, col, value) in row-major order.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter_entries() {
            out.set(r, c, v);
        }
        out
    }

    /// Split into `k` equal-width block-columns. Re-concatenating the result
    /// with [`concat_block_columns`] reproduces the matrix exactly.
    pub fn partition_block_columns(&self, k: usize) -> Result<Vec<SparseMatrix>> {
        let part = BlockColumnPartition::new(self.cols, k)?;
        let w = part.block_width;
        let mut blocks: Vec<SparseMatrix> = (0..k)
            .map(|_| SparseMatrix {
                rows: self.rows,
                cols: w,
                row_offsets: Vec::with_capacity(self.rows + 1),
                col_indices: Vec::new(),
                values: Vec::new(),
            })
            .collect();
        for b in &mut blocks {
            b.row_offsets.push(0);
        }
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let b = c / w;
                blocks[b].col_indices.push(c % w);
                blocks[b].values.push(v);
            }
            for b in &mut blocks {
                b.row_offsets.push(b.col_indices.len());
            }
        }
        Ok(blocks)
    }

    /// Append the minimal number of zero columns so `cols % k == 0`.
    pub fn pad_columns(&self, k: usize) -> SparseMatrix {
        let rem = if k == 0 { 0 } else { self.cols % k };
        if rem == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        out.cols += k - rem;
        out
    }

    /// Transpose product `A^T x` for a column vector `x`.
    pub fn spmv_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows != self.rows || x.cols != 1 {
            return Err(Error::ShapeMismatch(format!(
                "A is {}x{}, x is {}x{}; need x {}x1",
                self.rows, self.cols, x.rows, x.cols, self.rows
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, 1);
        for r in 0..self.rows {
            let xr = x.values[r];
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out.values[c] += v * xr;
            }
        }
        Ok(out)
    }

    /// Transpose product `A^T B` as a dense block, together with the number
    /// of scalar multiply-accumulate operations performed. The counter is
    /// the machine-independent compute proxy used by the simulator.
    pub fn spgemm_transpose(&self, b: &SparseMatrix) -> Result<(DenseMatrix, u64)> {
        if b.rows != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "A is {}x{}, B is {}x{}; row counts must match",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, b.cols);
        let mut macs: u64 = 0;
        for r in 0..self.rows {
            let (a_cols, a_vals) = self.row(r);
            if a_cols.is_empty() {
                continue;
            }
            let (b_cols, b_vals) = b.row(r);
            for (&u, &av) in a_cols.iter().zip(a_vals) {
                let base = u * out.cols;
                for (&v, &bv) in b_cols.iter().zip(b_vals) {
                    out.values[base + v] += av * bv;
                    macs += 1;
                }
            }
        }
        Ok((out, macs))
    }
}

/// Entrywise weighted sum of equally shaped sparse blocks. Supports merge
/// structurally; exact cancellations are dropped so nnz stays the honest
/// communication metric.
pub fn sparse_linear_combination(blocks: &[&SparseMatrix], coeffs: &[f64]) -> Result<SparseMatrix> {
    if blocks.is_empty() || blocks.len() != coeffs.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} blocks with {} coefficients",
            blocks.len(),
            coeffs.len()
        )));
    }
    let (rows, cols) = (blocks[0].rows, blocks[0].cols);
    for b in blocks {
        if b.rows != rows || b.cols != cols {
            return Err(Error::ShapeMismatch(format!(
                "block {}x{} differs from {}x{}",
                b.rows, b.cols, rows, cols
            )));
        }
    }

    let mut row_offsets = Vec::with_capacity(rows + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    // merge the sorted rows of every block with a cursor per block
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for r in 0..rows {
        acc.clear();
        for (b, &w) in blocks.iter().zip(coeffs) {
            let (bc, bv) = b.row(r);
            for (&c, &v) in bc.iter().zip(bv) {
                acc.push((c, w * v));
            }
        }
        acc.sort_unstable_by_key(|&(c, _)| c);
        let mut i = 0;
        while i < acc.len() {
            let c = acc[i].0;
            let mut sum = acc[i].1;
            i += 1;
            while i < acc.len() && acc[i].0 == c {
                sum += acc[i].1;
                i += 1;
            }
            if sum != 0.0 {
                col_indices.push(c);
                values.push(sum);
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(SparseMatrix { rows, cols, row_offsets, col_indices, values })
}

/// Horizontal concatenation of equal-height blocks; inverse of
/// [`SparseMatrix::partition_block_columns`] when widths match.
pub fn concat_block_columns(blocks: &[SparseMatrix]) -> Result<SparseMatrix> {
    if blocks.is_empty() {
        return Err(Error::ShapeMismatch("no blocks to concatenate".into()));
    }
    let rows = blocks[0].rows;
    for b in blocks {
        if b.rows != rows {
            return Err(Error::ShapeMismatch(format!(
                "block heights differ: {} vs {}",
                b.rows, rows
            )));
        }
    }
    let cols: usize = blocks.iter().map(|b| b.cols).sum();
    let mut row_offsets = Vec::with_capacity(rows + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for r in 0..rows {
        let mut shift = 0;
        for b in blocks {
            let (bc, bv) = b.row(r);
            col_indices.extend(bc.iter().map(|&c| c + shift));
            values.extend_from_slice(bv);
            shift += b.cols;
        }
        row_offsets.push(col_indices.len());
    }
    Ok(SparseMatrix { rows, cols, row_offsets, col_indices, values })
}

/// Random matrix where each entry is independently nonzero with probability
/// `density`, nonzero values standard normal. Deterministic under `seed`.
pub fn generate_random_sparse(
    rows: usize,
    cols: usize,
    density: f64,
    seed: u64,
) -> Result<SparseMatrix> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rows * cols;
    let mut row_offsets = Vec::with_capacity(rows + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();

    if density == 1.0 {
        row_offsets.push(0);
        for _ in 0..rows {
            col_indices.extend(0..cols);
            for _ in 0..cols {
                values.push(rng.sample::<f64, _>(StandardNormal));
            }
            row_offsets.push(col_indices.len());
        }
        return Ok(SparseMatrix { rows, cols, row_offsets, col_indices, values });
    }

    // Walk flat indices with geometric gaps: the gap before the next hit of
    // a Bernoulli(p) process is floor(ln U / ln(1-p)).
    let log_q = (1.0 - density).ln();
    let mut flat: usize = 0;
    let mut hits: Vec<usize> = Vec::new();
    loop {
        let u: f64 = rng.random::<f64>();
        let gap = if u <= 0.0 { total } else { (u.ln() / log_q).floor() as usize };
        flat = match flat.checked_add(gap) {
            Some(f) => f,
            None => break,
        };
        if flat >= total {
            break;
        }
        hits.push(flat);
        flat += 1;
    }

    row_offsets.push(0);
    let mut r = 0usize;
    for &f in &hits {
        let row = f / cols;
        while r < row {
            row_offsets.push(col_indices.len());
            r += 1;
        }
        col_indices.push(f % cols);
        values.push(rng.sample::<f64, _>(StandardNormal));
    }
    while r < rows {
        row_offsets.push(col_indices.len());
        r += 1;
    }
    Ok(SparseMatrix { rows, cols, row_offsets, col_indices, values })
}

/// Probability that an entry of an omega-wise combination of independent
/// eta-sparse blocks is nonzero: `1 - (1 - eta)^omega`.
pub fn predicted_encoded_density(eta: f64, omega: usize) -> f64 {
    1.0 - (1.0 - eta).powi(omega as i32)
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn column_vector(values: Vec<f64>) -> Self {
        Self { rows: values.len(), cols: 1, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Top-left `rows x cols` submatrix; used to strip zero padding.
    pub fn truncate(&self, rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut out = DenseMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(r, c));
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||self - other||_F / ||other||_F` (absolute norm when `other` is zero).
    pub fn relative_error(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let denom = other.frobenius_norm();
        if denom == 0.0 {
            diff
        } else {
            diff / denom
        }
    }

    /// Naive dense `self^T other`; reference product for runtime checks.
    pub fn transpose_product(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for t in 0..self.rows {
            for u in 0..self.cols {
                let a = self.get(t, u);
                if a == 0.0 {
                    continue;
                }
                for v in 0..other.cols {
                    out.values[u * out.cols + v] += a * other.get(t, v);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_sparse(rows: usize, cols: usize, density: f64, seed: u64) -> SparseMatrix {
        generate_random_sparse(rows, cols, density, seed).unwrap()
    }

    #[test]
    fn partition_concat_identity() {
        let a = random_sparse(9, 6, 0.4, 3);
        let blocks = a.partition_block_columns(2).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| b.cols() == 3));
        assert_eq!(concat_block_columns(&blocks).unwrap(), a);
    }

    #[test]
    fn partition_wide_matrix() {
        // 31500 columns split 28 ways like the big matrix-vector experiment
        let a = random_sparse(4, 31500, 0.001, 9);
        let blocks = a.partition_block_columns(28).unwrap();
        assert_eq!(blocks.len(), 28);
        assert!(blocks.iter().all(|b| b.cols() == 1125));
    }

    #[test]
    fn partition_rejects_non_divisible() {
        let a = random_sparse(4, 10, 0.5, 1);
        match a.partition_block_columns(3) {
            Err(Error::NonDivisibleWidth { cols: 10, k: 3 }) => {}
            other => panic!("expected NonDivisibleWidth, got {other:?}"),
        }
    }

    #[test]
    fn pad_columns_minimal() {
        let a = random_sparse(4, 10, 0.5, 2);
        let padded = a.pad_columns(3);
        assert_eq!(padded.cols(), 12);
        assert_eq!(padded.nnz(), a.nnz());
        // already divisible: untouched
        assert_eq!(a.pad_columns(5).cols(), 10);
        let b = random_sparse(2, 31500, 0.001, 4);
        assert_eq!(b.pad_columns(28).cols(), 31500);
    }

    #[test]
    fn random_density_within_binomial_interval() {
        let a = random_sparse(1000, 1000, 0.01, 42);
        let d = a.density();
        assert!((0.008..=0.012).contains(&d), "density {d}");
    }

    #[test]
    fn random_fully_dense() {
        let a = random_sparse(100, 100, 1.0, 7);
        assert_eq!(a.nnz(), 10_000);
    }

    #[test]
    fn random_rejects_bad_density() {
        assert!(matches!(generate_random_sparse(5, 5, 0.0, 1), Err(Error::InvalidDensity(_))));
        assert!(matches!(generate_random_sparse(5, 5, 1.5, 1), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn combination_single_block_identity() {
        let a = random_sparse(8, 5, 0.5, 11);
        let out = sparse_linear_combination(&[&a], &[1.0]).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn combination_disjoint_supports_add_nnz() {
        let a = SparseMatrix::from_triplets(3, 4, vec![(0, 0, 1.0), (1, 2, 2.0)]).unwrap();
        let b = SparseMatrix::from_triplets(3, 4, vec![(0, 1, 3.0), (2, 3, 4.0)]).unwrap();
        let out = sparse_linear_combination(&[&a, &b], &[2.0, -1.0]).unwrap();
        assert_eq!(out.nnz(), a.nnz() + b.nnz());
    }

    #[test]
    fn combination_drops_exact_cancellation() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.5)]).unwrap();
        let b = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.5)]).unwrap();
        let out = sparse_linear_combination(&[&a, &b], &[1.0, -1.0]).unwrap();
        assert_eq!(out.nnz(), 0);
    }

    #[test]
    fn combination_density_matches_prediction() {
        // omega = 3 combination of eta = 0.01 blocks: 1 - 0.99^3
        let blocks: Vec<SparseMatrix> =
            (0..3).map(|i| random_sparse(2000, 500, 0.01, 100 + i)).collect();
        let refs: Vec<&SparseMatrix> = blocks.iter().collect();
        let out = sparse_linear_combination(&refs, &[0.3, -1.2, 0.7]).unwrap();
        let expected = predicted_encoded_density(0.01, 3);
        assert!((expected - 0.0297).abs() < 1e-4);
        assert!((out.density() - expected).abs() < 0.003, "density {}", out.density());
    }

    #[test]
    fn combination_shape_mismatch() {
        let a = random_sparse(3, 4, 0.5, 1);
        let b = random_sparse(3, 5, 0.5, 2);
        assert!(matches!(
            sparse_linear_combination(&[&a, &b], &[1.0, 1.0]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(sparse_linear_combination(&[], &[]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn spmv_identity_and_zero() {
        let a = SparseMatrix::identity(4);
        let x = DenseMatrix::column_vector(vec![1.0, -2.0, 3.5, 0.25]);
        assert_eq!(a.spmv_transpose(&x).unwrap(), x);
        let z = SparseMatrix::zeros(4, 3);
        let out = z.spmv_transpose(&x).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spmv_matches_dense_reference() {
        let a = random_sparse(50, 30, 0.2, 5);
        let x = DenseMatrix::column_vector(
            (0..50).map(|i| ((i * 7 % 13) as f64) - 6.0).collect(),
        );
        let got = a.spmv_transpose(&x).unwrap();
        let expect = a.to_dense().transpose_product(&x).unwrap();
        assert!(got.relative_error(&expect) < 1e-12);
    }

    #[test]
    fn spmv_shape_mismatch() {
        let a = random_sparse(5, 4, 0.5, 1);
        let x = DenseMatrix::column_vector(vec![1.0; 4]);
        assert!(matches!(a.spmv_transpose(&x), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn spgemm_identity() {
        let a = SparseMatrix::identity(5);
        let (out, macs) = a.spgemm_transpose(&a).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(out.get(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(macs, 5);
    }

    #[test]
    fn spgemm_matches_dense_reference() {
        let a = random_sparse(40, 8, 0.3, 21);
        let b = random_sparse(40, 6, 0.3, 22);
        let (got, _) = a.spgemm_transpose(&b).unwrap();
        let expect = a.to_dense().transpose_product(&b.to_dense()).unwrap();
        assert!(got.relative_error(&expect) < 1e-12);
    }

    #[test]
    fn spgemm_mac_count_scales_with_weights() {
        // combining omega blocks raises density to 1-(1-eta)^omega, and the
        // MAC count of the transpose product scales with the product of the
        // two operand densities
        let eta = 0.02;
        let blocks: Vec<SparseMatrix> =
            (0..4).map(|i| random_sparse(3000, 300, eta, 200 + i)).collect();
        let refs: Vec<&SparseMatrix> = blocks.iter().collect();
        let coeffs = [1.0, 1.0, 1.0, 1.0];
        let two = sparse_linear_combination(&refs[..2], &coeffs[..2]).unwrap();
        let four = sparse_linear_combination(&refs, &coeffs).unwrap();
        let (_, macs2) = two.spgemm_transpose(&two).unwrap();
        let (_, macs4) = four.spgemm_transpose(&four).unwrap();
        let d2 = predicted_encoded_density(eta, 2);
        let d4 = predicted_encoded_density(eta, 4);
        let expected_ratio = (d4 / d2) * (d4 / d2);
        let measured = macs4 as f64 / macs2 as f64;
        assert!(
            (measured / expected_ratio - 1.0).abs() < 0.15,
            "measured {measured}, expected {expected_ratio}"
        );
    }

    #[test]
    fn predicted_density_values() {
        assert!((predicted_encoded_density(0.01, 6) - 0.0585).abs() < 1e-4);
        assert!((predicted_encoded_density(0.02, 4) - 0.077).abs() < 1e-3);
        assert!((predicted_encoded_density(0.3, 1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn triplets_merge_and_canonicalize() {
        let a = SparseMatrix::from_triplets(
            2,
            3,
            vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 5.0), (1, 2, -5.0), (1, 2, 5.0)],
        )
        .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.row(0), (&[1usize][..], &[3.0][..]));
        assert_eq!(a.row(1), (&[0usize][..], &[5.0][..]));
    }
}
