//! Shared test oracles. These stay independent of the library's product
//! kernels: plain triple loops over dense copies built entry by entry.

use lwcode::{DenseMatrix, SparseMatrix};

/// Dense copy assembled through the public entry iterator.
pub fn densify(m: &SparseMatrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; m.cols()]; m.rows()];
    for (r, c, v) in m.iter_entries() {
        out[r][c] = v;
    }
    out
}

/// Brute-force `A^T x`.
pub fn oracle_transpose_matvec(a: &SparseMatrix, x: &DenseMatrix) -> DenseMatrix {
    let ad = densify(a);
    let mut out = vec![0.0; a.cols()];
    for t in 0..a.rows() {
        for (u, out_u) in out.iter_mut().enumerate() {
            *out_u += ad[t][u] * x.get(t, 0);
        }
    }
    DenseMatrix::column_vector(out)
}

/// Brute-force `A^T B`.
pub fn oracle_transpose_matmat(a: &SparseMatrix, b: &SparseMatrix) -> DenseMatrix {
    let ad = densify(a);
    let bd = densify(b);
    let mut out = DenseMatrix::zeros(a.cols(), b.cols());
    for u in 0..a.cols() {
        for v in 0..b.cols() {
            let mut acc = 0.0;
            for t in 0..a.rows() {
                acc += ad[t][u] * bd[t][v];
            }
            out.set(u, v, acc);
        }
    }
    out
}
