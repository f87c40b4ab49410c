//! Property tests for the structural invariants of the sparse core and the
//! encoding layer.

mod common;

use common::{oracle_transpose_matmat, oracle_transpose_matvec};
use lwcode::{
    concat_block_columns, generate_random_sparse, sparse_linear_combination, SparseMatrix,
};
use proptest::prelude::*;

fn arb_sparse(max_rows: usize, max_cols: usize) -> impl Strategy<Value = SparseMatrix> {
    (1..=max_rows, 1..=max_cols, 0u64..1_000_000).prop_flat_map(|(rows, cols, seed)| {
        (Just(rows), Just(cols), Just(seed), 0.05f64..0.9)
            .prop_map(|(r, c, s, d)| generate_random_sparse(r, c, d, s).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_concat_round_trips(a in arb_sparse(24, 30), k in 1usize..6) {
        let padded = a.pad_columns(k);
        let blocks = padded.partition_block_columns(k).unwrap();
        prop_assert_eq!(blocks.len(), k);
        let back = concat_block_columns(&blocks).unwrap();
        prop_assert_eq!(back, padded);
    }

    #[test]
    fn spmv_matches_oracle(a in arb_sparse(20, 16), seed in 0u64..1000) {
        let x = {
            let v = generate_random_sparse(a.rows(), 1, 1.0, seed).unwrap();
            v.to_dense()
        };
        let got = a.spmv_transpose(&x).unwrap();
        let expect = oracle_transpose_matvec(&a, &x);
        prop_assert!(got.relative_error(&expect) < 1e-12);
    }

    #[test]
    fn spgemm_matches_oracle(seed in 0u64..1000, rows in 2usize..20, ca in 1usize..10, cb in 1usize..10) {
        let a = generate_random_sparse(rows, ca, 0.4, seed).unwrap();
        let b = generate_random_sparse(rows, cb, 0.4, seed + 1).unwrap();
        let (got, _) = a.spgemm_transpose(&b).unwrap();
        let expect = oracle_transpose_matmat(&a, &b);
        prop_assert!(got.relative_error(&expect) < 1e-12);
    }

    #[test]
    fn combination_is_linear(seed in 0u64..1000, alpha in -4.0f64..4.0) {
        let blocks: Vec<SparseMatrix> =
            (0..3).map(|i| generate_random_sparse(12, 9, 0.4, seed + i).unwrap()).collect();
        let refs: Vec<&SparseMatrix> = blocks.iter().collect();
        let coeffs = [1.25, -0.5, 2.0];
        let scaled_coeffs: Vec<f64> = coeffs.iter().map(|c| alpha * c).collect();
        let base = sparse_linear_combination(&refs, &coeffs).unwrap();
        let scaled = sparse_linear_combination(&refs, &scaled_coeffs).unwrap();
        // compare entrywise through dense copies
        let bd = base.to_dense();
        let sd = scaled.to_dense();
        for r in 0..bd.rows() {
            for c in 0..bd.cols() {
                let want = alpha * bd.get(r, c);
                let got = sd.get(r, c);
                prop_assert!((want - got).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn market_round_trip(a in arb_sparse(16, 16)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        lwcode::market::write_matrix_market(&a, &path).unwrap();
        let back = lwcode::market::read_matrix_market(&path).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn dense_market_round_trip(rows in 1usize..10, cols in 1usize..10, seed in 0u64..1000) {
        let m = generate_random_sparse(rows, cols, 1.0, seed).unwrap().to_dense();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.mtx");
        lwcode::market::write_dense_market(&m, &path).unwrap();
        let back = lwcode::market::read_dense_market(&path).unwrap();
        prop_assert_eq!(m, back);
    }
}

#[test]
fn column_padding_never_changes_values() {
    let a = generate_random_sparse(10, 13, 0.5, 7).unwrap();
    let padded = a.pad_columns(5);
    assert_eq!(padded.cols(), 15);
    let ad = a.to_dense();
    let pd = padded.to_dense();
    for r in 0..10 {
        for c in 0..13 {
            assert_eq!(ad.get(r, c), pd.get(r, c));
        }
        for c in 13..15 {
            assert_eq!(pd.get(r, c), 0.0);
        }
    }
}
