//! Straggler-resilient coded distributed matrix computation with low-weight
//! cyclic encodings.
//!
//! The toolkit splits sparse inputs into block-columns, hands every worker a
//! random linear combination of a *small* number of blocks (the weight), and
//! reconstructs `A^T x` or `A^T B` exactly from any recovery-threshold
//! subset of worker results. Low weight preserves input sparsity, which cuts
//! both per-worker compute and the nonzeros the central node must transmit.
//!
//! Modules:
//! - [`sparse`]: CSR storage, partitioning, combination and product kernels;
//! - [`market`]: Matrix Market I/O;
//! - [`encoder`]: cyclic encoding plans and per-worker tasks;
//! - [`decoder`]: recovery from any threshold subset;
//! - [`stability`]: worst-case condition numbers and coefficient search;
//! - [`hetero`]: capacity-proportional virtualization of mixed fleets;
//! - [`verifier`]: combinatorial decodability oracles and bound audits;
//! - [`simulator`]: deterministic local execution and scheme comparison.

pub mod combinatorics;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod hetero;
pub mod market;
pub mod simulator;
pub mod sparse;
pub mod stability;
pub mod verifier;

pub use decoder::{
    build_decoding_system, decode, decode_least_squares, effective_row, is_recoverable,
    DecodingSystem, DEFAULT_RCOND,
};
pub use encoder::{
    encode_tasks, plan_dense_baseline, plan_matmat, plan_matmat_default_weights, plan_matvec,
    CoefficientDistribution, EncodeInput, EncodingPlan, PlanKind, WorkerTask,
};
pub use error::{Error, Result};
pub use hetero::{
    assign_hetero_tasks, q_over_delta, verify_partial_recovery, virtualize,
    HeterogeneousProfile, PhysicalAssignment, VirtualMapping,
};
pub use simulator::{
    communication_cost, compare_schemes, simulate, DelayModel, SimulationReport, StragglerSpec,
};
pub use sparse::{
    concat_block_columns, generate_random_sparse, predicted_encoded_density,
    sparse_linear_combination, BlockColumnPartition, DenseMatrix, SparseMatrix,
};
pub use stability::{
    coefficient_search, competitor_search_cost, condition_number, kappa_worst, KappaReport,
};
pub use verifier::{
    exhaustive_rank_audit, has_perfect_matching, matching_rank_agreement,
    min_participating_unknowns_union, rearranged_hall_bound, rho_bound, support_bipartite_graph,
    SupportGraph,
};
