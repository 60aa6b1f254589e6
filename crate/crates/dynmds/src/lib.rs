//! Dynamic MDS matrix toolkit.
//!
//! Building blocks for ciphers whose diffusion layer is re-derived per
//! session: binary extension field arithmetic ([`field`]), dense matrices
//! over those fields ([`matrix`]), MDS verification and session derivation
//! ([`mds`]), a generation-cost model ([`cost`]), and a small demonstration
//! SPN cipher ([`spn`]). Shared fixtures used by tests, the CLI, and the
//! benchmarks live in [`fixtures`].

pub mod cost;
pub mod field;
pub mod fixtures;
pub mod matrix;
pub mod mds;
pub mod spn;

pub use cost::{estimate_generation, rank_classes, render_rank_table, CostError, CostParams, CostReport};
pub use field::{build_tables, FieldElement, FieldError, FieldSpec, MulTables};
pub use matrix::{square_minor_count, square_minor_indices, Matrix, MatrixError, MinorIndex, MAX_DIM};
pub use mds::{
    branch_number, classify, classify_with, derive_session_matrix,
    derive_session_matrix_with_tables, find_optimal_instance, is_mds, is_mds_exhaustive, metrics,
    normalize_by_pivot, scale_mds, ClassifyThresholds, MatrixClass, MatrixMetrics, MdsError,
    MdsReport, OptimalInstance, BRANCH_DOMAIN_LIMIT,
};
pub use spn::{
    aes_sbox, derive_constant, derive_demo_key, derive_round_constant, AvalancheReport,
    MatrixMode, Session, Spn, SpnError, SpnParams, BLOCK_BYTES,
};
