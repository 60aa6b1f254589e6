//! Canonical matrices shared by the tests, the CLI, and the benchmarks.
//!
//! One fixture per cost-model class, all of them MDS over gf(2^8, 0x11B) so
//! every fixture can drive a real generation pass. The frozen constants in
//! this module were produced once by the deterministic searches in [`mds`]
//! and are pinned by tests.

use crate::field::FieldSpec;
use crate::matrix::Matrix;
use crate::mds::{optimal_candidate, MatrixClass};

/// The default field, gf(2^8, 0x11B).
pub fn aes_field() -> FieldSpec {
    FieldSpec::aes()
}

/// The AES MixColumns matrix: circulant with first row `02 03 01 01`.
pub fn aes_circulant() -> Matrix {
    Matrix::circulant(aes_field(), &[0x02, 0x03, 0x01, 0x01]).expect("fixture is well-formed")
}

/// Frozen result of `find_optimal_instance(aes_field())`.
pub const OPTIMAL_AB: (u8, u8) = (0x02, 0x05);

/// Two-constant bi-regular MDS instance: nine 1-entries, two distinct
/// non-one constants.
pub fn optimal_fixture() -> Matrix {
    optimal_candidate(aes_field(), OPTIMAL_AB.0, OPTIMAL_AB.1).expect("fixture is well-formed")
}

/// Frozen first row of the circulant class fixture: one 1-entry and three
/// distinct constants, the lexicographically first such row that is MDS.
pub const CIRCULANT_ROW: [u8; 4] = [0x01, 0x02, 0x03, 0x04];

pub fn circulant_fixture() -> Matrix {
    Matrix::circulant(aes_field(), &CIRCULANT_ROW).expect("fixture is well-formed")
}

/// Same entry multiset as [`circulant_fixture`] but with two rows swapped,
/// breaking the rotation structure while preserving the MDS property (row
/// permutations only reorder submatrix rows).
pub fn non_circulant_fixture() -> Matrix {
    let c = circulant_fixture();
    let rows: Vec<Vec<u8>> = vec![
        c.row(0).to_vec(),
        c.row(2).to_vec(),
        c.row(1).to_vec(),
        c.row(3).to_vec(),
    ];
    Matrix::from_rows(aes_field(), &rows).expect("fixture is well-formed")
}

/// Frozen non-optimal fixture: 1-entries on the diagonal, twelve pairwise
/// distinct constants elsewhere (so the only repeated value is 0x01).
pub const NON_OPTIMAL_ENTRIES: [u8; 16] = [
    0x01, 0x02, 0x03, 0x04, //
    0x05, 0x01, 0x06, 0x07, //
    0x08, 0x09, 0x01, 0x0A, //
    0x0B, 0x0C, 0x0D, 0x01,
];

pub fn non_optimal_fixture() -> Matrix {
    Matrix::new(aes_field(), 4, 4, NON_OPTIMAL_ENTRIES.to_vec()).expect("fixture is well-formed")
}

/// Worst-case fixture: sixteen pairwise distinct constants, none equal to
/// 0x01. Built as a Cauchy matrix `a[i][j] = inv(x[i] ^ y[j])` with
/// `x = [0, 1, 2, 3]` and `y = [4, 8, 16, 32]`; every square submatrix of a
/// Cauchy matrix is again Cauchy and therefore nonsingular, so the matrix is
/// MDS by construction.
pub fn worst_case_fixture() -> Matrix {
    let spec = aes_field();
    let xs = [0x00u8, 0x01, 0x02, 0x03];
    let ys = [0x04u8, 0x08, 0x10, 0x20];
    let mut entries = Vec::with_capacity(16);
    for &x in &xs {
        for &y in &ys {
            entries.push(spec.inv(x ^ y).expect("x and y sets are disjoint"));
        }
    }
    Matrix::new(spec, 4, 4, entries).expect("fixture is well-formed")
}

/// One labeled fixture per cost-model class, in class order.
pub fn class_fixtures() -> Vec<(MatrixClass, Matrix)> {
    vec![
        (MatrixClass::Optimal, optimal_fixture()),
        (MatrixClass::Circulant, circulant_fixture()),
        (MatrixClass::NonCirculant, non_circulant_fixture()),
        (MatrixClass::NonOptimal, non_optimal_fixture()),
        (MatrixClass::WorstCase, worst_case_fixture()),
    ]
}
