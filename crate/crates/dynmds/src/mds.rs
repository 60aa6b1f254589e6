//! MDS verification and dynamic session matrices.
//!
//! A square matrix over GF(2^q) is MDS exactly when every square submatrix
//! is nonsingular. Scaling an MDS matrix entry-wise by a nonzero constant
//! preserves the property (every k x k submatrix determinant picks up the
//! factor e^k, which is nonzero), so one verified seed matrix yields up to
//! 2^q - 1 distinct session matrices at the cost of a scalar pass instead of
//! a fresh search.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::field::{build_tables, FieldElement, FieldSpec, MulTables};
use crate::matrix::{square_minor_indices, Matrix, MatrixError, MinorIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MdsError {
    #[error("NotSquare: MDS verification requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("ZeroConstant: the scaling constant e must be a nonzero field element")]
    ZeroConstant,
    #[error("NotMds: matrix fails MDS verification (singular minor at {0})")]
    NotMds(String),
    #[error("BadPivot: {0}")]
    BadPivot(String),
    #[error("NoInstance: no (a, b) pair yields an MDS instance of the two-constant pattern over {0}")]
    NoInstance(FieldSpec),
    #[error("DomainTooLarge: branch number sweeps order^dim vectors ({order}^{dim} here), which exceeds the {limit} limit")]
    DomainTooLarge { order: usize, dim: usize, limit: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Verdict of an MDS check. `witness` names the first singular minor in
/// canonical enumeration order when the check fails; `minors_checked` is the
/// number of submatrix determinants actually evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    pub is_mds: bool,
    pub witness: Option<MinorIndex>,
    pub minors_checked: usize,
}

impl MdsReport {
    pub fn to_json(&self) -> Value {
        json!({
            "is_mds": self.is_mds,
            "witness_rows": self.witness.as_ref().map(MinorIndex::rows),
            "witness_cols": self.witness.as_ref().map(MinorIndex::cols),
            "minors_checked": self.minors_checked,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("is_mds: {}\n", self.is_mds);
        if let Some(w) = &self.witness {
            out.push_str(&format!(
                "witness_rows: {:?}\nwitness_cols: {:?}\n",
                w.rows(),
                w.cols()
            ));
        }
        out.push_str(&format!("minors_checked: {}\n", self.minors_checked));
        out
    }
}

/// Structural statistics driving classification and the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixMetrics {
    /// Entries equal to 0x01 (multiplications by them are free).
    pub ones_count: usize,
    /// Distinct entry values other than 0x01.
    pub distinct_nonone_constants: usize,
    /// True when every 2x2 submatrix has at least one row and at least one
    /// column with two distinct entries.
    pub biregular: bool,
}

impl MatrixMetrics {
    pub fn to_json(&self) -> Value {
        json!({
            "ones_count": self.ones_count,
            "distinct_constants": self.distinct_nonone_constants,
            "biregular": self.biregular,
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "ones_count: {}\ndistinct_constants: {}\nbiregular: {}\n",
            self.ones_count, self.distinct_nonone_constants, self.biregular
        )
    }
}

/// Cost-model taxonomy, cheapest generation first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatrixClass {
    Optimal,
    Circulant,
    NonCirculant,
    NonOptimal,
    WorstCase,
}

impl MatrixClass {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixClass::Optimal => "optimal",
            MatrixClass::Circulant => "circulant",
            MatrixClass::NonCirculant => "non-circulant",
            MatrixClass::NonOptimal => "non-optimal",
            MatrixClass::WorstCase => "worst-case",
        }
    }

    pub const ALL: [MatrixClass; 5] = [
        MatrixClass::Optimal,
        MatrixClass::Circulant,
        MatrixClass::NonCirculant,
        MatrixClass::NonOptimal,
        MatrixClass::WorstCase,
    ];
}

impl std::fmt::Display for MatrixClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds for the `Optimal` class, calibrated to the two-constant 4x4
/// pattern (nine 1-entries, two distinct non-one constants).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyThresholds {
    pub min_ones: usize,
    pub max_constants: usize,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { min_ones: 9, max_constants: 2 }
    }
}

/// Early-exit MDS check: submatrix determinants are evaluated in canonical
/// order (ascending size, lexicographic row set, lexicographic column set)
/// and the scan stops at the first singular minor.
pub fn is_mds(a: &Matrix) -> Result<MdsReport, MdsError> {
    let n = require_square(a)?;
    let mut checked = 0;
    for idx in square_minor_indices(n) {
        checked += 1;
        if a.submatrix(&idx)?.determinant()? == 0 {
            return Ok(MdsReport { is_mds: false, witness: Some(idx), minors_checked: checked });
        }
    }
    Ok(MdsReport { is_mds: true, witness: None, minors_checked: checked })
}

/// Full-enumeration MDS check: evaluates every submatrix determinant with no
/// early exit, using the cofactor-expansion determinant as an independent
/// route. Oracle counterpart of [`is_mds`]; the two must agree on verdict
/// and witness.
pub fn is_mds_exhaustive(a: &Matrix) -> Result<MdsReport, MdsError> {
    let n = require_square(a)?;
    let mut checked = 0;
    let mut witness = None;
    for idx in square_minor_indices(n) {
        checked += 1;
        if a.submatrix(&idx)?.determinant_cofactor()? == 0 && witness.is_none() {
            witness = Some(idx);
        }
    }
    Ok(MdsReport { is_mds: witness.is_none(), witness, minors_checked: checked })
}

/// Entry-wise scaling of a verified MDS matrix by a nonzero constant. The
/// input is verified; in builds with debug assertions the output is
/// re-verified as well.
pub fn scale_mds(a: &Matrix, e: FieldElement) -> Result<Matrix, MdsError> {
    if e == 0 {
        return Err(MdsError::ZeroConstant);
    }
    let report = is_mds(a)?;
    if !report.is_mds {
        return Err(MdsError::NotMds(report.witness.expect("failing check has witness").to_string()));
    }
    let scaled = a.scalar_mul(e);
    debug_assert!(
        is_mds(&scaled).map(|r| r.is_mds).unwrap_or(false),
        "scaling by a nonzero constant must preserve the MDS property"
    );
    Ok(scaled)
}

/// Scales by the inverse of `pivot`, mapping every `pivot` entry to 0x01.
/// The pivot must occur in the matrix and differ from 0x00 and 0x01.
pub fn normalize_by_pivot(a: &Matrix, pivot: FieldElement) -> Result<Matrix, MdsError> {
    if pivot == 0 || pivot == 1 {
        return Err(MdsError::BadPivot(format!(
            "pivot {pivot:#04x} must differ from 0x00 and 0x01"
        )));
    }
    if !a.entries().contains(&pivot) {
        return Err(MdsError::BadPivot(format!(
            "pivot {pivot:#04x} does not occur in the matrix"
        )));
    }
    let pivot_inv = a.spec().inv(pivot)?;
    scale_mds(a, pivot_inv)
}

/// Ones count, distinct non-one constants, and bi-regularity.
pub fn metrics(a: &Matrix) -> MatrixMetrics {
    let ones_count = a.entries().iter().filter(|&&v| v == 1).count();
    let distinct_nonone_constants =
        a.distinct_values().iter().filter(|&&v| v != 1).count();
    MatrixMetrics { ones_count, distinct_nonone_constants, biregular: is_biregular(a) }
}

fn is_biregular(a: &Matrix) -> bool {
    for i in 0..a.rows() {
        for j in (i + 1)..a.rows() {
            for k in 0..a.cols() {
                for l in (k + 1)..a.cols() {
                    let (p, q) = (a.get(i, k), a.get(i, l));
                    let (r, s) = (a.get(j, k), a.get(j, l));
                    let row_ok = p != q || r != s;
                    let col_ok = p != r || q != s;
                    if !(row_ok && col_ok) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Assigns the cost-model class with [`ClassifyThresholds::default`].
pub fn classify(a: &Matrix) -> Result<MatrixClass, MdsError> {
    classify_with(a, &ClassifyThresholds::default())
}

/// Classification precedence (the taxonomy covers MDS matrices only, so a
/// non-MDS input is rejected with the failing minor as a witness):
/// 1. `Optimal` — bi-regular with at least `min_ones` 1-entries and at most
///    `max_constants` distinct non-one constants;
/// 2. `Circulant` — every row is the first row rotated right by its index;
/// 3. `WorstCase` — all entries pairwise distinct;
/// 4. `NonCirculant` — some non-one value occurs more than once;
/// 5. `NonOptimal` — everything else (the only repeated value is 0x01).
pub fn classify_with(a: &Matrix, th: &ClassifyThresholds) -> Result<MatrixClass, MdsError> {
    let n = require_square(a)?;
    let report = is_mds(a)?;
    if let Some(w) = report.witness {
        return Err(MdsError::NotMds(w.to_string()));
    }
    let m = metrics(a);
    if m.biregular && m.ones_count >= th.min_ones && m.distinct_nonone_constants <= th.max_constants
    {
        return Ok(MatrixClass::Optimal);
    }
    if is_circulant(a, n) {
        return Ok(MatrixClass::Circulant);
    }
    if a.distinct_values().len() == a.entries().len() {
        return Ok(MatrixClass::WorstCase);
    }
    if has_repeated_nonone(a) {
        return Ok(MatrixClass::NonCirculant);
    }
    Ok(MatrixClass::NonOptimal)
}

fn is_circulant(a: &Matrix, n: usize) -> bool {
    let first = a.row(0);
    (1..n).all(|i| (0..n).all(|j| a.get(i, j) == first[(j + n - i) % n]))
}

fn has_repeated_nonone(a: &Matrix) -> bool {
    let mut counts = BTreeMap::new();
    for &v in a.entries() {
        if v != 1 {
            *counts.entry(v).or_insert(0usize) += 1;
        }
    }
    counts.values().any(|&c| c > 1)
}

/// The 4x4 two-constant bi-regular pattern: nine 1-entries plus two
/// constants `a` and `b`, each filling out one Latin-square layer.
pub fn optimal_candidate(
    spec: FieldSpec,
    a: FieldElement,
    b: FieldElement,
) -> Result<Matrix, MdsError> {
    Ok(Matrix::from_rows(
        spec,
        &[
            vec![a, 1, 1, 1],
            vec![1, 1, b, a],
            vec![1, a, 1, b],
            vec![1, b, a, 1],
        ],
    )?)
}

/// Result of [`find_optimal_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalInstance {
    pub a: FieldElement,
    pub b: FieldElement,
    pub matrix: Matrix,
}

/// Deterministic search for the lexicographically first `(a, b)` that makes
/// the two-constant pattern MDS: `a` ascends from 0x02, then `b` ascends
/// from 0x02 skipping `a`.
pub fn find_optimal_instance(spec: FieldSpec) -> Result<OptimalInstance, MdsError> {
    for a in 2..spec.order() as u16 {
        for b in 2..spec.order() as u16 {
            if a == b {
                continue;
            }
            let candidate = optimal_candidate(spec, a as FieldElement, b as FieldElement)?;
            if is_mds(&candidate)?.is_mds {
                return Ok(OptimalInstance {
                    a: a as FieldElement,
                    b: b as FieldElement,
                    matrix: candidate,
                });
            }
        }
    }
    Err(MdsError::NoInstance(spec))
}

/// Derives the session matrix `e * seed` from a verified seed. Products are
/// memoized per distinct seed constant (repeat entries become lookups,
/// 1-entries pass `e` through unchanged).
pub fn derive_session_matrix(seed: &Matrix, e: FieldElement) -> Result<Matrix, MdsError> {
    Ok(derive_session_matrix_with_tables(seed, e)?.0)
}

/// [`derive_session_matrix`] plus the per-constant product rows for the
/// derived matrix's distinct entries, i.e. everything a cipher needs to run
/// its mixing layer off table lookups. This is the full generation pass the
/// cost model prices.
pub fn derive_session_matrix_with_tables(
    seed: &Matrix,
    e: FieldElement,
) -> Result<(Matrix, MulTables), MdsError> {
    if e == 0 {
        return Err(MdsError::ZeroConstant);
    }
    let report = is_mds(seed)?;
    if !report.is_mds {
        return Err(MdsError::NotMds(report.witness.expect("failing check has witness").to_string()));
    }
    let spec = seed.spec();
    let mut products: BTreeMap<FieldElement, FieldElement> = BTreeMap::new();
    let entries: Vec<FieldElement> = seed
        .entries()
        .iter()
        .map(|&v| {
            if v == 1 {
                e
            } else {
                *products.entry(v).or_insert_with(|| spec.mul(e, v))
            }
        })
        .collect();
    let derived = Matrix::new(spec, seed.rows(), seed.cols(), entries)?;
    debug_assert_eq!(derived, seed.scalar_mul(e));
    debug_assert!(
        is_mds(&derived).map(|r| r.is_mds).unwrap_or(false),
        "scaling by a nonzero constant must preserve the MDS property"
    );
    let tables = build_tables(spec, &derived.distinct_values())?;
    Ok((derived, tables))
}

/// Largest input domain `branch_number` will sweep (2^24 vectors).
pub const BRANCH_DOMAIN_LIMIT: usize = 1 << 24;

/// Symbol-level branch number: `min over v != 0 of wt(v) + wt(A v)`, where
/// `wt` counts nonzero coordinates. Equals n + 1 exactly when A is MDS.
/// Exhaustive over all `2^(q*n) - 1` nonzero inputs, so it rejects domains
/// larger than [`BRANCH_DOMAIN_LIMIT`].
pub fn branch_number(a: &Matrix) -> Result<usize, MdsError> {
    let n = require_square(a)?;
    let order = a.spec().order();
    let total = order
        .checked_pow(n as u32)
        .filter(|&t| t <= BRANCH_DOMAIN_LIMIT)
        .ok_or(MdsError::DomainTooLarge { order, dim: n, limit: BRANCH_DOMAIN_LIMIT })?;
    let mut min = usize::MAX;
    let mut v = vec![0 as FieldElement; n];
    for code in 1..total {
        let mut c = code;
        for slot in v.iter_mut() {
            *slot = (c % order) as FieldElement;
            c /= order;
        }
        let wt_in = v.iter().filter(|&&x| x != 0).count();
        if wt_in >= min {
            continue;
        }
        let out = a.mul_vec(&v)?;
        let wt_out = out.iter().filter(|&&x| x != 0).count();
        min = min.min(wt_in + wt_out);
    }
    Ok(min)
}

fn require_square(a: &Matrix) -> Result<usize, MdsError> {
    if !a.is_square() {
        return Err(MdsError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    Ok(a.rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn gf256() -> FieldSpec {
        FieldSpec::aes()
    }

    #[test]
    fn single_zero_entry_is_its_own_witness() {
        let m = Matrix::new(gf256(), 1, 1, vec![0]).unwrap();
        let report = is_mds(&m).unwrap();
        assert!(!report.is_mds);
        let w = report.witness.unwrap();
        assert_eq!((w.rows(), w.cols()), (&[0usize][..], &[0usize][..]));
        assert_eq!(report.minors_checked, 1);
    }

    #[test]
    fn identity_fails_at_first_off_diagonal_zero() {
        let id = Matrix::identity(gf256(), 2).unwrap();
        let report = is_mds(&id).unwrap();
        assert!(!report.is_mds);
        let w = report.witness.as_ref().unwrap();
        assert_eq!((w.rows(), w.cols()), (&[0usize][..], &[1usize][..]));
        let oracle = is_mds_exhaustive(&id).unwrap();
        assert_eq!(oracle.is_mds, report.is_mds);
        assert_eq!(oracle.witness, report.witness);
        assert_eq!(oracle.minors_checked, 5);
    }

    #[test]
    fn aes_mix_columns_matrix_is_mds() {
        let report = is_mds(&fixtures::aes_circulant()).unwrap();
        assert!(report.is_mds);
        assert_eq!(report.minors_checked, 69);
        assert_eq!(report.witness, None);
    }

    #[test]
    fn non_square_is_rejected() {
        let m = Matrix::new(gf256(), 2, 3, vec![1; 6]).unwrap();
        assert!(matches!(is_mds(&m), Err(MdsError::NotSquare { rows: 2, cols: 3 })));
        assert!(matches!(classify(&m), Err(MdsError::NotSquare { .. })));
    }

    #[test]
    fn scale_rejects_zero_and_non_mds_input() {
        let aes = fixtures::aes_circulant();
        assert!(matches!(scale_mds(&aes, 0), Err(MdsError::ZeroConstant)));
        let id = Matrix::identity(gf256(), 4).unwrap();
        assert!(matches!(scale_mds(&id, 2), Err(MdsError::NotMds(_))));
    }

    #[test]
    fn scaling_by_one_is_identity() {
        let aes = fixtures::aes_circulant();
        assert_eq!(scale_mds(&aes, 1).unwrap(), aes);
    }

    #[test]
    fn derive_matches_plain_scaling() {
        let aes = fixtures::aes_circulant();
        for e in [0x02u8, 0x1D, 0xFF] {
            let derived = derive_session_matrix(&aes, e).unwrap();
            assert_eq!(derived, aes.scalar_mul(e));
        }
    }

    #[test]
    fn derive_builds_rows_for_every_derived_constant() {
        let aes = fixtures::aes_circulant();
        let (derived, tables) = derive_session_matrix_with_tables(&aes, 0x07).unwrap();
        let expected = derived.distinct_values();
        assert_eq!(tables.constants().collect::<Vec<_>>(), expected);
        for &c in &expected {
            let row = tables.row(c).unwrap();
            for x in gf256().elements() {
                assert_eq!(row[x as usize], gf256().mul(c, x));
            }
        }
    }

    #[test]
    fn normalize_maps_pivot_occurrences_to_one() {
        let inst = fixtures::optimal_fixture();
        let m = metrics(&inst);
        assert_eq!(m.ones_count, 9);
        let a = inst.get(0, 0);
        let normalized = normalize_by_pivot(&inst, a).unwrap();
        let pivot_multiplicity = inst.entries().iter().filter(|&&v| v == a).count();
        assert_eq!(metrics(&normalized).ones_count, pivot_multiplicity);
        // The normalized matrix is exactly inv(a) * original, entry by entry.
        let a_inv = gf256().inv(a).unwrap();
        for (got, &orig) in normalized.entries().iter().zip(inst.entries()) {
            assert_eq!(*got, gf256().mul(a_inv, orig));
        }
    }

    #[test]
    fn normalize_rejects_bad_pivots() {
        let inst = fixtures::optimal_fixture();
        assert!(matches!(normalize_by_pivot(&inst, 0), Err(MdsError::BadPivot(_))));
        assert!(matches!(normalize_by_pivot(&inst, 1), Err(MdsError::BadPivot(_))));
        // 0xF3 is not an entry of the instance.
        assert!(matches!(normalize_by_pivot(&inst, 0xF3), Err(MdsError::BadPivot(_))));
    }

    #[test]
    fn metrics_of_all_ones_matrix() {
        let ones = Matrix::new(gf256(), 4, 4, vec![1; 16]).unwrap();
        let m = metrics(&ones);
        assert_eq!(m.ones_count, 16);
        assert_eq!(m.distinct_nonone_constants, 0);
        assert!(!m.biregular);
    }

    #[test]
    fn classify_canonical_fixtures() {
        for (class, matrix) in fixtures::class_fixtures() {
            assert_eq!(classify(&matrix).unwrap(), class, "fixture for {class}");
        }
        assert_eq!(classify(&fixtures::aes_circulant()).unwrap(), MatrixClass::Circulant);
    }

    #[test]
    fn classification_is_not_fooled_by_rotated_assignments() {
        // Same multiset as the circulant fixture but rows swapped: no longer
        // successive rotations.
        let m = fixtures::non_circulant_fixture();
        assert_eq!(classify(&m).unwrap(), MatrixClass::NonCirculant);
    }

    #[test]
    fn found_instance_is_frozen() {
        let inst = find_optimal_instance(gf256()).unwrap();
        assert_eq!((inst.a, inst.b), fixtures::OPTIMAL_AB);
        assert_eq!(inst.matrix, fixtures::optimal_fixture());
        assert_eq!(classify(&inst.matrix).unwrap(), MatrixClass::Optimal);
        let m = metrics(&inst.matrix);
        assert!(m.biregular);
        assert_eq!(m.distinct_nonone_constants, 2);
    }

    #[test]
    fn no_instance_over_tiny_fields() {
        // 4x4 MDS matrices cannot exist over GF(4): the search must report
        // that rather than loop forever.
        let gf4 = FieldSpec::new(2, 0x7).unwrap();
        assert!(matches!(find_optimal_instance(gf4), Err(MdsError::NoInstance(_))));
    }

    #[test]
    fn branch_number_detects_mds_and_rejects_huge_domains() {
        let gf16 = FieldSpec::new(4, 0x13).unwrap();
        // [[1, 1], [1, 2]] over gf(2^4): all four 1x1 minors and the
        // determinant (1*2 ^ 1*1 = 3) are nonzero, so it is MDS.
        let mds = Matrix::from_rows(gf16, &[vec![1, 1], vec![1, 2]]).unwrap();
        assert!(is_mds(&mds).unwrap().is_mds);
        assert_eq!(branch_number(&mds).unwrap(), 3);
        let id = Matrix::identity(gf16, 2).unwrap();
        assert_eq!(branch_number(&id).unwrap(), 2);
        // 256^4 input vectors is beyond the exhaustive-sweep limit.
        assert!(matches!(
            branch_number(&fixtures::aes_circulant()),
            Err(MdsError::DomainTooLarge { .. })
        ));
    }

    #[test]
    fn report_serialization_has_fixed_keys() {
        let report = is_mds(&fixtures::aes_circulant()).unwrap();
        let v = report.to_json();
        assert_eq!(v["is_mds"], true);
        assert_eq!(v["minors_checked"], 69);
        assert!(v["witness_rows"].is_null());
        assert!(v["witness_cols"].is_null());
        let failing = is_mds(&Matrix::identity(gf256(), 2).unwrap()).unwrap();
        let v = failing.to_json();
        assert_eq!(v["witness_rows"], json!([0]));
        assert_eq!(v["witness_cols"], json!([1]));
        assert!(failing.to_text().contains("is_mds: false"));

        let m = metrics(&fixtures::optimal_fixture()).to_json();
        assert_eq!(m["ones_count"], 9);
        assert_eq!(m["distinct_constants"], 2);
        assert_eq!(m["biregular"], true);
    }
}
