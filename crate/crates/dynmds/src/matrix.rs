//! Dense matrices over GF(2^q).
//!
//! Row-major storage, shape-capped at [`MAX_DIM`] so exhaustive submatrix
//! enumeration stays tractable. The determinant has two independent routes:
//! Gaussian elimination with first-nonzero pivoting (the workhorse) and
//! cofactor expansion (the cross-check oracle); the test suite holds them to
//! exact agreement.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};

/// Shape cap for rows and columns.
///
/// Exhaustive MDS verification of an n x n matrix inspects
/// `sum_k C(n,k)^2` square submatrices:
///
/// | n | submatrices |
/// |---|-------------|
/// | 1 | 1           |
/// | 2 | 5           |
/// | 3 | 19          |
/// | 4 | 69          |
/// | 5 | 251         |
/// | 6 | 923         |
/// | 7 | 3431        |
/// | 8 | 12869       |
pub const MAX_DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NotSquare: operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),
    #[error("Singular: matrix has no inverse")]
    Singular,
    #[error("DimensionTooLarge: {0} exceeds the supported cap of 8")]
    DimensionTooLarge(usize),
    #[error("EmptyMatrix: rows and columns must both be positive")]
    Empty,
    #[error("EntryOutOfRange: {value:#04X} is not an element of {spec}")]
    EntryOutOfRange { value: u8, spec: FieldSpec },
    #[error("FieldMismatch: operands belong to different fields")]
    FieldMismatch,
    #[error("ParseError: {0}")]
    Parse(String),
}

/// Dense matrix over one GF(2^q), entries stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl Matrix {
    pub fn new(
        spec: FieldSpec,
        rows: usize,
        cols: usize,
        entries: Vec<FieldElement>,
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if rows > MAX_DIM {
            return Err(MatrixError::DimensionTooLarge(rows));
        }
        if cols > MAX_DIM {
            return Err(MatrixError::DimensionTooLarge(cols));
        }
        if entries.len() != rows * cols {
            return Err(MatrixError::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&v| !spec.contains(v)) {
            return Err(MatrixError::EntryOutOfRange { value: bad, spec });
        }
        Ok(Matrix { spec, rows, cols, entries })
    }

    pub fn from_rows(spec: FieldSpec, rows: &[Vec<FieldElement>]) -> Result<Self, MatrixError> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(MatrixError::ShapeMismatch("ragged rows".into()));
        }
        Matrix::new(spec, height, width, rows.concat())
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Result<Self, MatrixError> {
        let mut entries = vec![0; n.checked_mul(n).ok_or(MatrixError::DimensionTooLarge(n))?];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Matrix::new(spec, n, n, entries)
    }

    /// n x n matrix whose row `i` is `first_row` rotated `i` places to the
    /// right (row 2 of `[a, b, c, d]` is `[d, a, b, c]`).
    pub fn circulant(spec: FieldSpec, first_row: &[FieldElement]) -> Result<Self, MatrixError> {
        let n = first_row.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(first_row[(j + n - i) % n]);
            }
        }
        Matrix::new(spec, n, n, entries)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Distinct entry values in ascending order.
    pub fn distinct_values(&self) -> Vec<FieldElement> {
        let mut vals = self.entries.clone();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// Entry-wise product with a scalar; e = 0 is allowed here (the MDS
    /// layer imposes its own nonzero rule).
    pub fn scalar_mul(&self, e: FieldElement) -> Matrix {
        debug_assert!(self.spec.contains(e));
        let entries = self.entries.iter().map(|&v| self.spec.mul(e, v)).collect();
        Matrix { spec: self.spec, rows: self.rows, cols: self.cols, entries }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.spec != rhs.spec {
            return Err(MatrixError::FieldMismatch);
        }
        if self.cols != rhs.rows {
            return Err(MatrixError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut entries = vec![0; self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    entries[i * rhs.cols + j] ^= self.spec.mul(a, rhs.get(k, j));
                }
            }
        }
        Matrix::new(self.spec, self.rows, rhs.cols, entries)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::ShapeMismatch(format!(
                "vector length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![0; self.rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0;
            for (j, &x) in v.iter().enumerate() {
                acc ^= self.spec.mul(self.get(i, j), x);
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Determinant via Gaussian elimination with first-nonzero pivoting.
    /// Row swaps cost no sign in characteristic 2, so the determinant is
    /// simply the product of the pivots.
    pub fn determinant(&self) -> Result<FieldElement, MatrixError> {
        let n = self.square_dim()?;
        let mut m = self.entries.clone();
        let mut det: FieldElement = 1;
        for col in 0..n {
            let Some(pivot_row) = (col..n).find(|&r| m[r * n + col] != 0) else {
                return Ok(0);
            };
            if pivot_row != col {
                for c in 0..n {
                    m.swap(pivot_row * n + c, col * n + c);
                }
            }
            let pivot = m[col * n + col];
            det = self.spec.mul(det, pivot);
            let pivot_inv = self.spec.inv(pivot).expect("pivot is nonzero");
            for r in (col + 1)..n {
                let factor = self.spec.mul(m[r * n + col], pivot_inv);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    m[r * n + c] ^= self.spec.mul(factor, m[col * n + c]);
                }
            }
        }
        Ok(det)
    }

    /// Determinant via cofactor expansion along the first row. Exponential
    /// in n; kept as the independent oracle for the elimination route.
    pub fn determinant_cofactor(&self) -> Result<FieldElement, MatrixError> {
        let n = self.square_dim()?;
        Ok(cofactor_det(self.spec, n, &self.entries))
    }

    pub fn submatrix(&self, idx: &MinorIndex) -> Result<Matrix, MatrixError> {
        if let Some(&r) = idx.rows.iter().find(|&&r| r >= self.rows) {
            return Err(MatrixError::IndexOutOfRange(format!(
                "row {r} out of range for {} rows",
                self.rows
            )));
        }
        if let Some(&c) = idx.cols.iter().find(|&&c| c >= self.cols) {
            return Err(MatrixError::IndexOutOfRange(format!(
                "column {c} out of range for {} columns",
                self.cols
            )));
        }
        let mut entries = Vec::with_capacity(idx.rows.len() * idx.cols.len());
        for &r in &idx.rows {
            for &c in &idx.cols {
                entries.push(self.get(r, c));
            }
        }
        Matrix::new(self.spec, idx.rows.len(), idx.cols.len(), entries)
    }

    /// Inverse via Gauss-Jordan elimination on `[A | I]`.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let n = self.square_dim()?;
        let width = 2 * n;
        let mut aug = vec![0; n * width];
        for r in 0..n {
            for c in 0..n {
                aug[r * width + c] = self.get(r, c);
            }
            aug[r * width + n + r] = 1;
        }
        for col in 0..n {
            let Some(pivot_row) = (col..n).find(|&r| aug[r * width + col] != 0) else {
                return Err(MatrixError::Singular);
            };
            if pivot_row != col {
                for c in 0..width {
                    aug.swap(pivot_row * width + c, col * width + c);
                }
            }
            let pivot_inv = self.spec.inv(aug[col * width + col]).expect("pivot is nonzero");
            for c in 0..width {
                aug[col * width + c] = self.spec.mul(aug[col * width + c], pivot_inv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = aug[r * width + col];
                if factor == 0 {
                    continue;
                }
                for c in 0..width {
                    aug[r * width + c] ^= self.spec.mul(factor, aug[col * width + c]);
                }
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            entries.extend_from_slice(&aug[r * width + n..(r + 1) * width]);
        }
        Matrix::new(self.spec, n, n, entries)
    }

    fn square_dim(&self) -> Result<usize, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.rows)
    }
}

fn cofactor_det(spec: FieldSpec, n: usize, data: &[FieldElement]) -> FieldElement {
    if n == 1 {
        return data[0];
    }
    let mut det: FieldElement = 0;
    let mut minor = vec![0; (n - 1) * (n - 1)];
    for j in 0..n {
        let a = data[j];
        if a == 0 {
            continue; // signs vanish in characteristic 2, zero terms too
        }
        let mut k = 0;
        for r in 1..n {
            for c in 0..n {
                if c != j {
                    minor[k] = data[r * n + c];
                    k += 1;
                }
            }
        }
        det ^= spec.mul(a, cofactor_det(spec, n - 1, &minor));
    }
    det
}

/// Row/column index sets selecting a square submatrix. Both lists are
/// strictly increasing and of equal, positive length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorIndex {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl MinorIndex {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self, MatrixError> {
        if rows.is_empty() || rows.len() != cols.len() {
            return Err(MatrixError::ShapeMismatch(format!(
                "minor needs equally many rows and columns (>= 1), got {} and {}",
                rows.len(),
                cols.len()
            )));
        }
        for list in [&rows, &cols] {
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(MatrixError::IndexOutOfRange(
                    "minor indices must be strictly increasing".into(),
                ));
            }
        }
        Ok(MinorIndex { rows, cols })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Side length of the selected submatrix.
    pub fn order(&self) -> usize {
        self.rows.len()
    }
}

impl fmt::Display for MinorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rows {:?} x cols {:?}", self.rows, self.cols)
    }
}

/// Every square-submatrix selector of an n x n matrix in canonical order:
/// ascending size, then lexicographic row set, then lexicographic column set.
pub fn square_minor_indices(n: usize) -> Vec<MinorIndex> {
    let mut out = Vec::with_capacity(square_minor_count(n));
    for k in 1..=n {
        let subsets = subsets_of_size(n, k);
        for rows in &subsets {
            for cols in &subsets {
                out.push(MinorIndex { rows: rows.clone(), cols: cols.clone() });
            }
        }
    }
    out
}

/// `sum_k C(n,k)^2`, the number of square submatrices of an n x n matrix.
pub fn square_minor_count(n: usize) -> usize {
    (1..=n).map(|k| binomial(n, k) * binomial(n, k)).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

impl fmt::Display for Matrix {
    /// Text form consumed and produced by the CLI: a field header followed
    /// by one line of two-digit hex bytes per row.
    ///
    /// ```text
    /// gf(2^8, 0x11B)
    /// 02 03 01 01
    /// 01 02 03 01
    /// 01 01 02 03
    /// 03 01 01 02
    /// ```
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.spec)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| format!("{v:02x}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Matrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, MatrixError> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| MatrixError::Parse("empty matrix text".into()))?;
        let spec: FieldSpec = header.parse().map_err(|e| match e {
            crate::field::FieldError::Parse(msg) => MatrixError::Parse(msg),
            other => MatrixError::Parse(other.to_string()),
        })?;
        let mut rows: Vec<Vec<FieldElement>> = Vec::new();
        for line in lines {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    u8::from_str_radix(tok, 16)
                        .map_err(|_| MatrixError::Parse(format!("bad hex byte {tok:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Matrix::from_rows(spec, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf256() -> FieldSpec {
        FieldSpec::aes()
    }

    fn sample() -> Matrix {
        Matrix::from_rows(
            gf256(),
            &[vec![0x02, 0x03], vec![0x01, 0x01]],
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_shape_and_entries() {
        assert!(matches!(
            Matrix::new(gf256(), 2, 2, vec![1, 2, 3]),
            Err(MatrixError::ShapeMismatch(_))
        ));
        assert!(matches!(Matrix::new(gf256(), 0, 4, vec![]), Err(MatrixError::Empty)));
        assert!(matches!(
            Matrix::new(gf256(), 9, 1, vec![0; 9]),
            Err(MatrixError::DimensionTooLarge(9))
        ));
        let gf16 = FieldSpec::new(4, 0x13).unwrap();
        assert!(matches!(
            Matrix::new(gf16, 1, 2, vec![0x03, 0x10]),
            Err(MatrixError::EntryOutOfRange { value: 0x10, .. })
        ));
    }

    #[test]
    fn identity_determinant_is_one() {
        for n in 1..=4 {
            let id = Matrix::identity(gf256(), n).unwrap();
            assert_eq!(id.determinant().unwrap(), 1);
            assert_eq!(id.determinant_cofactor().unwrap(), 1);
        }
    }

    #[test]
    fn equal_rows_give_zero_determinant() {
        let m = Matrix::from_rows(gf256(), &[vec![7, 9], vec![7, 9]]).unwrap();
        assert_eq!(m.determinant().unwrap(), 0);
        assert_eq!(m.determinant_cofactor().unwrap(), 0);
    }

    #[test]
    fn determinant_rejects_non_square() {
        let m = Matrix::new(gf256(), 2, 3, vec![1; 6]).unwrap();
        assert!(matches!(m.determinant(), Err(MatrixError::NotSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn determinant_2x2_formula() {
        let f = gf256();
        let m = sample();
        let expected = f.add(f.mul(0x02, 0x01), f.mul(0x03, 0x01));
        assert_eq!(m.determinant().unwrap(), expected);
    }

    #[test]
    fn scalar_mul_by_zero_and_one() {
        let m = sample();
        assert_eq!(m.scalar_mul(1), m);
        assert!(m.scalar_mul(0).entries().iter().all(|&v| v == 0));
    }

    #[test]
    fn matmul_against_identity() {
        let m = sample();
        let id = Matrix::identity(gf256(), 2).unwrap();
        assert_eq!(m.matmul(&id).unwrap(), m);
        assert_eq!(id.matmul(&m).unwrap(), m);
        let wide = Matrix::new(gf256(), 2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert!(matches!(wide.matmul(&wide), Err(MatrixError::ShapeMismatch(_))));
    }

    #[test]
    fn mul_vec_matches_manual_expansion() {
        let f = gf256();
        let m = sample();
        let v = vec![0x05, 0x07];
        let out = m.mul_vec(&v).unwrap();
        assert_eq!(out[0], f.mul(0x02, 0x05) ^ f.mul(0x03, 0x07));
        assert_eq!(out[1], f.mul(0x01, 0x05) ^ f.mul(0x01, 0x07));
        assert!(m.mul_vec(&[1, 2, 3]).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let m = Matrix::from_rows(
            gf256(),
            &[
                vec![0x02, 0x03, 0x01, 0x01],
                vec![0x01, 0x02, 0x03, 0x01],
                vec![0x01, 0x01, 0x02, 0x03],
                vec![0x03, 0x01, 0x01, 0x02],
            ],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = Matrix::identity(gf256(), 4).unwrap();
        assert_eq!(m.matmul(&inv).unwrap(), id);
        assert_eq!(inv.matmul(&m).unwrap(), id);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Matrix::from_rows(gf256(), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.inverse(), Err(MatrixError::Singular));
    }

    #[test]
    fn circulant_rotates_right() {
        let m = Matrix::circulant(gf256(), &[0x0A, 0x0B, 0x0C, 0x0D]).unwrap();
        assert_eq!(m.row(0), &[0x0A, 0x0B, 0x0C, 0x0D]);
        assert_eq!(m.row(1), &[0x0D, 0x0A, 0x0B, 0x0C]);
        assert_eq!(m.row(2), &[0x0C, 0x0D, 0x0A, 0x0B]);
        assert_eq!(m.row(3), &[0x0B, 0x0C, 0x0D, 0x0A]);
    }

    #[test]
    fn minor_enumeration_counts() {
        assert_eq!(square_minor_count(4), 69);
        assert_eq!(square_minor_indices(4).len(), 69);
        let counts: Vec<usize> = (1..=8).map(square_minor_count).collect();
        assert_eq!(counts, vec![1, 5, 19, 69, 251, 923, 3431, 12869]);
        for n in 1..=8 {
            assert_eq!(square_minor_indices(n).len(), square_minor_count(n));
        }
    }

    #[test]
    fn minor_index_validation() {
        assert!(MinorIndex::new(vec![0, 1], vec![1, 2]).is_ok());
        assert!(MinorIndex::new(vec![], vec![]).is_err());
        assert!(MinorIndex::new(vec![0, 1], vec![0]).is_err());
        assert!(MinorIndex::new(vec![1, 0], vec![0, 1]).is_err());
        assert!(MinorIndex::new(vec![0, 0], vec![0, 1]).is_err());
    }

    #[test]
    fn submatrix_extracts_selected_entries() {
        let m = Matrix::from_rows(
            gf256(),
            &[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
        )
        .unwrap();
        let idx = MinorIndex::new(vec![0, 2], vec![1, 2]).unwrap();
        let sub = m.submatrix(&idx).unwrap();
        assert_eq!(sub.entries(), &[2, 3, 8, 9]);
        let bad = MinorIndex::new(vec![0, 3], vec![0, 1]).unwrap();
        assert!(matches!(m.submatrix(&bad), Err(MatrixError::IndexOutOfRange(_))));
    }

    #[test]
    fn text_format_round_trips() {
        let m = Matrix::circulant(gf256(), &[0x02, 0x03, 0x01, 0x01]).unwrap();
        let text = m.to_string();
        assert!(text.starts_with("gf(2^8, 0x11B)\n02 03 01 01\n"));
        let back: Matrix = text.parse().unwrap();
        assert_eq!(back, m);
        // Comments and blank lines are tolerated on input.
        let commented = format!("# seed matrix\n\n{text}");
        assert_eq!(commented.parse::<Matrix>().unwrap(), m);
        assert!("gf(2^8, 0x11B)\n02 zz".parse::<Matrix>().is_err());
        assert!("".parse::<Matrix>().is_err());
    }

    #[test]
    fn parse_rejects_out_of_field_entries() {
        let text = "gf(2^4, 0x13)\n01 02\n03 10\n";
        assert!(matches!(
            text.parse::<Matrix>(),
            Err(MatrixError::EntryOutOfRange { value: 0x10, .. })
        ));
    }
}
