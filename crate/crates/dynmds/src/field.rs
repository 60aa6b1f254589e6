//! Arithmetic in binary extension fields GF(2^q), 1 <= q <= 8.
//!
//! Elements are polynomials over GF(2) stored as bitmasks, so addition is
//! XOR and multiplication is carryless shift-and-XOR reduced modulo an
//! irreducible polynomial. The default field used throughout the crate is
//! `gf(2^8, 0x11B)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Element of GF(2^q), stored as the bitmask of its polynomial coefficients.
/// Valid values lie in `[0, 2^q)` for the governing [`FieldSpec`].
pub type FieldElement = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("ZeroInverse: 0x00 has no multiplicative inverse")]
    ZeroInverse,
    #[error("InvalidDegree: field degree must lie in 1..=8, got {0}")]
    InvalidDegree(u32),
    #[error("InvalidPolynomial: {poly:#X} does not have degree exactly {degree}")]
    WrongPolynomialDegree { degree: u32, poly: u16 },
    #[error("ReduciblePolynomial: {0:#X} is reducible over GF(2)")]
    ReduciblePolynomial(u16),
    #[error("NoGenerator: multiplicative group has no generator (reduction polynomial not irreducible?)")]
    NoGenerator,
    #[error("ParseError: {0}")]
    Parse(String),
}

/// A concrete GF(2^q): the extension degree plus the reduction polynomial.
///
/// Construction validates that the polynomial has degree exactly `q` and is
/// irreducible over GF(2), so every `FieldSpec` in circulation denotes a
/// genuine field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    degree: u8,
    poly: u16,
}

impl FieldSpec {
    pub const MAX_DEGREE: u32 = 8;

    pub fn new(degree: u32, poly: u16) -> Result<Self, FieldError> {
        if degree == 0 || degree > Self::MAX_DEGREE {
            return Err(FieldError::InvalidDegree(degree));
        }
        if poly_deg(poly as u32) != degree as i32 {
            return Err(FieldError::WrongPolynomialDegree { degree, poly });
        }
        if !is_irreducible(poly as u32, degree) {
            return Err(FieldError::ReduciblePolynomial(poly));
        }
        Ok(FieldSpec { degree: degree as u8, poly })
    }

    /// The field AES operates in: gf(2^8, 0x11B).
    pub fn aes() -> Self {
        FieldSpec { degree: 8, poly: 0x11B }
    }

    pub fn degree(&self) -> u32 {
        self.degree as u32
    }

    pub fn poly(&self) -> u16 {
        self.poly
    }

    /// Number of field elements, 2^q.
    pub fn order(&self) -> usize {
        1usize << self.degree
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        (x as usize) < self.order()
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order()).map(|v| v as FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.order()).map(|v| v as FieldElement)
    }

    /// Addition = coefficient-wise XOR. Self-inverse: every element is its
    /// own additive inverse.
    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        debug_assert!(self.contains(x) && self.contains(y));
        x ^ y
    }

    /// Carryless shift-and-XOR product reduced modulo the field polynomial.
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        debug_assert!(self.contains(x) && self.contains(y));
        let mut acc = 0u32;
        let a = x as u32;
        for bit in 0..self.degree {
            if (y >> bit) & 1 == 1 {
                acc ^= a << bit;
            }
        }
        self.reduce(acc)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm over
    /// GF(2)[x]. Cross-checked in the test suite against the independent
    /// Fermat route `pow(x, 2^q - 2)`.
    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        if x == 0 {
            return Err(FieldError::ZeroInverse);
        }
        debug_assert!(self.contains(x));
        // Invariant: t1 * x ≡ r1 (mod poly), t0 * x ≡ r0 (mod poly).
        let (mut r0, mut r1) = (self.poly as u32, x as u32);
        let (mut t0, mut t1) = (0u32, 1u32);
        while r1 != 0 {
            let (q, r) = poly_divmod(r0, r1);
            r0 = r1;
            r1 = r;
            let t = t0 ^ clmul(q, t1);
            t0 = t1;
            t1 = t;
        }
        debug_assert_eq!(r0, 1, "gcd(x, poly) must be 1 for an irreducible poly");
        let out = self.reduce(t0);
        debug_assert_eq!(self.mul(x, out), 1);
        Ok(out)
    }

    /// Square-and-multiply exponentiation; `pow(x, 0) == 1` for every x.
    pub fn pow(&self, x: FieldElement, mut n: u64) -> FieldElement {
        debug_assert!(self.contains(x));
        let mut result: FieldElement = 1;
        let mut base = x;
        while n > 0 {
            if n & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        result
    }

    fn reduce(&self, mut acc: u32) -> FieldElement {
        let p = self.poly as u32;
        let q = self.degree as i32;
        while acc != 0 && poly_deg(acc) >= q {
            acc ^= p << (poly_deg(acc) - q);
        }
        acc as FieldElement
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gf(2^{}, {:#X})", self.degree, self.poly)
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    /// Parses the textual form `gf(2^8, 0x11B)`. The polynomial accepts
    /// `0x`-prefixed hex or decimal.
    fn from_str(s: &str) -> Result<Self, FieldError> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let inner = lower
            .strip_prefix("gf(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| FieldError::Parse(format!("expected gf(2^q, poly), got {s:?}")))?;
        let (deg_part, poly_part) = inner
            .split_once(',')
            .ok_or_else(|| FieldError::Parse(format!("missing comma in {s:?}")))?;
        let degree: u32 = deg_part
            .strip_prefix("2^")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| FieldError::Parse(format!("bad degree {deg_part:?} in {s:?}")))?;
        let poly = if let Some(hex) = poly_part.strip_prefix("0x") {
            u16::from_str_radix(hex, 16)
        } else {
            poly_part.parse()
        }
        .map_err(|_| FieldError::Parse(format!("bad polynomial {poly_part:?} in {s:?}")))?;
        FieldSpec::new(degree, poly)
    }
}

/// Degree of a nonzero GF(2) polynomial bitmask.
fn poly_deg(p: u32) -> i32 {
    debug_assert!(p != 0);
    31 - p.leading_zeros() as i32
}

/// Carryless (polynomial) multiplication over GF(2).
fn clmul(a: u32, b: u32) -> u32 {
    let mut acc = 0u32;
    for bit in 0..32 {
        if (b >> bit) & 1 == 1 {
            acc ^= a << bit;
        }
    }
    acc
}

/// Polynomial division over GF(2): returns (quotient, remainder).
fn poly_divmod(a: u32, b: u32) -> (u32, u32) {
    debug_assert!(b != 0);
    let mut r = a;
    let mut q = 0u32;
    let db = poly_deg(b);
    while r != 0 && poly_deg(r) >= db {
        let shift = poly_deg(r) - db;
        q ^= 1 << shift;
        r ^= b << shift;
    }
    (q, r)
}

/// Trial division by every GF(2) polynomial of degree 1..=q/2.
fn is_irreducible(poly: u32, degree: u32) -> bool {
    for d in 1..=(degree / 2) {
        for cand in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_divmod(poly, cand).1 == 0 {
                return false;
            }
        }
    }
    true
}

/// Log/antilog tables plus per-constant product rows.
///
/// The log and antilog tables cover the whole multiplicative group (2^q - 1
/// entries); each requested constant `c` gets a full product row
/// `[c*0, c*1, ..., c*(2^q - 1)]` so later multiplications by `c` become a
/// single lookup. Immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct MulTables {
    spec: FieldSpec,
    /// `log[x - 1]` = discrete log of nonzero `x` base the generator.
    log: Vec<u8>,
    /// `antilog[k]` = generator^k, length 2^q - 1.
    antilog: Vec<u8>,
    rows: BTreeMap<FieldElement, Vec<FieldElement>>,
}

/// Builds log/antilog tables and one product row per distinct constant.
/// Duplicate constants collapse; a row for 0x00 or 0x01 is permitted but
/// rarely useful.
pub fn build_tables(spec: FieldSpec, constants: &[FieldElement]) -> Result<MulTables, FieldError> {
    let group = spec.order() - 1;
    let generator = spec
        .nonzero_elements()
        .find(|&g| multiplicative_order(spec, g) == group)
        .ok_or(FieldError::NoGenerator)?;

    let mut antilog = Vec::with_capacity(group);
    let mut log = vec![0u8; group];
    let mut v: FieldElement = 1;
    for k in 0..group {
        antilog.push(v);
        log[(v - 1) as usize] = k as u8;
        v = spec.mul(v, generator);
    }
    debug_assert_eq!(v, 1, "generator order must divide the group order");

    let mut rows = BTreeMap::new();
    for &c in constants {
        debug_assert!(spec.contains(c));
        rows.entry(c)
            .or_insert_with(|| spec.elements().map(|x| spec.mul(c, x)).collect());
    }
    Ok(MulTables { spec, log, antilog, rows })
}

impl MulTables {
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    /// Discrete log of a nonzero element; `None` for 0x00.
    pub fn log_of(&self, x: FieldElement) -> Option<u8> {
        if x == 0 || !self.spec.contains(x) {
            return None;
        }
        Some(self.log[(x - 1) as usize])
    }

    /// Generator raised to `k` (reduced modulo the group order).
    pub fn antilog_of(&self, k: usize) -> FieldElement {
        self.antilog[k % self.antilog.len()]
    }

    /// Product row for `c`: `row(c)[x] == c * x`. `None` if `c` was not
    /// requested at construction.
    pub fn row(&self, c: FieldElement) -> Option<&[FieldElement]> {
        self.rows.get(&c).map(Vec::as_slice)
    }

    pub fn constants(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.rows.keys().copied()
    }

    /// Log/antilog product route, independent of `FieldSpec::mul`.
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        if x == 0 || y == 0 {
            return 0;
        }
        let k = self.log[(x - 1) as usize] as usize + self.log[(y - 1) as usize] as usize;
        self.antilog[k % self.antilog.len()]
    }

    /// Table memory expressed in entries: distinct constants x 2^q.
    pub fn memory_entries(&self) -> usize {
        self.rows.len() * self.spec.order()
    }
}

fn multiplicative_order(spec: FieldSpec, g: FieldElement) -> usize {
    let mut v = g;
    let mut ord = 1;
    while v != 1 {
        v = spec.mul(v, g);
        ord += 1;
        if ord > spec.order() {
            // Cannot happen for a real field; guards against infinite loops.
            return 0;
        }
    }
    ord
}
