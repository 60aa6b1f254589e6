//! Demonstration SPN block cipher with session-derived mixing matrices.
//!
//! **NOT FOR PRODUCTION.** This cipher exists to exercise dynamic MDS
//! matrices end to end: 16-byte blocks, a 4x4 byte state over
//! gf(2^8, 0x11B), AES-like rounds (substitute, rotate rows, mix columns,
//! add round key; the final round skips the mix), and a mixing matrix that
//! both endpoints derive from a shared secret instead of hard-coding. It has
//! seen no cryptanalysis and its key schedule is deliberately simple.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{build_tables, FieldElement, FieldError, FieldSpec};
use crate::matrix::{Matrix, MatrixError};
use crate::mds::{derive_session_matrix, MdsError};

pub const BLOCK_BYTES: usize = 16;
const STATE_SIDE: usize = 4;
const MIN_ROUNDS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpnError {
    #[error("EmptySecret: the shared secret must not be empty")]
    EmptySecret,
    #[error("InvalidRounds: need at least {min} rounds, got {got}")]
    InvalidRounds { min: usize, got: usize },
    #[error("InvalidSbox: the substitution table must be a bijection on bytes")]
    InvalidSbox,
    #[error("WrongField: the cipher state lives in gf(2^8, 0x11B), got {0}")]
    WrongField(FieldSpec),
    #[error("WrongShape: mixing matrices must be 4x4")]
    WrongShape,
    #[error(transparent)]
    Mds(#[from] MdsError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Whether one derived matrix serves the whole session or each round gets
/// its own, derived from `hash(secret || round index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    Session,
    Round,
}

impl fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixMode::Session => "session",
            MatrixMode::Round => "round",
        })
    }
}

impl FromStr for MatrixMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "session" => Ok(MatrixMode::Session),
            "round" => Ok(MatrixMode::Round),
            other => Err(format!("unknown matrix mode {other:?}, expected session or round")),
        }
    }
}

/// Cipher structure: round count, mode, substitution table, and the round
/// keys expanded from the master key by an iterated hash.
#[derive(Debug, Clone)]
pub struct SpnParams {
    rounds: usize,
    mode: MatrixMode,
    sbox: [u8; 256],
    inv_sbox: [u8; 256],
    round_keys: Vec<[u8; BLOCK_BYTES]>,
}

impl SpnParams {
    /// Standard construction: at least four rounds (default deployments use
    /// eight), AES substitution table.
    pub fn new(master_key: [u8; BLOCK_BYTES], rounds: usize, mode: MatrixMode) -> Result<Self, SpnError> {
        if rounds < MIN_ROUNDS {
            return Err(SpnError::InvalidRounds { min: MIN_ROUNDS, got: rounds });
        }
        Self::with_rounds_unchecked(master_key, rounds, mode)
    }

    /// Like [`SpnParams::new`] but accepts any positive round count. Meant
    /// for reduced-round experiments and degenerate-structure tests, not for
    /// protecting data (nothing in this module is).
    pub fn with_rounds_unchecked(
        master_key: [u8; BLOCK_BYTES],
        rounds: usize,
        mode: MatrixMode,
    ) -> Result<Self, SpnError> {
        if rounds == 0 {
            return Err(SpnError::InvalidRounds { min: 1, got: 0 });
        }
        let sbox = *aes_sbox();
        let inv_sbox = invert_sbox(&sbox)?;
        let round_keys = expand_round_keys(&master_key, rounds);
        Ok(SpnParams { rounds, mode, sbox, inv_sbox, round_keys })
    }

    /// Replaces the substitution table (it must be a bijection).
    pub fn with_sbox(mut self, sbox: [u8; 256]) -> Result<Self, SpnError> {
        self.inv_sbox = invert_sbox(&sbox)?;
        self.sbox = sbox;
        Ok(self)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn round_keys(&self) -> &[[u8; BLOCK_BYTES]] {
        &self.round_keys
    }
}

/// The AES substitution table, computed from the field inverse plus the
/// standard affine map and cached.
pub fn aes_sbox() -> &'static [u8; 256] {
    static SBOX: OnceLock<[u8; 256]> = OnceLock::new();
    SBOX.get_or_init(|| {
        let f = FieldSpec::aes();
        let mut sbox = [0u8; 256];
        for x in 0..=255u8 {
            let inv = if x == 0 { 0 } else { f.inv(x).expect("nonzero") };
            sbox[x as usize] = inv
                ^ inv.rotate_left(1)
                ^ inv.rotate_left(2)
                ^ inv.rotate_left(3)
                ^ inv.rotate_left(4)
                ^ 0x63;
        }
        sbox
    })
}

fn invert_sbox(sbox: &[u8; 256]) -> Result<[u8; 256], SpnError> {
    let mut inv = [0u8; 256];
    let mut seen = [false; 256];
    for (x, &y) in sbox.iter().enumerate() {
        if seen[y as usize] {
            return Err(SpnError::InvalidSbox);
        }
        seen[y as usize] = true;
        inv[y as usize] = x as u8;
    }
    Ok(inv)
}

/// Iterated-hash key schedule: round key i is the first 16 bytes of
/// `SHA-256(master_key || LE32(i))`, for i in 0..=rounds.
fn expand_round_keys(master_key: &[u8; BLOCK_BYTES], rounds: usize) -> Vec<[u8; BLOCK_BYTES]> {
    (0..=rounds)
        .map(|i| {
            let mut h = Sha256::new();
            h.update(master_key);
            h.update((i as u32).to_le_bytes());
            let digest = h.finalize();
            let mut key = [0u8; BLOCK_BYTES];
            key.copy_from_slice(&digest[..BLOCK_BYTES]);
            key
        })
        .collect()
}

fn first_nonzero_byte(digest: &[u8]) -> FieldElement {
    digest.iter().copied().find(|&b| b != 0).unwrap_or(0x01)
}

/// Session constant: the first nonzero byte of `SHA-256(secret)`, falling
/// back to 0x01 for the (never observed) all-zero digest. Both endpoints of
/// a session compute this independently from the shared secret.
pub fn derive_constant(secret: &[u8]) -> Result<FieldElement, SpnError> {
    if secret.is_empty() {
        return Err(SpnError::EmptySecret);
    }
    Ok(first_nonzero_byte(&Sha256::digest(secret)))
}

/// Per-round constant for [`MatrixMode::Round`]: the first nonzero byte of
/// `SHA-256(secret || LE32(round))`.
pub fn derive_round_constant(secret: &[u8], round: u32) -> Result<FieldElement, SpnError> {
    if secret.is_empty() {
        return Err(SpnError::EmptySecret);
    }
    let mut h = Sha256::new();
    h.update(secret);
    h.update(round.to_le_bytes());
    Ok(first_nonzero_byte(&h.finalize()))
}

/// Demo-only master key derived from the shared secret so the CLI demo
/// needs a single input. Real deployments keep cipher keys separate from
/// the matrix-derivation secret.
pub fn derive_demo_key(secret: &[u8]) -> Result<[u8; BLOCK_BYTES], SpnError> {
    if secret.is_empty() {
        return Err(SpnError::EmptySecret);
    }
    let mut h = Sha256::new();
    h.update(b"demo-key");
    h.update(secret);
    let digest = h.finalize();
    let mut key = [0u8; BLOCK_BYTES];
    key.copy_from_slice(&digest[..BLOCK_BYTES]);
    Ok(key)
}

/// Everything one endpoint derives from the shared secret: the session
/// constant, the session matrix `e * seed`, and its verified inverse. The
/// seed and secret are retained so per-round mode can derive round matrices.
#[derive(Debug, Clone)]
pub struct Session {
    shared_secret: Vec<u8>,
    seed: Matrix,
    constant: FieldElement,
    matrix: Matrix,
    inverse_matrix: Matrix,
}

impl Session {
    /// Verifies the seed is MDS, derives the session constant and matrix,
    /// and computes the inverse. Identical secrets and seeds always yield
    /// identical sessions.
    pub fn new(seed: &Matrix, secret: &[u8]) -> Result<Self, SpnError> {
        let constant = derive_constant(secret)?;
        let matrix = derive_session_matrix(seed, constant)?;
        let inverse_matrix = matrix.inverse()?;
        debug_assert_eq!(
            matrix.matmul(&inverse_matrix).unwrap(),
            Matrix::identity(matrix.spec(), matrix.rows()).unwrap()
        );
        Ok(Session {
            shared_secret: secret.to_vec(),
            seed: seed.clone(),
            constant,
            matrix,
            inverse_matrix,
        })
    }

    pub fn constant(&self) -> FieldElement {
        self.constant
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &Matrix {
        &self.inverse_matrix
    }

    pub fn seed(&self) -> &Matrix {
        &self.seed
    }
}

/// One mixing layer: a 4x4 matrix with a product row per distinct entry so
/// applying it is pure table lookups and XOR.
#[derive(Debug, Clone)]
struct MixLayer {
    rows: Vec<Vec<u8>>,
    idx: [[usize; STATE_SIDE]; STATE_SIDE],
}

impl MixLayer {
    fn new(matrix: &Matrix) -> Result<Self, SpnError> {
        if matrix.rows() != STATE_SIDE || matrix.cols() != STATE_SIDE {
            return Err(SpnError::WrongShape);
        }
        if matrix.spec() != FieldSpec::aes() {
            return Err(SpnError::WrongField(matrix.spec()));
        }
        let distinct = matrix.distinct_values();
        let tables = build_tables(matrix.spec(), &distinct)?;
        let mut rows = Vec::with_capacity(distinct.len());
        for &v in &distinct {
            rows.push(tables.row(v).expect("row was requested").to_vec());
        }
        let mut idx = [[0usize; STATE_SIDE]; STATE_SIDE];
        for (r, row_idx) in idx.iter_mut().enumerate() {
            for (c, slot) in row_idx.iter_mut().enumerate() {
                let v = matrix.get(r, c);
                *slot = distinct.binary_search(&v).expect("value is distinct");
            }
        }
        Ok(MixLayer { rows, idx })
    }

    fn apply(&self, col: [u8; STATE_SIDE]) -> [u8; STATE_SIDE] {
        let mut out = [0u8; STATE_SIDE];
        for (r, row_idx) in self.idx.iter().enumerate() {
            out[r] = self.rows[row_idx[0]][col[0] as usize]
                ^ self.rows[row_idx[1]][col[1] as usize]
                ^ self.rows[row_idx[2]][col[2] as usize]
                ^ self.rows[row_idx[3]][col[3] as usize];
        }
        out
    }
}

/// A runnable cipher instance: round keys plus one mixing layer (and its
/// inverse) per internal round. **NOT FOR PRODUCTION.**
#[derive(Debug, Clone)]
pub struct Spn {
    rounds: usize,
    sbox: [u8; 256],
    inv_sbox: [u8; 256],
    round_keys: Vec<[u8; BLOCK_BYTES]>,
    mix: Vec<MixLayer>,
    mix_inv: Vec<MixLayer>,
}

impl Spn {
    /// Builds the cipher from params and a session. In `Session` mode every
    /// round mixes with the session matrix; in `Round` mode round r mixes
    /// with `derive_session_matrix(seed, e_r)` where `e_r` comes from
    /// `hash(secret || r)`.
    pub fn new(params: &SpnParams, session: &Session) -> Result<Self, SpnError> {
        let internal_rounds = params.rounds - 1; // the final round skips the mix
        let mut mix = Vec::with_capacity(internal_rounds);
        let mut mix_inv = Vec::with_capacity(internal_rounds);
        match params.mode {
            MatrixMode::Session => {
                let forward = MixLayer::new(session.matrix())?;
                let inverse = MixLayer::new(session.inverse_matrix())?;
                for _ in 0..internal_rounds {
                    mix.push(forward.clone());
                    mix_inv.push(inverse.clone());
                }
            }
            MatrixMode::Round => {
                for r in 1..=internal_rounds as u32 {
                    let e = derive_round_constant(&session.shared_secret, r)?;
                    let matrix = derive_session_matrix(session.seed(), e)?;
                    let inverse = matrix.inverse()?;
                    mix.push(MixLayer::new(&matrix)?);
                    mix_inv.push(MixLayer::new(&inverse)?);
                }
            }
        }
        Ok(Spn {
            rounds: params.rounds,
            sbox: params.sbox,
            inv_sbox: params.inv_sbox,
            round_keys: params.round_keys.clone(),
            mix,
            mix_inv,
        })
    }

    /// Control-group constructor: every round mixes with the given matrix,
    /// which must be invertible but need not be MDS. Used to compare MDS
    /// mixing against weak baselines such as the identity matrix.
    pub fn with_mix_matrix(params: &SpnParams, matrix: &Matrix) -> Result<Self, SpnError> {
        let inverse = matrix.inverse()?;
        let forward_layer = MixLayer::new(matrix)?;
        let inverse_layer = MixLayer::new(&inverse)?;
        let internal_rounds = params.rounds - 1;
        Ok(Spn {
            rounds: params.rounds,
            sbox: params.sbox,
            inv_sbox: params.inv_sbox,
            round_keys: params.round_keys.clone(),
            mix: vec![forward_layer; internal_rounds],
            mix_inv: vec![inverse_layer; internal_rounds],
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn encrypt_block(&self, plaintext: &[u8; BLOCK_BYTES]) -> [u8; BLOCK_BYTES] {
        let mut state = *plaintext;
        xor_key(&mut state, &self.round_keys[0]);
        for r in 1..=self.rounds {
            sub_bytes(&mut state, &self.sbox);
            shift_rows(&mut state);
            if r < self.rounds {
                self.mix_state(&mut state, r);
            }
            xor_key(&mut state, &self.round_keys[r]);
        }
        state
    }

    pub fn decrypt_block(&self, ciphertext: &[u8; BLOCK_BYTES]) -> [u8; BLOCK_BYTES] {
        let mut state = *ciphertext;
        for r in (1..=self.rounds).rev() {
            xor_key(&mut state, &self.round_keys[r]);
            if r < self.rounds {
                self.unmix_state(&mut state, r);
            }
            inv_shift_rows(&mut state);
            sub_bytes(&mut state, &self.inv_sbox);
        }
        xor_key(&mut state, &self.round_keys[0]);
        state
    }

    /// Encrypts and records the state after each round's key addition.
    /// `trace[r - 1]` is the state after round r; the last entry is the
    /// ciphertext.
    pub fn encrypt_trace(&self, plaintext: &[u8; BLOCK_BYTES]) -> Vec<[u8; BLOCK_BYTES]> {
        let mut trace = Vec::with_capacity(self.rounds);
        let mut state = *plaintext;
        xor_key(&mut state, &self.round_keys[0]);
        for r in 1..=self.rounds {
            sub_bytes(&mut state, &self.sbox);
            shift_rows(&mut state);
            if r < self.rounds {
                self.mix_state(&mut state, r);
            }
            xor_key(&mut state, &self.round_keys[r]);
            trace.push(state);
        }
        trace
    }

    /// Single-bit-flip avalanche measurement: for `trials` random
    /// (plaintext, bit) pairs, encrypts both plaintexts and accumulates the
    /// fraction of differing state bits after every round. Deterministic in
    /// `rng_seed`.
    pub fn avalanche_stats(&self, trials: usize, rng_seed: u64) -> AvalancheReport {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut flipped_bits = vec![0u64; self.rounds];
        for _ in 0..trials {
            let mut pt = [0u8; BLOCK_BYTES];
            rng.fill_bytes(&mut pt);
            let bit = rng.gen_range(0..BLOCK_BYTES * 8);
            let mut pt2 = pt;
            pt2[bit / 8] ^= 1 << (bit % 8);
            let t1 = self.encrypt_trace(&pt);
            let t2 = self.encrypt_trace(&pt2);
            for (sum, (a, b)) in flipped_bits.iter_mut().zip(t1.iter().zip(&t2)) {
                *sum += hamming(a, b);
            }
        }
        let denom = (trials * BLOCK_BYTES * 8) as f64;
        let per_round = flipped_bits.iter().map(|&s| s as f64 / denom).collect();
        AvalancheReport { trials, per_round }
    }

    fn mix_state(&self, state: &mut [u8; BLOCK_BYTES], round: usize) {
        let layer = &self.mix[round - 1];
        for c in 0..STATE_SIDE {
            let col = [state[4 * c], state[4 * c + 1], state[4 * c + 2], state[4 * c + 3]];
            let mixed = layer.apply(col);
            state[4 * c..4 * c + 4].copy_from_slice(&mixed);
        }
    }

    fn unmix_state(&self, state: &mut [u8; BLOCK_BYTES], round: usize) {
        let layer = &self.mix_inv[round - 1];
        for c in 0..STATE_SIDE {
            let col = [state[4 * c], state[4 * c + 1], state[4 * c + 2], state[4 * c + 3]];
            let mixed = layer.apply(col);
            state[4 * c..4 * c + 4].copy_from_slice(&mixed);
        }
    }
}

/// Mean flipped-bit fraction after each round, over all trials. The final
/// entry is the full-cipher avalanche figure.
#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheReport {
    pub trials: usize,
    pub per_round: Vec<f64>,
}

impl AvalancheReport {
    /// Flipped-bit fraction of the complete cipher (the last round's entry).
    pub fn mean(&self) -> f64 {
        *self.per_round.last().expect("at least one round")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "per_round": self.per_round,
            "mean": self.mean(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("trials: {}\n", self.trials);
        for (i, frac) in self.per_round.iter().enumerate() {
            out.push_str(&format!("round {:>2}: {frac:.4}\n", i + 1));
        }
        out.push_str(&format!("mean: {:.4}\n", self.mean()));
        out
    }
}

fn xor_key(state: &mut [u8; BLOCK_BYTES], key: &[u8; BLOCK_BYTES]) {
    for (s, k) in state.iter_mut().zip(key) {
        *s ^= k;
    }
}

fn sub_bytes(state: &mut [u8; BLOCK_BYTES], sbox: &[u8; 256]) {
    for b in state.iter_mut() {
        *b = sbox[*b as usize];
    }
}

/// State byte i sits at row i % 4, column i / 4; row r rotates left by r.
fn shift_rows(state: &mut [u8; BLOCK_BYTES]) {
    let old = *state;
    for r in 0..STATE_SIDE {
        for c in 0..STATE_SIDE {
            state[r + 4 * c] = old[r + 4 * ((c + r) % STATE_SIDE)];
        }
    }
}

fn inv_shift_rows(state: &mut [u8; BLOCK_BYTES]) {
    let old = *state;
    for r in 0..STATE_SIDE {
        for c in 0..STATE_SIDE {
            state[r + 4 * ((c + r) % STATE_SIDE)] = old[r + 4 * c];
        }
    }
}

fn hamming(a: &[u8; BLOCK_BYTES], b: &[u8; BLOCK_BYTES]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as u64).sum()
}
