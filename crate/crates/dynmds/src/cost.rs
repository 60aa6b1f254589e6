//! Operation-count and memory model for matrix generation.
//!
//! Generating a session matrix multiplies every seed entry by the session
//! constant. The model charges a full multiplication for the first
//! occurrence of each distinct non-one constant, a table lookup for each
//! repeated occurrence, and nothing for 1-entries; memory is one product
//! table per distinct non-one constant plus a fixed log/antilog overhead.
//! The absolute numbers are proxies — only the resulting order of the five
//! matrix classes is meaningful, and the benchmarks check that wall-clock
//! derivation agrees with it.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::field::FieldElement;
use crate::matrix::Matrix;
use crate::mds::{classify, MatrixClass, MdsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("ZeroConstant: the session constant e must be a nonzero field element")]
    ZeroConstant,
    #[error("NotSquare: cost estimation requires a square matrix")]
    NotSquare,
    #[error("NotMds: only MDS matrices have a structure class to price (singular minor at {0})")]
    NotMds(String),
    #[error("MissingClass: {0}")]
    MissingClass(String),
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
}

/// Unit costs for the generation pass. `cost_free <= cost_lookup <=
/// cost_mul` must hold; the defaults make one multiplication worth sixteen
/// cycles, one lookup two, and a pass-through free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostParams {
    pub cost_mul: u64,
    pub cost_lookup: u64,
    pub cost_free: u64,
    pub bytes_per_table_entry: u64,
    /// Fixed utility tables charged to every generation pass (the log and
    /// antilog pair), each 2^q entries.
    pub fixed_overhead_tables: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            cost_mul: 16,
            cost_lookup: 2,
            cost_free: 0,
            bytes_per_table_entry: 1,
            fixed_overhead_tables: 2,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.cost_free <= self.cost_lookup && self.cost_lookup <= self.cost_mul) {
            return Err(CostError::InvalidParams(format!(
                "expected cost_free <= cost_lookup <= cost_mul, got {} / {} / {}",
                self.cost_free, self.cost_lookup, self.cost_mul
            )));
        }
        if self.bytes_per_table_entry == 0 {
            return Err(CostError::InvalidParams("bytes_per_table_entry must be positive".into()));
        }
        Ok(())
    }
}

/// Modeled cost of one generation pass.
///
/// `nontrivial_muls` counts the entry passes that do real work (first
/// occurrences pay `cost_mul`, repeats pay `cost_lookup`), `free_muls` the
/// 1-entries; the two always sum to the entry count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub nontrivial_muls: usize,
    pub free_muls: usize,
    pub distinct_constant_tables: usize,
    pub memory_units: u64,
    pub cycle_proxy: u64,
    pub class: MatrixClass,
}

impl CostReport {
    pub fn to_json(&self) -> Value {
        json!({
            "nontrivial_muls": self.nontrivial_muls,
            "free_muls": self.free_muls,
            "tables": self.distinct_constant_tables,
            "memory_units": self.memory_units,
            "cycle_proxy": self.cycle_proxy,
            "class": self.class.name(),
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "class: {}\nnontrivial_muls: {}\nfree_muls: {}\ntables: {}\nmemory_units: {}\ncycle_proxy: {}\n",
            self.class, self.nontrivial_muls, self.free_muls, self.distinct_constant_tables,
            self.memory_units, self.cycle_proxy
        )
    }
}

/// Prices the generation pass `e * A` under `params`.
pub fn estimate_generation(
    a: &Matrix,
    e: FieldElement,
    params: &CostParams,
) -> Result<CostReport, CostError> {
    if e == 0 {
        return Err(CostError::ZeroConstant);
    }
    params.validate()?;
    let class = classify(a).map_err(|err| match err {
        MdsError::NotSquare { .. } => CostError::NotSquare,
        MdsError::NotMds(witness) => CostError::NotMds(witness),
        other => CostError::InvalidParams(other.to_string()),
    })?;

    let mut free_muls = 0usize;
    let mut nontrivial_muls = 0usize;
    let mut seen = BTreeSet::new();
    for &v in a.entries() {
        if v == 1 {
            free_muls += 1;
        } else {
            nontrivial_muls += 1;
            seen.insert(v);
        }
    }
    let tables = seen.len();
    let lookups = nontrivial_muls - tables;
    let cycle_proxy = tables as u64 * params.cost_mul
        + lookups as u64 * params.cost_lookup
        + free_muls as u64 * params.cost_free;
    let order = a.spec().order() as u64;
    let memory_units =
        (tables as u64 + params.fixed_overhead_tables) * order * params.bytes_per_table_entry;

    Ok(CostReport {
        nontrivial_muls,
        free_muls,
        distinct_constant_tables: tables,
        memory_units,
        cycle_proxy,
        class,
    })
}

/// Prices every fixture and sorts ascending by `cycle_proxy` (stable, so
/// equal-cost fixtures keep their input order and read as a tie). Expects at
/// most one fixture per class; an empty list or a duplicated class violates
/// that coverage and is reported as `MissingClass`.
pub fn rank_classes(
    fixtures: &[Matrix],
    e: FieldElement,
    params: &CostParams,
) -> Result<Vec<(MatrixClass, CostReport)>, CostError> {
    if fixtures.is_empty() {
        return Err(CostError::MissingClass("no fixtures supplied".into()));
    }
    let mut ranked = Vec::with_capacity(fixtures.len());
    let mut seen = BTreeSet::new();
    for m in fixtures {
        let report = estimate_generation(m, e, params)?;
        if !seen.insert(report.class) {
            return Err(CostError::MissingClass(format!(
                "class {} appears more than once; supply one fixture per class",
                report.class
            )));
        }
        ranked.push((report.class, report));
    }
    ranked.sort_by_key(|(_, r)| r.cycle_proxy);
    Ok(ranked)
}

/// Aligned text table over a ranking: matrix type, cycle proxy, memory.
pub fn render_rank_table(ranked: &[(MatrixClass, CostReport)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>12} {:>14}\n",
        "Type of matrix", "Cycle proxy", "Memory units"
    ));
    for (class, report) in ranked {
        out.push_str(&format!(
            "{:<16} {:>12} {:>14}\n",
            class.name(),
            report.cycle_proxy,
            report.memory_units
        ));
    }
    out
}
