//! Benchmark support crate; the measurements live in `benches/`.
//!
//! Re-exports the shared fixture corpus so benchmark code mirrors the
//! library tests: one matrix per structure class, priced by the cost model
//! and timed here for real.

pub use dynmds::fixtures::class_fixtures;
