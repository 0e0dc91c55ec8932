//! Claim verification engine.
//!
//! A claim is turned into a keyword query, run against a local index and
//! reliability-classified web channels, re-ranked by title overlap, scored
//! for stance at document and sentence level, profiled against cue
//! lexicons, and aggregated into a SUPPORTED / REFUTED / NOT-ENOUGH-INFO
//! verdict.

pub mod bundled;
pub mod eval;
pub mod linguistics;
pub mod pipeline;
pub mod query;
pub mod rerank;
pub mod retrieval;
pub mod sources;
pub mod stance;
pub mod text;

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}
