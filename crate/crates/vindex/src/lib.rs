//! Command-line frontend for Volpert indexing and minimal initial-species
//! search: file loading, report formatting, the random-network generator and
//! engine orchestration. The algorithms live in `vindex-core`.

pub mod commands;
pub mod gen;
pub mod netjson;
