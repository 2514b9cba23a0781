//! Data ingestion, training, benchmarking and model persistence behind the CLI.

pub mod bench;
pub mod cli;
pub mod data;
pub mod model;
pub mod train;
