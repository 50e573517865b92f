//! Storage simulator: dithered scalar quantizers, an entropy coder
//! conditioned on already decoded cells, and erasure-coded repair data.

mod experiment;
mod gauss;
pub mod gf256;
mod model;
mod rangecoder;
mod scheme;

pub use experiment::{run_experiment, SimReport, SubsetStats};
pub use scheme::{source_block, Dithers, NodeContent, SimConfig, Simulator, DEFAULT_OVERHEAD_BITS};
