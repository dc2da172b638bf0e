//! Metrics of dual pairs and numerical searches for extremal ones.

pub mod metrics;
pub mod search;

pub use metrics::{equiangularity, frame_correlation, pseudo_frame_potential, rms_cross, Equiangularity};
pub use search::{
    etf_search, etf_search_in, grassmannian_search, potential_minimize, search, Objective, SearchConfig,
    SearchResult,
};
