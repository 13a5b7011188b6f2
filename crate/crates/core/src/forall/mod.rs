//! Structures whose single build answers every query with high probability.

pub mod covering;
pub mod discretized;
pub mod hamming;

pub use covering::{grid_count_log_bound, AnchorGrid, GridCovering, Snap};
pub use discretized::{rho_prime, CoveringMode, DiscretizedIndex, InnerKind};
pub use hamming::ForAllHammingIndex;
