//! Robust search constructions built on the oblivious primitives.

pub mod annuli;
pub mod bucketed;
pub mod decider;
pub mod exponent;
pub mod median;

pub use annuli::{annulus_radii, telescoping_witness, AnnuliIndex};
pub use bucketed::BucketedIndex;
pub use decider::{CopyMode, RobustDecider};
pub use exponent::{exponent_optimize, ExponentReport};
pub use median::median_amplify;
