pub mod budget;
pub mod cli;
pub mod constants;
pub mod dp;
pub mod error;
pub mod fair;
pub mod forall;
pub mod harness;
pub mod io;
pub mod lsh;
pub mod metric;
pub mod params;
pub mod rng;
pub mod robust;
pub mod search;
pub mod synth;
