//! Bit-exact engine for the HTM cortical learning algorithm.
//!
//! The region pairs a spatial pooler (sparse distributed representations
//! via k-winner-take-all over columns of synthetic synapses) with a
//! temporal memory (multi-cell columns learning sequences through distal
//! segments and making first- and second-order predictions). Everything is
//! integer arithmetic over [0,255] permanences, seeded end to end, and
//! reproducible bit for bit.

pub mod bits;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod glyphs;
pub mod lfsr;
pub mod region;
pub mod snapshot;
pub mod sp;
pub mod synapse;
pub mod tm;

pub use bits::BitVector;
pub use config::{encoding_capacity, sparsity_level, Inhibition, RegionConfig};
pub use error::{HtmError, Result};
pub use region::{Region, StepReport};
pub use sp::SpResult;
pub use synapse::FieldMode;
pub use tm::TmStepReport;
