//! Mismatched capacities of symmetric binary-input DMC pairs under polar
//! transforms: exact capacity computation, channel synthesis, a mismatched
//! successive-cancellation codec, and sweep experiments.

pub mod capacity;
pub mod channel;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod polar;

pub use channel::{Channel, DecodingMetric, InputDistribution, SymmetricPair};
pub use error::{Error, Result};
