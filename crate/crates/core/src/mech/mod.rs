//! Privacy primitives: Laplace mechanism, finite and lazy exponential
//! mechanisms, private binary search, and the private log-concave sampler
//! over a convex body.
//!
//! Everything here is deterministic given `(inputs, RngSeed)` and holds no
//! shared state; independent trials run in parallel on disjoint streams.

pub mod exponential;
pub mod laplace;
pub mod sampler;
pub mod search;

pub use exponential::{exponential_mechanism_finite, lazy_exponential_mechanism};
pub use laplace::laplace_mechanism;
pub use sampler::{sample_logconcave, ConvexBody, SamplerParams, SamplerRun};
pub use search::{private_binary_search, BinarySearchOutcome};
