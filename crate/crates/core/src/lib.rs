//! XOR erasure-coding schemes for body-area sensor relays, analyzed as
//! loop-multigraphs.
//!
//! A scheme assigns each relay a list of output slots, each carrying either a
//! plain packet or the XOR of two packets from the relay's listening window.
//! Viewing packets as vertices, XOR pairs as edges, and plain packets as
//! loops turns erasure robustness into a connectivity question: the sink can
//! recover every packet exactly when each connected component keeps at least
//! one loop. On top of that view the crate provides
//!
//! * [`multigraph`]: the graph type, decodability, loop statistics, edge
//!   connectivity, and the minimum loop cut,
//! * [`scheme`]: parameter derivation, the interleaved and plain generators,
//!   scheme validation, a GF(2) rank oracle, and a payload decoder,
//! * [`analysis`]: the exact decodable-subgraph census, the decoding
//!   probability polynomial, and analytic caps on the census rows,
//! * [`montecarlo`]: a seeded, reproducible Monte Carlo estimator.
//!
//! Counting is exact (big integers); probabilities are evaluated in floating
//! point only at the end, generically over [`Real`] with [`Prob`] as the
//! concrete default.

pub mod analysis;
pub mod montecarlo;
pub mod multigraph;
pub mod scheme;

mod scalar;
pub(crate) mod serde_util;
pub(crate) mod subsets;

pub use scalar::Real;

/// Default floating-point scalar for probability values.
pub type Prob = f64;
