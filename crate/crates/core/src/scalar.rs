use num_traits::{Float, FromPrimitive};

/// Floating-point scalar for probability evaluation (`f32` or `f64`).
///
/// Census counts stay exact; only the final polynomial evaluation and the
/// Monte Carlo summaries go through this trait.
pub trait Real: Float + FromPrimitive + core::fmt::Debug {}

impl<T> Real for T where T: Float + FromPrimitive + core::fmt::Debug {}
