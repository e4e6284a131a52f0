//! Periodic grid, continuum-normalised transforms and test-state factories.

mod analytic;
mod field;
mod grid;
mod states;

pub use analytic::{complex_momentum_transform, ComplexMomentumProfile, MAX_WEIGHT_EXPONENT};
pub(crate) use field::fft_in_place;
pub use field::{apply_multiplier, forward_transform, inverse_transform, Field, SpectralField};
pub use grid::{UniformGrid, MIN_POINTS};
pub use states::{make_bump, make_exponential_tail, Bump, MIN_RADIUS_CELLS};
