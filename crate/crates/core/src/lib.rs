//! Klein-Gordon causality laboratory in one space dimension.
//!
//! Local second-order evolution of `(d_t^2 - d_x^2 + m^2) phi = 0` keeps
//! compact Cauchy data inside the light cone; the first-order flow generated
//! by `sqrt(p^2 + m^2)` does not. The modules build both evolutions, the
//! commutator function that ties them together, and the measurements that
//! tell them apart.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod dispersion;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod io;
pub mod posfreq;
pub mod propagator;
pub mod spectral;

pub use dispersion::{omega, Mass, OmegaPower};
pub use error::{Error, Result};
pub use evolution::{evolve_spectral, CauchyData};
pub use spectral::{Field, UniformGrid};
