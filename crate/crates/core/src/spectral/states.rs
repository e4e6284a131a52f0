//! Factories for the initial states used across the laboratory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::UniformGrid;
use crate::error::{Error, Result};

/// Minimum bump radius in grid cells.
pub const MIN_RADIUS_CELLS: f64 = 4.0;

/// Compactly supported smooth bump `A * exp(1 - 1/(1 - u^2))`, `u = (x - c)/R`.
///
/// The normalisation puts the peak value at exactly `amplitude`; outside
/// `|u| < 1` the profile is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64, amplitude: f64) -> Self {
        Bump {
            center,
            radius,
            amplitude,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        if u.abs() < 1.0 {
            self.amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    /// Closed-form spatial derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        if u.abs() < 1.0 {
            let s = 1.0 - u * u;
            self.value(x) * (-2.0 * u / (s * s)) / self.radius
        } else {
            0.0
        }
    }

    /// Checks resolution and the `L/8` confinement margin.
    pub fn validate(&self, grid: &UniformGrid) -> Result<()> {
        if !(self.center.is_finite() && self.radius.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::Precondition("bump parameters must be finite".into()));
        }
        let min_radius = MIN_RADIUS_CELLS * grid.dx();
        if self.radius <= min_radius {
            return Err(Error::UnderResolved {
                radius: self.radius,
                min_radius,
            });
        }
        let inner = grid.half_length() - grid.length() / 8.0;
        if self.center - self.radius < -inner || self.center + self.radius > inner {
            return Err(Error::Precondition(format!(
                "bump [{}, {}] must stay inside [-{inner}, {inner}] (L/8 margin)",
                self.center - self.radius,
                self.center + self.radius
            )));
        }
        Ok(())
    }

    pub fn sample(&self, grid: UniformGrid) -> Result<Field> {
        self.validate(&grid)?;
        Field::from_fn(grid, |x| Complex64::new(self.value(x), 0.0))
    }

    pub fn sample_derivative(&self, grid: UniformGrid) -> Result<Field> {
        self.validate(&grid)?;
        Field::from_fn(grid, |x| Complex64::new(self.derivative(x), 0.0))
    }
}

/// Samples a [`Bump`] on `grid`.
pub fn make_bump(grid: UniformGrid, center: f64, radius: f64, amplitude: f64) -> Result<Field> {
    Bump::new(center, radius, amplitude).sample(grid)
}

/// `amplitude * exp(-rate * |x - center|)`, the prototypical exponentially tailed state.
pub fn make_exponential_tail(
    grid: UniformGrid,
    center: f64,
    rate: f64,
    amplitude: f64,
) -> Result<Field> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Precondition(format!(
            "tail rate {rate} must be positive"
        )));
    }
    Field::from_fn(grid, |x| {
        Complex64::new(amplitude * (-rate * (x - center).abs()).exp(), 0.0)
    })
}
