use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid the laboratory accepts.
pub const MIN_POINTS: usize = 16;

/// Periodic one-dimensional lattice centred on the origin.
///
/// Points are `x_j = -L/2 + j*dx` for `j = 0..n` and the dual momenta are
/// `p_k = 2*pi*k/L` for `k = -n/2..n/2`. Momentum-indexed arrays are kept in
/// FFT order: slot `i` holds wavenumber `i` for `i < n/2` and `i - n` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct UniformGrid {
    n: usize,
    dx: f64,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    dx: f64,
}

impl TryFrom<GridSpec> for UniformGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        UniformGrid::new(spec.n, spec.dx)
    }
}

impl From<UniformGrid> for GridSpec {
    fn from(g: UniformGrid) -> Self {
        GridSpec { n: g.n, dx: g.dx }
    }
}

impl UniformGrid {
    pub fn new(n: usize, dx: f64) -> Result<Self> {
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be a power of two >= {MIN_POINTS}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {dx} must be positive")));
        }
        Ok(UniformGrid { n, dx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length()
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -self.half_length() + j as f64 * self.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Signed wavenumber stored in FFT slot `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn momentum(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.wavenumber(i) as f64 / self.length()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.momentum(i)).collect()
    }

    /// FFT slot holding wavenumber `k`, if it is on the lattice.
    pub fn slot_of_wavenumber(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        })
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    /// Index of the mirror point `-x_j` on the periodic lattice.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Nearest lattice index to `x`, if `x` lies inside `[-L/2, L/2)`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let j = ((x + self.half_length()) / self.dx).round();
        if j < 0.0 || j >= self.n as f64 {
            None
        } else {
            Some(j as usize)
        }
    }

    /// Same domain sampled `factor` times more densely.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "refinement factor {factor} must be a power of two"
            )));
        }
        UniformGrid::new(self.n * factor, self.dx / factor as f64)
    }

    pub(crate) fn ensure_same(&self, other: &UniformGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(n={}, dx={}) vs (n={}, dx={})",
                self.n, self.dx, other.n, other.dx
            )))
        }
    }
}
