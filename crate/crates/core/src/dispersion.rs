//! Relativistic dispersion `omega(p) = sqrt(p^2 + m^2)` and its powers as
//! spectral multipliers.
//!
//! `omega` is the one-particle Hamiltonian of a positive-frequency scalar.
//! It acts diagonally in momentum space but is nonlocal in position space:
//! applied to a compactly supported state it produces tails that decay like
//! `exp(-m|x|)` times a power of `|x|`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Field;

/// Non-negative mass in inverse-length units (`c = hbar = 1`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mass(f64);

impl Mass {
    pub const ZERO: Mass = Mass(0.0);

    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() && m >= 0.0 {
            Ok(Mass(m))
        } else {
            Err(Error::Precondition(format!(
                "mass {m} must be finite and non-negative"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_massless(self) -> bool {
        self.0 == 0.0
    }

    /// `1/m`, or `None` for a massless field.
    pub fn compton_wavelength(self) -> Option<f64> {
        (self.0 > 0.0).then(|| 1.0 / self.0)
    }
}

impl TryFrom<f64> for Mass {
    type Error = Error;

    fn try_from(m: f64) -> Result<Self> {
        Mass::new(m)
    }
}

impl From<Mass> for f64 {
    fn from(m: Mass) -> f64 {
        m.0
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
pub fn omega(p: f64, m: Mass) -> f64 {
    p.hypot(m.0)
}

/// Powers of `omega` the laboratory uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaPower {
    One,
    MinusOne,
    Half,
    MinusHalf,
}

impl OmegaPower {
    pub fn exponent(self) -> f64 {
        match self {
            OmegaPower::One => 1.0,
            OmegaPower::MinusOne => -1.0,
            OmegaPower::Half => 0.5,
            OmegaPower::MinusHalf => -0.5,
        }
    }

    fn is_negative(self) -> bool {
        matches!(self, OmegaPower::MinusOne | OmegaPower::MinusHalf)
    }

    #[inline]
    fn eval(self, w: f64) -> f64 {
        match self {
            OmegaPower::One => w,
            OmegaPower::MinusOne => 1.0 / w,
            OmegaPower::Half => w.sqrt(),
            OmegaPower::MinusHalf => 1.0 / w.sqrt(),
        }
    }
}

impl TryFrom<f64> for OmegaPower {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(OmegaPower::One)
        } else if s == -1.0 {
            Ok(OmegaPower::MinusOne)
        } else if s == 0.5 {
            Ok(OmegaPower::Half)
        } else if s == -0.5 {
            Ok(OmegaPower::MinusHalf)
        } else {
            Err(Error::Precondition(format!(
                "omega exponent {s} not in {{1, -1, 1/2, -1/2}}"
            )))
        }
    }
}

/// Zero-mode magnitude, relative to the largest coefficient, below which a
/// massless negative power treats the zero mode as absent.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-14;

/// Applies `omega(p, m)^s` as a spectral multiplier.
pub fn apply_omega_power(f: &Field, m: Mass, s: OmegaPower) -> Result<Field> {
    let mut spectrum = f.forward();
    if m.is_massless() && s.is_negative() {
        let largest = spectrum
            .coefficients()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let zero_mode = spectrum.coefficients()[0].norm();
        if zero_mode >= ZERO_MODE_TOLERANCE * largest.max(1.0) {
            return Err(Error::InfraredSingular(format!(
                "massless omega^{} with zero-mode coefficient {zero_mode:e}",
                s.exponent()
            )));
        }
        spectrum.coefficients_mut()[0] = Complex64::new(0.0, 0.0);
        spectrum.apply(|p| {
            if p == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(s.eval(omega(p, m)), 0.0)
            }
        });
    } else {
        spectrum.apply(|p| Complex64::new(s.eval(omega(p, m)), 0.0));
    }
    Ok(spectrum.inverse())
}
