//! Fourier transform continued to complex momentum, `p + iq`.
//!
//! A field supported in `|x| <= R` has an entire transform of exponential
//! type `R`, so `max_p log|F(p + iq)|` grows at most like `R|q|`. Fields with
//! `exp(-m|x|)` tails only continue analytically into the strip `|q| < m`.

use num_complex::Complex64;

use super::field::Field;
use crate::error::{Error, Result};

/// Largest admissible `|q| * L/2`.
pub const MAX_WEIGHT_EXPONENT: f64 = 700.0;

/// `log|F(p_k + iq)|` for every lattice momentum, in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMomentumProfile {
    pub q: f64,
    pub log_magnitude: Vec<f64>,
}

impl ComplexMomentumProfile {
    pub fn peak(&self) -> f64 {
        self.log_magnitude
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates `F(p + iq) = dx * sum_j exp(-i p x_j) exp(q x_j) f_j`.
///
/// The weights are accumulated in the log domain: every sample is rescaled by
/// the largest `q x_j + log|f_j|` before the transform, and that offset is
/// added back to the log-magnitudes afterwards.
pub fn complex_momentum_transform(f: &Field, q: f64) -> Result<ComplexMomentumProfile> {
    let grid = *f.grid();
    if !q.is_finite() || q.abs() * grid.half_length() > MAX_WEIGHT_EXPONENT {
        return Err(Error::WeightOverflow { q });
    }
    let log_weights: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mag = v.norm();
            if mag == 0.0 {
                f64::NEG_INFINITY
            } else {
                q * grid.x(j) + mag.ln()
            }
        })
        .collect();
    let offset = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if offset == f64::NEG_INFINITY {
        return Ok(ComplexMomentumProfile {
            q,
            log_magnitude: vec![f64::NEG_INFINITY; grid.n()],
        });
    }
    let scaled: Vec<Complex64> = f
        .values()
        .iter()
        .zip(&log_weights)
        .map(|(v, &lw)| {
            if lw == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                (v / v.norm()) * (lw - offset).exp()
            }
        })
        .collect();
    let spectrum = Field::from_parts(grid, scaled).forward();
    let log_magnitude: Vec<f64> = spectrum
        .coefficients()
        .iter()
        .map(|c| c.norm().ln() + offset)
        .collect();
    if log_magnitude
        .iter()
        .any(|v| v.is_nan() || *v == f64::INFINITY)
    {
        return Err(Error::WeightOverflow { q });
    }
    Ok(ComplexMomentumProfile { q, log_magnitude })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_bump, UniformGrid};

    #[test]
    fn zero_q_is_log_of_forward_transform() {
        let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
        let f = make_bump(g, 0.3, 1.0, 2.0).unwrap();
        let profile = complex_momentum_transform(&f, 0.0).unwrap();
        let direct = f.forward();
        for (lm, c) in profile.log_magnitude.iter().zip(direct.coefficients()) {
            let expected = c.norm().ln();
            assert!((lm - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_overflowing_weight() {
        let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
        let f = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        // L/2 = 8
        assert!(complex_momentum_transform(&f, 87.0).is_ok());
        assert_eq!(
            complex_momentum_transform(&f, 88.0).unwrap_err(),
            Error::WeightOverflow { q: 88.0 }
        );
    }

    #[test]
    fn zero_field_is_minus_infinity() {
        let g = UniformGrid::new(64, 0.5).unwrap();
        let p = complex_momentum_transform(&Field::zeros(g), 1.0).unwrap();
        assert!(p.log_magnitude.iter().all(|v| *v == f64::NEG_INFINITY));
    }
}
