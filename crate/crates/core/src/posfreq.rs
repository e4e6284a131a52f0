//! Positive/negative-frequency split and the first-order flow `i d_t psi = omega psi`.
//!
//! Modes are split as `phi_pm = (phi_0 +- i pi_0 / omega) / 2`, so that
//! `phi_0 = phi_+ + phi_-` and `pi_0 = -i omega (phi_+ - phi_-)` hold mode by
//! mode. A compact `phi_+` has a time derivative `-i omega phi_+`, which is
//! never compact: that is the spreading mechanism measured here.

use num_complex::Complex64;

use crate::diagnostics::support_radius;
use crate::dispersion::{apply_omega_power, omega, Mass, OmegaPower};
use crate::error::{Error, Result};
use crate::evolution::{check_time_margin, CauchyData};
use crate::spectral::{apply_multiplier, Field};

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySplit {
    pub psi_plus: Field,
    pub psi_minus: Field,
    pub mass: Mass,
}

impl FrequencySplit {
    /// `(phi_+ + phi_-, -i omega (phi_+ - phi_-))`.
    pub fn reconstruct(&self) -> Result<(Field, Field)> {
        let phi = &self.psi_plus + &self.psi_minus;
        let diff = &self.psi_plus - &self.psi_minus;
        let pi =
            apply_omega_power(&diff, self.mass, OmegaPower::One)?.scaled(Complex64::new(0.0, -1.0));
        Ok((phi, pi))
    }

    /// Evolves `phi_+` with `exp(-i omega t)` and `phi_-` with `exp(+i omega t)`.
    pub fn evolve(&self, t: f64) -> Result<FrequencySplit> {
        Ok(FrequencySplit {
            psi_plus: evolve_positive(&self.psi_plus, self.mass, t)?,
            psi_minus: evolve_positive(&self.psi_minus, self.mass, -t)?,
            mass: self.mass,
        })
    }
}

fn require_massive(m: Mass) -> Result<()> {
    if m.is_massless() {
        return Err(Error::InfraredSingular(
            "1/omega is singular at p = 0 for m = 0".into(),
        ));
    }
    Ok(())
}

pub fn project_positive(data: &CauchyData) -> Result<FrequencySplit> {
    let m = data.mass();
    require_massive(m)?;
    let phi_hat = data.phi().forward();
    let pi_hat = data.pi().forward();
    let grid = *data.grid();
    let mut plus = phi_hat.clone();
    let mut minus = phi_hat;
    for (i, ((a, b), c)) in plus
        .coefficients_mut()
        .iter_mut()
        .zip(minus.coefficients_mut().iter_mut())
        .zip(pi_hat.coefficients())
        .enumerate()
    {
        let shift = Complex64::new(0.0, 1.0) * c / omega(grid.momentum(i), m);
        let base = *a;
        *a = (base + shift) * 0.5;
        *b = (base - shift) * 0.5;
    }
    Ok(FrequencySplit {
        psi_plus: plus.inverse(),
        psi_minus: minus.inverse(),
        mass: m,
    })
}

/// `psi(t) = exp(-i omega t) psi_0`, mode by mode.
pub fn evolve_positive(psi: &Field, m: Mass, t: f64) -> Result<Field> {
    check_time_margin(psi.grid(), t)?;
    if t == 0.0 {
        return Ok(psi.clone());
    }
    Ok(apply_multiplier(psi, |p| {
        Complex64::from_polar(1.0, -omega(p, m) * t)
    }))
}

/// `pi = -i omega phi`, the time derivative a purely positive-frequency
/// solution with `phi(t0) = phi_compact` must have.
///
/// The input must vanish identically outside `|x| <= L/2 - L/8`.
pub fn positivity_tail_witness(phi_compact: &Field, m: Mass) -> Result<Field> {
    require_massive(m)?;
    let grid = phi_compact.grid();
    let support = support_radius(phi_compact, f64::MIN_POSITIVE);
    let limit = grid.half_length() - grid.length() / 8.0;
    if support.saturated || support.radius > limit {
        return Err(Error::Precondition(format!(
            "input is not compact: nonzero out to {} beyond {limit}",
            support.radius
        )));
    }
    Ok(apply_omega_power(phi_compact, m, OmegaPower::One)?.scaled(Complex64::new(0.0, -1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve_spectral;
    use crate::spectral::{make_bump, make_exponential_tail, UniformGrid};

    fn mass(m: f64) -> Mass {
        Mass::new(m).unwrap()
    }

    fn grid() -> UniformGrid {
        UniformGrid::new(1024, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn at_rest_splits_in_half() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        let s = project_positive(&CauchyData::at_rest(b.clone(), mass(1.0))).unwrap();
        let half = b.scaled(Complex64::new(0.5, 0.0));
        assert!(s.psi_plus.max_abs_difference(&half).unwrap() < 1e-12);
        assert!(s.psi_minus.max_abs_difference(&half).unwrap() < 1e-12);
    }

    #[test]
    fn pure_positive_data() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        let pi = positivity_tail_witness(&b, mass(1.0)).unwrap();
        let data = CauchyData::new(b.clone(), pi, mass(1.0), 0.0).unwrap();
        let s = project_positive(&data).unwrap();
        assert!(s.psi_plus.max_abs_difference(&b).unwrap() < 1e-12);
        assert!(s.psi_minus.max_abs() < 1e-12);
    }

    #[test]
    fn massless_rejected() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        assert!(project_positive(&CauchyData::at_rest(b.clone(), Mass::ZERO)).is_err());
        assert!(positivity_tail_witness(&b, Mass::ZERO).is_err());
    }

    #[test]
    fn branches_recombine_to_spectral_evolution() {
        let g = grid();
        let phi = make_bump(g, 0.2, 1.0, 1.0).unwrap();
        let pi = make_bump(g, -0.5, 1.5, 0.3).unwrap();
        let data = CauchyData::new(phi, pi, mass(1.0), 0.0).unwrap();
        let split = project_positive(&data).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let (phi_t, pi_t) = split.evolve(t).unwrap().reconstruct().unwrap();
            let exact = evolve_spectral(&data, t).unwrap();
            assert!(phi_t.max_abs_difference(exact.phi()).unwrap() < 1e-12);
            assert!(pi_t.max_abs_difference(exact.pi()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn norm_is_conserved() {
        let g = UniformGrid::new(4096, 1.0 / 64.0).unwrap();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        let n0 = b.norm_sqr();
        for t in [0.1, 1.0, 10.0] {
            let n = evolve_positive(&b, mass(1.0), t).unwrap().norm_sqr();
            assert!((n - n0).abs() < 1e-12 * n0);
        }
        assert_eq!(evolve_positive(&b, mass(1.0), 0.0).unwrap(), b);
        assert!(evolve_positive(&b, mass(1.0), 17.0).is_err());
    }

    #[test]
    fn witness_requires_compact_input() {
        let g = grid();
        let tail = make_exponential_tail(g, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            positivity_tail_witness(&tail, mass(1.0)),
            Err(Error::Precondition(_))
        ));
    }
}
