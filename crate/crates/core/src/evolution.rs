//! Cauchy problem for `(d_t^2 - d_x^2 + m^2) phi = 0`.
//!
//! Two solvers are provided. [`evolve_spectral`] rotates every lattice mode
//! exactly and serves as ground truth. [`LeapfrogStepper`] integrates the
//! first-order system `(phi, pi)` with a three-point Laplacian; each step
//! couples only nearest neighbours, so the exact (threshold-zero) support
//! grows by at most one lattice point per step on each side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{support_radius_of, SupportRadius};
use crate::dispersion::{omega, Mass};
use crate::error::{Error, Result};
use crate::spectral::{Field, UniformGrid};

/// Geometric slack, in grid cells, added to every light-cone check.
pub const CONE_MARGIN_CELLS: f64 = 5.0;

/// Field and time derivative at `t0`, plus the mass they evolve with.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    phi: Field,
    pi: Field,
    mass: Mass,
    t0: f64,
}

impl CauchyData {
    pub fn new(phi: Field, pi: Field, mass: Mass, t0: f64) -> Result<Self> {
        phi.grid().ensure_same(pi.grid())?;
        if !t0.is_finite() {
            return Err(Error::Precondition(format!("t0 = {t0} must be finite")));
        }
        Ok(CauchyData { phi, pi, mass, t0 })
    }

    /// `pi = 0` at `t0 = 0`.
    pub fn at_rest(phi: Field, mass: Mass) -> Self {
        let pi = Field::zeros(*phi.grid());
        CauchyData {
            phi,
            pi,
            mass,
            t0: 0.0,
        }
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn pi(&self) -> &Field {
        &self.pi
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn grid(&self) -> &UniformGrid {
        self.phi.grid()
    }

    pub fn into_parts(self) -> (Field, Field) {
        (self.phi, self.pi)
    }
}

/// Rejects spans longer than `L/4`, past which periodic images could reach
/// the region being measured.
pub fn check_time_margin(grid: &UniformGrid, span: f64) -> Result<()> {
    let limit = grid.length() / 4.0;
    if !span.is_finite() || span.abs() > limit {
        return Err(Error::TimeBeyondMargin { span, limit });
    }
    Ok(())
}

/// Exact per-mode solution at time `t`.
pub fn evolve_spectral(data: &CauchyData, t: f64) -> Result<CauchyData> {
    let grid = *data.grid();
    let dt = t - data.t0;
    check_time_margin(&grid, dt)?;
    if dt == 0.0 {
        return Ok(data.clone());
    }
    let mut phi_hat = data.phi.forward();
    let mut pi_hat = data.pi.forward();
    for (i, (a, b)) in phi_hat
        .coefficients_mut()
        .iter_mut()
        .zip(pi_hat.coefficients_mut().iter_mut())
        .enumerate()
    {
        let w = omega(grid.momentum(i), data.mass);
        let (s, c) = (w * dt).sin_cos();
        // sin(w dt)/w -> dt for the massless zero mode.
        let sinc = if w == 0.0 { dt } else { s / w };
        let (a0, b0) = (*a, *b);
        *a = a0 * c + b0 * sinc;
        *b = -a0 * (w * s) + b0 * c;
    }
    Ok(CauchyData {
        phi: phi_hat.inverse(),
        pi: pi_hat.inverse(),
        mass: data.mass,
        t0: t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SpectralExact,
    LocalFd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub method: Method,
    /// Time step; required by [`Method::LocalFd`].
    pub dt: Option<f64>,
}

impl EvolutionConfig {
    pub fn spectral() -> Self {
        EvolutionConfig {
            method: Method::SpectralExact,
            dt: None,
        }
    }

    pub fn local_fd(dt: f64) -> Self {
        EvolutionConfig {
            method: Method::LocalFd,
            dt: Some(dt),
        }
    }

    pub fn courant(&self, grid: &UniformGrid) -> Option<f64> {
        self.dt.map(|dt| dt / grid.dx())
    }

    /// Checks the step against the grid: `0 < dt/dx <= 1`, and the
    /// leapfrog bound `dt^2 (4/dx^2 + m^2) <= 4` once the mass term is included.
    pub fn validate(&self, grid: &UniformGrid, mass: Mass) -> Result<()> {
        if self.method == Method::SpectralExact {
            return Ok(());
        }
        let dt = self
            .dt
            .ok_or_else(|| Error::Precondition("local-fd evolution needs a time step".into()))?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Precondition(format!(
                "time step {dt} must be positive"
            )));
        }
        let courant = dt / grid.dx();
        if courant > 1.0 {
            return Err(Error::Unstable(format!("courant number {courant} > 1")));
        }
        let m = mass.value();
        let bound = dt * dt * (4.0 / (grid.dx() * grid.dx()) + m * m);
        if bound > 4.0 {
            return Err(Error::Unstable(format!(
                "dt^2 (4/dx^2 + m^2) = {bound} > 4"
            )));
        }
        Ok(())
    }
}

/// Dispatches on [`EvolutionConfig::method`].
pub fn evolve(data: &CauchyData, t: f64, cfg: &EvolutionConfig) -> Result<CauchyData> {
    match cfg.method {
        Method::SpectralExact => evolve_spectral(data, t),
        Method::LocalFd => evolve_local_fd(data, t, cfg),
    }
}

/// Number of whole steps of size `dt` covering `span`, if there is one.
pub fn step_count(span: f64, dt: f64) -> Result<usize> {
    let steps = (span / dt).round();
    if !(steps >= 1.0) || (steps * dt - span).abs() > 1e-9 * span.abs().max(dt) {
        return Err(Error::NonMultipleTime { span, dt });
    }
    Ok(steps as usize)
}

/// Leapfrog integration to time `t`.
pub fn evolve_local_fd(data: &CauchyData, t: f64, cfg: &EvolutionConfig) -> Result<CauchyData> {
    if cfg.method != Method::LocalFd {
        return Err(Error::Precondition("configuration is not local-fd".into()));
    }
    cfg.validate(data.grid(), data.mass)?;
    let dt = cfg.dt.expect("validated");
    let steps = step_count(t - data.t0, dt)?;
    let mut stepper = LeapfrogStepper::new(data, dt)?;
    for _ in 0..steps {
        stepper.step();
    }
    Ok(stepper.finish())
}

/// Staggered leapfrog for `phi' = pi`, `pi' = D2 phi - m^2 phi`.
///
/// The state after `k` steps holds `phi` at `t0 + (k + 1/2) dt` and `pi` at
/// `t0 + k dt`. Each update reads only the three-point neighbourhood, so the
/// exactly-nonzero support of the pair widens by at most one point per side
/// per step.
#[derive(Debug, Clone)]
pub struct LeapfrogStepper {
    grid: UniformGrid,
    mass: Mass,
    dt: f64,
    t0: f64,
    phi_half: Vec<Complex64>,
    pi: Vec<Complex64>,
    steps: usize,
}

impl LeapfrogStepper {
    pub fn new(data: &CauchyData, dt: f64) -> Result<Self> {
        EvolutionConfig::local_fd(dt).validate(data.grid(), data.mass)?;
        let half = 0.5 * dt;
        let phi_half = data
            .phi
            .values()
            .iter()
            .zip(data.pi.values())
            .map(|(f, p)| f + p * half)
            .collect();
        Ok(LeapfrogStepper {
            grid: *data.grid(),
            mass: data.mass,
            dt,
            t0: data.t0,
            phi_half,
            pi: data.pi.values().to_vec(),
            steps: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt
    }

    #[inline]
    fn apply_operator(&self, j: usize) -> Complex64 {
        // (D2 - m^2) phi at lattice point j, periodic.
        let n = self.grid.n();
        let f = &self.phi_half;
        let left = f[(j + n - 1) % n];
        let right = f[(j + 1) % n];
        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let m = self.mass.value();
        (left - f[j] * 2.0 + right) * inv_dx2 - f[j] * (m * m)
    }

    pub fn step(&mut self) {
        let dt = self.dt;
        for j in 0..self.grid.n() {
            let kick = self.apply_operator(j) * dt;
            self.pi[j] += kick;
        }
        for (f, p) in self.phi_half.iter_mut().zip(&self.pi) {
            *f += p * dt;
        }
        self.steps += 1;
    }

    /// Lowest and highest lattice index where `phi` or `pi` is exactly nonzero.
    pub fn support_bounds(&self) -> Option<(usize, usize)> {
        let zero = Complex64::new(0.0, 0.0);
        let nonzero = |j: &usize| self.phi_half[*j] != zero || self.pi[*j] != zero;
        let lo = (0..self.grid.n()).find(nonzero)?;
        let hi = (0..self.grid.n()).rev().find(nonzero)?;
        Some((lo, hi))
    }

    /// The quadratic form the staggered scheme conserves exactly,
    /// `1/2 dx sum (|pi|^2 + dt Re(conj(pi) A phi) - Re(conj(phi) A phi))`
    /// with `A = D2 - m^2`.
    pub fn conserved_form(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.grid.n() {
            let a_phi = self.apply_operator(j);
            let p = self.pi[j];
            let f = self.phi_half[j];
            acc += p.norm_sqr() + self.dt * (p.conj() * a_phi).re - (f.conj() * a_phi).re;
        }
        0.5 * self.grid.dx() * acc
    }

    /// Closes the half step and returns `(phi, pi)` at [`Self::time`].
    pub fn finish(self) -> CauchyData {
        let half = 0.5 * self.dt;
        let phi: Vec<Complex64> = self
            .phi_half
            .iter()
            .zip(&self.pi)
            .map(|(f, p)| f - p * half)
            .collect();
        let t = self.time();
        CauchyData {
            phi: Field::from_parts(self.grid, phi),
            pi: Field::from_parts(self.grid, self.pi),
            mass: self.mass,
            t0: t,
        }
    }
}

/// `E = 1/2 dx sum (|pi|^2 + |d_x phi|^2 + m^2 |phi|^2)` with a spectral
/// derivative, evaluated through Parseval.
pub fn energy(data: &CauchyData) -> f64 {
    let grid = data.grid();
    let m = data.mass.value();
    let kinetic = data.pi.norm_sqr();
    let phi_hat = data.phi.forward();
    let potential: f64 = phi_hat
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = grid.momentum(i);
            (p * p + m * m) * c.norm_sqr()
        })
        .sum::<f64>()
        / grid.length();
    0.5 * (kinetic + potential)
}

/// Smallest `R` with `max(|phi|, |pi|) < threshold` for every `|x| > R`.
pub fn joint_support_radius(data: &CauchyData, threshold: f64) -> Result<SupportRadius> {
    if !(threshold > 0.0) {
        return Err(Error::Precondition(format!(
            "support threshold {threshold} must be positive"
        )));
    }
    let phi = data.phi.values();
    let pi = data.pi.values();
    Ok(support_radius_of(data.grid(), threshold, |j| {
        phi[j].norm().max(pi[j].norm())
    }))
}
