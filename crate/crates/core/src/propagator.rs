//! Two-point function `Delta_+` and the commutator function `Delta` in 1+1D.
//!
//! Conventions (with `omega = sqrt(p^2 + m^2)`):
//!
//! ```text
//! Delta_+(t, x) = i/(4 pi) * int dp exp(-i omega t + i p x) / omega
//! Delta(t, x)   = Delta_+(t, x) - Delta_+(-t, -x)
//!               = 1/(2 pi) * int dp sin(omega t)/omega * exp(i p x)
//! ```
//!
//! so the spatial transform of `Delta(t, .)` is exactly `sin(omega t)/omega`,
//! the same multiplier [`crate::evolution::evolve_spectral`] applies to `pi`.
//!
//! The oscillatory integrals are damped by `exp(-eps p^2)`, summed over the
//! momenta `2 pi k / L` of an `oversample`-times finer lattice (cutoff
//! `P = pi * oversample / dx`), and Richardson-extrapolated over a halving
//! `eps` ladder. The momentum sum is folded modulo `n` onto the output grid,
//! so each rung costs one `n`-point FFT.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{omega, Mass};
use crate::error::{Error, Result};
use crate::evolution::{check_time_margin, CauchyData};
use crate::spectral::{apply_multiplier, fft_in_place, Field, UniformGrid};

/// `Delta - (Delta_+(t,x) - Delta_+(-t,-x))` must stay below this.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Spacelike/timelike magnitude ratio that counts as suppressed.
pub const SUPPRESSION_RATIO_LIMIT: f64 = 1e-4;

/// At `t = 0` there is no timelike region; the spacelike maximum itself must
/// be below this.
pub const ZERO_TIME_FLOOR: f64 = 1e-10;

/// Relative L2 gap allowed between the `cos(omega t)` multiplier and a
/// centred time difference of `Delta`.
pub const FD_CHECK_TOLERANCE: f64 = 1e-2;

/// Lattice points on either side of the cone left out of the residual.
pub const CONE_EXCLUSION_CELLS: f64 = 3.0;

const MIN_CUTOFF_FACTOR: f64 = 40.0;
const MIN_TAIL_EXPONENT: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    /// Momentum lattice refinement; the cutoff is `pi * oversample / dx`.
    pub oversample: usize,
    /// Largest damping is `damping_scale * dx^2`.
    pub damping_scale: f64,
    /// Length of the halving damping ladder.
    pub rungs: usize,
    /// Largest acceptable change across the last extrapolation rung.
    pub tolerance: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            oversample: 32,
            damping_scale: 0.05,
            rungs: 4,
            tolerance: 1e-6,
        }
    }
}

impl QuadratureSettings {
    pub fn cutoff(&self, grid: &UniformGrid) -> f64 {
        std::f64::consts::PI * self.oversample as f64 / grid.dx()
    }

    /// The damping ladder, largest first.
    pub fn dampings(&self, grid: &UniformGrid) -> Vec<f64> {
        let top = self.damping_scale * grid.dx() * grid.dx();
        (0..self.rungs)
            .map(|j| top / f64::powi(2.0, j as i32))
            .collect()
    }

    pub fn validate(&self, grid: &UniformGrid, m: Mass) -> Result<()> {
        if self.rungs < 2 {
            return Err(Error::config("quadrature.rungs", "at least 2"));
        }
        if !(self.damping_scale > 0.0 && self.damping_scale.is_finite()) {
            return Err(Error::config(
                "quadrature.damping_scale",
                "positive and finite",
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("quadrature.tolerance", "positive"));
        }
        let cutoff = self.cutoff(grid);
        let needed = MIN_CUTOFF_FACTOR * m.value().max(1.0 / grid.dx());
        if self.oversample == 0 || cutoff < needed {
            return Err(Error::config(
                "quadrature.oversample",
                format!("cutoff {cutoff} below {needed} = 40 max(m, 1/dx)"),
            ));
        }
        let eps_min = *self.dampings(grid).last().expect("rungs >= 2");
        if eps_min * cutoff * cutoff < MIN_TAIL_EXPONENT {
            return Err(Error::config(
                "quadrature.damping_scale",
                "smallest damping must suppress the cutoff by exp(-36)",
            ));
        }
        Ok(())
    }
}

/// How a sample was computed and how far it is from converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub cutoff: f64,
    pub damping_max: f64,
    pub damping_min: f64,
    pub rungs: usize,
    pub oversample: usize,
    /// Off-cone change between the last two diagonal extrapolants.
    pub residual: f64,
    pub tolerance: f64,
    pub converged: bool,
}

impl QuadratureMeta {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged {
                residual: self.residual,
                tolerance: self.tolerance,
            })
        }
    }
}

/// A quadrature result on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub values: Field,
    pub meta: QuadratureMeta,
}

#[derive(Debug, Clone, Copy)]
enum Integrand {
    /// `sin(omega t)/omega`, prefactor `1/(2 pi)`.
    Commutator(f64),
    /// `exp(-i omega t)/omega`, prefactor `i/(4 pi)`.
    Wightman(f64),
}

impl Integrand {
    #[inline]
    fn eval(self, p: f64, m: Mass) -> Complex64 {
        let w = omega(p, m);
        match self {
            Integrand::Commutator(t) => {
                let s = if w == 0.0 { t } else { (w * t).sin() / w };
                Complex64::new(s, 0.0)
            }
            Integrand::Wightman(t) => Complex64::from_polar(1.0 / w, -w * t),
        }
    }

    /// `dp / (2 pi)` times the prefactor.
    fn weight(self, grid: &UniformGrid) -> Complex64 {
        match self {
            Integrand::Commutator(_) => Complex64::new(1.0 / grid.length(), 0.0),
            Integrand::Wightman(_) => Complex64::new(0.0, 0.5 / grid.length()),
        }
    }
}

/// `weight * sum_k exp(-eps p_k^2) g(p_k) exp(i p_k x_j)` over the fine momenta.
fn damped_sum(
    grid: &UniformGrid,
    oversample: usize,
    eps: f64,
    m: Mass,
    g: Integrand,
) -> Vec<Complex64> {
    let n = grid.n();
    let half = (n * oversample / 2) as i64;
    let dp = 2.0 * std::f64::consts::PI / grid.length();
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    for k in -half..half {
        let p = dp * k as f64;
        let damp = (-eps * p * p).exp();
        if damp == 0.0 {
            continue;
        }
        let term = g.eval(p, m) * damp;
        // exp(i p_k x_0) = (-1)^k
        let slot = k.rem_euclid(n as i64) as usize;
        if k % 2 == 0 {
            folded[slot] += term;
        } else {
            folded[slot] -= term;
        }
    }
    fft_in_place(&mut folded, true);
    let w = g.weight(grid);
    for v in folded.iter_mut() {
        *v *= w;
    }
    folded
}

/// Diagonal of the Richardson table for an error expansion in powers of `eps`
/// with ratio 2. Returns the last two diagonal entries.
fn richardson(rungs: Vec<Vec<Complex64>>) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut prev_row: Vec<Vec<Complex64>> = Vec::new();
    let mut diagonal = Vec::new();
    for base in rungs {
        let mut row = vec![base];
        for (i, below) in prev_row.iter().enumerate() {
            let factor = f64::powi(2.0, i as i32 + 1) - 1.0;
            let next = row[i]
                .iter()
                .zip(below)
                .map(|(a, b)| a + (a - b) / factor)
                .collect();
            row.push(next);
        }
        diagonal.push(row.last().expect("non-empty").clone());
        prev_row = row;
    }
    let best = diagonal.pop().expect("at least two rungs");
    let previous = diagonal.pop().expect("at least two rungs");
    (best, previous)
}

fn off_cone_change(grid: &UniformGrid, t: f64, a: &[Complex64], b: &[Complex64]) -> f64 {
    let band = CONE_EXCLUSION_CELLS * grid.dx();
    grid.points()
        .zip(a.iter().zip(b))
        .filter(|(x, _)| (x.abs() - t.abs()).abs() > band)
        .map(|(_, (u, v))| (u - v).norm())
        .fold(0.0, f64::max)
}

fn check_time(grid: &UniformGrid, t: f64) -> Result<()> {
    if !t.is_finite() || t.abs() >= grid.half_length() {
        return Err(Error::Precondition(format!(
            "|t| = {} must stay below L/2 = {}",
            t.abs(),
            grid.half_length()
        )));
    }
    Ok(())
}

/// Runs several integrands over the damping ladder, in parallel, in order.
fn quadratures(
    grid: &UniformGrid,
    m: Mass,
    settings: &QuadratureSettings,
    integrands: &[(Integrand, f64)],
) -> Vec<Quadrature> {
    let dampings = settings.dampings(grid);
    let jobs: Vec<(usize, f64)> = (0..integrands.len())
        .flat_map(|i| dampings.iter().map(move |&e| (i, e)))
        .collect();
    let mut sums: Vec<Vec<Complex64>> = jobs
        .par_iter()
        .map(|&(i, eps)| damped_sum(grid, settings.oversample, eps, m, integrands[i].0))
        .collect();
    let mut out = Vec::with_capacity(integrands.len());
    for &(_, t) in integrands.iter() {
        let rest = sums.split_off(dampings.len());
        let rungs = std::mem::replace(&mut sums, rest);
        let (best, previous) = richardson(rungs);
        let residual = off_cone_change(grid, t, &best, &previous);
        out.push(Quadrature {
            values: Field::from_parts(*grid, best),
            meta: QuadratureMeta {
                cutoff: settings.cutoff(grid),
                damping_max: dampings[0],
                damping_min: dampings[dampings.len() - 1],
                rungs: settings.rungs,
                oversample: settings.oversample,
                residual,
                tolerance: settings.tolerance,
                converged: residual <= settings.tolerance,
            },
        });
    }
    out
}

/// `Delta_+(t, .)` on `grid`. Diverges logarithmically in the infrared for
/// `m = 0`, which is rejected.
pub fn delta_plus(
    t: f64,
    grid: &UniformGrid,
    m: Mass,
    settings: &QuadratureSettings,
) -> Result<Quadrature> {
    if m.is_massless() {
        return Err(Error::InfraredSingular(
            "Delta_+ diverges at p = 0 for m = 0".into(),
        ));
    }
    check_time(grid, t)?;
    settings.validate(grid, m)?;
    Ok(
        quadratures(grid, m, settings, &[(Integrand::Wightman(t), t)])
            .pop()
            .expect("one integrand"),
    )
}

fn commutator_only(
    t: f64,
    grid: &UniformGrid,
    m: Mass,
    settings: &QuadratureSettings,
) -> Result<Quadrature> {
    check_time(grid, t)?;
    settings.validate(grid, m)?;
    Ok(
        quadratures(grid, m, settings, &[(Integrand::Commutator(t), t)])
            .pop()
            .expect("one integrand"),
    )
}

/// `Delta(t, .)` together with the two `Delta_+` pieces it is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSample {
    t: f64,
    mass: Mass,
    delta: Field,
    delta_plus: Option<Field>,
    delta_plus_reflected: Option<Field>,
    identity_error: Option<f64>,
    meta: QuadratureMeta,
}

impl PropagatorSample {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn grid(&self) -> &UniformGrid {
        self.delta.grid()
    }

    pub fn delta(&self) -> &Field {
        &self.delta
    }

    /// `Delta_+(t, x)`; absent for `m = 0`.
    pub fn delta_plus(&self) -> Option<&Field> {
        self.delta_plus.as_ref()
    }

    /// `Delta_+(-t, -x)`; absent for `m = 0`.
    pub fn delta_plus_reflected(&self) -> Option<&Field> {
        self.delta_plus_reflected.as_ref()
    }

    /// Sup-norm of `Delta - (Delta_+(t,x) - Delta_+(-t,-x))`.
    pub fn identity_error(&self) -> Option<f64> {
        self.identity_error
    }

    pub fn meta(&self) -> &QuadratureMeta {
        &self.meta
    }
}

/// `Delta(t, .)`, computed from the combined `sin(omega t)/omega` integrand.
///
/// For `m > 0` both `Delta_+` pieces are computed independently and the
/// difference identity is checked against [`IDENTITY_TOLERANCE`]. The
/// residual in the metadata is the worst of the three quadratures.
pub fn pauli_jordan(
    t: f64,
    grid: &UniformGrid,
    m: Mass,
    settings: &QuadratureSettings,
) -> Result<PropagatorSample> {
    check_time(grid, t)?;
    settings.validate(grid, m)?;
    if m.is_massless() {
        let q = quadratures(grid, m, settings, &[(Integrand::Commutator(t), t)])
            .pop()
            .expect("one integrand");
        return Ok(PropagatorSample {
            t,
            mass: m,
            delta: q.values,
            delta_plus: None,
            delta_plus_reflected: None,
            identity_error: None,
            meta: q.meta,
        });
    }
    let mut qs = quadratures(
        grid,
        m,
        settings,
        &[
            (Integrand::Commutator(t), t),
            (Integrand::Wightman(t), t),
            (Integrand::Wightman(-t), t),
        ],
    );
    let backward = qs.pop().expect("three integrands");
    let forward = qs.pop().expect("three integrands");
    let delta = qs.pop().expect("three integrands");
    let reflected: Vec<Complex64> = (0..grid.n())
        .map(|j| backward.values.values()[grid.mirror(j)])
        .collect();
    let identity_error = delta
        .values
        .values()
        .iter()
        .zip(forward.values.values().iter().zip(&reflected))
        .map(|(d, (a, b))| (d - (a - b)).norm())
        .fold(0.0, f64::max);
    if identity_error > IDENTITY_TOLERANCE {
        return Err(Error::NotConverged {
            residual: identity_error,
            tolerance: IDENTITY_TOLERANCE,
        });
    }
    let residual = delta
        .meta
        .residual
        .max(forward.meta.residual)
        .max(backward.meta.residual);
    let meta = QuadratureMeta {
        residual,
        converged: residual <= settings.tolerance,
        ..delta.meta
    };
    Ok(PropagatorSample {
        t,
        mass: m,
        delta: delta.values,
        delta_plus: Some(forward.values),
        delta_plus_reflected: Some(Field::from_parts(*grid, reflected)),
        identity_error: Some(identity_error),
        meta,
    })
}

/// `max_k |F[Delta](p_k) - sin(omega t)/omega|`, relative to the multiplier's
/// largest magnitude.
pub fn multiplier_error(sample: &PropagatorSample) -> f64 {
    let spectrum = sample.delta.forward();
    let grid = sample.grid();
    let t = sample.t;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, c) in spectrum.coefficients().iter().enumerate() {
        let target = Integrand::Commutator(t).eval(grid.momentum(i), sample.mass);
        worst = worst.max((c - target).norm());
        scale = scale.max(target.norm());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionScan {
    pub t: f64,
    pub mass: f64,
    pub margin: f64,
    /// `max |Delta|` over `|x| > |t| + margin`.
    pub spacelike_max: f64,
    /// `max |Delta|` over `|x| < |t|`; absent at `t = 0`.
    pub timelike_max: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// Compares `|Delta|` outside the cone (beyond `margin`) with inside it.
pub fn spacelike_suppression_scan(
    sample: &PropagatorSample,
    margin: f64,
) -> Result<SuppressionScan> {
    let grid = sample.grid();
    let t = sample.t.abs();
    if !(margin >= CONE_EXCLUSION_CELLS * grid.dx()) {
        return Err(Error::Precondition(format!(
            "margin {margin} below 3 dx = {}",
            CONE_EXCLUSION_CELLS * grid.dx()
        )));
    }
    if t + margin >= grid.half_length() {
        return Err(Error::Precondition(format!(
            "|t| + margin = {} leaves no spacelike region in L/2 = {}",
            t + margin,
            grid.half_length()
        )));
    }
    let mut spacelike = 0.0f64;
    let mut timelike: Option<f64> = None;
    for (x, v) in grid.points().zip(sample.delta.values()) {
        let r = x.abs();
        if r > t + margin {
            spacelike = spacelike.max(v.norm());
        } else if r < t {
            timelike = Some(timelike.unwrap_or(0.0).max(v.norm()));
        }
    }
    let ratio = timelike.map(|tl| spacelike / tl);
    let pass = match ratio {
        Some(r) => r < SUPPRESSION_RATIO_LIMIT,
        None => spacelike < ZERO_TIME_FLOOR,
    };
    Ok(SuppressionScan {
        t: sample.t,
        mass: sample.mass.value(),
        margin,
        spacelike_max: spacelike,
        timelike_max: timelike,
        ratio,
        pass,
    })
}

/// Result of [`cauchy_via_propagator`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSolution {
    pub phi: Field,
    /// Relative L2 gap between `cos(omega t) phi_0` and the centred time
    /// difference of `Delta` convolved with `phi_0`; zero when `phi_0 = 0`.
    pub fd_check: f64,
    pub meta: QuadratureMeta,
}

/// `dx * sum_j k(x_i - x_j) f_j` on the periodic grid, with `k` sampled on
/// the grid itself (offset `d dx` sits at index `d + n/2`).
fn convolve(kernel: &Field, f: &Field) -> Field {
    let grid = *f.grid();
    let n = grid.n();
    let mut k: Vec<Complex64> = (0..n).map(|d| kernel.values()[(d + n / 2) % n]).collect();
    let mut g = f.values().to_vec();
    fft_in_place(&mut k, false);
    fft_in_place(&mut g, false);
    let mut prod: Vec<Complex64> = k.iter().zip(&g).map(|(a, b)| a * b).collect();
    fft_in_place(&mut prod, true);
    let scale = grid.dx() / n as f64;
    Field::from_parts(grid, prod.into_iter().map(|v| v * scale).collect())
}

/// `phi(t) = d_t Delta(dt) * phi_0 + Delta(dt) * pi_0` with `*` the grid
/// convolution. `d_t Delta` enters as the multiplier `cos(omega dt)`, checked
/// against a centred difference of `Delta` with step `dx`.
pub fn cauchy_via_propagator(
    data: &CauchyData,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<PropagatorSolution> {
    let grid = *data.grid();
    let m = data.mass();
    let dt = t - data.t0();
    check_time_margin(&grid, dt)?;
    let kernel = commutator_only(dt, &grid, m, settings)?;
    kernel.meta.ensure_converged()?;
    let cos_term = apply_multiplier(data.phi(), |p| {
        Complex64::new((omega(p, m) * dt).cos(), 0.0)
    });
    let phi = &cos_term + &convolve(&kernel.values, data.pi());

    let fd_check = if data.phi().max_abs() == 0.0 {
        0.0
    } else {
        let h = grid.dx();
        let ahead = commutator_only(dt + h, &grid, m, settings)?;
        let behind = commutator_only(dt - h, &grid, m, settings)?;
        let derivative = (&ahead.values - &behind.values).scaled(Complex64::new(0.5 / h, 0.0));
        convolve(&derivative, data.phi()).relative_l2_distance(&cos_term)?
    };
    if !(fd_check <= FD_CHECK_TOLERANCE) {
        return Err(Error::NotConverged {
            residual: fd_check,
            tolerance: FD_CHECK_TOLERANCE,
        });
    }
    Ok(PropagatorSolution {
        phi,
        fd_check,
        meta: kernel.meta,
    })
}
