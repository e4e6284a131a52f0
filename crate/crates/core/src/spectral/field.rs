use std::cell::RefCell;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::UniformGrid;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalised in-place DFT, `X_i = sum_j x_j exp(-+ 2 pi i ij/n)`.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(buf);
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Complex samples of a field on a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: UniformGrid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        check_finite(&values)?;
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_real(grid: UniformGrid, values: &[f64]) -> Result<Self> {
        Field::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Samples `f(x_j)` on every lattice point.
    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Field::new(grid, grid.points().map(f).collect())
    }

    /// Internal constructor for values produced by trusted arithmetic.
    pub(crate) fn from_parts(grid: UniformGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Field { grid, values }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `dx * sum |f_j|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L2 distance `|self - other| / |other|`.
    pub fn relative_l2_distance(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let reference = other.norm_sqr();
        if reference == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.grid.dx();
        Ok((diff / reference).sqrt())
    }

    /// Largest pointwise difference.
    pub fn max_abs_difference(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Continuum-normalised transform `F_k = dx * sum_j exp(-i p_k x_j) f_j`.
    pub fn forward(&self) -> SpectralField {
        let mut buf = self.values.clone();
        fft_in_place(&mut buf, false);
        let dx = self.grid.dx();
        // exp(-i p_k x_0) = (-1)^k, and k has the parity of its slot index.
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= if i % 2 == 0 { dx } else { -dx };
        }
        SpectralField::from_parts(self.grid, buf)
    }
}

impl Add for &Field {
    type Output = Field;

    fn add(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "adding fields on different grids");
        Field::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Field {
    type Output = Field;

    fn sub(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "subtracting fields on different grids");
        Field::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul<Complex64> for &Field {
    type Output = Field;

    fn mul(self, rhs: Complex64) -> Field {
        self.scaled(rhs)
    }
}

/// Momentum-space coefficients of a [`Field`], in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: UniformGrid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: UniformGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coefficients.len(),
                grid.n()
            )));
        }
        check_finite(&coefficients)?;
        Ok(SpectralField { grid, coefficients })
    }

    pub(crate) fn from_parts(grid: UniformGrid, coefficients: Vec<Complex64>) -> Self {
        debug_assert_eq!(coefficients.len(), grid.n());
        SpectralField { grid, coefficients }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Coefficient at signed wavenumber `k`.
    pub fn at_wavenumber(&self, k: i64) -> Option<Complex64> {
        self.grid
            .slot_of_wavenumber(k)
            .map(|i| self.coefficients[i])
    }

    /// `(1/L) * sum_k |F_k|^2`, equal to [`Field::norm_sqr`] of the inverse.
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()
    }

    /// Multiplies every coefficient by `m(p_k)`.
    pub fn apply(&mut self, m: impl Fn(f64) -> Complex64) {
        let grid = self.grid;
        for (i, c) in self.coefficients.iter_mut().enumerate() {
            *c *= m(grid.momentum(i));
        }
    }

    /// `f_j = (1/L) * sum_k exp(+i p_k x_j) F_k`.
    pub fn inverse(&self) -> Field {
        let mut buf = self.coefficients.clone();
        for (i, c) in buf.iter_mut().enumerate() {
            if i % 2 == 1 {
                *c = -*c;
            }
        }
        fft_in_place(&mut buf, true);
        let scale = 1.0 / self.grid.length();
        for c in buf.iter_mut() {
            *c *= scale;
        }
        Field::from_parts(self.grid, buf)
    }
}

/// Checked forward transform; non-finite samples are reported by index.
pub fn forward_transform(f: &Field) -> Result<SpectralField> {
    check_finite(f.values())?;
    Ok(f.forward())
}

/// Checked inverse transform onto `grid`.
pub fn inverse_transform(spectrum: &SpectralField, grid: &UniformGrid) -> Result<Field> {
    spectrum.grid.ensure_same(grid)?;
    check_finite(spectrum.coefficients())?;
    Ok(spectrum.inverse())
}

/// Applies the spectral multiplier `m(p)` to `f`.
pub fn apply_multiplier(f: &Field, m: impl Fn(f64) -> Complex64) -> Field {
    let mut s = f.forward();
    s.apply(m);
    s.inverse()
}
