//! Support, leakage and tail measurements shared by every experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Field;

pub const SUPPORT_REPORT_SCHEMA: &str = "kglab.support_report/1";

/// Minimum number of distances in a tail-fit window.
pub const MIN_FIT_POINTS: usize = 16;

/// Smallest magnitude a tail-fit sample may have.
pub const MIN_FIT_MAGNITUDE: f64 = 1e-300;

/// Relative left/right rate difference above which a fit is flagged.
pub const ASYMMETRY_LIMIT: f64 = 0.1;

/// Boundary samples above this fraction of the peak mark a field as wrapped.
pub const WRAP_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportRadius {
    pub radius: f64,
    /// Set when no radius short of `L/2` bounds the field.
    pub saturated: bool,
}

/// Smallest `R` with `|f(x)| < threshold` for every `|x| > R`.
pub fn support_radius(f: &Field, threshold: f64) -> SupportRadius {
    support_radius_of(f.grid(), threshold, |j| f.values()[j].norm())
}

pub(crate) fn support_radius_of(
    grid: &crate::spectral::UniformGrid,
    threshold: f64,
    magnitude: impl Fn(usize) -> f64,
) -> SupportRadius {
    let n = grid.n();
    // j = 0 sits at x = -L/2, the only lattice point at distance L/2.
    if magnitude(0) >= threshold {
        return SupportRadius {
            radius: grid.half_length(),
            saturated: true,
        };
    }
    let radius = (1..n)
        .filter(|&j| magnitude(j) >= threshold)
        .map(|j| grid.x(j).abs())
        .fold(0.0, f64::max);
    SupportRadius {
        radius,
        saturated: false,
    }
}

/// Fraction of the L2 mass outside `|x| <= r0 + |t| + margin`.
pub fn cone_leakage(f: &Field, r0: f64, t: f64, margin: f64) -> Result<f64> {
    let grid = f.grid();
    let edge = r0 + t.abs() + margin;
    if !(edge < grid.half_length()) {
        return Err(Error::Precondition(format!(
            "cone edge {edge} must lie inside L/2 = {}",
            grid.half_length()
        )));
    }
    let mut outside = 0.0;
    let mut total = 0.0;
    for (j, v) in f.values().iter().enumerate() {
        let w = v.norm_sqr();
        total += w;
        if grid.x(j).abs() > edge {
            outside += w;
        }
    }
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((outside / total).clamp(0.0, 1.0))
}

/// Largest magnitude on the outer `L/16` of the domain.
pub fn boundary_floor(f: &Field) -> f64 {
    let grid = f.grid();
    let inner = grid.half_length() - grid.length() / 16.0;
    f.values()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j).abs() >= inner)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Result of a log-linear tail fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Decay rate `-d log|f| / d|x|` of the symmetrised profile.
    pub rate: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: [f64; 2],
    pub left_rate: f64,
    pub right_rate: f64,
    pub points: usize,
}

impl TailFit {
    pub fn asymmetric(&self) -> bool {
        let mean = 0.5 * (self.left_rate + self.right_rate).abs();
        (self.left_rate - self.right_rate).abs() > ASYMMETRY_LIMIT * mean
    }
}

/// Fits `log|f| ~ intercept - rate * |x|` over `lo <= |x| <= hi`.
///
/// Left and right tails are paired at equal distance and their
/// log-magnitudes averaged before the fit.
pub fn fit_exponential_tail(f: &Field, window: [f64; 2]) -> Result<TailFit> {
    let [lo, hi] = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::FitRejected(format!(
            "window [{lo}, {hi}] must satisfy lo < hi"
        )));
    }
    let grid = f.grid();
    let n = grid.n();
    let mut dist = Vec::new();
    let mut sym = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for j in (n / 2 + 1)..n {
        let d = grid.x(j);
        if d < lo || d > hi {
            continue;
        }
        let r = f.values()[j].norm();
        let l = f.values()[grid.mirror(j)].norm();
        if !(r > MIN_FIT_MAGNITUDE && l > MIN_FIT_MAGNITUDE) {
            return Err(Error::FitRejected(format!(
                "magnitude below {MIN_FIT_MAGNITUDE:e} at |x| = {d}"
            )));
        }
        dist.push(d);
        left.push(l.ln());
        right.push(r.ln());
        sym.push(0.5 * (l.ln() + r.ln()));
    }
    if dist.len() < MIN_FIT_POINTS {
        return Err(Error::FitRejected(format!(
            "{} usable points in [{lo}, {hi}], need {MIN_FIT_POINTS}",
            dist.len()
        )));
    }
    let both = fit_line(&dist, &sym).expect("distinct abscissae");
    let l = fit_line(&dist, &left).expect("distinct abscissae");
    let r = fit_line(&dist, &right).expect("distinct abscissae");
    Ok(TailFit {
        rate: -both.slope,
        intercept: both.intercept,
        r2: both.r2,
        window,
        left_rate: -l.slope,
        right_rate: -r.slope,
        points: dist.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityFlag {
    SupportSaturated,
    AsymmetricTails,
    WrapContaminated,
    FitRejected,
    LowFitQuality,
}

/// Support, leakage and tail-fit summary of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub schema: String,
    pub support_radius: f64,
    pub leakage_fraction: f64,
    /// `None` when the tail fit was rejected.
    pub tail_rate: Option<f64>,
    pub tail_intercept: Option<f64>,
    pub fit_r2: f64,
    pub window: [f64; 2],
    pub flags: Vec<QualityFlag>,
}

/// Parameters of [`support_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportSettings {
    pub threshold: f64,
    pub r0: f64,
    pub t: f64,
    pub margin: f64,
    pub window: [f64; 2],
    pub min_r2: f64,
}

/// Collects every diagnostic for `f`. A rejected tail fit becomes a flag
/// with `fit_r2 = 0`.
pub fn support_report(f: &Field, s: &ReportSettings) -> Result<SupportReport> {
    let [lo, hi] = s.window;
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "report window [{lo}, {hi}] must satisfy lo < hi"
        )));
    }
    let support = support_radius(f, s.threshold);
    let leakage_fraction = cone_leakage(f, s.r0, s.t, s.margin)?;
    let mut flags = Vec::new();
    if support.saturated {
        flags.push(QualityFlag::SupportSaturated);
    }
    if boundary_floor(f) >= WRAP_FLOOR * f.max_abs() {
        flags.push(QualityFlag::WrapContaminated);
    }
    let (tail_rate, tail_intercept, fit_r2) = match fit_exponential_tail(f, s.window) {
        Ok(fit) => {
            if fit.asymmetric() {
                flags.push(QualityFlag::AsymmetricTails);
            }
            if fit.r2 < s.min_r2 {
                flags.push(QualityFlag::LowFitQuality);
            }
            (Some(fit.rate), Some(fit.intercept), fit.r2)
        }
        Err(_) => {
            flags.push(QualityFlag::FitRejected);
            (None, None, 0.0)
        }
    };
    Ok(SupportReport {
        schema: SUPPORT_REPORT_SCHEMA.to_string(),
        support_radius: support.radius,
        leakage_fraction,
        tail_rate,
        tail_intercept,
        fit_r2,
        window: s.window,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_bump, make_exponential_tail, UniformGrid};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn grid() -> UniformGrid {
        UniformGrid::new(2048, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn compact_bump_has_no_leakage() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(cone_leakage(&b, 1.0, 0.0, 2.0 * g.dx()).unwrap(), 0.0);
    }

    #[test]
    fn uniform_field_leaks_half() {
        let g = grid();
        let f = Field::from_real(g, &vec![1.0; g.n()]).unwrap();
        let frac =
            cone_leakage(&f, g.length() / 8.0, g.length() / 16.0, g.length() / 16.0).unwrap();
        // Half the lattice minus the point sitting exactly on x = L/4.
        assert!((frac - 0.5).abs() <= 1.0 / g.n() as f64);
    }

    #[test]
    fn leakage_preconditions() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        assert!(cone_leakage(&b, 10.0, 5.0, 1.0).is_err());
        assert_eq!(
            cone_leakage(&Field::zeros(g), 1.0, 0.0, 0.1).unwrap_err(),
            Error::ZeroNorm
        );
    }

    #[test]
    fn recovers_exact_exponential() {
        let g = grid();
        let f = make_exponential_tail(g, 0.0, 2.0, 1.0).unwrap();
        let fit = fit_exponential_tail(&f, [3.0, 8.0]).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-6, "{}", fit.rate);
        assert!(fit.r2 > 0.999999);
        assert!(!fit.asymmetric());
    }

    #[test]
    fn tolerates_bounded_perturbation() {
        let g = grid();
        let f = Field::from_fn(g, |x| {
            Complex64::new((-x.abs()).exp() * (1.0 + 0.01 * x.cos()), 0.0)
        })
        .unwrap();
        let fit = fit_exponential_tail(&f, [3.0, 8.0]).unwrap();
        assert!((fit.rate - 1.0).abs() < 0.02, "{}", fit.rate);
    }

    #[test]
    fn fit_rejections() {
        let g = grid();
        let f = make_exponential_tail(g, 0.0, 1.0, 1.0).unwrap();
        // 0.2 / dx = 12.8 points
        assert!(matches!(
            fit_exponential_tail(&f, [3.0, 3.2]),
            Err(Error::FitRejected(_))
        ));
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            fit_exponential_tail(&b, [0.5, 3.0]),
            Err(Error::FitRejected(_))
        ));
        assert!(fit_exponential_tail(&f, [4.0, 3.0]).is_err());
    }

    #[test]
    fn support_radius_examples() {
        let g = UniformGrid::new(256, 1.0 / 32.0).unwrap();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        let r = support_radius(&b, 1e-12);
        assert!(!r.saturated);
        assert!((r.radius - 1.0).abs() <= g.dx(), "{}", r.radius);

        assert_eq!(support_radius(&Field::zeros(g), 1e-12).radius, 0.0);

        let fine = grid();
        let e = make_exponential_tail(fine, 0.0, 1.0, 1.0).unwrap();
        let r = support_radius(&e, (-5.0f64).exp());
        assert!((r.radius - 5.0).abs() <= fine.dx());

        let flat = Field::from_real(g, &vec![1.0; g.n()]).unwrap();
        let r = support_radius(&flat, 0.5);
        assert!(r.saturated);
        assert_eq!(r.radius, g.half_length());
    }

    #[test]
    fn boundary_floor_examples() {
        let g = grid();
        assert_eq!(boundary_floor(&make_bump(g, 0.0, 1.0, 1.0).unwrap()), 0.0);
        let flat = Field::from_real(g, &vec![0.25; g.n()]).unwrap();
        assert_eq!(boundary_floor(&flat), 0.25);
    }

    #[test]
    fn report_flags_failed_fit() {
        let g = grid();
        let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
        let report = support_report(
            &b,
            &ReportSettings {
                threshold: 1e-12,
                r0: 1.0,
                t: 0.0,
                margin: 5.0 * g.dx(),
                window: [4.0, 9.0],
                min_r2: 0.99,
            },
        )
        .unwrap();
        assert_eq!(report.flags, vec![QualityFlag::FitRejected]);
        assert_eq!(report.fit_r2, 0.0);
        assert_eq!(report.leakage_fraction, 0.0);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(SUPPORT_REPORT_SCHEMA));
    }

    proptest! {
        #[test]
        fn leakage_monotone_in_margin(m1 in 0.0..4.0f64, m2 in 0.0..4.0f64, rate in 0.3..3.0f64) {
            let g = grid();
            let f = make_exponential_tail(g, 0.0, rate, 1.0).unwrap();
            let (a, b) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
            prop_assert!(cone_leakage(&f, 1.0, 0.5, b).unwrap() <= cone_leakage(&f, 1.0, 0.5, a).unwrap());
        }

        #[test]
        fn support_monotone_in_threshold(t1 in 1e-14..1.0f64, t2 in 1e-14..1.0f64, rate in 0.3..3.0f64) {
            let g = grid();
            let f = make_exponential_tail(g, 0.0, rate, 1.0).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(support_radius(&f, hi).radius <= support_radius(&f, lo).radius);
        }

        #[test]
        fn planted_rates_recovered(rate in 0.2..4.0f64, amp in 1e-3..1e3f64) {
            let g = grid();
            let f = make_exponential_tail(g, 0.0, rate, amp).unwrap();
            let fit = fit_exponential_tail(&f, [2.0, 6.0]).unwrap();
            prop_assert!((fit.rate - rate).abs() <= 1e-6);
            prop_assert!((fit.intercept - amp.ln()).abs() <= 1e-6);
        }
    }
}
