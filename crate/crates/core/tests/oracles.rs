//! Library results checked against closed forms and independent quadrature.

mod common;

use common::*;
use kglab::diagnostics::fit_exponential_tail;
use kglab::evolution::{energy, evolve_local_fd, evolve_spectral, CauchyData, EvolutionConfig};
use kglab::posfreq::positivity_tail_witness;
use kglab::propagator::{cauchy_via_propagator, delta_plus, pauli_jordan, QuadratureSettings};
use kglab::spectral::{complex_momentum_transform, make_bump, make_exponential_tail, Field};
use kglab::{Mass, UniformGrid};
use num_complex::Complex64;

fn mass(m: f64) -> Mass {
    Mass::new(m).unwrap()
}

// Frozen from adaptive quadrature of (b'^2 + b^2)/2 over (-1, 1).
const BUMP_ENERGY: f64 = 2.0049212911055307;
// (J0(sqrt 2) - i Y0(sqrt 2)) / 4.
const WIGHTMAN_AT_1P5_0P5: (f64, f64) = (0.13978353610474492, -0.0861592328249282);

#[test]
fn bessel_series_reproduce_tabulated_values() {
    assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-15);
    assert!((bessel_y0(1.0) - 0.08825696421567697).abs() < 1e-14);
    assert!((bessel_k1(1.0) - 0.6019072301972346).abs() < 1e-13);
}

#[test]
fn bump_energy_matches_quadrature() {
    let in_test = trapezoid(
        |x| 0.5 * (bump_derivative(x, 1.0).powi(2) + bump(x, 1.0).powi(2)),
        -1.0,
        1.0,
        20000,
    );
    assert!((in_test - BUMP_ENERGY).abs() < 1e-12, "{in_test}");

    // At dx = 1/64 the sampled bump aliases at the 1e-10 level.
    let g = UniformGrid::new(8192, 1.0 / 128.0).unwrap();
    let data = CauchyData::at_rest(make_bump(g, 0.0, 1.0, 1.0).unwrap(), mass(1.0));
    let e = energy(&data);
    assert!((e - BUMP_ENERGY).abs() < 1e-12 * BUMP_ENERGY, "{e}");
}

#[test]
fn wightman_golden_value() {
    let s = 2f64.sqrt();
    let closed = Complex64::new(bessel_j0(s), -bessel_y0(s)) / 4.0;
    let frozen = Complex64::new(WIGHTMAN_AT_1P5_0P5.0, WIGHTMAN_AT_1P5_0P5.1);
    assert!((closed - frozen).norm() < 1e-14);

    let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
    let q = delta_plus(1.5, &g, mass(1.0), &QuadratureSettings::default()).unwrap();
    q.meta.ensure_converged().unwrap();
    let v = q.values.values()[g.index_of(0.5).unwrap()];
    assert!((v - frozen).norm() < 1e-7, "{v}");
}

#[test]
fn commutator_matches_bessel_form_off_the_cone() {
    let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
    for (t, m) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (-1.5, 1.0)] {
        let s = pauli_jordan(t, &g, mass(m), &QuadratureSettings::default()).unwrap();
        let mut worst = 0.0f64;
        for (j, x) in g.points().enumerate() {
            if (x.abs() - f64::abs(t)).abs() < 0.1 || x.abs() > 6.0 {
                continue;
            }
            let exact = if x.abs() < f64::abs(t) {
                0.5 * f64::signum(t) * bessel_j0(m * (t * t - x * x).sqrt())
            } else {
                0.0
            };
            worst = worst.max((s.delta().values()[j] - exact).norm());
        }
        assert!(worst < 1e-6, "t={t} m={m}: {worst}");
    }
}

#[test]
fn wightman_magnitude_falls_with_mass_at_spacelike_point() {
    let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
    let j = g.index_of(1.5).unwrap();
    let mags: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&m| {
            delta_plus(0.5, &g, mass(m), &QuadratureSettings::default())
                .unwrap()
                .values
                .values()[j]
                .norm()
        })
        .collect();
    assert!(mags[0] > mags[1] && mags[1] > mags[2], "{mags:?}");
}

#[test]
fn massless_propagator_solution_translates() {
    let g = UniformGrid::new(8192, 1.0 / 1024.0).unwrap();
    let phi = make_bump(g, -1.0, 1.0, 1.0).unwrap();
    let pi = kglab::spectral::apply_multiplier(&phi, |p| Complex64::new(0.0, -p));
    let data = CauchyData::new(phi, pi, Mass::ZERO, 0.0).unwrap();
    let sol = cauchy_via_propagator(&data, 1.0, &QuadratureSettings::default()).unwrap();
    let expect = Field::from_fn(g, |x| Complex64::new(bump(x, 1.0), 0.0)).unwrap();
    let gap = sol.phi.max_abs_difference(&expect).unwrap();
    assert!(gap < 1e-3, "{gap}");
}

#[test]
fn witness_matches_position_space_kernel() {
    let g = UniformGrid::new(16384, 1.0 / 128.0).unwrap();
    let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
    let w = positivity_tail_witness(&b, mass(1.0)).unwrap();
    for x in [3.0, 5.0, 8.0] {
        let got = w.values()[g.index_of(x).unwrap()];
        let want = Complex64::new(0.0, -omega_on_bump(x, 1.0, 1.0));
        assert!(
            (got - want).norm() < 1e-8 * want.norm() + 1e-11,
            "x={x}: {got} vs {want}"
        );
    }
}

#[test]
fn witness_rate_matches_kernel_oracle() {
    // Rates of the kernel-quadrature tail over the same windows.
    let g = UniformGrid::new(16384, 1.0 / 128.0).unwrap();
    let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
    let w = positivity_tail_witness(&b, mass(1.0)).unwrap();
    for (window, oracle) in [
        ([4.0, 9.0], 1.2560564198531976),
        ([11.0, 23.0], 1.0929510299451233),
    ] {
        let xs = linspace(window[0], window[1], 200);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| omega_on_bump(x, 1.0, 1.0).abs().ln())
            .collect();
        let in_test = -slope(&xs, &ys);
        assert!((in_test - oracle).abs() < 1e-6, "{in_test}");
        let fit = fit_exponential_tail(&w, window).unwrap();
        assert!((fit.rate - oracle).abs() < 2e-3, "{window:?}: {}", fit.rate);
    }
}

#[test]
fn witness_rate_scales_with_mass() {
    let g = UniformGrid::new(16384, 1.0 / 128.0).unwrap();
    let b = make_bump(g, 0.0, 1.0, 1.0).unwrap();
    let rate = |m: f64| {
        let w = positivity_tail_witness(&b, mass(m)).unwrap();
        fit_exponential_tail(&w, [1.0 + 10.0 / m, 1.0 + 22.0 / m])
            .unwrap()
            .rate
    };
    let ratio = rate(2.0) / rate(1.0);
    assert!((1.8..=2.2).contains(&ratio), "{ratio}");
}

#[test]
fn compact_growth_matches_real_exponential_moment() {
    // For a positive even bump the peak over p sits at p = 0, where the
    // transform is the real integral of b(x) exp(qx).
    let g = UniformGrid::new(4096, 1.0 / 64.0).unwrap();
    for r in [0.5, 1.0, 2.0] {
        let b = make_bump(g, 0.0, r, 1.0).unwrap();
        let qs = linspace(1.0, 6.0, 11);
        let peaks: Vec<f64> = qs
            .iter()
            .map(|&q| complex_momentum_transform(&b, q).unwrap().peak())
            .collect();
        for (q, peak) in qs.iter().zip(&peaks) {
            let moment = trapezoid(|x| bump(x, r) * (q * x).exp(), -r, r, 8000).ln();
            assert!(
                (peak - moment).abs() < 1e-6,
                "r={r} q={q}: {peak} vs {moment}"
            );
        }
        // The slope approaches r from below only slowly in q.
        let s = slope(&qs, &peaks);
        assert!(s <= 1.05 * r && s > 0.0, "r={r}: {s}");
    }
}

#[test]
fn exponential_tail_strip_of_analyticity() {
    let peak = |n: usize, q: f64| {
        let g = UniformGrid::new(n, 1.0 / 64.0).unwrap();
        let f = make_exponential_tail(g, 0.0, 1.0, 1.0).unwrap();
        complex_momentum_transform(&f, q).unwrap().peak()
    };
    // Inside the strip the continuum value is log(2 / (1 - q^2)).
    let inside = (2.0f64 / 0.75).ln();
    assert!((peak(8192, 0.5) - inside).abs() < 1e-3);
    assert!((peak(8192, 0.5) - peak(4096, 0.5)).abs() < 1e-6);
    // Outside it the sum grows like (q - 1) L / 2.
    let growth = peak(8192, 1.5) - peak(4096, 1.5);
    assert!((growth - 0.5 * 32.0).abs() < 0.1, "{growth}");
}

#[test]
fn leapfrog_converges_at_second_order() {
    let err = |n: usize| {
        let dx = 32.0 / n as f64;
        let g = UniformGrid::new(n, dx).unwrap();
        let data = CauchyData::at_rest(make_bump(g, 0.0, 2.0, 1.0).unwrap(), mass(1.0));
        let fd = evolve_local_fd(&data, 1.0, &EvolutionConfig::local_fd(dx / 2.0)).unwrap();
        let exact = evolve_spectral(&data, 1.0).unwrap();
        fd.phi().max_abs_difference(exact.phi()).unwrap()
    };
    let e: Vec<f64> = [1024, 2048, 4096].iter().map(|&n| err(n)).collect();
    for pair in e.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((3.5..=4.5).contains(&ratio), "{e:?}");
    }
}
