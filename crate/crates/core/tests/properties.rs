//! Randomised invariants of the public API.

use kglab::diagnostics::{cone_leakage, support_radius};
use kglab::dispersion::{apply_omega_power, OmegaPower};
use kglab::evolution::{energy, evolve_spectral, CauchyData, LeapfrogStepper};
use kglab::posfreq::project_positive;
use kglab::propagator::{pauli_jordan, QuadratureSettings};
use kglab::spectral::{make_bump, Bump};
use kglab::{Mass, UniformGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> UniformGrid {
    UniformGrid::new(1024, 1.0 / 32.0).unwrap()
}

fn data(c: f64, r: f64, m: f64, v: f64) -> CauchyData {
    data_on(grid(), c, r, m, v)
}

/// Bump at `c` with radius `r` and compact `pi = -v b'`.
fn data_on(g: UniformGrid, c: f64, r: f64, m: f64, v: f64) -> CauchyData {
    let b = Bump::new(c, r, 1.0);
    let phi = b.sample(g).unwrap();
    let pi = b
        .sample_derivative(g)
        .unwrap()
        .scaled(Complex64::new(-v, 0.0));
    CauchyData::new(phi, pi, Mass::new(m).unwrap(), 0.0).unwrap()
}

fn rel(a: &kglab::Field, b: &kglab::Field) -> f64 {
    a.relative_l2_distance(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_flow_is_a_group(
        c in -2.0..2.0f64, r in 0.5..2.0f64, m in 0.0..3.0f64,
        v in -1.0..1.0f64, t1 in -3.0..3.0f64, t2 in -3.0..3.0f64,
    ) {
        let d = data(c, r, m, v);
        let direct = evolve_spectral(&d, t1 + t2).unwrap();
        let stepped = evolve_spectral(&evolve_spectral(&d, t1).unwrap(), t1 + t2).unwrap();
        prop_assert!(rel(direct.phi(), stepped.phi()) < 1e-12);
        let back = evolve_spectral(&evolve_spectral(&d, t1).unwrap(), 0.0).unwrap();
        prop_assert!(rel(back.phi(), d.phi()) < 1e-12);
    }

    #[test]
    fn spectral_energy_is_conserved(
        c in -2.0..2.0f64, r in 0.5..2.0f64, m in 0.0..3.0f64,
        v in -1.0..1.0f64, t in -4.0..4.0f64,
    ) {
        let d = data(c, r, m, v);
        let e0 = energy(&d);
        let e1 = energy(&evolve_spectral(&d, t).unwrap());
        prop_assert!((e1 - e0).abs() < 1e-12 * e0);
    }

    #[test]
    fn spectral_flow_stays_in_the_cone(
        r in 0.5..2.0f64, m in 0.0..3.0f64, v in -1.0..1.0f64, t in 0.5..4.0f64,
    ) {
        // At least 32 cells across the radius keeps aliasing below the bound.
        let g = UniformGrid::new(2048, 1.0 / 64.0).unwrap();
        let d = data_on(g, 0.0, r, m, v);
        let out = evolve_spectral(&d, t).unwrap();
        let leak = cone_leakage(out.phi(), r, t, 5.0 * g.dx()).unwrap();
        prop_assert!(leak < 1e-8, "leak {leak:e}");
    }

    #[test]
    fn stencil_grows_support_by_at_most_one_cell(
        c in -2.0..2.0f64, r in 0.5..2.0f64, m in 0.0..3.0f64,
        v in -1.0..1.0f64, steps in 1usize..400,
    ) {
        let d = data(c, r, m, v);
        let mut s = LeapfrogStepper::new(&d, grid().dx() / 2.0).unwrap();
        let (mut lo, mut hi) = s.support_bounds().unwrap();
        for _ in 0..steps {
            s.step();
            let (a, b) = s.support_bounds().unwrap();
            prop_assert!(a + 1 >= lo && b <= hi + 1);
            lo = a;
            hi = b;
        }
    }

    #[test]
    fn frequency_split_reconstructs(
        c in -2.0..2.0f64, r in 0.5..2.0f64, m in 0.1..3.0f64, v in -1.0..1.0f64,
    ) {
        let d = data(c, r, m, v);
        let (phi, pi) = project_positive(&d).unwrap().reconstruct().unwrap();
        prop_assert!(rel(&phi, d.phi()) < 1e-12);
        prop_assert!(phi_close(&pi, d.pi()));
    }

    #[test]
    fn omega_powers_compose(c in -2.0..2.0f64, r in 0.5..2.0f64, m in 0.1..3.0f64) {
        let g = grid();
        let m = Mass::new(m).unwrap();
        let b = make_bump(g, c, r, 1.0).unwrap();
        let half = apply_omega_power(&b, m, OmegaPower::Half).unwrap();
        let twice = apply_omega_power(&half, m, OmegaPower::Half).unwrap();
        let one = apply_omega_power(&b, m, OmegaPower::One).unwrap();
        prop_assert!(rel(&twice, &one) < 1e-12);
        let back = apply_omega_power(&one, m, OmegaPower::MinusOne).unwrap();
        prop_assert!(rel(&back, &b) < 1e-12);
    }
}

fn phi_close(a: &kglab::Field, b: &kglab::Field) -> bool {
    if b.l2_norm() == 0.0 {
        a.l2_norm() < 1e-12
    } else {
        rel(a, b) < 1e-12
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn commutator_is_odd_under_full_reflection(t in 0.2..3.0f64, m in 0.0..2.0f64) {
        let g = UniformGrid::new(256, 1.0 / 16.0).unwrap();
        let m = Mass::new(m).unwrap();
        let q = QuadratureSettings::default();
        let fwd = pauli_jordan(t, &g, m, &q).unwrap();
        let bwd = pauli_jordan(-t, &g, m, &q).unwrap();
        let worst = (0..g.n())
            .map(|j| (fwd.delta().values()[j] + bwd.delta().values()[g.mirror(j)]).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn support_radius_of_compact_bump(c in -1.0..1.0f64, r in 0.5..2.0f64) {
        let g = grid();
        let b = make_bump(g, c, r, 1.0).unwrap();
        let s = support_radius(&b, f64::MIN_POSITIVE);
        prop_assert!(!s.saturated);
        prop_assert!(s.radius <= c.abs() + r + g.dx() && s.radius >= c.abs() + r - 2.0 * g.dx());
    }
}
