//! Independent reference values for the integration tests. Nothing here calls
//! into `kglab` numerics; closed forms and plain quadrature only.

#![allow(dead_code)]

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bessel J0 by its power series; accurate to roundoff for `x < 12`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Bessel Y0 from the ascending series with harmonic numbers.
pub fn bessel_y0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        tail -= term * harmonic;
    }
    2.0 / PI * (((x / 2.0).ln() + EULER_GAMMA) * bessel_j0(x) + tail)
}

/// Modified Bessel K1 from `int_0^inf exp(-z cosh u) cosh u du`, trapezoid
/// rule (the integrand decays doubly exponentially).
pub fn bessel_k1(z: f64) -> f64 {
    let h: f64 = 1.0 / 256.0;
    let mut sum = 0.5 * (-z).exp();
    let mut u = h;
    loop {
        let c = u.cosh();
        let v = (-z * c).exp() * c;
        sum += v;
        if v < 1e-300 || v < 1e-20 * sum {
            break;
        }
        u += h;
    }
    sum * h
}

/// Unit-radius-scaled smooth bump `exp(1 - 1/(1 - u^2))`.
pub fn bump(x: f64, radius: f64) -> f64 {
    let u = x / radius;
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

pub fn bump_derivative(x: f64, radius: f64) -> f64 {
    let u = x / radius;
    if u.abs() < 1.0 {
        let s = 1.0 - u * u;
        bump(x, radius) * (-2.0 * u / (s * s)) / radius
    } else {
        0.0
    }
}

/// Trapezoid rule on `[a, b]`; spectrally accurate for integrands that
/// vanish with all derivatives at both ends.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

/// `(sqrt(m^2 - d_x^2) b)(x)` for a unit-amplitude bump of radius `r` and a
/// point `|x| > r`, from the position-space kernel `-(m / pi) K1(m|x|)/|x|`.
pub fn omega_on_bump(x: f64, r: f64, m: f64) -> f64 {
    let f = |y: f64| {
        let d = (x - y).abs();
        bump(y, r) * bessel_k1(m * d) / d
    };
    -(m / PI) * trapezoid(f, -r, r, 4000)
}

/// Least-squares slope.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub mod cli {
    use std::path::{Path, PathBuf};
    use std::process::{Command, Output};

    pub fn config(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../configs")
            .join(format!("{name}.toml"))
    }

    /// Runs `kglab <args>` with an optional `KGLAB_THREADS`.
    pub fn kglab(args: &[&str], threads: Option<usize>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kglab"));
        cmd.args(args).env_remove("KGLAB_THREADS");
        if let Some(t) = threads {
            cmd.env("KGLAB_THREADS", t.to_string());
        }
        cmd.output().expect("spawn kglab")
    }

    /// Subcommand that consumes a default config.
    pub fn subcommand(name: &str) -> &'static str {
        match name {
            "hegerfeldt" => "hegerfeldt",
            "propagator" => "propagator",
            _ => "evolve",
        }
    }

    /// Runs a default config into `out`, returning the process output.
    pub fn run_config(name: &str, out: &Path, threads: Option<usize>) -> Output {
        let cfg = config(name);
        kglab(
            &[
                subcommand(name),
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        )
    }

    pub const DEFAULT_CONFIGS: [&str; 5] = [
        "evolve",
        "right_mover",
        "leapfrog",
        "hegerfeldt",
        "propagator",
    ];
}
