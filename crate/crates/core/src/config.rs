//! TOML experiment configuration and its validation.
//!
//! Every rule a module would enforce at run time is checked here first, in a
//! fixed order, and the first violation is reported with the dotted path of
//! the offending key.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::Mass;
use crate::error::{Error, Result};
use crate::evolution::{step_count, CauchyData, EvolutionConfig, Method};
use crate::propagator::{QuadratureSettings, CONE_EXCLUSION_CELLS};
use crate::spectral::{apply_multiplier, make_exponential_tail, Bump, Field, UniformGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Evolve,
    Hegerfeldt,
    Propagator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub mass: f64,
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub hegerfeldt: HegerfeldtSection,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub dx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factory {
    #[default]
    Bump,
    ExponentialTail,
}

/// Initial time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Momentum {
    /// `pi = 0`.
    #[default]
    Rest,
    /// `pi = -d_x phi`, spectral derivative.
    RightMover,
    /// `pi = +d_x phi`, spectral derivative.
    LeftMover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSpec {
    pub factory: Factory,
    pub center: f64,
    /// Bump radius.
    pub radius: f64,
    /// Exponential-tail rate.
    pub rate: f64,
    pub amplitude: f64,
    pub momentum: Momentum,
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec {
            factory: Factory::Bump,
            center: 0.0,
            radius: 1.0,
            rate: 1.0,
            amplitude: 1.0,
            momentum: Momentum::Rest,
        }
    }
}

impl StateSpec {
    pub fn bump(&self) -> Bump {
        Bump::new(self.center, self.radius, self.amplitude)
    }

    /// Radius beyond which the initial field vanishes; 0 for tails.
    pub fn support_edge(&self) -> f64 {
        match self.factory {
            Factory::Bump => self.center.abs() + self.radius,
            Factory::ExponentialTail => 0.0,
        }
    }

    pub fn sample(&self, grid: UniformGrid) -> Result<Field> {
        match self.factory {
            Factory::Bump => self.bump().sample(grid),
            Factory::ExponentialTail => {
                make_exponential_tail(grid, self.center, self.rate, self.amplitude)
            }
        }
    }

    pub fn cauchy_data(&self, grid: UniformGrid, mass: Mass) -> Result<CauchyData> {
        let phi = self.sample(grid)?;
        let sign = match self.momentum {
            Momentum::Rest => return Ok(CauchyData::at_rest(phi, mass)),
            Momentum::RightMover => -1.0,
            Momentum::LeftMover => 1.0,
        };
        let pi = apply_multiplier(&phi, |p| Complex64::new(0.0, sign * p));
        CauchyData::new(phi, pi, mass, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub method: Method,
    pub dt: Option<f64>,
    pub times: Vec<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            method: Method::SpectralExact,
            dt: None,
            times: vec![1.0, 2.0, 4.0],
        }
    }
}

impl EvolutionSection {
    pub fn config(&self) -> EvolutionConfig {
        EvolutionConfig {
            method: self.method,
            dt: self.dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Support-radius threshold.
    pub threshold: f64,
    /// Physical slack added to the cone edge.
    pub margin: f64,
    /// Largest leakage a causal run may show.
    pub leakage_limit: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            threshold: 1e-12,
            margin: 5.0 / 64.0,
            leakage_limit: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HegerfeldtSection {
    /// Times, increasing, at which positive-frequency leakage is measured.
    pub leakage_times: Vec<f64>,
    /// Smallest leakage that counts as spreading.
    pub leakage_floor: f64,
    /// Snapshot times whose tails are fitted.
    pub tail_times: Vec<f64>,
    /// Fit window in Compton lengths past the cone edge `R + t`.
    pub window: [f64; 2],
    pub min_r2: f64,
    /// Allowed `|rate/m - 1|`.
    pub rate_tolerance: f64,
    /// Repeat the leakage ladder on a grid with twice the points and half the spacing.
    pub refine_check: bool,
    /// Allowed relative change of leakage under that refinement.
    pub refine_tolerance: f64,
}

impl Default for HegerfeldtSection {
    fn default() -> Self {
        HegerfeldtSection {
            leakage_times: vec![1e-3, 1e-2, 1e-1],
            leakage_floor: 1e-10,
            tail_times: vec![0.5, 1.0],
            window: [10.0, 22.0],
            min_r2: 0.99,
            rate_tolerance: 0.15,
            refine_check: true,
            refine_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorCase {
    pub t: f64,
    /// Defaults to the top-level mass.
    #[serde(default)]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorSection {
    pub cases: Vec<PropagatorCase>,
    pub margin: f64,
    pub multiplier_tolerance: f64,
    /// Also solve the configured state through the propagator and compare
    /// with the spectral solution.
    pub bridge: bool,
    pub bridge_tolerance: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        PropagatorSection {
            cases: vec![
                PropagatorCase { t: 0.0, m: None },
                PropagatorCase {
                    t: 1.0,
                    m: Some(1.0),
                },
                PropagatorCase {
                    t: 2.0,
                    m: Some(1.0),
                },
                PropagatorCase {
                    t: 1.0,
                    m: Some(2.0),
                },
            ],
            margin: 0.2,
            multiplier_tolerance: 1e-3,
            bridge: true,
            bridge_tolerance: 1e-3,
            quadrature: QuadratureSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub format: Format,
}

/// Re-labels a module error as a config error on `field`.
fn at<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    })
}

fn require(field: &str, ok: bool, rule: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, rule))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "<document>".to_string()
            } else {
                path
            };
            Error::config(field, e.inner().message().to_string())
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        require(
            "grid.n",
            self.grid.n >= 16 && self.grid.n.is_power_of_two(),
            "a power of two >= 16",
        )?;
        require(
            "grid.dx",
            self.grid.dx.is_finite() && self.grid.dx > 0.0,
            "positive and finite",
        )?;
        UniformGrid::new(self.grid.n, self.grid.dx)
    }

    pub fn mass(&self) -> Result<Mass> {
        at("mass", Mass::new(self.mass))
    }

    fn validate_state(&self, grid: &UniformGrid) -> Result<()> {
        let s = &self.state;
        require(
            "state.amplitude",
            s.amplitude.is_finite() && s.amplitude != 0.0,
            "finite and nonzero",
        )?;
        require("state.center", s.center.is_finite(), "finite")?;
        match s.factory {
            Factory::Bump => match s.bump().validate(grid) {
                Err(e @ Error::UnderResolved { .. }) => {
                    Err(Error::config("state.radius", e.to_string()))
                }
                Err(e) => Err(Error::config("state.center", e.to_string())),
                Ok(()) => Ok(()),
            },
            Factory::ExponentialTail => require(
                "state.rate",
                s.rate.is_finite() && s.rate > 0.0,
                "positive and finite",
            ),
        }
    }

    fn validate_diagnostics(&self) -> Result<()> {
        let d = &self.diagnostics;
        require("diagnostics.threshold", d.threshold > 0.0, "positive")?;
        require(
            "diagnostics.margin",
            d.margin.is_finite() && d.margin >= 0.0,
            "non-negative and finite",
        )?;
        require(
            "diagnostics.leakage_limit",
            d.leakage_limit > 0.0,
            "positive",
        )
    }

    fn validate_times(field: &str, times: &[f64], grid: &UniformGrid) -> Result<()> {
        require(field, !times.is_empty(), "at least one time")?;
        for t in times {
            require(field, t.is_finite() && *t >= 0.0, "finite and non-negative")?;
            require(
                field,
                *t <= grid.length() / 4.0,
                "within the L/4 boundary margin",
            )?;
        }
        Ok(())
    }

    /// Checks everything `command` will need, in a fixed order.
    pub fn validate(&self, command: Command) -> Result<()> {
        let grid = self.grid()?;
        let mass = self.mass()?;
        match command {
            Command::Evolve => {
                self.validate_state(&grid)?;
                self.validate_diagnostics()?;
                let times = &self.evolution.times;
                Self::validate_times("evolution.times", times, &grid)?;
                let edge = self.state.support_edge();
                for t in times {
                    require(
                        "diagnostics.margin",
                        edge + t + self.diagnostics.margin < grid.half_length(),
                        "cone edge plus margin must stay inside L/2",
                    )?;
                }
                if self.evolution.method == Method::LocalFd {
                    at(
                        "evolution.dt",
                        self.evolution.config().validate(&grid, mass),
                    )?;
                    let dt = self.evolution.dt.expect("validated");
                    for t in times.iter().filter(|t| **t > 0.0) {
                        at("evolution.times", step_count(*t, dt).map(|_| ()))?;
                    }
                }
                Ok(())
            }
            Command::Hegerfeldt => {
                require(
                    "mass",
                    !mass.is_massless(),
                    "must be positive for positive-frequency evolution",
                )?;
                require(
                    "state.factory",
                    self.state.factory == Factory::Bump,
                    "must be a compact bump",
                )?;
                self.validate_state(&grid)?;
                self.validate_diagnostics()?;
                let h = &self.hegerfeldt;
                Self::validate_times("hegerfeldt.leakage_times", &h.leakage_times, &grid)?;
                require(
                    "hegerfeldt.leakage_times",
                    h.leakage_times.windows(2).all(|w| w[0] < w[1]) && h.leakage_times[0] > 0.0,
                    "positive and strictly increasing",
                )?;
                Self::validate_times("hegerfeldt.tail_times", &h.tail_times, &grid)?;
                require(
                    "hegerfeldt.leakage_floor",
                    h.leakage_floor > 0.0,
                    "positive",
                )?;
                require(
                    "hegerfeldt.min_r2",
                    (0.0..=1.0).contains(&h.min_r2),
                    "in [0, 1]",
                )?;
                require(
                    "hegerfeldt.rate_tolerance",
                    h.rate_tolerance > 0.0,
                    "positive",
                )?;
                require(
                    "hegerfeldt.refine_tolerance",
                    h.refine_tolerance > 0.0,
                    "positive",
                )?;
                let [lo, hi] = h.window;
                require(
                    "hegerfeldt.window",
                    lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi,
                    "0 < lo < hi",
                )?;
                let compton = 1.0 / mass.value();
                let edge = self.state.support_edge();
                let usable = grid.half_length() - grid.length() / 8.0;
                let latest = h.tail_times.iter().copied().fold(0.0, f64::max);
                require(
                    "hegerfeldt.window",
                    edge + latest + hi * compton <= usable,
                    "fit window must end inside L/2 - L/8",
                )?;
                for t in &h.leakage_times {
                    require(
                        "diagnostics.margin",
                        edge + t + self.diagnostics.margin < grid.half_length(),
                        "cone edge plus margin must stay inside L/2",
                    )?;
                }
                Ok(())
            }
            Command::Propagator => {
                let p = &self.propagator;
                require("propagator.cases", !p.cases.is_empty(), "at least one case")?;
                for (i, c) in p.cases.iter().enumerate() {
                    let field = format!("propagator.cases[{i}]");
                    let m = at(&format!("{field}.m"), Mass::new(c.m.unwrap_or(self.mass)))?;
                    require(&format!("{field}.t"), c.t.is_finite(), "finite")?;
                    require(
                        &format!("{field}.t"),
                        c.t.abs() <= grid.length() / 4.0,
                        "within the L/4 boundary margin",
                    )?;
                    p.quadrature.validate(&grid, m).map_err(|e| match e {
                        Error::Config { field, rule } => {
                            Error::config(format!("propagator.{field}"), rule)
                        }
                        other => Error::config("propagator.quadrature", other.to_string()),
                    })?;
                    require(
                        "propagator.margin",
                        c.t.abs() + p.margin < grid.half_length(),
                        "cone edge plus margin must stay inside L/2",
                    )?;
                }
                require(
                    "propagator.margin",
                    p.margin >= CONE_EXCLUSION_CELLS * grid.dx(),
                    "at least 3 dx",
                )?;
                require(
                    "propagator.multiplier_tolerance",
                    p.multiplier_tolerance > 0.0,
                    "positive",
                )?;
                require(
                    "propagator.bridge_tolerance",
                    p.bridge_tolerance > 0.0,
                    "positive",
                )?;
                if p.bridge {
                    self.validate_state(&grid)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mass = 1.0\n[grid]\nn = 4096\ndx = 0.015625\n";

    fn parse(s: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(s)
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.evolution.times, vec![1.0, 2.0, 4.0]);
        assert_eq!(c.diagnostics.margin, 5.0 / 64.0);
        for cmd in [Command::Evolve, Command::Hegerfeldt] {
            c.validate(cmd).unwrap();
        }
    }

    #[test]
    fn parse_errors_name_the_field() {
        let e = parse("mass = 1.0\n[grid]\nn = 4096\ndx = \"small\"\n").unwrap_err();
        assert_eq!(field_of(e), "grid.dx");
        let e =
            parse("mass = 1.0\n[grid]\nn = 4096\ndx = 0.1\n[state]\nradiuss = 2.0\n").unwrap_err();
        assert_eq!(field_of(e), "state.radiuss");
        let e = parse("[grid]\nn = 4096\ndx = 0.1\n").unwrap_err();
        assert_eq!(field_of(e), "<document>");
        let e = parse("mass = = 1").unwrap_err();
        assert_eq!(field_of(e), "<document>");
    }

    #[test]
    fn first_failing_rule_is_reported() {
        let mut c = parse(MINIMAL).unwrap();
        c.grid.n = 1000;
        c.mass = -1.0;
        assert_eq!(field_of(c.validate(Command::Evolve).unwrap_err()), "grid.n");
        c.grid.n = 4096;
        assert_eq!(field_of(c.validate(Command::Evolve).unwrap_err()), "mass");
        c.mass = 0.0;
        assert!(c.validate(Command::Evolve).is_ok());
        assert_eq!(
            field_of(c.validate(Command::Hegerfeldt).unwrap_err()),
            "mass"
        );
        c.mass = 1.0;
        c.state.radius = 0.05;
        assert_eq!(
            field_of(c.validate(Command::Evolve).unwrap_err()),
            "state.radius"
        );
        c.state.radius = 1.0;
        c.evolution.times = vec![1.0, 17.0];
        assert_eq!(
            field_of(c.validate(Command::Evolve).unwrap_err()),
            "evolution.times"
        );
    }

    #[test]
    fn local_fd_rules() {
        let mut c = parse(MINIMAL).unwrap();
        c.evolution.method = Method::LocalFd;
        assert_eq!(
            field_of(c.validate(Command::Evolve).unwrap_err()),
            "evolution.dt"
        );
        c.evolution.dt = Some(1.0 / 32.0);
        assert_eq!(
            field_of(c.validate(Command::Evolve).unwrap_err()),
            "evolution.dt"
        );
        c.evolution.dt = Some(1.0 / 128.0);
        c.validate(Command::Evolve).unwrap();
        c.evolution.dt = Some(1.0 / 192.0);
        c.evolution.times = vec![0.1];
        assert_eq!(
            field_of(c.validate(Command::Evolve).unwrap_err()),
            "evolution.times"
        );
    }

    #[test]
    fn propagator_rules() {
        let mut c = parse("mass = 1.0\n[grid]\nn = 1024\ndx = 0.015625\n").unwrap();
        c.validate(Command::Propagator).unwrap();
        c.propagator.quadrature.oversample = 4;
        assert_eq!(
            field_of(c.validate(Command::Propagator).unwrap_err()),
            "propagator.quadrature.oversample"
        );
        c.propagator.quadrature.oversample = 32;
        c.propagator.margin = 0.01;
        assert_eq!(
            field_of(c.validate(Command::Propagator).unwrap_err()),
            "propagator.margin"
        );
        c.propagator.margin = 0.2;
        c.propagator.cases[1].m = Some(-2.0);
        assert_eq!(
            field_of(c.validate(Command::Propagator).unwrap_err()),
            "propagator.cases[1].m"
        );
    }

    #[test]
    fn right_mover_derivative_is_spectral() {
        let g = UniformGrid::new(1024, 1.0 / 64.0).unwrap();
        let spec = StateSpec {
            momentum: Momentum::RightMover,
            ..StateSpec::default()
        };
        let d = spec.cauchy_data(g, Mass::ZERO).unwrap();
        let exact = spec.bump().sample_derivative(g).unwrap();
        let gap = (d.pi() + &exact).max_abs();
        assert!(gap < 1e-3, "{gap:e}");
    }
}
