//! The three laboratory runs behind the CLI, plus report rendering.
//!
//! Each command validates its config, computes through the library modules
//! only, writes bulk data in the requested [`Format`] and returns a
//! [`RunReport`] of named verdicts. Outputs are pure functions of the config.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{Command, ExperimentConfig, Format};
use crate::diagnostics::{
    boundary_floor, cone_leakage, support_radius, support_report, ReportSettings, SupportReport,
    WRAP_FLOOR,
};
use crate::dispersion::Mass;
use crate::error::{Error, Result};
use crate::evolution::{
    energy, evolve_spectral, joint_support_radius, step_count, CauchyData, LeapfrogStepper, Method,
};
use crate::io;
use crate::posfreq::{evolve_positive, positivity_tail_witness};
use crate::propagator::{
    cauchy_via_propagator, multiplier_error, pauli_jordan, spacelike_suppression_scan,
    PropagatorSample, IDENTITY_TOLERANCE, ZERO_TIME_FLOOR,
};
use crate::spectral::{Field, UniformGrid};

pub const RUN_REPORT_SCHEMA: &str = "kglab.run_report/1";

/// Relative energy drift allowed for the exact spectral solver.
pub const SPECTRAL_ENERGY_DRIFT: f64 = 1e-12;
/// Relative drift allowed for the leapfrog conserved form.
pub const LEAPFROG_FORM_DRIFT: f64 = 1e-6;
/// Antisymmetry `Delta(-t,-x) = -Delta(t,x)` tolerance.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: Option<f64>,
    /// Human-readable acceptance rule, e.g. `< 1e-8`.
    pub bound: String,
    pub pass: bool,
}

impl Verdict {
    fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Verdict {
            name: name.into(),
            value: Some(value),
            bound: format!("< {limit:e}"),
            pass: value < limit,
        }
    }

    fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Verdict {
            name: name.into(),
            value: Some(value),
            bound: format!("> {limit:e}"),
            pass: value > limit,
        }
    }

    fn failed(name: impl Into<String>, reason: String) -> Self {
        Verdict {
            name: name.into(),
            value: None,
            bound: reason,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: Command,
    pub pass: bool,
    pub verdicts: Vec<Verdict>,
    /// File names written into the output directory.
    pub files: Vec<String>,
    pub details: serde_json::Value,
}

impl RunReport {
    fn new(
        command: Command,
        verdicts: Vec<Verdict>,
        files: Vec<String>,
        details: serde_json::Value,
    ) -> Self {
        RunReport {
            schema: RUN_REPORT_SCHEMA.to_string(),
            command,
            pass: verdicts.iter().all(|v| v.pass),
            verdicts,
            files,
            details,
        }
    }
}

/// Writes bulk outputs and remembers their names.
struct Sink<'a> {
    dir: &'a Path,
    format: Format,
    files: Vec<String>,
}

impl<'a> Sink<'a> {
    fn new(dir: &'a Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Sink {
            dir,
            format,
            files: Vec::new(),
        })
    }

    fn name(&mut self, stem: &str) -> std::path::PathBuf {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let file = format!("{stem}.{ext}");
        self.files.push(file.clone());
        self.dir.join(file)
    }

    fn field(&mut self, stem: &str, f: &Field) -> Result<()> {
        let path = self.name(stem);
        match self.format {
            Format::Csv => io::write_field_csv(&path, f),
            Format::Json => io::write_field_json(&path, f),
        }
    }

    fn series(&mut self, stem: &str, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
        let path = self.name(stem);
        match self.format {
            Format::Csv => io::write_series_csv(&path, header, rows),
            Format::Json => io::write_series_json(&path, header, rows),
        }
    }

    fn propagator(&mut self, stem: &str, s: &PropagatorSample) -> Result<()> {
        match self.format {
            Format::Csv => {
                let csv = self.name(stem);
                let file = format!("{stem}.meta.json");
                self.files.push(file.clone());
                io::write_propagator_slice(&csv, &self.dir.join(file), s)
            }
            Format::Json => {
                let path = self.name(stem);
                io::write_propagator_json(&path, s)
            }
        }
    }

    fn report(mut self, report: RunReport, stem: &str) -> Result<RunReport> {
        let file = format!("{stem}.json");
        self.files.push(file.clone());
        let report = RunReport {
            files: std::mem::take(&mut self.files),
            ..report
        };
        io::write_json(&self.dir.join(file), &report)?;
        Ok(report)
    }
}

fn grid_json(g: &UniformGrid) -> serde_json::Value {
    json!({ "n": g.n(), "dx": g.dx(), "L": g.length() })
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Evolves the configured state through the time ladder and checks the cone,
/// energy and boundary floor at every time.
pub fn cmd_evolve(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<RunReport> {
    cfg.validate(Command::Evolve)?;
    let grid = cfg.grid()?;
    let mass = cfg.mass()?;
    let data = cfg.state.cauchy_data(grid, mass)?;
    let edge = cfg.state.support_edge();
    let d = cfg.diagnostics;
    let mut sink = Sink::new(out, format)?;
    let e0 = energy(&data);

    let snapshots = match cfg.evolution.method {
        Method::SpectralExact => cfg
            .evolution
            .times
            .iter()
            .map(|&t| evolve_spectral(&data, t).map(|s| (t, s, None)))
            .collect::<Result<Vec<_>>>()?,
        Method::LocalFd => leapfrog_ladder(
            &data,
            cfg.evolution.dt.expect("validated"),
            &cfg.evolution.times,
        )?,
    };

    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut worst_drift = 0.0f64;
    for (i, (t, s, form)) in snapshots.iter().enumerate() {
        let leak = cone_leakage(s.phi(), edge, *t, d.margin)?;
        let radius = support_radius(s.phi(), d.threshold);
        let e = energy(s);
        let floor = boundary_floor(s.phi());
        let peak = s.phi().max_abs();
        rows.push(vec![
            Some(*t),
            Some(leak),
            Some(radius.radius),
            Some(e),
            Some(relative(e, e0)),
            Some(floor),
        ]);
        match cfg.evolution.method {
            Method::SpectralExact => {
                verdicts.push(Verdict::below(
                    format!("cone_leakage[t={t}]"),
                    leak,
                    d.leakage_limit,
                ));
                worst_drift = worst_drift.max(relative(e, e0));
            }
            Method::LocalFd => {
                let (form0, form_t) = form.expect("leapfrog ladder records the form");
                worst_drift = worst_drift.max(relative(form_t, form0));
                let steps = if *t == 0.0 {
                    0
                } else {
                    step_count(*t, cfg.evolution.dt.expect("validated"))?
                };
                let initial = joint_support_radius(&data, f64::from_bits(1))?.radius;
                let reach = joint_support_radius(s, f64::from_bits(1))?.radius;
                let allowed = initial + steps as f64 * grid.dx();
                verdicts.push(Verdict {
                    name: format!("stencil_cone[t={t}]"),
                    value: Some(reach),
                    bound: format!("<= {allowed:e}"),
                    pass: reach <= allowed + 1e-9 * grid.dx(),
                });
            }
        }
        verdicts.push(Verdict::below(
            format!("relative_boundary_floor[t={t}]"),
            if peak > 0.0 { floor / peak } else { 0.0 },
            WRAP_FLOOR,
        ));
        sink.field(&format!("evolve_snapshot_{i:03}"), s.phi())?;
    }
    let (drift_name, drift_limit) = match cfg.evolution.method {
        Method::SpectralExact => ("energy_drift", SPECTRAL_ENERGY_DRIFT),
        Method::LocalFd => ("conserved_form_drift", LEAPFROG_FORM_DRIFT),
    };
    verdicts.push(Verdict::below(drift_name, worst_drift, drift_limit));
    sink.series(
        "evolve_series",
        &[
            "t",
            "leakage_fraction",
            "support_radius",
            "energy",
            "energy_drift",
            "boundary_floor",
        ],
        &rows,
    )?;
    let details = json!({
        "grid": grid_json(&grid),
        "mass": mass.value(),
        "method": cfg.evolution.method,
        "initial_energy": e0,
        "margin": d.margin,
    });
    sink.report(
        RunReport::new(Command::Evolve, verdicts, Vec::new(), details),
        "evolve_report",
    )
}

type Snapshot = (f64, CauchyData, Option<(f64, f64)>);

/// One leapfrog pass, stopping at every requested time. Each snapshot carries
/// the conserved form at the start and at that time.
fn leapfrog_ladder(data: &CauchyData, dt: f64, times: &[f64]) -> Result<Vec<Snapshot>> {
    let mut order: Vec<(usize, usize)> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| Ok((if t == 0.0 { 0 } else { step_count(t, dt)? }, i)))
        .collect::<Result<_>>()?;
    order.sort();
    let mut stepper = LeapfrogStepper::new(data, dt)?;
    let form0 = stepper.conserved_form();
    let mut out: Vec<Option<Snapshot>> = vec![None; times.len()];
    for (steps, i) in order {
        while stepper.steps() < steps {
            stepper.step();
        }
        let form = stepper.conserved_form();
        out[i] = Some((times[i], stepper.clone().finish(), Some((form0, form))));
    }
    Ok(out
        .into_iter()
        .map(|s| s.expect("every time visited"))
        .collect())
}

fn fit_verdicts(
    verdicts: &mut Vec<Verdict>,
    label: &str,
    report: &SupportReport,
    mass: Mass,
    cfg: &ExperimentConfig,
) {
    let h = &cfg.hegerfeldt;
    match report.tail_rate {
        Some(rate) => {
            let m = mass.value();
            let dev = (rate / m - 1.0).abs();
            verdicts.push(Verdict::below(
                format!("tail_rate_over_m[{label}]"),
                dev,
                h.rate_tolerance,
            ));
            verdicts.push(Verdict::above(
                format!("fit_r2[{label}]"),
                report.fit_r2,
                h.min_r2,
            ));
        }
        None => verdicts.push(Verdict::failed(
            format!("tail_rate_over_m[{label}]"),
            "tail fit rejected".into(),
        )),
    }
}

/// Positive-frequency spreading against the causal contrast, plus Compton
/// tail fits of the witness and of evolved snapshots.
pub fn cmd_hegerfeldt(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<RunReport> {
    cfg.validate(Command::Hegerfeldt)?;
    let grid = cfg.grid()?;
    let mass = cfg.mass()?;
    let h = &cfg.hegerfeldt;
    let d = cfg.diagnostics;
    let edge = cfg.state.support_edge();
    let bump = cfg.state.sample(grid)?;
    let data = CauchyData::at_rest(bump.clone(), mass);
    let mut sink = Sink::new(out, format)?;
    let mut verdicts = Vec::new();

    let refined = if h.refine_check {
        let g2 = UniformGrid::new(grid.n() * 2, grid.dx() / 2.0)?;
        Some(cfg.state.sample(g2)?)
    } else {
        None
    };
    let mut contrast_rows = Vec::new();
    let mut positive = Vec::new();
    for &t in &h.leakage_times {
        let pos = cone_leakage(&evolve_positive(&bump, mass, t)?, edge, t, d.margin)?;
        let causal = cone_leakage(evolve_spectral(&data, t)?.phi(), edge, t, d.margin)?;
        let fine = match &refined {
            Some(b2) => Some(cone_leakage(
                &evolve_positive(b2, mass, t)?,
                edge,
                t,
                d.margin,
            )?),
            None => None,
        };
        verdicts.push(Verdict::above(
            format!("positive_leakage[t={t}]"),
            pos,
            h.leakage_floor,
        ));
        verdicts.push(Verdict::below(
            format!("causal_leakage[t={t}]"),
            causal,
            d.leakage_limit,
        ));
        if let Some(f) = fine {
            verdicts.push(Verdict::below(
                format!("refinement_change[t={t}]"),
                relative(f, pos),
                h.refine_tolerance,
            ));
        }
        positive.push(pos);
        contrast_rows.push(vec![Some(t), Some(pos), Some(causal), fine]);
    }
    let growing = positive.windows(2).all(|w| w[0] < w[1]);
    verdicts.push(Verdict {
        name: "positive_leakage_grows".into(),
        value: None,
        bound: "strictly increasing in t".into(),
        pass: growing,
    });

    let compton = 1.0 / mass.value();
    let [lo, hi] = h.window;
    let settings = |t: f64| ReportSettings {
        threshold: d.threshold,
        r0: edge,
        t,
        margin: d.margin,
        window: [edge + t + lo * compton, edge + t + hi * compton],
        min_r2: h.min_r2,
    };
    let witness = positivity_tail_witness(&bump, mass)?;
    let witness_report = support_report(&witness, &settings(0.0))?;
    verdicts.push(Verdict::above(
        "witness_support_radius",
        witness_report.support_radius,
        edge,
    ));
    fit_verdicts(&mut verdicts, "witness", &witness_report, mass, cfg);
    sink.field("hegerfeldt_witness", &witness)?;

    let mut tail_rows = Vec::new();
    let mut snapshot_reports = Vec::new();
    for (i, &t) in h.tail_times.iter().enumerate() {
        let psi = evolve_positive(&bump, mass, t)?;
        let report = support_report(&psi, &settings(t))?;
        fit_verdicts(&mut verdicts, &format!("t={t}"), &report, mass, cfg);
        tail_rows.push(vec![
            Some(t),
            Some(report.leakage_fraction),
            report.tail_rate,
            Some(report.fit_r2),
            Some(report.window[0]),
            Some(report.window[1]),
        ]);
        sink.field(&format!("hegerfeldt_snapshot_{i:03}"), &psi)?;
        snapshot_reports.push(json!({ "t": t, "report": report }));
    }
    for row in &contrast_rows {
        tail_rows.push(vec![row[0], row[1], None, None, None, None]);
    }
    tail_rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).expect("finite times"));

    sink.series(
        "hegerfeldt_leakage",
        &[
            "t",
            "leakage_fraction",
            "fitted_rate",
            "fit_r2",
            "window_lo",
            "window_hi",
        ],
        &tail_rows,
    )?;
    sink.series(
        "hegerfeldt_contrast",
        &[
            "t",
            "positive_leakage",
            "causal_leakage",
            "refined_positive_leakage",
        ],
        &contrast_rows,
    )?;
    let details = json!({
        "grid": grid_json(&grid),
        "mass": mass.value(),
        "margin": d.margin,
        "witness": witness_report,
        "snapshots": snapshot_reports,
    });
    sink.report(
        RunReport::new(Command::Hegerfeldt, verdicts, Vec::new(), details),
        "hegerfeldt_report",
    )
}

/// Quadrature failures become FAIL verdicts; anything else is an error.
fn quadrature_or_verdict<T>(
    verdicts: &mut Vec<Verdict>,
    name: String,
    r: Result<T>,
) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotConverged {
            residual,
            tolerance,
        }) => {
            verdicts.push(Verdict {
                name,
                value: Some(residual),
                bound: format!("<= {tolerance:e}"),
                pass: false,
            });
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Propagator slices, support scan, identities and the bridge to the
/// spectral solver for every configured `(t, m)`.
pub fn cmd_propagator(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<RunReport> {
    cfg.validate(Command::Propagator)?;
    let grid = cfg.grid()?;
    let p = &cfg.propagator;
    let q = &p.quadrature;
    let mut sink = Sink::new(out, format)?;
    let mut verdicts = Vec::new();
    let mut cases = Vec::new();
    for (i, case) in p.cases.iter().enumerate() {
        let t = case.t;
        let mass = Mass::new(case.m.unwrap_or(cfg.mass))?;
        let label = format!("t={t},m={}", mass.value());
        let Some(sample) = quadrature_or_verdict(
            &mut verdicts,
            format!("quadrature[{label}]"),
            pauli_jordan(t, &grid, mass, q),
        )?
        else {
            continue;
        };
        let meta = *sample.meta();
        verdicts.push(Verdict {
            name: format!("quadrature_residual[{label}]"),
            value: Some(meta.residual),
            bound: format!("<= {:e}", meta.tolerance),
            pass: meta.converged,
        });
        if let Some(err) = sample.identity_error() {
            verdicts.push(Verdict::below(
                format!("identity[{label}]"),
                err,
                IDENTITY_TOLERANCE,
            ));
        }
        let mut antisymmetry = None;
        if let Some(mirror) = quadrature_or_verdict(
            &mut verdicts,
            format!("quadrature[t={},m={}]", -t, mass.value()),
            pauli_jordan(-t, &grid, mass, q),
        )? {
            let worst = (0..grid.n())
                .map(|j| {
                    (mirror.delta().values()[grid.mirror(j)] + sample.delta().values()[j]).norm()
                })
                .fold(0.0, f64::max);
            verdicts.push(Verdict::below(
                format!("antisymmetry[{label}]"),
                worst,
                ANTISYMMETRY_TOLERANCE,
            ));
            antisymmetry = Some(worst);
        }
        if t == 0.0 {
            verdicts.push(Verdict::below(
                format!("zero_time[{label}]"),
                sample.delta().max_abs(),
                ZERO_TIME_FLOOR,
            ));
        }
        let scan = spacelike_suppression_scan(&sample, p.margin)?;
        verdicts.push(Verdict {
            name: format!("spacelike_suppression[{label}]"),
            value: Some(scan.ratio.unwrap_or(scan.spacelike_max)),
            bound: match scan.ratio {
                Some(_) => "spacelike/timelike < 1e-4".into(),
                None => "spacelike max < 1e-10".into(),
            },
            pass: scan.pass,
        });
        let mult = multiplier_error(&sample);
        verdicts.push(Verdict::below(
            format!("multiplier[{label}]"),
            mult,
            p.multiplier_tolerance,
        ));

        let mut bridge = None;
        if p.bridge {
            let data = cfg.state.cauchy_data(grid, mass)?;
            if let Some(sol) = quadrature_or_verdict(
                &mut verdicts,
                format!("bridge_quadrature[{label}]"),
                cauchy_via_propagator(&data, t, q),
            )? {
                let exact = evolve_spectral(&data, t)?;
                let gap = sol.phi.relative_l2_distance(exact.phi())?;
                verdicts.push(Verdict::below(
                    format!("bridge[{label}]"),
                    gap,
                    p.bridge_tolerance,
                ));
                bridge = Some(json!({ "relative_l2": gap, "fd_check": sol.fd_check }));
            }
        }
        sink.propagator(&format!("propagator_{i:03}"), &sample)?;
        cases.push(json!({
            "t": t,
            "m": mass.value(),
            "quadrature": meta,
            "identity_error": sample.identity_error(),
            "antisymmetry": antisymmetry,
            "multiplier_error": mult,
            "scan": scan,
            "bridge": bridge,
        }));
    }
    let details = json!({ "grid": grid_json(&grid), "margin": p.margin, "cases": cases });
    sink.report(
        RunReport::new(Command::Propagator, verdicts, Vec::new(), details),
        "propagator_report",
    )
}

pub fn run(
    command: Command,
    cfg: &ExperimentConfig,
    out: &Path,
    format: Format,
) -> Result<RunReport> {
    match command {
        Command::Evolve => cmd_evolve(cfg, out, format),
        Command::Hegerfeldt => cmd_hegerfeldt(cfg, out, format),
        Command::Propagator => cmd_propagator(cfg, out, format),
    }
}

/// Plain-text table of a report's verdicts.
pub fn render_report(r: &RunReport) -> String {
    let width = r
        .verdicts
        .iter()
        .map(|v| v.name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut s = String::new();
    let status = |p: bool| if p { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "{:?} run: {}", r.command, status(r.pass));
    let _ = writeln!(
        s,
        "{:<width$}  {:>14}  {:<28}  verdict",
        "name", "value", "bound"
    );
    for v in &r.verdicts {
        let value = v
            .value
            .map(|x| format!("{x:.6e}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<width$}  {:>14}  {:<28}  {}",
            v.name,
            value,
            v.bound,
            status(v.pass)
        );
    }
    if !r.files.is_empty() {
        let _ = writeln!(s, "files: {}", r.files.join(", "));
    }
    s
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let report: RunReport = serde_json::from_str(&text)?;
    if report.schema != RUN_REPORT_SCHEMA {
        return Err(Error::Format(format!(
            "unexpected schema {}",
            report.schema
        )));
    }
    Ok(report)
}
