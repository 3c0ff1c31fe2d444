//! The four experiment suites: Burgers energy decay, Euler energy decay,
//! the first-order coefficient sweep and the stability comparison.

use crate::output::{self, ManifestEntry, OutputError};
use rmz_core::driver::{InitialCondition, Variant};
use rmz_core::oracle::{EnergyReference, ExactSolution};
use rmz_core::{Equation, RunConfig, RunResult, SolveVariant};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    Fig1Burgers,
    Fig2Euler,
    Fig3CoefficientSweep,
    Fig4Stability,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 4] = [
        ExperimentName::Fig1Burgers,
        ExperimentName::Fig2Euler,
        ExperimentName::Fig3CoefficientSweep,
        ExperimentName::Fig4Stability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentName::Fig1Burgers => "fig1-burgers",
            ExperimentName::Fig2Euler => "fig2-euler",
            ExperimentName::Fig3CoefficientSweep => "fig3-coefficient-sweep",
            ExperimentName::Fig4Stability => "fig4-stability",
        }
    }
}

impl FromStr for ExperimentName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.name() == s || e.name().split('-').next() == Some(s))
            .ok_or_else(|| {
                let names: Vec<&str> = ExperimentName::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}`, expected one of {}", names.join(", "))
            })
    }
}

/// What produces one series of an experiment.
#[derive(Debug, Clone)]
pub enum RunSource {
    Model(RunConfig),
    /// Resolved energy of the exact sine-data Burgers solution.
    BurgersOracle {
        resolved: usize,
        t_end: f64,
        sample_interval: f64,
    },
}

#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub label: String,
    pub source: RunSource,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub runs: Vec<PlannedRun>,
    pub out: PathBuf,
}

pub const BURGERS_T_END: f64 = 100.0;
pub const EULER_T_END: f64 = 10.0;
pub const SWEEP_T_END: f64 = 2.0;
pub const BURGERS_SWEEP: [usize; 4] = [4, 8, 16, 32];
pub const EULER_SWEEP: [usize; 2] = [4, 8];

pub fn model(equation: Equation, resolved: usize, variant: Variant, order: usize, t_end: f64) -> RunConfig {
    let mut cfg = RunConfig::new(equation);
    cfg.resolved = resolved;
    cfg.variant = variant;
    cfg.order = order;
    cfg.t_end = t_end;
    cfg.initial_condition = match equation {
        Equation::Burgers => InitialCondition::Sine,
        Equation::Euler3d => InitialCondition::TaylorGreen,
    };
    cfg
}

fn planned(label: impl Into<String>, cfg: RunConfig) -> PlannedRun {
    PlannedRun {
        label: label.into(),
        source: RunSource::Model(cfg),
    }
}

pub fn fig1_runs() -> Vec<PlannedRun> {
    let b = |variant, order| model(Equation::Burgers, 16, variant, order, BURGERS_T_END);
    let mut runs = vec![
        PlannedRun {
            label: "oracle".into(),
            source: RunSource::BurgersOracle {
                resolved: 16,
                t_end: BURGERS_T_END,
                sample_interval: 0.1,
            },
        },
        planned("tmodel", b(Variant::TModel, 1)),
    ];
    for order in 1..=3 {
        let mut cfg = b(Variant::Rmz, order);
        cfg.solve = SolveVariant::FullSolve;
        runs.push(planned(format!("rmz{order}-full"), cfg));
    }
    runs.push(planned("rmz3-pinned", b(Variant::Rmz, 3)));
    runs
}

pub fn fig2_runs() -> Vec<PlannedRun> {
    let e = |n, variant, order| model(Equation::Euler3d, n, variant, order, EULER_T_END);
    vec![
        planned("tmodel-8", e(8, Variant::TModel, 1)),
        planned("tmodel-16", e(16, Variant::TModel, 1)),
        planned("rmz3-8", e(8, Variant::Rmz, 3)),
        planned("rmz3-16", e(16, Variant::Rmz, 3)),
    ]
}

pub fn fig3_runs() -> Vec<PlannedRun> {
    let mut runs = Vec::new();
    for n in BURGERS_SWEEP {
        runs.push(planned(format!("burgers-{n}"), model(Equation::Burgers, n, Variant::Rmz, 1, SWEEP_T_END)));
    }
    for n in EULER_SWEEP {
        runs.push(planned(format!("euler-{n}"), model(Equation::Euler3d, n, Variant::Rmz, 1, SWEEP_T_END)));
    }
    runs
}

pub fn fig4_runs() -> Vec<PlannedRun> {
    vec![
        planned("burgers-rmz3", model(Equation::Burgers, 16, Variant::Rmz, 3, BURGERS_T_END)),
        planned(
            "burgers-unrenormalized3",
            model(Equation::Burgers, 16, Variant::Unrenormalized, 3, BURGERS_T_END),
        ),
        planned("euler-rmz3", model(Equation::Euler3d, 8, Variant::Rmz, 3, EULER_T_END)),
        planned(
            "euler-unrenormalized3",
            model(Equation::Euler3d, 8, Variant::Unrenormalized, 3, EULER_T_END),
        ),
    ]
}

impl ExperimentSpec {
    pub fn new(name: ExperimentName, out: impl Into<PathBuf>) -> Self {
        let runs = match name {
            ExperimentName::Fig1Burgers => fig1_runs(),
            ExperimentName::Fig2Euler => fig2_runs(),
            ExperimentName::Fig3CoefficientSweep => fig3_runs(),
            ExperimentName::Fig4Stability => fig4_runs(),
        };
        ExperimentSpec {
            name,
            runs,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> rmz_core::Result<()> {
        for run in &self.runs {
            if let RunSource::Model(cfg) = &run.source {
                cfg.validate()?;
            }
        }
        Ok(())
    }
}

/// Largest wavenumber component excited by the initial condition.
pub fn initial_scale(ic: InitialCondition) -> f64 {
    match ic {
        InitialCondition::Sine | InitialCondition::TaylorGreen => 1.0,
    }
}

/// Smallest active initial scale over the smallest resolved scale, as the
/// wavenumber ratio `k_ic / K`, with `K = N/2 - 1` the largest resolved
/// wavenumber component.
pub fn scale_ratio(ic: InitialCondition, resolved: usize) -> f64 {
    initial_scale(ic) / (resolved / 2 - 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub equation: Equation,
    pub resolved: usize,
    pub ratio: f64,
    /// First memory coefficient, absent when the run never switched.
    pub coefficient: Option<f64>,
}

pub fn sweep_point(result: &RunResult) -> SweepPoint {
    let cfg = &result.config;
    SweepPoint {
        equation: cfg.equation,
        resolved: cfg.resolved,
        ratio: scale_ratio(cfg.initial_condition, cfg.resolved),
        coefficient: result.coefficients.as_ref().and_then(|c| c.values.get(1).copied()),
    }
}

/// Least-squares slope of `y = s x`. `None` for fewer than one usable point.
pub fn slope_through_origin(points: &[(f64, f64)]) -> Option<f64> {
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn sweep_csv(points: &[SweepPoint], slope: Option<f64>) -> String {
    let mut s = String::from("equation,N,ratio,coefficient\n");
    for p in points {
        let c = p.coefficient.map(output::number).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "{},{},{},{}", p.equation.name(), p.resolved, output::number(p.ratio), c);
    }
    match slope {
        Some(v) => {
            let _ = writeln!(s, "# burgers slope through origin = {}", output::number(v));
        }
        None => s.push_str("# burgers slope through origin = none\n"),
    }
    s
}

/// Reference series in the common CSV layout.
pub fn oracle_csv(
    reference: &dyn EnergyReference,
    resolved: usize,
    t_end: f64,
    sample_interval: f64,
) -> rmz_core::Result<String> {
    let mut s = output::header(1);
    s.push('\n');
    let count = (t_end / sample_interval + 1e-9).floor() as usize;
    for i in 0..=count {
        let t = (i as f64 * sample_interval).min(t_end);
        let e = reference.resolved_energy(t, resolved)?;
        let _ = writeln!(s, "{},{}", output::number(t), output::number(e.energy));
    }
    Ok(s)
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub manifest: Vec<ManifestEntry>,
    pub results: Vec<(String, Option<RunResult>)>,
    pub sweep: Vec<SweepPoint>,
    pub slope: Option<f64>,
    pub manifest_path: PathBuf,
}

impl ExperimentReport {
    pub fn result(&self, label: &str) -> Option<&RunResult> {
        self.results.iter().find(|(l, _)| l == label).and_then(|(_, r)| r.as_ref())
    }
}

/// Runs every planned series, writing one CSV each plus a manifest. Run
/// failures are recorded and do not stop the experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, OutputError> {
    run_experiment_with(spec, |_| {})
}

/// As [`run_experiment`], reporting each finished manifest entry.
pub fn run_experiment_with(
    spec: &ExperimentSpec,
    mut progress: impl FnMut(&ManifestEntry),
) -> Result<ExperimentReport, OutputError> {
    fs::create_dir_all(&spec.out).map_err(|source| OutputError {
        path: spec.out.clone(),
        source,
    })?;
    let mut manifest = Vec::new();
    let mut results = Vec::new();
    for run in &spec.runs {
        let file = format!("{}.csv", run.label);
        let path = spec.out.join(&file);
        let entry = match &run.source {
            RunSource::BurgersOracle {
                resolved,
                t_end,
                sample_interval,
            } => match oracle_csv(&ExactSolution::default(), *resolved, *t_end, *sample_interval) {
                Ok(text) => {
                    output::write_text(&path, &text)?;
                    entry(&run.label, &file, "completed".into(), None, "exact solution".into())
                }
                Err(e) => entry(&run.label, "", "error".into(), None, e.to_string()),
            },
            RunSource::Model(cfg) => match rmz_core::run(cfg) {
                Ok(result) => {
                    output::emit_csv(&result, &path)?;
                    let mut e = entry(
                        &run.label,
                        &file,
                        result.status.label(),
                        result.switch_time,
                        result.notes.join("; "),
                    );
                    e.coefficients = result.coefficients.as_ref().map(|c| c.values.clone()).unwrap_or_default();
                    results.push((run.label.clone(), Some(result)));
                    e
                }
                Err(err) => {
                    results.push((run.label.clone(), None));
                    entry(&run.label, "", "error".into(), None, err.to_string())
                }
            },
        };
        progress(&entry);
        manifest.push(entry);
    }

    let mut sweep = Vec::new();
    let mut slope = None;
    if spec.name == ExperimentName::Fig3CoefficientSweep {
        sweep = results.iter().filter_map(|(_, r)| r.as_ref()).map(sweep_point).collect();
        slope = burgers_slope(&sweep);
        output::write_text(&spec.out.join("coefficients.csv"), &sweep_csv(&sweep, slope))?;
    }
    let manifest_path = output::write_manifest(&manifest, &spec.out)?;
    Ok(ExperimentReport {
        manifest,
        results,
        sweep,
        slope,
        manifest_path,
    })
}

/// Slope of the Burgers coefficients against the scale ratio.
pub fn burgers_slope(points: &[SweepPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.equation == Equation::Burgers)
        .filter_map(|p| p.coefficient.map(|c| (p.ratio, c)))
        .collect();
    slope_through_origin(&xy)
}

fn entry(name: &str, file: &str, status: String, switch_time: Option<f64>, note: String) -> ManifestEntry {
    ManifestEntry {
        name: name.to_string(),
        file: file.to_string(),
        status,
        switch_time,
        coefficients: Vec::new(),
        note,
    }
}

pub fn default_out(name: ExperimentName) -> PathBuf {
    Path::new("results").join(name.name())
}
