//! Run orchestration: the full Galerkin system, the renormalized model with
//! its full-to-reduced switch, the t-model and the unrenormalized expansion.

use crate::error::{Error, Result};
use crate::integrator::{integrate, Control, OdeProblem, Solution, Step};
use crate::kernels::{initial_condition, BilinearKernel, Equation, SymmetricTerm};
use crate::memory::reduced_rhs;
use crate::renormalizer::{
    assemble_system, solve_coefficients, CoefficientVector, MatchingSystem, QuantitySet, SolveOptions,
    SolveVariant, SwitchMonitor, DEFAULT_SVD_CUTOFF, DEFAULT_SWITCH_TOL,
};
use crate::spectral::{Filter, Projection, SpectralField, Truncation};
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    Rmz,
    TModel,
    Unrenormalized,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Rmz => "rmz",
            Variant::TModel => "tmodel",
            Variant::Unrenormalized => "mz-unrenormalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    Sine,
    TaylorGreen,
}

impl InitialCondition {
    pub fn name(self) -> &'static str {
        match self {
            InitialCondition::Sine => "sine",
            InitialCondition::TaylorGreen => "taylor-green",
        }
    }

    fn equation(self) -> Equation {
        match self {
            InitialCondition::Sine => Equation::Burgers,
            InitialCondition::TaylorGreen => Equation::Euler3d,
        }
    }
}

/// Parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub equation: Equation,
    /// Resolved modes per dimension, `N`; the full system has `M = 2N`.
    pub resolved: usize,
    /// Memory order `λ`.
    pub order: usize,
    pub variant: Variant,
    pub solve: SolveVariant,
    pub switch_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub initial_condition: InitialCondition,
    pub sample_interval: f64,
    pub svd_cutoff: f64,
    /// Row dropped by the pinned solve; `None` drops the highest moment.
    pub drop_row: Option<usize>,
    /// Bypasses estimation: the renormalized model runs from `t = 0` with
    /// these coefficients.
    pub forced_coefficients: Option<Vec<f64>>,
    /// `Ê₁` growth beyond this factor of its initial value counts as blow-up.
    pub blowup_factor: f64,
}

impl RunConfig {
    pub fn new(equation: Equation) -> Self {
        let (resolved, ic) = match equation {
            Equation::Burgers => (16, InitialCondition::Sine),
            Equation::Euler3d => (8, InitialCondition::TaylorGreen),
        };
        RunConfig {
            equation,
            resolved,
            order: 1,
            variant: Variant::Rmz,
            solve: SolveVariant::PinnedMarkovian,
            switch_tol: DEFAULT_SWITCH_TOL,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_end: 10.0,
            initial_condition: ic,
            sample_interval: 0.1,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            drop_row: None,
            forced_coefficients: None,
            blowup_factor: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.resolved < 2 || self.resolved % 2 != 0 {
            return bad(format!("N must be even, got {}", self.resolved));
        }
        if self.variant != Variant::Full && self.order < 1 {
            return bad("order must be at least 1 for reduced models".into());
        }
        if self.initial_condition.equation() != self.equation {
            return bad(format!(
                "initial condition {} does not apply to {}",
                self.initial_condition.name(),
                self.equation.name()
            ));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval must be positive".into());
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("integrator tolerances must be positive".into());
        }
        if !(self.switch_tol > 0.0) {
            return bad("TOL must be positive".into());
        }
        if let Some(a) = &self.forced_coefficients {
            if a.len() != self.order + 1 {
                return bad(format!(
                    "expected {} forced coefficients, got {}",
                    self.order + 1,
                    a.len()
                ));
            }
        }
        Ok(())
    }

    fn sample_times(&self) -> Vec<f64> {
        let count = (self.t_end / self.sample_interval + 1e-9).floor() as usize;
        (1..=count)
            .map(|i| i as f64 * self.sample_interval)
            .filter(|&t| t < self.t_end)
            .collect()
    }
}

/// Resolved moments at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `½ Ê₁`.
    pub energy: f64,
    /// `Ê₁ … Ê_{λ+1}`.
    pub moments: Vec<f64>,
    /// `½ Σ_{F∪G} |u_k|²`; equals `energy` once the state is reduced.
    pub total_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    BlewUp { t: f64 },
    StepUnderflow { t: f64 },
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Completed => "completed".into(),
            RunStatus::BlewUp { t } => format!("blew-up at t={t}"),
            RunStatus::StepUnderflow { t } => format!("step-underflow at t={t}"),
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub samples: Vec<Sample>,
    pub switch_time: Option<f64>,
    pub coefficients: Option<CoefficientVector>,
    /// Matching system at the switch.
    pub system: Option<MatchingSystem>,
    pub status: RunStatus,
    pub notes: Vec<String>,
    pub accepted_steps: usize,
    /// State at the end of the run (or at blow-up).
    pub final_state: Option<SpectralField>,
}

impl RunResult {
    pub fn singular_values(&self) -> &[f64] {
        self.system.as_ref().map(|s| s.singular_values.as_slice()).unwrap_or(&[])
    }

    pub fn condition_number(&self) -> Option<f64> {
        self.system.as_ref().map(|s| s.condition_number())
    }

    /// Sample at time `t`, if one was recorded.
    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Shared state for one run.
struct Setup {
    kernel: BilinearKernel,
    trunc: Arc<Truncation>,
    qset: QuantitySet,
    initial: SpectralField,
    initial_e1: f64,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let trunc = Truncation::new(2 * cfg.resolved, cfg.equation.dim())?;
        let kernel = BilinearKernel::new(cfg.equation, &trunc)?;
        let initial = initial_condition(cfg.equation, &trunc)?;
        let qset = QuantitySet::for_order(cfg.order);
        let initial_e1 = initial.norm_sq(Filter::Resolved);
        Ok(Setup {
            kernel,
            trunc,
            qset,
            initial,
            initial_e1,
        })
    }

    fn field(&self, y: &[Complex64]) -> SpectralField {
        SpectralField::from_data(&self.trunc, self.kernel.components(), y.to_vec()).expect("state length")
    }

    fn sample(&self, t: f64, u: &SpectralField) -> Sample {
        let moments = self.qset.values(u);
        Sample {
            t,
            energy: 0.5 * moments[0],
            moments,
            total_energy: u.total_energy(),
        }
    }

    fn blown_up(&self, cfg: &RunConfig, u: &SpectralField) -> bool {
        let e1 = u.norm_sq(Filter::Resolved);
        !e1.is_finite() || e1 > cfg.blowup_factor * self.initial_e1
    }
}

/// Outcome of one integration phase.
enum Phase {
    Finished(Solution<Complex64>),
    Failed(RunStatus),
}

fn run_phase<R, F>(
    setup: &Setup,
    cfg: &RunConfig,
    problem: &OdeProblem<Complex64>,
    samples: &mut Vec<Sample>,
    blowup: &mut Option<f64>,
    rhs: R,
    mut extra: F,
) -> Result<Phase>
where
    R: FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>>,
    F: FnMut(f64, &SpectralField) -> Result<Control>,
{
    let mut inner_err = None;
    let res = integrate(problem, rhs, |step: Step<'_, Complex64>| {
        let u = setup.field(step.y);
        if step.at_stop {
            samples.push(setup.sample(step.t, &u));
        }
        if setup.blown_up(cfg, &u) {
            *blowup = Some(step.t);
            return Control::Stop;
        }
        match extra(step.t, &u) {
            Ok(c) => c,
            Err(e) => {
                inner_err = Some(e);
                Control::Stop
            }
        }
    });
    if let Some(e) = inner_err {
        return Err(e);
    }
    match res {
        Ok(sol) => match blowup {
            Some(t) => Ok(Phase::Failed(RunStatus::BlewUp { t: *t })),
            None => Ok(Phase::Finished(sol)),
        },
        Err(Error::NonFinite { t }) => Ok(Phase::Failed(RunStatus::BlewUp { t })),
        Err(Error::StepUnderflow { t, .. }) => Ok(Phase::Failed(RunStatus::StepUnderflow { t })),
        Err(e) => Err(e),
    }
}

fn problem(cfg: &RunConfig, t0: f64, y0: Vec<Complex64>) -> OdeProblem<Complex64> {
    let stops = cfg.sample_times().into_iter().filter(|&t| t > t0).collect();
    OdeProblem::new(t0, cfg.t_end, y0)
        .tolerances(cfg.rel_tol, cfg.abs_tol)
        .stops(stops)
}

fn empty_result(cfg: &RunConfig, setup: &Setup, initial: &SpectralField) -> RunResult {
    RunResult {
        config: cfg.clone(),
        samples: vec![setup.sample(0.0, initial)],
        switch_time: None,
        coefficients: None,
        system: None,
        status: RunStatus::Completed,
        notes: Vec::new(),
        accepted_steps: 0,
        final_state: None,
    }
}

/// Dispatches on `cfg.variant`.
pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    match cfg.variant {
        Variant::Full => run_full(cfg),
        Variant::Rmz => run_rmz(cfg),
        Variant::TModel => run_tmodel(cfg),
        Variant::Unrenormalized => run_unrenormalized(cfg),
    }
}

/// Integrates the `M = 2N` Galerkin system from the embedded initial state.
pub fn run_full(cfg: &RunConfig) -> Result<RunResult> {
    let setup = Setup::new(cfg)?;
    let mut result = empty_result(cfg, &setup, &setup.initial);
    let p = problem(cfg, 0.0, setup.initial.data().to_vec());
    let mut blowup = None;
    let phase = run_phase(
        &setup,
        cfg,
        &p,
        &mut result.samples,
        &mut blowup,
        |_, y| Ok(setup.kernel.full_rhs(&setup.field(y))?.into_data()),
        |_, _| Ok(Control::Continue),
    )?;
    finish(&setup, &mut result, phase);
    Ok(result)
}

fn finish(setup: &Setup, result: &mut RunResult, phase: Phase) {
    match phase {
        Phase::Finished(sol) => {
            result.accepted_steps += sol.accepted;
            result.final_state = Some(setup.field(&sol.y));
        }
        Phase::Failed(status) => result.status = status,
    }
}

/// Reduced model with fixed coefficients from `t0`.
fn run_reduced_from(
    setup: &Setup,
    cfg: &RunConfig,
    result: &mut RunResult,
    t0: f64,
    state: &SpectralField,
    coefficients: &[f64],
    initial_step: Option<f64>,
) -> Result<()> {
    let mut p = problem(cfg, t0, state.project(Projection::P).into_data());
    if let Some(h) = initial_step {
        p = p.initial_step(h);
    }
    let mut blowup = None;
    let order = coefficients.len() - 1;
    let phase = run_phase(
        setup,
        cfg,
        &p,
        &mut result.samples,
        &mut blowup,
        |t, y| Ok(reduced_rhs(t, &setup.field(y), coefficients, order, &setup.kernel)?.into_data()),
        |_, _| Ok(Control::Continue),
    )?;
    finish(setup, result, phase);
    Ok(())
}

/// Renormalized model: full system until `σ_min(B)` reaches `TOL`, then the
/// reduced model with coefficients frozen at the switch.
pub fn run_rmz(cfg: &RunConfig) -> Result<RunResult> {
    let setup = Setup::new(cfg)?;
    let mut result = empty_result(cfg, &setup, &setup.initial);

    if let Some(forced) = &cfg.forced_coefficients {
        result.switch_time = Some(0.0);
        result.coefficients = Some(CoefficientVector {
            values: forced.clone(),
            switch_time: 0.0,
            variant: cfg.solve,
            condition: f64::NAN,
        });
        run_reduced_from(&setup, cfg, &mut result, 0.0, &setup.initial, forced, None)?;
        return Ok(result);
    }

    let p = problem(cfg, 0.0, setup.initial.data().to_vec());
    let mut monitor = SwitchMonitor::new(cfg.switch_tol);
    let mut fired: Option<MatchingSystem> = None;
    let mut blowup = None;
    let phase = run_phase(
        &setup,
        cfg,
        &p,
        &mut result.samples,
        &mut blowup,
        |_, y| Ok(setup.kernel.full_rhs(&setup.field(y))?.into_data()),
        |t, u| {
            let sys = assemble_system(t, u, cfg.order, &setup.kernel, &setup.qset)?;
            if monitor.check(&sys) {
                fired = Some(sys);
                return Ok(Control::Stop);
            }
            Ok(Control::Continue)
        },
    )?;
    let sol = match phase {
        Phase::Finished(sol) => sol,
        Phase::Failed(status) => {
            result.status = status;
            return Ok(result);
        }
    };
    result.accepted_steps += sol.accepted;
    let Some(sys) = fired else {
        result
            .notes
            .push(format!("system entirely singular at t_end = {}", cfg.t_end));
        result.final_state = Some(setup.field(&sol.y));
        return Ok(result);
    };
    let opts = SolveOptions {
        svd_cutoff: cfg.svd_cutoff,
        drop_row: cfg.drop_row,
    };
    let coeffs = match solve_coefficients(&sys, cfg.solve, &opts) {
        Ok(c) => c,
        Err(e) => {
            // stay on the full system
            result.notes.push(format!("coefficient solve failed at t = {}: {e}", sys.time));
            result.system = Some(sys);
            let state = setup.field(&sol.y);
            let rest = problem(cfg, sol.t, state.into_data()).initial_step(sol.next_step);
            let mut blowup = None;
            let phase = run_phase(
                &setup,
                cfg,
                &rest,
                &mut result.samples,
                &mut blowup,
                |_, y| Ok(setup.kernel.full_rhs(&setup.field(y))?.into_data()),
                |_, _| Ok(Control::Continue),
            )?;
            finish(&setup, &mut result, phase);
            return Ok(result);
        }
    };
    result.switch_time = Some(sol.t);
    result.system = Some(sys);
    let values = coeffs.values.clone();
    result.coefficients = Some(coeffs);
    if sol.t < cfg.t_end {
        let state = setup.field(&sol.y);
        run_reduced_from(&setup, cfg, &mut result, sol.t, &state, &values, Some(sol.next_step))?;
    } else {
        result.final_state = Some(setup.field(&sol.y).project(Projection::P));
    }
    Ok(result)
}

/// `du/dt = PLu + t PLQLu`, written out directly: the first-order memory
/// term is the cross-convolution of the resolved state with the unresolved
/// part of `b(Pu, Pu)`.
pub fn tmodel_rhs(t: f64, u: &SpectralField, kernel: &BilinearKernel) -> Result<SpectralField> {
    let w1 = kernel.apply_symmetrized(
        &[SymmetricTerm::new(1.0, u, Filter::Resolved, u, Filter::Resolved)],
        Filter::All,
    )?;
    let mut rhs = w1.project(Projection::P);
    let memory = kernel.apply_symmetrized(
        &[SymmetricTerm::new(2.0, u, Filter::Resolved, &w1, Filter::Unresolved)],
        Filter::Resolved,
    )?;
    rhs.add_scaled(t, &memory)?;
    Ok(rhs)
}

/// First-order t-model from `t = 0` (`λ = 1`, `a = (1, 1)`).
pub fn run_tmodel(cfg: &RunConfig) -> Result<RunResult> {
    let mut cfg = cfg.clone();
    cfg.order = 1;
    let setup = Setup::new(&cfg)?;
    let mut result = empty_result(&cfg, &setup, &setup.initial);
    let p = problem(&cfg, 0.0, setup.initial.project(Projection::P).into_data());
    let mut blowup = None;
    let phase = run_phase(
        &setup,
        &cfg,
        &p,
        &mut result.samples,
        &mut blowup,
        |t, y| Ok(tmodel_rhs(t, &setup.field(y), &setup.kernel)?.into_data()),
        |_, _| Ok(Control::Continue),
    )?;
    finish(&setup, &mut result, phase);
    Ok(result)
}

/// Unrenormalized expansion, `a = (1, …, 1)`, from `t = 0`.
pub fn run_unrenormalized(cfg: &RunConfig) -> Result<RunResult> {
    let setup = Setup::new(cfg)?;
    let mut result = empty_result(cfg, &setup, &setup.initial);
    let ones = vec![1.0; cfg.order + 1];
    result.coefficients = Some(CoefficientVector {
        values: ones.clone(),
        switch_time: 0.0,
        variant: cfg.solve,
        condition: f64::NAN,
    });
    run_reduced_from(&setup, cfg, &mut result, 0.0, &setup.initial, &ones, None)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut cfg = RunConfig::new(Equation::Burgers);
        assert!(cfg.validate().is_ok());
        cfg.resolved = 15;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(m)) if m.contains("N must be even")));
        let mut cfg = RunConfig::new(Equation::Burgers);
        cfg.initial_condition = InitialCondition::TaylorGreen;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Equation::Burgers);
        cfg.forced_coefficients = Some(vec![1.0]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sample_times_exclude_end() {
        let mut cfg = RunConfig::new(Equation::Burgers);
        cfg.t_end = 1.0;
        cfg.sample_interval = 0.25;
        assert_eq!(cfg.sample_times(), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn full_run_starts_at_initial_energy() {
        let mut cfg = RunConfig::new(Equation::Burgers);
        cfg.variant = Variant::Full;
        cfg.t_end = 0.2;
        let res = run(&cfg).unwrap();
        assert_eq!(res.samples[0].t, 0.0);
        assert_eq!(res.samples[0].energy, 0.25);
        assert_eq!(res.samples.last().unwrap().t, 0.2);
        assert!(res.status.is_completed());
    }
}
