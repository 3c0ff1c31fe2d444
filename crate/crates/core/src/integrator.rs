//! Adaptive Runge-Kutta-Fehlberg 4(5) time stepping.
//!
//! The fifth-order solution is propagated; the difference to the embedded
//! fourth-order solution drives the step size. Steps are shortened to land
//! exactly on requested stop times, and a callback sees every accepted step.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul};

/// Scalars the integrator can advance.
pub trait OdeScalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl OdeScalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl OdeScalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// An initial value problem over `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct OdeProblem<S> {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<S>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to `1e-4 (t1 - t0)`.
    pub initial_step: Option<f64>,
    /// Times in `(t0, t1)` the integrator must land on exactly.
    pub stops: Vec<f64>,
}

impl<S: OdeScalar> OdeProblem<S> {
    pub fn new(t0: f64, t1: f64, y0: Vec<S>) -> Self {
        OdeProblem {
            t0,
            t1,
            y0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: None,
            stops: Vec::new(),
        }
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn stops(mut self, stops: Vec<f64>) -> Self {
        self.stops = stops;
        self
    }

    pub fn initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h);
        self
    }
}

/// What the step callback sees.
#[derive(Debug)]
pub struct Step<'a, S> {
    pub t: f64,
    pub y: &'a [S],
    /// True when `t` is one of the requested stop times (or `t1`).
    pub at_stop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Final state of an integration.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub t: f64,
    pub y: Vec<S>,
    /// Step size proposed for the next step.
    pub next_step: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// True when the callback requested termination before `t1`.
    pub stopped: bool,
}

/// Integrates `y' = rhs(t, y)`, calling `on_step` after every accepted step.
pub fn integrate<S, R, F>(problem: &OdeProblem<S>, mut rhs: R, mut on_step: F) -> Result<Solution<S>>
where
    S: OdeScalar,
    R: FnMut(f64, &[S]) -> Result<Vec<S>>,
    F: FnMut(Step<'_, S>) -> Control,
{
    let span = problem.t1 - problem.t0;
    if !(span > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "t1 = {} must exceed t0 = {}",
            problem.t1, problem.t0
        )));
    }
    if !(problem.rel_tol > 0.0 && problem.abs_tol > 0.0) {
        return Err(Error::InvalidProblem("tolerances must be positive".into()));
    }
    let mut stops: Vec<f64> = problem
        .stops
        .iter()
        .copied()
        .filter(|&s| s > problem.t0 && s < problem.t1)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(problem.t1);
    let min_step = 1e-14 * span;

    let n = problem.y0.len();
    let mut t = problem.t0;
    let mut y = problem.y0.clone();
    let mut h = problem.initial_step.unwrap_or(1e-4 * span).min(span);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut next_stop = 0;

    let mut k: Vec<Vec<S>> = Vec::with_capacity(6);
    let mut k0 = rhs(t, &y)?;
    check_finite(t, &k0)?;
    let mut stage = vec![S::default(); n];

    loop {
        let target = stops[next_stop];
        let clipped = h >= target - t;
        let step = if clipped { target - t } else { h };

        k.clear();
        k.push(std::mem::take(&mut k0));
        for s in 1..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc + kj[i] * (step * a);
                    }
                }
                stage[i] = acc;
            }
            let ks = rhs(t + C[s] * step, &stage)?;
            k.push(ks);
        }

        let mut y_new = vec![S::default(); n];
        let mut err_norm = 0.0f64;
        for i in 0..n {
            let mut hi = y[i];
            let mut diff = S::default();
            for s in 0..6 {
                hi = hi + k[s][i] * (step * B5[s]);
                diff = diff + k[s][i] * (step * (B5[s] - B4[s]));
            }
            let scale = problem.abs_tol + problem.rel_tol * y[i].magnitude().max(hi.magnitude());
            err_norm = err_norm.max(diff.magnitude() / scale);
            y_new[i] = hi;
        }
        if err_norm <= 1.0 {
            let t_new = if clipped { target } else { t + step };
            let k_next = rhs(t_new, &y_new)?;
            check_finite(t_new, &y_new)?;
            check_finite(t_new, &k_next)?;
            t = t_new;
            y = y_new;
            k0 = k_next;
            accepted += 1;
            let factor = step_factor(err_norm);
            if !clipped || step * factor > h {
                h = step * factor;
            }
            if clipped {
                next_stop += 1;
            }
            let done = clipped && next_stop == stops.len();
            let control = on_step(Step {
                t,
                y: &y,
                at_stop: clipped,
            });
            if done || control == Control::Stop {
                return Ok(Solution {
                    t,
                    y,
                    next_step: h,
                    accepted,
                    rejected,
                    stopped: !done,
                });
            }
        } else {
            rejected += 1;
            k0 = k.swap_remove(0);
            h = step * step_factor(err_norm);
        }
        if h < min_step {
            return Err(Error::StepUnderflow { t, h });
        }
    }
}

fn step_factor(err_norm: f64) -> f64 {
    if err_norm == 0.0 {
        MAX_FACTOR
    } else if !err_norm.is_finite() {
        MIN_FACTOR
    } else {
        (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
    }
}

fn check_finite<S: OdeScalar>(t: f64, y: &[S]) -> Result<()> {
    if y.iter().all(|v| v.magnitude().is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Integrates and records `(t, y)` at every accepted step, starting with `t0`.
pub fn integrate_trajectory<S, R>(problem: &OdeProblem<S>, rhs: R) -> Result<Vec<(f64, Vec<S>)>>
where
    S: OdeScalar,
    R: FnMut(f64, &[S]) -> Result<Vec<S>>,
{
    let mut out = vec![(problem.t0, problem.y0.clone())];
    integrate(problem, rhs, |step| {
        out.push((step.t, step.y.to_vec()));
        Control::Continue
    })?;
    Ok(out)
}
