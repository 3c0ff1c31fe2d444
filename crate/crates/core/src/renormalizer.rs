//! Moment matching for the reduced-model coefficients.
//!
//! The reduced model is required to reproduce, at the switch time, the rates
//! of change of `Ê_i = Σ_{k∈F} |u_k|^{2i}` seen by the full system. Since the
//! reduced right-hand side is linear in its coefficients this is the linear
//! system `B a = e`, with `B_ij` the contribution of term `j` to `dÊ_i/dt`.

use crate::error::{Error, Result};
use crate::kernels::BilinearKernel;
use crate::memory::{build_ladder, memory_term, memory_weight};
use crate::spectral::{Projection, SpectralField};
use nalgebra::{DMatrix, DVector};

/// Default relative cutoff below which singular values are discarded.
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-13;

/// Default switch tolerance on the smallest singular value of `B`.
pub const DEFAULT_SWITCH_TOL: f64 = 1e-12;

/// The moments `Ê_1 … Ê_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantitySet {
    count: usize,
}

impl QuantitySet {
    pub fn new(count: usize) -> Self {
        QuantitySet { count }
    }

    /// Quantities needed by a model of memory order `order`.
    pub fn for_order(order: usize) -> Self {
        Self::new(order + 1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `Ê_i(u)` for `i = 1..=count`.
    pub fn values(&self, u: &SpectralField) -> Vec<f64> {
        let mut out = vec![0.0; self.count];
        for_each_resolved(u, None, |mag2, _| {
            let mut p = 1.0;
            for v in out.iter_mut() {
                p *= mag2;
                *v += p;
            }
        });
        out
    }

    /// `dÊ_i/dt` when `u` moves with velocity `rhs`.
    pub fn rates(&self, u: &SpectralField, rhs: &SpectralField) -> Vec<f64> {
        let mut out = vec![0.0; self.count];
        for_each_resolved(u, Some(rhs), |mag2, flux| {
            let mut p = 1.0;
            for (i, v) in out.iter_mut().enumerate() {
                *v += 2.0 * (i + 1) as f64 * p * flux;
                p *= mag2;
            }
        });
        out
    }
}

/// Calls `f(|u_k|², Re Σ_c conj(u^c_k) rhs^c_k)` for every resolved `k`.
fn for_each_resolved(u: &SpectralField, rhs: Option<&SpectralField>, mut f: impl FnMut(f64, f64)) {
    let trunc = u.truncation();
    for &i in trunc.resolved_indices() {
        let mut mag2 = 0.0;
        let mut flux = 0.0;
        for c in 0..u.components() {
            let v = u.component(c)[i];
            mag2 += v.norm_sqr();
            if let Some(r) = rhs {
                flux += (v.conj() * r.component(c)[i]).re;
            }
        }
        f(mag2, flux);
    }
}

/// `dÊ_i/dt` for `i = 1..=qset.count()` under the velocity `rhs`.
pub fn quantity_rates(u: &SpectralField, rhs: &SpectralField, qset: &QuantitySet) -> Vec<f64> {
    qset.rates(u, rhs)
}

/// `B a = e` assembled at time `time`, with the singular values of `B` in
/// descending order.
#[derive(Debug, Clone)]
pub struct MatchingSystem {
    pub time: f64,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub singular_values: Vec<f64>,
}

impl MatchingSystem {
    pub fn new(time: f64, matrix: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        let singular_values = sorted_singular_values(&matrix);
        MatchingSystem {
            time,
            matrix,
            rhs,
            singular_values,
        }
    }

    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn condition_number(&self) -> f64 {
        condition(&self.singular_values)
    }

    /// The pinned-Markovian reduced matrix and right-hand side: `a₁ = 1`,
    /// column 1 moved to the right-hand side, row `drop_row` removed.
    pub fn pinned(&self, drop_row: Option<usize>) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.size();
        let drop = drop_row.unwrap_or(n - 1).min(n - 1);
        let rows: Vec<usize> = (0..n).filter(|&r| r != drop).collect();
        let mut m = DMatrix::zeros(n - 1, n - 1);
        let mut e = DVector::zeros(n - 1);
        for (ri, &r) in rows.iter().enumerate() {
            for c in 1..n {
                m[(ri, c - 1)] = self.matrix[(r, c)];
            }
            e[ri] = self.rhs[r] - self.matrix[(r, 0)];
        }
        (m, e)
    }

    /// Condition number of the pinned-Markovian reduced matrix.
    pub fn pinned_condition_number(&self, drop_row: Option<usize>) -> f64 {
        condition(&sorted_singular_values(&self.pinned(drop_row).0))
    }
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn condition(sv: &[f64]) -> f64 {
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    }
}

/// Assembles `B` and `e` from a state of the running full system.
///
/// Column 1 holds the Markovian contributions, column `l + 1` those of the
/// weighted order-`l` memory term, and `e` the rates produced by the full
/// right-hand side (resolved-unresolved interactions included).
pub fn assemble_system(
    t: f64,
    full_state: &SpectralField,
    order: usize,
    kernel: &BilinearKernel,
    qset: &QuantitySet,
) -> Result<MatchingSystem> {
    if qset.count() != order + 1 {
        return Err(Error::CoefficientCount {
            expected: order + 1,
            actual: qset.count(),
        });
    }
    let uhat = full_state.project(Projection::P);
    let ladder = build_ladder(&uhat, order.max(1), kernel)?;
    let n = order + 1;
    let mut matrix = DMatrix::zeros(n, n);
    let markov = qset.rates(&uhat, &ladder.markovian());
    for (i, v) in markov.iter().enumerate() {
        matrix[(i, 0)] = *v;
    }
    for l in 1..=order {
        let mut m = memory_term(&ladder, l, kernel)?;
        m.scale(memory_weight(l, t));
        for (i, v) in qset.rates(&uhat, &m).iter().enumerate() {
            matrix[(i, l)] = *v;
        }
    }
    let full = kernel.full_rhs(full_state)?;
    let e = DVector::from_vec(qset.rates(&uhat, &full));
    Ok(MatchingSystem::new(t, matrix, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveVariant {
    /// Solve the full `(λ+1) × (λ+1)` system.
    FullSolve,
    /// Fix `a₁ = 1` and solve the `λ × λ` memory block.
    PinnedMarkovian,
}

impl SolveVariant {
    pub fn name(self) -> &'static str {
        match self {
            SolveVariant::FullSolve => "full-solve",
            SolveVariant::PinnedMarkovian => "pinned-markovian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Singular values below `svd_cutoff * σ₁` are treated as zero.
    pub svd_cutoff: f64,
    /// Row removed by the pinned variant; `None` drops the highest moment.
    pub drop_row: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            drop_row: None,
        }
    }
}

/// Renormalized coefficients `(a₁, …, a_{λ+1})`, frozen at `switch_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub switch_time: f64,
    pub variant: SolveVariant,
    /// Condition number of the matrix actually inverted.
    pub condition: f64,
}

/// Truncated-SVD least-squares solution of `m x = e`.
pub fn pseudo_inverse_solve(m: &DMatrix<f64>, e: &DVector<f64>, cutoff: f64) -> Result<DVector<f64>> {
    let svd = m.clone().svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if !(largest > 0.0) || !largest.is_finite() {
        return Err(Error::EntirelySingular { largest });
    }
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut x = DVector::zeros(m.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff * largest {
            continue;
        }
        let coef = u.column(i).dot(e) / s;
        x += vt.row(i).transpose() * coef;
    }
    Ok(x)
}

/// Solves the matching system for the renormalized coefficients.
pub fn solve_coefficients(
    sys: &MatchingSystem,
    variant: SolveVariant,
    opts: &SolveOptions,
) -> Result<CoefficientVector> {
    let values = match variant {
        SolveVariant::FullSolve => {
            let x = pseudo_inverse_solve(&sys.matrix, &sys.rhs, opts.svd_cutoff)?;
            x.iter().copied().collect()
        }
        SolveVariant::PinnedMarkovian => {
            let (m, e) = sys.pinned(opts.drop_row);
            let mut values = vec![1.0];
            if m.nrows() > 0 {
                let x = pseudo_inverse_solve(&m, &e, opts.svd_cutoff)?;
                values.extend(x.iter().copied());
            }
            values
        }
    };
    let condition = match variant {
        SolveVariant::FullSolve => sys.condition_number(),
        SolveVariant::PinnedMarkovian => sys.pinned_condition_number(opts.drop_row),
    };
    Ok(CoefficientVector {
        values,
        switch_time: sys.time,
        variant,
        condition,
    })
}

/// Watches `σ_min(B)` and fires once, at the first assembly where it
/// reaches the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchMonitor {
    tol: f64,
    fired: bool,
}

impl SwitchMonitor {
    pub fn new(tol: f64) -> Self {
        SwitchMonitor { tol, fired: false }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn has_fired(&self) -> bool {
        self.fired
    }

    pub fn check(&mut self, sys: &MatchingSystem) -> bool {
        self.check_value(sys.smallest_singular_value())
    }

    pub fn check_value(&mut self, sigma_min: f64) -> bool {
        if self.fired || !(sigma_min >= self.tol) {
            return false;
        }
        self.fired = true;
        true
    }
}

/// Stateless form: has the smallest singular value reached `tol`?
pub fn switch_monitor(sys: &MatchingSystem, tol: f64) -> bool {
    sys.smallest_singular_value() >= tol
}
