//! Bilinear convolution kernels of the Galerkin right-hand sides and the
//! initial conditions used by the experiments.
//!
//! Burgers: `b_k(x, y) = -(ik/2) Σ_{p+q=k} x_p y_q`.
//! Euler:   `b_k(x, y) = -i Σ_{p+q=k} (k·x_p) A_k y_q`, `A_k = I - kkᵀ/|k|²`.
//!
//! Both kernels zero the `k = 0` and Nyquist outputs.

use crate::error::{Error, Result};
use crate::spectral::{convolve_pairs, symmetric_products, Filter, PairTerm, SpectralField, Truncation};
use num_complex::Complex64;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    Burgers,
    Euler3d,
}

impl Equation {
    pub fn dim(self) -> usize {
        match self {
            Equation::Burgers => 1,
            Equation::Euler3d => 3,
        }
    }

    pub fn components(self) -> usize {
        self.dim()
    }

    pub fn name(self) -> &'static str {
        match self {
            Equation::Burgers => "burgers",
            Equation::Euler3d => "euler3d",
        }
    }
}

/// One weighted pair `coeff · b(x, y)` of a symmetrized sum.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricTerm<'a> {
    pub coeff: f64,
    pub x: &'a SpectralField,
    pub fx: Filter,
    pub y: &'a SpectralField,
    pub fy: Filter,
}

impl<'a> SymmetricTerm<'a> {
    pub fn new(coeff: f64, x: &'a SpectralField, fx: Filter, y: &'a SpectralField, fy: Filter) -> Self {
        SymmetricTerm { coeff, x, fx, y, fy }
    }
}

/// The quadratic nonlinearity of one equation, evaluated as a bilinear form
/// with filtered inputs.
#[derive(Debug)]
pub struct BilinearKernel {
    equation: Equation,
    trunc: Arc<Truncation>,
    calls: AtomicUsize,
}

impl BilinearKernel {
    pub fn new(equation: Equation, trunc: &Arc<Truncation>) -> Result<Self> {
        if trunc.dim() != equation.dim() {
            return Err(Error::InvalidTruncation(format!(
                "{} needs a {}-dimensional truncation",
                equation.name(),
                equation.dim()
            )));
        }
        Ok(BilinearKernel {
            equation,
            trunc: trunc.clone(),
            calls: AtomicUsize::new(0),
        })
    }

    pub fn burgers(trunc: &Arc<Truncation>) -> Result<Self> {
        Self::new(Equation::Burgers, trunc)
    }

    pub fn euler(trunc: &Arc<Truncation>) -> Result<Self> {
        Self::new(Equation::Euler3d, trunc)
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    pub fn truncation(&self) -> &Arc<Truncation> {
        &self.trunc
    }

    pub fn components(&self) -> usize {
        self.equation.components()
    }

    /// Burgers is symmetric in its two slots; Euler is not.
    pub fn is_symmetric(&self) -> bool {
        self.equation == Equation::Burgers
    }

    /// Number of bilinear evaluations performed so far.
    pub fn applications(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_applications(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// `b(x, y)` with `p` restricted to `fx` and `q` to `fy`, over `F ∪ G`.
    pub fn apply(&self, x: &SpectralField, y: &SpectralField, fx: Filter, fy: Filter) -> Result<SpectralField> {
        self.apply_onto(x, y, fx, fy, Filter::All)
    }

    /// As [`apply`](Self::apply), but only the output modes admitted by `out`
    /// are computed; the rest are zero.
    pub fn apply_onto(
        &self,
        x: &SpectralField,
        y: &SpectralField,
        fx: Filter,
        fy: Filter,
        out: Filter,
    ) -> Result<SpectralField> {
        self.check(x)?;
        self.check(y)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        match self.equation {
            Equation::Burgers => Ok(self.burgers_apply(x, y, fx, fy, out)),
            Equation::Euler3d => Ok(self.euler_apply(x, y, fx, fy, out)),
        }
    }

    /// `Σ_t coeff_t · ½ [b(x_t, y_t) + b(y_t, x_t)]` on the modes admitted by
    /// `out`. For sums that are invariant under swapping the slots (every
    /// sum the memory expansion produces) this is `Σ_t coeff_t b(x_t, y_t)`.
    ///
    /// Each term counts as one application.
    pub fn apply_symmetrized(&self, terms: &[SymmetricTerm<'_>], out: Filter) -> Result<SpectralField> {
        for t in terms {
            self.check(t.x)?;
            self.check(t.y)?;
        }
        self.calls.fetch_add(terms.len(), Ordering::Relaxed);
        let n = self.components();
        let pairs: Vec<PairTerm<'_>> = terms
            .iter()
            .map(|t| PairTerm {
                coeff: t.coeff,
                x: (0..n).map(|c| t.x.component(c)).collect(),
                fx: t.fx,
                y: (0..n).map(|c| t.y.component(c)).collect(),
                fy: t.fy,
            })
            .collect();
        let conv = symmetric_products(&self.trunc, &pairs, out);
        Ok(self.assemble(conv))
    }

    /// Galerkin right-hand side `R(u) = b(u, u)` over all of `F ∪ G`.
    pub fn full_rhs(&self, u: &SpectralField) -> Result<SpectralField> {
        self.apply_symmetrized(&[SymmetricTerm::new(1.0, u, Filter::All, u, Filter::All)], Filter::All)
    }

    fn check(&self, x: &SpectralField) -> Result<()> {
        if !Arc::ptr_eq(x.truncation(), &self.trunc) && **x.truncation() != *self.trunc {
            return Err(Error::TruncationMismatch);
        }
        if x.components() != self.components() {
            return Err(Error::ComponentMismatch {
                expected: self.components(),
                actual: x.components(),
            });
        }
        Ok(())
    }

    fn burgers_apply(&self, x: &SpectralField, y: &SpectralField, fx: Filter, fy: Filter, out: Filter) -> SpectralField {
        let conv = convolve_pairs(&self.trunc, &[x.component(0)], fx, &[y.component(0)], fy, out);
        self.assemble(conv)
    }

    fn euler_apply(&self, x: &SpectralField, y: &SpectralField, fx: Filter, fy: Filter, out: Filter) -> SpectralField {
        let xs: Vec<&[Complex64]> = (0..3).map(|c| x.component(c)).collect();
        let ys: Vec<&[Complex64]> = (0..3).map(|c| y.component(c)).collect();
        let conv = convolve_pairs(&self.trunc, &xs, fx, &ys, fy, out);
        self.assemble(conv)
    }

    /// Applies the wavenumber factors to raw convolutions; for Euler
    /// `conv[j * 3 + c] = Σ x^j_p y^c_q`.
    fn assemble(&self, conv: Vec<Vec<Complex64>>) -> SpectralField {
        let t = &self.trunc;
        match self.equation {
            Equation::Burgers => {
                let mut conv = conv;
                let mut data = conv.pop().expect("one product");
                for (i, v) in data.iter_mut().enumerate() {
                    if t.is_nyquist(i) {
                        *v = Complex64::default();
                    } else {
                        let k = t.wavenumber(i)[0] as f64;
                        *v *= Complex64::new(0.0, -0.5 * k);
                    }
                }
                SpectralField::from_data(t, 1, data).expect("length matches")
            }
            Equation::Euler3d => {
                let n = t.len();
                let mut data = vec![Complex64::default(); 3 * n];
                for i in 0..n {
                    let k = t.wavenumber(i);
                    let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                    if kk == 0.0 || t.is_nyquist(i) {
                        continue;
                    }
                    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
                    let mut v = [Complex64::default(); 3];
                    for (c, vc) in v.iter_mut().enumerate() {
                        for j in 0..3 {
                            *vc += conv[j * 3 + c][i] * kf[j];
                        }
                    }
                    let kv = (v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2]) / kk;
                    for c in 0..3 {
                        let projected = v[c] - kv * kf[c];
                        data[c * n + i] = Complex64::new(projected.im, -projected.re);
                    }
                }
                SpectralField::from_data(t, 3, data).expect("length matches")
            }
        }
    }
}

/// `u₀(x) = sin x`: `u_{±1} = ∓i/2`, all other modes zero.
pub fn ic_sine(trunc: &Arc<Truncation>) -> Result<SpectralField> {
    if trunc.dim() != 1 {
        return Err(Error::InvalidTruncation("sine initial condition is one-dimensional".into()));
    }
    let mut u = SpectralField::zeros(trunc, 1);
    u.set(0, &[1], Complex64::new(0.0, -0.5));
    u.set(0, &[-1], Complex64::new(0.0, 0.5));
    Ok(u)
}

/// Taylor-Green vortex `u₁ = sin x₁ cos x₂ cos x₃`, `u₂ = -cos x₁ sin x₂ cos x₃`,
/// `u₃ = 0`, as its eight active Fourier modes.
pub fn ic_taylor_green(trunc: &Arc<Truncation>) -> Result<SpectralField> {
    if trunc.dim() != 3 {
        return Err(Error::InvalidTruncation("Taylor-Green initial condition is three-dimensional".into()));
    }
    let mut u = SpectralField::zeros(trunc, 3);
    for s1 in [-1i64, 1] {
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let k = [s1, s2, s3];
                u.set(0, &k, Complex64::new(0.0, -(s1 as f64) / 8.0));
                u.set(1, &k, Complex64::new(0.0, s2 as f64 / 8.0));
            }
        }
    }
    Ok(u)
}

/// Initial condition appropriate for `equation`.
pub fn initial_condition(equation: Equation, trunc: &Arc<Truncation>) -> Result<SpectralField> {
    match equation {
        Equation::Burgers => ic_sine(trunc),
        Equation::Euler3d => ic_taylor_green(trunc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_truncation, project, Projection};

    #[test]
    fn burgers_sine_square() {
        let t = make_truncation(32, 1).unwrap();
        let k = BilinearKernel::burgers(&t).unwrap();
        let u = ic_sine(&t).unwrap();
        let out = k.apply(&u, &u, Filter::All, Filter::All).unwrap();
        assert!((out.at(0, &[2]).unwrap() - Complex64::new(0.0, 0.25)).norm() < 1e-15);
        assert!((out.at(0, &[-2]).unwrap() - Complex64::new(0.0, -0.25)).norm() < 1e-15);
        assert!(out.at(0, &[0]).unwrap().norm() < 1e-15);
        assert!(k.full_rhs(&u).unwrap().distance(&out) < 1e-16);
    }

    #[test]
    fn burgers_empty_filter_range() {
        let t = make_truncation(32, 1).unwrap();
        let k = BilinearKernel::burgers(&t).unwrap();
        let u = ic_sine(&t).unwrap();
        let out = k.apply(&u, &u, Filter::Resolved, Filter::Unresolved).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        let zero = SpectralField::zeros(&t, 1);
        assert_eq!(k.apply(&zero, &u, Filter::All, Filter::All).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sine_energy() {
        let t = make_truncation(32, 1).unwrap();
        let u = ic_sine(&t).unwrap();
        assert!((u.norm_sq(Filter::Resolved) - 0.5).abs() < 1e-15);
        assert!((u.resolved_energy() - 0.25).abs() < 1e-15);
        assert_eq!(project(&u, Projection::Q).max_abs(), 0.0);
    }

    #[test]
    fn taylor_green_is_divergence_free() {
        let t = make_truncation(8, 3).unwrap();
        let u = ic_taylor_green(&t).unwrap();
        for i in 0..t.len() {
            let k = t.wavenumber(i);
            let div: Complex64 = (0..3).map(|c| u.component(c)[i] * k[c] as f64).sum();
            assert!(div.norm() < 1e-16);
        }
        assert_eq!(project(&u, Projection::Q).max_abs(), 0.0);
        assert!((u.norm_sq(Filter::All) - 0.25).abs() < 1e-15);
        assert_eq!(u.reality_defect(), 0.0);
    }

    #[test]
    fn euler_output_is_transverse() {
        let t = make_truncation(8, 3).unwrap();
        let k = BilinearKernel::euler(&t).unwrap();
        let u = ic_taylor_green(&t).unwrap();
        let out = k.full_rhs(&u).unwrap();
        assert!(out.max_abs() > 1e-3);
        for i in 0..t.len() {
            let kv = t.wavenumber(i);
            let dot: Complex64 = (0..3).map(|c| out.component(c)[i] * kv[c] as f64).sum();
            assert!(dot.norm() <= 1e-12 * (1.0 + out.max_abs()));
        }
    }

    #[test]
    fn kernel_rejects_wrong_shapes() {
        let t1 = make_truncation(16, 1).unwrap();
        let t3 = make_truncation(8, 3).unwrap();
        assert!(BilinearKernel::euler(&t1).is_err());
        let k = BilinearKernel::burgers(&t1).unwrap();
        let v = SpectralField::zeros(&t1, 3);
        assert!(matches!(k.full_rhs(&v), Err(Error::ComponentMismatch { .. })));
        let other = SpectralField::zeros(&make_truncation(32, 1).unwrap(), 1);
        assert_eq!(k.full_rhs(&other), Err(Error::TruncationMismatch));
        assert!(ic_sine(&t3).is_err());
        assert!(ic_taylor_green(&t1).is_err());
    }
}
