//! Recursive construction of the memory terms of the Taylor-expanded
//! Mori-Zwanzig memory integral.
//!
//! The ladder `w^s = (PL)^s u₀` is built from the resolved state alone:
//!
//! ```text
//! w⁰ = P u
//! w^{s+1} = Σ_{j=0}^{s} C(s, j) b(P w^j, P w^{s-j})
//! ```
//!
//! and the order-`l` memory term `(PL)^l QL u₀` restricted to `F` is a
//! binomially weighted sum of resolved/unresolved cross-convolutions,
//! `2 Σ_j C(l-1, j) b(P w^j, Q w^{l-j})` for a symmetric kernel, or the sum
//! over both slot assignments for a non-symmetric one.

use crate::error::{Error, Result};
use crate::kernels::{BilinearKernel, SymmetricTerm};
use crate::spectral::{Filter, Projection, SpectralField};

/// `w⁰ … w^λ`, each over all of `F ∪ G`.
#[derive(Debug, Clone)]
pub struct Ladder {
    terms: Vec<SpectralField>,
}

impl Ladder {
    /// Highest power `λ` stored.
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn term(&self, s: usize) -> &SpectralField {
        &self.terms[s]
    }

    pub fn terms(&self) -> &[SpectralField] {
        &self.terms
    }

    /// The Markovian term `P L u₀ = P w¹`. Requires `λ >= 1`.
    pub fn markovian(&self) -> SpectralField {
        self.terms[1].project(Projection::P)
    }
}

/// How the binomial cross-convolutions of a memory term are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PascalScheme {
    /// One triangle with a factor 2; valid for symmetric kernels only.
    Symmetric,
    /// Two triangles, one per slot assignment of the unresolved factor.
    TwoTriangle,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Signed Taylor weight `(-1)^{l+1} t^l / l!` of the order-`l` memory term.
pub fn memory_weight(l: usize, t: f64) -> f64 {
    let mut w = 1.0;
    for i in 1..=l {
        w *= t / i as f64;
    }
    if l % 2 == 0 {
        -w
    } else {
        w
    }
}

/// Builds `w⁰ … w^order` from the resolved part of `uhat`.
pub fn build_ladder(uhat: &SpectralField, order: usize, kernel: &BilinearKernel) -> Result<Ladder> {
    let mut terms = Vec::with_capacity(order + 1);
    terms.push(uhat.project(Projection::P));
    for s in 0..order {
        // C(s, j) = C(s, s - j): pair each j with its mirror
        let pairs: Vec<SymmetricTerm<'_>> = (0..=s / 2)
            .map(|j| {
                let weight = if 2 * j == s { binomial(s, j) } else { 2.0 * binomial(s, j) };
                SymmetricTerm::new(weight, &terms[j], Filter::Resolved, &terms[s - j], Filter::Resolved)
            })
            .collect();
        let next = kernel.apply_symmetrized(&pairs, Filter::All)?;
        terms.push(next);
    }
    Ok(Ladder { terms })
}

/// Order-`l` memory term `(PL)^l QL u₀` on `F`.
///
/// Both slot assignments of each cross-convolution are summed before the
/// transform back, which covers the symmetric and non-symmetric kernels
/// alike.
pub fn memory_term(ladder: &Ladder, l: usize, kernel: &BilinearKernel) -> Result<SpectralField> {
    if l == 0 || l > ladder.order() {
        return Err(Error::OrderOutOfRange {
            order: l,
            max: ladder.order(),
        });
    }
    let w = ladder.terms();
    let pairs: Vec<SymmetricTerm<'_>> = (0..l)
        .map(|j| SymmetricTerm::new(2.0 * binomial(l - 1, j), &w[j], Filter::Resolved, &w[l - j], Filter::Unresolved))
        .collect();
    kernel.apply_symmetrized(&pairs, Filter::Resolved)
}

/// Order-`l` memory term evaluated one bilinear application at a time,
/// grouped as `scheme` says.
pub fn memory_term_with(
    ladder: &Ladder,
    l: usize,
    kernel: &BilinearKernel,
    scheme: PascalScheme,
) -> Result<SpectralField> {
    if l == 0 || l > ladder.order() {
        return Err(Error::OrderOutOfRange {
            order: l,
            max: ladder.order(),
        });
    }
    let w = ladder.terms();
    let mut out = SpectralField::zeros(kernel.truncation(), kernel.components());
    for j in 0..l {
        let weight = binomial(l - 1, j);
        let (r, u) = (&w[j], &w[l - j]);
        match scheme {
            PascalScheme::Symmetric => {
                let b = kernel.apply_onto(r, u, Filter::Resolved, Filter::Unresolved, Filter::Resolved)?;
                out.add_scaled(2.0 * weight, &b)?;
            }
            PascalScheme::TwoTriangle => {
                let left = kernel.apply_onto(r, u, Filter::Resolved, Filter::Unresolved, Filter::Resolved)?;
                let right = kernel.apply_onto(u, r, Filter::Unresolved, Filter::Resolved, Filter::Resolved)?;
                out.add_scaled(weight, &left)?;
                out.add_scaled(weight, &right)?;
            }
        }
    }
    Ok(out)
}

/// Memory terms of orders `1..=ladder.order()`.
pub fn memory_terms(ladder: &Ladder, kernel: &BilinearKernel) -> Result<Vec<SpectralField>> {
    (1..=ladder.order()).map(|l| memory_term(ladder, l, kernel)).collect()
}

/// Right-hand side of the reduced model with coefficients
/// `a = (a₁, …, a_{λ+1})`:
///
/// `a₁ P L u + Σ_l a_{l+1} (-1)^{l+1} t^l / l! (PL)^l QL u`.
///
/// The result is supported on `F`.
pub fn reduced_rhs(
    t: f64,
    uhat: &SpectralField,
    coefficients: &[f64],
    order: usize,
    kernel: &BilinearKernel,
) -> Result<SpectralField> {
    if coefficients.len() != order + 1 {
        return Err(Error::CoefficientCount {
            expected: order + 1,
            actual: coefficients.len(),
        });
    }
    let active = (1..=order).rev().find(|&l| coefficients[l] != 0.0).unwrap_or(0);
    let ladder = build_ladder(uhat, active.max(1), kernel)?;
    let mut rhs = ladder.markovian();
    rhs.scale(coefficients[0]);
    for l in 1..=active {
        if coefficients[l] == 0.0 {
            continue;
        }
        let m = memory_term(&ladder, l, kernel)?;
        rhs.add_scaled(coefficients[l] * memory_weight(l, t), &m)?;
    }
    Ok(rhs)
}
