//! Hand-written expansions of `(PL)^s u` and `(PL)^l QL u` for orders 1
//! to 3, built from direct sums.

use super::direct_bilinear;
use rmz_core::spectral::{Filter, SpectralField};
use rmz_core::Equation;

const R: Filter = Filter::Resolved;
const G: Filter = Filter::Unresolved;

pub struct Hand {
    eq: Equation,
}

impl Hand {
    pub fn new(eq: Equation) -> Self {
        Hand { eq }
    }

    pub fn b(&self, x: &SpectralField, fx: Filter, y: &SpectralField, fy: Filter) -> SpectralField {
        direct_bilinear(self.eq, x, y, fx, fy)
    }

    /// `b(x, y) + b(y, x)`: both slot assignments.
    pub fn both(&self, x: &SpectralField, fx: Filter, y: &SpectralField, fy: Filter) -> SpectralField {
        let mut s = self.b(x, fx, y, fy);
        s.add_scaled(1.0, &self.b(y, fy, x, fx)).unwrap();
        s
    }

    pub fn sum(terms: &[(f64, SpectralField)]) -> SpectralField {
        let mut out = SpectralField::zeros(terms[0].1.truncation(), terms[0].1.components());
        for (w, f) in terms {
            out.add_scaled(*w, f).unwrap();
        }
        out
    }

    /// `PLu`, `PLPLu`, `PLPLPLu` over `F ∪ G`.
    pub fn ladder(&self, u: &SpectralField) -> [SpectralField; 3] {
        let w1 = self.b(u, R, u, R);
        // PLPLu = b(u, Pw1) + b(Pw1, u)
        let w2 = self.both(u, R, &w1, R);
        // PLPLPLu = [b(u, Pw2) + b(Pw2, u)] + 2 b(Pw1, Pw1)
        let mut w3 = self.both(u, R, &w2, R);
        w3.add_scaled(2.0, &self.b(&w1, R, &w1, R)).unwrap();
        [w1, w2, w3]
    }

    pub fn first(&self, u: &SpectralField, w: &[SpectralField; 3]) -> SpectralField {
        self.both(u, R, &w[0], G).masked(R)
    }

    pub fn second(&self, u: &SpectralField, w: &[SpectralField; 3]) -> SpectralField {
        Self::sum(&[(1.0, self.both(u, R, &w[1], G)), (1.0, self.both(&w[0], R, &w[0], G))]).masked(R)
    }

    pub fn third(&self, u: &SpectralField, w: &[SpectralField; 3]) -> SpectralField {
        Self::sum(&[
            (1.0, self.both(u, R, &w[2], G)),
            (2.0, self.both(&w[0], R, &w[1], G)),
            (1.0, self.both(&w[1], R, &w[0], G)),
        ])
        .masked(R)
    }
}
