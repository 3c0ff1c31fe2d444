//! Exact entropy solution of inviscid Burgers with `u₀(x) = sin x` on
//! `[0, 2π)`.
//!
//! Before `t = 1` the solution follows from characteristics,
//! `u = sin ξ` with `x = ξ + t sin ξ`. At `t = 1` a shock forms at `x = π`;
//! it stands still because the data are odd about `π`. For `x ∈ (0, π)` the
//! solution always comes from the unique foot on the rising branch of
//! `g(ξ) = ξ + t sin ξ`, and `u(2π - x) = -u(x)`.
//!
//! Fourier coefficients are computed in the foot coordinate, where the
//! integrand is analytic on `[0, ξ_π]` even across the shock time.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature settings for the Fourier coefficients of the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub points_per_panel: usize,
    /// Panel count grows with the highest wavenumber requested; this is the
    /// floor.
    pub min_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            points_per_panel: 64,
            min_panels: 2,
        }
    }
}

/// Resolved energies of the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedEnergy {
    /// `½ Σ_{k∈F} |u_k|²`.
    pub energy: f64,
    /// `Σ_{k∈F} |u_k|²`.
    pub e1: f64,
}

/// The exact sine-data solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolution {
    pub quadrature: Quadrature,
}

/// Shock formation time.
pub const SHOCK_TIME: f64 = 1.0;
/// Standing shock position.
pub const SHOCK_POSITION: f64 = PI;

impl ExactSolution {
    pub fn new(quadrature: Quadrature) -> Self {
        ExactSolution { quadrature }
    }

    /// Upper end of the rising branch of `g(ξ) = ξ + t sin ξ` on `[0, π]`.
    fn branch_end(t: f64) -> f64 {
        if t <= 1.0 {
            PI
        } else {
            (-1.0 / t).acos()
        }
    }

    /// Foot `ξ ∈ [0, branch_end]` with `ξ + t sin ξ = x`, for `x ∈ [0, π]`.
    pub fn foot(x: f64, t: f64) -> Result<f64> {
        let g = |xi: f64| xi + t * xi.sin() - x;
        let mut lo = 0.0;
        let mut hi = Self::branch_end(t);
        if g(hi) < 0.0 {
            return Err(Error::CharacteristicSolve { x, t });
        }
        let mut xi = (x / (1.0 + t)).clamp(lo, hi);
        for _ in 0..200 {
            let f = g(xi);
            if f == 0.0 {
                return Ok(xi);
            }
            if f < 0.0 {
                lo = xi;
            } else {
                hi = xi;
            }
            let d = 1.0 + t * xi.cos();
            let mut next = xi - f / d;
            if !(d > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - xi).abs() <= 1e-16 * (1.0 + xi.abs()) || hi - lo <= 1e-16 {
                return Ok(next);
            }
            xi = next;
        }
        Err(Error::CharacteristicSolve { x, t })
    }

    /// Entropy solution `u(x, t)`; `u(π, t) = 0` by convention.
    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        exact_u(x, t)
    }

    /// `b_k(t) = (1/π) ∫_0^π u(x, t) sin(kx) dx`, so `u_k = -i b_k` and
    /// `u_{-k} = i b_k`.
    pub fn sine_coefficients(&self, t: f64, kmax: usize) -> Result<Vec<f64>> {
        let end = if t <= 1.0 {
            PI
        } else {
            Self::foot(PI, t)?
        };
        let q = self.quadrature;
        let panels = q.min_panels.max(kmax.div_ceil(8) + 1);
        let (nodes, weights) = gauss_legendre(q.points_per_panel);
        let width = end / panels as f64;
        let mut b = vec![0.0; kmax];
        for p in 0..panels {
            let a = p as f64 * width;
            for (z, w) in nodes.iter().zip(&weights) {
                let xi = a + 0.5 * width * (z + 1.0);
                let x = xi + t * xi.sin();
                let jac = 1.0 + t * xi.cos();
                let base = 0.5 * width * w * xi.sin() * jac / PI;
                // sin(kx) by recurrence
                let (s1, c1) = x.sin_cos();
                let (mut s, mut c) = (s1, c1);
                for bk in b.iter_mut() {
                    *bk += base * s;
                    let sn = s * c1 + c * s1;
                    c = c * c1 - s * s1;
                    s = sn;
                }
            }
        }
        Ok(b)
    }

    /// Energy in the modes `|k| <= N/2 - 1`.
    pub fn resolved_energy(&self, t: f64, resolved_modes: usize) -> Result<ResolvedEnergy> {
        let kmax = (resolved_modes / 2).saturating_sub(1);
        let b = self.sine_coefficients(t, kmax)?;
        let e1 = 2.0 * b.iter().map(|v| v * v).sum::<f64>();
        Ok(ResolvedEnergy { energy: 0.5 * e1, e1 })
    }
}

/// A source of resolved-energy reference values for the sine-data problem.
pub trait EnergyReference {
    fn resolved_energy(&self, t: f64, resolved_modes: usize) -> Result<ResolvedEnergy>;
}

impl EnergyReference for ExactSolution {
    fn resolved_energy(&self, t: f64, resolved_modes: usize) -> Result<ResolvedEnergy> {
        ExactSolution::resolved_energy(self, t, resolved_modes)
    }
}

/// Entropy solution of `u_t + u u_x = 0`, `u(x, 0) = sin x`.
pub fn exact_u(x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::CharacteristicSolve { x, t });
    }
    let x = x.rem_euclid(2.0 * PI);
    if x == 0.0 || x == PI {
        return Ok(0.0);
    }
    if x < PI {
        Ok(ExactSolution::foot(x, t)?.sin())
    } else {
        Ok(-ExactSolution::foot(2.0 * PI - x, t)?.sin())
    }
}

/// `½ Σ_{|k| <= N/2-1} |u_k(t)|²` of the exact solution with default
/// quadrature.
pub fn exact_resolved_energy(t: f64, resolved_modes: usize) -> Result<ResolvedEnergy> {
    ExactSolution::default().resolved_energy(t, resolved_modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn initial_profile() {
        for i in 0..50 {
            let x = 0.1 + i as f64 * 0.12;
            assert!((exact_u(x, 0.0).unwrap() - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_about_pi() {
        for &t in &[0.3, 1.0, 2.5, 40.0] {
            for i in 1..20 {
                let x = i as f64 * 0.15;
                let a = exact_u(PI - x, t).unwrap();
                let b = exact_u(PI + x, t).unwrap();
                assert!((a + b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn initial_energy() {
        for n in [4, 16, 64] {
            let e = exact_resolved_energy(0.0, n).unwrap();
            assert!((e.energy - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn late_time_sawtooth() {
        let t = 100.0;
        for i in 1..10 {
            let x = i as f64 * 0.3;
            assert!((exact_u(x, t).unwrap() - x / (1.0 + t)).abs() < 1e-3);
            let xr = 2.0 * PI - x;
            assert!((exact_u(xr, t).unwrap() - (xr - 2.0 * PI) / (1.0 + t)).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_negative_time() {
        assert!(exact_u(1.0, -0.5).is_err());
    }
}
