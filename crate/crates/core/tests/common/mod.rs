//! Direct-summation reference implementations shared by the integration
//! tests. Nothing here touches the FFT path.

#![allow(dead_code)]

pub mod hand;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmz_core::spectral::{Filter, SpectralField, Truncation};
use rmz_core::Equation;
use std::sync::Arc;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn admitted(t: &Truncation, f: Filter, i: usize) -> bool {
    t.admits(f, i)
}

/// `Σ_{p+q=k} x_p y_q` by brute force, for one pair of component slices.
pub fn direct_convolution(t: &Truncation, x: &[Complex64], fx: Filter, y: &[Complex64], fy: Filter) -> Vec<Complex64> {
    let dim = t.dim();
    let mut out = vec![Complex64::default(); t.len()];
    let px: Vec<usize> = (0..t.len()).filter(|&i| admitted(t, fx, i) && x[i] != Complex64::default()).collect();
    let py: Vec<usize> = (0..t.len()).filter(|&i| admitted(t, fy, i) && y[i] != Complex64::default()).collect();
    for &p in &px {
        let kp = t.wavenumber(p);
        for &q in &py {
            let kq = t.wavenumber(q);
            let k: Vec<i64> = (0..dim).map(|j| kp[j] + kq[j]).collect();
            if let Some(idx) = t.index_of(&k) {
                out[idx] += x[p] * y[q];
            }
        }
    }
    out
}

/// Burgers or Euler bilinear form by direct summation over all `F ∪ G`.
pub fn direct_bilinear(eq: Equation, x: &SpectralField, y: &SpectralField, fx: Filter, fy: Filter) -> SpectralField {
    let t = x.truncation().clone();
    let n = t.len();
    match eq {
        Equation::Burgers => {
            let conv = direct_convolution(&t, x.component(0), fx, y.component(0), fy);
            let data = (0..n)
                .map(|i| {
                    if t.is_nyquist(i) {
                        Complex64::default()
                    } else {
                        conv[i] * c(0.0, -0.5 * t.wavenumber(i)[0] as f64)
                    }
                })
                .collect();
            SpectralField::from_data(&t, 1, data).unwrap()
        }
        Equation::Euler3d => {
            // (k·x_p) y_q summed, then projected
            let mut raw = vec![[Complex64::default(); 3]; n];
            let live = |f: &SpectralField, filt: Filter, i: usize| {
                admitted(&t, filt, i) && (0..3).any(|cc| f.component(cc)[i] != Complex64::default())
            };
            let px: Vec<usize> = (0..n).filter(|&i| live(x, fx, i)).collect();
            let py: Vec<usize> = (0..n).filter(|&i| live(y, fy, i)).collect();
            for &p in &px {
                let kp = t.wavenumber(p);
                for &q in &py {
                    let kq = t.wavenumber(q);
                    let k = [kp[0] + kq[0], kp[1] + kq[1], kp[2] + kq[2]];
                    let Some(idx) = t.index_of(&k) else { continue };
                    let kdotx: Complex64 = (0..3).map(|j| x.component(j)[p] * k[j] as f64).sum();
                    for cc in 0..3 {
                        raw[idx][cc] += kdotx * y.component(cc)[q];
                    }
                }
            }
            let mut data = vec![Complex64::default(); 3 * n];
            for i in 0..n {
                let k = t.wavenumber(i);
                let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                if kk == 0.0 || t.is_nyquist(i) {
                    continue;
                }
                let kv: Complex64 = (0..3).map(|j| raw[i][j] * k[j] as f64).sum::<Complex64>() / kk;
                for cc in 0..3 {
                    let v = raw[i][cc] - kv * k[cc] as f64;
                    data[cc * n + i] = v * c(0.0, -1.0);
                }
            }
            SpectralField::from_data(&t, 3, data).unwrap()
        }
    }
}

/// Random real field supported where `filter` admits, Nyquist-free; for
/// three components it is made divergence-free.
pub fn random_real_field(t: &Arc<Truncation>, components: usize, filter: Filter, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralField::zeros(t, components);
    let n = t.len();
    for i in 0..n {
        if !t.admits(filter, i) || t.is_nyquist(i) {
            continue;
        }
        let Some(j) = t.conjugate(i) else { continue };
        if j < i {
            continue;
        }
        let k = t.wavenumber(i);
        let mut v: Vec<Complex64> = (0..components)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if i == j {
            v.iter_mut().for_each(|z| z.im = 0.0);
        }
        if components == 3 {
            let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if kk > 0.0 {
                let kv: Complex64 = (0..3).map(|cc| v[cc] * k[cc] as f64).sum::<Complex64>() / kk;
                for (cc, z) in v.iter_mut().enumerate() {
                    *z -= kv * k[cc] as f64;
                }
            } else {
                v.iter_mut().for_each(|z| *z = Complex64::default());
            }
        }
        for (cc, z) in v.iter().enumerate() {
            u.component_mut(cc)[i] = *z;
            u.component_mut(cc)[j] = z.conj();
        }
    }
    u
}

/// Largest `|k·u_k| / max|u|` over all modes.
pub fn divergence(u: &SpectralField) -> f64 {
    let t = u.truncation();
    let scale = u.max_abs().max(f64::MIN_POSITIVE);
    (0..t.len())
        .map(|i| {
            let k = t.wavenumber(i);
            (0..3).map(|cc| u.component(cc)[i] * k[cc] as f64).sum::<Complex64>().norm()
        })
        .fold(0.0, f64::max)
        / scale
}

/// `‖a - b‖∞ / ‖b‖∞`.
pub fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.distance(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

pub fn energy_flux(u: &SpectralField, rhs: &SpectralField) -> f64 {
    u.data().iter().zip(rhs.data()).map(|(a, b)| (a.conj() * b).re).sum()
}
