//! Mode bookkeeping for Fourier-Galerkin truncations, the exact (alias-free)
//! truncated convolution, and the resolved/unresolved projections.
//!
//! Wavenumbers are stored in standard FFT order along every axis: index `i`
//! of an axis of length `M` holds wavenumber `i` for `i < M/2` and `i - M`
//! otherwise. Multi-dimensional fields are stored row-major, first axis
//! slowest. Vector fields store their components one after another.
//!
//! The resolved set `F` is the box `|k_j| <= N/2 - 1`. The index `-N/2` of the
//! reduced grid has no conjugate partner inside the box `[-N/2, N/2 - 1]`, so
//! it is treated as unresolved, exactly like the full-grid Nyquist index
//! `-M/2` is pinned to zero. This keeps `P` real-field preserving and makes
//! the Markovian term conserve resolved energy.

use crate::error::{Error, Result};
use crate::fft::{smooth_len, Grid};
use num_complex::Complex64;
use std::sync::Arc;

/// Index bookkeeping for a full set `F ∪ G = [-M/2, M/2 - 1]^dim` split into
/// resolved modes `F` and unresolved modes `G`, with `N = M/2`.
#[derive(Debug)]
pub struct Truncation {
    full: usize,
    dim: usize,
    len: usize,
    modes: Vec<[i64; 3]>,
    resolved: Vec<bool>,
    nyquist: Vec<bool>,
    conjugate: Vec<Option<usize>>,
    resolved_indices: Vec<usize>,
}

impl PartialEq for Truncation {
    fn eq(&self, other: &Self) -> bool {
        self.full == other.full && self.dim == other.dim
    }
}

impl Eq for Truncation {}

/// Which wavenumber range of an input participates in a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filter {
    /// The resolved set `F`.
    Resolved,
    /// The unresolved set `G`.
    Unresolved,
    /// Every mode of `F ∪ G`.
    All,
}

/// The two complementary projections of the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Keep resolved modes, zero unresolved ones.
    P,
    /// Keep unresolved modes, zero resolved ones.
    Q,
}

impl Projection {
    fn filter(self) -> Filter {
        match self {
            Projection::P => Filter::Resolved,
            Projection::Q => Filter::Unresolved,
        }
    }
}

impl Truncation {
    /// Builds the truncation for `full` modes per dimension (`M`).
    pub fn new(full: usize, dim: usize) -> Result<Arc<Self>> {
        if full < 4 || full % 2 != 0 {
            return Err(Error::InvalidTruncation(format!(
                "M must be even and at least 4, got {full}"
            )));
        }
        if dim != 1 && dim != 3 {
            return Err(Error::InvalidTruncation(format!(
                "dimension must be 1 or 3, got {dim}"
            )));
        }
        let len = full.pow(dim as u32);
        let half = (full / 2) as i64;
        let kmax = half / 2 - 1;
        let mut modes = Vec::with_capacity(len);
        for flat in 0..len {
            let mut k = [0i64; 3];
            let mut rem = flat;
            for j in (0..dim).rev() {
                let i = (rem % full) as i64;
                rem /= full;
                k[j] = if i < half { i } else { i - full as i64 };
            }
            modes.push(k);
        }
        let resolved: Vec<bool> = modes
            .iter()
            .map(|k| k[..dim].iter().all(|&c| c.abs() <= kmax))
            .collect();
        let nyquist: Vec<bool> = modes
            .iter()
            .map(|k| k[..dim].iter().any(|&c| c == -half))
            .collect();
        let mut trunc = Truncation {
            full,
            dim,
            len,
            modes,
            resolved,
            nyquist,
            conjugate: Vec::new(),
            resolved_indices: Vec::new(),
        };
        trunc.conjugate = (0..len)
            .map(|i| {
                let k = trunc.modes[i];
                trunc.index_of(&[-k[0], -k[1], -k[2]][..dim])
            })
            .collect();
        trunc.resolved_indices = (0..len).filter(|&i| trunc.resolved[i]).collect();
        Ok(Arc::new(trunc))
    }

    /// Full mode count per dimension, `M`.
    pub fn full(&self) -> usize {
        self.full
    }

    /// Resolved mode count per dimension, `N = M/2`.
    pub fn resolved_modes(&self) -> usize {
        self.full / 2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of modes in `F ∪ G`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest resolved wavenumber magnitude per axis, `N/2 - 1`.
    pub fn max_resolved_wavenumber(&self) -> i64 {
        (self.full / 4) as i64 - 1
    }

    /// Wavenumber of flat index `idx`; unused axes are zero.
    pub fn wavenumber(&self, idx: usize) -> [i64; 3] {
        self.modes[idx]
    }

    /// Flat index of wavenumber `k`, or `None` outside `F ∪ G`.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.full / 2) as i64;
        let mut flat = 0usize;
        for &c in k {
            if c < -half || c >= half {
                return None;
            }
            flat = flat * self.full + c.rem_euclid(self.full as i64) as usize;
        }
        Some(flat)
    }

    pub fn is_resolved(&self, idx: usize) -> bool {
        self.resolved[idx]
    }

    pub fn is_unresolved(&self, idx: usize) -> bool {
        !self.resolved[idx]
    }

    /// True for indices with a component equal to `-M/2`; always zero.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nyquist[idx]
    }

    /// Index of `-k`, when it lies in `F ∪ G`.
    pub fn conjugate(&self, idx: usize) -> Option<usize> {
        self.conjugate[idx]
    }

    /// Flat indices of the resolved set, in storage order.
    pub fn resolved_indices(&self) -> &[usize] {
        &self.resolved_indices
    }

    pub fn admits(&self, filter: Filter, idx: usize) -> bool {
        match filter {
            Filter::Resolved => self.resolved[idx],
            Filter::Unresolved => !self.resolved[idx],
            Filter::All => true,
        }
    }

    /// Per-axis bound on `|k|` over the modes a filter admits.
    fn bound(&self, filter: Filter) -> i64 {
        match filter {
            Filter::Resolved => self.max_resolved_wavenumber(),
            Filter::Unresolved | Filter::All => (self.full / 2) as i64,
        }
    }

    fn padded_index(&self, k: &[i64; 3], len: usize) -> usize {
        let mut flat = 0usize;
        for &c in &k[..self.dim] {
            flat = flat * len + c.rem_euclid(len as i64) as usize;
        }
        flat
    }
}

/// Builds a truncation with `M` full modes per dimension.
pub fn make_truncation(full: usize, dim: usize) -> Result<Arc<Truncation>> {
    Truncation::new(full, dim)
}

/// Complex Fourier amplitudes over `F ∪ G`, with one or three components.
#[derive(Debug, Clone)]
pub struct SpectralField {
    trunc: Arc<Truncation>,
    components: usize,
    data: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        *self.trunc == *other.trunc && self.components == other.components && self.data == other.data
    }
}

impl SpectralField {
    pub fn zeros(trunc: &Arc<Truncation>, components: usize) -> Self {
        SpectralField {
            trunc: trunc.clone(),
            components,
            data: vec![Complex64::default(); trunc.len() * components],
        }
    }

    pub fn from_data(trunc: &Arc<Truncation>, components: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != trunc.len() * components {
            return Err(Error::InvalidTruncation(format!(
                "expected {} amplitudes, got {}",
                trunc.len() * components,
                data.len()
            )));
        }
        Ok(SpectralField {
            trunc: trunc.clone(),
            components,
            data,
        })
    }

    pub fn truncation(&self) -> &Arc<Truncation> {
        &self.trunc
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.trunc.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.trunc.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Amplitude of component `c` at wavenumber `k`.
    pub fn at(&self, c: usize, k: &[i64]) -> Option<Complex64> {
        self.trunc.index_of(k).map(|i| self.component(c)[i])
    }

    /// Sets component `c` at wavenumber `k`; returns false outside `F ∪ G`.
    pub fn set(&mut self, c: usize, k: &[i64], value: Complex64) -> bool {
        match self.trunc.index_of(k) {
            Some(i) => {
                self.component_mut(c)[i] = value;
                true
            }
            None => false,
        }
    }

    pub fn ensure_compatible(&self, other: &SpectralField) -> Result<()> {
        if !Arc::ptr_eq(&self.trunc, &other.trunc) && *self.trunc != *other.trunc {
            return Err(Error::TruncationMismatch);
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch {
                expected: self.components,
                actual: other.components,
            });
        }
        Ok(())
    }

    /// Copy with every mode outside `filter` set to zero.
    pub fn masked(&self, filter: Filter) -> SpectralField {
        let mut out = self.clone();
        if filter == Filter::All {
            return out;
        }
        let n = self.trunc.len();
        for (i, v) in out.data.iter_mut().enumerate() {
            if !self.trunc.admits(filter, i % n) {
                *v = Complex64::default();
            }
        }
        out
    }

    pub fn project(&self, which: Projection) -> SpectralField {
        self.masked(which.filter())
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &SpectralField) -> Result<()> {
        self.ensure_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }

    /// `Σ |u_k|²` over the modes admitted by `filter`, summed over components.
    pub fn norm_sq(&self, filter: Filter) -> f64 {
        let n = self.trunc.len();
        self.data
            .iter()
            .enumerate()
            .filter(|(i, _)| self.trunc.admits(filter, i % n))
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }

    /// `½ Σ_{k∈F} |u_k|²`.
    pub fn resolved_energy(&self) -> f64 {
        0.5 * self.norm_sq(Filter::Resolved)
    }

    /// `½ Σ_{k∈F∪G} |u_k|²`.
    pub fn total_energy(&self) -> f64 {
        0.5 * self.norm_sq(Filter::All)
    }

    /// Largest `|x_k - conj(x_{-k})|` over all modes with a partner, plus
    /// any Nyquist magnitude.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let x = self.component(c);
            for i in 0..self.trunc.len() {
                let d = match self.trunc.conjugate(i) {
                    Some(j) => (x[i] - x[j].conj()).norm(),
                    None => x[i].norm(),
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference; infinite for incompatible fields.
    pub fn distance(&self, other: &SpectralField) -> f64 {
        if self.ensure_compatible(other).is_err() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Keeps `F` and zeroes `G` (`P`), or the reverse (`Q`).
pub fn project(x: &SpectralField, which: Projection) -> SpectralField {
    x.project(which)
}

/// Symmetrizes `x_k <- (x_k + conj(x_{-k}))/2` and zeroes Nyquist entries.
pub fn enforce_reality(x: &SpectralField) -> SpectralField {
    let trunc = x.truncation().clone();
    let mut out = SpectralField::zeros(&trunc, x.components());
    for c in 0..x.components() {
        let src = x.component(c);
        let dst = out.component_mut(c);
        for i in 0..trunc.len() {
            dst[i] = match trunc.conjugate(i) {
                Some(j) if !trunc.is_nyquist(i) => 0.5 * (src[i] + src[j].conj()),
                _ => Complex64::default(),
            };
        }
    }
    out
}

/// Exact truncated convolution `c_k = Σ_{p+q=k} a_p b_q`, `k ∈ F ∪ G`, with
/// `p` restricted to `fa` and `q` to `fb`. Multi-component fields are
/// convolved component by component.
pub fn convolve(a: &SpectralField, b: &SpectralField, fa: Filter, fb: Filter) -> Result<SpectralField> {
    a.ensure_compatible(b)?;
    let trunc = a.truncation().clone();
    let mut out = SpectralField::zeros(&trunc, a.components());
    for c in 0..a.components() {
        let mut res = convolve_pairs(&trunc, &[a.component(c)], fa, &[b.component(c)], fb, Filter::All);
        out.component_mut(c).copy_from_slice(&res.pop().expect("one product"));
    }
    Ok(out)
}

/// Largest `|k_j|` over the nonzero entries of `comps` admitted by `filter`.
fn support(trunc: &Truncation, comps: &[&[Complex64]], filter: Filter) -> Option<i64> {
    let mut best: Option<i64> = None;
    for data in comps {
        for (i, v) in data.iter().enumerate() {
            if *v != Complex64::default() && trunc.admits(filter, i) {
                let m = trunc.modes[i][..trunc.dim].iter().map(|c| c.abs()).max().unwrap_or(0);
                best = Some(best.map_or(m, |b| b.max(m)));
            }
        }
    }
    best
}

/// Zero-padded physical-space samples of `src` restricted to `filter`.
fn to_physical(trunc: &Truncation, grid: &Grid, src: &[Complex64], filter: Filter, supp: i64) -> Vec<Complex64> {
    let plen = grid.len();
    let mut buf = vec![Complex64::default(); grid.points()];
    for (i, v) in src.iter().enumerate() {
        if *v != Complex64::default() && trunc.admits(filter, i) {
            buf[trunc.padded_index(&trunc.modes[i], plen)] = *v;
        }
    }
    grid.inverse_pruned(&mut buf, supp as usize);
    buf
}

/// Reads the modes admitted by `out` with `|k_j| <= c` back from a forward
/// transformed product.
fn from_physical(trunc: &Truncation, grid: &Grid, mut prod: Vec<Complex64>, out: Filter, c: i64) -> Vec<Complex64> {
    grid.forward_pruned(&mut prod, c as usize);
    let plen = grid.len();
    let norm = 1.0 / grid.points() as f64;
    let mut res = vec![Complex64::default(); trunc.len()];
    for (i, r) in res.iter_mut().enumerate() {
        let k = &trunc.modes[i];
        if trunc.admits(out, i) && k[..trunc.dim].iter().all(|v| v.abs() <= c) {
            *r = prod[trunc.padded_index(k, plen)] * norm;
        }
    }
    res
}

/// Grid for products of inputs bounded by `in_support`, whose sum of
/// per-factor bounds is at most `product`, read back on `out`.
///
/// The padded length exceeds `product + |k|max`, so no wrapped product
/// lands on a requested output mode.
fn padded_grid(trunc: &Truncation, product: i64, out: Filter) -> (Arc<Grid>, i64) {
    let c = trunc.bound(out).min(product);
    (Grid::cached(smooth_len((product + c + 1) as usize), trunc.dim), c)
}

/// Convolves every component slice in `xs` with every slice in `ys`
/// through a zero-padded FFT. Result `i * ys.len() + j` holds `xs[i] * ys[j]`
/// on the modes admitted by `out`; other entries are zero.
pub(crate) fn convolve_pairs(
    trunc: &Truncation,
    xs: &[&[Complex64]],
    fx: Filter,
    ys: &[&[Complex64]],
    fy: Filter,
    out: Filter,
) -> Vec<Vec<Complex64>> {
    let zeros = || vec![vec![Complex64::default(); trunc.len()]; xs.len() * ys.len()];
    let (Some(a), Some(b)) = (support(trunc, xs, fx), support(trunc, ys, fy)) else {
        return zeros();
    };
    let (grid, c) = padded_grid(trunc, a + b, out);

    let same = fx == fy
        && xs.len() == ys.len()
        && xs.iter().zip(ys).all(|(x, y)| std::ptr::eq(*x, *y));
    let xp: Vec<Vec<Complex64>> = xs.iter().map(|x| to_physical(trunc, &grid, x, fx, a)).collect();
    let yp: Vec<Vec<Complex64>> = if same {
        Vec::new()
    } else {
        ys.iter().map(|y| to_physical(trunc, &grid, y, fy, b)).collect()
    };
    let yp = if same { &xp } else { &yp };

    let mut results = Vec::with_capacity(xs.len() * ys.len());
    for xphys in &xp {
        for yphys in yp.iter() {
            let prod: Vec<Complex64> = xphys.iter().zip(yphys).map(|(p, q)| p * q).collect();
            results.push(from_physical(trunc, &grid, prod, out, c));
        }
    }
    results
}

/// One weighted pair of a symmetrized bilinear sum.
pub(crate) struct PairTerm<'a> {
    pub coeff: f64,
    pub x: Vec<&'a [Complex64]>,
    pub fx: Filter,
    pub y: Vec<&'a [Complex64]>,
    pub fy: Filter,
}

/// `S[j][c] = Σ_t coeff_t · ½ (x_t^j * y_t^c + y_t^j * x_t^c)` on the modes
/// admitted by `out`, indexed `j * n + c` for `n` components.
///
/// Every distinct input is transformed once and the products are summed in
/// physical space, so each of the `n(n+1)/2` independent entries costs one
/// forward transform however many terms there are.
pub(crate) fn symmetric_products(trunc: &Truncation, terms: &[PairTerm<'_>], out: Filter) -> Vec<Vec<Complex64>> {
    let ncomp = terms.first().map_or(1, |t| t.x.len());
    let zero = vec![Complex64::default(); trunc.len()];
    let mut active = Vec::new();
    for t in terms {
        if t.coeff == 0.0 {
            continue;
        }
        if let (Some(a), Some(b)) = (support(trunc, &t.x, t.fx), support(trunc, &t.y, t.fy)) {
            active.push((t, a, b));
        }
    }
    if active.is_empty() {
        return vec![zero; ncomp * ncomp];
    }
    let product = active.iter().map(|(_, a, b)| a + b).max().unwrap_or(0);
    let in_support = active.iter().map(|(_, a, b)| *a.max(b)).max().unwrap_or(0);
    let (grid, c) = padded_grid(trunc, product, out);

    // physical samples keyed by (first slice address, filter)
    let mut cache: Vec<((usize, Filter), Vec<Vec<Complex64>>)> = Vec::new();
    let mut physical = |comps: &[&[Complex64]], filter: Filter| -> usize {
        let key = (comps[0].as_ptr() as usize, filter);
        if let Some(pos) = cache.iter().position(|(k, _)| *k == key) {
            return pos;
        }
        let phys = comps
            .iter()
            .map(|d| to_physical(trunc, &grid, d, filter, in_support))
            .collect();
        cache.push((key, phys));
        cache.len() - 1
    };
    let slots: Vec<(f64, usize, usize)> = active
        .iter()
        .map(|(t, _, _)| (t.coeff, physical(&t.x, t.fx), physical(&t.y, t.fy)))
        .collect();

    let points = grid.points();
    let mut results = vec![Vec::new(); ncomp * ncomp];
    for j in 0..ncomp {
        for cc in j..ncomp {
            let mut acc = vec![Complex64::default(); points];
            for &(coeff, xi, yi) in &slots {
                let (x, y) = (&cache[xi].1, &cache[yi].1);
                if j == cc {
                    for ((a, p), q) in acc.iter_mut().zip(&x[j]).zip(&y[j]) {
                        *a += p * q * coeff;
                    }
                } else {
                    let h = 0.5 * coeff;
                    for (i, a) in acc.iter_mut().enumerate() {
                        *a += (x[j][i] * y[cc][i] + y[j][i] * x[cc][i]) * h;
                    }
                }
            }
            let res = from_physical(trunc, &grid, acc, out, c);
            if j != cc {
                results[cc * ncomp + j] = res.clone();
            }
            results[j * ncomp + cc] = res;
        }
    }
    results
}
