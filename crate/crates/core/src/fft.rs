//! Cached multi-dimensional FFT grids used by the exact convolution.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A cubic FFT grid of `len` points per dimension.
pub(crate) struct Grid {
    len: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static GRIDS: OnceLock<Mutex<HashMap<(usize, usize), Arc<Grid>>>> = OnceLock::new();

impl Grid {
    pub(crate) fn cached(len: usize, dim: usize) -> Arc<Grid> {
        let cache = GRIDS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().expect("fft cache poisoned");
        cache
            .entry((len, dim))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Grid {
                    len,
                    dim,
                    forward: planner.plan_fft_forward(len),
                    inverse: planner.plan_fft_inverse(len),
                })
            })
            .clone()
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn points(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    /// Unnormalized `e^{-ikx}` transform over every axis.
    #[cfg(test)]
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.transform(&self.forward, buf);
    }

    /// Unnormalized `e^{+ikx}` transform over every axis.
    #[cfg(test)]
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(&self.inverse, buf);
    }

    /// Inverse transform of data supported on `|k_j| <= support`; lines that
    /// are entirely zero are skipped.
    pub(crate) fn inverse_pruned(&self, buf: &mut [Complex64], support: usize) {
        let keep = self.kept(support);
        match self.dim {
            1 => self.lines(&self.inverse, buf, &[0], 1),
            _ => {
                let n = self.len;
                let rows: Vec<usize> = keep.iter().flat_map(|&i0| keep.iter().map(move |&i1| (i0 * n + i1) * n)).collect();
                self.lines(&self.inverse, buf, &rows, 1);
                let mids: Vec<usize> = keep.iter().flat_map(|&i0| (0..n).map(move |i2| i0 * n * n + i2)).collect();
                self.lines(&self.inverse, buf, &mids, n);
                let firsts: Vec<usize> = (0..n * n).collect();
                self.lines(&self.inverse, buf, &firsts, n * n);
            }
        }
    }

    /// Forward transform; on return only the entries with `|k_j| <= support`
    /// are valid.
    pub(crate) fn forward_pruned(&self, buf: &mut [Complex64], support: usize) {
        let keep = self.kept(support);
        match self.dim {
            1 => self.lines(&self.forward, buf, &[0], 1),
            _ => {
                let n = self.len;
                let firsts: Vec<usize> = (0..n * n).collect();
                self.lines(&self.forward, buf, &firsts, n * n);
                let mids: Vec<usize> = keep.iter().flat_map(|&i0| (0..n).map(move |i2| i0 * n * n + i2)).collect();
                self.lines(&self.forward, buf, &mids, n);
                let rows: Vec<usize> = keep.iter().flat_map(|&i0| keep.iter().map(move |&i1| (i0 * n + i1) * n)).collect();
                self.lines(&self.forward, buf, &rows, 1);
            }
        }
    }

    /// Grid indices of wavenumbers with `|k| <= support`.
    fn kept(&self, support: usize) -> Vec<usize> {
        let n = self.len;
        (0..n).filter(|&i| i <= support || i + support >= n).collect()
    }

    #[cfg(test)]
    fn transform(&self, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.points());
        let n = self.len;
        if self.dim == 1 {
            self.lines(fft, buf, &[0], 1);
            return;
        }
        let rows: Vec<usize> = (0..n * n).map(|r| r * n).collect();
        self.lines(fft, buf, &rows, 1);
        let mids: Vec<usize> = (0..n).flat_map(|i0| (0..n).map(move |i2| i0 * n * n + i2)).collect();
        self.lines(fft, buf, &mids, n);
        let firsts: Vec<usize> = (0..n * n).collect();
        self.lines(fft, buf, &firsts, n * n);
    }

    /// Transforms the lines starting at `starts` with element stride
    /// `stride`, batched through one contiguous buffer.
    fn lines(&self, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], starts: &[usize], stride: usize) {
        let n = self.len;
        if starts.is_empty() {
            return;
        }
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        if stride == 1 && starts.len() == 1 && starts[0] == 0 && buf.len() == n {
            fft.process_with_scratch(buf, &mut scratch);
            return;
        }
        let mut gathered = vec![Complex64::default(); starts.len() * n];
        for (line, &s) in gathered.chunks_exact_mut(n).zip(starts) {
            for (i, v) in line.iter_mut().enumerate() {
                *v = buf[s + i * stride];
            }
        }
        fft.process_with_scratch(&mut gathered, &mut scratch);
        for (line, &s) in gathered.chunks_exact(n).zip(starts) {
            for (i, v) in line.iter().enumerate() {
                buf[s + i * stride] = *v;
            }
        }
    }
}

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub(crate) fn smooth_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
