//! Product-integration weights for convolutions `(k * u)(t_n)` on a uniform grid.
//!
//! `u` is interpolated linearly between grid points and integrated exactly
//! against the kernel, using only the primitives `P1 = ∫_0 k` and
//! `P2 = ∫_0 P1`. On the cell `v ∈ [a, b] = [(m-1)h, mh]` of the lag `v = t_n - s`:
//!
//! * `∫_a^b k(v) (b - v) dv = P2(b) - P2(a) - h P1(a)`,
//! * `∫_a^b k(v) (v - a) dv = h P1(b) - (P2(b) - P2(a))`.
//!
//! Weakly singular kernels such as `t^{α-1}` are thus handled exactly.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct ProductWeights {
    /// `near[m]` multiplies `u_{n-m+1}`, the node closer to `t_n`, for `m ≥ 1`.
    near: Vec<f64>,
    /// `far[m]` multiplies `u_{n-m}`, for `m ≥ 1`.
    far: Vec<f64>,
}

impl ProductWeights {
    /// Weights for lags up to `intervals` steps from sampled primitives
    /// `p1[j] = P1(j h)`, `p2[j] = P2(j h)`.
    pub fn from_primitive_tables(step: f64, p1: &[f64], p2: &[f64]) -> Self {
        let n = p1.len().min(p2.len());
        let mut near = vec![0.0; n];
        let mut far = vec![0.0; n];
        for m in 1..n {
            let d2 = p2[m] - p2[m - 1];
            near[m] = (d2 - step * p1[m - 1]) / step;
            far[m] = (step * p1[m] - d2) / step;
        }
        Self { near, far }
    }

    pub fn from_primitives(step: f64, intervals: usize, p1: impl Fn(f64) -> f64, p2: impl Fn(f64) -> f64) -> Self {
        let t = |j: usize| step * j as f64;
        let a: Vec<f64> = (0..=intervals).map(|j| p1(t(j))).collect();
        let b: Vec<f64> = (0..=intervals).map(|j| p2(t(j))).collect();
        Self::from_primitive_tables(step, &a, &b)
    }

    pub fn max_lag(&self) -> usize {
        self.near.len().saturating_sub(1)
    }

    /// Weight of `u_n` itself in `(k * u)(t_n)`.
    pub fn diagonal(&self) -> f64 {
        self.near.get(1).copied().unwrap_or(0.0)
    }

    /// `(k * u)(t_n)` excluding the `u_n` term.
    pub fn history(&self, u: &[Complex64], n: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let m = n - k;
            acc += u[k] * self.far[m];
            if k >= 1 {
                acc += u[k] * self.near[m + 1];
            }
        }
        acc
    }

    /// `(k * u)(t_n)` for real samples.
    pub fn convolve_real(&self, u: &[f64], n: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..n {
            let m = n - k;
            acc += self.far[m] * u[k] + self.near[m] * u[k + 1];
        }
        acc
    }

    /// `(k * u)(t_n)` for complex samples.
    pub fn convolve(&self, u: &[Complex64], n: usize) -> Complex64 {
        self.history(u, n) + u[n] * self.diagonal()
    }
}
