//! Macroscopic limits of the order flow: rough Heston (`α > 1/2`) and
//! hyper-rough Heston (`α ≤ 1/2`), plus the fractional derivative and an
//! empirical roughness estimator.
//!
//! Each side `a`, `b` carries its own integrated variance with
//! `X = (X^a + X^b) / δ`, driven by Brownian increments `ΔZ` whose variance
//! is the side's own variance increment (the time-changed Brownian motion
//! `Z_{X}`). The price is `P̂ = (Z^a_{X^a} - Z^b_{X^b}) / √δ`.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::mittag::{MittagLefflerParams, MittagLefflerTable};
use crate::rng::{stream_rng, StreamKind};
use crate::stats::linear_fit;

/// Integrated and (when it exists) spot variance on a grid of `[0, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    pub grid: UniformGrid,
    pub xa: Vec<f64>,
    pub xb: Vec<f64>,
    pub x: Vec<f64>,
    pub ya: Option<Vec<f64>>,
    pub yb: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    /// `ΔZ^a_j`, `ΔZ^b_j` on each cell; length `intervals`.
    pub dwa: Vec<f64>,
    pub dwb: Vec<f64>,
    /// Steps whose variance increment came out negative and was set to 0.
    pub clamped: usize,
}

impl VariancePath {
    /// `W_{X_t} = (Z^a_{X^a_t} + Z^b_{X^b_t}) / √δ` on the grid.
    pub fn time_changed_brownian(&self, delta: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        out.push(0.0);
        for (a, b) in self.dwa.iter().zip(&self.dwb) {
            acc += a + b;
            out.push(acc / delta.sqrt());
        }
        out
    }

    pub fn increments(&self) -> Vec<f64> {
        self.x.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match (&self.ya, &self.yb, &self.y) {
            (Some(ya), Some(yb), Some(y)) => {
                writeln!(out, "t,Xa,Xb,X,Ya,Yb,Y")?;
                for i in 0..self.grid.len() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        self.grid.t(i),
                        self.xa[i],
                        self.xb[i],
                        self.x[i],
                        ya[i],
                        yb[i],
                        y[i]
                    )?;
                }
            }
            _ => {
                writeln!(out, "t,Xa,Xb,X")?;
                for i in 0..self.grid.len() {
                    writeln!(out, "{},{},{},{}", self.grid.t(i), self.xa[i], self.xb[i], self.x[i])?;
                }
            }
        }
        Ok(())
    }
}

/// Macroscopic price and, for `α > 1/2`, the correlation `ρ = (Y^a - Y^b) / (Y^a + Y^b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroPricePath {
    pub grid: UniformGrid,
    pub price: Vec<f64>,
    pub rho: Option<Vec<f64>>,
}

impl MacroPricePath {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.rho {
            Some(rho) => {
                writeln!(out, "t,price,rho")?;
                for i in 0..self.grid.len() {
                    writeln!(out, "{},{},{}", self.grid.t(i), self.price[i], rho[i])?;
                }
            }
            None => {
                writeln!(out, "t,price")?;
                for i in 0..self.grid.len() {
                    writeln!(out, "{},{}", self.grid.t(i), self.price[i])?;
                }
            }
        }
        Ok(())
    }
}

/// Parameters shared by both schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl HestonParams {
    pub fn new(alpha: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
            return domain(format!("need lambda >= 0 and delta > 0, got lambda = {lambda}, delta = {delta}"));
        }
        Ok(Self { alpha, lambda, delta })
    }

    /// `λ = (K Γ(2 - α))^{-1}`.
    pub fn from_k(alpha: f64, k: f64, delta: f64) -> Result<Self> {
        if !(k > 0.0) {
            return domain(format!("K must be positive, got {k}"));
        }
        Self::new(alpha, 1.0 / (k * gamma(2.0 - alpha)), delta)
    }

    /// `E[X_t] = (2/δ) ∫_0^t F^{α,λ}` at the grid points.
    pub fn mean_x(&self, grid: UniformGrid) -> Result<Vec<f64>> {
        if self.lambda == 0.0 {
            return Ok(vec![0.0; grid.len()]);
        }
        let table = MittagLefflerTable::new(&MittagLefflerParams::new(self.alpha, self.lambda)?, grid.step(), grid.len())?;
        Ok(table.cdf_integral.iter().map(|v| 2.0 / self.delta * v).collect())
    }
}

/// A simulated macroscopic path.
#[derive(Debug, Clone, PartialEq)]
pub struct HestonPath {
    pub variance: VariancePath,
    pub price: MacroPricePath,
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn price_from(grid: UniformGrid, dwa: &[f64], dwb: &[f64], delta: f64) -> Vec<f64> {
    let mut price = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    price.push(0.0);
    for (a, b) in dwa.iter().zip(dwb) {
        acc += (a - b) / delta.sqrt();
        price.push(acc);
    }
    price
}

/// One side of the hyper-rough scheme:
/// `X_{j+1} = ∫_0^{t_{j+1}} F + (δλ)^{-1/2} Σ_{k<j} F(t_{j+1} - t_{k+1}) ΔZ_k`,
/// with `ΔZ_j ~ N(0, ΔX_j)` drawn once `ΔX_j` is known.
fn hyper_rough_side<R: Rng + ?Sized>(table: &MittagLefflerTable, scale: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>, usize) {
    let n = table.cdf.len() - 1;
    let f = &table.cdf;
    let mut x = vec![0.0; n + 1];
    let mut dz = vec![0.0; n];
    let mut clamped = 0;
    for j in 0..n {
        // F(0) = 0, so the current cell carries no weight.
        let noise: f64 = (0..j).map(|k| f[j - k] * dz[k]).sum();
        let target = table.cdf_integral[j + 1] + scale * noise;
        let mut dx = target - x[j];
        if dx < 0.0 {
            dx = 0.0;
            clamped += 1;
        }
        x[j + 1] = x[j] + dx;
        dz[j] = dx.sqrt() * normal(rng);
    }
    (x, dz, clamped)
}

/// Hyper-rough Heston by an explicit time-change scheme, `α ∈ (0, 1/2]`.
pub fn simulate_hyper_rough(params: &HestonParams, grid: UniformGrid, seed: u64, replication: u64) -> Result<HestonPath> {
    if !(params.alpha > 0.0 && params.alpha <= 0.5) {
        return Err(Error::Regime(format!(
            "alpha = {} > 1/2 has a spot variance; use simulate_rough_heston",
            params.alpha
        )));
    }
    let n = grid.len();
    let (xa, xb, dwa, dwb, clamped) = if params.lambda == 0.0 {
        (vec![0.0; n], vec![0.0; n], vec![0.0; n - 1], vec![0.0; n - 1], 0)
    } else {
        let table = MittagLefflerTable::new(&MittagLefflerParams::new(params.alpha, params.lambda)?, grid.step(), n)?;
        let scale = 1.0 / (params.delta * params.lambda).sqrt();
        let (xa, dwa, ca) = hyper_rough_side(&table, scale, &mut stream_rng(seed, replication, StreamKind::Variance));
        let (xb, dwb, cb) = hyper_rough_side(&table, scale, &mut stream_rng(seed, replication, StreamKind::Auxiliary));
        (xa, xb, dwa, dwb, ca + cb)
    };
    let x = xa.iter().zip(&xb).map(|(a, b)| (a + b) / params.delta).collect();
    let price = price_from(grid, &dwa, &dwb, params.delta);
    Ok(HestonPath {
        variance: VariancePath { grid, xa, xb, x, ya: None, yb: None, y: None, dwa, dwb, clamped },
        price: MacroPricePath { grid, price, rho: None },
    })
}

/// `b_m = ∫_{(m-1)Δ}^{mΔ} s^{α-1} ds`.
fn rough_weights(alpha: f64, step: f64, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    for (m, w) in b.iter_mut().enumerate().skip(1) {
        let m = m as f64;
        *w = step.powf(alpha) * (m.powf(alpha) - (m - 1.0).powf(alpha)) / alpha;
    }
    b
}

/// One side of the rough scheme:
/// `Y_n = λ/Γ(α) Σ_{k<n} b_{n-k} [(1 - Y_k) + (δλ)^{-1/2} √Y_k⁺ ΔB_k / Δ]`.
fn rough_side<R: Rng + ?Sized>(b: &[f64], params: &HestonParams, step: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let n = b.len() - 1;
    let c = params.lambda / gamma(params.alpha);
    let scale = 1.0 / (params.delta * params.lambda).sqrt();
    let mut y = vec![0.0f64; n + 1];
    let mut drive = vec![0.0; n];
    let mut dz = vec![0.0; n];
    for j in 0..n {
        let root = y[j].max(0.0).sqrt();
        dz[j] = root * step.sqrt() * normal(rng);
        drive[j] = (1.0 - y[j]) + scale * dz[j] / step;
        y[j + 1] = c * (0..=j).map(|k| b[j + 1 - k] * drive[k]).sum::<f64>();
    }
    (y, dz)
}

fn cumulative_positive(y: &[f64], step: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    x.push(0.0);
    for w in y.windows(2) {
        acc += 0.5 * step * (w[0].max(0.0) + w[1].max(0.0));
        x.push(acc);
    }
    x
}

/// Rough Heston by explicit product-integration Euler, `α ∈ (1/2, 1]`.
pub fn simulate_rough_heston(params: &HestonParams, grid: UniformGrid, seed: u64, replication: u64) -> Result<HestonPath> {
    if !(params.alpha > 0.5 && params.alpha <= 1.0) {
        return Err(Error::Regime(format!(
            "alpha = {} <= 1/2 has no spot variance; use simulate_hyper_rough",
            params.alpha
        )));
    }
    if params.lambda == 0.0 {
        return domain("the rough scheme needs lambda > 0");
    }
    let step = grid.step();
    let b = rough_weights(params.alpha, step, grid.intervals());
    let (ya, dwa) = rough_side(&b, params, step, &mut stream_rng(seed, replication, StreamKind::Variance));
    let (yb, dwb) = rough_side(&b, params, step, &mut stream_rng(seed, replication, StreamKind::Auxiliary));
    let xa = cumulative_positive(&ya, step);
    let xb = cumulative_positive(&yb, step);
    let d = params.delta;
    let x = xa.iter().zip(&xb).map(|(a, b)| (a + b) / d).collect();
    let y = ya.iter().zip(&yb).map(|(a, b)| (a.max(0.0) + b.max(0.0)) / d).collect();
    let rho = ya
        .iter()
        .zip(&yb)
        .map(|(a, b)| {
            let (a, b) = (a.max(0.0), b.max(0.0));
            if a + b > 0.0 {
                (a - b) / (a + b)
            } else {
                0.0
            }
        })
        .collect();
    let price = price_from(grid, &dwa, &dwb, d);
    Ok(HestonPath {
        variance: VariancePath { grid, xa, xb, x, ya: Some(ya), yb: Some(yb), y: Some(y), dwa, dwb, clamped: 0 },
        price: MacroPricePath { grid, price, rho: Some(rho) },
    })
}

/// Dispatches on the regime.
pub fn simulate_heston(params: &HestonParams, grid: UniformGrid, seed: u64, replication: u64) -> Result<HestonPath> {
    if params.alpha > 0.5 {
        simulate_rough_heston(params, grid, seed, replication)
    } else {
        simulate_hyper_rough(params, grid, seed, replication)
    }
}

/// `D^α x(t) = Γ(1-α)^{-1} d/dt ∫_0^t (t-s)^{-α} x(s) ds` for `x(0) = 0`,
/// integrating the kernel exactly against the piecewise-linear interpolant.
pub fn fractional_derivative(path: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    if path.values[0] != 0.0 {
        return domain(format!("the path must start at 0, got {}", path.values[0]));
    }
    if !(0.0..1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0, 1), got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(path.clone());
    }
    let n = path.grid.len();
    let h = path.grid.step();
    let c = h.powf(-alpha) / gamma(2.0 - alpha);
    let w: Vec<f64> = (0..n).map(|m| ((m + 1) as f64).powf(1.0 - alpha) - (m as f64).powf(1.0 - alpha)).collect();
    let dx: Vec<f64> = path.values.windows(2).map(|p| p[1] - p[0]).collect();
    let values = (0..n).map(|j| c * (0..j).map(|k| dx[k] * w[j - 1 - k]).sum::<f64>()).collect();
    Ok(SampledFunction { grid: path.grid, values })
}

/// Regularity estimate for one moment order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessEstimate {
    pub q: f64,
    /// Slope of `log E|X_{t+Δ} - X_t|^q` against `log Δ`, divided by `q`.
    pub regularity: f64,
    pub std_error: f64,
}

/// Pools increments over all paths and all start points; lags are in grid steps.
pub fn roughness_estimate(paths: &[Vec<f64>], step: f64, q_list: &[f64], lags: &[usize]) -> Result<Vec<RoughnessEstimate>> {
    if paths.is_empty() || lags.len() < 3 {
        return domain("need at least one path and three lags");
    }
    let len = paths.iter().map(Vec::len).min().unwrap_or(0);
    if let Some(bad) = lags.iter().find(|&&l| l == 0 || l >= len) {
        return domain(format!("lag {bad} outside the grid (1..{len})"));
    }
    if q_list.iter().any(|q| !(*q > 0.0)) {
        return domain("moment orders must be positive");
    }
    let log_lag: Vec<f64> = lags.iter().map(|&l| (l as f64 * step).ln()).collect();
    q_list
        .iter()
        .map(|&q| {
            let log_m: Vec<f64> = lags
                .iter()
                .map(|&l| {
                    let (s, c) = paths.iter().fold((0.0, 0usize), |(s, c), p| {
                        let sum: f64 = p.windows(l + 1).map(|w| (w[l] - w[0]).abs().powf(q)).sum();
                        (s + sum, c + p.len() - l)
                    });
                    (s / c as f64).ln()
                })
                .collect();
            let fit = linear_fit(&log_lag, &log_m)?;
            Ok(RoughnessEstimate { q, regularity: fit.slope / q, std_error: fit.slope_se / q })
        })
        .collect()
}

/// Standard Brownian motion on the grid.
pub fn brownian_path<R: Rng + ?Sized>(grid: UniformGrid, rng: &mut R) -> Vec<f64> {
    let sd = grid.step().sqrt();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for _ in 0..grid.intervals() {
        acc += sd * normal(rng);
        out.push(acc);
    }
    out
}
