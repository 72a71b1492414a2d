//! Sum-of-exponentials approximation of the excitation kernel.
//!
//! `φ(t) ≈ Σ_j w_j e^{-r_j t}` lets the thinning engine update the intensity
//! recursively. For the power law the starting point is the Gamma integral
//! `(1 + t)^{-α-1} = Γ(α+1)^{-1} ∫ e^{(α+1)y - e^y (1 + t)} dy`, discretised
//! with the trapezoid rule in `y`; the weights are then refitted by least
//! squares on the relative error and finally scaled so the approximation
//! carries the exact mass `∫_0^H φ` over the fit horizon `H`.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SoeKernel {
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    /// Largest `|approx / φ - 1|` on the log-spaced check grid over `fit_range`.
    pub sup_rel_error: f64,
    pub fit_range: (f64, f64),
}

impl SoeKernel {
    pub fn eval(&self, t: f64) -> f64 {
        self.weights.iter().zip(&self.rates).map(|(w, r)| w * (-r * t).exp()).sum()
    }

    /// `∫_0^H` of the approximation.
    pub fn mass_until(&self, horizon: f64) -> f64 {
        self.weights.iter().zip(&self.rates).map(|(w, r)| w / r * -(-r * horizon).exp_m1()).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

const CHECK_POINTS: usize = 400;
const H_MIN: f64 = 1e-2;

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn sup_rel_error(spec: &KernelSpec, weights: &[f64], rates: &[f64], points: &[f64]) -> f64 {
    points
        .iter()
        .map(|&t| {
            let approx: f64 = weights.iter().zip(rates).map(|(w, r)| w * (-r * t).exp()).sum();
            (approx / spec.phi_unchecked(t) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Least-squares weights for fixed rates, minimising the relative error.
fn refit(spec: &KernelSpec, rates: &[f64], points: &[f64]) -> Option<Vec<f64>> {
    let a = DMatrix::from_fn(points.len(), rates.len(), |i, j| {
        (-rates[j] * points[i]).exp() / spec.phi_unchecked(points[i])
    });
    let b = DVector::from_element(points.len(), 1.0);
    let w = a.svd(true, true).solve(&b, 1e-14).ok()?;
    if w.iter().all(|&v| v > 0.0 && v.is_finite()) {
        Some(w.iter().copied().collect())
    } else {
        None
    }
}

/// Fits `n_terms` exponentials to `φ` on `[1e-2, horizon]`.
pub fn soe_fit(spec: &KernelSpec, n_terms: usize, horizon: f64) -> Result<SoeKernel> {
    if n_terms == 0 {
        return Err(Error::Approximation("need at least one exponential".into()));
    }
    if !(horizon > H_MIN) {
        return Err(Error::Approximation(format!("fit horizon must exceed {H_MIN}, got {horizon}")));
    }
    let alpha = match *spec {
        KernelSpec::Exponential => {
            // One term reproduces e^{-t} exactly; extra terms would be redundant.
            return Ok(SoeKernel { weights: vec![1.0], rates: vec![1.0], sup_rel_error: 0.0, fit_range: (H_MIN, horizon) });
        }
        KernelSpec::PowerLaw { alpha } => alpha,
    };
    let points = log_points(H_MIN, horizon, CHECK_POINTS);
    let target_mass = 1.0 - spec.tail_unchecked(horizon);
    let norm = alpha / gamma(alpha + 1.0);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    // Small search over the node window in y = ln r.
    for i in 0..11 {
        let y_lo = -horizon.ln() - 4.0 + 0.5 * i as f64;
        for j in 0..11 {
            let y_top = (1.0 / H_MIN).ln() + 2.0;
            let y_hi = y_top * (1.0 - j as f64 / 10.0);
            if n_terms > 1 && y_hi <= y_lo {
                continue;
            }
            let dy = if n_terms > 1 { (y_hi - y_lo) / (n_terms - 1) as f64 } else { 1.0 };
            let rates: Vec<f64> = (0..n_terms).map(|k| (y_lo + dy * k as f64).exp()).collect();
            let mut weights: Vec<f64> = rates.iter().map(|&r| norm * dy * (r.ln() * (alpha + 1.0) - r).exp()).collect();
            if let Some(w) = refit(spec, &rates, &points) {
                weights = w;
            }
            let mass: f64 = weights.iter().zip(&rates).map(|(w, r)| w / r * -(-r * horizon).exp_m1()).sum();
            if !(mass > 0.0) {
                continue;
            }
            let scale = target_mass / mass;
            weights.iter_mut().for_each(|w| *w *= scale);
            let err = sup_rel_error(spec, &weights, &rates, &points);
            if best.as_ref().is_none_or(|b| err < b.0) {
                best = Some((err, weights, rates));
            }
        }
    }
    let (sup_rel_error, weights, rates) =
        best.ok_or_else(|| Error::Approximation("no admissible node window".into()))?;
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Approximation("fit produced non-positive weights".into()));
    }
    Ok(SoeKernel { weights, rates, sup_rel_error, fit_range: (H_MIN, horizon) })
}
