//! Mittag-Leffler functions on the real line.
//!
//! `E_{α,β}(z) = Σ_{n≥0} z^n / Γ(αn + β)` is evaluated by
//!
//! * the power series wherever its cancellation error stays below `1e-13`
//!   (always for `z ≥ 0`, for small `|z|` when `z < 0`),
//! * the algebraic asymptotic expansion `Σ_{k≥1} (-1)^{k+1} x^{-k} / Γ(β - αk)`
//!   for `z = -x` once its terms drop below `1e-16` of the partial sum,
//! * the collapsed Hankel-contour integral in between, which is a
//!   positive, cancellation-free integral for `0 < α < 1`.
//!
//! The Mittag-Leffler density `f^{α,λ}(t) = λ t^{α-1} E_{α,α}(-λ t^α)` and its
//! distribution function `F^{α,λ}` are built on top.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};
use crate::quad;

/// Parameters of the Mittag-Leffler law `f^{α,λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerParams {
    alpha: f64,
    lambda: f64,
}

impl MittagLefflerParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("Mittag-Leffler alpha must lie in (0, 1], got {alpha}"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("Mittag-Leffler lambda must be positive, got {lambda}"));
        }
        Ok(Self { alpha, lambda })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// `1 / Γ(x)`, zero at the poles of Γ.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if x > 0.0 {
        if x < 170.0 {
            1.0 / gamma(x)
        } else {
            (-ln_gamma(x)).exp()
        }
    } else if x == x.floor() {
        0.0
    } else {
        // Reflection: 1/Γ(x) = Γ(1-x) sin(πx) / π
        let s = (PI * x).sin() / PI;
        if 1.0 - x < 170.0 {
            gamma(1.0 - x) * s
        } else {
            s * ln_gamma(1.0 - x).exp()
        }
    }
}

/// Largest `Σ|term|` for which the alternating series is trusted.
const SERIES_ABS_SUM_LIMIT: f64 = 50.0;

struct SeriesSum {
    value: f64,
    abs_sum: f64,
}

fn series(alpha: f64, beta: f64, z: f64) -> Option<SeriesSum> {
    if z == 0.0 {
        let v = if beta == 1.0 { 1.0 } else { reciprocal_gamma(beta) };
        return Some(SeriesSum { value: v, abs_sum: v.abs() });
    }
    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut abs_sum = 0.0_f64;
    let mut prev_abs = f64::INFINITY;
    for n in 0..20_000usize {
        let arg = alpha * n as f64 + beta;
        let ln_mag = n as f64 * ln_abs_z - ln_gamma(arg);
        if ln_mag > 700.0 {
            return None;
        }
        let mag = if arg < 170.0 && n < 300 {
            z.abs().powi(n as i32) / gamma(arg)
        } else {
            ln_mag.exp()
        };
        let term = if negative && n % 2 == 1 { -mag } else { mag };
        // Kahan summation keeps the alternating case honest.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += mag;
        if n > 3 && mag <= 1e-17 * sum.abs().max(1e-300) && mag < prev_abs {
            return Some(SeriesSum { value: sum, abs_sum });
        }
        if n > 3 && mag == 0.0 {
            return Some(SeriesSum { value: sum, abs_sum });
        }
        prev_abs = mag;
    }
    None
}

/// Algebraic expansion for `E_{α,β}(-x)`, valid for `0 < α < 1`.
/// Returns `None` unless four consecutive terms fall below `1e-16` relative to
/// the partial sum; single terms near the poles of `1/Γ(β - αk)` are small
/// without the series having converged, and for `α` near 1 the terms level
/// off well above that threshold.
fn asymptotic_negative(alpha: f64, beta: f64, x: f64) -> Option<f64> {
    const WINDOW: usize = 4;
    let ln_x = x.ln();
    let mut terms = Vec::with_capacity(64);
    let mut quiet = 0usize;
    for k in 1..400usize {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * reciprocal_gamma(beta - alpha * k as f64) * (-(k as f64) * ln_x).exp();
        if !term.is_finite() {
            return None;
        }
        terms.push(term);
        let partial: f64 = terms.iter().sum();
        if term.abs() < 1e-16 * partial.abs() {
            quiet += 1;
            if quiet == WINDOW {
                let keep = terms.len() - WINDOW + 1;
                return Some(terms[..keep].iter().sum());
            }
        } else {
            quiet = 0;
            // Divergence sets in before the terms became small.
            if k > 8 && term.abs() > 1.0 {
                return None;
            }
        }
    }
    None
}

/// Collapsed Hankel-contour representation for `E_{α,β}(-x)`, `x > 0`,
/// `0 < α < 1`, `β < 1 + α`:
///
/// `(1/π) ∫_0^∞ e^{-r} r^{α-β} (r^α sin πβ + x sin π(β-α)) / (r^{2α} + 2 x r^α cos πα + x²) dr`.
fn integral_negative(alpha: f64, beta: f64, x: f64) -> f64 {
    let p = 1.0 + alpha - beta;
    let sb = (PI * beta).sin();
    let sba = (PI * (beta - alpha)).sin();
    let ca = (PI * alpha).cos();
    // r = s^{1/p} absorbs the r^{α-β} endpoint singularity: r^{α-β} dr = ds / p.
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let r = s.powf(1.0 / p);
        let ra = r.powf(alpha);
        let denom = ra * ra + 2.0 * x * ra * ca + x * x;
        (-r).exp() * (ra * sb + x * sba) / denom
    };
    let r_max = 60.0_f64;
    let mut points = vec![0.0];
    let mut marks = vec![x.powf(1.0 / alpha), 1.0];
    if ca < 0.0 {
        let r_star = (-x * ca).powf(1.0 / alpha);
        marks.push(r_star);
        marks.push(0.5 * r_star);
        marks.push(1.5 * r_star);
    }
    marks.sort_by(|a, b| a.total_cmp(b));
    for r in marks {
        if r > 0.0 && r < r_max {
            let s = r.powf(p);
            if s > *points.last().unwrap() * (1.0 + 1e-9) {
                points.push(s);
            }
        }
    }
    points.push(r_max.powf(p));
    let res = quad::integrate_pieces(integrand, &points, 1e-15, 1e-13);
    res.value / (PI * p)
}

fn ml_negative_alpha_one(beta: f64, x: f64) -> f64 {
    // E_{1,β}(-x) for x > 0.
    if beta == 1.0 {
        return (-x).exp();
    }
    if beta <= 1.0 {
        // E_{1,β}(z) = z E_{1,β+1}(z) + 1/Γ(β)
        return -x * ml_negative_alpha_one(beta + 1.0, x) + reciprocal_gamma(beta);
    }
    // E_{1,β}(z) = (1/Γ(β)) ∫_0^1 exp(z (1 - v^{1/(β-1)})) dv
    let q = 1.0 / (beta - 1.0);
    let r = quad::integrate(|v| (-x * (1.0 - v.powf(q))).exp(), 0.0, 1.0, 1e-15, 1e-14, 500);
    r.value * reciprocal_gamma(beta)
}

fn ml_negative(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(ml_negative_alpha_one(beta, x));
    }
    if alpha > 1.0 {
        return domain(format!(
            "E_{{α,β}}(z) with α = {alpha} > 1 is only supported where the power series is stable"
        ));
    }
    if let Some(v) = asymptotic_negative(alpha, beta, x) {
        return Ok(v);
    }
    if beta >= 1.0 + alpha {
        // E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z
        let lower = ml_negative(alpha, beta - alpha, x)?;
        return Ok((lower - reciprocal_gamma(beta - alpha)) / (-x));
    }
    Ok(integral_negative(alpha, beta, x))
}

/// The two-parameter Mittag-Leffler function `E_{α,β}(z)` for real `z`.
pub fn ml_e(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return domain(format!("Mittag-Leffler argument must be finite, got {z}"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("Mittag-Leffler requires alpha > 0 and beta > 0, got ({alpha}, {beta})"));
    }
    if z >= 0.0 {
        return match series(alpha, beta, z) {
            Some(s) => Ok(s.value),
            None => Ok(f64::INFINITY),
        };
    }
    if let Some(s) = series(alpha, beta, z) {
        if s.abs_sum < SERIES_ABS_SUM_LIMIT {
            return Ok(s.value);
        }
    }
    ml_negative(alpha, beta, -z)
}

/// Power-series branch only, `None` where its cancellation error would
/// exceed `1e-13`; exposed for overlap checks against the other branches.
pub fn ml_e_series(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    series(alpha, beta, z).filter(|s| s.abs_sum < SERIES_ABS_SUM_LIMIT).map(|s| s.value)
}

/// Non-series branch for `z < 0` (asymptotic expansion or contour integral).
pub fn ml_e_negative_branch(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if z >= 0.0 {
        return domain("the negative-axis branch needs z < 0");
    }
    ml_negative(alpha, beta, -z)
}

/// Mittag-Leffler density `f^{α,λ}(t) = λ t^{α-1} E_{α,α}(-λ t^α)`, `t > 0`.
pub fn ml_density(params: &MittagLefflerParams, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("Mittag-Leffler density needs t > 0, got {t}"));
    }
    let (a, l) = (params.alpha, params.lambda);
    if a == 1.0 {
        return Ok(l * (-l * t).exp());
    }
    let e = ml_e(a, a, -l * t.powf(a))?;
    Ok((l * t.powf(a - 1.0) * e).max(0.0))
}

/// Mittag-Leffler distribution function `F^{α,λ}(t) = ∫_0^t f^{α,λ}`.
///
/// Integrates the density after the substitution `u = s^α`, which turns the
/// `s^{α-1}` singularity into the smooth integrand `(λ/α) E_{α,α}(-λ u)`.
pub fn ml_cdf(params: &MittagLefflerParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("Mittag-Leffler CDF needs t >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let (a, l) = (params.alpha, params.lambda);
    let upper = t.powf(a);
    // Breakpoints on the scale 1/λ keep the adaptive rule from skipping structure.
    let mut points = vec![0.0];
    let mut b = 0.5 / l;
    while b < upper {
        points.push(b);
        b *= 4.0;
    }
    points.push(upper);
    let mut failure = None;
    let r = quad::integrate_pieces(
        |u| match ml_e(a, a, -l * u) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        &points,
        1e-13,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((l / a * r.value).clamp(0.0, 1.0))
}

/// `F^{α,λ}` and its primitive `∫_0^t F^{α,λ}` tabulated on `t_j = j h`,
/// through the identities `F(t) = 1 - E_{α,1}(-λ t^α)` and
/// `∫_0^t F = t (1 - E_{α,2}(-λ t^α))`.
#[derive(Debug, Clone)]
pub struct MittagLefflerTable {
    pub step: f64,
    pub cdf: Vec<f64>,
    pub cdf_integral: Vec<f64>,
}

impl MittagLefflerTable {
    pub fn new(params: &MittagLefflerParams, step: f64, points: usize) -> Result<Self> {
        if !(step > 0.0) {
            return domain("table step must be positive");
        }
        let (a, l) = (params.alpha, params.lambda);
        let mut cdf = Vec::with_capacity(points);
        let mut cdf_integral = Vec::with_capacity(points);
        for j in 0..points {
            let t = j as f64 * step;
            if j == 0 {
                cdf.push(0.0);
                cdf_integral.push(0.0);
                continue;
            }
            let z = -l * t.powf(a);
            cdf.push((1.0 - ml_e(a, 1.0, z)?).clamp(0.0, 1.0));
            cdf_integral.push((t * (1.0 - ml_e(a, 2.0, z)?)).max(0.0));
        }
        Ok(Self { step, cdf, cdf_integral })
    }
}

/// `F^{α,λ}(t)` through the closed identity `1 - E_{α,1}(-λ t^α)`.
pub fn ml_cdf_closed(params: &MittagLefflerParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("Mittag-Leffler CDF needs t >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - ml_e(params.alpha, 1.0, -params.lambda * t.powf(params.alpha))?).clamp(0.0, 1.0))
}
