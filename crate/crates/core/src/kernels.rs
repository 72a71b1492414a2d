//! Hawkes excitation kernels, near-instability schedules and the derived
//! kernels `ψ` (resolvent) and `ξ` (price response).

use std::fmt;

use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::grid::{SampledFunction, UniformGrid};

/// Unit-mass excitation kernel `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `φ(t) = α (1 + t)^{-α-1}`, tail `(1 + t)^{-α}`.
    PowerLaw { alpha: f64 },
    /// `φ(t) = e^{-t}`; a finite-mean kernel used as an oracle family.
    Exponential,
}

impl KernelSpec {
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("power-law tail exponent must lie in (0, 1), got {alpha}"));
        }
        Ok(Self::PowerLaw { alpha })
    }

    pub fn exponential() -> Self {
        Self::Exponential
    }

    /// Tail exponent; the exponential kernel belongs to the `α = 1` regime.
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::PowerLaw { alpha } => alpha,
            Self::Exponential => 1.0,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::PowerLaw { .. } => "power_law_shifted",
            Self::Exponential => "exponential_test",
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return domain(format!("kernel evaluated at negative or NaN time {t}"));
        }
        Ok(())
    }

    /// `φ(t)`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.phi_unchecked(t))
    }

    /// `∫_t^∞ φ`.
    pub fn tail(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.tail_unchecked(t))
    }

    pub(crate) fn phi_unchecked(&self, t: f64) -> f64 {
        match *self {
            Self::PowerLaw { alpha } => alpha * (1.0 + t).powf(-alpha - 1.0),
            Self::Exponential => (-t).exp(),
        }
    }

    pub(crate) fn tail_unchecked(&self, t: f64) -> f64 {
        match *self {
            Self::PowerLaw { alpha } => (1.0 + t).powf(-alpha),
            Self::Exponential => (-t).exp(),
        }
    }

    /// `R(t) = ∫_0^t ∫_s^∞ φ`.
    pub fn integrated_tail(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.integrated_tail_unchecked(t))
    }

    pub(crate) fn integrated_tail_unchecked(&self, t: f64) -> f64 {
        match *self {
            Self::PowerLaw { alpha } => ((1.0 + t).powf(1.0 - alpha) - 1.0) / (1.0 - alpha),
            Self::Exponential => -(-t).exp_m1(),
        }
    }

    /// `L(t) = R(t) t^{α-1}`; tends to `1 / (1 - α)` for the power law.
    pub fn slowly_varying(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("L(t) needs t > 0, got {t}"));
        }
        Ok(self.integrated_tail_unchecked(t) * t.powf(self.alpha() - 1.0))
    }

    /// Maps `u ∈ (0, 1]` to a delay distributed with density `φ`.
    pub fn delay_from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::PowerLaw { alpha } => u.powf(-1.0 / alpha) - 1.0,
            Self::Exponential => -u.ln(),
        }
    }

    pub fn sample(&self, grid: UniformGrid) -> SampledFunction {
        SampledFunction::from_fn(grid, |t| self.phi_unchecked(t))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PowerLaw { alpha } => write!(f, "power_law_shifted(alpha={alpha})"),
            Self::Exponential => write!(f, "exponential_test"),
        }
    }
}

/// Hawkes and metaorder parameters at a fixed horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Horizon `T` of the asymptotic framework.
    pub horizon: f64,
    /// Branching ratio `a^T`.
    pub a_t: f64,
    /// Baseline intensity `μ^T`.
    pub mu_t: f64,
    /// Impact constant `K`.
    pub k: f64,
    /// Limit of `(1 - a^T) μ^T T`.
    pub delta: f64,
    /// Metaorder participation rate `γ`.
    pub gamma: f64,
    /// Tail exponent of the kernel the parameters were built for.
    pub alpha: f64,
}

impl MarketParams {
    /// Direct construction, e.g. for stationary experiments away from the
    /// near-unstable regime. `delta` is set to `(1 - a^T) μ^T T`.
    pub fn new(horizon: f64, a_t: f64, mu_t: f64, gamma: f64, spec: &KernelSpec) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if !(a_t >= 0.0) || !a_t.is_finite() {
            return domain(format!("branching ratio must be non-negative, got {a_t}"));
        }
        if a_t >= 1.0 {
            return Err(Error::Instability { a_t });
        }
        if !(mu_t >= 0.0 && mu_t.is_finite()) {
            return domain(format!("baseline intensity must be non-negative, got {mu_t}"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return domain(format!("participation rate must lie in [0, 1), got {gamma}"));
        }
        let alpha = spec.alpha();
        let k = spec.integrated_tail_unchecked(horizon) / (horizon * (1.0 - a_t).max(f64::MIN_POSITIVE));
        Ok(Self { horizon, a_t, mu_t, k, delta: (1.0 - a_t) * mu_t * horizon, gamma, alpha })
    }

    /// `β^T = μ^T / (1 - a^T)`, the stationary intensity.
    pub fn beta_t(&self) -> f64 {
        self.mu_t / (1.0 - self.a_t)
    }

    /// `I^T = γ β^T`, the metaorder intensity scale.
    pub fn i_t(&self) -> f64 {
        self.gamma * self.beta_t()
    }

    /// `λ = (K Γ(2 - α))^{-1}`.
    pub fn lambda(&self) -> f64 {
        1.0 / (self.k * gamma(2.0 - self.alpha))
    }

    /// `a^T / (1 - a^T) = ∫ψ`.
    pub fn resolvent_mass(&self) -> f64 {
        self.a_t / (1.0 - self.a_t)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Near-instability schedule: `a^T = 1 - R(T) / (T K)`, `μ^T = δ / ((1 - a^T) T)`.
pub fn schedule(horizon: f64, spec: &KernelSpec, k: f64, delta: f64, gamma: f64) -> Result<MarketParams> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Schedule(format!("horizon must be positive, got {horizon}")));
    }
    if !(k > 0.0 && k.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Schedule(format!("K and delta must be positive, got K = {k}, delta = {delta}")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Schedule(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let one_minus_a = spec.integrated_tail_unchecked(horizon) / (horizon * k);
    let a_t = 1.0 - one_minus_a;
    if !(a_t > 0.0 && a_t < 1.0) {
        return Err(Error::Schedule(format!(
            "T = {horizon} gives a^T = {a_t} outside (0, 1); increase T (or K)"
        )));
    }
    let mu_t = delta / (one_minus_a * horizon);
    Ok(MarketParams { horizon, a_t, mu_t, k, delta, gamma, alpha: spec.alpha() })
}

fn check_ratio(a_t: f64) -> Result<()> {
    if !(a_t >= 0.0) {
        return domain(format!("branching ratio must be non-negative, got {a_t}"));
    }
    if a_t >= 1.0 {
        return Err(Error::Instability { a_t });
    }
    Ok(())
}

/// Resolvent `ψ = Σ_{i≥1} (a φ)^{*i}` on `grid`, from the Volterra equation
/// `ψ = aφ + aφ * ψ` discretised with the trapezoidal rule.
pub fn resolvent_psi(spec: &KernelSpec, a_t: f64, grid: UniformGrid) -> Result<SampledFunction> {
    check_ratio(a_t)?;
    let h = grid.step();
    let n = grid.len();
    let phi: Vec<f64> = grid.points().map(|t| a_t * spec.phi_unchecked(t)).collect();
    let mut psi = vec![0.0; n];
    psi[0] = phi[0];
    let diag = 1.0 - 0.5 * h * phi[0];
    for i in 1..n {
        let mut conv = 0.5 * phi[i] * psi[0];
        for k in 1..i {
            conv += phi[i - k] * psi[k];
        }
        psi[i] = (phi[i] + h * conv) / diag;
    }
    Ok(SampledFunction { grid, values: psi })
}

/// Total mass `∫_0^∞ ψ` estimated from a resolvent grid: the trapezoid integral
/// over the grid plus the exact remainder
/// `∫_t^∞ ψ = a/(1-a) [tail(t) + ∫_0^t ψ(s) tail(t-s) ds]` at the grid end.
pub fn resolvent_mass(spec: &KernelSpec, a_t: f64, psi: &SampledFunction) -> Result<f64> {
    check_ratio(a_t)?;
    let grid = psi.grid;
    let n = grid.intervals();
    let t_end = grid.t_max();
    let h = grid.step();
    let mut conv = 0.0;
    for (k, &p) in psi.values.iter().enumerate() {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        conv += w * p * spec.tail_unchecked(t_end - grid.t(k));
    }
    conv *= h;
    let remainder = a_t / (1.0 - a_t) * (spec.tail_unchecked(t_end) + conv);
    Ok(psi.trapezoid() + remainder)
}

/// `ξ^T(t) = 1 + a^T (1 - a^T)^{-1} ∫_t^∞ φ`.
pub fn xi(spec: &KernelSpec, a_t: f64, t: f64) -> Result<f64> {
    check_ratio(a_t)?;
    Ok(1.0 + a_t / (1.0 - a_t) * spec.tail(t)?)
}

pub fn xi_grid(spec: &KernelSpec, a_t: f64, grid: UniformGrid) -> Result<SampledFunction> {
    check_ratio(a_t)?;
    let c = a_t / (1.0 - a_t);
    Ok(SampledFunction::from_fn(grid, |t| 1.0 + c * spec.tail_unchecked(t)))
}

/// `∫_0^t ρ^T` with `ρ^T(t) = T (1 - a^T)/a^T ψ^T(T t)`, on the rescaled grid
/// `t_i = i h / T` of a resolvent computed with step `h`.
pub fn rescaled_resolvent_cdf(psi: &SampledFunction, a_t: f64, horizon: f64) -> SampledFunction {
    let factor = (1.0 - a_t) / a_t;
    let values = psi.cumulative_trapezoid().into_iter().map(|v| factor * v).collect();
    let grid = UniformGrid::with_step(psi.grid.step() / horizon, psi.grid.intervals())
        .expect("a valid grid rescales to a valid grid");
    SampledFunction { grid, values }
}

/// CSV header line content for kernel-derived samples.
pub fn kernel_header(spec: &KernelSpec, a_t: f64) -> String {
    match spec {
        KernelSpec::PowerLaw { alpha } => format!("kernel={} alpha={alpha} aT={a_t}", spec.family_name()),
        KernelSpec::Exponential => format!("kernel={} alpha=1 aT={a_t}", spec.family_name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn point_values() {
        let p = KernelSpec::power_law(0.5).unwrap();
        assert_eq!(p.phi(0.0).unwrap(), 0.5);
        assert!((p.phi(3.0).unwrap() - 0.0625).abs() < 1e-15);
        assert!((p.tail(3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.tail(0.0).unwrap(), 1.0);
        let e = KernelSpec::exponential();
        assert_eq!(e.phi(0.0).unwrap(), 1.0);
        assert!((e.tail(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!(p.phi(-1.0).is_err());
        assert!(KernelSpec::power_law(1.0).is_err());
    }

    #[test]
    fn unit_mass_and_tail_by_quadrature() {
        for spec in [KernelSpec::power_law(0.3).unwrap(), KernelSpec::power_law(0.7).unwrap(), KernelSpec::exponential()] {
            // Decades up to 1e45; the remaining power-law mass is below 1e-13.
            let points: Vec<f64> = std::iter::once(0.0).chain((0..=45).map(|k| 10f64.powi(k))).collect();
            let m = quad::integrate_pieces(|t| spec.phi_unchecked(t), &points, 1e-12, 1e-12);
            assert!((m.value - 1.0).abs() < 1e-8, "{spec}: {}", m.value);
            for &t in &[0.5, 3.0, 40.0] {
                let pts: Vec<f64> = std::iter::once(t).chain((0..=45).map(|k| t + 10f64.powi(k))).collect();
                let tail = quad::integrate_pieces(|s| spec.phi_unchecked(s), &pts, 1e-13, 1e-12);
                assert!((tail.value - spec.tail(t).unwrap()).abs() < 1e-9);
                let r = quad::integrate(|s| spec.tail_unchecked(s), 0.0, t, 1e-13, 1e-13, 200);
                assert!((r.value - spec.integrated_tail(t).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn slowly_varying_limit() {
        let spec = KernelSpec::power_law(0.6).unwrap();
        let l = spec.slowly_varying(1e12).unwrap();
        assert!((l - 1.0 / 0.4).abs() < 1e-3);
    }

    #[test]
    fn schedule_follows_formula() {
        let spec = KernelSpec::power_law(0.5).unwrap();
        let p = schedule(1000.0, &spec, 1.0, 1.0, 0.1).unwrap();
        let r = 2.0 * (1001.0f64.sqrt() - 1.0);
        assert!((p.a_t - (1.0 - r / 1000.0)).abs() < 1e-14);
        assert!((p.mu_t - 1.0 / ((1.0 - p.a_t) * 1000.0)).abs() < 1e-14);
        assert!((p.i_t() - 0.1 * p.mu_t / (1.0 - p.a_t)).abs() < 1e-14);
        assert!((p.lambda() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(schedule(1000.0, &spec, 1.0, 1.0, 0.0).unwrap().i_t(), 0.0);
        assert!(matches!(schedule(1.0, &spec, 0.1, 1.0, 0.1), Err(Error::Schedule(_))));
        let far = schedule(1e12, &spec, 1.0, 1.0, 0.1).unwrap();
        assert!(far.a_t > 0.99999);
    }

    #[test]
    fn exponential_resolvent_closed_form() {
        let grid = UniformGrid::new(10.0, 10_000).unwrap();
        for &a in &[0.3, 0.5, 0.7] {
            let psi = resolvent_psi(&KernelSpec::exponential(), a, grid).unwrap();
            let err = psi
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - a * (-(1.0 - a) * grid.t(i)).exp()).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-5, "a = {a}: {err}");
        }
    }

    #[test]
    fn resolvent_mass_identity() {
        let grid = UniformGrid::new(50.0, 5_000).unwrap();
        for spec in [KernelSpec::exponential(), KernelSpec::power_law(0.5).unwrap()] {
            for &a in &[0.3, 0.5, 0.9] {
                let psi = resolvent_psi(&spec, a, grid).unwrap();
                let m = resolvent_mass(&spec, a, &psi).unwrap();
                let want = a / (1.0 - a);
                assert!((m - want).abs() < 1e-2 * want, "{spec} a = {a}: {m}");
            }
        }
        assert!(matches!(resolvent_psi(&KernelSpec::exponential(), 1.0, grid), Err(Error::Instability { .. })));
    }

    #[test]
    fn xi_values() {
        let e = KernelSpec::exponential();
        assert!((xi(&e, 0.5, 0.0).unwrap() - 2.0).abs() < 1e-15);
        let p = KernelSpec::power_law(0.5).unwrap();
        assert!((xi(&p, 0.9, 3.0).unwrap() - 5.5).abs() < 1e-12);
        assert!((xi(&p, 0.9, 1e30).unwrap() - 1.0).abs() < 1e-12);
        let g = UniformGrid::new(5.0, 50).unwrap();
        let x = xi_grid(&p, 0.9, g).unwrap();
        for (i, v) in x.values.iter().enumerate() {
            assert!(((v - 1.0) / p.tail(g.t(i)).unwrap() - 9.0).abs() < 1e-12);
        }
    }
}
