//! Market impact of a metaorder: finite-`T` closed forms, Monte Carlo
//! estimates and the macroscopic limit, split into permanent and transient parts.
//!
//! All curves are in rescaled time `t` (units of `T`) and rescaled price
//! `P^T_{tT} / (T β^T)`, so the permanent part is `γ ∫_0^t f`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::hawkes::{simulate_metaorder, simulate_side, Engine, EventStream, Side};
use crate::kernels::{KernelSpec, MarketParams};
use crate::profile::Profile;
use crate::quad::integrate_pieces;
use crate::stats::{linear_fit, CurveAccumulator};

/// Where a curve comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Analytic { horizon: f64 },
    MonteCarlo { horizon: f64, reps: usize, seed: u64 },
    Limit,
}

impl fmt::Display for CurveSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Analytic { horizon } => write!(f, "analytic T={horizon}"),
            Self::MonteCarlo { horizon, reps, seed } => write!(f, "mc T={horizon} reps={reps} seed={seed}"),
            Self::Limit => write!(f, "limit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeta {
    pub source: CurveSource,
    pub alpha: f64,
    pub k: f64,
    pub gamma: f64,
    pub profile: String,
}

/// `mi = pmi + tmi` sampled at rescaled times.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactCurve {
    pub times: Vec<f64>,
    pub mi: Vec<f64>,
    pub pmi: Vec<f64>,
    pub tmi: Vec<f64>,
    /// Standard error of `mi` (and `tmi`), Monte Carlo curves only.
    pub std_error: Option<Vec<f64>>,
    pub meta: CurveMeta,
}

impl ImpactCurve {
    fn from_parts(times: &[f64], pmi: Vec<f64>, tmi: Vec<f64>, meta: CurveMeta) -> Self {
        let mi = pmi.iter().zip(&tmi).map(|(p, q)| p + q).collect();
        Self { times: times.to_vec(), mi, pmi, tmi, std_error: None, meta }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = &self.meta;
        writeln!(out, "# source={} alpha={} K={} gamma={} profile={}", m.source, m.alpha, m.k, m.gamma, m.profile)?;
        match &self.std_error {
            Some(se) => {
                writeln!(out, "t,mi,pmi,tmi,stderr")?;
                for i in 0..self.times.len() {
                    writeln!(out, "{},{},{},{},{}", self.times[i], self.mi[i], self.pmi[i], self.tmi[i], se[i])?;
                }
            }
            None => {
                writeln!(out, "t,mi,pmi,tmi")?;
                for i in 0..self.times.len() {
                    writeln!(out, "{},{},{},{}", self.times[i], self.mi[i], self.pmi[i], self.tmi[i])?;
                }
            }
        }
        Ok(())
    }

    /// Largest `|mi - other.mi|` over common times.
    pub fn sup_distance(&self, other: &ImpactCurve) -> f64 {
        self.mi.iter().zip(&other.mi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `n` equally spaced times on `[0, t_max]`, including both ends.
pub fn linear_times(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1).max(1) as f64).collect()
}

/// `n` log-spaced times on `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return domain("impact times must be finite and non-negative");
    }
    Ok(())
}

fn permanent(gamma: f64, profile: &Profile, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| gamma * profile.integral_to(t)).collect()
}

/// Finite-`T` impact with `E[dn_s] = I^T f(s / T) ds`:
/// `tmi(t) = γ a/(1-a) T^{-1} ∫_0^{tT} f(t - x/T) tail(x) dx`.
pub fn analytic_mi(params: &MarketParams, spec: &KernelSpec, profile: &Profile, times: &[f64]) -> Result<ImpactCurve> {
    check_times(times)?;
    if params.a_t >= 1.0 {
        return Err(Error::Instability { a_t: params.a_t });
    }
    let t_big = params.horizon;
    let c = params.gamma * params.resolvent_mass() / t_big;
    let tmi = times
        .iter()
        .map(|&t| {
            let lo = (t_big * (t - 1.0)).max(0.0);
            let hi = t_big * t;
            if c == 0.0 || hi <= lo {
                return 0.0;
            }
            match profile {
                Profile::Flat => c * (spec.integrated_tail_unchecked(hi) - spec.integrated_tail_unchecked(lo)),
                Profile::Table { xs, .. } => {
                    let mut pts = vec![lo, hi];
                    pts.extend(xs.iter().map(|x| t_big * (t - x)).filter(|x| *x > lo && *x < hi));
                    let mut d = 1.0;
                    while d < hi {
                        if d > lo {
                            pts.push(d);
                        }
                        d *= 10.0;
                    }
                    pts.sort_by(f64::total_cmp);
                    let r = integrate_pieces(|x| profile.eval(t - x / t_big) * spec.tail_unchecked(x), &pts, 1e-13, 1e-12);
                    c * r.value
                }
            }
        })
        .collect();
    let meta = CurveMeta {
        source: CurveSource::Analytic { horizon: t_big },
        alpha: params.alpha,
        k: params.k,
        gamma: params.gamma,
        profile: profile.id(),
    };
    Ok(ImpactCurve::from_parts(times, permanent(params.gamma, profile, times), tmi, meta))
}

/// `∫_{s_a}^{s_b} (c0 + c1 s) (t - s)^{-α} ds` in closed form.
fn linear_against_power(c0: f64, c1: f64, t: f64, s_a: f64, s_b: f64, alpha: f64) -> f64 {
    let (v_lo, v_hi) = (t - s_b, t - s_a);
    let p1 = |v: f64| v.max(0.0).powf(1.0 - alpha) / (1.0 - alpha);
    let p2 = |v: f64| v.max(0.0).powf(2.0 - alpha) / (2.0 - alpha);
    (c0 + c1 * t) * (p1(v_hi) - p1(v_lo)) - c1 * (p2(v_hi) - p2(v_lo))
}

/// Macroscopic limit: `tmi(t) = γ K (1-α) ∫_0^t f(t-u) u^{-α} du` for `α < 1`
/// and `γ K f(t)` for `α = 1`.
pub fn macroscopic_mi(alpha: f64, k: f64, gamma: f64, profile: &Profile, times: &[f64]) -> Result<ImpactCurve> {
    check_times(times)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if !(k > 0.0) {
        return domain(format!("K must be positive, got {k}"));
    }
    let tmi = times
        .iter()
        .map(|&t| {
            if alpha == 1.0 {
                return gamma * k * profile.eval(t);
            }
            let top = t.min(1.0);
            let integral = match profile {
                Profile::Flat => linear_against_power(1.0, 0.0, t, 0.0, top, alpha),
                Profile::Table { xs, fs, .. } => xs
                    .windows(2)
                    .zip(fs.windows(2))
                    .filter(|(x, _)| x[0] < top)
                    .map(|(x, f)| {
                        let c1 = (f[1] - f[0]) / (x[1] - x[0]);
                        let c0 = f[0] - c1 * x[0];
                        linear_against_power(c0, c1, t, x[0], x[1].min(top), alpha)
                    })
                    .sum(),
            };
            gamma * k * (1.0 - alpha) * integral
        })
        .collect();
    let meta = CurveMeta { source: CurveSource::Limit, alpha, k, gamma, profile: profile.id() };
    Ok(ImpactCurve::from_parts(times, permanent(gamma, profile, times), tmi, meta))
}

/// Variance reduction for [`mc_mi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceReduction {
    /// Plain average of rescaled price paths.
    #[default]
    None,
    /// Antithetic buy/sell label swap. The buy and sell streams have the same
    /// law and enter the price with opposite signs, so averaging a path with
    /// its swapped copy cancels the Hawkes part exactly and leaves the
    /// metaorder contribution; the Hawkes streams are then not simulated.
    LabelSwap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub engine: Engine,
    pub variance_reduction: VarianceReduction,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { engine: Engine::Exact, variance_reduction: VarianceReduction::None }
    }
}

/// `P^T_{tT} / (T β^T)` at the rescaled times, from a merged event stream.
pub fn rescaled_price_at(stream: &EventStream, spec: &KernelSpec, params: &MarketParams, times: &[f64]) -> Vec<f64> {
    let t_big = params.horizon;
    let c = params.resolvent_mass();
    let norm = t_big * params.beta_t();
    times
        .iter()
        .map(|&t| {
            let now = t * t_big;
            let end = stream.events.partition_point(|e| e.time <= now);
            stream.events[..end]
                .iter()
                .map(|e| e.side.sign() * (1.0 + c * spec.tail_unchecked(now - e.time)))
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Monte Carlo impact: the mean rescaled price with the metaorder injected.
/// `tmi` is `mi` minus the exact permanent part.
pub fn mc_mi(
    params: &MarketParams,
    spec: &KernelSpec,
    profile: &Profile,
    times: &[f64],
    reps: usize,
    seed: u64,
    options: &McOptions,
) -> Result<ImpactCurve> {
    check_times(times)?;
    if reps < 2 {
        return domain(format!("need at least two replications, got {reps}"));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let horizon = (t_max * params.horizon).max(params.horizon);
    let paths: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut meta = simulate_metaorder(params, profile, seed, rep)?;
            meta.horizon = horizon;
            let stream = match options.variance_reduction {
                VarianceReduction::LabelSwap => meta,
                VarianceReduction::None => {
                    let buy = simulate_side(params, spec, horizon, seed, rep, Side::Buy, &options.engine)?;
                    let sell = simulate_side(params, spec, horizon, seed, rep, Side::Sell, &options.engine)?;
                    EventStream::merge(&[&buy, &sell, &meta])?
                }
            };
            Ok(rescaled_price_at(&stream, spec, params, times))
        })
        .collect::<Result<_>>()?;
    let mut acc = CurveAccumulator::new(times.len());
    paths.iter().for_each(|p| acc.push(p));
    let mi = acc.mean();
    let pmi = permanent(params.gamma, profile, times);
    let tmi = mi.iter().zip(&pmi).map(|(m, p)| m - p).collect();
    Ok(ImpactCurve {
        times: times.to_vec(),
        mi,
        pmi,
        tmi,
        std_error: Some(acc.std_error()),
        meta: CurveMeta {
            source: CurveSource::MonteCarlo { horizon: params.horizon, reps, seed },
            alpha: params.alpha,
            k: params.k,
            gamma: params.gamma,
            profile: profile.id(),
        },
    })
}

/// Fitting window for [`fit_power_law`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWindow {
    /// `t ∈ [0.1, 1]`, where `tmi ~ t^{1-α}` for a flat profile.
    Execution,
    /// `t ∈ [5, 50]`, where `tmi ~ t^{-α}` dominates.
    Decay,
}

impl FitWindow {
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::Execution => (0.1, 1.0),
            Self::Decay => (5.0, 50.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub std_error: f64,
    pub points: usize,
}

/// Least-squares slope of `log tmi` against `log t` over the window.
pub fn fit_power_law(curve: &ImpactCurve, window: FitWindow) -> Result<PowerLawFit> {
    let (lo, hi) = window.range();
    let (x, y): (Vec<f64>, Vec<f64>) = curve
        .times
        .iter()
        .zip(&curve.tmi)
        .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
        .map(|(t, m)| (*t, *m))
        .collect::<Vec<_>>()
        .into_iter()
        .unzip();
    if x.iter().zip(&y).any(|(_, m)| !(*m > 0.0)) {
        return Err(Error::Fit("transient impact must be positive on the fitting window".into()));
    }
    if x.len() < 5 {
        return Err(Error::Fit(format!("only {} points in the window [{lo}, {hi}]", x.len())));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit { exponent: fit.slope, std_error: fit.slope_se, points: fit.points })
}
