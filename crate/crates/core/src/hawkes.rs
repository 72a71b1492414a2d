//! Hawkes order flow, metaorder injection and the microscopic price.
//!
//! Three engines simulate a Hawkes process with baseline `μ` and kernel `a φ`
//! started from an empty history:
//!
//! * [`Engine::Exact`]: Ogata thinning, recomputing the intensity from the
//!   whole history at every candidate point;
//! * [`Engine::Soe`]: the same thinning with a sum-of-exponentials kernel
//!   whose intensity updates in `O(terms)`;
//! * [`Engine::Branching`]: the cluster representation (immigrants at rate
//!   `μ`, each event with a Poisson(`a`) number of children delayed by `φ`),
//!   exact and linear in the number of events.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{domain, Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::kernels::{KernelSpec, MarketParams};
use crate::profile::Profile;
use crate::rng::{open_uniform, stream_rng, StreamKind};
use crate::soe::SoeKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
    Meta,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
            Side::Meta => "meta",
        }
    }

    /// Price direction of an order on this side.
    pub fn sign(&self) -> f64 {
        match self {
            Side::Buy | Side::Meta => 1.0,
            Side::Sell => -1.0,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "buy" => Some(Side::Buy),
            "sell" => Some(Side::Sell),
            "meta" => Some(Side::Meta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub side: Side,
}

/// Time-ordered events on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub events: Vec<Event>,
    pub horizon: f64,
}

/// Metadata written in the `# seed=… T=… alpha=…` header of output files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunHeader {
    pub seed: u64,
    pub horizon: f64,
    pub alpha: f64,
}

impl RunHeader {
    pub fn line(&self) -> String {
        format!("# seed={} T={} alpha={}", self.seed, self.horizon, self.alpha)
    }
}

impl EventStream {
    pub fn empty(horizon: f64) -> Self {
        Self { events: Vec::new(), horizon }
    }

    pub fn from_times(times: &[f64], side: Side, horizon: f64) -> Self {
        Self { events: times.iter().map(|&time| Event { time, side }).collect(), horizon }
    }

    /// Merges streams into one time-ordered stream.
    pub fn merge(streams: &[&EventStream]) -> Result<Self> {
        let horizon = streams.iter().map(|s| s.horizon).fold(0.0, f64::max);
        if streams.iter().any(|s| s.horizon != horizon) {
            return domain("merged streams must share a horizon");
        }
        let mut events: Vec<Event> = streams.iter().flat_map(|s| s.events.iter().copied()).collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self { events, horizon })
    }

    pub fn times(&self, side: Side) -> Vec<f64> {
        self.events.iter().filter(|e| e.side == side).map(|e| e.time).collect()
    }

    pub fn count(&self, side: Side) -> usize {
        self.events.iter().filter(|e| e.side == side).count()
    }

    /// Number of `side` events in `[0, t]`.
    pub fn count_until(&self, side: Side, t: f64) -> usize {
        self.events.iter().filter(|e| e.side == side && e.time <= t).count()
    }

    /// Exchanges the buy and sell labels.
    pub fn swap_sides(&self) -> Self {
        let events = self
            .events
            .iter()
            .map(|e| Event {
                time: e.time,
                side: match e.side {
                    Side::Buy => Side::Sell,
                    Side::Sell => Side::Buy,
                    Side::Meta => Side::Meta,
                },
            })
            .collect();
        Self { events, horizon: self.horizon }
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: &RunHeader) -> Result<()> {
        writeln!(out, "{}", header.line())?;
        writeln!(out, "time,side")?;
        for e in &self.events {
            writeln!(out, "{},{}", e.time, e.side.as_str())?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str, horizon: f64) -> Result<Self> {
        let mut events = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "time,side" {
                continue;
            }
            let (t, s) = line.split_once(',').ok_or_else(|| Error::Usage(format!("bad event row '{line}'")))?;
            let time: f64 = t.parse().map_err(|_| Error::Usage(format!("bad event time '{t}'")))?;
            let side = Side::parse(s).ok_or_else(|| Error::Usage(format!("bad event side '{s}'")))?;
            events.push(Event { time, side });
        }
        Ok(Self { events, horizon })
    }
}

/// A Hawkes process with baseline `mu` and kernel `a_t φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HawkesModel {
    pub spec: KernelSpec,
    pub a_t: f64,
    pub mu: f64,
}

impl HawkesModel {
    pub fn new(spec: KernelSpec, a_t: f64, mu: f64) -> Result<Self> {
        if !(a_t >= 0.0) {
            return domain(format!("branching ratio must be non-negative, got {a_t}"));
        }
        if a_t >= 1.0 {
            return Err(Error::Instability { a_t });
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return domain(format!("baseline intensity must be non-negative, got {mu}"));
        }
        Ok(Self { spec, a_t, mu })
    }

    pub fn from_params(params: &MarketParams, spec: &KernelSpec) -> Result<Self> {
        Self::new(*spec, params.a_t, params.mu_t)
    }

    /// `λ(t) = μ + a Σ_{t_i < t} φ(t - t_i)` for sorted `times`.
    pub fn intensity(&self, times: &[f64], t: f64) -> f64 {
        let mut s = 0.0;
        for &ti in times {
            if ti >= t {
                break;
            }
            s += self.spec.phi_unchecked(t - ti);
        }
        self.mu + self.a_t * s
    }

    /// `∫_0^t λ = μ t + a Σ_{t_i < t} (1 - tail(t - t_i))`, in closed form.
    pub fn compensator(&self, times: &[f64], t: f64) -> f64 {
        let mut s = 0.0;
        for &ti in times {
            if ti >= t {
                break;
            }
            s += 1.0 - self.spec.tail_unchecked(t - ti);
        }
        self.mu * t + self.a_t * s
    }

    /// Event times on `[0, horizon]`.
    pub fn simulate<R: Rng + ?Sized>(&self, horizon: f64, engine: &Engine, rng: &mut R) -> Vec<f64> {
        match engine {
            Engine::Exact => self.simulate_exact(horizon, rng),
            Engine::Soe(k) => self.simulate_soe(k, horizon, rng),
            Engine::Branching => self.simulate_branching(horizon, rng),
        }
    }

    fn simulate_exact<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Vec<f64> {
        let mut times = Vec::new();
        let jump = self.a_t * self.spec.phi_unchecked(0.0);
        let mut t = 0.0;
        // φ is non-increasing, so the intensity right after the last point bounds it until the next one.
        let mut bound = self.mu;
        while bound > 0.0 {
            let e: f64 = Exp1.sample(rng);
            t += e / bound;
            if t > horizon {
                break;
            }
            let lam = self.intensity(&times, t);
            if rng.random::<f64>() * bound <= lam {
                times.push(t);
                bound = lam + jump;
            } else {
                bound = lam;
            }
        }
        times
    }

    fn simulate_soe<R: Rng + ?Sized>(&self, kernel: &SoeKernel, horizon: f64, rng: &mut R) -> Vec<f64> {
        let mut times = Vec::new();
        let mut state = vec![0.0; kernel.len()];
        let mut t = 0.0;
        let mut last = 0.0;
        let jump = self.a_t * kernel.weights.iter().sum::<f64>();
        let mut bound = self.mu;
        while bound > 0.0 {
            let e: f64 = Exp1.sample(rng);
            t += e / bound;
            if t > horizon {
                break;
            }
            let dt = t - last;
            let mut excitation = 0.0;
            for ((s, r), w) in state.iter_mut().zip(&kernel.rates).zip(&kernel.weights) {
                *s *= (-r * dt).exp();
                excitation += w * *s;
            }
            last = t;
            let lam = self.mu + self.a_t * excitation;
            if rng.random::<f64>() * bound <= lam {
                times.push(t);
                state.iter_mut().for_each(|s| *s += 1.0);
                bound = lam + jump;
            } else {
                bound = lam;
            }
        }
        times
    }

    fn simulate_branching<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Vec<f64> {
        let mut times = Vec::new();
        let immigrants = poisson_count(self.mu * horizon, rng);
        let mut pending: Vec<f64> = (0..immigrants).map(|_| horizon * rng.random::<f64>()).collect();
        let offspring = (self.a_t > 0.0).then(|| Poisson::new(self.a_t).expect("0 < a < 1"));
        while let Some(parent) = pending.pop() {
            times.push(parent);
            let Some(dist) = offspring.as_ref() else { continue };
            let children = dist.sample(rng) as u64;
            for _ in 0..children {
                let child = parent + self.spec.delay_from_uniform(open_uniform(rng));
                if child <= horizon {
                    pending.push(child);
                }
            }
        }
        times.sort_by(f64::total_cmp);
        times
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Simulation engine for [`HawkesModel::simulate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Exact,
    Soe(SoeKernel),
    Branching,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Soe(_) => "soe",
            Engine::Branching => "branching",
        }
    }
}

/// One Hawkes realisation with the parameters' `μ^T` and `a^T φ` on
/// `[0, horizon]`, by exact thinning; the events are labelled `buy`.
pub fn simulate_hawkes(params: &MarketParams, spec: &KernelSpec, horizon: f64, seed: u64) -> Result<EventStream> {
    simulate_side(params, spec, horizon, seed, 0, Side::Buy, &Engine::Exact)
}

/// One side of the order flow for replication `replication`.
pub fn simulate_side(
    params: &MarketParams,
    spec: &KernelSpec,
    horizon: f64,
    seed: u64,
    replication: u64,
    side: Side,
    engine: &Engine,
) -> Result<EventStream> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain(format!("simulation horizon must be positive, got {horizon}"));
    }
    let model = HawkesModel::from_params(params, spec)?;
    let kind = match side {
        Side::Buy => StreamKind::Buy,
        Side::Sell => StreamKind::Sell,
        Side::Meta => StreamKind::Meta,
    };
    let mut rng = stream_rng(seed, replication, kind);
    Ok(EventStream::from_times(&model.simulate(horizon, engine, &mut rng), side, horizon))
}

/// Inhomogeneous Poisson times on `[0, horizon]` by thinning against `bound ≥ ν`.
pub fn simulate_poisson<R: Rng + ?Sized>(
    intensity: impl Fn(f64) -> f64,
    bound: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(bound >= 0.0 && bound.is_finite()) {
        return domain(format!("thinning bound must be finite and non-negative, got {bound}"));
    }
    let mut times = Vec::new();
    if bound == 0.0 {
        return Ok(times);
    }
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e / bound;
        if t > horizon {
            return Ok(times);
        }
        let nu = intensity(t);
        if !(nu >= 0.0) || nu > bound * (1.0 + 1e-12) {
            return domain(format!("intensity {nu} at t = {t} is negative or exceeds the bound {bound}"));
        }
        if rng.random::<f64>() * bound <= nu {
            times.push(t);
        }
    }
}

/// Metaorder child orders: Poisson with intensity `I^T f(t / T)` on `[0, T]`.
pub fn simulate_metaorder(params: &MarketParams, profile: &Profile, seed: u64, replication: u64) -> Result<EventStream> {
    let mut rng = stream_rng(seed, replication, StreamKind::Meta);
    simulate_metaorder_with(params, profile, &mut rng)
}

pub fn simulate_metaorder_with<R: Rng + ?Sized>(
    params: &MarketParams,
    profile: &Profile,
    rng: &mut R,
) -> Result<EventStream> {
    let t_big = params.horizon;
    let scale = params.i_t();
    let times = simulate_poisson(|t| scale * profile.eval(t / t_big), scale * profile.sup(), t_big, rng)?;
    Ok(EventStream::from_times(&times, Side::Meta, t_big))
}

/// Buy and sell Hawkes streams (and, if `profile` is given, the metaorder)
/// of one replication, merged.
pub fn simulate_order_flow(
    params: &MarketParams,
    spec: &KernelSpec,
    horizon: f64,
    seed: u64,
    replication: u64,
    engine: &Engine,
    profile: Option<&Profile>,
) -> Result<EventStream> {
    let buy = simulate_side(params, spec, horizon, seed, replication, Side::Buy, engine)?;
    let sell = simulate_side(params, spec, horizon, seed, replication, Side::Sell, engine)?;
    let mut parts = vec![buy, sell];
    if let Some(f) = profile {
        let mut meta = simulate_metaorder(params, f, seed, replication)?;
        meta.horizon = horizon;
        parts.push(meta);
    }
    EventStream::merge(&parts.iter().collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceScale {
    Micro,
    Rescaled,
}

/// Price sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub scale: PriceScale,
}

impl PricePath {
    pub fn write_csv<W: Write>(&self, mut out: W, header: &RunHeader) -> Result<()> {
        writeln!(out, "{}", header.line())?;
        writeln!(out, "t,price")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.t(i), v)?;
        }
        Ok(())
    }

    pub fn sup_distance(&self, other: &PricePath) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn check_grid(stream: &EventStream, grid: &UniformGrid) -> Result<()> {
    if grid.t_max() > stream.horizon * (1.0 + 1e-12) {
        return domain(format!("price grid ends at {} beyond the stream horizon {}", grid.t_max(), stream.horizon));
    }
    Ok(())
}

/// `P^T_t = Σ_{t_i ≤ t} ±ξ^T(t - t_i)`, buys and metaorder `+`, sells `-`.
pub fn price_path(stream: &EventStream, spec: &KernelSpec, params: &MarketParams, grid: UniformGrid) -> Result<PricePath> {
    check_grid(stream, &grid)?;
    if params.a_t >= 1.0 {
        return Err(Error::Instability { a_t: params.a_t });
    }
    let c = params.a_t / (1.0 - params.a_t);
    let h = grid.step();
    let mut values = vec![0.0; grid.len()];
    for e in &stream.events {
        let first = (e.time / h).ceil() as usize;
        let sign = e.side.sign();
        for (j, v) in values.iter_mut().enumerate().skip(first) {
            let lag = grid.t(j) - e.time;
            if lag < 0.0 {
                continue;
            }
            *v += sign * (1.0 + c * spec.tail_unchecked(lag));
        }
    }
    Ok(PricePath { grid, values, scale: PriceScale::Micro })
}

/// The same price through `P^T = (1 - a^T)^{-1} (M^a - M^b)` with
/// `M = N - ∫λ`. Only buy and sell events are allowed.
pub fn price_path_martingale(
    stream: &EventStream,
    spec: &KernelSpec,
    params: &MarketParams,
    grid: UniformGrid,
) -> Result<PricePath> {
    check_grid(stream, &grid)?;
    if stream.events.iter().any(|e| e.side == Side::Meta) {
        return domain("the martingale representation covers the Hawkes flow only; remove metaorder events");
    }
    let model = HawkesModel::from_params(params, spec)?;
    let buys = stream.times(Side::Buy);
    let sells = stream.times(Side::Sell);
    let count = |times: &[f64], t: f64| times.partition_point(|&s| s <= t) as f64;
    let values = grid
        .points()
        .map(|t| {
            let ma = count(&buys, t) - model.compensator(&buys, t);
            let mb = count(&sells, t) - model.compensator(&sells, t);
            (ma - mb) / (1.0 - params.a_t)
        })
        .collect();
    Ok(PricePath { grid, values, scale: PriceScale::Micro })
}

/// `P̄^T_t = P^T_{tT} / (T β^T)` on the grid `t_i / T`.
pub fn rescale_price(path: &PricePath, params: &MarketParams) -> Result<PricePath> {
    if path.scale != PriceScale::Micro {
        return domain("path is already rescaled");
    }
    let t_big = params.horizon;
    let norm = t_big * params.beta_t();
    let grid = UniformGrid::with_step(path.grid.step() / t_big, path.grid.intervals())?;
    let values = path.values.iter().map(|v| v / norm).collect();
    Ok(PricePath { grid, values, scale: PriceScale::Rescaled })
}

/// Weight of one Hawkes event in the rescaled combined variance
/// `X^T = (X^{a,T} + X^{b,T}) / δ` with `X^{a,T}_t = (1 - a^T) N^a_{tT} / (T μ^T)`.
pub fn rescaled_variance_weight(params: &MarketParams) -> f64 {
    (1.0 - params.a_t) / (params.horizon * params.mu_t * params.delta)
}

/// `X^T` on a grid of rescaled times from the buy and sell events.
pub fn rescaled_variance(stream: &EventStream, params: &MarketParams, grid: UniformGrid) -> SampledFunction {
    let w = rescaled_variance_weight(params);
    let mut times: Vec<f64> =
        stream.events.iter().filter(|e| e.side != Side::Meta).map(|e| e.time / params.horizon).collect();
    times.sort_by(f64::total_cmp);
    SampledFunction::from_fn(grid, |t| w * times.partition_point(|&s| s <= t) as f64)
}

/// `∫_0^t h(t - s) dX^T_s`, summed over the buy and sell events.
pub fn rescaled_variance_phase(stream: &EventStream, params: &MarketParams, t: f64, h: impl Fn(f64) -> f64) -> f64 {
    let w = rescaled_variance_weight(params);
    stream
        .events
        .iter()
        .filter(|e| e.side != Side::Meta)
        .map(|e| e.time / params.horizon)
        .filter(|&s| s <= t)
        .map(|s| w * h(t - s))
        .sum()
}
