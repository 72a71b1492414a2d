//! Named experiments driven by a JSON configuration.
//!
//! ```json
//! { "experiment": "figure1_impact",
//!   "parameters": { "alpha": 0.5, "K": 1, "gamma": 0.1, "seed": 1 },
//!   "output_dir": "out/figure1" }
//! ```
//!
//! Replications run on the rayon pool and are folded in replication order,
//! so tables do not depend on the number of threads.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hawkes::{
    price_path, rescale_price, rescaled_variance_phase, rescaled_variance_weight, simulate_order_flow,
    Engine, Side,
};
use crate::heston::{roughness_estimate, simulate_heston, HestonParams};
use crate::impact::{
    analytic_mi, fit_power_law, linear_times, macroscopic_mi, mc_mi, FitWindow, ImpactCurve, McOptions,
    VarianceReduction,
};
use crate::kernels::{schedule, KernelSpec};
use crate::profile::Profile;
use crate::riccati::{char_from_phases, char_functional_mc, solve_for_test_function, TestFunction};
use crate::stats::{ks_distance, mean_and_se};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HAWKES_IMPACT_THREADS";

/// Builds the global rayon pool, honouring [`THREADS_ENV`]. Returns the
/// number of workers; calling it twice keeps the first pool.
pub fn init_thread_pool() -> Result<usize> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    let _ = builder.build_global();
    Ok(rayon::current_num_threads())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Figure1Impact,
    ImpactConvergence,
    CharFunctionBridge,
    RoughnessSweep,
    MicroMacroPrice,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        Self::Figure1Impact,
        Self::ImpactConvergence,
        Self::CharFunctionBridge,
        Self::RoughnessSweep,
        Self::MicroMacroPrice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Figure1Impact => "figure1_impact",
            Self::ImpactConvergence => "impact_convergence",
            Self::CharFunctionBridge => "char_function_bridge",
            Self::RoughnessSweep => "roughness_sweep",
            Self::MicroMacroPrice => "micro_macro_price",
        }
    }

    /// Required and optional parameter keys.
    fn keys(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Self::Figure1Impact => (&["alpha", "K", "gamma", "seed"], &["T", "reps", "t_max", "grid_points"]),
            Self::ImpactConvergence => (&["alpha", "K", "gamma", "T", "seed"], &["grid_points"]),
            Self::CharFunctionBridge => (&["alpha", "K", "delta", "u", "reps", "steps", "seed"], &["T"]),
            Self::RoughnessSweep => (&["alpha", "K", "delta", "reps", "steps", "seed"], &["q", "max_lag"]),
            Self::MicroMacroPrice => (&["alpha", "K", "delta", "T", "reps", "steps", "seed"], &[]),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment '{s}'")))
    }
}

/// A parsed and schema-checked experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Scalars or lists of scalars, keyed by name.
    pub parameters: BTreeMap<String, Value>,
    pub output_dir: PathBuf,
}

#[derive(Deserialize)]
struct RawConfig {
    experiment: String,
    parameters: BTreeMap<String, Value>,
    output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Usage(format!("invalid configuration: {e}")))?;
        let experiment: ExperimentKind = raw.experiment.parse()?;
        let config = Self { experiment, parameters: raw.parameters, output_dir: raw.output_dir };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let (required, optional) = self.experiment.keys();
        for key in required {
            if !self.parameters.contains_key(*key) {
                return Err(Error::Usage(format!("{} needs parameter '{key}'", self.experiment)));
            }
        }
        for (key, value) in &self.parameters {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(Error::Usage(format!("{} does not take parameter '{key}'", self.experiment)));
            }
            let scalars_ok = match value {
                Value::Number(_) => true,
                Value::Array(items) => !items.is_empty() && items.iter().all(Value::is_number),
                _ => false,
            };
            if !scalars_ok {
                return Err(Error::Usage(format!("parameter '{key}' must be a number or a list of numbers")));
            }
        }
        Ok(())
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.parameters.get(key) {
            Some(Value::Number(n)) => Ok(vec![n.as_f64().expect("finite JSON number")]),
            Some(Value::Array(items)) => Ok(items.iter().filter_map(Value::as_f64).collect()),
            _ => Err(Error::Usage(format!("missing parameter '{key}'"))),
        }
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        match self.list(key)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Usage(format!("parameter '{key}' must be a single number"))),
        }
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.parameters.contains_key(key) {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.scalar(key)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::Usage(format!("parameter '{key}' must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn seed(&self) -> Result<u64> {
        let v = self.scalar("seed")?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Usage(format!("seed must be a non-negative integer, got {v}")));
        }
        Ok(v as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub timestamp: String,
}

/// Everything one run leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunArtifact {
    pub manifest: Manifest,
    /// Table file names inside the output directory.
    pub tables: Vec<String>,
    pub summary: Value,
    pub flags: BTreeMap<String, bool>,
}

impl RunArtifact {
    pub fn passed(&self) -> bool {
        self.flags.values().all(|v| *v)
    }
}

struct Outputs {
    dir: PathBuf,
    tables: Vec<String>,
    summary: serde_json::Map<String, Value>,
    flags: BTreeMap<String, bool>,
}

impl Outputs {
    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.tables.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn curve(&mut self, name: &str, curve: &ImpactCurve) -> Result<()> {
        let out = self.file(name)?;
        curve.write_csv(out)
    }

    fn flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.to_string(), value);
    }

    fn put(&mut self, name: &str, value: Value) {
        self.summary.insert(name.to_string(), value);
    }
}

/// Runs the experiment and writes `manifest.json`, `summary.json` and its tables.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifact> {
    fs::create_dir_all(&config.output_dir)?;
    let mut out = Outputs {
        dir: config.output_dir.clone(),
        tables: Vec::new(),
        summary: serde_json::Map::new(),
        flags: BTreeMap::new(),
    };
    match config.experiment {
        ExperimentKind::Figure1Impact => figure1(config, &mut out)?,
        ExperimentKind::ImpactConvergence => convergence(config, &mut out)?,
        ExperimentKind::CharFunctionBridge => bridge(config, &mut out)?,
        ExperimentKind::RoughnessSweep => roughness(config, &mut out)?,
        ExperimentKind::MicroMacroPrice => micro_macro(config, &mut out)?,
    }
    let artifact = RunArtifact {
        manifest: Manifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
        tables: out.tables,
        summary: Value::Object(out.summary),
        flags: out.flags,
    };
    serde_json::to_writer_pretty(File::create(config.output_dir.join("manifest.json"))?, &artifact.manifest)?;
    let summary = json!({
        "experiment": config.experiment.name(),
        "tables": artifact.tables,
        "results": artifact.summary,
        "flags": artifact.flags,
        "pass": artifact.passed(),
    });
    serde_json::to_writer_pretty(File::create(config.output_dir.join("summary.json"))?, &summary)?;
    Ok(artifact)
}

fn is_concave_increasing(xs: &[f64], ys: &[f64], slack: f64) -> bool {
    let rising = ys.windows(2).all(|w| w[1] >= w[0] - slack);
    let concave = (1..xs.len().saturating_sub(1)).all(|i| {
        let s0 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        let s1 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        s1 <= s0 + slack / (xs[i + 1] - xs[i])
    });
    rising && concave
}

fn is_decreasing(ys: &[f64], slack: f64) -> bool {
    ys.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Checks the Figure-1 shape of `mi`: concave rise on `[0, 1]`, decay after.
pub fn figure1_shape(curve: &ImpactCurve, slack: f64) -> bool {
    let split = curve.times.partition_point(|&t| t <= 1.0);
    let (t_up, m_up) = (&curve.times[..split], &curve.mi[..split]);
    let after = &curve.mi[split.saturating_sub(1)..];
    is_concave_increasing(t_up, m_up, slack) && is_decreasing(after, slack)
}

fn figure1(c: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (alpha, k, gamma) = (c.scalar("alpha")?, c.scalar("K")?, c.scalar("gamma")?);
    let t_max = c.scalar_or("t_max", 5.0)?;
    let n = c.scalar_or("grid_points", 101.0)? as usize;
    let times = linear_times(t_max, n.max(3));
    let limit = macroscopic_mi(alpha, k, gamma, &Profile::Flat, &times)?;
    out.curve("limit.csv", &limit)?;
    out.curve("figure1.csv", &limit)?;
    out.flag("limit_shape", figure1_shape(&limit, 1e-12));
    if alpha < 1.0 {
        let fit = fit_power_law(&limit, FitWindow::Execution)?;
        out.put("limit_execution_exponent", json!(fit.exponent));
    }
    if c.parameters.contains_key("T") {
        let spec = KernelSpec::power_law(alpha)?;
        let params = schedule(c.scalar("T")?, &spec, k, 1.0, gamma)?;
        let analytic = analytic_mi(&params, &spec, &Profile::Flat, &times)?;
        out.curve("analytic.csv", &analytic)?;
        out.put("analytic_sup_distance_to_limit", json!(analytic.sup_distance(&limit)));
        if c.parameters.contains_key("reps") {
            let options = McOptions { engine: Engine::Branching, variance_reduction: VarianceReduction::LabelSwap };
            let mc = mc_mi(&params, &spec, &Profile::Flat, &times, c.count("reps")?, c.seed()?, &options)?;
            out.curve("mc.csv", &mc)?;
            let se = mc.std_error.as_ref().expect("mc curves carry errors");
            let worst = mc.mi.iter().zip(&analytic.mi).zip(se).map(|((m, a), s)| (m - a).abs() / s).fold(0.0, f64::max);
            out.put("mc_max_z_vs_analytic", json!(worst));
            out.flag("mc_within_3se", worst <= 3.0);
            let fit = fit_power_law(&mc, FitWindow::Execution)?;
            out.put("mc_execution_exponent", json!(fit.exponent));
            out.flag("mc_execution_exponent", (fit.exponent - (1.0 - alpha)).abs() <= 0.1);
        }
    }
    Ok(())
}

fn convergence(c: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (k, gamma) = (c.scalar("K")?, c.scalar("gamma")?);
    let n = c.scalar_or("grid_points", 50.0)? as usize;
    let times = linear_times(3.0, n.max(3));
    let mut rows = Vec::new();
    let mut monotone = true;
    for alpha in c.list("alpha")? {
        let spec = KernelSpec::power_law(alpha)?;
        let limit = macroscopic_mi(alpha, k, gamma, &Profile::Flat, &times)?;
        let mut previous = f64::INFINITY;
        for t_big in c.list("T")? {
            let params = schedule(t_big, &spec, k, 1.0, gamma)?;
            let d = analytic_mi(&params, &spec, &Profile::Flat, &times)?.sup_distance(&limit);
            monotone &= d < previous;
            previous = d;
            rows.push(json!({ "alpha": alpha, "T": t_big, "sup_distance": d }));
        }
    }
    {
        use std::io::Write;
        let mut f = out.file("convergence.csv")?;
        writeln!(f, "alpha,T,sup_distance")?;
        for r in &rows {
            writeln!(f, "{},{},{}", r["alpha"], r["T"], r["sup_distance"])?;
        }
    }
    out.put("distances", Value::Array(rows));
    out.flag("monotone_in_T", monotone);
    Ok(())
}

fn bridge(c: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (k, delta, u) = (c.scalar("K")?, c.scalar("delta")?, c.scalar("u")?);
    let (reps, steps, seed) = (c.count("reps")?, c.count("steps")?, c.seed()?);
    let h = TestFunction::Linear { u };
    let mut rows = Vec::new();
    for alpha in c.list("alpha")? {
        let params = HestonParams::from_k(alpha, k, delta)?;
        let exact = solve_for_test_function(&h, alpha, params.lambda, delta, UniformGrid::new(1.0, 1000)?)?.k_end();
        let grid = UniformGrid::new(1.0, steps)?;
        let increments: Vec<Vec<f64>> = (0..reps as u64)
            .into_par_iter()
            .map(|r| Ok(simulate_heston(&params, grid, seed, r)?.variance.increments()))
            .collect::<Result<_>>()?;
        let mc = char_functional_mc(&increments, grid.step(), |t| h.eval(t))?;
        let z = (mc.value - exact).norm() / mc.std_error;
        out.flag(&format!("heston_alpha_{alpha}"), z <= 3.0);
        let mut row = json!({
            "alpha": alpha, "riccati": [exact.re, exact.im], "heston": [mc.value.re, mc.value.im],
            "heston_se": mc.std_error, "heston_z": z,
        });
        for t_big in c.list("T").unwrap_or_default() {
            let spec = KernelSpec::power_law(alpha)?;
            let p = schedule(t_big, &spec, k, delta, 0.0)?;
            let phases: Vec<f64> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let flow = simulate_order_flow(&p, &spec, t_big, seed, r, &Engine::Branching, None)?;
                    Ok(rescaled_variance_phase(&flow, &p, 1.0, |t| h.eval(t)))
                })
                .collect::<Result<_>>()?;
            let est = char_from_phases(&phases)?;
            let z = (est.value - exact).norm() / est.std_error;
            out.flag(&format!("hawkes_alpha_{alpha}_T_{t_big}"), z <= 3.0);
            row[format!("hawkes_T_{t_big}")] = json!({ "value": [est.value.re, est.value.im], "se": est.std_error, "z": z });
        }
        rows.push(row);
    }
    out.put("bridge", Value::Array(rows));
    Ok(())
}

/// Regularity of `X` from the moment of order `q` (default 16) over lags
/// `1, 2, 4, ..., max_lag` grid steps.
fn roughness(c: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (k, delta) = (c.scalar("K")?, c.scalar("delta")?);
    let (reps, steps, seed) = (c.count("reps")?, c.count("steps")?, c.seed()?);
    let q = c.scalar_or("q", 16.0)?;
    let max_lag = c.scalar_or("max_lag", 64.0)? as usize;
    let lags: Vec<usize> = std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(|l| *l <= max_lag).collect();
    let grid = UniformGrid::new(1.0, steps)?;
    let mut rows = Vec::new();
    for alpha in c.list("alpha")? {
        let params = HestonParams::from_k(alpha, k, delta)?;
        let paths: Vec<Vec<f64>> = (0..reps as u64)
            .into_par_iter()
            .map(|r| Ok(simulate_heston(&params, grid, seed, r)?.variance.x))
            .collect::<Result<_>>()?;
        let est = roughness_estimate(&paths, grid.step(), &[q], &lags)?[0];
        let target = (2.0 * alpha).min(1.0);
        out.flag(&format!("regularity_alpha_{alpha}"), (est.regularity - target).abs() <= 0.1);
        let smooth = est.regularity > 0.9;
        let rough = est.regularity < 0.95;
        out.flag(&format!("classification_alpha_{alpha}"), if alpha > 0.5 { smooth } else { rough });
        rows.push(json!({ "alpha": alpha, "q": q, "regularity": est.regularity, "se": est.std_error, "target": target }));
    }
    {
        use std::io::Write;
        let mut f = out.file("roughness.csv")?;
        writeln!(f, "alpha,q,regularity,stderr,target")?;
        for r in &rows {
            writeln!(f, "{},{},{},{},{}", r["alpha"], r["q"], r["regularity"], r["se"], r["target"])?;
        }
    }
    out.put("roughness", Value::Array(rows));
    Ok(())
}

fn micro_macro(c: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (alpha, k, delta, t_big) = (c.scalar("alpha")?, c.scalar("K")?, c.scalar("delta")?, c.scalar("T")?);
    let (reps, steps, seed) = (c.count("reps")?, c.count("steps")?, c.seed()?);
    let spec = KernelSpec::power_law(alpha)?;
    let p = schedule(t_big, &spec, k, delta, 0.0)?;
    let micro_grid = UniformGrid::new(t_big, 1)?;
    let draws: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let flow = simulate_order_flow(&p, &spec, t_big, seed, r, &Engine::Branching, None)?;
            let price = rescale_price(&price_path(&flow, &spec, &p, micro_grid)?, &p)?;
            let x1 = rescaled_variance_weight(&p) * (flow.count(Side::Buy) + flow.count(Side::Sell)) as f64;
            Ok((price.values[1], x1))
        })
        .collect::<Result<_>>()?;
    let hp = HestonParams::from_k(alpha, k, delta)?;
    let grid = UniformGrid::new(1.0, steps)?;
    let macro_draws: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_heston(&hp, grid, seed.wrapping_add(1), r)?;
            Ok((path.price.price[steps], path.variance.x[steps]))
        })
        .collect::<Result<_>>()?;
    let var = |v: &[f64]| {
        let (m, _) = mean_and_se(v)?;
        Ok::<f64, Error>(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64)
    };
    let micro_p: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let micro_x: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let macro_p: Vec<f64> = macro_draws.iter().map(|d| d.0).collect();
    let macro_x: Vec<f64> = macro_draws.iter().map(|d| d.1).collect();
    let (vm, vh) = (var(&micro_p)?, var(&macro_p)?);
    let ks = ks_distance(&micro_x, &macro_x)?;
    {
        use std::io::Write;
        let mut f = out.file("terminal_samples.csv")?;
        writeln!(f, "replication,micro_price,micro_x,macro_price,macro_x")?;
        for (i, (a, b)) in draws.iter().zip(&macro_draws).enumerate() {
            writeln!(f, "{i},{},{},{},{}", a.0, a.1, b.0, b.1)?;
        }
    }
    out.put("variance_ratio", json!(vm / vh));
    out.put("ks_x1", json!(ks));
    out.put(
        "settings",
        json!({ "T": t_big, "a_T": p.a_t, "mu_T": p.mu_t, "lambda": hp.lambda, "steps": steps, "reps": reps }),
    );
    out.flag("price_variance_within_10pct", (vm / vh - 1.0).abs() <= 0.1);
    Ok(())
}
