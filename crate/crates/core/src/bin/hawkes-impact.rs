use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hawkes_impact::experiment::{init_thread_pool, run_experiment, ExperimentConfig};
use hawkes_impact::grid::UniformGrid;
use hawkes_impact::hawkes::{price_path, simulate_order_flow, Engine, RunHeader};
use hawkes_impact::heston::{simulate_heston, HestonParams};
use hawkes_impact::impact::{analytic_mi, linear_times, macroscopic_mi, mc_mi, McOptions, VarianceReduction};
use hawkes_impact::kernels::{schedule, KernelSpec, MarketParams};
use hawkes_impact::mittag::ml_e;
use hawkes_impact::profile::Profile;
use hawkes_impact::riccati::{solve_for_test_function, TestFunction};
use hawkes_impact::soe::soe_fit;
use hawkes_impact::{Error, Result};

/// Nearly-unstable Hawkes order flow, market impact and rough Heston limits.
#[derive(Parser)]
#[command(name = "hawkes-impact", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mittag-Leffler functions.
    Ml {
        #[command(subcommand)]
        command: MlCommand,
    },
    /// Simulate buy/sell Hawkes flow (and a metaorder) and the price.
    Simulate(SimulateArgs),
    /// Market impact curves.
    Impact(ImpactArgs),
    /// Solve the Volterra Riccati equation for a test function.
    Riccati(RiccatiArgs),
    /// Simulate rough or hyper-rough Heston paths.
    Heston(HestonArgs),
    /// Run an experiment from a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum MlCommand {
    /// Print `E_{α,β}(z)` for each `z`.
    Eval {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        z: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Soe,
    Branching,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    PowerLaw,
    Exponential,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::PowerLaw)]
    kernel: KernelArg,
    #[arg(long = "T")]
    horizon: f64,
    /// Branching ratio; omit together with `--schedule`.
    #[arg(long = "aT", conflicts_with = "schedule")]
    a_t: Option<f64>,
    /// Baseline intensity used with `--aT`.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Use the near-instability schedule with `--K` and `--delta`.
    #[arg(long)]
    schedule: bool,
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// `flat` or a CSV of `x,f` rows.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    engine: EngineArg,
    #[arg(long, default_value_t = 12)]
    soe_terms: usize,
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ImpactMode {
    Analytic,
    Mc,
    Limit,
}

#[derive(Args)]
struct ImpactArgs {
    #[arg(long, value_enum)]
    mode: ImpactMode,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = EngineArg::Branching)]
    engine: EngineArg,
    /// Antithetic buy/sell label swap in Monte Carlo mode.
    #[arg(long)]
    label_swap: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RiccatiArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Test function, e.g. `linear:u=0.5` or `plateau:u=0.5,knee=1,width=0.2`.
    #[arg(long, default_value = "linear:u=0.5")]
    h: String,
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HestonArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, conflicts_with = "k")]
    lambda: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    paths: u64,
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn spec_for(kernel: KernelArg, alpha: f64) -> Result<KernelSpec> {
    match kernel {
        KernelArg::PowerLaw => KernelSpec::power_law(alpha),
        KernelArg::Exponential => Ok(KernelSpec::exponential()),
    }
}

fn profile_for(arg: Option<&str>) -> Result<Profile> {
    match arg {
        None | Some("flat") => Ok(Profile::Flat),
        Some(path) => Profile::from_csv(Path::new(path)),
    }
}

fn engine_for(arg: EngineArg, spec: &KernelSpec, horizon: f64, terms: usize) -> Result<Engine> {
    Ok(match arg {
        EngineArg::Exact => Engine::Exact,
        EngineArg::Soe => Engine::Soe(soe_fit(spec, terms, horizon)?),
        EngineArg::Branching => Engine::Branching,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn simulate(a: &SimulateArgs) -> Result<bool> {
    let spec = spec_for(a.kernel, a.alpha)?;
    let params: MarketParams = match (a.schedule, a.a_t) {
        (true, _) => schedule(a.horizon, &spec, a.k, a.delta, a.gamma)?,
        (false, Some(a_t)) => MarketParams::new(a.horizon, a_t, a.mu, a.gamma, &spec)?,
        (false, None) => return Err(Error::Usage("give either --aT or --schedule".into())),
    };
    let profile = if a.gamma > 0.0 { Some(profile_for(a.profile.as_deref())?) } else { None };
    let engine = engine_for(a.engine, &spec, a.horizon, a.soe_terms)?;
    let grid = UniformGrid::new(a.horizon, a.grid_points)?;
    let header = RunHeader { seed: a.seed, horizon: a.horizon, alpha: spec.alpha() };
    for rep in 0..a.reps {
        let flow = simulate_order_flow(&params, &spec, a.horizon, a.seed, rep, &engine, profile.as_ref())?;
        flow.write_csv(create(&a.out, &format!("events_{rep}.csv"))?, &header)?;
        price_path(&flow, &spec, &params, grid)?.write_csv(create(&a.out, &format!("price_{rep}.csv"))?, &header)?;
    }
    println!("aT={} muT={} K={} delta={} reps={}", params.a_t, params.mu_t, params.k, params.delta, a.reps);
    Ok(true)
}

fn impact(a: &ImpactArgs) -> Result<bool> {
    let profile = profile_for(a.profile.as_deref())?;
    let times = linear_times(a.t_max, a.grid_points.max(2));
    let curve = match a.mode {
        ImpactMode::Limit => macroscopic_mi(a.alpha, a.k, a.gamma, &profile, &times)?,
        ImpactMode::Analytic | ImpactMode::Mc => {
            let t_big = a.horizon.ok_or_else(|| Error::Usage("--T is required in analytic and mc modes".into()))?;
            let spec = KernelSpec::power_law(a.alpha)?;
            let params = schedule(t_big, &spec, a.k, a.delta, a.gamma)?;
            if a.mode == ImpactMode::Analytic {
                analytic_mi(&params, &spec, &profile, &times)?
            } else {
                let seed = a.seed.ok_or_else(|| Error::Usage("--seed is required in mc mode".into()))?;
                let horizon = t_big * a.t_max.max(1.0);
                let options = McOptions {
                    engine: engine_for(a.engine, &spec, horizon, 12)?,
                    variance_reduction: if a.label_swap { VarianceReduction::LabelSwap } else { VarianceReduction::None },
                };
                mc_mi(&params, &spec, &profile, &times, a.reps, seed, &options)?
            }
        }
    };
    let name = match a.mode {
        ImpactMode::Analytic => "impact_analytic.csv",
        ImpactMode::Mc => "impact_mc.csv",
        ImpactMode::Limit => "impact_limit.csv",
    };
    curve.write_csv(create(&a.out, name)?)?;
    if a.alpha == 0.5 {
        curve.write_csv(create(&a.out, "figure1.csv")?)?;
    }
    Ok(true)
}

fn riccati(a: &RiccatiArgs) -> Result<bool> {
    let h = TestFunction::parse(&a.h)?;
    let grid = UniformGrid::new(a.tmax, a.steps)?;
    let sol = solve_for_test_function(&h, a.alpha, a.lambda, a.delta, grid)?;
    sol.write_csv(create(&a.out, "riccati.csv")?)?;
    let k = sol.k_end();
    println!("K(h, {}) = {} {:+}i ({} Picard iterations)", a.tmax, k.re, k.im, sol.differences.len());
    Ok(true)
}

fn heston(a: &HestonArgs) -> Result<bool> {
    let params = match (a.lambda, a.k) {
        (Some(l), None) => HestonParams::new(a.alpha, l, a.delta)?,
        (None, Some(k)) => HestonParams::from_k(a.alpha, k, a.delta)?,
        _ => return Err(Error::Usage("give exactly one of --lambda and --K".into())),
    };
    let grid = UniformGrid::new(1.0, a.steps)?;
    let mut clamped = 0;
    for r in 0..a.paths {
        let path = simulate_heston(&params, grid, a.seed, r)?;
        clamped += path.variance.clamped;
        path.variance.write_csv(create(&a.out, &format!("variance_{r}.csv"))?)?;
        path.price.write_csv(create(&a.out, &format!("price_{r}.csv"))?)?;
    }
    println!("lambda={} paths={} clamped_steps={clamped}", params.lambda, a.paths);
    Ok(true)
}

fn run(config: &Path) -> Result<bool> {
    let config = ExperimentConfig::from_path(config)?;
    let artifact = run_experiment(&config)?;
    for (name, ok) in &artifact.flags {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    Ok(artifact.passed())
}

fn dispatch(cli: &Cli) -> Result<bool> {
    init_thread_pool()?;
    match &cli.command {
        Command::Ml { command: MlCommand::Eval { alpha, beta, z } } => {
            let mut out = io::stdout().lock();
            writeln!(out, "z,value")?;
            for &x in z {
                writeln!(out, "{x},{}", ml_e(*alpha, *beta, x)?)?;
            }
            Ok(true)
        }
        Command::Simulate(a) => simulate(a),
        Command::Impact(a) => impact(a),
        Command::Riccati(a) => riccati(a),
        Command::Heston(a) => heston(a),
        Command::Run { config } => run(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Usage(_) | Error::Domain(_) | Error::Schedule(_) | Error::Regime(_) | Error::Json(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
