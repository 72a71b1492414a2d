//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always
//! printed. Exits non-zero only when a criterion outside `KNOWN_FAILURES`
//! fails.

use std::process::ExitCode;
use std::time::Instant;

use hawkes_impact::experiment::figure1_shape;
use hawkes_impact::grid::{SampledFunction, UniformGrid};
use hawkes_impact::hawkes::{rescaled_variance_phase, simulate_order_flow, simulate_poisson, Engine, HawkesModel};
use hawkes_impact::heston::{fractional_derivative, roughness_estimate, simulate_heston, HestonParams};
use hawkes_impact::impact::{
    analytic_mi, fit_power_law, linear_times, log_times, macroscopic_mi, mc_mi, FitWindow, ImpactCurve, McOptions,
    VarianceReduction,
};
use hawkes_impact::kernels::{resolvent_mass, resolvent_psi, schedule, KernelSpec};
use hawkes_impact::mittag::{ml_density, ml_e, MittagLefflerParams};
use hawkes_impact::profile::Profile;
use hawkes_impact::quad::{integrate, integrate_to_infinity};
use hawkes_impact::riccati::{char_from_phases, hawkes_char_fixed_point, solve_for_test_function, TestFunction};
use hawkes_impact::rng::{stream_rng, StreamKind};
use hawkes_impact::soe::soe_fit;
use hawkes_impact::stats::mean_and_se;
use num_complex::Complex64;
use rayon::prelude::*;

/// Criteria expected to fail at desk scale; see the README.
const KNOWN_FAILURES: &[u32] = &[6, 8];

const SEED: u64 = 20_240_601;

/// Label, function and a number attached to it (an integral or a time).
type Case = (&'static str, fn(f64) -> f64, f64);

struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, pass: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(id);
        }
    }
}

fn criterion_1(r: &mut Report) {
    let exp_err = (0..=1000)
        .map(|i| -5.0 + 0.01 * i as f64)
        .map(|x| (ml_e(1.0, 1.0, x).unwrap() - x.exp()).abs() / x.exp().max(1.0))
        .fold(0.0, f64::max);
    let mut laplace_err = 0.0f64;
    for (alpha, lambda, z) in [
        (0.3, 0.5, 0.7),
        (0.3, 1.0, 2.0),
        (0.3, 2.0, 5.0),
        (0.6, 0.5, 1.0),
        (0.6, 1.0, 0.3),
        (0.6, 2.0, 3.0),
        (0.9, 0.5, 2.5),
        (0.9, 1.0, 1.0),
        (0.9, 2.0, 0.5),
    ] {
        let p = MittagLefflerParams::new(alpha, lambda).unwrap();
        // t = v^{1/α} removes the t^{α-1} singularity of the density at 0.
        let body = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let t = v.powf(1.0 / alpha);
            (-z * t).exp() * ml_density(&p, t).unwrap() * t / (alpha * v)
        };
        let head = integrate(body, 0.0, 1.0, 1e-10, 1e-10, 2000).value;
        let tail = integrate_to_infinity(body, 1.0, 1.0, 1e-10, 1e-10).value;
        let expected = lambda / (lambda + z.powf(alpha));
        laplace_err = laplace_err.max((head + tail - expected).abs());
    }
    r.line(
        1,
        exp_err <= 1e-10 && laplace_err <= 1e-4,
        format!("E_1,1 vs exp max rel err {exp_err:.2e} (tol 1e-10); Laplace identity max err {laplace_err:.2e} (tol 1e-4)"),
    );
}

fn criterion_2(r: &mut Report) {
    let spec = KernelSpec::exponential();
    let grid = UniformGrid::new(10.0, 10_000).unwrap();
    let mut sup = 0.0f64;
    let mut mass_err = 0.0f64;
    for a in [0.3, 0.5, 0.9] {
        let psi = resolvent_psi(&spec, a, grid).unwrap();
        for (t, v) in grid.points().zip(&psi.values) {
            sup = sup.max((v - a * (-(1.0 - a) * t).exp()).abs());
        }
        let m = resolvent_mass(&spec, a, &psi).unwrap();
        mass_err = mass_err.max((m / (a / (1.0 - a)) - 1.0).abs());
    }
    r.line(
        2,
        sup <= 1e-5 && mass_err <= 0.01,
        format!("sup |ψ - a e^(-(1-a)t)| = {sup:.2e} (tol 1e-5); max relative mass error {mass_err:.2e} (tol 1e-2)"),
    );
}

fn max_se(c: &ImpactCurve) -> f64 {
    c.std_error.as_ref().unwrap().iter().copied().fold(0.0, f64::max)
}

fn criterion_3(r: &mut Report) {
    let (alpha, k, gamma) = (0.5, 1.0, 0.1);
    let flat = Profile::Flat;
    let unit = linear_times(1.0, 101);
    let limit = macroscopic_mi(alpha, k, gamma, &flat, &unit[1..]).unwrap();
    let limit_err = limit.times.iter().zip(&limit.tmi).map(|(t, m)| (m - gamma * k * t.sqrt()).abs()).fold(0.0, f64::max);

    let spec = KernelSpec::power_law(alpha).unwrap();
    let params = schedule(1e4, &spec, k, 1.0, gamma).unwrap();
    let options = McOptions { engine: Engine::Branching, variance_reduction: VarianceReduction::LabelSwap };
    let shape_times = linear_times(3.0, 61);
    let mc = mc_mi(&params, &spec, &flat, &shape_times, 5000, SEED, &options).unwrap();
    let shape = figure1_shape(&mc, 3.0 * max_se(&mc));

    let fit_times = log_times(0.1, 50.0, 60);
    let mc_fit = mc_mi(&params, &spec, &flat, &fit_times, 5000, SEED + 1, &options).unwrap();
    let exec = fit_power_law(&mc_fit, FitWindow::Execution).unwrap();
    let decay = fit_power_law(&mc_fit, FitWindow::Decay).unwrap();
    let limit_decay = fit_power_law(&macroscopic_mi(alpha, k, gamma, &flat, &fit_times).unwrap(), FitWindow::Decay).unwrap();
    let pass = limit_err <= 1e-6
        && shape
        && (exec.exponent - (1.0 - alpha)).abs() <= 0.1
        && (decay.exponent + alpha).abs() <= 0.1;
    r.line(
        3,
        pass,
        format!(
            "limit tmi vs γK√t err {limit_err:.2e} (tol 1e-6); MC shape concave-then-decreasing: {shape}; \
             execution exponent {:.4} (0.5 ± 0.1); decay slope {:.4} ± {:.4} vs tail -α = -0.5 (± 0.1), limit curve {:.4}",
            exec.exponent, decay.exponent, decay.std_error, limit_decay.exponent
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let flat = Profile::Flat;
    let times = linear_times(4.0, 81);
    let spec = KernelSpec::power_law(0.5).unwrap();
    let p1 = schedule(1e4, &spec, 1.0, 1.0, 0.1).unwrap();
    let p2 = p1.with_gamma(0.2);
    let a1 = analytic_mi(&p1, &spec, &flat, &times).unwrap();
    let a2 = analytic_mi(&p2, &spec, &flat, &times).unwrap();
    let l1 = macroscopic_mi(0.5, 1.0, 0.1, &flat, &times).unwrap();
    let l2 = macroscopic_mi(0.5, 1.0, 0.2, &flat, &times).unwrap();
    let rel = |x: &ImpactCurve, y: &ImpactCurve| {
        x.mi.iter().zip(&y.mi).map(|(a, b)| (b - 2.0 * a).abs() / a.abs().max(1e-300)).fold(0.0, f64::max)
    };
    let doubling = rel(&a1, &a2).max(rel(&l1, &l2));
    let flat_pmi = [&a1, &l1]
        .iter()
        .flat_map(|c| c.times.iter().zip(&c.pmi).filter(|(t, _)| **t >= 1.0).map(|(_, p)| (p - 0.1f64).abs()))
        .fold(0.0, f64::max);
    r.line(
        4,
        doubling <= 1e-12 && flat_pmi <= 1e-12,
        format!("max relative deviation of mi(2γ) from 2 mi(γ) {doubling:.1e}; max |pmi - γ| after completion {flat_pmi:.1e}"),
    );
}

/// Classical Riccati `g' = g²/4 + 2 i h(t) - g` (α = 1, λ = 1, δ = 1) by RK4.
fn riccati_rk4(u: f64, t_max: f64, steps: usize) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let rhs = |t: f64, g: Complex64| g * g / 4.0 + 2.0 * i * u * t - g;
    let h = t_max / steps as f64;
    let mut g = Complex64::new(0.0, 0.0);
    let mut out = vec![g];
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(t, g);
        let k2 = rhs(t + h / 2.0, g + k1 * (h / 2.0));
        let k3 = rhs(t + h / 2.0, g + k2 * (h / 2.0));
        let k4 = rhs(t + h, g + k3 * h);
        g += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        out.push(g);
    }
    out
}

fn criterion_5(r: &mut Report) {
    let grid = UniformGrid::new(2.0, 400).unwrap();
    let sol = solve_for_test_function(&TestFunction::Linear { u: 0.5 }, 1.0, 1.0, 1.0, grid).unwrap();
    let ode = riccati_rk4(0.5, 2.0, 4000);
    let err = sol.g.iter().enumerate().map(|(j, g)| (g - ode[10 * j]).norm()).fold(0.0, f64::max);
    r.line(5, err <= 1e-4, format!("sup |g_volterra - g_rk4| = {err:.2e} on [0, 2] (tol 1e-4)"));
}

fn criterion_6(r: &mut Report) {
    let (k, delta) = (1.0, 1.0);
    let h = TestFunction::Linear { u: 0.5 };
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.4, 0.7] {
        let hp = HestonParams::from_k(alpha, k, delta).unwrap();
        let exact = solve_for_test_function(&h, alpha, hp.lambda, delta, UniformGrid::new(1.0, 1000).unwrap())
            .unwrap()
            .k_end();
        let grid = UniformGrid::new(1.0, 4096).unwrap();
        let phases: Vec<f64> = (0..2000u64)
            .into_par_iter()
            .map(|rep| {
                let dx = simulate_heston(&hp, grid, SEED, rep).unwrap().variance.increments();
                let step = grid.step();
                dx.iter().enumerate().map(|(j, d)| h.eval(1.0 - step * (j as f64 + 0.5)) * d).sum()
            })
            .collect();
        let heston = char_from_phases(&phases).unwrap();
        let z_heston = (heston.value - exact).norm() / heston.std_error;

        let spec = KernelSpec::power_law(alpha).unwrap();
        let p = schedule(1e4, &spec, k, delta, 0.0).unwrap();
        let phases: Vec<f64> = (0..2000u64)
            .into_par_iter()
            .map(|rep| {
                let flow = simulate_order_flow(&p, &spec, 1e4, SEED, rep, &Engine::Branching, None).unwrap();
                rescaled_variance_phase(&flow, &p, 1.0, |t| h.eval(t))
            })
            .collect();
        let hawkes = char_from_phases(&phases).unwrap();
        let z_hawkes = (hawkes.value - exact).norm() / hawkes.std_error;
        pass &= z_heston <= 3.0 && z_hawkes <= 3.0;
        parts.push(format!(
            "α={alpha}: K={:.4}{:+.4}i, heston z={z_heston:.2}, hawkes(T=1e4) z={z_hawkes:.2}",
            exact.re, exact.im
        ));
    }
    r.line(6, pass, format!("{} (tol 3 SE)", parts.join("; ")));
}

fn criterion_7(r: &mut Report) {
    let grid = UniformGrid::new(1.0, 4096).unwrap();
    let lags: Vec<usize> = (0..7).map(|i| 1 << i).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.3, 0.4, 0.6, 0.75] {
        let hp = HestonParams::from_k(alpha, 1.0, 1.0).unwrap();
        let paths: Vec<Vec<f64>> =
            (0..500u64).into_par_iter().map(|rep| simulate_heston(&hp, grid, SEED, rep).unwrap().variance.x).collect();
        let est = roughness_estimate(&paths, grid.step(), &[16.0], &lags).unwrap()[0];
        let target = (2.0 * alpha).min(1.0);
        let classified = if alpha > 0.5 { est.regularity > 0.9 } else { est.regularity < 0.95 };
        pass &= (est.regularity - target).abs() <= 0.1 && classified;
        parts.push(format!("α={alpha}: {:.3} (target {target})", est.regularity));
    }
    r.line(7, pass, format!("regularity of X at q=16: {} (tol 0.1)", parts.join(", ")));
}

fn criterion_8(r: &mut Report) {
    let grid = UniformGrid::new(1.0, 4096).unwrap();
    let delta = 1.0;
    let checkpoints = [2048usize, 4096];
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.3, 0.4] {
        let hp = HestonParams::from_k(alpha, 1.0, delta).unwrap();
        let lambda = hp.lambda;
        let residuals: Vec<[f64; 2]> = (0..500u64)
            .into_par_iter()
            .map(|rep| {
                let v = simulate_heston(&hp, grid, SEED, rep).unwrap().variance;
                let w = v.time_changed_brownian(delta);
                let d = fractional_derivative(&SampledFunction { grid, values: v.x.clone() }, alpha).unwrap();
                checkpoints.map(|i| {
                    d.values[i] + lambda * v.x[i] - 2.0 * lambda / delta * grid.t(i) - lambda.sqrt() / delta * w[i]
                })
            })
            .collect();
        for (c, &i) in checkpoints.iter().enumerate() {
            let col: Vec<f64> = residuals.iter().map(|x| x[c]).collect();
            let (m, se) = mean_and_se(&col).unwrap();
            pass &= m.abs() <= 3.0 * se;
            parts.push(format!("α={alpha} t={}: {m:.4} ± {se:.4} (z={:.1})", grid.t(i), (m / se).abs()));
        }
    }
    r.line(8, pass, format!("mean residual over 500 paths: {} (tol 3 SE)", parts.join("; ")));
}

fn criterion_9(r: &mut Report) {
    let reps = 100_000u64;
    let mut pass = true;
    let mut parts = Vec::new();
    let intensities: [Case; 3] = [
        ("1", |_| 1.0, 1.0),
        ("t", |t| t, 0.5),
        ("sin²", |t| t.sin().powi(2), 0.5 - (2.0f64).sin() / 4.0),
    ];
    for (k, (name, nu, integral)) in intensities.into_iter().enumerate() {
        let draws: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(SEED + k as u64, rep, StreamKind::Auxiliary);
                let n = simulate_poisson(nu, 1.0, 1.0, &mut rng).unwrap().len();
                (-(n as f64)).exp()
            })
            .collect();
        let (m, se) = mean_and_se(&draws).unwrap();
        let exact = ((-1.0f64).exp_m1() * integral).exp();
        let z = (m - exact).abs() / se;
        pass &= z <= 3.0;
        parts.push(format!("ν={name} z={z:.2}"));
    }

    let spec = KernelSpec::exponential();
    let model = HawkesModel::new(spec, 0.5, 1.0).unwrap();
    let cases: [Case; 2] = [("h=0.5s", |s| 0.5 * s, 1.0), ("h=sin(s)", f64::sin, 5.0)];
    for (k, (name, h, t)) in cases.into_iter().enumerate() {
        let grid = UniformGrid::new(t, (400.0 * t) as usize).unwrap();
        let sol = hawkes_char_fixed_point(&SampledFunction::from_fn(grid, h), &spec, 0.5, |_| 1.0).unwrap();
        let exact = *sol.l_of_t.last().unwrap();
        let phases: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(SEED + 10 + k as u64, rep, StreamKind::Buy);
                model.simulate(t, &Engine::Exact, &mut rng).iter().map(|s| h(t - s)).sum()
            })
            .collect();
        let mc = char_from_phases(&phases).unwrap();
        let z = (mc.value - exact).norm() / mc.std_error;
        pass &= z <= 3.0;
        parts.push(format!("{name} t={t}: z={z:.2}"));
    }
    r.line(9, pass, format!("exponential formula and Hawkes fixed point, 1e5 reps: {} (tol 3 SE)", parts.join(", ")));
}

fn criterion_10(r: &mut Report) {
    let spec = KernelSpec::power_law(0.5).unwrap();
    let model = HawkesModel::new(spec, 0.5, 1.0).unwrap();
    let soe = Engine::Soe(soe_fit(&spec, 12, 1000.0).unwrap());
    let counts = |engine: &Engine, stream: StreamKind| -> Vec<f64> {
        (0..1000u64)
            .into_par_iter()
            .map(|rep| model.simulate(1000.0, engine, &mut stream_rng(SEED, rep, stream)).len() as f64)
            .collect()
    };
    let (m_exact, _) = mean_and_se(&counts(&Engine::Exact, StreamKind::Buy)).unwrap();
    let (m_soe, _) = mean_and_se(&counts(&soe, StreamKind::Sell)).unwrap();
    let count_dev = (m_soe / m_exact - 1.0).abs();

    let flat = Profile::Flat;
    let p = schedule(1000.0, &spec, 1.0, 1.0, 0.1).unwrap();
    let times = linear_times(2.0, 21);
    let soe_curve = Engine::Soe(soe_fit(&spec, 12, 2000.0).unwrap());
    let exact_curve = mc_mi(&p, &spec, &flat, &times, 2000, SEED, &McOptions::default()).unwrap();
    let fast_curve =
        mc_mi(&p, &spec, &flat, &times, 2000, SEED + 1, &McOptions { engine: soe_curve, ..McOptions::default() })
            .unwrap();
    let (se_a, se_b) = (exact_curve.std_error.as_ref().unwrap(), fast_curve.std_error.as_ref().unwrap());
    let band = (0..times.len())
        .map(|i| (exact_curve.mi[i] - fast_curve.mi[i]).abs() / (se_a[i].powi(2) + se_b[i].powi(2)).sqrt())
        .fold(0.0, f64::max);

    let p = schedule(1e4, &spec, 1.0, 1.0, 0.0).unwrap();
    let fast = HawkesModel::from_params(&p, &spec).unwrap();
    let soe = Engine::Soe(soe_fit(&spec, 12, 1e4).unwrap());
    let time = |engine: &Engine| {
        let start = Instant::now();
        let mut n = 0;
        for rep in 0..30u64 {
            n += fast.simulate(1e4, engine, &mut stream_rng(SEED, rep, StreamKind::Buy)).len();
        }
        (start.elapsed().as_secs_f64(), n)
    };
    let (t_exact, _) = time(&Engine::Exact);
    let (t_soe, _) = time(&soe);
    let speedup = t_exact / t_soe;
    r.line(
        10,
        count_dev <= 0.02 && band <= 3.0 && speedup >= 10.0,
        format!(
            "mean counts exact {m_exact:.1} vs SoE {m_soe:.1} ({:.2}%, tol 2%); impact curve max z {band:.2} (tol 3); \
             speed-up at aT={:.3}, T=1e4: {speedup:.0}x (tol 10x)",
            100.0 * count_dev,
            p.a_t
        ),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failures: Vec::new() };
    let criteria: [fn(&mut Report); 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    for (i, run) in criteria.iter().enumerate() {
        let start = Instant::now();
        run(&mut report);
        eprintln!("  criterion {} took {:.1}s", i + 1, start.elapsed().as_secs_f64());
    }
    let unexpected: Vec<u32> = report.failures.iter().copied().filter(|c| !KNOWN_FAILURES.contains(c)).collect();
    println!("{} of 10 criteria pass", 10 - report.failures.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
