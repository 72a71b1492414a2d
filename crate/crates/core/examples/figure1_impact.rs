//! Market impact of a flat metaorder: limit, finite-T analytic and Monte Carlo.

use hawkes_impact::hawkes::Engine;
use hawkes_impact::impact::{
    analytic_mi, fit_power_law, linear_times, macroscopic_mi, mc_mi, FitWindow, McOptions, VarianceReduction,
};
use hawkes_impact::kernels::{schedule, KernelSpec};
use hawkes_impact::profile::Profile;

fn main() -> hawkes_impact::Result<()> {
    let (alpha, k, gamma) = (0.5, 1.0, 0.1);
    let spec = KernelSpec::power_law(alpha)?;
    let params = schedule(1e4, &spec, k, 1.0, gamma)?;
    let times = linear_times(3.0, 13);
    let limit = macroscopic_mi(alpha, k, gamma, &Profile::Flat, &times)?;
    let analytic = analytic_mi(&params, &spec, &Profile::Flat, &times)?;
    let options = McOptions { engine: Engine::Branching, variance_reduction: VarianceReduction::LabelSwap };
    let mc = mc_mi(&params, &spec, &Profile::Flat, &times, 1000, 7, &options)?;
    let se = mc.std_error.as_ref().expect("Monte Carlo curves carry errors");
    println!("t,limit,analytic,mc,stderr");
    for i in 0..times.len() {
        println!("{:.2},{:.5},{:.5},{:.5},{:.5}", times[i], limit.mi[i], analytic.mi[i], mc.mi[i], se[i]);
    }
    let fit = fit_power_law(&macroscopic_mi(alpha, k, gamma, &Profile::Flat, &linear_times(1.0, 41))?, FitWindow::Execution)?;
    println!("limit execution exponent {:.4}", fit.exponent);
    Ok(())
}
