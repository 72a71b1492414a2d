//! Sum-of-exponentials fit of the power-law kernel and engine timings.

use std::time::Instant;

use hawkes_impact::hawkes::{Engine, HawkesModel};
use hawkes_impact::kernels::{schedule, KernelSpec};
use hawkes_impact::rng::{stream_rng, StreamKind};
use hawkes_impact::soe::soe_fit;

fn main() -> hawkes_impact::Result<()> {
    let spec = KernelSpec::power_law(0.5)?;
    let fit = soe_fit(&spec, 12, 1e4)?;
    println!("{} terms, sup relative error {:.3e} on {:?}", fit.len(), fit.sup_rel_error, fit.fit_range);
    let p = schedule(1e4, &spec, 1.0, 1.0, 0.0)?;
    let model = HawkesModel::from_params(&p, &spec)?;
    for engine in [Engine::Exact, Engine::Soe(fit), Engine::Branching] {
        let start = Instant::now();
        let n: usize = (0..20).map(|r| model.simulate(1e4, &engine, &mut stream_rng(1, r, StreamKind::Buy)).len()).sum();
        println!("{:>9}: {:.2} events/path, {:.3} ms/path", engine.name(), n as f64 / 20.0, start.elapsed().as_secs_f64() * 50.0);
    }
    Ok(())
}
