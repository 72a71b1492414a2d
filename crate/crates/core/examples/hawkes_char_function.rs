//! Hawkes characteristic functional by fixed point, checked against simulation.

use hawkes_impact::grid::{SampledFunction, UniformGrid};
use hawkes_impact::hawkes::{Engine, HawkesModel};
use hawkes_impact::kernels::KernelSpec;
use hawkes_impact::riccati::{char_from_phases, hawkes_char_fixed_point};
use hawkes_impact::rng::{stream_rng, StreamKind};

fn main() -> hawkes_impact::Result<()> {
    let spec = KernelSpec::exponential();
    let (a, t) = (0.5, 2.0);
    let h = |s: f64| 0.5 * s;
    let sol = hawkes_char_fixed_point(&SampledFunction::from_fn(UniformGrid::new(t, 800)?, h), &spec, a, |_| 1.0)?;
    let model = HawkesModel::new(spec, a, 1.0)?;
    let phases: Vec<f64> = (0..20_000)
        .map(|r| model.simulate(t, &Engine::Exact, &mut stream_rng(3, r, StreamKind::Buy)).iter().map(|s| h(t - s)).sum())
        .collect();
    let mc = char_from_phases(&phases)?;
    let l = sol.l_of_t.last().expect("non-empty grid");
    println!("fixed point {:.5} {:+.5}i", l.re, l.im);
    println!("monte carlo {:.5} {:+.5}i (se {:.5})", mc.value.re, mc.value.im, mc.std_error);
    Ok(())
}
