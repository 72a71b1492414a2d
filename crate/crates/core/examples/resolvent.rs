//! Resolvent of the power-law kernel and the near-instability schedule.

use hawkes_impact::grid::UniformGrid;
use hawkes_impact::kernels::{resolvent_mass, resolvent_psi, schedule, xi, KernelSpec};

fn main() -> hawkes_impact::Result<()> {
    let spec = KernelSpec::power_law(0.5)?;
    for t_big in [1e2, 1e3, 1e4, 1e5] {
        let p = schedule(t_big, &spec, 1.0, 1.0, 0.1)?;
        println!("T={t_big:>8}: aT={:.6} muT={:.3e} lambda={:.4}", p.a_t, p.mu_t, p.lambda());
    }
    let a = 0.9;
    let psi = resolvent_psi(&spec, a, UniformGrid::new(200.0, 4000)?)?;
    println!("\npsi(0)={:.4} psi(10)={:.4e} psi(200)={:.4e}", psi.values[0], psi.interpolate(10.0), psi.interpolate(200.0));
    println!("mass {:.5} vs a/(1-a) = {:.5}", resolvent_mass(&spec, a, &psi)?, a / (1.0 - a));
    println!("xi(0)={:.3} xi(100)={:.3}", xi(&spec, a, 0.0)?, xi(&spec, a, 100.0)?);
    Ok(())
}
