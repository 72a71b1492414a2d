//! Regularity of the integrated variance and the fractional-derivative relation.

use hawkes_impact::grid::{SampledFunction, UniformGrid};
use hawkes_impact::heston::{fractional_derivative, roughness_estimate, simulate_heston, HestonParams};

fn main() -> hawkes_impact::Result<()> {
    let grid = UniformGrid::new(1.0, 2048)?;
    let lags: Vec<usize> = (0..6).map(|i| 1 << i).collect();
    for alpha in [0.3, 0.6] {
        let p = HestonParams::from_k(alpha, 1.0, 1.0)?;
        let paths = (0..100).map(|r| Ok(simulate_heston(&p, grid, 1, r)?.variance.x)).collect::<hawkes_impact::Result<Vec<_>>>()?;
        for est in roughness_estimate(&paths, grid.step(), &[2.0, 16.0], &lags)? {
            println!("alpha={alpha} q={:>2}: regularity {:.3} (limit {})", est.q, est.regularity, (2.0 * alpha).min(1.0));
        }
    }
    let path = SampledFunction::from_fn(grid, |t| t);
    let d = fractional_derivative(&path, 0.5)?;
    println!("D^0.5 t at t=1: {:.6} (2/sqrt(pi) = {:.6})", d.values[grid.intervals()], 2.0 / std::f64::consts::PI.sqrt());
    Ok(())
}
