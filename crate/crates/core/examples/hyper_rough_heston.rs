//! Hyper-rough limit (α ≤ 1/2): the integrated variance has no density.

use hawkes_impact::grid::UniformGrid;
use hawkes_impact::heston::{simulate_heston, HestonParams};

fn main() -> hawkes_impact::Result<()> {
    let p = HestonParams::from_k(0.4, 1.0, 1.0)?;
    let grid = UniformGrid::new(1.0, 2048)?;
    let mean = p.mean_x(grid)?;
    let n = 200;
    let mut total = 0.0;
    for r in 0..n {
        total += simulate_heston(&p, grid, 5, r)?.variance.x[grid.intervals()];
    }
    println!("sample E[X_1] = {:.4}, exact {:.4}", total / n as f64, mean[grid.intervals()]);
    let path = simulate_heston(&p, grid, 5, 0)?;
    println!("clamped steps on one path: {} of {}", path.variance.clamped, 2 * grid.intervals());
    println!("t,X,P");
    for i in (0..grid.len()).step_by(256) {
        println!("{:.4},{:.5},{:.5}", grid.t(i), path.variance.x[i], path.price.price[i]);
    }
    Ok(())
}
