//! Rough Heston limit (α > 1/2): variance, integrated variance and price.

use hawkes_impact::grid::UniformGrid;
use hawkes_impact::heston::{simulate_heston, HestonParams};

fn main() -> hawkes_impact::Result<()> {
    let p = HestonParams::from_k(0.7, 1.0, 1.0)?;
    let grid = UniformGrid::new(1.0, 1024)?;
    let path = simulate_heston(&p, grid, 11, 0)?;
    let y = path.variance.y.as_ref().expect("rough paths carry the variance");
    println!("t,Y,X,P");
    for i in (0..grid.len()).step_by(128) {
        println!("{:.4},{:.5},{:.5},{:.5}", grid.t(i), y[i], path.variance.x[i], path.price.price[i]);
    }
    let mean = p.mean_x(grid)?;
    println!("E[X_1] = {:.5}", mean[grid.intervals()]);
    Ok(())
}
