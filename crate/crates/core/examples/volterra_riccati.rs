//! Characteristic functional of the integrated variance from the Volterra Riccati equation.

use hawkes_impact::grid::UniformGrid;
use hawkes_impact::heston::HestonParams;
use hawkes_impact::riccati::{solve_for_test_function, TestFunction};

fn main() -> hawkes_impact::Result<()> {
    let grid = UniformGrid::new(1.0, 1000)?;
    for h in ["linear:u=0.5", "linear:u=-1.5", "plateau:u=0.5,knee=0.5,width=0.2"] {
        let h = TestFunction::parse(h)?;
        for alpha in [0.4, 0.7, 1.0] {
            let p = HestonParams::from_k(alpha, 1.0, 1.0)?;
            let sol = solve_for_test_function(&h, alpha, p.lambda, p.delta, grid)?;
            let k = sol.k_end();
            println!("{:<32} alpha={alpha}: K = {:.6} {:+.6}i after {} iterations", h.to_string(), k.re, k.im, sol.differences.len());
        }
    }
    Ok(())
}
