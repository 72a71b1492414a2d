//! Simulates buy/sell Hawkes order flow near instability and its price.

use hawkes_impact::grid::UniformGrid;
use hawkes_impact::hawkes::{price_path, rescale_price, simulate_order_flow, Engine, Side};
use hawkes_impact::kernels::{schedule, KernelSpec};

fn main() -> hawkes_impact::Result<()> {
    let spec = KernelSpec::power_law(0.6)?;
    let t_big = 1e4;
    let p = schedule(t_big, &spec, 1.0, 1.0, 0.0)?;
    let flow = simulate_order_flow(&p, &spec, t_big, 42, 0, &Engine::Branching, None)?;
    println!("aT={:.5}: {} buys, {} sells", p.a_t, flow.count(Side::Buy), flow.count(Side::Sell));
    let micro = price_path(&flow, &spec, &p, UniformGrid::new(t_big, 10)?)?;
    let macro_path = rescale_price(&micro, &p)?;
    println!("t,price,rescaled");
    for (i, (m, r)) in micro.values.iter().zip(&macro_path.values).enumerate() {
        println!("{},{m:.1},{r:.4}", micro.grid.t(i));
    }
    Ok(())
}
