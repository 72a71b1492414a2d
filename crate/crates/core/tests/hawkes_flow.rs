use hawkes_impact::grid::UniformGrid;
use hawkes_impact::hawkes::{
    price_path, price_path_martingale, simulate_order_flow, simulate_side, Engine, EventStream, RunHeader, Side,
};
use hawkes_impact::kernels::{schedule, KernelSpec, MarketParams};
use hawkes_impact::profile::Profile;
use hawkes_impact::stats::mean_and_se;
use proptest::prelude::*;

fn exponential_params() -> (KernelSpec, MarketParams) {
    let spec = KernelSpec::exponential();
    (spec, MarketParams::new(1000.0, 0.5, 1.0, 0.0, &spec).unwrap())
}

#[test]
fn exponential_mean_rate() {
    let (spec, p) = exponential_params();
    let counts: Vec<f64> = (0..200)
        .map(|r| simulate_side(&p, &spec, 1000.0, 11, r, Side::Buy, &Engine::Exact).unwrap().events.len() as f64)
        .collect();
    let (m, _) = mean_and_se(&counts).unwrap();
    // E N_t = 2t - 2(1 - e^{-t/2})
    let expected = 2.0 * 1000.0 - 2.0;
    assert!((m / expected - 1.0).abs() < 0.05, "{m}");
}

#[test]
fn martingale_rewrite_matches_direct_price() {
    let (spec, p) = exponential_params();
    let flow = simulate_order_flow(&p, &spec, 50.0, 5, 0, &Engine::Exact, None).unwrap();
    let grid = UniformGrid::new(50.0, 50_000).unwrap();
    let a = price_path(&flow, &spec, &p, grid).unwrap();
    let b = price_path_martingale(&flow, &spec, &p, grid).unwrap();
    assert!(a.sup_distance(&b) <= 1e-2, "{}", a.sup_distance(&b));
}

#[test]
fn csv_round_trip() {
    let (spec, p) = exponential_params();
    let flow = simulate_order_flow(&p, &spec, 20.0, 9, 1, &Engine::Exact, None).unwrap();
    let mut buf = Vec::new();
    flow.write_csv(&mut buf, &RunHeader { seed: 9, horizon: 20.0, alpha: 1.0 }).unwrap();
    let back = EventStream::read_csv(std::str::from_utf8(&buf).unwrap(), 20.0).unwrap();
    assert_eq!(back, flow);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn deterministic_and_label_swap_negates(seed in 0u64..1000, rep in 0u64..50, alpha in 0.3f64..0.9) {
        let spec = KernelSpec::power_law(alpha).unwrap();
        let p = schedule(100.0, &spec, 1.0, 1.0, 0.0).unwrap();
        for engine in [Engine::Exact, Engine::Branching] {
            let a = simulate_order_flow(&p, &spec, 100.0, seed, rep, &engine, None).unwrap();
            let b = simulate_order_flow(&p, &spec, 100.0, seed, rep, &engine, None).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.events.windows(2).all(|w| w[0].time <= w[1].time));
            prop_assert!(a.events.iter().all(|e| e.time <= 100.0));
            let grid = UniformGrid::new(100.0, 100).unwrap();
            let up = price_path(&a, &spec, &p, grid).unwrap();
            let down = price_path(&a.swap_sides(), &spec, &p, grid).unwrap();
            prop_assert!(up.values.iter().zip(&down.values).all(|(x, y)| x == &-y));
        }
    }

    #[test]
    fn metaorder_only_adds_events(seed in 0u64..1000) {
        let spec = KernelSpec::power_law(0.5).unwrap();
        let p = schedule(100.0, &spec, 1.0, 1.0, 0.2).unwrap();
        let without = simulate_order_flow(&p, &spec, 100.0, seed, 0, &Engine::Branching, None).unwrap();
        let with = simulate_order_flow(&p, &spec, 100.0, seed, 0, &Engine::Branching, Some(&Profile::Flat)).unwrap();
        prop_assert_eq!(with.count(Side::Buy), without.count(Side::Buy));
        prop_assert_eq!(with.count(Side::Sell), without.count(Side::Sell));
    }
}
