use hawkes_impact::grid::{SampledFunction, UniformGrid};
use hawkes_impact::kernels::KernelSpec;
use hawkes_impact::riccati::{hawkes_char_fixed_point, solve_for_test_function, solve_volterra_riccati, TestFunction};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugate_symmetry_and_unit_bound(alpha in 0.3f64..1.0, u in 0.05f64..1.5, delta in 0.5f64..2.0) {
        let grid = UniformGrid::new(1.0, 200).unwrap();
        let h = TestFunction::Linear { u };
        let k = solve_for_test_function(&h, alpha, 1.0, delta, grid).unwrap();
        let k_neg = solve_for_test_function(&h.scaled(-1.0), alpha, 1.0, delta, grid).unwrap();
        for (a, b) in k.k_of_t.iter().zip(&k_neg.k_of_t) {
            prop_assert!((a - b.conj()).norm() < 1e-10);
            prop_assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn hawkes_characteristic_function_is_bounded(a in 0.0f64..0.9, u in 0.05f64..1.0) {
        let grid = UniformGrid::new(2.0, 200).unwrap();
        let h = SampledFunction::from_fn(grid, |s| u * s);
        let sol = hawkes_char_fixed_point(&h, &KernelSpec::exponential(), a, |_| 1.0).unwrap();
        prop_assert!(sol.l_of_t.iter().all(|l| l.norm() <= 1.0 + 1e-12));
    }
}

#[test]
fn zero_branching_is_poisson() {
    // a = 0: E exp(i Σ h(t - s_j)) = exp(∫_0^t (e^{i h(s)} - 1) ds)
    let grid = UniformGrid::new(1.0, 2000).unwrap();
    let h = SampledFunction::from_fn(grid, |s| 0.7 * s);
    let sol = hawkes_char_fixed_point(&h, &KernelSpec::exponential(), 0.0, |_| 1.0).unwrap();
    let i = num_complex::Complex64::new(0.0, 1.0);
    // ∫_0^1 e^{0.7 i s} ds = (e^{0.7 i} - 1) / (0.7 i)
    let exact = (((i * 0.7).exp() - 1.0) / (i * 0.7) - 1.0).exp();
    assert!((sol.l_of_t.last().unwrap() - exact).norm() < 1e-6);
}

#[test]
fn rejects_nonzero_start() {
    let grid = UniformGrid::new(1.0, 10).unwrap();
    let h = SampledFunction::from_fn(grid, |s| 1.0 + s);
    assert!(solve_volterra_riccati(&h, 0.5, 1.0, 1.0).is_err());
}
