//! Characteristic functionals: the Volterra Riccati equation of the limiting
//! integrated variance and the exponential fixed point of a Hawkes process.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::kernels::KernelSpec;
use crate::mittag::{MittagLefflerParams, MittagLefflerTable};
use crate::volterra::ProductWeights;

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;

/// Real test functions `h` for the characteristic functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `h(t) = u t`.
    Linear { u: f64 },
    /// `u min(t, knee)` with the corner replaced by a parabola of half-width
    /// `width`, so `h` is continuously differentiable.
    Plateau { u: f64, knee: f64, width: f64 },
    /// `h(t) = u`; continuous but `h(0) ≠ 0`, only for Hawkes functionals.
    Constant { u: f64 },
}

impl TestFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Linear { u } => u * t,
            Self::Plateau { u, knee, width } => {
                let a = knee - width;
                if t <= a {
                    u * t
                } else if t >= knee + width {
                    u * knee
                } else {
                    u * (t - (t - a) * (t - a) / (4.0 * width))
                }
            }
            Self::Constant { u } => u,
        }
    }

    pub fn sample(&self, grid: UniformGrid) -> SampledFunction {
        SampledFunction::from_fn(grid, |t| self.eval(t))
    }

    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            Self::Linear { u } => Self::Linear { u: c * u },
            Self::Plateau { u, knee, width } => Self::Plateau { u: c * u, knee, width },
            Self::Constant { u } => Self::Constant { u: c * u },
        }
    }

    /// Parses `linear:u=0.5`, `plateau:u=0.5[,knee=1][,width=0.2]`, `constant:u=1`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut u = None;
        let mut knee = 1.0;
        let mut width = 0.2;
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("expected key=value in '{kv}'")))?;
            let v: f64 = v.parse().map_err(|_| Error::Usage(format!("'{v}' is not a number")))?;
            match k {
                "u" => u = Some(v),
                "knee" => knee = v,
                "width" => width = v,
                _ => return Err(Error::Usage(format!("unknown test-function parameter '{k}'"))),
            }
        }
        let u = u.ok_or_else(|| Error::Usage(format!("test function '{s}' needs u=…")))?;
        match kind {
            "linear" => Ok(Self::Linear { u }),
            "plateau" if width > 0.0 && width < knee => Ok(Self::Plateau { u, knee, width }),
            "plateau" => Err(Error::Usage("plateau needs 0 < width < knee".into())),
            "constant" => Ok(Self::Constant { u }),
            _ => Err(Error::Usage(format!("unknown test function '{kind}'"))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { u } => write!(f, "linear:u={u}"),
            Self::Plateau { u, knee, width } => write!(f, "plateau:u={u},knee={knee},width={width}"),
            Self::Constant { u } => write!(f, "constant:u={u}"),
        }
    }
}

/// Solution `g` of the Volterra Riccati equation and `K(h, t) = exp(∫_0^t g)`.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub grid: UniformGrid,
    pub g: Vec<Complex64>,
    pub k_of_t: Vec<Complex64>,
    pub h_id: String,
    /// Sup-norm differences between successive Picard iterates.
    pub differences: Vec<f64>,
}

impl RiccatiSolution {
    pub fn k_end(&self) -> Complex64 {
        *self.k_of_t.last().expect("non-empty grid")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# h={}", self.h_id)?;
        writeln!(out, "t,re_g,im_g,re_K,im_K")?;
        for (i, (g, k)) in self.g.iter().zip(&self.k_of_t).enumerate() {
            writeln!(out, "{},{},{},{},{}", self.grid.t(i), g.re, g.im, k.re, k.im)?;
        }
        Ok(())
    }
}

/// `C(h, ·)` and `L(h, t)` of a Hawkes process.
#[derive(Debug, Clone)]
pub struct HawkesCharSolution {
    pub grid: UniformGrid,
    pub c: Vec<Complex64>,
    pub l_of_t: Vec<Complex64>,
    pub differences: Vec<f64>,
}

/// Picard iteration of `x = map(x)` with damping 1, falling back to 0.5 once
/// the successive differences start to grow.
fn picard(
    n: usize,
    mut map: impl FnMut(&[Complex64], &mut [Complex64]),
    init: Complex64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let mut x = vec![init; n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut differences = Vec::new();
    let mut damping = 1.0;
    for _ in 0..MAX_ITERATIONS {
        map(&x, &mut next);
        let diff = x.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if !diff.is_finite() {
            return Err(Error::Iteration { iterations: differences.len() + 1, residual: diff });
        }
        if let Some(&prev) = differences.last() {
            if diff > prev && damping == 1.0 {
                damping = 0.5;
            }
        }
        differences.push(diff);
        for (a, b) in x.iter_mut().zip(&next) {
            *a += (b - *a) * damping;
        }
        if diff <= TOLERANCE {
            return Ok((x, differences));
        }
    }
    Err(Error::Iteration { iterations: MAX_ITERATIONS, residual: *differences.last().unwrap_or(&f64::NAN) })
}

fn trapezoid_exp(step: f64, g: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(Complex64::new(1.0, 0.0));
    for w in g.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * step);
        out.push(acc.exp());
    }
    out
}

fn mittag_weights(alpha: f64, lambda: f64, grid: UniformGrid) -> Result<ProductWeights> {
    let params = MittagLefflerParams::new(alpha, lambda)?;
    let table = MittagLefflerTable::new(&params, grid.step(), grid.len())?;
    Ok(ProductWeights::from_primitive_tables(grid.step(), &table.cdf, &table.cdf_integral))
}

/// Solves `x = f^{α,λ} * (q x² + i c h)` by Picard iteration.
fn solve_quadratic_volterra(h: &SampledFunction, alpha: f64, lambda: f64, q: f64, c: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let w = mittag_weights(alpha, lambda, h.grid)?;
    let n = h.grid.len();
    let forcing: Vec<Complex64> = h.values.iter().map(|&v| Complex64::new(0.0, c * v)).collect();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    picard(
        n,
        |x, out| {
            for j in 0..n {
                u[j] = x[j] * x[j] * q + forcing[j];
            }
            out[0] = Complex64::new(0.0, 0.0);
            for j in 1..n {
                out[j] = w.convolve(&u, j);
            }
        },
        Complex64::new(0.0, 0.0),
    )
}

fn check_h(h: &SampledFunction) -> Result<()> {
    if h.values[0] != 0.0 {
        return domain(format!("the Riccati equation needs h(0) = 0, got {}", h.values[0]));
    }
    if h.values.iter().any(|v| !v.is_finite()) {
        return domain("h must be finite");
    }
    Ok(())
}

/// `g = f^{α,λ} * (g²/(4δ) + 2 i h/δ)` and `K(h, t) = exp(∫_0^t g)`, on the grid of `h`.
pub fn solve_volterra_riccati(h: &SampledFunction, alpha: f64, lambda: f64, delta: f64) -> Result<RiccatiSolution> {
    solve_volterra_riccati_labeled(h, "sampled", alpha, lambda, delta)
}

pub fn solve_volterra_riccati_labeled(
    h: &SampledFunction,
    h_id: &str,
    alpha: f64,
    lambda: f64,
    delta: f64,
) -> Result<RiccatiSolution> {
    check_h(h)?;
    if !(delta > 0.0) {
        return domain(format!("delta must be positive, got {delta}"));
    }
    let (g, differences) = solve_quadratic_volterra(h, alpha, lambda, 0.25 / delta, 2.0 / delta)?;
    let k_of_t = trapezoid_exp(h.grid.step(), &g);
    Ok(RiccatiSolution { grid: h.grid, g, k_of_t, h_id: h_id.to_string(), differences })
}

/// [`solve_volterra_riccati`] for a named test function sampled on `grid`.
pub fn solve_for_test_function(
    h: &TestFunction,
    alpha: f64,
    lambda: f64,
    delta: f64,
    grid: UniformGrid,
) -> Result<RiccatiSolution> {
    solve_volterra_riccati_labeled(&h.sample(grid), &h.to_string(), alpha, lambda, delta)
}

/// Per-side form: `θ = f^{α,λ} * (θ²/2 + i h/δ)` solved with `h/δ`, giving
/// `K(h, t) = exp(2δ ∫_0^t θ)` for `X = (X^a + X^b)/δ`. The returned `g` is `2δθ`.
pub fn solve_theta_form(h: &SampledFunction, alpha: f64, lambda: f64, delta: f64) -> Result<RiccatiSolution> {
    check_h(h)?;
    if !(delta > 0.0) {
        return domain(format!("delta must be positive, got {delta}"));
    }
    let scaled = SampledFunction { grid: h.grid, values: h.values.iter().map(|v| v / delta).collect() };
    let (theta, differences) = solve_quadratic_volterra(&scaled, alpha, lambda, 0.5, 1.0 / delta)?;
    let g: Vec<Complex64> = theta.iter().map(|t| t * (2.0 * delta)).collect();
    let k_of_t = trapezoid_exp(h.grid.step(), &g);
    Ok(RiccatiSolution { grid: h.grid, g, k_of_t, h_id: "theta-form".into(), differences })
}

/// `C = exp(i h + (C - 1) * a φ)` and `L(h, t) = exp(∫_0^t (C(s) - 1) ν(t - s) ds)`.
pub fn hawkes_char_fixed_point(
    h: &SampledFunction,
    spec: &KernelSpec,
    a_t: f64,
    nu: impl Fn(f64) -> f64,
) -> Result<HawkesCharSolution> {
    if !(a_t >= 0.0) {
        return domain(format!("branching ratio must be non-negative, got {a_t}"));
    }
    if a_t >= 1.0 {
        return Err(Error::Instability { a_t });
    }
    let grid = h.grid;
    let n = grid.len();
    let w = ProductWeights::from_primitives(
        grid.step(),
        grid.intervals(),
        |v| a_t * (1.0 - spec.tail_unchecked(v)),
        |v| a_t * (v - spec.integrated_tail_unchecked(v)),
    );
    let ih: Vec<Complex64> = h.values.iter().map(|&v| Complex64::new(0.0, v)).collect();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let one = Complex64::new(1.0, 0.0);
    let (c, differences) = picard(
        n,
        |x, out| {
            for j in 0..n {
                u[j] = x[j] - one;
            }
            for j in 0..n {
                let conv = if j == 0 { Complex64::new(0.0, 0.0) } else { w.convolve(&u, j) };
                out[j] = (ih[j] + conv).exp();
            }
        },
        one,
    )?;
    let step = grid.step();
    let nu_values: Vec<f64> = grid.points().map(&nu).collect();
    if nu_values.iter().any(|v| !(*v >= 0.0)) {
        return domain("baseline intensity must be non-negative");
    }
    let l_of_t = (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=j {
                let wt = if k == 0 || k == j { 0.5 } else { 1.0 };
                acc += (c[k] - one) * (nu_values[j - k] * wt);
            }
            (acc * step).exp()
        })
        .collect();
    Ok(HawkesCharSolution { grid, c, l_of_t, differences })
}

/// Monte Carlo estimate of a characteristic function with its standard error
/// `sqrt((Var Re + Var Im) / n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

/// `E[exp(i θ)]` from sampled phases `θ`.
pub fn char_from_phases(phases: &[f64]) -> Result<CharEstimate> {
    if phases.len() < 2 {
        return domain("need at least two samples");
    }
    let n = phases.len() as f64;
    let (mut sr, mut si, mut sr2, mut si2) = (0.0, 0.0, 0.0, 0.0);
    for &p in phases {
        let (s, c) = p.sin_cos();
        sr += c;
        si += s;
        sr2 += c * c;
        si2 += s * s;
    }
    let (mr, mi) = (sr / n, si / n);
    let var = (sr2 - n * mr * mr + si2 - n * mi * mi) / (n - 1.0);
    Ok(CharEstimate { value: Complex64::new(mr, mi), std_error: (var.max(0.0) / n).sqrt(), samples: phases.len() })
}

/// `E[exp(i Σ_j h(t - s_j) ΔX_j)]` over paths of increments `ΔX_j` on cells
/// `[j Δ, (j+1) Δ]`, with `s_j` the cell midpoint and `t` the path end.
pub fn char_functional_mc(increments: &[Vec<f64>], step: f64, h: impl Fn(f64) -> f64) -> Result<CharEstimate> {
    if increments.is_empty() {
        return domain("no paths supplied");
    }
    let phases: Vec<f64> = increments
        .iter()
        .map(|dx| {
            let t = step * dx.len() as f64;
            dx.iter().enumerate().map(|(j, d)| h(t - step * (j as f64 + 0.5)) * d).sum()
        })
        .collect();
    char_from_phases(&phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_h_gives_trivial_solution() {
        let grid = UniformGrid::new(1.0, 100).unwrap();
        let s = solve_for_test_function(&TestFunction::Linear { u: 0.0 }, 0.6, 1.0, 1.0, grid).unwrap();
        assert!(s.g.iter().all(|g| g.norm() == 0.0));
        assert!(s.k_of_t.iter().all(|k| *k == Complex64::new(1.0, 0.0)));
        let c = hawkes_char_fixed_point(&TestFunction::Linear { u: 0.0 }.sample(grid), &KernelSpec::exponential(), 0.5, |_| 1.0)
            .unwrap();
        assert!(c.c.iter().all(|v| (v - 1.0).norm() < 1e-15));
        assert!(c.l_of_t.iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn h_must_vanish_at_zero() {
        let grid = UniformGrid::new(1.0, 10).unwrap();
        let h = TestFunction::Constant { u: 1.0 }.sample(grid);
        assert!(solve_volterra_riccati(&h, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn poisson_limit_of_fixed_point() {
        // No excitation: C = e^{i h}, L = exp(∫ (e^{iu} - 1)) for constant h.
        let grid = UniformGrid::new(2.0, 200).unwrap();
        let h = TestFunction::Constant { u: 0.7 }.sample(grid);
        let s = hawkes_char_fixed_point(&h, &KernelSpec::exponential(), 0.0, |_| 1.0).unwrap();
        let want = ((Complex64::new(0.0, 0.7).exp() - 1.0) * 2.0).exp();
        assert!((s.l_of_t[200] - want).norm() < 1e-12);
    }

    #[test]
    fn deterministic_path_functional() {
        let step = 1e-3;
        let c = 0.8;
        let paths = vec![vec![c * step; 1000]; 3];
        let est = char_functional_mc(&paths, step, |t| 0.5 * t).unwrap();
        let want = Complex64::new(0.0, 0.5 * c * 0.5).exp();
        assert!((est.value - want).norm() < 1e-9);
        assert!(est.std_error < 1e-12);
        assert!(char_functional_mc(&[], step, |t| t).is_err());
    }

    #[test]
    fn parse_test_functions() {
        assert_eq!(TestFunction::parse("linear:u=0.5").unwrap(), TestFunction::Linear { u: 0.5 });
        let p = TestFunction::parse("plateau:u=1,knee=1,width=0.1").unwrap();
        assert_eq!(p.to_string(), "plateau:u=1,knee=1,width=0.1");
        assert!(TestFunction::parse("cubic:u=1").is_err());
        assert!(TestFunction::parse("linear").is_err());
    }

    #[test]
    fn plateau_is_c1() {
        let p = TestFunction::Plateau { u: 2.0, knee: 1.0, width: 0.2 };
        let d = |t: f64| (p.eval(t + 1e-7) - p.eval(t - 1e-7)) / 2e-7;
        assert!((d(0.8) - 2.0).abs() < 1e-5);
        assert!(d(1.2).abs() < 1e-5);
        assert!((p.eval(5.0) - 2.0).abs() < 1e-15);
    }

    fn rk4_classical(u: f64, t_max: f64, steps: usize) -> Vec<Complex64> {
        // g' = g²/4 + 2 i u t - g, g(0) = 0 (λ = δ = 1).
        let f = |t: f64, g: Complex64| g * g * 0.25 + Complex64::new(0.0, 2.0 * u * t) - g;
        let dt = t_max / steps as f64;
        let mut g = Complex64::new(0.0, 0.0);
        let mut out = vec![g];
        for i in 0..steps {
            let t = dt * i as f64;
            let k1 = f(t, g);
            let k2 = f(t + 0.5 * dt, g + k1 * (0.5 * dt));
            let k3 = f(t + 0.5 * dt, g + k2 * (0.5 * dt));
            let k4 = f(t + dt, g + k3 * dt);
            g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            out.push(g);
        }
        out
    }

    #[test]
    fn exponential_kernel_reduces_to_ode() {
        let grid = UniformGrid::new(2.0, 400).unwrap();
        let s = solve_for_test_function(&TestFunction::Linear { u: 0.5 }, 1.0, 1.0, 1.0, grid).unwrap();
        let oracle = rk4_classical(0.5, 2.0, 4000);
        let err = (0..=400).map(|i| (s.g[i] - oracle[10 * i]).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn conjugate_symmetry_and_bound() {
        let grid = UniformGrid::new(1.0, 200).unwrap();
        let h = TestFunction::Plateau { u: 0.8, knee: 0.6, width: 0.2 };
        let p = solve_for_test_function(&h, 0.4, 1.3, 0.7, grid).unwrap();
        let m = solve_for_test_function(&h.scaled(-1.0), 0.4, 1.3, 0.7, grid).unwrap();
        for (a, b) in p.g.iter().zip(&m.g) {
            assert!((a - b.conj()).norm() < 1e-12);
        }
        assert!(p.k_of_t.iter().all(|k| k.norm() <= 1.0 + 1e-12));
        assert_eq!(p.g[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn theta_form_matches() {
        let grid = UniformGrid::new(1.0, 200).unwrap();
        let h = TestFunction::Linear { u: 0.5 }.sample(grid);
        for delta in [0.5, 1.0, 3.0] {
            let a = solve_volterra_riccati(&h, 0.7, 1.1, delta).unwrap();
            let b = solve_theta_form(&h, 0.7, 1.1, delta).unwrap();
            assert!((a.k_end() - b.k_end()).norm() < 1e-8);
        }
    }
}
