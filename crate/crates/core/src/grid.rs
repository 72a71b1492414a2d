//! Uniform time grids and functions sampled on them.

use std::io::Write;

use crate::error::{domain, Result};

/// `n + 1` equally spaced points `0, h, ..., n h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    step: f64,
    intervals: usize,
}

impl UniformGrid {
    pub fn new(t_max: f64, intervals: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return domain(format!("grid end must be positive and finite, got {t_max}"));
        }
        if intervals == 0 {
            return domain("grid needs at least one interval");
        }
        Ok(Self { step: t_max / intervals as f64, intervals })
    }

    pub fn with_step(step: f64, intervals: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return domain(format!("grid step must be positive, got {step}"));
        }
        if intervals == 0 {
            return domain("grid needs at least one interval");
        }
        Ok(Self { step, intervals })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of grid points, `intervals + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_max(&self) -> f64 {
        self.step * self.intervals as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.step * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.t(i))
    }
}

/// Values of a real function on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub fn value_at(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Linear interpolation, clamped to the last sample beyond the grid.
    pub fn interpolate(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        let x = t / self.grid.step();
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("non-empty samples");
        }
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Composite trapezoid integral over the whole grid.
    pub fn trapezoid(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let inner: f64 = self.values[1..n - 1].iter().sum();
        self.grid.step() * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// Running trapezoid integral `∫_0^{t_i}`.
    pub fn cumulative_trapezoid(&self) -> Vec<f64> {
        let h = self.grid.step();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Two-column CSV `t,value` preceded by a `# ...` header line.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "# {header}")?;
        writeln!(out, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.t(i), v)?;
        }
        Ok(())
    }
}
