//! Monte Carlo summaries, two-sample distances and least squares.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return domain(format!("need at least two samples, got {}", samples.len()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Sample mean and the normal-approximation half-width at confidence `level`.
pub fn mc_mean_ci(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("confidence level must lie in (0, 1), got {level}"));
    }
    let (mean, se) = mean_and_se(samples)?;
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * level);
    Ok((mean, z * se))
}

/// Running sums for pointwise means and standard errors of curves.
#[derive(Debug, Clone)]
pub struct CurveAccumulator {
    n: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl CurveAccumulator {
    pub fn new(len: usize) -> Self {
        Self { n: 0, sum: vec![0.0; len], sum_sq: vec![0.0; len] }
    }

    pub fn push(&mut self, values: &[f64]) {
        for ((s, q), v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(values) {
            *s += v;
            *q += v * v;
        }
        self.n += 1;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.n as f64).collect()
    }

    pub fn std_error(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                let m = s / n;
                ((q - n * m * m).max(0.0) / (n - 1.0) / n).sqrt()
            })
            .collect()
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("KS distance needs two non-empty samples");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least three points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit { slope, intercept, slope_se, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_examples() {
        assert_eq!(mc_mean_ci(&[1.0; 4], 0.95).unwrap(), (1.0, 0.0));
        let (m, hw) = mc_mean_ci(&[0.0, 2.0], 0.95).unwrap();
        assert_eq!(m, 1.0);
        assert!((hw - 1.959963984540054).abs() < 1e-9);
        assert!(mc_mean_ci(&[1.0], 0.95).is_err());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[0.0, 1.0], &[5.0, 6.0]).unwrap(), 1.0);
        assert!((ks_distance(&[1.0, 2.0, 3.0, 4.0], &[3.5]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 2.0).abs() < 1e-15);
        assert!(f.slope_se < 1e-15);
    }

    #[test]
    fn accumulator_matches_direct() {
        let rows = [[1.0, 2.0], [3.0, 2.0], [2.0, 5.0]];
        let mut acc = CurveAccumulator::new(2);
        rows.iter().for_each(|r| acc.push(r));
        let (m, se) = mean_and_se(&[1.0, 3.0, 2.0]).unwrap();
        assert!((acc.mean()[0] - m).abs() < 1e-15 && (acc.std_error()[0] - se).abs() < 1e-15);
    }
}
