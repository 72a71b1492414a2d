//! Metaorder execution profiles `f` on `[0, 1]`.

use std::fs;
use std::path::Path;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `f = 1_{[0, 1]}`.
    Flat,
    /// Piecewise-linear interpolation of `(x, f(x))` samples covering `[0, 1]`.
    Table { name: String, xs: Vec<f64>, fs: Vec<f64> },
}

impl Profile {
    pub fn table(name: impl Into<String>, xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() != fs.len() || xs.len() < 2 {
            return domain("profile table needs at least two (x, f) pairs of equal length");
        }
        if xs[0] != 0.0 || *xs.last().expect("len >= 2") != 1.0 {
            return domain("profile table must start at x = 0 and end at x = 1");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("profile abscissae must be strictly increasing");
        }
        if let Some(v) = fs.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return domain(format!("profile values must be finite and non-negative, found {v}"));
        }
        Ok(Self::Table { name: name.into(), xs, fs })
    }

    /// Reads `x,f` rows; `#` comments and a non-numeric header are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut fs_ = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Usage(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(f)) => {
                    xs.push(x);
                    fs_.push(f);
                }
                _ if xs.is_empty() => continue,
                _ => return Err(Error::Usage(format!("{}:{}: not a number", path.display(), lineno + 1))),
            }
        }
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "custom".into());
        Self::table(name, xs, fs_)
    }

    pub fn id(&self) -> String {
        match self {
            Self::Flat => "flat".into(),
            Self::Table { name, .. } => format!("custom:{name}"),
        }
    }

    /// `f(x)`, zero outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            Self::Flat => 1.0,
            Self::Table { xs, fs, .. } => {
                let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (x - x0) / (x1 - x0);
                fs[i - 1] * (1.0 - w) + fs[i] * w
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::Table { fs, .. } => fs.iter().copied().fold(0.0, f64::max),
        }
    }

    /// `∫_0^x f`.
    pub fn integral_to(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            Self::Flat => x,
            Self::Table { xs, fs, .. } => {
                let mut acc = 0.0;
                for i in 1..xs.len() {
                    if xs[i - 1] >= x {
                        break;
                    }
                    let hi = xs[i].min(x);
                    let f_hi = self.eval(hi);
                    acc += 0.5 * (fs[i - 1] + f_hi) * (hi - xs[i - 1]);
                }
                acc
            }
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.integral_to(1.0)
    }

    /// Abscissae where `f` may fail to be smooth (interior table nodes).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Flat => vec![0.0, 1.0],
            Self::Table { xs, .. } => xs.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_profile() {
        let f = Profile::Flat;
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.5), 0.0);
        assert_eq!(f.integral_to(0.25), 0.25);
        assert_eq!(f.l1_norm(), 1.0);
    }

    #[test]
    fn table_profile() {
        let f = Profile::table("ramp", vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((f.eval(0.25) - 0.5).abs() < 1e-15);
        assert!((f.integral_to(0.5) - 0.25).abs() < 1e-15);
        assert!((f.integral_to(0.75) - 0.4375).abs() < 1e-15);
        assert!((f.l1_norm() - 0.5).abs() < 1e-15);
        assert!(Profile::table("bad", vec![0.0, 1.0], vec![1.0, -0.1]).is_err());
        assert!(Profile::table("bad", vec![0.0, 0.9], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("front.csv");
        std::fs::write(&p, "# front-loaded\nx,f\n0,2\n0.5,1\n1,0\n").unwrap();
        let f = Profile::from_csv(&p).unwrap();
        assert_eq!(f.id(), "custom:front");
        assert!((f.l1_norm() - 1.0).abs() < 1e-15);
    }
}
