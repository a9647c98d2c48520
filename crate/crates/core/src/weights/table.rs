//! Tabulated weights: linear interpolation between nodes, power-law
//! continuation past the last node.

use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// exponent of the continuation `y_n (x / x_n)^tail`
    tail: f64,
    label: String,
}

impl Table {
    /// `xs` strictly increasing from 1, `ys` positive; values are rescaled so
    /// that the first equals 1.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, label: &str) -> Result<Table> {
        let bad = |reason: &str| Error::WeightSpec {
            spec: format!("table:{label}"),
            reason: reason.to_string(),
        };
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(bad("need at least two (x, g) rows"));
        }
        if (xs[0] - 1.0).abs() > 1e-12 {
            return Err(bad("first x must be 1"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(bad("x must be strictly increasing"));
        }
        if ys.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
            return Err(bad("values must be positive and finite"));
        }
        let y0 = ys[0];
        let ys: Vec<f64> = ys.iter().map(|y| y / y0).collect();
        let n = xs.len();
        let tail = (ys[n - 1] / ys[n - 2]).ln() / (xs[n - 1] / xs[n - 2]).ln();
        Ok(Table {
            xs,
            ys,
            tail,
            label: label.to_string(),
        })
    }

    /// Two-column CSV; lines starting with `#` and a non-numeric header are skipped.
    pub fn from_csv(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = (cols.len() == 2)
                .then(|| Some((cols[0].parse::<f64>().ok()?, cols[1].parse::<f64>().ok()?)))
                .flatten();
            match parsed {
                Some((x, y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                None if xs.is_empty() && i == 0 => continue,
                None => {
                    return Err(Error::WeightSpec {
                        spec: format!("table:{}", path.display()),
                        reason: format!("line {}: expected `x,g`", i + 1),
                    })
                }
            }
        }
        Table::new(xs, ys, &path.display().to_string())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return None;
        }
        Some(self.xs.partition_point(|&v| v <= x).saturating_sub(1))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        match self.segment(x) {
            Some(i) => {
                let u = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.ys[i] + u * (self.ys[i + 1] - self.ys[i])
            }
            None => self.ys[n - 1] * (x / self.xs[n - 1]).powf(self.tail),
        }
    }

    /// Density of `d(-1/q)` with `1/q` interpolated linearly between nodes.
    pub fn reciprocal_density(&self, s: f64) -> f64 {
        match self.segment(s) {
            Some(i) => (1.0 / self.ys[i] - 1.0 / self.ys[i + 1]) / (self.xs[i + 1] - self.xs[i]),
            None => self.tail / (s * self.eval(s)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_tail() {
        let t = Table::new(vec![1.0, 2.0, 4.0], vec![2.0, 4.0, 8.0], "lin").unwrap();
        assert_eq!(t.eval(1.0), 1.0);
        assert_eq!(t.eval(1.5), 1.5);
        assert_eq!(t.eval(3.0), 3.0);
        assert!((t.eval(16.0) - 16.0).abs() < 1e-12);
        assert!((t.reciprocal_density(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Table::new(vec![1.0], vec![1.0], "x").is_err());
        assert!(Table::new(vec![2.0, 3.0], vec![1.0, 1.0], "x").is_err());
        assert!(Table::new(vec![1.0, 1.0], vec![1.0, 1.0], "x").is_err());
        assert!(Table::new(vec![1.0, 2.0], vec![1.0, -1.0], "x").is_err());
    }
}
