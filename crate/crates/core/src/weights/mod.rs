//! Positive nondecreasing weights normalised by `g(1) = 1`, their doubling
//! constants, dyadic-type block sequences, the derivative regularity condition
//! and the integral regularization of a weight.

mod jet;
mod parse;
mod regularize;
mod table;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

pub use jet::Jet;
pub use regularize::{moment, regularize, regularize_with, stieltjes_integral, RegularizeOptions};
pub use table::Table;

use crate::{Error, Result};

enum Family {
    Power(f64),
    LogPower(f64),
    Product(Weight, Weight),
    Quotient(Weight, Weight),
    LogOf(Weight),
    PowOf(f64, Weight),
    Regularized {
        q: Weight,
        /// `1 / f_raw(1)`
        scale: f64,
        memo: Mutex<HashMap<u64, f64>>,
    },
    Tabulated(Table),
}

/// A weight `g: [1, ∞) → [1, ∞)` with `g(1) = 1`. Arguments below 1 are
/// clamped to 1, so `g(0) = g(1) = 1` when a weight is applied at degree 0.
#[derive(Clone)]
pub struct Weight {
    family: Arc<Family>,
    doubling: Option<f64>,
}

impl Weight {
    fn from_family(family: Family) -> Weight {
        Weight {
            family: Arc::new(family),
            doubling: None,
        }
    }

    /// `x^alpha`.
    pub fn power(alpha: f64) -> Weight {
        Weight::from_family(Family::Power(alpha))
    }

    /// `(1 + ln x)^beta`.
    pub fn log_power(beta: f64) -> Weight {
        Weight::from_family(Family::LogPower(beta))
    }

    pub fn product(a: Weight, b: Weight) -> Weight {
        Weight::from_family(Family::Product(a, b))
    }

    pub fn quotient(a: Weight, b: Weight) -> Weight {
        Weight::from_family(Family::Quotient(a, b))
    }

    /// `1 + ln w(x)`.
    pub fn log_of(w: Weight) -> Weight {
        Weight::from_family(Family::LogOf(w))
    }

    /// `w(x)^alpha`.
    pub fn pow_of(alpha: f64, w: Weight) -> Weight {
        Weight::from_family(Family::PowOf(alpha, w))
    }

    /// The regularization `x ↦ f(x) / f(1)` of `q`, with `f` from [`regularize`].
    pub fn regularized(q: Weight) -> Result<Weight> {
        let f1 = regularize(&q, 1.0)?;
        Ok(Weight::from_family(Family::Regularized {
            q,
            scale: 1.0 / f1,
            memo: Mutex::new(HashMap::new()),
        }))
    }

    pub fn tabulated(table: Table) -> Weight {
        Weight::from_family(Family::Tabulated(table))
    }

    /// Parses the weight mini-language; see the crate README for the grammar.
    pub fn parse(spec: &str) -> Result<Weight> {
        parse::parse(spec)
    }

    /// The doubling constant, if it has been computed with [`Weight::with_doubling`].
    pub fn doubling(&self) -> Option<f64> {
        self.doubling
    }

    /// Computes and stores the doubling constant over `[1, x_max]`.
    pub fn with_doubling(mut self, x_max: f64) -> Result<Weight> {
        self.doubling = Some(doubling_constant(&self, x_max)?);
        Ok(self)
    }

    pub fn is_tabulated(&self) -> bool {
        match &*self.family {
            Family::Tabulated(_) => true,
            Family::Power(_) | Family::LogPower(_) => false,
            Family::Product(a, b) | Family::Quotient(a, b) => a.is_tabulated() || b.is_tabulated(),
            Family::LogOf(w) | Family::PowOf(_, w) => w.is_tabulated(),
            Family::Regularized { .. } => false,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_raw(x.max(1.0))
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match &*self.family {
            Family::Power(a) => {
                if a.fract() == 0.0 && a.abs() <= 16.0 {
                    x.powi(*a as i32)
                } else {
                    x.powf(*a)
                }
            }
            Family::LogPower(b) => (1.0 + x.ln()).powf(*b),
            Family::Product(a, b) => a.eval_raw(x) * b.eval_raw(x),
            Family::Quotient(a, b) => a.eval_raw(x) / b.eval_raw(x),
            Family::LogOf(w) => 1.0 + w.eval_raw(x).ln(),
            Family::PowOf(a, w) => w.eval_raw(x).powf(*a),
            Family::Regularized { q, scale, memo } => {
                if let Some(v) = memo.lock().unwrap().get(&x.to_bits()) {
                    return *v;
                }
                let v = regularize(q, x).map(|f| f * scale).unwrap_or(f64::NAN);
                memo.lock().unwrap().insert(x.to_bits(), v);
                v
            }
            Family::Tabulated(t) => t.eval(x),
        }
    }

    /// Taylor jet of order `order` at `x >= 1`. Tables have no derivatives.
    pub fn jet(&self, x: f64, order: usize) -> Result<Jet> {
        let x = x.max(1.0);
        Ok(match &*self.family {
            Family::Power(a) => Jet::variable(x, order).powf(*a),
            Family::LogPower(b) => Jet::variable(x, order).ln().add_constant(1.0).powf(*b),
            Family::Product(a, b) => a.jet(x, order)?.mul(&b.jet(x, order)?),
            Family::Quotient(a, b) => a.jet(x, order)?.div(&b.jet(x, order)?),
            Family::LogOf(w) => w.jet(x, order)?.ln().add_constant(1.0),
            Family::PowOf(a, w) => w.jet(x, order)?.powf(*a),
            Family::Regularized { q, scale, .. } => {
                let opts = RegularizeOptions::default();
                let mut coeffs = Vec::with_capacity(order + 1);
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    coeffs.push(moment(q, x, k as u32, &opts)? / fact);
                }
                Jet(coeffs).recip().scale(*scale)
            }
            Family::Tabulated(_) => return Err(Error::RegularityUndefined),
        })
    }

    /// `q'(s) / q(s)^2`, the density of the measure `d(-1/q)`.
    pub(crate) fn reciprocal_density(&self, s: f64) -> Result<f64> {
        if let Family::Tabulated(t) = &*self.family {
            return Ok(t.reciprocal_density(s));
        }
        let j = self.jet(s, 1)?;
        Ok(j.0[1] / (j.0[0] * j.0[0]))
    }

    /// Breakpoints of the piecewise-smooth structure of the weight (table
    /// nodes), used to split integration ranges.
    pub(crate) fn breakpoints(&self, out: &mut Vec<f64>) {
        match &*self.family {
            Family::Tabulated(t) => out.extend_from_slice(t.xs()),
            Family::Product(a, b) | Family::Quotient(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            Family::LogOf(w) | Family::PowOf(_, w) => w.breakpoints(out),
            _ => {}
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.family {
            Family::Power(a) => write!(f, "pow:{a}"),
            Family::LogPower(b) => write!(f, "logpow:{b}"),
            Family::Product(a, b) => write!(f, "mul:{a},{b}"),
            Family::Quotient(a, b) => write!(f, "div:{a},{b}"),
            Family::LogOf(w) => write!(f, "log:{w}"),
            Family::PowOf(a, w) => write!(f, "powof:{a},{w}"),
            Family::Regularized { q, .. } => write!(f, "reg:{q}"),
            Family::Tabulated(t) => write!(f, "table:{}", t.label()),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

/// Number of log-spaced points used for doubling constants.
pub const DOUBLING_GRID: usize = 512;

fn log_grid(x_max: f64, points: usize) -> Vec<f64> {
    let top = x_max.ln();
    (0..points)
        .map(|i| (top * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// `sup g(2x) / g(x)` over a log-spaced grid of `[1, x_max]`. Fails with
/// "not a weight" when `g` is not positive and nondecreasing on the grid.
pub fn doubling_constant(g: &Weight, x_max: f64) -> Result<f64> {
    doubling_constant_on(g, x_max, DOUBLING_GRID)
}

pub fn doubling_constant_on(g: &Weight, x_max: f64, points: usize) -> Result<f64> {
    if !(x_max >= 2.0) {
        return Err(Error::InvalidArgument(format!("x_max = {x_max} < 2")));
    }
    let grid = log_grid(x_max, points.max(2));
    let mut prev = 0.0;
    let mut sup: f64 = 0.0;
    for &x in &grid {
        let gx = g.eval(x);
        let g2x = g.eval(2.0 * x);
        if !(gx > 0.0) || !gx.is_finite() || !g2x.is_finite() {
            return Err(Error::NotAWeight(format!("{g} is not positive and finite at {x}")));
        }
        if gx < prev * (1.0 - 1e-12) || g2x < gx * (1.0 - 1e-12) {
            return Err(Error::NotAWeight(format!("{g} decreases near {x}")));
        }
        prev = gx;
        sup = sup.max(g2x / gx);
    }
    Ok(sup)
}

/// Default ceiling on block cuts.
pub const BLOCK_CAP: u64 = 1 << 52;

/// Cuts `n_0 < n_1 < …` with `n_{k+1} = min{l : f(l) >= A f(n_k)}`.
#[derive(Debug, Clone)]
pub struct BlockSequence {
    pub cuts: Vec<u64>,
    pub ratio_a: f64,
    pub weight: Weight,
    /// Set when the cap stopped the construction before `k_max`.
    pub truncated: bool,
}

impl BlockSequence {
    /// Index `m` of the block `J_m` holding degree `k`: `J_0 = [0, n_0]`,
    /// `J_m = (n_{m-1}, n_m]`. `None` past the last cut.
    pub fn block_of(&self, k: u64) -> Option<usize> {
        let i = self.cuts.partition_point(|&c| c < k);
        (i < self.cuts.len()).then_some(i)
    }

    /// Degree range of block `m` as an inclusive pair.
    pub fn block_range(&self, m: usize) -> (u64, u64) {
        if m == 0 {
            (0, self.cuts[0])
        } else {
            (self.cuts[m - 1] + 1, self.cuts[m])
        }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Checks `A f(n_k) <= f(n_{k+1}) <= A D f(n_k)` up to a relative `1e-12`.
    pub fn satisfies_invariant(&self, doubling: f64) -> bool {
        let f = &self.weight;
        self.cuts.windows(2).all(|w| {
            let (a, b) = (f.eval(w[0] as f64), f.eval(w[1] as f64));
            let lo = self.ratio_a * a;
            b >= lo * (1.0 - 1e-12) && b <= lo * doubling * (1.0 + 1e-12)
        })
    }
}

/// Builds `k_max + 1` cuts starting at `n0` (fewer, flagged, if `cap` is hit).
pub fn blocks(f: &Weight, a: f64, k_max: usize, n0: u64) -> Result<BlockSequence> {
    blocks_capped(f, a, k_max, n0, BLOCK_CAP)
}

pub fn blocks_capped(f: &Weight, a: f64, k_max: usize, n0: u64, cap: u64) -> Result<BlockSequence> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("block ratio A = {a} must exceed 1")));
    }
    if n0 > cap {
        return Err(Error::InvalidArgument(format!("n0 = {n0} exceeds cap {cap}")));
    }
    let reaches = |l: u64, target: f64| f.eval(l as f64) >= target * (1.0 - 1e-13);
    let mut cuts = vec![n0];
    let mut truncated = false;
    while cuts.len() <= k_max {
        let last = *cuts.last().unwrap();
        let target = a * f.eval(last as f64);
        // exponential search for an upper bracket, then bisection
        let mut lo = last;
        let mut hi = last.max(1) * 2;
        while !reaches(hi, target) {
            if hi >= cap {
                break;
            }
            lo = hi;
            hi = hi.saturating_mul(2).min(cap);
        }
        if !reaches(hi, target) {
            truncated = true;
            break;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reaches(mid, target) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        cuts.push(hi);
    }
    Ok(BlockSequence {
        cuts,
        ratio_a: a,
        weight: f.clone(),
        truncated,
    })
}

/// `max_{1 <= m <= d+1, t} |f^{(m)}(t)| t^{m-1} / f'(t)`.
pub fn regularity_ratio(f: &Weight, d: u32, t_grid: &[f64]) -> Result<f64> {
    if f.is_tabulated() {
        return Err(Error::RegularityUndefined);
    }
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let jet = f.jet(t, d as usize + 1)?;
        let d1 = jet.derivative(1);
        if !(d1 > 0.0) {
            return Err(Error::IrregularWeight(format!("{f}: f'({t}) = {d1}")));
        }
        for m in 1..=d as usize + 1 {
            worst = worst.max(jet.derivative(m).abs() * t.powi(m as i32 - 1) / d1);
        }
    }
    Ok(worst)
}

/// Log-spaced grid on `[1, t_max]` used by default regularity checks.
pub fn default_regularity_grid(t_max: f64) -> Vec<f64> {
    log_grid(t_max, 64)
}

const REGULARITY_LIMIT: f64 = 1e6;

/// Regularity check against a fixed ceiling on the ratio.
pub fn ensure_regular(f: &Weight, d: u32, t_max: f64) -> Result<f64> {
    let r = regularity_ratio(f, d, &default_regularity_grid(t_max))?;
    if !r.is_finite() || r > REGULARITY_LIMIT {
        return Err(Error::IrregularWeight(format!("{f}: ratio {r}")));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_and_clamp() {
        for spec in ["pow:0.5", "pow:2", "logpow:1.5", "mul:pow:1,logpow:-1", "log:pow:1"] {
            let w = Weight::parse(spec).unwrap();
            assert!((w.eval(1.0) - 1.0).abs() < 1e-15, "{spec}");
            assert_eq!(w.eval(0.0), w.eval(1.0));
        }
    }

    #[test]
    fn doubling_examples() {
        let d = doubling_constant(&Weight::power(0.7), 1e6).unwrap();
        assert!((d - 2f64.powf(0.7)).abs() < 1e-12);
        let d = doubling_constant(&Weight::power(1.0), 1e6).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        let d = doubling_constant(&Weight::log_power(1.0), 1e6).unwrap();
        assert!((d - (1.0 + 2f64.ln())).abs() < 1e-12);
        let fine = doubling_constant_on(&Weight::log_power(1.0), 1e6, 4096).unwrap();
        assert!((fine - d).abs() < 1e-6);
    }

    #[test]
    fn doubling_rejects_decreasing() {
        let w = Weight::power(-1.0);
        assert!(matches!(doubling_constant(&w, 100.0), Err(Error::NotAWeight(_))));
    }

    #[test]
    fn block_examples() {
        let b = blocks(&Weight::power(1.0), 2.0, 6, 1).unwrap();
        assert_eq!(b.cuts, vec![1, 2, 4, 8, 16, 32, 64]);
        let b = blocks(&Weight::power(2.0), 2.0, 8, 1).unwrap();
        let mut expected = vec![1u64];
        for _ in 0..8 {
            let n = *expected.last().unwrap();
            expected.push((1..).find(|l: &u64| l * l >= 2 * n * n).unwrap());
        }
        assert_eq!(b.cuts, expected);
        assert_eq!(&b.cuts[..5], &[1, 2, 3, 5, 8]);
        let f = Weight::log_power(1.0);
        let b = blocks(&f, 2.0, 10, 1).unwrap();
        assert!(b.truncated);
        for w in b.cuts.windows(2).filter(|w| w[1] < 1_000_000_000) {
            let target = 2.0 * f.eval(w[0] as f64);
            assert!(f.eval(w[1] as f64) >= target && f.eval((w[1] - 1) as f64) < target);
        }
        assert_eq!(&b.cuts[..3], &[1, 3, 25]);
        let d = doubling_constant(&f, 1e6).unwrap();
        assert!(b.satisfies_invariant(d));
    }

    #[test]
    fn block_partition() {
        let b = blocks(&Weight::power(1.0), 2.0, 4, 1).unwrap();
        assert_eq!(b.block_of(0), Some(0));
        assert_eq!(b.block_of(1), Some(0));
        assert_eq!(b.block_of(2), Some(1));
        assert_eq!(b.block_of(3), Some(2));
        assert_eq!(b.block_of(16), Some(4));
        assert_eq!(b.block_of(17), None);
        assert_eq!(b.block_range(2), (3, 4));
    }

    #[test]
    fn regularity_examples() {
        let grid = default_regularity_grid(1e4);
        let r = regularity_ratio(&Weight::power(1.0), 2, &grid).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = regularity_ratio(&Weight::log_power(1.0), 1, &grid).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = regularity_ratio(&Weight::power(2.0), 1, &grid).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let t = Table::new(vec![1.0, 2.0], vec![1.0, 2.0], "t").unwrap();
        assert_eq!(
            regularity_ratio(&Weight::tabulated(t), 1, &grid),
            Err(Error::RegularityUndefined)
        );
        assert!(matches!(
            regularity_ratio(&Weight::power(0.0), 1, &grid),
            Err(Error::IrregularWeight(_))
        ));
    }

    #[test]
    fn regularized_weight_derivatives_match_finite_differences() {
        let f = Weight::regularized(Weight::power(1.0)).unwrap();
        let x = 5.0;
        let j = f.jet(x, 2).unwrap();
        let h = 1e-3;
        let fd1 = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
        let fd2 = (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h);
        assert!((j.value() - f.eval(x)).abs() < 1e-12 * j.value());
        assert!((j.derivative(1) - fd1).abs() < 1e-6 * fd1.abs());
        assert!((j.derivative(2) - fd2).abs() < 1e-3 * fd2.abs());
    }
}
