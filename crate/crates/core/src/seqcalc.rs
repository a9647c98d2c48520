//! Finite-difference calculus on real sequences.
//!
//! Conventions: `(Δb)_k = b_k - b_{k+1}`, sequences are zero beyond their
//! stored values, and the Cesàro numbers are `A_k^m = binom(k + m, k)`.

use crate::weights::Weight;
use crate::{Error, Result};

/// A real sequence indexed from zero, identically zero past its stored values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealSequence {
    values: Vec<f64>,
}

impl RealSequence {
    pub fn new(values: Vec<f64>) -> Self {
        RealSequence { values }
    }

    pub fn zeros() -> Self {
        RealSequence { values: Vec::new() }
    }

    /// The first `len` terms of `k -> f(k)`.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Self {
        RealSequence {
            values: (0..len).map(f).collect(),
        }
    }

    /// Indicator of the single index `k`.
    pub fn unit(k: usize) -> Self {
        let mut values = vec![0.0; k + 1];
        values[k] = 1.0;
        RealSequence { values }
    }

    /// Last index that may hold a nonzero value.
    pub fn support_bound(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn binomial_row(l: u32) -> Vec<f64> {
    let mut row = vec![1.0; l as usize + 1];
    for j in 1..=l as usize {
        row[j] = row[j - 1] * (l as usize + 1 - j) as f64 / j as f64;
    }
    row
}

/// `Δ^l b`, with `(Δ^l b)_k = Σ_j (-1)^j C(l, j) b_{k+j}`.
pub fn forward_difference(b: &RealSequence, l: u32) -> RealSequence {
    if l == 0 {
        return b.clone();
    }
    let row = binomial_row(l);
    RealSequence::from_fn(b.len(), |k| {
        row.iter()
            .enumerate()
            .map(|(j, c)| {
                let term = c * b.get(k + j);
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum()
    })
}

/// `A_k^m = (k+m)(k+m-1)...(m+1)/k!`, evaluated by the multiplicative recurrence.
pub fn cesaro_number(k: u64, m: f64) -> f64 {
    let mut a = 1.0;
    for i in 1..=k {
        a *= (m + i as f64) / i as f64;
    }
    a
}

/// Like [`cesaro_number`] but flags the degenerate values `A_k^m = 0`, `k > 0`,
/// which occur for negative integer `m`.
pub fn cesaro_number_checked(k: u64, m: f64) -> Result<f64> {
    let a = cesaro_number(k, m);
    if k > 0 && a == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "A_{k}^{m} vanishes; Cesàro means of order {m} are undefined at {k}"
        )));
    }
    Ok(a)
}

/// `A_0^m, ..., A_{k_max}^m`.
pub fn cesaro_numbers(k_max: usize, m: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut a = 1.0;
    out.push(a);
    for i in 1..=k_max {
        a *= (m + i as f64) / i as f64;
        out.push(a);
    }
    out
}

/// The Cesàro factors `A_{n-j}^m / A_n^m` for `j = 0..=n`.
///
/// Computed as a running product so that no `A` is formed explicitly.
pub fn cesaro_factors(n: usize, m: f64) -> Vec<f64> {
    // A_{n-j-1}/A_{n-j} = (n-j)/(n-j+m)
    let mut out = Vec::with_capacity(n + 1);
    let mut r = 1.0;
    out.push(r);
    for j in 0..n {
        let i = (n - j) as f64;
        r *= i / (i + m);
        out.push(r);
    }
    out
}

/// `s_n^m(b) = (1/A_n^m) Σ_{k<=n} A_{n-k}^m b_k`.
pub fn cesaro_means(b: &RealSequence, n: usize, m: f64) -> f64 {
    cesaro_factors(n, m)
        .iter()
        .enumerate()
        .map(|(k, w)| w * b.get(k))
        .sum()
}

/// Double-double accumulator built from error-free transformations.
#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, other: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    fn add_prod(self, a: f64, b: f64) -> Dd {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(Dd { hi: p, lo: e })
    }

    /// `self * b` for a plain `b`.
    fn scale(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p) + self.lo * b;
        let (hi, lo) = Self::two_sum(p, e);
        Dd { hi, lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Both sides of the summation by parts identity
/// `Σ a_k b_k = Σ_k (Δ^{m+1} a)_k A_k^m s_k^m(b)` for finitely supported `a`.
///
/// Both sides are accumulated in double-double arithmetic: the right-hand side
/// cancels heavily, and plain `f64` sums lose several digits for `m >= 2`.
pub fn summation_by_parts_check(a: &RealSequence, b: &RealSequence, m: u32) -> (f64, f64) {
    let lhs = (0..a.len().min(b.len()))
        .fold(Dd::default(), |acc, k| acc.add_prod(a.get(k), b.get(k)))
        .value();
    let row = binomial_row(m + 1);
    let last = a.len() + m as usize;
    let cesaro = integer_cesaro_numbers(last, m).unwrap_or_else(|| cesaro_numbers(last, m as f64));
    let mut rhs = Dd::default();
    for k in 0..=last {
        let diff = row.iter().enumerate().fold(Dd::default(), |acc, (j, c)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc.add_prod(sign * c, a.get(k + j))
        });
        if diff.hi == 0.0 {
            continue;
        }
        // A_k^m s_k^m(b) = Σ_{j<=k} A_{k-j}^m b_j
        let partial = (0..=k.min(b.support_bound()))
            .fold(Dd::default(), |acc, j| acc.add_prod(cesaro[k - j], b.get(j)));
        let term = partial.scale(diff.hi).add(partial.scale(diff.lo));
        rhs = rhs.add(term);
    }
    (lhs, rhs.value())
}

/// `A_k^m = C(k + m, m)` for `k <= k_max` in integer arithmetic; `None` on
/// overflow of `u128`.
fn integer_cesaro_numbers(k_max: usize, m: u32) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut a: u128 = 1;
    out.push(1.0);
    for k in 1..=k_max as u128 {
        // C(k+m, m) = C(k-1+m, m) (k+m) / k exactly
        a = a.checked_mul(k + m as u128)? / k;
        out.push(a as f64);
    }
    Some(out)
}

fn band_sequence(f: &Weight, n: u64, d: u32) -> (RealSequence, Vec<f64>) {
    let n = n as usize;
    let cesaro = cesaro_numbers(n, d as f64);
    // f(0) is read as f(1) through the weight's clamp below x = 1.
    let c = RealSequence::from_fn(n + 1, |j| cesaro[n - j] * f.eval(j as f64));
    (c, cesaro)
}

/// `Σ_{j<=n} |Δ^{d+1}(A_{n-j}^d f(j))| A_j^d / A_n^d`, the quantity bounded by
/// `C f(n)` for regular weights. The band sequence is zero for `j > n`.
pub fn weighted_difference_sum(f: &Weight, n: u64, d: u32) -> f64 {
    let (c, cesaro) = band_sequence(f, n, d);
    let diff = forward_difference(&c, d + 1);
    let an = cesaro[n as usize];
    (0..=n as usize)
        .map(|j| diff.get(j).abs() * cesaro[j] / an)
        .sum()
}

/// The same sum without absolute values. It telescopes to `f(0) = f(1)`, which
/// makes it a cheap consistency check on the difference machinery.
pub fn weighted_difference_sum_signed(f: &Weight, n: u64, d: u32) -> f64 {
    let (c, cesaro) = band_sequence(f, n, d);
    let diff = forward_difference(&c, d + 1);
    let an = cesaro[n as usize];
    (0..=n as usize).map(|j| diff.get(j) * cesaro[j] / an).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_of_constant_vanishes_inside_support() {
        let b = RealSequence::new(vec![1.0; 10]);
        let d = forward_difference(&b, 1);
        for k in 0..9 {
            assert_eq!(d.get(k), 0.0);
        }
        // zero extension makes the boundary visible
        assert_eq!(d.get(9), 1.0);
    }

    #[test]
    fn second_difference_of_square_is_two() {
        let b = RealSequence::from_fn(20, |k| (k * k) as f64);
        let d = forward_difference(&b, 2);
        for k in 0..18 {
            assert_eq!(d.get(k), 2.0);
        }
    }

    #[test]
    fn first_difference_direct() {
        let b = RealSequence::new(vec![5.0, 3.0]);
        let d = forward_difference(&b, 1);
        assert_eq!(d.values(), &[2.0, 3.0]);
        assert_eq!(d.get(2), 0.0);
        assert_eq!(forward_difference(&b, 0), b);
    }

    #[test]
    fn cesaro_number_examples() {
        assert_eq!(cesaro_number(3, 2.0), 10.0);
        for k in 0..50 {
            assert_eq!(cesaro_number(k, 0.0), 1.0);
        }
        assert_eq!(cesaro_number(4, 1.0), 5.0);
        assert_eq!(cesaro_number(0, -3.0), 1.0);
        assert!(cesaro_number_checked(3, -2.0).is_err());
        assert!(cesaro_number_checked(1, -0.5).is_ok());
    }

    #[test]
    fn cesaro_number_recurrence_and_growth() {
        let m = 2.5;
        let table = cesaro_numbers(4096, m);
        for k in 1..=4096usize {
            let ratio = table[k] / table[k - 1];
            assert!((ratio - (k as f64 + m) / k as f64).abs() < 1e-12);
        }
        assert!(table[4096].is_finite());
        // A_k^m <= C_m k^m: the normalised ratio settles to 1/Γ(m+1)
        for m in [1.0, 2.0, 3.0] {
            let table = cesaro_numbers(1024, m);
            let ratios: Vec<f64> = (1..=1024).map(|k| table[k] / (k as f64).powf(m)).collect();
            let sup = ratios.iter().cloned().fold(0.0, f64::max);
            assert!(sup.is_finite() && sup <= m + 1.0);
            assert!((ratios[1023] - ratios[1022]).abs() < 1e-3);
        }
    }

    #[test]
    fn cesaro_means_examples() {
        let b = RealSequence::new(vec![1.5]);
        for n in 0..10 {
            for m in [0.0, 1.0, 2.5] {
                assert!((cesaro_means(&b, n, m) - 1.5).abs() < 1e-15);
            }
        }
        let ones = RealSequence::new(vec![1.0; 10]);
        assert!((cesaro_means(&ones, 2, 1.0) * 3.0 - 6.0).abs() < 1e-14);
        let unit = RealSequence::unit(0);
        assert!((cesaro_means(&unit, 5, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cesaro_factors_match_ratio_of_numbers() {
        let n = 40;
        let m = 1.7;
        let f = cesaro_factors(n, m);
        for (j, w) in f.iter().enumerate() {
            let direct = cesaro_number((n - j) as u64, m) / cesaro_number(n as u64, m);
            assert!((w - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn summation_by_parts_small_cases() {
        let e0 = RealSequence::unit(0);
        let (l, r) = summation_by_parts_check(&e0, &e0, 1);
        assert_eq!(l, 1.0);
        assert!((r - 1.0).abs() < 1e-15);
        let a = RealSequence::new(vec![0.3, -1.2, 4.0]);
        let (l, r) = summation_by_parts_check(&a, &RealSequence::zeros(), 2);
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn weighted_difference_sum_constant_weight() {
        let one = Weight::power(0.0);
        for n in 1..=32 {
            for d in 1..=3 {
                let v = weighted_difference_sum(&one, n, d);
                assert!((v - 1.0).abs() < 1e-9, "n={n} d={d} v={v}");
            }
        }
    }

    #[test]
    fn weighted_difference_sum_linear_weight() {
        let x = Weight::power(1.0);
        let v = weighted_difference_sum(&x, 16, 1);
        assert!(v.is_finite() && v > 0.0 && v <= 4.0 * 16.0);
        assert_eq!(weighted_difference_sum(&x, 0, 1), 1.0);
        for n in [4, 16, 64] {
            let s = weighted_difference_sum_signed(&x, n, 2);
            assert!((s - 1.0).abs() < 1e-9 * n as f64);
        }
    }

    fn seq(max_len: usize) -> impl Strategy<Value = RealSequence> {
        prop::collection::vec(-10.0f64..10.0, 0..max_len).prop_map(RealSequence::new)
    }

    proptest! {
        #[test]
        fn prop_difference_composes(b in seq(24), l1 in 0u32..=4, l2 in 0u32..=4) {
            let lhs = forward_difference(&forward_difference(&b, l2), l1);
            let rhs = forward_difference(&b, l1 + l2);
            let scale = 1.0 + b.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..b.len() + 8 {
                prop_assert!((lhs.get(k) - rhs.get(k)).abs() <= 1e-12 * scale * 256.0);
            }
        }

        #[test]
        fn prop_difference_annihilates_polynomials(
            coeffs in prop::collection::vec(-3.0f64..3.0, 1..4),
            extra in 0u32..3,
        ) {
            let deg = coeffs.len() - 1;
            let b = RealSequence::from_fn(40, |k| {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * k as f64 + c)
            });
            let l = deg as u32 + 1 + extra;
            let d = forward_difference(&b, l);
            let scale = 40f64.powi(deg as i32) * 8.0;
            for k in 0..(40 - l as usize) {
                prop_assert!(d.get(k).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn prop_summation_by_parts(a in seq(17), b in seq(17), m in 1u32..=3) {
            let (lhs, rhs) = summation_by_parts_check(&a, &b, m);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
