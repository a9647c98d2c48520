//! Zonal kernels on the sphere `S^N ⊂ R^{N+1}`: zonal harmonics, Cesàro
//! kernels, smooth cutoff profiles and the de la Vallée-Poussin type kernels
//! built from them, with averages and L¹ norms under the normalised measure.

use std::f64::consts::PI;

use crate::quadrature::{legendre_cached, sphere_rule};
use crate::seqcalc::cesaro_factors;
use crate::weights::{ensure_regular, Weight};
use crate::{Error, Result};

/// Environment variable overriding the number of panels used for L¹ norms.
pub const QUAD_ORDER_ENV: &str = "CESARO_GROWTH_QUAD_ORDER";

/// `dim H_k` on `S^N`.
pub fn dim_harmonics(dim: u32, k: u64) -> u64 {
    assert!(dim >= 1);
    if k == 0 {
        return 1;
    }
    if dim == 1 {
        return 2;
    }
    // (2k + N - 1)/(N - 1) · binom(k + N - 2, N - 2)
    let n = dim as u128;
    let k = k as u128;
    let mut binom: u128 = 1;
    for i in 1..=(n - 2) {
        binom = binom * (k + i) / i;
    }
    ((2 * k + n - 1) * binom / (n - 1)) as u64
}

/// `dim H_k` in floating point, usable where the integer would overflow.
pub fn dim_harmonics_f64(dim: u32, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if dim == 1 {
        return 2.0;
    }
    let n = dim as f64;
    let kf = k as f64;
    let mut binom = 1.0;
    for i in 1..=(dim - 2) {
        binom *= (kf + i as f64) / i as f64;
    }
    (2.0 * kf + n - 1.0) * binom / (n - 1.0)
}

/// Smallest integer strictly greater than `(N - 1)/2`.
pub fn default_d(dim: u32) -> u32 {
    (dim - 1) / 2 + 1
}

/// Normalised Gegenbauer values `p_k(t) = G_k(t)/G_k(1)` for `k = 0..=k_max`,
/// parameter `(N - 1)/2`; for `N = 1` these are the Chebyshev polynomials.
fn gegenbauer_normalized(dim: u32, t: f64, k_max: usize, out: &mut Vec<f64>) {
    let two_lambda = dim as f64 - 1.0;
    out.clear();
    out.push(1.0);
    if k_max == 0 {
        return;
    }
    out.push(t);
    for k in 1..k_max {
        let kf = k as f64;
        let next = ((2.0 * kf + two_lambda) * t * out[k] - kf * out[k - 1]) / (kf + two_lambda);
        out.push(next);
    }
}

/// `Z_k(t)` with `Z_k(1) = dim H_k`.
pub fn zonal_value(dim: u32, k: usize, t: f64) -> f64 {
    let mut p = Vec::with_capacity(k + 1);
    gegenbauer_normalized(dim, t, k, &mut p);
    dim_harmonics_f64(dim, k) * p[k]
}

/// `∫_0^π sin^{N-1} θ dθ`, the normaliser of the pushed-forward measure.
fn sine_power_integral(dim: u32) -> f64 {
    let m = dim - 1;
    let (mut j, start) = if m % 2 == 0 { (PI, 0) } else { (2.0, 1) };
    let mut i = start;
    while i < m {
        i += 2;
        j *= (i - 1) as f64 / i as f64;
    }
    j
}

/// A kernel `Σ_k c_k Z_k(<x, y>)` on `S^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalPoly {
    pub dim: u32,
    pub coeffs: Vec<f64>,
}

impl ZonalPoly {
    pub fn new(dim: u32, coeffs: Vec<f64>) -> ZonalPoly {
        assert!(dim >= 1, "sphere dimension must be at least 1");
        ZonalPoly { dim, coeffs }
    }

    /// Highest stored degree (0 for an empty kernel).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `c_k · L_k`, the coefficients against normalised Gegenbauer polynomials.
    fn scaled(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * dim_harmonics_f64(self.dim, k))
            .collect()
    }

    /// Value at `t = <x, y>`.
    pub fn value(&self, t: f64) -> f64 {
        let mut p = Vec::new();
        Evaluator::new(self).eval(t, &mut p)
    }

    /// Value on the diagonal, `Σ c_k L_k`.
    pub fn value_at_one(&self) -> f64 {
        self.scaled().iter().sum()
    }

    /// Average over the sphere by a Gauss–Jacobi rule exact for the degree.
    pub fn sphere_average(&self) -> f64 {
        let order = ((self.degree() / 2) + 1).next_power_of_two().max(8);
        let rule = sphere_rule(self.dim, order);
        let ev = Evaluator::new(self);
        let mut p = Vec::new();
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * ev.eval(*t, &mut p))
            .sum()
    }

    /// Number of θ-panels used for the L¹ norm by default.
    pub fn default_panels(&self) -> usize {
        if let Some(m) = std::env::var(QUAD_ORDER_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            return m;
        }
        (4 * self.degree()).max(256)
    }

    /// `∫ |P(<x, y>)| ds(x)` under the normalised measure.
    pub fn l1_norm(&self) -> Result<f64> {
        self.l1_norm_with_panels(self.default_panels())
    }

    /// L¹ norm in `t = cos θ` over `panels` equal θ-panels. Sign changes found
    /// at panel ends are located by bisection and become breakpoints, so each
    /// piece is smooth and is integrated by an 8-point Gauss–Legendre rule.
    pub fn l1_norm_with_panels(&self, panels: usize) -> Result<f64> {
        if panels < self.degree().max(1) {
            return Err(Error::QuadratureOrder {
                order: panels,
                required: self.degree().max(1),
            });
        }
        let ev = Evaluator::new(self);
        let mut p = Vec::new();
        let gl = legendre_cached(8);
        let h = PI / panels as f64;
        let sine_pow = self.dim as i32 - 1;
        let mut f = |theta: f64| ev.eval(theta.cos(), &mut p);
        let mut total = 0.0;
        let mut left_val = f(0.0);
        for i in 0..panels {
            let a = i as f64 * h;
            let b = if i + 1 == panels { PI } else { a + h };
            let right_val = f(b);
            let mut cuts = [a, b, b];
            let mut pieces = 1;
            if left_val * right_val < 0.0 {
                let (mut lo, mut hi, mut flo) = (a, b, left_val);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = f(mid);
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                cuts[1] = 0.5 * (lo + hi);
                pieces = 2;
            }
            for w in cuts[..=pieces].windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                    let th = mid + half * x;
                    total += half * wt * f(th).abs() * th.sin().powi(sine_pow);
                }
            }
            left_val = right_val;
        }
        Ok(total / sine_power_integral(self.dim))
    }

    /// Minimum over the nodes of a Gauss–Jacobi rule of order
    /// `max(4K, 256)` (rounded to a power of two) and `t = ±1`.
    pub fn min_at_nodes(&self) -> f64 {
        let order = (4 * self.degree()).max(256).next_power_of_two();
        let rule = sphere_rule(self.dim, order);
        let ev = Evaluator::new(self);
        let mut p = Vec::new();
        rule.nodes
            .iter()
            .chain([-1.0, 1.0].iter())
            .map(|t| ev.eval(*t, &mut p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Precomputed recurrence and scaled coefficients for repeated evaluation.
struct Evaluator {
    scaled: Vec<f64>,
    dim: u32,
}

impl Evaluator {
    fn new(p: &ZonalPoly) -> Evaluator {
        Evaluator {
            scaled: p.scaled(),
            dim: p.dim,
        }
    }

    fn eval(&self, t: f64, buf: &mut Vec<f64>) -> f64 {
        if self.scaled.is_empty() {
            return 0.0;
        }
        gegenbauer_normalized(self.dim, t, self.scaled.len() - 1, buf);
        buf.iter().zip(&self.scaled).map(|(p, c)| p * c).sum()
    }
}

/// `W_k^m = Σ_{j<=k} (A_{k-j}^m / A_k^m) Z_j`.
pub fn cesaro_kernel(dim: u32, k: usize, m: f64) -> ZonalPoly {
    ZonalPoly::new(dim, cesaro_factors(k, m))
}

/// The profile `q_m`: `a_m^t` on `[0, 1]`, a polynomial on `[1, 2]` matching
/// `d + 1` derivatives at both ends, zero from 2 on. `a_0 = 1`,
/// `a_m = (1 - 1/m)^{-m}` for `m >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    pub order_m: u32,
    pub smooth_d: u32,
    pub a: f64,
    ln_a: f64,
    /// monomial coefficients in `s = t - 1` of the piece on `[1, 2]`
    bridge: Vec<f64>,
}

impl CutoffProfile {
    pub fn new(m: u32, d: u32) -> Result<CutoffProfile> {
        if m == 1 {
            return Err(Error::InvalidArgument(
                "cutoff order m = 1 has no finite base a_m".into(),
            ));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("smoothness d must be >= 1".into()));
        }
        let ln_a = if m == 0 {
            0.0
        } else {
            let mf = m as f64;
            -mf * (-1.0 / mf).ln_1p()
        };
        let a = ln_a.exp();
        let top = d as usize + 1;
        // R(s) = Taylor part of a·e^{s ln a}·(1 - s)^{-(d+2)} up to degree d + 1
        let mut y = vec![0.0; top + 1];
        let mut term = a;
        for (j, yj) in y.iter_mut().enumerate() {
            if j > 0 {
                term *= ln_a / j as f64;
            }
            *yj = term;
        }
        let neg_binom = |i: usize| -> f64 {
            (1..=i).fold(1.0, |acc, r| acc * (d as f64 + 1.0 + r as f64) / r as f64)
        };
        let r: Vec<f64> = (0..=top)
            .map(|n| (0..=n).map(|j| y[j] * neg_binom(n - j)).sum())
            .collect();
        // (1 - s)^{d+2}
        let e = d as usize + 2;
        let mut binom = vec![1.0; e + 1];
        for i in 1..=e {
            binom[i] = binom[i - 1] * (e + 1 - i) as f64 / i as f64;
        }
        let mut bridge = vec![0.0; e + top + 1];
        for (i, b) in binom.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for (j, rj) in r.iter().enumerate() {
                bridge[i + j] += sign * b * rj;
            }
        }
        Ok(CutoffProfile {
            order_m: m,
            smooth_d: d,
            a,
            ln_a,
            bridge,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `q^{(j)}(t)`; at the joins the one-sided value from the left piece.
    pub fn derivative(&self, t: f64, j: u32) -> f64 {
        if t <= 1.0 {
            let t = t.max(0.0);
            return self.ln_a.powi(j as i32) * (t * self.ln_a).exp();
        }
        if t >= 2.0 {
            return 0.0;
        }
        let s = t - 1.0;
        let j = j as usize;
        let mut acc = 0.0;
        for (n, c) in self.bridge.iter().enumerate().skip(j).rev() {
            let falling: f64 = (0..j).map(|i| (n - i) as f64).product();
            acc = acc * s + c * falling;
        }
        acc
    }

    /// `max |q^{(j)}|` over `j <= d + 1` and a uniform grid on `[0, 2]`.
    pub fn derivative_bound(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=2000 {
            let t = i as f64 / 1000.0;
            for j in 0..=self.smooth_d + 1 {
                worst = worst.max(self.derivative(t, j).abs());
            }
        }
        worst
    }
}

/// `Q_{m,n}` with coefficients `q_m(k/n)` for `k <= 2n`; `R_n = Q_{0,n}`.
pub fn vp_kernel(dim: u32, m: u32, n: usize, d: u32) -> Result<ZonalPoly> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let q = CutoffProfile::new(m, d)?;
    let nf = n as f64;
    Ok(ZonalPoly::new(
        dim,
        (0..=2 * n).map(|k| q.value(k as f64 / nf)).collect(),
    ))
}

/// `T_{n,f}`: coefficients `f(j) q_0(j/n)`.
pub fn band_weight_kernel(dim: u32, n: usize, f: &Weight, d: u32) -> Result<ZonalPoly> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    ensure_regular(f, d, (4 * n) as f64)?;
    let q = CutoffProfile::new(0, d)?;
    let nf = n as f64;
    Ok(ZonalPoly::new(
        dim,
        (0..=2 * n)
            .map(|j| f.eval(j as f64) * q.value(j as f64 / nf))
            .collect(),
    ))
}

/// `S_{n,m,f}`: coefficients `(q_0(j/m) - q_0(2j/n)) / f(j)`, which equal
/// `1/f(j)` for `n <= j <= m`.
pub fn band_inverse_kernel(dim: u32, n: usize, m: usize, f: &Weight, d: u32) -> Result<ZonalPoly> {
    if n == 0 || m < n {
        return Err(Error::InvalidArgument(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    ensure_regular(f, d, (4 * m) as f64)?;
    let q = CutoffProfile::new(0, d)?;
    let (nf, mf) = (n as f64, m as f64);
    Ok(ZonalPoly::new(
        dim,
        (0..=2 * m)
            .map(|j| {
                let jf = j as f64;
                (q.value(jf / mf) - q.value(2.0 * jf / nf)) / f.eval(jf)
            })
            .collect(),
    ))
}

/// Default tail tolerance for Poisson series.
pub const POISSON_TAIL_TOL: f64 = 1e-12;

/// `S_t = Σ_{k<=K} t^k Z_k`; fails when the first omitted scale
/// `t^K L_K` is not below the tail tolerance, suggesting a sufficient `K`.
pub fn poisson_series(dim: u32, t: f64, k: usize) -> Result<ZonalPoly> {
    poisson_series_tol(dim, t, k, POISSON_TAIL_TOL)
}

pub fn poisson_series_tol(dim: u32, t: f64, k: usize, tol: f64) -> Result<ZonalPoly> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must lie in (0, 1)")));
    }
    let tail = |k: usize| t.powi(k as i32) * dim_harmonics_f64(dim, k);
    if tail(k) >= tol {
        let mut s = k.max(1);
        while tail(s) >= tol {
            s += s.div_ceil(8);
        }
        return Err(Error::TruncationTooShort { suggested: s });
    }
    Ok(ZonalPoly::new(dim, (0..=k).map(|j| t.powi(j as i32)).collect()))
}

/// Smallest `K` accepted by [`poisson_series_tol`].
pub fn poisson_truncation(dim: u32, t: f64, tol: f64) -> usize {
    (1..)
        .find(|&k| t.powi(k as i32) * dim_harmonics_f64(dim, k) < tol)
        .unwrap()
}
