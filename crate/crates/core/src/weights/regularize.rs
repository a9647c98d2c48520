//! The regularization `f(α) = (∫_{1/2}^1 t^α d(-1/w(t)))^{-1}`, `w(t) = q(1/(1-t))`.
//!
//! With `s = 1/(1-t)` the measure becomes `q'(s)/q(s)^2 ds` on `[2, ∞)`; the
//! integral is computed in `y = ln s`. Past a cutoff `S` the integrand is
//! replaced by its value at `t = 1`, which contributes `h(1)/q(S)` including
//! the mass `1/q(∞)` that sits at `t = 1` for bounded `q`. The replacement
//! error is at most `L/S · 1/q(S)` when `|h(t) - h(1)| <= L (1 - t)`.

use std::cell::RefCell;

use super::Weight;
use crate::quadrature::integrate_adaptive;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizeOptions {
    /// Relative tolerance for both the quadrature and the truncated tail.
    pub rel_tol: f64,
    /// Largest cutoff `S` tried before giving up.
    pub max_s: f64,
}

impl Default for RegularizeOptions {
    fn default() -> Self {
        RegularizeOptions {
            rel_tol: 1e-13,
            max_s: 1e280,
        }
    }
}

/// `f(alpha)` for the weight `q` (not normalised: `f(1) = 8/3` for `q(x) = x`).
pub fn regularize(q: &Weight, alpha: f64) -> Result<f64> {
    regularize_with(q, alpha, &RegularizeOptions::default())
}

pub fn regularize_with(q: &Weight, alpha: f64, opts: &RegularizeOptions) -> Result<f64> {
    let i = moment(q, alpha, 0, opts)?;
    Ok(1.0 / i)
}

/// `∫_{1/2}^1 (ln t)^k t^alpha d(-1/w(t))`; the `k`-th derivative in `alpha` of
/// the integral defining the regularization.
pub fn moment(q: &Weight, alpha: f64, k: u32, opts: &RegularizeOptions) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be >= 0")));
    }
    let h_one = if k == 0 { 1.0 } else { 0.0 };
    // |(ln t)^k t^α - h(1)| <= L (1 - t) on [1/2, 1]
    let lip = if k == 0 { alpha } else { 2.0 };
    stieltjes_integral(
        q,
        |_, lt| lt.powi(k as i32) * (alpha * lt).exp(),
        h_one,
        lip,
        alpha + k as f64,
        0.0,
        opts,
    )
}

/// `∫_{1/2}^1 h(t) d(-1/w(t))` for `h` with `|h(t) - h(1)| <= lip (1 - t)`.
/// `h` receives `t` and `ln t`; `knee` marks where `h` changes fastest in
/// `s = 1/(1-t)` (about the degree for `t^α`) and only guides subdivision.
/// Tolerances are relative to `max(|value|, scale)`.
pub fn stieltjes_integral(
    q: &Weight,
    h: impl Fn(f64, f64) -> f64,
    h_one: f64,
    lip: f64,
    knee: f64,
    scale: f64,
    opts: &RegularizeOptions,
) -> Result<f64> {
    let density_err = RefCell::new(None);
    let integrand = |y: f64| {
        let s = y.exp();
        let e = (-y).exp();
        let lt = (-e).ln_1p();
        let hv = h(1.0 - e, lt);
        match q.reciprocal_density(s) {
            Ok(rho) => hv * rho * s,
            Err(err) => {
                density_err.borrow_mut().get_or_insert(err);
                0.0
            }
        }
    };

    let mut table_nodes = Vec::new();
    q.breakpoints(&mut table_nodes);
    let mut lower = 2.0f64;
    let mut upper = (16.0 * (knee + 1.0)).max(64.0);
    let mut total = 0.0;
    loop {
        let mut pts = vec![lower.ln()];
        if knee > lower && knee < upper {
            pts.push(knee.ln());
        }
        pts.extend(
            table_nodes
                .iter()
                .filter(|&&x| x > lower && x < upper)
                .map(|x| x.ln()),
        );
        pts.push(upper.ln());
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let piece = integrate_adaptive(&integrand, &pts, opts.rel_tol * 0.1 * scale, opts.rel_tol * 0.1)?;
        if let Some(e) = density_err.borrow_mut().take() {
            return Err(e);
        }
        total += piece.value;

        let q_s = q.eval(upper);
        let tail = h_one / q_s;
        let tail_err = lip.abs() / upper / q_s;
        let value = total + tail;
        if tail_err <= opts.rel_tol * value.abs().max(scale) {
            return Ok(value);
        }
        if upper >= opts.max_s {
            return Err(Error::QuadratureNonConvergence {
                partial: value,
                tail: tail_err / value.abs().max(f64::MIN_POSITIVE),
            });
        }
        lower = upper;
        upper = (upper * 1e4).min(opts.max_s);
    }
}
