//! Quadrature rules: symmetric Gauss–Jacobi rules for the sphere measure,
//! Gauss–Legendre panels and an adaptive Gauss–Kronrod integrator.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::{Error, Result};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. Only the first row of the
/// eigenvector matrix is carried, which is all Golub–Welsch needs; the cost is
/// O(n^2) instead of O(n^3).
///
/// `diag` is overwritten by the eigenvalues, `off[i]` couples `i` and `i + 1`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first_row: &mut [f64]) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "QL iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let z = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * z;
                first_row[i] = c * first_row[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Gauss rule for the weight `(1 - t^2)^a` on `[-1, 1]`, weights normalised to
/// sum to one.
pub fn gauss_gegenbauer(order: usize, a: f64) -> GaussRule {
    assert!(order >= 1 && a > -1.0);
    let mut diag = vec![0.0; order];
    let mut off = vec![0.0; order];
    for k in 1..order {
        let kf = k as f64;
        let b2 = if k == 1 && (2.0 * a + 1.0).abs() < 1e-15 {
            0.5
        } else {
            kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a).powi(2) - 1.0)
        };
        off[k - 1] = b2.sqrt();
    }
    let mut first = vec![0.0; order];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first);
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first.into_iter().map(|z| z * z))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    // the rule is symmetric; enforce it exactly
    let n = pairs.len();
    for i in 0..n / 2 {
        let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
        let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}

/// The Gauss rule for the normalised surface measure of `S^N` pushed forward to
/// `t = <x, y>`: density proportional to `(1 - t^2)^{N/2 - 1}`. Cached per
/// `(N, order)`.
pub fn sphere_rule(dim: u32, order: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&(dim, order)) {
        return rule.clone();
    }
    let rule = Arc::new(gauss_gegenbauer(order, dim as f64 / 2.0 - 1.0));
    cache
        .lock()
        .unwrap()
        .insert((dim, order), rule.clone());
    rule
}

/// Gauss–Legendre rule on `[-1, 1]` with weights summing to 2.
pub fn gauss_legendre(order: usize) -> GaussRule {
    let mut rule = gauss_gegenbauer(order, 0.0);
    for w in &mut rule.weights {
        *w *= 2.0;
    }
    rule
}

pub(crate) fn legendre_cached(order: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(gauss_legendre(order)))
        .clone()
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over the given
/// breakpoints (sorted, at least two). Stops once the estimated error is
/// below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    const MAX_SEGMENTS: usize = 4000;
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || heap.is_empty() {
            return Ok(Integral { value, error });
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNonConvergence {
                partial: value,
                tail: error / value.abs().max(f64::MIN_POSITIVE),
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; accept as is
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            continue;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mut f, a, b);
            heap.push(Segment { a, b, value, error });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chebyshev_first_kind_closed_form() {
        // N = 1: weight (1 - t^2)^{-1/2}, nodes cos((2i+1)π/(2n)), equal weights
        let n = 37;
        let rule = sphere_rule(1, n);
        let mut expected: Vec<f64> = (0..n)
            .map(|i| ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, e) in rule.nodes.iter().zip(&expected) {
            assert!((x - e).abs() < 1e-13, "{x} vs {e}");
        }
        for w in &rule.weights {
            assert!((w - 1.0 / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_second_kind_closed_form() {
        // N = 3: weight (1 - t^2)^{1/2}, nodes cos(iπ/(n+1)), weights ∝ sin^2
        let n = 50;
        let rule = sphere_rule(3, n);
        let mut expected: Vec<(f64, f64)> = (1..=n)
            .map(|i| {
                let th = i as f64 * PI / (n + 1) as f64;
                (th.cos(), th.sin().powi(2))
            })
            .collect();
        let total: f64 = expected.iter().map(|p| p.1).sum();
        expected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for ((x, w), (ex, ew)) in rule.nodes.iter().zip(&rule.weights).zip(&expected) {
            assert!((x - ex).abs() < 1e-13);
            assert!((w - ew / total).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_exactness() {
        let rule = gauss_legendre(12);
        for j in 0..12 {
            let got = rule.integrate(|t| t.powi(2 * j));
            assert!((got - 2.0 / (2 * j + 1) as f64).abs() < 1e-14);
        }
        let big = sphere_rule(2, 2048);
        assert!((big.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((big.integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x: f64| x.sqrt().recip(), &[1e-12, 1.0], 1e-12, 1e-12).unwrap();
        assert!((r.value - 2.0 * (1.0 - 1e-6)).abs() < 1e-9);
        let r = integrate_adaptive(|x: f64| x.sin(), &[0.0, PI / 2.0, PI], 0.0, 1e-14).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }
}
