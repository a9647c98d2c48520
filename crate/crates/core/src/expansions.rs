//! Finite spherical-harmonic expansions `u(rx) = Σ_k r^k Σ_l a_kl Y_kl(x)`.
//!
//! Full mode stores every basis coefficient and is available for `N = 1`
//! (`Y_k1 = √2 cos kθ`, `Y_k2 = √2 sin kθ`) and `N = 2` (real orthonormal
//! spherical harmonics, ordered `m = 0, (cos 1, sin 1), (cos 2, sin 2), …`).
//! Zonal mode stores one coefficient per degree against `Z_k(<x, e>)` with `e`
//! the pole and works in any dimension.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::path::Path;

use crate::kernels::{dim_harmonics, dim_harmonics_f64, CutoffProfile, ZonalPoly};
use crate::quadrature::{gauss_legendre, sphere_rule};
use crate::seqcalc::cesaro_factors;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Zonal,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Zonal => "zonal",
        }
    }
}

/// A point of the sphere: `theta` is the angle from the pole; `phi` the
/// azimuth for `N = 2`. On the circle `theta` is the signed angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint { theta, phi }
    }

    pub fn pole() -> SpherePoint {
        SpherePoint::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExpansion {
    pub dim: u32,
    pub mode: Mode,
    /// `coeffs[k]` holds `a_{k,1..=L_k}` (full) or the single `a_k` (zonal).
    coeffs: Vec<Vec<f64>>,
}

fn slots(dim: u32, mode: Mode, k: usize) -> usize {
    match mode {
        Mode::Zonal => 1,
        Mode::Full => dim_harmonics(dim, k as u64) as usize,
    }
}

impl HarmonicExpansion {
    /// The zero expansion of degree `degree`.
    pub fn zeros(dim: u32, mode: Mode, degree: usize) -> Result<HarmonicExpansion> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sphere dimension must be >= 1".into()));
        }
        if mode == Mode::Full && dim > 2 {
            return Err(Error::InvalidArgument(format!(
                "full mode is available for N <= 2, got N = {dim}"
            )));
        }
        Ok(HarmonicExpansion {
            dim,
            mode,
            coeffs: (0..=degree).map(|k| vec![0.0; slots(dim, mode, k)]).collect(),
        })
    }

    /// Coefficients `a_kl = f(k, l)`, `l` counted from 1.
    pub fn from_fn(
        dim: u32,
        mode: Mode,
        degree: usize,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<HarmonicExpansion> {
        let mut u = HarmonicExpansion::zeros(dim, mode, degree)?;
        for (k, row) in u.coeffs.iter_mut().enumerate() {
            for (l, a) in row.iter_mut().enumerate() {
                *a = f(k, l + 1);
            }
        }
        Ok(u)
    }

    pub fn constant(dim: u32, mode: Mode, c: f64) -> Result<HarmonicExpansion> {
        HarmonicExpansion::from_fn(dim, mode, 0, |_, _| c)
    }

    /// Zonal expansion `Σ a_k Z_k(<x, e>)`.
    pub fn zonal(dim: u32, a: Vec<f64>) -> Result<HarmonicExpansion> {
        if a.is_empty() {
            return HarmonicExpansion::zeros(dim, Mode::Zonal, 0);
        }
        HarmonicExpansion::from_fn(dim, Mode::Zonal, a.len() - 1, |k, _| a[k])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients of degree `k` (empty past the degree).
    pub fn degree_coeffs(&self, k: usize) -> &[f64] {
        self.coeffs.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// `a_kl`, `l` counted from 1; zero outside the stored range.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        l.checked_sub(1)
            .and_then(|i| self.degree_coeffs(k).get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn set(&mut self, k: usize, l: usize, value: f64) -> Result<()> {
        let dim = self.dim;
        let row = self
            .coeffs
            .get_mut(k)
            .ok_or_else(|| Error::InvalidArgument(format!("degree {k} exceeds the expansion")))?;
        let slot = l
            .checked_sub(1)
            .filter(|i| *i < row.len())
            .ok_or_else(|| Error::InvalidArgument(format!("index l = {l} out of range at degree {k} on S^{dim}")))?;
        row[slot] = value;
        Ok(())
    }

    /// Degrees carrying a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|k| self.coeffs[*k].iter().any(|a| *a != 0.0))
            .collect()
    }

    /// Coefficientwise `a_kl · g(k, l)`.
    pub fn map_indexed(&self, g: impl Fn(usize, usize) -> f64) -> HarmonicExpansion {
        let mut out = self.clone();
        for (k, row) in out.coeffs.iter_mut().enumerate() {
            for (l, a) in row.iter_mut().enumerate() {
                if *a != 0.0 {
                    *a *= g(k, l + 1);
                }
            }
        }
        out
    }

    /// Coefficientwise `a_kl · g(k)`.
    pub fn map_degree(&self, g: impl Fn(usize) -> f64) -> HarmonicExpansion {
        self.map_indexed(|k, _| g(k))
    }

    /// Keeps degrees `<= k_max`.
    pub fn truncate(&self, k_max: usize) -> HarmonicExpansion {
        let mut out = self.clone();
        out.coeffs.truncate(k_max + 1);
        out
    }

    pub fn add(&self, other: &HarmonicExpansion) -> Result<HarmonicExpansion> {
        self.check_compatible(other)?;
        let degree = self.degree().max(other.degree());
        HarmonicExpansion::from_fn(self.dim, self.mode, degree, |k, l| {
            self.get(k, l) + other.get(k, l)
        })
    }

    pub fn scale(&self, c: f64) -> HarmonicExpansion {
        self.map_degree(|_| c)
    }

    fn check_compatible(&self, other: &HarmonicExpansion) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.mode != other.mode {
            return Err(Error::InvalidArgument("mixing full and zonal expansions".into()));
        }
        Ok(())
    }

    /// Maximum absolute coefficient difference, over the union of degrees.
    pub fn max_coeff_diff(&self, other: &HarmonicExpansion) -> f64 {
        let degree = self.degree().max(other.degree());
        let mut worst: f64 = 0.0;
        for k in 0..=degree {
            let n = self.degree_coeffs(k).len().max(other.degree_coeffs(k).len());
            for l in 1..=n {
                worst = worst.max((self.get(k, l) - other.get(k, l)).abs());
            }
        }
        worst
    }

    /// `u(r x)`.
    pub fn evaluate(&self, r: f64, x: SpherePoint) -> f64 {
        match (self.mode, self.dim) {
            (Mode::Zonal, _) => self.zonal_radial(r).value(x.theta.cos()),
            (Mode::Full, 1) => {
                let mut s = self.get(0, 1);
                let mut rk = 1.0;
                for k in 1..self.coeffs.len() {
                    rk *= r;
                    let (a, b) = (self.coeffs[k][0], self.coeffs[k][1]);
                    if a != 0.0 || b != 0.0 {
                        let kt = k as f64 * x.theta;
                        s += rk * SQRT_2 * (a * kt.cos() + b * kt.sin());
                    }
                }
                s
            }
            _ => {
                let legendre = AssocLegendre::new(self.degree(), x.theta.cos());
                let mut s = 0.0;
                let mut rk = 1.0;
                for k in 0..self.coeffs.len() {
                    if k > 0 {
                        rk *= r;
                    }
                    let row = &self.coeffs[k];
                    s += rk * row[0] * legendre.get(k, 0);
                    for m in 1..=k {
                        let (c, sn) = (row[2 * m - 1], row[2 * m]);
                        if c != 0.0 || sn != 0.0 {
                            let mp = m as f64 * x.phi;
                            s += rk * SQRT_2 * legendre.get(k, m) * (c * mp.cos() + sn * mp.sin());
                        }
                    }
                }
                s
            }
        }
    }

    /// Zonal mode only: the kernel `Σ a_k r^k Z_k`.
    fn zonal_radial(&self, r: f64) -> ZonalPoly {
        let mut rk = 1.0;
        ZonalPoly::new(
            self.dim,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    if k > 0 {
                        rk *= r;
                    }
                    row[0] * rk
                })
                .collect(),
        )
    }

    /// `(Σ_k r^{2k} Σ_l a_kl^2)^{1/2}`; in zonal mode `a_k^2` counts `L_k` times.
    pub fn l2_from_coefficients(&self, r: f64) -> f64 {
        let mut total = 0.0;
        let mut r2k = 1.0;
        for (k, row) in self.coeffs.iter().enumerate() {
            if k > 0 {
                r2k *= r * r;
            }
            let s: f64 = row.iter().map(|a| a * a).sum();
            total += r2k
                * match self.mode {
                    Mode::Full => s,
                    Mode::Zonal => s * dim_harmonics_f64(self.dim, k),
                };
        }
        total.sqrt()
    }

    /// Parses the CSV exchange format: a header `# N=..,mode=..,degree_K=..`
    /// followed by rows `k,l,a`.
    pub fn from_csv_str(text: &str) -> Result<HarmonicExpansion> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty expansion file".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("expansion file must start with `# N=..,mode=..,degree_K=..`".into()))?;
        let (mut dim, mut mode, mut degree) = (None, None, None);
        for field in header.split(',') {
            let (key, value) = field
                .trim()
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            match key.trim() {
                "N" => dim = value.trim().parse::<u32>().ok(),
                "mode" => {
                    mode = match value.trim() {
                        "full" => Some(Mode::Full),
                        "zonal" => Some(Mode::Zonal),
                        _ => None,
                    }
                }
                "degree_K" => degree = value.trim().parse::<usize>().ok(),
                other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
            }
        }
        let (dim, mode, degree) = match (dim, mode, degree) {
            (Some(d), Some(m), Some(k)) => (d, m, k),
            _ => return Err(Error::Parse("header needs valid N, mode and degree_K".into())),
        };
        let mut u = HarmonicExpansion::zeros(dim, mode, degree)?;
        for line in lines {
            if line.starts_with('#') || line.starts_with('k') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let row = (cols.len() == 3)
                .then(|| {
                    Some((
                        cols[0].parse::<usize>().ok()?,
                        cols[1].parse::<usize>().ok()?,
                        cols[2].parse::<f64>().ok()?,
                    ))
                })
                .flatten()
                .ok_or_else(|| Error::Parse(format!("bad row `{line}`, expected k,l,a")))?;
            u.set(row.0, row.1, row.2)
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(u)
    }

    pub fn read_csv(path: &Path) -> Result<HarmonicExpansion> {
        HarmonicExpansion::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// The CSV exchange format; only nonzero coefficients are written.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "# N={},mode={},degree_K={}\nk,l,a\n",
            self.dim,
            self.mode.as_str(),
            self.degree()
        );
        for (k, row) in self.coeffs.iter().enumerate() {
            for (l, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    let _ = writeln!(out, "{k},{},{a:e}", l + 1);
                }
            }
        }
        out
    }
}

/// Fully normalised associated Legendre values `p̄_k^m(t)` for `m <= k <= K`,
/// scaled so that `∫_{-1}^1 (p̄_k^m)^2 dt/2 = 1`.
struct AssocLegendre {
    k_max: usize,
    values: Vec<f64>,
}

impl AssocLegendre {
    fn new(k_max: usize, t: f64) -> AssocLegendre {
        let s = (1.0 - t * t).max(0.0).sqrt();
        let idx = |k: usize, m: usize| k * (k + 1) / 2 + m;
        let mut values = vec![0.0; (k_max + 1) * (k_max + 2) / 2];
        let mut pmm = 1.0;
        for m in 0..=k_max {
            if m > 0 {
                let mf = m as f64;
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
            }
            values[idx(m, m)] = pmm;
            if m < k_max {
                values[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * t * pmm;
            }
            for k in (m + 2)..=k_max {
                let (kf, mf) = (k as f64, m as f64);
                let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
                let b = (((kf - 1.0).powi(2) - mf * mf) / (4.0 * (kf - 1.0).powi(2) - 1.0)).sqrt();
                values[idx(k, m)] = a * (t * values[idx(k - 1, m)] - b * values[idx(k - 2, m)]);
            }
        }
        AssocLegendre { k_max, values }
    }

    fn get(&self, k: usize, m: usize) -> f64 {
        debug_assert!(m <= k && k <= self.k_max);
        self.values[k * (k + 1) / 2 + m]
    }
}

/// Nodes (with weights for the normalised measure) on which expansions are
/// sampled. `exact_degree` is the largest degree whose products of basis
/// functions the rule integrates exactly.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub dim: u32,
    pub exact_degree: usize,
    kind: GridKind,
}

#[derive(Debug, Clone)]
enum GridKind {
    Circle { points: usize },
    Product { t: Vec<f64>, tw: Vec<f64>, phis: usize },
    Zonal { nodes: Vec<f64>, weights: Vec<f64> },
}

impl SphereGrid {
    /// The default grid for an expansion: `max(8K, 256)` uniform points on
    /// the circle, Gauss–Legendre × uniform on `S^2`, Gauss–Jacobi in zonal mode.
    pub fn for_expansion(u: &HarmonicExpansion) -> SphereGrid {
        let k = u.degree();
        match (u.mode, u.dim) {
            (Mode::Zonal, dim) => SphereGrid::zonal(dim, (4 * k).max(256).next_power_of_two()),
            (Mode::Full, 1) => SphereGrid::circle((8 * k).max(256)),
            _ => SphereGrid::product((2 * k + 2).max(32), (4 * k + 4).max(64)),
        }
    }

    pub fn circle(points: usize) -> SphereGrid {
        SphereGrid {
            dim: 1,
            exact_degree: (points - 1) / 2,
            kind: GridKind::Circle { points },
        }
    }

    pub fn product(t_order: usize, phis: usize) -> SphereGrid {
        let rule = gauss_legendre(t_order);
        SphereGrid {
            dim: 2,
            exact_degree: (t_order - 1).min((phis - 1) / 2),
            kind: GridKind::Product {
                t: rule.nodes,
                tw: rule.weights.iter().map(|w| w / 2.0).collect(),
                phis,
            },
        }
    }

    pub fn zonal(dim: u32, order: usize) -> SphereGrid {
        let rule = sphere_rule(dim, order);
        SphereGrid {
            dim,
            exact_degree: order - 1,
            kind: GridKind::Zonal {
                nodes: rule.nodes.clone(),
                weights: rule.weights.clone(),
            },
        }
    }

    fn check(&self, u: &HarmonicExpansion) -> Result<()> {
        if self.dim != u.dim {
            return Err(Error::DimensionMismatch {
                left: u.dim,
                right: self.dim,
            });
        }
        let zonal_grid = matches!(self.kind, GridKind::Zonal { .. });
        if zonal_grid != (u.mode == Mode::Zonal) {
            return Err(Error::InvalidArgument("grid does not match the expansion mode".into()));
        }
        if self.exact_degree < u.degree() {
            return Err(Error::QuadratureOrder {
                order: self.exact_degree,
                required: u.degree(),
            });
        }
        Ok(())
    }

    /// Values of `u(r ·)` at the nodes, with the node weights.
    fn sample(&self, u: &HarmonicExpansion, r: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            GridKind::Circle { points } => {
                let m = *points;
                let w = vec![1.0 / m as f64; m];
                (circle_values(u, r, m), w)
            }
            GridKind::Zonal { nodes, weights } => {
                let p = u.zonal_radial(r);
                (nodes.iter().map(|t| p.value(*t)).collect(), weights.clone())
            }
            GridKind::Product { t, tw, phis } => {
                let mut vals = Vec::with_capacity(t.len() * phis);
                let mut wts = Vec::with_capacity(t.len() * phis);
                for (ti, twi) in t.iter().zip(tw) {
                    let theta = ti.acos();
                    for j in 0..*phis {
                        let phi = 2.0 * PI * j as f64 / *phis as f64;
                        vals.push(u.evaluate(r, SpherePoint::new(theta, phi)));
                        wts.push(twi / *phis as f64);
                    }
                }
                (vals, wts)
            }
        }
    }

    /// Position of node `i` as a sphere point.
    fn point(&self, i: usize) -> SpherePoint {
        match &self.kind {
            GridKind::Circle { points } => SpherePoint::new(2.0 * PI * i as f64 / *points as f64, 0.0),
            GridKind::Zonal { nodes, .. } => SpherePoint::new(nodes[i].acos(), 0.0),
            GridKind::Product { t, phis, .. } => SpherePoint::new(
                t[i / phis].acos(),
                2.0 * PI * (i % phis) as f64 / *phis as f64,
            ),
        }
    }

    /// Half-widths in `(theta, phi)` of the neighbourhood refined around a node.
    fn spacing(&self) -> (f64, f64) {
        match &self.kind {
            GridKind::Circle { points } => (2.0 * PI / *points as f64, 0.0),
            GridKind::Zonal { nodes, .. } => (PI / nodes.len() as f64 * 2.0, 0.0),
            GridKind::Product { t, phis, .. } => (PI / t.len() as f64 * 2.0, 2.0 * PI / *phis as f64),
        }
    }
}

/// `u(r e^{iθ_j})` on `m` equally spaced angles, through a cosine table
/// indexed by `k·j mod m`.
fn circle_values(u: &HarmonicExpansion, r: f64, m: usize) -> Vec<f64> {
    let table: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let mut vals = vec![u.get(0, 1); m];
    let mut rk = 1.0;
    let mut biggest: f64 = 0.0;
    for k in 1..=u.degree() {
        rk *= r;
        let (a, b) = (u.coeffs[k][0], u.coeffs[k][1]);
        let size = rk * (a.abs() + b.abs());
        biggest = biggest.max(size);
        if size == 0.0 || size < 1e-18 * biggest {
            continue;
        }
        let (ca, cb) = (rk * SQRT_2 * a, rk * SQRT_2 * b);
        let step = k % m;
        let mut idx = 0;
        for v in vals.iter_mut() {
            let (c, s) = table[idx];
            *v += ca * c + cb * s;
            idx += step;
            if idx >= m {
                idx -= m;
            }
        }
    }
    vals
}

/// Sup norm value with an estimate of its discretisation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    /// Increase produced by the local refinement pass.
    pub tolerance: f64,
}

/// `(∫ |u(r x)|^p ds(x))^{1/p}` under the normalised measure; `p = ∞` gives
/// the maximum of `|u(r ·)|`. Expansions are finite, so `r = 1` is allowed and
/// gives the norm on the sphere.
pub fn radial_lp_profile(u: &HarmonicExpansion, r: f64, p: f64) -> Result<f64> {
    radial_lp_profile_on(u, r, p, &SphereGrid::for_expansion(u))
}

pub fn radial_lp_profile_on(u: &HarmonicExpansion, r: f64, p: f64, grid: &SphereGrid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius r = {r} must lie in [0, 1]")));
    }
    if p.is_infinite() {
        return radial_sup_on(u, r, grid).map(|s| s.value);
    }
    grid.check(u)?;
    let (vals, wts) = grid.sample(u, r);
    let s: f64 = vals.iter().zip(&wts).map(|(v, w)| w * v.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Grid maximum of `|u(r ·)|` followed by one refinement pass around the argmax.
pub fn radial_sup(u: &HarmonicExpansion, r: f64) -> Result<SupNorm> {
    radial_sup_on(u, r, &SphereGrid::for_expansion(u))
}

pub fn radial_sup_on(u: &HarmonicExpansion, r: f64, grid: &SphereGrid) -> Result<SupNorm> {
    grid.check(u)?;
    let (vals, _) = grid.sample(u, r);
    let (arg, coarse) = vals
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.abs()))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut best = coarse;
    if u.mode == Mode::Zonal {
        // the poles are not quadrature nodes
        for t in [1.0f64, -1.0] {
            best = best.max(u.evaluate(r, SpherePoint::new(t.acos(), 0.0)).abs());
        }
    }
    let centre = grid.point(arg);
    let (dt, dp) = grid.spacing();
    const STEPS: i32 = 16;
    for i in -STEPS..=STEPS {
        let theta = centre.theta + dt * i as f64 / STEPS as f64;
        let theta = if u.mode == Mode::Zonal || u.dim == 2 {
            theta.clamp(0.0, PI)
        } else {
            theta
        };
        let phi_steps = if dp > 0.0 { STEPS } else { 0 };
        for j in -phi_steps..=phi_steps {
            let phi = centre.phi + dp * j as f64 / STEPS.max(1) as f64;
            best = best.max(u.evaluate(r, SpherePoint::new(theta, phi)).abs());
        }
    }
    Ok(SupNorm {
        value: best,
        tolerance: best - coarse.max(0.0),
    })
}

/// `σ_n^m u`: degree `j` scaled by `A_{n-j}^m / A_n^m`, degrees above `n` dropped.
pub fn cesaro_mean(u: &HarmonicExpansion, n: usize, m: f64) -> HarmonicExpansion {
    let factors = cesaro_factors(n, m);
    u.truncate(n).map_degree(|j| factors[j])
}

/// `u * P`: degree `j` scaled by `c_j`.
pub fn convolve(u: &HarmonicExpansion, p: &ZonalPoly) -> Result<HarmonicExpansion> {
    if u.dim != p.dim {
        return Err(Error::DimensionMismatch {
            left: u.dim,
            right: p.dim,
        });
    }
    Ok(u.truncate(p.degree()).map_degree(|j| p.coeffs[j]))
}

/// `R_n u`: degree `j` scaled by `q_0(j/n)`.
pub fn vp_sum(u: &HarmonicExpansion, n: usize, d: u32) -> Result<HarmonicExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let q = CutoffProfile::new(0, d)?;
    let nf = n as f64;
    Ok(u.truncate(2 * n).map_degree(|j| q.value(j as f64 / nf)))
}

/// `u(z) = Re Σ a_k z^{n_k}` on the circle, checking `n_{k+1} >= λ n_k`.
pub fn gap_series(degrees: &[u64], amplitudes: &[f64], lambda: f64) -> Result<HarmonicExpansion> {
    if degrees.len() != amplitudes.len() {
        return Err(Error::InvalidArgument(format!(
            "{} degrees but {} amplitudes",
            degrees.len(),
            amplitudes.len()
        )));
    }
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!("gap ratio λ = {lambda} must exceed 1")));
    }
    for (i, w) in degrees.windows(2).enumerate() {
        if (w[1] as f64) < lambda * w[0] as f64 {
            return Err(Error::GapViolation {
                index: i + 1,
                prev: w[0],
                next: w[1],
                lambda,
            });
        }
    }
    let degree = degrees.last().copied().unwrap_or(0) as usize;
    let mut u = HarmonicExpansion::zeros(1, Mode::Full, degree)?;
    for (&n, &a) in degrees.iter().zip(amplitudes) {
        if n == 0 {
            u.set(0, 1, a)?;
        } else {
            // √2 cos nθ carries the cosine with coefficient a/√2
            u.set(n as usize, 1, a / SQRT_2)?;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{cesaro_kernel, poisson_series_tol, poisson_truncation, vp_kernel};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random(dim: u32, mode: Mode, degree: usize, seed: u64) -> HarmonicExpansion {
        let mut rng = StdRng::seed_from_u64(seed);
        let vals: Vec<Vec<f64>> = (0..=degree)
            .map(|k| (0..slots(dim, mode, k)).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        HarmonicExpansion::from_fn(dim, mode, degree, |k, l| vals[k][l - 1]).unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        for (dim, mode) in [(1, Mode::Full), (2, Mode::Full), (3, Mode::Zonal)] {
            let u = HarmonicExpansion::constant(dim, mode, 2.5).unwrap();
            assert_eq!(u.evaluate(0.7, SpherePoint::new(1.1, 0.4)), 2.5);
            for p in [1.0, 2.0, f64::INFINITY] {
                assert!((radial_lp_profile(&u, 0.3, p).unwrap() - 2.5).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn circle_basis_normalisation() {
        let mut u = HarmonicExpansion::zeros(1, Mode::Full, 1).unwrap();
        u.set(1, 1, 1.0).unwrap();
        let (r, th) = (0.6, 0.9);
        assert!((u.evaluate(r, SpherePoint::new(th, 0.0)) - SQRT_2 * r * th.cos()).abs() < 1e-15);
        assert!((radial_lp_profile(&u, 0.5, 2.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zonal_poisson_at_pole() {
        let t = 0.5;
        let k = poisson_truncation(2, t, 1e-15);
        let u = HarmonicExpansion::zonal(2, (0..=k).map(|j| t.powi(j as i32)).collect()).unwrap();
        let r = 0.8;
        // Σ (tr)^k (2k+1) = (1 + x)/(1 - x)^2
        let x = t * r;
        let series = (1.0 + x) / (1.0 - x).powi(2);
        assert!((u.evaluate(r, SpherePoint::pole()) - series).abs() < 1e-12);
        let sup = radial_sup(&u, r).unwrap();
        assert!((sup.value - series).abs() < 1e-12);
    }

    #[test]
    fn parseval_on_all_grids() {
        for (dim, mode, degree) in [(1, Mode::Full, 20), (2, Mode::Full, 10), (2, Mode::Zonal, 15), (4, Mode::Zonal, 12)] {
            let u = random(dim, mode, degree, 7 + degree as u64);
            for r in [0.0, 0.5, 0.9] {
                let grid = radial_lp_profile(&u, r, 2.0).unwrap();
                let coeffs = u.l2_from_coefficients(r);
                assert!((grid - coeffs).abs() < 1e-9, "N={dim} {mode:?} r={r}: {grid} vs {coeffs}");
            }
        }
    }

    #[test]
    fn sphere_two_basis_is_orthonormal() {
        let grid = SphereGrid::product(12, 24);
        let basis: Vec<HarmonicExpansion> = (0..6)
            .flat_map(|k| {
                (1..=2 * k + 1).map(move |l| {
                    HarmonicExpansion::from_fn(2, Mode::Full, k, |kk, ll| if kk == k && ll == l { 1.0 } else { 0.0 }).unwrap()
                })
            })
            .collect();
        let (_, w) = grid.sample(&basis[0], 0.0);
        let samples: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| (0..w.len()).map(|i| b.evaluate(1.0, grid.point(i))).collect())
            .collect();
        for (i, a) in samples.iter().enumerate() {
            for (j, b) in samples.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y * w).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "{i} {j}: {dot}");
            }
        }
    }

    #[test]
    fn zonal_and_full_agree_on_the_circle() {
        let a = [0.3, -1.0, 0.5, 0.25];
        let z = HarmonicExpansion::zonal(1, a.to_vec()).unwrap();
        let full = HarmonicExpansion::from_fn(1, Mode::Full, 3, |k, l| match (k, l) {
            (0, _) => a[0],
            (_, 1) => a[k] * SQRT_2,
            _ => 0.0,
        })
        .unwrap();
        for th in [0.0, 0.4, 2.0] {
            let p = SpherePoint::new(th, 0.0);
            assert!((z.evaluate(0.7, p) - full.evaluate(0.7, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn cesaro_mean_is_convolution_with_cesaro_kernel() {
        let u = random(2, Mode::Full, 12, 3);
        let a = cesaro_mean(&u, 9, 2.0);
        let b = convolve(&u, &cesaro_kernel(2, 9, 2.0)).unwrap();
        assert!(a.max_coeff_diff(&b) < 1e-14);
        let c = HarmonicExpansion::constant(2, Mode::Full, 3.0).unwrap();
        assert_eq!(cesaro_mean(&c, 5, 1.0), c);
        assert!(convolve(&u, &cesaro_kernel(1, 3, 1.0)).is_err());
    }

    #[test]
    fn cesaro_factors_approach_one() {
        let u = random(1, Mode::Full, 8, 4);
        let m = 2.0;
        let n = 32;
        let s = cesaro_mean(&u, n, m);
        for k in 1..=8 {
            let ratio = s.get(k, 1) / u.get(k, 1);
            assert!(ratio <= 1.0 && ratio >= 1.0 - m * k as f64 / n as f64);
        }
    }

    #[test]
    fn poisson_convolution_is_dilation() {
        let u = random(1, Mode::Full, 10, 5);
        let t = 0.6;
        let p = poisson_series_tol(1, t, poisson_truncation(1, t, 1e-15), 1e-15).unwrap();
        let v = convolve(&u, &p).unwrap();
        for th in [0.1, 1.3, 4.0] {
            let x = SpherePoint::new(th, 0.0);
            assert!((v.evaluate(0.9, x) - u.evaluate(0.9 * t, x)).abs() < 1e-13);
        }
        let proj = convolve(&u, &ZonalPoly::new(1, vec![1.0])).unwrap();
        assert_eq!(proj.degree(), 0);
        assert_eq!(proj.get(0, 1), u.get(0, 1));
    }

    #[test]
    fn young_inequality() {
        for seed in 0..4 {
            let u = random(1, Mode::Full, 24, 100 + seed);
            let kernel = vp_kernel(1, 0, 8, 1).unwrap();
            let norm = kernel.l1_norm().unwrap();
            let v = convolve(&u, &kernel).unwrap();
            for p in [1.0, 2.0, f64::INFINITY] {
                let lhs = radial_lp_profile(&v, 0.8, p).unwrap();
                let rhs = norm * radial_lp_profile(&u, 0.8, p).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-9), "p={p}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn vp_sum_band_properties() {
        let u = random(1, Mode::Full, 12, 9);
        assert_eq!(vp_sum(&u, 12, 1).unwrap(), u);
        let mut high = HarmonicExpansion::zeros(1, Mode::Full, 9).unwrap();
        high.set(9, 2, 1.0).unwrap();
        assert!(vp_sum(&high, 4, 1).unwrap().support().is_empty());
        let big = random(1, Mode::Full, 40, 10);
        let once = vp_sum(&big, 5, 2).unwrap();
        let twice = vp_sum(&once, 10, 2).unwrap();
        assert!(once.max_coeff_diff(&twice) < 1e-15);
    }

    #[test]
    fn subharmonic_growth_in_r() {
        let u = random(1, Mode::Full, 16, 11);
        for p in [1.0, 2.0, f64::INFINITY] {
            let mut prev = 0.0;
            for i in 0..10 {
                let v = radial_lp_profile(&u, i as f64 / 10.0, p).unwrap();
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn gap_series_examples() {
        let degrees: Vec<u64> = (0..6).map(|j| 1 << j).collect();
        let amps: Vec<f64> = degrees.iter().map(|d| *d as f64).collect();
        let u = gap_series(&degrees, &amps, 2.0).unwrap();
        let (r, th) = (0.5f64, 0.3f64);
        let direct: f64 = degrees
            .iter()
            .map(|&d| d as f64 * r.powi(d as i32) * (d as f64 * th).cos())
            .sum();
        assert!((u.evaluate(r, SpherePoint::new(th, 0.0)) - direct).abs() < 1e-13);
        assert!(matches!(
            gap_series(&[1, 2, 3], &[1.0; 3], 2.0),
            Err(Error::GapViolation { index: 2, .. })
        ));
        assert!(gap_series(&[], &[], 2.0).unwrap().support().is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let u = random(2, Mode::Full, 4, 12);
        let back = HarmonicExpansion::from_csv_str(&u.to_csv_string()).unwrap();
        assert_eq!(back, u);
        assert!(HarmonicExpansion::from_csv_str("k,l,a\n0,1,1").is_err());
        assert!(HarmonicExpansion::from_csv_str("# N=1,mode=full,degree_K=1\n1,3,1.0").is_err());
        assert!(HarmonicExpansion::zeros(3, Mode::Full, 2).is_err());
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let u = random(1, Mode::Full, 30, 13);
        let grid = SphereGrid::circle(16);
        assert!(matches!(
            radial_lp_profile_on(&u, 0.5, 2.0, &grid),
            Err(Error::QuadratureOrder { .. })
        ));
    }
}
