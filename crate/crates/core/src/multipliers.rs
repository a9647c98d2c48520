//! Coefficient multipliers: `H_f`, `H_f⁻¹`, `I_q`, general sequences, the
//! kernel criterion for degree-constant multipliers and the checks built on
//! them.
//!
//! Every operator here acts coefficientwise, so all of them commute with each
//! other and with [`cesaro_mean`](crate::expansions::cesaro_mean) and
//! [`vp_sum`](crate::expansions::vp_sum). Weights are read at `f(0) := f(1)`.

use std::collections::HashMap;
use std::fmt;
use std::cell::RefCell;
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::diagnostics::{growth_ratio_cesaro, growth_ratio_vp, regular_growth_ratio, Criterion, GrowthReport, Verdict};
use crate::error::{Error, Result};
use crate::expansions::{HarmonicExpansion, Mode, SpherePoint};
use crate::kernels::{dim_harmonics_f64, ZonalPoly};
use crate::seqcalc::{cesaro_factors, weighted_difference_sum};
use crate::weights::{
    blocks, default_regularity_grid, regularity_ratio, regularize, stieltjes_integral, BlockSequence, RegularizeOptions,
    Weight,
};

/// Whether a multiplier depends on the degree only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    DegreeOnly,
    PerIndex,
}

#[derive(Debug, Clone)]
enum Rule {
    One,
    Hf(Weight),
    HfInv(Weight),
    Iq { q: Weight, memo: Arc<Mutex<HashMap<usize, f64>>> },
    /// `1/√|J_m|` on block `J_m`, zero past the last cut.
    BlockSqrtInv(BlockSequence),
    /// `λ_k`, zero past the end.
    Degree(Vec<f64>),
    /// `λ_kl` with `l` from 1; absent or NaN entries take `fill[k]`, then zero.
    Indexed { rows: Vec<Vec<f64>>, fill: Vec<f64> },
}

/// A multiplier sequence `λ`, optionally scaled by a positive constant.
#[derive(Debug, Clone)]
pub struct MultiplierSeq {
    rule: Rule,
    factor: f64,
    description: String,
}

impl MultiplierSeq {
    fn with_rule(rule: Rule, description: String) -> MultiplierSeq {
        MultiplierSeq {
            rule,
            factor: 1.0,
            description,
        }
    }

    pub fn one() -> MultiplierSeq {
        MultiplierSeq::with_rule(Rule::One, "one".into())
    }

    /// `λ_k = f(k)`.
    pub fn hf(f: Weight) -> MultiplierSeq {
        let d = format!("hf:{f}");
        MultiplierSeq::with_rule(Rule::Hf(f), d)
    }

    /// `λ_k = 1/f(k)`.
    pub fn hf_inv(f: Weight) -> MultiplierSeq {
        let d = format!("hfinv:{f}");
        MultiplierSeq::with_rule(Rule::HfInv(f), d)
    }

    /// `λ_k = 1/f_q(k)` with `f_q` the unnormalized regularization of `q`.
    pub fn iq(q: Weight) -> MultiplierSeq {
        let d = format!("iq:{q}");
        MultiplierSeq::with_rule(
            Rule::Iq {
                q,
                memo: Arc::new(Mutex::new(HashMap::new())),
            },
            d,
        )
    }

    pub fn block_sqrt_inv(b: BlockSequence) -> MultiplierSeq {
        let d = format!("blocksqrtinv:{}", b.weight);
        MultiplierSeq::with_rule(Rule::BlockSqrtInv(b), d)
    }

    pub fn degree_values(values: Vec<f64>) -> MultiplierSeq {
        let d = format!("degree[{}]", values.len());
        MultiplierSeq::with_rule(Rule::Degree(values), d)
    }

    pub fn per_index(values: Vec<Vec<f64>>) -> MultiplierSeq {
        let d = format!("indexed[{}]", values.len());
        MultiplierSeq::with_rule(
            Rule::Indexed {
                rows: values,
                fill: Vec::new(),
            },
            d,
        )
    }

    /// `c λ`.
    pub fn scaled(mut self, c: f64) -> MultiplierSeq {
        self.factor *= c;
        self.description = format!("{c}*{}", self.description);
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn kind(&self) -> MultiplierKind {
        match self.rule {
            Rule::Indexed { .. } => MultiplierKind::PerIndex,
            _ => MultiplierKind::DegreeOnly,
        }
    }

    /// Parses `one`, `hf:W`, `hfinv:W`, `iq:W`, `blocksqrtinv[:W]` (dyadic
    /// blocks of `W`, default `pow:1`) or `file:PATH`.
    pub fn parse(spec: &str) -> Result<MultiplierSeq> {
        let bad = |reason: &str| Error::Parse(format!("multiplier `{spec}`: {reason}"));
        let spec_t = spec.trim();
        let (head, rest) = match spec_t.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (spec_t, None),
        };
        match (head, rest) {
            ("one", None) => Ok(MultiplierSeq::one()),
            ("hf", Some(w)) => Ok(MultiplierSeq::hf(Weight::parse(w)?)),
            ("hfinv", Some(w)) => Ok(MultiplierSeq::hf_inv(Weight::parse(w)?)),
            ("iq", Some(w)) => Ok(MultiplierSeq::iq(Weight::parse(w)?)),
            ("blocksqrtinv", w) => {
                let f = Weight::parse(w.unwrap_or("pow:1"))?;
                Ok(MultiplierSeq::block_sqrt_inv(blocks(&f, 2.0, 64, 1)?))
            }
            ("file", Some(path)) => MultiplierSeq::read_csv(Path::new(path)),
            _ => Err(bad("expected one, hf:W, hfinv:W, iq:W, blocksqrtinv[:W] or file:PATH")),
        }
    }

    /// Rows `k,l,λ`; `l = 0` sets the whole degree `k`. A file with only
    /// `l = 0` rows is degree-only.
    pub fn read_csv(path: &Path) -> Result<MultiplierSeq> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut m = MultiplierSeq::from_csv_str(&text)?;
        m.description = format!("file:{}", path.display());
        Ok(m)
    }

    pub fn from_csv_str(text: &str) -> Result<MultiplierSeq> {
        let mut degree: Vec<f64> = Vec::new();
        let mut indexed: Vec<Vec<f64>> = Vec::new();
        let mut per_index = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = (cols.len() == 3)
                .then(|| Some((cols[0].parse::<usize>().ok()?, cols[1].parse::<usize>().ok()?, cols[2].parse::<f64>().ok()?)))
                .flatten();
            let Some((k, l, v)) = parsed else {
                if lineno == 0 || degree.is_empty() && indexed.is_empty() {
                    continue; // header
                }
                return Err(Error::Parse(format!("multiplier row {}: `{line}`", lineno + 1)));
            };
            if l == 0 {
                if degree.len() <= k {
                    degree.resize(k + 1, 0.0);
                }
                degree[k] = v;
            } else {
                per_index = true;
                if indexed.len() <= k {
                    indexed.resize(k + 1, Vec::new());
                }
                if indexed[k].len() < l {
                    indexed[k].resize(l, f64::NAN);
                }
                indexed[k][l - 1] = v;
            }
        }
        if !per_index {
            return Ok(MultiplierSeq::degree_values(degree));
        }
        let mut m = MultiplierSeq::per_index(indexed);
        if let Rule::Indexed { fill, .. } = &mut m.rule {
            *fill = degree;
        }
        Ok(m)
    }

    /// `λ_k` for a degree-only multiplier.
    pub fn degree_value(&self, k: usize) -> Result<f64> {
        let v = match &self.rule {
            Rule::One => 1.0,
            Rule::Hf(f) => f.eval(k as f64),
            Rule::HfInv(f) => 1.0 / f.eval(k as f64),
            Rule::Iq { q, memo } => {
                if let Some(v) = memo.lock().unwrap().get(&k) {
                    return Ok(self.factor * v);
                }
                let v = 1.0 / regularize(q, k as f64)?;
                memo.lock().unwrap().insert(k, v);
                v
            }
            Rule::BlockSqrtInv(b) => match b.block_of(k as u64) {
                Some(m) => {
                    let (lo, hi) = b.block_range(m);
                    1.0 / ((hi - lo + 1) as f64).sqrt()
                }
                None => 0.0,
            },
            Rule::Degree(v) => v.get(k).copied().unwrap_or(0.0),
            Rule::Indexed { .. } => {
                return Err(Error::InvalidArgument(format!(
                    "multiplier {} depends on the index within a degree",
                    self.description
                )))
            }
        };
        Ok(self.factor * v)
    }

    /// `λ_0, …, λ_{k_max}` for a degree-only multiplier.
    pub fn degree_values_up_to(&self, k_max: usize) -> Result<Vec<f64>> {
        (0..=k_max).map(|k| self.degree_value(k)).collect()
    }

    /// `λ_kl` with `l` counted from 1.
    pub fn value(&self, k: usize, l: usize) -> Result<f64> {
        match &self.rule {
            Rule::Indexed { rows, fill } => {
                let v = rows
                    .get(k)
                    .and_then(|r| r.get(l.wrapping_sub(1)))
                    .copied()
                    .filter(|v| !v.is_nan())
                    .or_else(|| fill.get(k).copied())
                    .unwrap_or(0.0);
                Ok(self.factor * v)
            }
            _ => self.degree_value(k),
        }
    }
}

impl fmt::Display for MultiplierSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

/// `H_f u`: degree `j` scaled by `f(j)`.
pub fn apply_hf(u: &HarmonicExpansion, f: &Weight) -> HarmonicExpansion {
    u.map_degree(|j| f.eval(j as f64))
}

/// `H_f⁻¹ u`: degree `j` divided by `f(j)`.
pub fn apply_hf_inv(u: &HarmonicExpansion, f: &Weight) -> HarmonicExpansion {
    u.map_degree(|j| 1.0 / f.eval(j as f64))
}

/// `I_q u = ∫_{1/2}^1 u(t·) d(-1/w(t))`: degree `k` divided by the
/// unnormalized regularization `f_q(k)`.
pub fn apply_iq(u: &HarmonicExpansion, q: &Weight) -> Result<HarmonicExpansion> {
    let mut factors = vec![0.0; u.degree() + 1];
    for k in u.support() {
        factors[k] = 1.0 / regularize(q, k as f64)?;
    }
    Ok(u.map_degree(|k| factors[k]))
}

/// `I_q u(r x)` by direct Stieltjes quadrature in the radius.
pub fn apply_iq_direct(u: &HarmonicExpansion, q: &Weight, r: f64, x: SpherePoint) -> Result<f64> {
    // |∂_t u(t r x)| <= Σ_k k r^k |Y_k(x)| with |Y_kl| <= √L_k
    let mut lip = 0.0;
    let mut size = 0.0;
    for k in u.support() {
        let norm: f64 = u.degree_coeffs(k).iter().map(|a| a.abs()).sum();
        let bound = match u.mode {
            Mode::Zonal => norm * dim_harmonics_f64(u.dim, k),
            Mode::Full => norm * dim_harmonics_f64(u.dim, k).sqrt(),
        };
        lip += k as f64 * r.powi(k as i32) * bound;
        size += bound;
    }
    stieltjes_integral(
        q,
        |t, _| u.evaluate(t * r, x),
        u.evaluate(r, x),
        lip,
        u.degree() as f64,
        size.max(f64::MIN_POSITIVE),
        &RegularizeOptions::default(),
    )
}

/// `λ u` coefficientwise.
pub fn apply_multiplier(u: &HarmonicExpansion, lambda: &MultiplierSeq) -> Result<HarmonicExpansion> {
    let err = RefCell::new(None);
    let out = match lambda.kind() {
        MultiplierKind::DegreeOnly => {
            let mut factors = vec![0.0; u.degree() + 1];
            for k in u.support() {
                factors[k] = lambda.degree_value(k)?;
            }
            u.map_degree(|k| factors[k])
        }
        MultiplierKind::PerIndex => u.map_indexed(|k, l| match lambda.value(k, l) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        }),
    };
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `‖σ_n^d(Σ_k λ_k f(k) Z_k)‖_1 / g̃(n)` with `f` the normalized regularization
/// of `g`, on the sphere of dimension `dim`.
pub fn multiplier_criterion(
    dim: u32,
    lambda: &MultiplierSeq,
    g: &Weight,
    g_tilde: &Weight,
    d: u32,
    n_grid: &[usize],
) -> Result<GrowthReport> {
    if lambda.kind() != MultiplierKind::DegreeOnly {
        return Err(Error::InvalidArgument(
            "the kernel criterion takes degree-only multipliers".into(),
        ));
    }
    let f = Weight::regularized(g.clone())?;
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let hf_lambda: Vec<f64> = lambda
        .degree_values_up_to(n_max)?
        .into_iter()
        .enumerate()
        .map(|(k, l)| l * f.eval(k as f64))
        .collect();
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let factors = cesaro_factors(n, d as f64);
        let coeffs = (0..=n).map(|k| hf_lambda[k] * factors[k]).collect();
        let norm = ZonalPoly::new(dim, coeffs).l1_norm()?;
        points.push((n as f64, n as f64, norm / g_tilde.eval(n as f64)));
    }
    Ok(GrowthReport::from_points(Criterion::MultiplierCriterion, g_tilde.to_string(), 1.0, Some(d), points)
        .with_note(format!("multiplier {lambda}, regularization of {g}")))
}

/// The three conclusions checked by [`theorem_mult_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultCase {
    /// `H_f u` against `f g`.
    A,
    /// `H_f⁻¹ u` against `g/f`, under `g/f^{1+ε}` nondecreasing.
    B { eps: f64 },
    /// `H_f⁻¹ u` against `(g/f)(1 + log f)`.
    C,
}

pub const DEFAULT_EPS: f64 = 0.5;

impl MultCase {
    pub fn parse(s: &str) -> Result<MultCase> {
        match s {
            "a" | "A" => Ok(MultCase::A),
            "b" | "B" => Ok(MultCase::B { eps: DEFAULT_EPS }),
            "c" | "C" => Ok(MultCase::C),
            _ => Err(Error::Parse(format!("case `{s}`: expected a, b or c"))),
        }
    }

    pub fn criterion(&self) -> Criterion {
        match self {
            MultCase::A => Criterion::TheoremMultA,
            MultCase::B { .. } => Criterion::TheoremMultB,
            MultCase::C => Criterion::TheoremMultC,
        }
    }

    pub fn target(&self, f: &Weight, g: &Weight) -> Weight {
        match self {
            MultCase::A => Weight::product(f.clone(), g.clone()),
            MultCase::B { .. } => Weight::quotient(g.clone(), f.clone()),
            MultCase::C => Weight::product(Weight::quotient(g.clone(), f.clone()), Weight::log_of(f.clone())),
        }
    }

    pub fn transform(&self, u: &HarmonicExpansion, f: &Weight) -> HarmonicExpansion {
        match self {
            MultCase::A => apply_hf(u, f),
            _ => apply_hf_inv(u, f),
        }
    }
}

/// Runs the case's transform of `u` through `growth_ratio_cesaro` against the
/// case's target weight.
pub fn theorem_mult_check(
    u: &HarmonicExpansion,
    f: &Weight,
    g: &Weight,
    case: MultCase,
    p: f64,
    d: u32,
    n_grid: &[usize],
) -> Result<GrowthReport> {
    theorem_mult_check_against(u, f, g, case, &case.target(f, g), p, d, n_grid)
}

/// [`theorem_mult_check`] against an explicit target, for sharpness probes.
#[allow(clippy::too_many_arguments)]
pub fn theorem_mult_check_against(
    u: &HarmonicExpansion,
    f: &Weight,
    g: &Weight,
    case: MultCase,
    target: &Weight,
    p: f64,
    d: u32,
    n_grid: &[usize],
) -> Result<GrowthReport> {
    let pre = growth_ratio_cesaro(u, g, p, d, n_grid)?;
    let mut report = growth_ratio_cesaro(&case.transform(u, f), target, p, d, n_grid)?
        .with_note(format!("f = {f}, g = {g}"))
        .with_note(format!("membership in h_g: sup {:.6e}, {}", pre.sup_ratio, pre.verdict.as_str()));
    report.criterion = case.criterion();
    if pre.verdict != Verdict::Bounded {
        return Ok(report.mark_vacuous("u fails membership for g"));
    }
    if let MultCase::B { eps } = case {
        let h: Vec<f64> = n_grid
            .iter()
            .map(|&n| g.eval(n as f64) / f.eval(n as f64).powf(1.0 + eps))
            .collect();
        let monotone = h.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
        let note = format!("g/f^(1+eps) nondecreasing on grid for eps = {eps}: {monotone}");
        report = if monotone {
            report.with_note(note)
        } else {
            report.mark_vacuous(note)
        };
    }
    Ok(report)
}

/// `Σ |Δ^{d+1}(A_{n-j}^d f(j))| A_j^d / A_n^d / f(n)` over `n_grid`.
pub fn fn_bound_check(f: &Weight, d: u32, n_grid: &[u64]) -> Result<GrowthReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let points = n_grid
        .iter()
        .map(|&n| (n as f64, n as f64, weighted_difference_sum(f, n, d) / f.eval(n as f64)))
        .collect();
    let mut report = GrowthReport::from_points(Criterion::FnBound, f.to_string(), f64::NAN, Some(d), points);
    if !f.is_tabulated() {
        let t_max = n_grid.iter().copied().max().unwrap_or(1).max(2) as f64;
        let note = match regularity_ratio(f, d, &default_regularity_grid(t_max)) {
            Ok(c) => format!("regularity ratio {c:.6e}"),
            Err(e) => format!("regularity ratio unavailable: {e}"),
        };
        report = report.with_note(note);
    }
    Ok(report)
}

/// Both directions of the regular-growth mapping property. A direction whose
/// input fails its own membership test is marked vacuous.
#[derive(Debug, Clone)]
pub struct MappingReport {
    /// `R_n(H_f u)` against `f`, given `u` of regular growth.
    pub forward: GrowthReport,
    /// Block oscillations of `H_f⁻¹ u`, given `u` in `h_f`.
    pub inverse: GrowthReport,
}

pub fn regular_growth_mapping_check(
    u: &HarmonicExpansion,
    f: &Weight,
    blocks: &BlockSequence,
    p: f64,
    probe_per_block: usize,
) -> Result<MappingReport> {
    let n_grid: Vec<usize> = blocks.cuts.iter().map(|&c| c.max(1) as usize).collect();

    let pre_fwd = regular_growth_ratio(u, blocks, p, probe_per_block)?;
    let mut forward = growth_ratio_vp(&apply_hf(u, f), f, p, &n_grid)?
        .with_note(format!("regular growth of u: sup {:.6e}", pre_fwd.sup_ratio));
    if pre_fwd.verdict != Verdict::Bounded {
        forward = forward.mark_vacuous("u is not of regular growth");
    }

    let pre_inv = growth_ratio_vp(u, f, p, &n_grid)?;
    let mut inverse = regular_growth_ratio(&apply_hf_inv(u, f), blocks, p, probe_per_block)?
        .with_note(format!("membership of u in h_f: sup {:.6e}", pre_inv.sup_ratio));
    if pre_inv.verdict != Verdict::Bounded {
        inverse = inverse.mark_vacuous("u fails membership for f");
    }
    Ok(MappingReport { forward, inverse })
}
