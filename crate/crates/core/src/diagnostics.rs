//! Growth-space membership reports.
//!
//! Every report is a table of `(parameter, ratio)` pairs with its supremum and
//! a verdict from [`trend`]. Finite grids cannot certify asymptotics, so the
//! verdict is a heuristic and the raw table is always kept.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::expansions::{cesaro_mean, radial_lp_profile, vp_sum, HarmonicExpansion, Mode};
use crate::kernels::{default_d, CutoffProfile};
use crate::weights::{BlockSequence, Weight};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Radial,
    KernelConv,
    Cesaro,
    Vp,
    RegularGrowth,
    TheoremA,
    EstimateWithA,
    FnBound,
    MultiplierCriterion,
    TheoremMultA,
    TheoremMultB,
    TheoremMultC,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Radial => "radial",
            Criterion::KernelConv => "kernel_conv",
            Criterion::Cesaro => "cesaro",
            Criterion::Vp => "vp",
            Criterion::RegularGrowth => "regular_growth",
            Criterion::TheoremA => "theorem_a",
            Criterion::EstimateWithA => "estimate_with_a",
            Criterion::FnBound => "fn_bound",
            Criterion::MultiplierCriterion => "multiplier_criterion",
            Criterion::TheoremMultA => "theorem_mult_a",
            Criterion::TheoremMultB => "theorem_mult_b",
            Criterion::TheoremMultC => "theorem_mult_c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Bounded,
    Unbounded,
    /// The hypothesis of the check failed, so the conclusion says nothing.
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "BOUNDED",
            Verdict::Unbounded => "UNBOUNDED",
            Verdict::Vacuous => "VACUOUS",
        }
    }
}

/// Outcome of the trend test with the rule that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    pub bounded: bool,
    pub rule: &'static str,
}

/// Relative rise of the running maximum over the last half below which a
/// ratio table counts as flat.
pub const PLATEAU_TOL: f64 = 0.01;
/// Last-quartile log-log slope at or above which growth is declared.
pub const SLOPE_THRESHOLD: f64 = 0.05;

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Decides whether ratios sampled at increasing `scales` stay bounded:
///
/// 1. bounded if the supremum is reached before the last quarter of the grid;
/// 2. bounded if the running maximum rises by less than [`PLATEAU_TOL`]
///    (relative) over the last half;
/// 3. unbounded if the last-quartile slope of `ln ratio` against `ln scale`
///    is at least [`SLOPE_THRESHOLD`];
/// 4. otherwise the increments of the running maximum over the last half,
///    divided by the step in `ln scale`, are fitted as `δ ∝ (ln scale)^γ`;
///    bounded iff `γ < -1`, the summable case. The division keeps the rule
///    independent of how the grid is spaced.
pub fn trend(scales: &[f64], ratios: &[f64]) -> Trend {
    let n = ratios.len();
    let sup = ratios.iter().cloned().fold(0.0, f64::max);
    if n < 3 || sup == 0.0 {
        return Trend {
            bounded: true,
            rule: "grid too short or identically zero",
        };
    }
    let argmax = ratios.iter().position(|r| *r == sup).unwrap_or(0);
    if (argmax as f64) < 0.75 * (n - 1) as f64 {
        return Trend {
            bounded: true,
            rule: "supremum attained before the last quarter",
        };
    }
    let running: Vec<f64> = ratios
        .iter()
        .scan(0.0f64, |m, r| {
            *m = m.max(*r);
            Some(*m)
        })
        .collect();
    let half = n / 2;
    if (running[n - 1] - running[half]) / running[n - 1] < PLATEAU_TOL {
        return Trend {
            bounded: true,
            rule: "running maximum flat over the last half",
        };
    }
    let quarter = (n / 4).max(2);
    let (lx, ly): (Vec<f64>, Vec<f64>) = (n - quarter..n)
        .filter(|&i| scales[i] > 0.0 && ratios[i] > 0.0)
        .map(|i| (scales[i].ln(), ratios[i].ln()))
        .unzip();
    if lx.len() >= 2 && ls_slope(&lx, &ly) >= SLOPE_THRESHOLD {
        return Trend {
            bounded: false,
            rule: "last-quartile log-log slope above threshold",
        };
    }
    let (ix, iy): (Vec<f64>, Vec<f64>) = (half.max(1)..n)
        .filter(|&i| running[i] > running[i - 1] && scales[i] > 1.0 && scales[i - 1] > 0.0)
        .map(|i| {
            let step = (scales[i] / scales[i - 1]).ln();
            (scales[i].ln().ln(), ((running[i] - running[i - 1]) / step).ln())
        })
        .unzip();
    if ix.len() < 2 {
        return Trend {
            bounded: true,
            rule: "running maximum increases at fewer than two points",
        };
    }
    let gamma = ls_slope(&ix, &iy);
    if gamma < -1.0 {
        Trend {
            bounded: true,
            rule: "summable increments of the running maximum",
        }
    } else {
        Trend {
            bounded: false,
            rule: "non-summable increments of the running maximum",
        }
    }
}

/// A ratio table with its supremum and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub criterion: Criterion,
    pub weight: String,
    /// Norm exponent; NaN when the report has none.
    pub p: f64,
    pub d: Option<u32>,
    /// `(parameter, ratio)`
    pub grid: Vec<(f64, f64)>,
    /// Scale used by the trend test for each grid point.
    pub scales: Vec<f64>,
    pub sup_ratio: f64,
    pub verdict: Verdict,
    pub trend_rule: String,
    pub notes: Vec<String>,
}

impl GrowthReport {
    /// Builds a report from `(parameter, scale, ratio)` triples.
    pub fn from_points(
        criterion: Criterion,
        weight: impl Into<String>,
        p: f64,
        d: Option<u32>,
        points: Vec<(f64, f64, f64)>,
    ) -> GrowthReport {
        let scales: Vec<f64> = points.iter().map(|x| x.1).collect();
        let ratios: Vec<f64> = points.iter().map(|x| x.2).collect();
        let t = trend(&scales, &ratios);
        GrowthReport {
            criterion,
            weight: weight.into(),
            p,
            d,
            grid: points.iter().map(|x| (x.0, x.2)).collect(),
            scales,
            sup_ratio: ratios.iter().cloned().fold(0.0, f64::max),
            verdict: if t.bounded {
                Verdict::Bounded
            } else {
                Verdict::Unbounded
            },
            trend_rule: t.rule.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> GrowthReport {
        self.notes.push(note.into());
        self
    }

    pub fn mark_vacuous(mut self, reason: impl Into<String>) -> GrowthReport {
        self.verdict = Verdict::Vacuous;
        self.notes.push(reason.into());
        self
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.grid.iter().map(|x| x.1).collect()
    }

    pub fn to_json(&self) -> Value {
        // NaN marks reports without an exponent
        let p = if self.p.is_nan() {
            Value::Null
        } else if self.p.is_finite() {
            json!(self.p)
        } else {
            json!("inf")
        };
        let mut v = json!({
            "criterion": self.criterion.as_str(),
            "weight": self.weight,
            "p": p,
            "d": self.d,
            "grid": self.grid.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "sup_ratio": self.sup_ratio,
            "verdict": self.verdict.as_str(),
            "trend": self.trend_rule,
        });
        if !self.notes.is_empty() {
            v["notes"] = json!(self.notes);
        }
        v
    }

    pub const CSV_HEADER: &'static str = "criterion,weight,p,d,param,ratio,sup_ratio,verdict";

    /// CSV rows mirroring the JSON (without a header).
    pub fn csv_rows(&self) -> String {
        let p = if self.p.is_nan() {
            String::new()
        } else if self.p.is_finite() {
            self.p.to_string()
        } else {
            "inf".to_string()
        };
        let d = self.d.map(|d| d.to_string()).unwrap_or_default();
        let mut out = String::new();
        for (param, ratio) in &self.grid {
            let _ = writeln!(
                out,
                "{},\"{}\",{p},{d},{param},{ratio},{},{}",
                self.criterion.as_str(),
                self.weight,
                self.sup_ratio,
                self.verdict.as_str()
            );
        }
        out
    }
}

fn p_norm(u: &HarmonicExpansion, r: f64, p: f64) -> Result<f64> {
    radial_lp_profile(u, r, p)
}

/// Norm of a polynomial on the sphere itself (`r = 1`).
fn boundary_norm(u: &HarmonicExpansion, p: f64) -> Result<f64> {
    radial_lp_profile(u, 1.0, p)
}

/// `‖u(r·)‖_p / g(1/(1-r))`.
pub fn growth_ratio_radial(u: &HarmonicExpansion, g: &Weight, p: f64, r_grid: &[f64]) -> Result<GrowthReport> {
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let scale = 1.0 / (1.0 - r);
        points.push((r, scale, p_norm(u, r, p)? / g.eval(scale)));
    }
    Ok(GrowthReport::from_points(Criterion::Radial, g.to_string(), p, None, points))
}

/// `‖σ_n^d u‖_p / g(n)`.
pub fn growth_ratio_cesaro(u: &HarmonicExpansion, g: &Weight, p: f64, d: u32, n_grid: &[usize]) -> Result<GrowthReport> {
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let s = cesaro_mean(u, n, d as f64);
        points.push((n as f64, n as f64, boundary_norm(&s, p)? / g.eval(n as f64)));
    }
    Ok(GrowthReport::from_points(Criterion::Cesaro, g.to_string(), p, Some(d), points))
}

/// `‖R_n u‖_p / g(n)` with the cutoff smoothness `d` of the sphere dimension.
pub fn growth_ratio_vp(u: &HarmonicExpansion, g: &Weight, p: f64, n_grid: &[usize]) -> Result<GrowthReport> {
    growth_ratio_vp_with(u, g, p, default_d(u.dim), n_grid)
}

pub fn growth_ratio_vp_with(
    u: &HarmonicExpansion,
    g: &Weight,
    p: f64,
    d: u32,
    n_grid: &[usize],
) -> Result<GrowthReport> {
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let v = vp_sum(u, n, d)?;
        points.push((n as f64, n as f64, boundary_norm(&v, p)? / g.eval(n as f64)));
    }
    Ok(GrowthReport::from_points(Criterion::Vp, g.to_string(), p, Some(d), points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EquivalenceVerdict {
    /// All criteria bounded with comparable suprema.
    Pass,
    /// All criteria unbounded.
    Fail,
    /// The criteria disagree, or their suprema are too far apart.
    Inconsistent,
}

impl EquivalenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquivalenceVerdict::Pass => "PASS",
            EquivalenceVerdict::Fail => "FAIL",
            EquivalenceVerdict::Inconsistent => "INCONSISTENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub reports: BTreeMap<Criterion, GrowthReport>,
    /// Largest ratio between two suprema.
    pub spread: f64,
    pub factor: f64,
    pub verdict: EquivalenceVerdict,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> Value {
        let reports: serde_json::Map<String, Value> = self
            .reports
            .iter()
            .map(|(k, r)| (k.as_str().to_string(), r.to_json()))
            .collect();
        json!({
            "criteria": reports,
            "spread": self.spread,
            "factor": self.factor,
            "verdict": self.verdict.as_str(),
        })
    }
}

pub const DEFAULT_EQUIVALENCE_FACTOR: f64 = 100.0;

/// Grids for the equivalence check.
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub r_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
}

impl Grids {
    /// `r = 1 - 2^{-j}`, `j = 1..=j_max`, and `n = 2^i`, `i = 0..=i_max`.
    pub fn dyadic(j_max: u32, i_max: u32) -> Grids {
        Grids {
            r_grid: (1..=j_max).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect(),
            n_grid: (0..=i_max).map(|i| 1usize << i).collect(),
        }
    }
}

/// Criteria (radial), (Cesàro) and (de la Vallée-Poussin) side by side.
pub fn equivalence_report(
    u: &HarmonicExpansion,
    g: &Weight,
    p: f64,
    d: u32,
    grids: &Grids,
    factor: f64,
) -> Result<EquivalenceReport> {
    if grids.r_grid.is_empty() || grids.n_grid.is_empty() {
        return Err(Error::InvalidArgument("equivalence grids must be nonempty".into()));
    }
    let mut reports = BTreeMap::new();
    reports.insert(Criterion::Radial, growth_ratio_radial(u, g, p, &grids.r_grid)?);
    reports.insert(Criterion::Cesaro, growth_ratio_cesaro(u, g, p, d, &grids.n_grid)?);
    reports.insert(Criterion::Vp, growth_ratio_vp_with(u, g, p, d, &grids.n_grid)?);
    let sups: Vec<f64> = reports.values().map(|r| r.sup_ratio).collect();
    let hi = sups.iter().cloned().fold(0.0, f64::max);
    let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if hi == 0.0 { 1.0 } else { hi / lo };
    let bounded = reports.values().filter(|r| r.verdict == Verdict::Bounded).count();
    let verdict = if bounded == reports.len() && spread <= factor {
        EquivalenceVerdict::Pass
    } else if bounded == 0 {
        EquivalenceVerdict::Fail
    } else {
        EquivalenceVerdict::Inconsistent
    };
    Ok(EquivalenceReport {
        reports,
        spread,
        factor,
        verdict,
    })
}

/// Hard cap on the number of series terms in [`estimate_with_a_check`].
pub const SERIES_CAP: usize = 100_000_000;

/// `Σ_k r^k A_k^m g(k) / (g(1/(1-r)) (1-r)^{-m-1})`, the series truncated once
/// the remaining terms are below `1e-12` of the partial sum.
pub fn estimate_with_a_check(g: &Weight, m: u32, r_grid: &[f64]) -> Result<GrowthReport> {
    let mf = m as f64;
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("radius r = {r} must lie in [0, 1)")));
        }
        // c_k = r^k A_k^m; the sum is computed relative to (1-r)^{-m-1}
        let norm = (1.0 - r).powf(mf + 1.0);
        let mut c = norm;
        let mut sum = c * g.eval(0.0);
        let mut k = 0usize;
        loop {
            k += 1;
            if k > SERIES_CAP {
                return Err(Error::TruncationCap { cap: SERIES_CAP });
            }
            let kf = k as f64;
            c *= r * (kf + mf) / kf;
            let term = c * g.eval(kf);
            sum += term;
            let next_ratio = r * (kf + 1.0 + mf) / (kf + 1.0) * g.eval(kf + 1.0) / g.eval(kf);
            if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) < 1e-12 * sum {
                break;
            }
        }
        let scale = 1.0 / (1.0 - r);
        points.push((r, scale, sum / g.eval(scale)));
    }
    Ok(GrowthReport::from_points(Criterion::EstimateWithA, g.to_string(), f64::NAN, Some(m), points)
        .with_note(format!("series order m = {m}")))
}

fn check_gap(degrees: &[u64]) -> Result<()> {
    for (i, w) in degrees.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::GapViolation {
                index: i + 1,
                prev: w[0],
                next: w[1],
                lambda: 1.0,
            });
        }
    }
    Ok(())
}

/// `Σ_{n_k <= M} |a_k| / g(M)` at each gap degree `M`.
pub fn gap_membership(degrees: &[u64], amplitudes: &[f64], g: &Weight) -> Result<GrowthReport> {
    if degrees.len() != amplitudes.len() {
        return Err(Error::InvalidArgument("degrees and amplitudes differ in length".into()));
    }
    check_gap(degrees)?;
    let mut partial = 0.0;
    let points = degrees
        .iter()
        .zip(amplitudes)
        .map(|(&n, a)| {
            partial += a.abs();
            (n as f64, n as f64, partial / g.eval(n as f64))
        })
        .collect();
    Ok(GrowthReport::from_points(Criterion::TheoremA, g.to_string(), f64::INFINITY, None, points))
}

/// Block oscillations `max_{n_k <= m <= n_{k+1}} ‖(R_m - R_{n_k}) u‖_p` with
/// `probe_per_block` values of `m` spread over each block, endpoints included.
pub fn regular_growth_ratio(
    u: &HarmonicExpansion,
    blocks: &BlockSequence,
    p: f64,
    probe_per_block: usize,
) -> Result<GrowthReport> {
    if probe_per_block < 2 {
        return Err(Error::InvalidArgument("probe_per_block must be >= 2".into()));
    }
    let q = CutoffProfile::new(0, default_d(u.dim))?;
    let mut points = Vec::new();
    for w in blocks.cuts.windows(2) {
        let (lo, hi) = (w[0].max(1), w[1]);
        let mut probes: Vec<u64> = (0..probe_per_block)
            .map(|i| lo + ((hi - lo) as f64 * i as f64 / (probe_per_block - 1) as f64).round() as u64)
            .collect();
        probes.dedup();
        let lo_f = lo as f64;
        let mut worst: f64 = 0.0;
        for m in probes {
            let mf = m as f64;
            let diff = u
                .truncate(2 * m as usize)
                .map_degree(|j| q.value(j as f64 / mf) - q.value(j as f64 / lo_f));
            worst = worst.max(boundary_norm(&diff, p)?);
        }
        points.push((lo as f64, lo as f64, worst));
    }
    Ok(GrowthReport::from_points(
        Criterion::RegularGrowth,
        blocks.weight.to_string(),
        p,
        Some(default_d(u.dim)),
        points,
    )
    .with_note(format!("blocks A = {}, {} cuts", blocks.ratio_a, blocks.cuts.len())))
}

/// Block-mixed norm: `ℓ^p` inside each block `J_m`, divided by `f(n_m)` when
/// a weight is given, then `ℓ^q` across blocks.
#[derive(Debug, Clone)]
pub struct MixedNorm {
    pub p: f64,
    pub q: f64,
    pub blocks: BlockSequence,
    pub weight: Option<Weight>,
}

fn lp(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// The block norms `‖λ|_{J_m}‖_p / f(n_m)`.
pub fn block_norms(seq: &HarmonicExpansion, spec: &MixedNorm) -> Result<Vec<f64>> {
    let last = *spec.blocks.cuts.last().ok_or_else(|| Error::InvalidArgument("empty block sequence".into()))?;
    if let Some(&k) = seq.support().last() {
        if k as u64 > last {
            return Err(Error::InvalidArgument(format!(
                "degree {k} lies beyond the last block cut {last}"
            )));
        }
    }
    Ok((0..spec.blocks.len())
        .map(|m| {
            let (lo, hi) = spec.blocks.block_range(m);
            let hi = hi.min(seq.degree() as u64);
            let vals = (lo..=hi).flat_map(|k| seq.degree_coeffs(k as usize).iter().copied());
            let v = lp(vals, spec.p);
            match &spec.weight {
                Some(f) => v / f.eval(spec.blocks.cuts[m] as f64),
                None => v,
            }
        })
        .collect())
}

pub fn mixed_norm(seq: &HarmonicExpansion, spec: &MixedNorm) -> Result<f64> {
    Ok(lp(block_norms(seq, spec)?.into_iter(), spec.q))
}

fn solid_norm(u: &HarmonicExpansion, g: &Weight, blocks: &BlockSequence, p: f64) -> Result<f64> {
    if u.dim != 1 || u.mode != Mode::Full {
        return Err(Error::InvalidArgument("solid norms are computed for N = 1 full expansions".into()));
    }
    mixed_norm(
        u,
        &MixedNorm {
            p,
            q: f64::INFINITY,
            blocks: blocks.clone(),
            weight: Some(g.clone()),
        },
    )
}

/// `sup_m ‖a|_{J_m}‖_2 / g(n_m)`.
pub fn solid_hull_norm(u: &HarmonicExpansion, g: &Weight, blocks: &BlockSequence) -> Result<f64> {
    solid_norm(u, g, blocks, 2.0)
}

/// `sup_m ‖a|_{J_m}‖_1 / g(n_m)`.
pub fn solid_core_norm(u: &HarmonicExpansion, g: &Weight, blocks: &BlockSequence) -> Result<f64> {
    solid_norm(u, g, blocks, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::gap_series;
    use crate::weights::blocks;

    fn dyadic_scales(n: usize) -> Vec<f64> {
        (1..=n).map(|j| 2f64.powi(j as i32)).collect()
    }

    #[test]
    fn trend_classifies_model_sequences() {
        let s = dyadic_scales(14);
        let j: Vec<f64> = (1..=14).map(|j| j as f64).collect();
        let cases: Vec<(Vec<f64>, bool)> = vec![
            (j.iter().map(|_| 1.0).collect(), true),
            (j.iter().map(|j| 2.0 * (1.0 - 0.5f64.powf(*j))).collect(), true),
            (j.iter().map(|j| 1.0 - 1.0 / j).collect(), true),
            (j.iter().map(|j| j.sqrt()).collect(), false),
            (j.iter().map(|j| j.powf(0.25)).collect(), false),
            (s.iter().map(|x| x.powf(0.5)).collect(), false),
            (j.iter().map(|j| 1.0 / j).collect(), true),
        ];
        for (i, (ratios, bounded)) in cases.iter().enumerate() {
            let t = trend(&s, ratios);
            assert_eq!(t.bounded, *bounded, "case {i}: {}", t.rule);
        }
    }

    #[test]
    fn constant_function_reports() {
        let u = HarmonicExpansion::constant(1, Mode::Full, 1.0).unwrap();
        let g = Weight::power(1.0);
        let grids = Grids::dyadic(8, 6);
        let r = growth_ratio_radial(&u, &g, f64::INFINITY, &grids.r_grid).unwrap();
        assert!(r.grid.iter().all(|(rr, q)| (q - (1.0 - rr)).abs() < 1e-14));
        let c = growth_ratio_cesaro(&u, &g, 2.0, 1, &grids.n_grid).unwrap();
        assert_eq!(c.grid[0], (1.0, 1.0));
        let e = equivalence_report(&u, &g, f64::INFINITY, 1, &grids, 100.0).unwrap();
        assert_eq!(e.verdict, EquivalenceVerdict::Pass);
    }

    #[test]
    fn truncated_harmonic_gives_zero() {
        let mut u = HarmonicExpansion::zeros(1, Mode::Full, 40).unwrap();
        u.set(40, 1, 1.0).unwrap();
        let c = growth_ratio_cesaro(&u, &Weight::power(1.0), 2.0, 1, &[4, 8, 16]).unwrap();
        assert!(c.ratios().iter().all(|r| *r == 0.0));
        let v = growth_ratio_vp(&u, &Weight::power(1.0), 2.0, &[4, 8, 16]).unwrap();
        assert!(v.ratios().iter().all(|r| *r == 0.0));
    }

    #[test]
    fn estimate_with_a_binomial_identity() {
        let r_grid: Vec<f64> = (1..=12).map(|j| 1.0 - 0.5f64.powi(j)).collect();
        for m in 1..=2 {
            let rep = estimate_with_a_check(&Weight::power(0.0), m, &r_grid).unwrap();
            assert!(rep.ratios().iter().all(|q| (q - 1.0).abs() < 1e-9));
        }
        // g = x, m = 1, with g(0) = g(1) = 1: (1-r)^3 (1 + Σ k (k+1) r^k) = (1-r)^3 + 2r
        let rep = estimate_with_a_check(&Weight::power(1.0), 1, &r_grid).unwrap();
        for (r, q) in &rep.grid {
            let exact = (1.0 - r).powi(3) + 2.0 * r;
            assert!((q - exact).abs() < 1e-9, "{r}: {q}");
        }
        assert_eq!(rep.verdict, Verdict::Bounded);
    }

    #[test]
    fn gap_membership_geometric() {
        let degrees: Vec<u64> = (0..20).map(|j| 1 << j).collect();
        let amps: Vec<f64> = degrees.iter().map(|d| *d as f64).collect();
        let rep = gap_membership(&degrees, &amps, &Weight::power(1.0)).unwrap();
        for (m, q) in &rep.grid {
            assert!((q - (2.0 * m - 1.0) / m).abs() < 1e-14);
        }
        assert_eq!(rep.verdict, Verdict::Bounded);
        assert!(gap_membership(&[2, 2], &[1.0, 1.0], &Weight::power(1.0)).is_err());
        let single = gap_membership(&[5], &[3.0], &Weight::power(1.0)).unwrap();
        assert_eq!(single.grid, vec![(5.0, 0.6)]);
    }

    #[test]
    fn regular_growth_of_low_polynomial_is_zero() {
        let u = HarmonicExpansion::from_fn(1, Mode::Full, 1, |_, _| 1.0).unwrap();
        let b = blocks(&Weight::power(1.0), 2.0, 8, 2).unwrap();
        let rep = regular_growth_ratio(&u, &b, f64::INFINITY, 4).unwrap();
        assert!(rep.ratios().iter().all(|r| r.abs() < 1e-15));
    }

    #[test]
    fn mixed_norms() {
        let u = HarmonicExpansion::from_fn(1, Mode::Full, 4, |k, l| (k + l) as f64).unwrap();
        let b = blocks(&Weight::power(1.0), 2.0, 0, 4).unwrap();
        let spec = MixedNorm { p: 2.0, q: 2.0, blocks: b, weight: None };
        let euclid = u.l2_from_coefficients(1.0);
        assert!((mixed_norm(&u, &spec).unwrap() - euclid).abs() < 1e-12);

        let b = blocks(&Weight::power(1.0), 2.0, 10, 1).unwrap();
        let lam = HarmonicExpansion::from_fn(1, Mode::Full, 1024, |k, l| {
            if l != 1 {
                return 0.0;
            }
            let m = b.block_of(k as u64).unwrap();
            1.0 / (b.cuts[m] as f64).sqrt()
        })
        .unwrap();
        let spec = MixedNorm { p: 2.0, q: f64::INFINITY, blocks: b.clone(), weight: None };
        let norms = block_norms(&lam, &spec).unwrap();
        for (m, v) in norms.iter().enumerate().skip(1) {
            let (lo, hi) = b.block_range(m);
            let expected = ((hi - lo + 1) as f64 / hi as f64).sqrt();
            assert!((v - expected).abs() < 1e-12);
        }
        assert!(mixed_norm(&lam, &spec).unwrap() <= 1.5);
    }

    #[test]
    fn solid_norms_separate_hull_and_core() {
        let g = Weight::power(1.0);
        let b = blocks(&g, 2.0, 12, 1).unwrap();
        let c = HarmonicExpansion::constant(1, Mode::Full, -3.0).unwrap();
        assert_eq!(solid_hull_norm(&c, &g, &b).unwrap(), 3.0);
        assert_eq!(solid_core_norm(&c, &g, &b).unwrap(), 3.0);
        let degree = *b.cuts.last().unwrap() as usize;
        let dense = HarmonicExpansion::from_fn(1, Mode::Full, degree, |k, l| {
            let m = b.block_of(k as u64).unwrap();
            let (lo, hi) = b.block_range(m);
            if l == 1 { g.eval(hi as f64) / ((hi - lo + 1) as f64).sqrt() } else { 0.0 }
        })
        .unwrap();
        let hull = solid_hull_norm(&dense, &g, &b).unwrap();
        let core = solid_core_norm(&dense, &g, &b).unwrap();
        assert!((hull - 1.0).abs() < 1e-12);
        assert!(core > 40.0);
        assert!(core >= hull);
        let gap = gap_series(&b.cuts, &b.cuts.iter().map(|n| g.eval(*n as f64)).collect::<Vec<_>>(), 2.0).unwrap();
        assert!(solid_core_norm(&gap, &g, &b).unwrap() <= 1.0 / std::f64::consts::SQRT_2 + 1e-12);
    }

    #[test]
    fn json_and_csv_shapes() {
        let rep = GrowthReport::from_points(Criterion::Vp, "pow:1", f64::INFINITY, Some(1), vec![(1.0, 1.0, 0.5), (2.0, 2.0, 0.25)]);
        let v = rep.to_json();
        assert_eq!(v["criterion"], "vp");
        assert_eq!(v["p"], "inf");
        assert_eq!(v["grid"][1][1], 0.25);
        assert_eq!(v["verdict"], "BOUNDED");
        assert_eq!(rep.csv_rows().lines().count(), 2);
        assert!(rep.csv_rows().starts_with("vp,\"pow:1\",inf,1,1,0.5,0.5,BOUNDED"));
    }
}
