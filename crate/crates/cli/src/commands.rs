//! Subcommands. Each one reads its options from a [`RunConfig`], calls the
//! library once per grid point and returns the result in both output formats.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use cesaro_growth::diagnostics::{
    equivalence_report, estimate_with_a_check, gap_membership, growth_ratio_cesaro, regular_growth_ratio, GrowthReport,
    Grids, Verdict, DEFAULT_EQUIVALENCE_FACTOR,
};
use cesaro_growth::kernels::{
    band_weight_kernel, cesaro_kernel, default_d, poisson_series, poisson_truncation, vp_kernel, CutoffProfile,
    ZonalPoly, POISSON_TAIL_TOL,
};
use cesaro_growth::multipliers::{
    fn_bound_check, multiplier_criterion, regular_growth_mapping_check, theorem_mult_check_against, MultCase,
    MultiplierSeq,
};
use cesaro_growth::weights::{blocks, regularize, Weight};

use crate::config::RunConfig;
use crate::inputs::{gap_terms, parse_expansion, parse_n_grid, parse_r_grid};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Config(format!("--format `{s}`: expected json or csv"))),
        }
    }
}

/// A result in both formats; the CSV text includes its header line.
pub struct Output {
    pub json: Value,
    pub csv: String,
}

impl Output {
    fn report(r: &GrowthReport) -> Output {
        Output {
            json: r.to_json(),
            csv: format!("{}\n{}", GrowthReport::CSV_HEADER, r.csv_rows()),
        }
    }

    /// JSON gains a `config` object holding every option except the output
    /// destination, so identical runs give identical bytes.
    pub fn render(self, format: Format, cfg: &RunConfig) -> String {
        match format {
            Format::Csv => self.csv,
            Format::Json => {
                let mut v = self.json;
                if let Value::Object(obj) = &mut v {
                    let c: Map<String, Value> = cfg
                        .keys()
                        .filter(|k| *k != "output" && *k != "format")
                        .map(|k| (k.to_string(), json!(cfg.get(k).unwrap())))
                        .collect();
                    obj.insert("config".into(), Value::Object(c));
                }
                let mut s = serde_json::to_string_pretty(&v).expect("finite JSON");
                s.push('\n');
                s
            }
        }
    }
}

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [(&'static str, &'static str)],
    pub default_format: Format,
    pub run: fn(&RunConfig) -> Result<Output, CliError>,
}

pub const COMMON_KEYS: &[(&str, &str)] = &[
    ("N", "sphere dimension N, the ball lives in R^(N+1) [1]"),
    ("format", "json or csv"),
    ("output", "write the result to this file instead of stdout"),
];

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "kernel-l1",
        about: "L1 norms of zonal kernels on the sphere",
        keys: &[
            ("family", "cesaro, vp, band-weight or poisson [cesaro]"),
            ("m", "Cesaro order (cesaro) or cutoff order (vp) [2 / 0]"),
            ("kmax", "largest degree or n [64]"),
            ("k-grid", "explicit degrees or n values instead of 0..kmax"),
            ("d", "cutoff smoothness [(N-1)/2 + 1]"),
            ("f", "weight of band-weight kernels [pow:1]"),
            ("r-grid", "radii of poisson kernels [pow2:6]"),
        ],
        default_format: Format::Csv,
        run: kernel_l1,
    },
    CommandSpec {
        name: "cutoff-check",
        about: "Values, derivatives and join continuity of a cutoff profile",
        keys: &[
            ("m", "cutoff order, 0 or >= 2 [0]"),
            ("d", "smoothness [(N-1)/2 + 1]"),
            ("steps", "table points per unit of t [16]"),
        ],
        default_format: Format::Csv,
        run: cutoff_check,
    },
    CommandSpec {
        name: "cesaro-check",
        about: "Weighted Cesaro-number series against g(1/(1-r)) (1-r)^(-m-1)",
        keys: &[
            ("g", "weight"),
            ("m", "Cesaro order [1]"),
            ("r-grid", "radii [pow2:14]"),
        ],
        default_format: Format::Json,
        run: cesaro_check,
    },
    CommandSpec {
        name: "membership",
        about: "Cesaro-mean membership test of u in h^p_g",
        keys: &[
            ("u", "expansion"),
            ("g", "weight"),
            ("p", "norm exponent or inf [inf]"),
            ("d", "Cesaro order [(N-1)/2 + 1]"),
            ("n-grid", "degrees [pow2:10]"),
        ],
        default_format: Format::Json,
        run: membership,
    },
    CommandSpec {
        name: "equivalence",
        about: "Radial, Cesaro and de la Vallee-Poussin criteria side by side",
        keys: &[
            ("u", "expansion"),
            ("g", "weight"),
            ("p", "norm exponent or inf [inf]"),
            ("d", "Cesaro order and cutoff smoothness [(N-1)/2 + 1]"),
            ("r-grid", "radii [pow2:10]"),
            ("n-grid", "degrees [pow2:10]"),
            ("factor", "largest accepted ratio between suprema [100]"),
        ],
        default_format: Format::Json,
        run: equivalence,
    },
    CommandSpec {
        name: "gap",
        about: "Partial amplitude sums of a lacunary series against g",
        keys: &[("u", "gap:pow2[:J] or gapw:J:W"), ("g", "weight")],
        default_format: Format::Json,
        run: gap,
    },
    CommandSpec {
        name: "regular-growth",
        about: "Block oscillations of u over the blocks of f",
        keys: &[
            ("u", "expansion"),
            ("f", "weight defining the blocks [pow:1]"),
            ("A", "block ratio [2]"),
            ("k-max", "number of blocks [12]"),
            ("n0", "first cut [1]"),
            ("p", "norm exponent or inf [inf]"),
            ("probes", "probe points per block [5]"),
            ("mapping", "also check H_f in both directions (true/false) [false]"),
        ],
        default_format: Format::Json,
        run: regular_growth,
    },
    CommandSpec {
        name: "multiplier-criterion",
        about: "Kernel criterion for a degree-only multiplier between growth spaces",
        keys: &[
            ("lambda", "multiplier [one]"),
            ("g", "source weight"),
            ("g-tilde", "target weight [g]"),
            ("d", "Cesaro order [(N-1)/2 + 1]"),
            ("n-grid", "degrees [pow2:8]"),
        ],
        default_format: Format::Json,
        run: multiplier_criterion_cmd,
    },
    CommandSpec {
        name: "theorem-mult",
        about: "Growth of H_f u or H_f^-1 u against the weight of case a, b or c",
        keys: &[
            ("u", "expansion"),
            ("f", "multiplier weight"),
            ("g", "weight of u"),
            ("case", "a, b or c"),
            ("eps", "exponent margin of case b [0.5]"),
            ("target", "compare against this weight instead of the case's"),
            ("p", "norm exponent or inf [inf]"),
            ("d", "Cesaro order [(N-1)/2 + 1]"),
            ("n-grid", "degrees [pow2:10]"),
        ],
        default_format: Format::Json,
        run: theorem_mult,
    },
    CommandSpec {
        name: "regularize",
        about: "Integral regularization of a weight at alpha",
        keys: &[("q", "weight"), ("alpha", "point >= 0 [1]")],
        default_format: Format::Json,
        run: regularize_cmd,
    },
    CommandSpec {
        name: "fn-bound",
        about: "Weighted difference sums against f(n)",
        keys: &[
            ("f", "weight"),
            ("d", "Cesaro order [1]"),
            ("n-grid", "degrees [pow2:8]"),
        ],
        default_format: Format::Json,
        run: fn_bound,
    },
];

fn dim(cfg: &RunConfig) -> Result<u32, CliError> {
    let n: u32 = cfg.parsed_or("N", 1)?;
    if n == 0 {
        return Err(CliError::Config("--N must be >= 1".into()));
    }
    Ok(n)
}

fn weight(cfg: &RunConfig, key: &str) -> Result<Weight, CliError> {
    Ok(Weight::parse(cfg.require(key)?)?)
}

fn weight_or(cfg: &RunConfig, key: &str, default: &str) -> Result<Weight, CliError> {
    Ok(Weight::parse(cfg.get(key).unwrap_or(default))?)
}

fn n_grid(cfg: &RunConfig, default: &str) -> Result<Vec<usize>, CliError> {
    parse_n_grid(cfg.get("n-grid").unwrap_or(default))
}

fn r_grid(cfg: &RunConfig, default: &str) -> Result<Vec<f64>, CliError> {
    parse_r_grid(cfg.get("r-grid").unwrap_or(default))
}

fn cesaro_d(cfg: &RunConfig, n: u32) -> Result<u32, CliError> {
    cfg.parsed_or("d", default_d(n))
}

fn table(header: &str, rows: &[(f64, f64)], key: &str, extra: Value) -> Output {
    let mut csv = format!("{header}\n");
    for (a, b) in rows {
        let _ = writeln!(csv, "{a},{b}");
    }
    let mut json = extra;
    json["rows"] = rows
        .iter()
        .map(|(a, b)| {
            let mut row = Map::new();
            row.insert(key.to_string(), json!(a));
            row.insert("l1_norm".to_string(), json!(b));
            Value::Object(row)
        })
        .collect();
    Output { json, csv }
}

fn kernel_l1(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let family = cfg.get("family").unwrap_or("cesaro");
    let d = cesaro_d(cfg, n)?;
    let kmax: usize = cfg.parsed_or("kmax", 64)?;
    let ks: Vec<usize> = match cfg.get("k-grid") {
        Some(s) => parse_n_grid(s).or_else(|_| {
            s.split(',')
                .map(|x| x.trim().parse().map_err(|_| CliError::Config(format!("--k-grid `{s}`"))))
                .collect()
        })?,
        None => (0..=kmax).collect(),
    };
    let mut rows = Vec::new();
    let header;
    let key;
    match family {
        "cesaro" => {
            let m: f64 = cfg.parsed_or("m", 2.0)?;
            for k in ks {
                rows.push((k as f64, cesaro_kernel(n, k, m).l1_norm()?));
            }
            (header, key) = ("k,l1_norm", "k");
        }
        "vp" | "band-weight" => {
            let f = weight_or(cfg, "f", "pow:1")?;
            let m: u32 = cfg.parsed_or("m", 0)?;
            for k in ks.into_iter().filter(|&k| k > 0) {
                let ker: ZonalPoly = if family == "vp" {
                    vp_kernel(n, m, k, d)?
                } else {
                    band_weight_kernel(n, k, &f, d)?
                };
                rows.push((k as f64, ker.l1_norm()?));
            }
            (header, key) = ("n,l1_norm", "n");
        }
        "poisson" => {
            for r in r_grid(cfg, "pow2:6")? {
                if r == 0.0 {
                    rows.push((r, 1.0));
                    continue;
                }
                let k = poisson_truncation(n, r, POISSON_TAIL_TOL);
                rows.push((r, poisson_series(n, r, k)?.l1_norm()?));
            }
            (header, key) = ("r,l1_norm", "r");
        }
        _ => {
            return Err(CliError::Config(format!(
                "--family `{family}`: expected cesaro, vp, band-weight or poisson"
            )))
        }
    }
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(table(header, &rows, key, json!({ "family": family, "N": n, "max_l1_norm": max })))
}

fn cutoff_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let m: u32 = cfg.parsed_or("m", 0)?;
    let d = cesaro_d(cfg, n)?;
    let steps: usize = cfg.parsed_or("steps", 16)?;
    if steps == 0 {
        return Err(CliError::Config("--steps must be >= 1".into()));
    }
    let q = CutoffProfile::new(m, d)?;
    let orders = 0..=d + 1;
    // one-sided limits from the right at t = 1 and from the left at t = 2
    let h = 1e-9;
    let mut join_jump: f64 = 0.0;
    for j in orders.clone() {
        let scale = q.derivative_bound().max(1.0);
        join_jump = join_jump.max((q.derivative(1.0 + h, j) - q.derivative(1.0, j)).abs() / scale);
        join_jump = join_jump.max(q.derivative(2.0 - h, j).abs() / scale);
    }
    let mut csv = String::from("t");
    for j in orders.clone() {
        let _ = write!(csv, ",q{j}");
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for i in 0..=(5 * steps / 2) {
        let t = i as f64 / steps as f64;
        let vals: Vec<f64> = orders.clone().map(|j| q.derivative(t, j)).collect();
        let _ = writeln!(
            csv,
            "{t},{}",
            vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        rows.push(json!({ "t": t, "derivatives": vals }));
    }
    let json = json!({
        "m": m,
        "d": d,
        "a": q.a,
        "derivative_bound": q.derivative_bound(),
        "join_jump": join_jump,
        "rows": rows,
    });
    Ok(Output { json, csv })
}

fn cesaro_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = weight(cfg, "g")?;
    let m: u32 = cfg.parsed_or("m", 1)?;
    Ok(Output::report(&estimate_with_a_check(&g, m, &r_grid(cfg, "pow2:14")?)?))
}

fn membership(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let u = parse_expansion(cfg.require("u")?, n)?;
    let g = weight(cfg, "g")?;
    let p = cfg.exponent("p", f64::INFINITY)?;
    let d = cesaro_d(cfg, n)?;
    let r = growth_ratio_cesaro(&u, &g, p, d, &n_grid(cfg, "pow2:10")?)?;
    let mut out = Output::report(&r);
    out.json["membership"] = json!(if r.verdict == Verdict::Bounded { "PASS" } else { "FAIL" });
    Ok(out)
}

fn equivalence(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let u = parse_expansion(cfg.require("u")?, n)?;
    let g = weight(cfg, "g")?;
    let p = cfg.exponent("p", f64::INFINITY)?;
    let d = cesaro_d(cfg, n)?;
    let grids = Grids {
        r_grid: r_grid(cfg, "pow2:10")?,
        n_grid: n_grid(cfg, "pow2:10")?,
    };
    let factor = cfg.parsed_or("factor", DEFAULT_EQUIVALENCE_FACTOR)?;
    let rep = equivalence_report(&u, &g, p, d, &grids, factor)?;
    let mut csv = format!("{}\n", GrowthReport::CSV_HEADER);
    for r in rep.reports.values() {
        csv.push_str(&r.csv_rows());
    }
    Ok(Output { json: rep.to_json(), csv })
}

fn gap(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.require("u")?;
    let (degrees, amps) =
        gap_terms(spec)?.ok_or_else(|| CliError::Config(format!("--u `{spec}` is not a gap series")))?;
    let g = weight(cfg, "g")?;
    Ok(Output::report(&gap_membership(&degrees, &amps, &g)?))
}

fn regular_growth(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let u = parse_expansion(cfg.require("u")?, n)?;
    let f = weight_or(cfg, "f", "pow:1")?;
    let a: f64 = cfg.parsed_or("A", 2.0)?;
    let k_max: usize = cfg.parsed_or("k-max", 12)?;
    let n0: u64 = cfg.parsed_or("n0", 1)?;
    let p = cfg.exponent("p", f64::INFINITY)?;
    let probes: usize = cfg.parsed_or("probes", 5)?;
    let b = blocks(&f, a, k_max, n0)?;
    if cfg.parsed_or("mapping", false)? {
        let m = regular_growth_mapping_check(&u, &f, &b, p, probes)?;
        let csv = format!(
            "{}\n{}{}",
            GrowthReport::CSV_HEADER,
            m.forward.csv_rows(),
            m.inverse.csv_rows()
        );
        return Ok(Output {
            json: json!({ "forward": m.forward.to_json(), "inverse": m.inverse.to_json() }),
            csv,
        });
    }
    Ok(Output::report(&regular_growth_ratio(&u, &b, p, probes)?))
}

fn multiplier_criterion_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let lambda = MultiplierSeq::parse(cfg.get("lambda").unwrap_or("one"))?;
    let g = weight(cfg, "g")?;
    let g_tilde = match cfg.get("g-tilde") {
        Some(s) => Weight::parse(s)?,
        None => g.clone(),
    };
    let d = cesaro_d(cfg, n)?;
    Ok(Output::report(&multiplier_criterion(
        n,
        &lambda,
        &g,
        &g_tilde,
        d,
        &n_grid(cfg, "pow2:8")?,
    )?))
}

fn theorem_mult(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let u = parse_expansion(cfg.require("u")?, n)?;
    let f = weight(cfg, "f")?;
    let g = weight(cfg, "g")?;
    let mut case = MultCase::parse(cfg.require("case")?)?;
    if let MultCase::B { eps } = &mut case {
        *eps = cfg.parsed_or("eps", *eps)?;
    }
    let target = match cfg.get("target") {
        Some(s) => Weight::parse(s)?,
        None => case.target(&f, &g),
    };
    let p = cfg.exponent("p", f64::INFINITY)?;
    let d = cesaro_d(cfg, n)?;
    Ok(Output::report(&theorem_mult_check_against(
        &u,
        &f,
        &g,
        case,
        &target,
        p,
        d,
        &n_grid(cfg, "pow2:10")?,
    )?))
}

fn regularize_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let q = weight(cfg, "q")?;
    let alpha: f64 = cfg.parsed_or("alpha", 1.0)?;
    let value = regularize(&q, alpha)?;
    Ok(Output {
        json: json!({ "q": q.to_string(), "alpha": alpha, "value": value }),
        csv: format!("q,alpha,value\n\"{q}\",{alpha},{value}\n"),
    })
}

fn fn_bound(cfg: &RunConfig) -> Result<Output, CliError> {
    let f = weight(cfg, "f")?;
    let d: u32 = cfg.parsed_or("d", 1)?;
    let grid: Vec<u64> = n_grid(cfg, "pow2:8")?.into_iter().map(|n| n as u64).collect();
    Ok(Output::report(&fn_bound_check(&f, d, &grid)?))
}
