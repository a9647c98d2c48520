//! Test functions and grids named on the command line.
//!
//! Expansions:
//!
//! - `const:C` the constant `C`
//! - `harmonic:K` one harmonic of degree `K` (zonal when `N >= 3`)
//! - `poisson:RHO` the Poisson kernel at the pole evaluated at radius `RHO`,
//!   truncated where the tail drops below `1e-12`
//! - `gap:pow2[:J]` `Σ_{j<=J} 2^j cos(2^j θ)`, `J = 10` by default (`N = 1`)
//! - `gapw:J:W` `Σ_{j<=J} W(2^j) cos(2^j θ)` (`N = 1`)
//! - `file:PATH` the coefficient CSV format of the library
//!
//! Grids: `pow2:I` (`2^0..2^I` for degrees, `1 - 2^{-j}` for `j = 1..I` for
//! radii) or an explicit comma list.

use std::path::Path;

use cesaro_growth::expansions::{gap_series, HarmonicExpansion, Mode};
use cesaro_growth::kernels::{poisson_truncation, POISSON_TAIL_TOL};
use cesaro_growth::weights::Weight;

use crate::CliError;

pub const DEFAULT_GAP_LEVELS: u32 = 10;

/// Full expansions exist for `N <= 2`; higher dimensions use zonal ones.
pub fn default_mode(dim: u32) -> Mode {
    if dim <= 2 {
        Mode::Full
    } else {
        Mode::Zonal
    }
}

fn bad(spec: &str, reason: &str) -> CliError {
    CliError::Config(format!("expansion `{spec}`: {reason}"))
}

/// Degrees and amplitudes of a gap spec, if `spec` is one.
pub fn gap_terms(spec: &str) -> Result<Option<(Vec<u64>, Vec<f64>)>, CliError> {
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    let levels = |s: &str| -> Result<u32, CliError> {
        let j: u32 = s.parse().map_err(|_| bad(spec, "gap level must be an integer"))?;
        if j > 62 {
            return Err(bad(spec, "gap level must be <= 62"));
        }
        Ok(j)
    };
    let (j, amp) = match parts.as_slice() {
        ["gap", "pow2"] => (DEFAULT_GAP_LEVELS, Weight::power(1.0)),
        ["gap", "pow2", j] => (levels(j)?, Weight::power(1.0)),
        ["gapw", j, w] => (levels(j)?, Weight::parse(w)?),
        [h, ..] if *h == "gap" || *h == "gapw" => return Err(bad(spec, "expected gap:pow2[:J] or gapw:J:W")),
        _ => return Ok(None),
    };
    let degrees: Vec<u64> = (0..=j).map(|i| 1u64 << i).collect();
    let amps = degrees.iter().map(|&n| amp.eval(n as f64)).collect();
    Ok(Some((degrees, amps)))
}

pub fn parse_expansion(spec: &str, dim: u32) -> Result<HarmonicExpansion, CliError> {
    if let Some((degrees, amps)) = gap_terms(spec)? {
        if dim != 1 {
            return Err(bad(spec, "gap series are defined for N = 1"));
        }
        return Ok(gap_series(&degrees, &amps, 2.0)?);
    }
    let (head, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad(spec, "expected KIND:ARG"))?;
    let mode = default_mode(dim);
    match head {
        "const" => {
            let c: f64 = rest.parse().map_err(|_| bad(spec, "constant must be a number"))?;
            Ok(HarmonicExpansion::constant(dim, mode, c)?)
        }
        "harmonic" => {
            let k: usize = rest.parse().map_err(|_| bad(spec, "degree must be an integer"))?;
            let mut u = HarmonicExpansion::zeros(dim, mode, k)?;
            u.set(k, 1, 1.0)?;
            Ok(u)
        }
        "poisson" => {
            let rho: f64 = rest.parse().map_err(|_| bad(spec, "radius must be a number"))?;
            if !(rho > 0.0 && rho < 1.0) {
                return Err(bad(spec, "radius must lie in (0, 1)"));
            }
            let k = poisson_truncation(dim, rho, POISSON_TAIL_TOL);
            Ok(HarmonicExpansion::zonal(dim, (0..=k).map(|j| rho.powi(j as i32)).collect())?)
        }
        "file" => {
            let u = HarmonicExpansion::read_csv(Path::new(rest))?;
            if u.dim != dim {
                return Err(bad(spec, &format!("file holds N = {}, run has N = {dim}", u.dim)));
            }
            Ok(u)
        }
        _ => Err(bad(spec, "unknown kind")),
    }
}

fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("{what} `{spec}`: bad entry `{s}`")))
        })
        .collect()
}

fn pow2_levels(spec: &str, what: &str) -> Result<Option<u32>, CliError> {
    match spec.strip_prefix("pow2:") {
        None => Ok(None),
        Some(s) => {
            let i: u32 = s
                .parse()
                .map_err(|_| CliError::Config(format!("{what} `{spec}`: expected pow2:I")))?;
            if i > 40 {
                return Err(CliError::Config(format!("{what} `{spec}`: I must be <= 40")));
            }
            Ok(Some(i))
        }
    }
}

pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let grid = match pow2_levels(spec, "n-grid")? {
        Some(i) => (0..=i).map(|k| 1usize << k).collect(),
        None => parse_list(spec, "n-grid")?,
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] == 0 {
        return Err(CliError::Config(format!("n-grid `{spec}` must be positive and increasing")));
    }
    Ok(grid)
}

pub fn parse_r_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let grid: Vec<f64> = match pow2_levels(spec, "r-grid")? {
        Some(j) => (1..=j).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect(),
        None => parse_list(spec, "r-grid")?,
    };
    if grid.is_empty() || grid.iter().any(|r| !(*r >= 0.0 && *r < 1.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("r-grid `{spec}` must be increasing in [0, 1)")));
    }
    Ok(grid)
}
