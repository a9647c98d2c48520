//! Flat `key=value` run configurations.
//!
//! Keys are the long flag names without dashes. A config file supplies
//! defaults and command-line flags override it. The canonical text form has
//! one `key=value` per line, keys sorted bytewise, so
//! `RunConfig::parse(text).to_canonical()` is a fixed point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::CliError;

pub const SUBCOMMAND_KEY: &str = "subcommand";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> RunConfig {
        RunConfig::default()
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped and
    /// repeated keys are rejected.
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: key `{k}` repeated", i + 1)));
            }
        }
        Ok(RunConfig { values })
    }

    pub fn to_canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required option --{key}")))
    }

    /// Typed value, falling back to `default`.
    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(s) => parse_value(key, s),
        }
    }

    /// `p` accepts `inf` for the sup norm.
    pub fn exponent(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let p = match self.get(key) {
            None => default,
            Some("inf") | Some("infinity") => f64::INFINITY,
            Some(s) => parse_value(key, s)?,
        };
        if !(p >= 1.0) {
            return Err(CliError::Config(format!("--{key} must be >= 1 or inf")));
        }
        Ok(p)
    }
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| CliError::Config(format!("--{key} `{s}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_is_a_fixed_point() {
        let c = RunConfig::parse("# run\n g = pow:1\nN=2\n\np=inf\n").unwrap();
        let text = c.to_canonical();
        assert_eq!(text, "N=2\ng=pow:1\np=inf\n");
        assert_eq!(RunConfig::parse(&text).unwrap().to_canonical(), text);
    }

    #[test]
    fn rejects_repeats_and_garbage() {
        assert!(RunConfig::parse("a=1\na=2").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("=3").is_err());
    }

    #[test]
    fn exponent_accepts_inf() {
        let c = RunConfig::parse("p=inf\nq=0.5").unwrap();
        assert_eq!(c.exponent("p", 2.0).unwrap(), f64::INFINITY);
        assert!(c.exponent("q", 2.0).is_err());
        assert_eq!(c.exponent("r", 2.0).unwrap(), 2.0);
    }
}
