//! Prefix mini-language for weights. Every constructor has a fixed arity, so
//! no brackets are needed; `(` `)` around any sub-weight are accepted.
//!
//! ```text
//! weight := pow:NUM | logpow:NUM | mul:weight,weight | div:weight,weight
//!         | log:weight | powof:NUM,weight | reg:weight | table:PATH
//!         | ( weight )
//! NUM    := float | float/float
//! ```
//!
//! `PATH` extends to the next `,` or `)`.

use std::path::Path;

use super::{Table, Weight};
use crate::{Error, Result};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::WeightSpec {
            spec: self.src.to_string(),
            reason: format!("{} (at byte {})", reason.into(), self.pos),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{token}`")))
        }
    }

    fn take_until_delim(&mut self) -> &'a str {
        let rest = self.rest();
        let end = rest.find([',', ')']).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn number(&mut self) -> Result<f64> {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_ascii_digit() || "+-.eE/".contains(c)))
            .unwrap_or(rest.len());
        let text = &rest[..end];
        let value = match text.split_once('/') {
            Some((a, b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()).map(|(a, b)| a / b),
            None => text.parse::<f64>().ok(),
        };
        match value {
            Some(v) if v.is_finite() => {
                self.pos += end;
                Ok(v)
            }
            _ => Err(self.err(format!("bad number `{text}`"))),
        }
    }

    fn weight(&mut self) -> Result<Weight> {
        if self.eat("(") {
            let w = self.weight()?;
            self.expect(")")?;
            return Ok(w);
        }
        if self.eat("pow:") {
            return Ok(Weight::power(self.number()?));
        }
        if self.eat("logpow:") {
            return Ok(Weight::log_power(self.number()?));
        }
        if self.eat("mul:") {
            let (a, b) = self.pair()?;
            return Ok(Weight::product(a, b));
        }
        if self.eat("div:") {
            let (a, b) = self.pair()?;
            return Ok(Weight::quotient(a, b));
        }
        if self.eat("log:") {
            return Ok(Weight::log_of(self.weight()?));
        }
        if self.eat("powof:") {
            let a = self.number()?;
            self.expect(",")?;
            return Ok(Weight::pow_of(a, self.weight()?));
        }
        if self.eat("reg:") {
            let q = self.weight()?;
            return Weight::regularized(q);
        }
        if self.eat("table:") {
            let path = self.take_until_delim();
            if path.is_empty() {
                return Err(self.err("empty table path"));
            }
            return Ok(Weight::tabulated(Table::from_csv(Path::new(path))?));
        }
        Err(self.err("unknown weight"))
    }

    fn pair(&mut self) -> Result<(Weight, Weight)> {
        let a = self.weight()?;
        self.expect(",")?;
        let b = self.weight()?;
        Ok((a, b))
    }
}

pub(super) fn parse(spec: &str) -> Result<Weight> {
    let trimmed = spec.trim();
    let mut c = Cursor { src: trimmed, pos: 0 };
    let w = c.weight()?;
    if c.pos != trimmed.len() {
        return Err(c.err("trailing input"));
    }
    Ok(w)
}
