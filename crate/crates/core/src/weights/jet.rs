//! Truncated Taylor series ("jets") for exact derivatives of composed weights.

/// Coefficients `c_k` of `f(x + h) = Σ c_k h^k`, truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(c: f64, order: usize) -> Jet {
        let mut v = vec![0.0; order + 1];
        v[0] = c;
        Jet(v)
    }

    pub fn variable(x: f64, order: usize) -> Jet {
        let mut j = Jet::constant(x, order);
        if order >= 1 {
            j.0[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// The `m`-th derivative `c_m · m!`.
    pub fn derivative(&self, m: usize) -> f64 {
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        self.0.get(m).copied().unwrap_or(0.0) * fact
    }

    pub fn add_constant(mut self, c: f64) -> Jet {
        self.0[0] += c;
        self
    }

    pub fn scale(mut self, c: f64) -> Jet {
        for v in &mut self.0 {
            *v *= c;
        }
        self
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.0.len().min(other.0.len());
        Jet((0..n)
            .map(|k| (0..=k).map(|j| self.0[j] * other.0[k - j]).sum())
            .collect())
    }

    pub fn div(&self, other: &Jet) -> Jet {
        let n = self.0.len().min(other.0.len());
        let b0 = other.0[0];
        let mut c = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| other.0[j] * c[k - j]).sum();
            c[k] = (self.0[k] - s) / b0;
        }
        Jet(c)
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.order()).div(self)
    }

    /// Requires a positive constant term.
    pub fn ln(&self) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut c = vec![0.0; n];
        c[0] = a[0].ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * c[j] * a[k - j]).sum();
            c[k] = (a[k] - s / k as f64) / a[0];
        }
        Jet(c)
    }

    pub fn exp(&self) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut c = vec![0.0; n];
        c[0] = a[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * c[k - j]).sum();
            c[k] = s / k as f64;
        }
        Jet(c)
    }

    /// `self^alpha` for a positive constant term.
    pub fn powf(&self, alpha: f64) -> Jet {
        let mut out = self.ln().scale(alpha).exp();
        // keep the value exact where powf is
        out.0[0] = self.0[0].powf(alpha);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_jet_matches_closed_form() {
        let x = 3.0;
        let j = Jet::variable(x, 4).powf(2.5);
        let expected = [
            x.powf(2.5),
            2.5 * x.powf(1.5),
            2.5 * 1.5 * x.powf(0.5),
            2.5 * 1.5 * 0.5 * x.powf(-0.5),
            2.5 * 1.5 * 0.5 * -0.5 * x.powf(-1.5),
        ];
        for (m, e) in expected.iter().enumerate() {
            assert!((j.derivative(m) - e).abs() < 1e-12 * e.abs().max(1.0), "m={m}");
        }
    }

    #[test]
    fn log_and_quotient_jets() {
        let x = 2.0;
        let v = Jet::variable(x, 3);
        // (1 + ln x)' = 1/x, '' = -1/x^2, ''' = 2/x^3
        let l = v.ln().add_constant(1.0);
        assert!((l.derivative(1) - 0.5).abs() < 1e-15);
        assert!((l.derivative(2) + 0.25).abs() < 1e-15);
        assert!((l.derivative(3) - 0.25).abs() < 1e-15);
        // x / x = 1
        let q = v.div(&v);
        assert!((q.value() - 1.0).abs() < 1e-15);
        assert!(q.0[1..].iter().all(|c| c.abs() < 1e-15));
        let e = v.ln().exp();
        assert!((e.value() - x).abs() < 1e-15 && (e.0[1] - 1.0).abs() < 1e-15);
    }
}
