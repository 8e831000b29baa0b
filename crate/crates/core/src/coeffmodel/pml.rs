use crate::{Error, Result, C64};

/// Complex coordinate stretching in the radial direction, active for
/// `r > start`. The absorption profile is
/// `sigma(s) = sigma0 * ((s - start) / width)^exponent`, saturating at
/// `sigma0` beyond `start + width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    pub start: f64,
    pub width: f64,
    pub sigma0: f64,
    pub exponent: u32,
    /// Frequency shift, `omega -> omega + i*gamma`.
    pub gamma: f64,
}

impl PmlSpec {
    pub fn new(start: f64, width: f64, sigma0: f64) -> Self {
        Self {
            start,
            width,
            sigma0,
            exponent: 2,
            gamma: 0.0,
        }
    }

    pub fn with_exponent(mut self, exponent: u32) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn validate(&self, r_lo: f64, r_hi: f64) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::validation("PML width must be positive"));
        }
        if !(self.sigma0 >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::validation("PML sigma0 and gamma must be nonnegative"));
        }
        let tol = 1e-12 * (r_hi - r_lo).abs().max(1.0);
        if self.start < r_lo - tol || self.end() > r_hi + tol {
            return Err(Error::validation(format!(
                "PML region [{}, {}] outside computational interval [{r_lo}, {r_hi}]",
                self.start,
                self.end()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.start
    }

    pub fn sigma(&self, r: f64) -> f64 {
        let s = r - self.start;
        if s <= 0.0 {
            0.0
        } else if s >= self.width {
            self.sigma0
        } else {
            self.sigma0 * (s / self.width).powi(self.exponent as i32)
        }
    }

    /// `∫_start^r sigma(s) ds`.
    pub fn sigma_integral(&self, r: f64) -> f64 {
        let s = r - self.start;
        if s <= 0.0 {
            return 0.0;
        }
        let n1 = (self.exponent + 1) as f64;
        let inside = s.min(self.width);
        self.sigma0 * self.width / n1 * (inside / self.width).powi(self.exponent as i32 + 1)
            + self.sigma0 * (s - inside)
    }

    /// Stretched coordinate and its derivative `d = d r~ / d r` at `r` for
    /// the (possibly complex) frequency `omega`.
    pub fn stretch(&self, r: f64, omega: C64) -> (C64, C64) {
        if r <= self.start {
            return (C64::new(r, 0.0), C64::new(1.0, 0.0));
        }
        let i_over_omega = C64::i() / omega;
        (
            r + i_over_omega * self.sigma_integral(r),
            1.0 + i_over_omega * self.sigma(r),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretch_is_identity_outside() {
        let p = PmlSpec::new(0.5, 0.2, 10.0);
        let (rt, d) = p.stretch(0.3, C64::new(4.0, 0.0));
        assert_eq!(rt, C64::new(0.3, 0.0));
        assert_eq!(d, C64::new(1.0, 0.0));
    }

    #[test]
    fn derivative_continuous_at_start() {
        for n in 1..4 {
            let p = PmlSpec::new(0.5, 0.2, 10.0).with_exponent(n);
            let (_, d) = p.stretch(0.5 + 1e-12, C64::new(4.0, 0.0));
            assert!((d - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn integral_matches_quadrature() {
        let p = PmlSpec::new(0.2, 0.3, 7.0).with_exponent(3);
        let r = 0.6;
        let n = 20000;
        let h = (r - 0.2) / n as f64;
        let trap: f64 = (0..n)
            .map(|k| 0.5 * h * (p.sigma(0.2 + k as f64 * h) + p.sigma(0.2 + (k + 1) as f64 * h)))
            .sum();
        assert!((trap - p.sigma_integral(r)).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        assert!(PmlSpec::new(0.8, 0.2, 1.0).validate(0.0, 1.0).is_ok());
        assert!(PmlSpec::new(0.9, 0.2, 1.0).validate(0.0, 1.0).is_err());
        assert!(PmlSpec::new(0.9, 0.0, 1.0).validate(0.0, 1.0).is_err());
    }
}
