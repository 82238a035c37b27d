//! Problem parameters, admissibility checks, and derived exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

/// Tolerance on |q - 2n/(n-4)| below which q is treated as critical.
pub const CRITICAL_Q_TOL: f64 = 1e-12;

/// The parameter tuple (n, alpha, q, lambda) of the minimization problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Space dimension, at least 5.
    pub n: u32,
    /// Weight exponent, in (4-n, n).
    pub alpha: f64,
    /// Nonlinearity exponent, strictly above 2.
    pub q: f64,
    /// Coupling of the gradient term.
    pub lambda: f64,
}

/// Position of q relative to the two critical exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QRegime {
    /// q < 2n/(n-4)
    pub q_subcritical: bool,
    /// |q - 2n/(n-4)| <= tolerance
    pub q_critical: bool,
    /// q > 2n/(n-4); only the radial problem is meaningful there
    pub q_supercritical_full: bool,
    /// q < 2n/(n-2)
    pub q_below_first_order_critical: bool,
}

/// Exponents derived from (n, alpha, q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    /// beta = n - q(n-4+alpha)/2
    pub beta: f64,
    /// 2n/(n-2)
    pub two_star: f64,
    /// 2n/(n-4)
    pub two_double_star: f64,
    /// (4-n-alpha)/2, the power in u(x) = |x|^sigma w(-log|x|)
    pub sigma: f64,
}

impl ProblemParams {
    /// Validates and constructs; rejects with the violated constraint named.
    pub fn new(n: u32, alpha: f64, q: f64, lambda: f64) -> Result<Self> {
        let p = ProblemParams { n, alpha, q, lambda };
        p.validate()?;
        Ok(p)
    }

    /// Checks n >= 5, 4-n < alpha < n, q > 2 and that all fields are finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.q.is_finite() && self.lambda.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.n < 5 {
            return Err(Error::InvalidParams(format!(
                "n must be >= 5 (got {})",
                self.n
            )));
        }
        let lo = 4.0 - self.n as f64;
        let hi = self.n as f64;
        if !(self.alpha > lo && self.alpha < hi) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (4-n, n) = ({lo}, {hi}) (got {})",
                self.alpha
            )));
        }
        if !(self.q > 2.0) {
            return Err(Error::InvalidParams(format!(
                "q must exceed 2 (got {})",
                self.q
            )));
        }
        Ok(())
    }

    /// 2n/(n-2).
    pub fn two_star(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0)
    }

    /// 2n/(n-4).
    pub fn two_double_star(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 4.0)
    }

    /// Classifies q against the critical exponents.
    pub fn q_regime(&self) -> QRegime {
        let tds = self.two_double_star();
        let critical = (self.q - tds).abs() <= CRITICAL_Q_TOL;
        QRegime {
            q_subcritical: !critical && self.q < tds,
            q_critical: critical,
            q_supercritical_full: !critical && self.q > tds,
            q_below_first_order_critical: self.q < self.two_star(),
        }
    }

    /// Derived exponents, evaluated exactly in rational arithmetic.
    pub fn derived_exponents(&self) -> DerivedExponents {
        let a = exact::rat(self.alpha);
        let q = exact::rat(self.q);
        DerivedExponents {
            beta: exact::to_f64(&exact::beta_exponent(self.n, &a, &q)),
            two_star: self.two_star(),
            two_double_star: self.two_double_star(),
            sigma: exact::to_f64(&exact::sigma_exponent(self.n, &a)),
        }
    }

    /// Lower admissibility bound for lambda in the radial problem:
    /// -(n-alpha)^2/4.
    pub fn radial_lambda_floor(&self) -> f64 {
        let d = self.n as f64 - self.alpha;
        -d * d / 4.0
    }
}

/// Surface measure of the unit sphere in dimension n: 2 pi^{n/2} / Gamma(n/2).
pub fn omega_n(n: u32) -> f64 {
    use std::f64::consts::PI;
    if n % 2 == 0 {
        // Gamma(n/2) = (n/2 - 1)!
        let k = n / 2 - 1;
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        2.0 * PI.powi((n / 2) as i32) / fact
    } else {
        // Gamma(n/2) = (n-2)!! sqrt(pi) / 2^{(n-1)/2}
        let mut dfact = 1.0;
        let mut i = n as i64 - 2;
        while i > 1 {
            dfact *= i as f64;
            i -= 2;
        }
        2.0f64.powi(((n + 1) / 2) as i32) * PI.powi(((n - 1) / 2) as i32) / dfact
    }
}
