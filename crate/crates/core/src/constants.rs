//! Closed-form constants of the weighted problem, evaluated exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::params::{omega_n, ProblemParams};

/// All closed-form constants attached to a parameter point.
///
/// Everything except `omega_n` is computed in exact rational arithmetic
/// from the (dyadic-rational) inputs and rounded once on output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    /// Optimal constant of the weighted second-order Hardy-type inequality.
    pub delta_alpha: f64,
    /// (n-2)^2/4 + (alpha-2)^2/4.
    pub delta_tilde_alpha: f64,
    /// ((n-4+alpha)/2)^2, the first-order Hardy constant at weight alpha-2.
    pub h_tilde_alpha: f64,
    /// (n-alpha)^2/4; see `gamma_formula_valid`.
    pub gamma_alpha_formula: f64,
    /// The closed form for the embedding constant is guaranteed only for
    /// alpha >= 0; for alpha < 0 compare against the numeric mode scan.
    pub gamma_formula_valid: bool,
    /// Surface measure of the unit (n-1)-sphere.
    pub omega_n: f64,
    /// Coefficient of w'^2 in the reduced fourth-order quotient.
    pub a_lambda: f64,
    /// Coefficient of w^2 in the reduced fourth-order quotient.
    pub b_lambda: f64,
    /// Coefficient A_alpha in the shifted-extremal energy expansion.
    pub cap_a_alpha: f64,
    /// Coefficient B_alpha in the shifted-extremal energy expansion.
    pub cap_b_alpha: f64,
    /// lambda_alpha = -A_alpha/B_alpha, the coupling threshold below which
    /// the critical infimum drops strictly under the unweighted one.
    pub lambda_alpha: f64,
}

impl ClosedFormConstants {
    pub fn for_params(p: &ProblemParams) -> Result<Self> {
        p.validate()?;
        let a = exact::rat(p.alpha);
        let l = exact::rat(p.lambda);
        Ok(ClosedFormConstants {
            delta_alpha: exact::to_f64(&exact::delta_alpha(p.n, &a)),
            delta_tilde_alpha: exact::to_f64(&exact::delta_tilde_alpha(p.n, &a)),
            h_tilde_alpha: exact::to_f64(&exact::h_tilde_alpha(p.n, &a)),
            gamma_alpha_formula: exact::to_f64(&exact::gamma_alpha_formula(p.n, &a)),
            gamma_formula_valid: p.alpha >= 0.0,
            omega_n: omega_n(p.n),
            a_lambda: exact::to_f64(&exact::a_lambda(p.n, &a, &l)),
            b_lambda: exact::to_f64(&exact::b_lambda(p.n, &a, &l)),
            cap_a_alpha: exact::to_f64(&exact::cap_a_alpha(p.n, &a)),
            cap_b_alpha: exact::to_f64(&exact::cap_b_alpha(p.n, &a)),
            lambda_alpha: exact::to_f64(&exact::lambda_alpha(p.n, &a)),
        })
    }
}

/// Whether the explicit non-radial-instability inequality holds:
/// (n-1)^{-1} ((n-4+alpha)/2)^2 > 1/(q-2) - 1/(q+2).
///
/// Only meaningful for q <= 2n/(n-2); rejects otherwise.
pub fn felli_schneider_holds(p: &ProblemParams) -> Result<bool> {
    p.validate()?;
    if p.q > p.two_star() {
        return Err(Error::Precondition(format!(
            "the instability condition applies only for q <= 2n/(n-2) = {} (got q = {})",
            p.two_star(),
            p.q
        )));
    }
    Ok(exact::is_positive(&exact::felli_schneider_margin(
        p.n,
        &exact::rat(p.alpha),
        &exact::rat(p.q),
    )))
}

/// Exact margin (lhs - rhs) of the instability inequality, as f64.
pub fn felli_schneider_margin(p: &ProblemParams) -> f64 {
    exact::to_f64(&exact::felli_schneider_margin(
        p.n,
        &exact::rat(p.alpha),
        &exact::rat(p.q),
    ))
}
