//! Exact rational evaluation of the closed-form constants.
//!
//! Every f64 is an exact dyadic rational, so converting inputs with
//! [`rat`] and evaluating here incurs no rounding at all. The f64 front
//! ends in [`crate::constants`] round only once, on output.

use num::{BigInt, BigRational, Signed, Zero};

/// Exact conversion of a finite f64 into a rational.
pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value required")
}

pub fn rat_int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn half(x: BigRational) -> BigRational {
    x / rat_int(2)
}

fn sq(x: &BigRational) -> BigRational {
    x * x
}

/// ((n-2)/2)^2 - ((alpha-2)/2)^2, all squared: the second-order Hardy-type
/// constant of the weighted problem.
pub fn delta_alpha(n: u32, alpha: &BigRational) -> BigRational {
    let p = half(rat_int(n as i64 - 2));
    let q = half(alpha - rat_int(2));
    sq(&(sq(&p) - sq(&q)))
}

/// ((n-2)/2)^2 + ((alpha-2)/2)^2.
pub fn delta_tilde_alpha(n: u32, alpha: &BigRational) -> BigRational {
    let p = half(rat_int(n as i64 - 2));
    let q = half(alpha - rat_int(2));
    sq(&p) + sq(&q)
}

/// ((n-4+alpha)/2)^2: first-order Hardy constant at weight alpha-2.
pub fn h_tilde_alpha(n: u32, alpha: &BigRational) -> BigRational {
    sq(&half(alpha + rat_int(n as i64 - 4)))
}

/// (n-alpha)^2/4: closed-form embedding constant (valid for alpha >= 0).
pub fn gamma_alpha_formula(n: u32, alpha: &BigRational) -> BigRational {
    sq(&half(rat_int(n as i64) - alpha))
}

/// a_lambda = (n-2)^2/4 + (alpha-2)^2/4 + lambda/2.
pub fn a_lambda(n: u32, alpha: &BigRational, lambda: &BigRational) -> BigRational {
    delta_tilde_alpha(n, alpha) + half(lambda.clone())
}

/// b_lambda = ((n-alpha)^2/4 + lambda) * ((n-4+alpha)/2)^2.
pub fn b_lambda(n: u32, alpha: &BigRational, lambda: &BigRational) -> BigRational {
    (gamma_alpha_formula(n, alpha) + lambda) * h_tilde_alpha(n, alpha)
}

/// A_alpha = (alpha^2/4 - alpha)(alpha^2/4 - alpha - (n-2)^2 (n-4) / (2(n-3))).
pub fn cap_a_alpha(n: u32, alpha: &BigRational) -> BigRational {
    let n = n as i64;
    let t = sq(alpha) / rat_int(4) - alpha;
    let c = rat_int((n - 2) * (n - 2) * (n - 4)) / rat_int(2 * (n - 3));
    &t * (&t - c)
}

/// B_alpha = ((n-4+alpha)/2)^2 + (n-4)^2 / (4(n-3)).
pub fn cap_b_alpha(n: u32, alpha: &BigRational) -> BigRational {
    let m = n as i64;
    h_tilde_alpha(n, alpha) + rat_int((m - 4) * (m - 4)) / rat_int(4 * (m - 3))
}

/// lambda_alpha = -A_alpha / B_alpha.
pub fn lambda_alpha(n: u32, alpha: &BigRational) -> BigRational {
    -cap_a_alpha(n, alpha) / cap_b_alpha(n, alpha)
}

/// beta = n - q(n-4+alpha)/2.
pub fn beta_exponent(n: u32, alpha: &BigRational, q: &BigRational) -> BigRational {
    rat_int(n as i64) - half(q * (alpha + rat_int(n as i64 - 4)))
}

/// sigma = (4-n-alpha)/2: the power in u(x) = |x|^sigma w(-log|x|).
pub fn sigma_exponent(n: u32, alpha: &BigRational) -> BigRational {
    half(rat_int(4 - n as i64) - alpha)
}

/// Eigenvalue of the sphere Laplacian on mode l: l(l+n-2).
pub fn mode_eigenvalue(n: u32, l: u32) -> BigRational {
    rat_int(l as i64 * (l as i64 + n as i64 - 2))
}

/// c_l = -(n-4+alpha)(n-alpha)/4 - l(l+n-2): zeroth-order coefficient of
/// the mode-l reduced operator.
pub fn mode_c(n: u32, alpha: &BigRational, l: u32) -> BigRational {
    let prod = (alpha + rat_int(n as i64 - 4)) * (rat_int(n as i64) - alpha);
    -prod / rat_int(4) - mode_eigenvalue(n, l)
}

/// Left side minus right side of the non-radial-instability inequality
/// (n-1)^{-1} ((n-4+alpha)/2)^2 > 1/(q-2) - 1/(q+2); positive means it holds.
pub fn felli_schneider_margin(n: u32, alpha: &BigRational, q: &BigRational) -> BigRational {
    let lhs = h_tilde_alpha(n, alpha) / rat_int(n as i64 - 1);
    let rhs = (q - rat_int(2)).recip() - (q + rat_int(2)).recip();
    lhs - rhs
}

pub fn to_f64(x: &BigRational) -> f64 {
    // Ratio::to_f64 via num traits.
    num::ToPrimitive::to_f64(x).expect("rational out of f64 range")
}

pub fn is_zero(x: &BigRational) -> bool {
    x.is_zero()
}

pub fn is_positive(x: &BigRational) -> bool {
    x.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_conversion_is_exact() {
        let x = 0.1_f64;
        assert_eq!(to_f64(&rat(x)), x);
        let y = -3.25_f64;
        assert_eq!(to_f64(&rat(y)), y);
    }

    #[test]
    fn delta_factors_as_product_of_halves() {
        // delta = ((n-4+alpha)/2)^2 ((n-alpha)/2)^2
        for (n, a) in [(5u32, 0.0), (6, 1.5), (9, -2.25)] {
            let ar = rat(a);
            let lhs = delta_alpha(n, &ar);
            let rhs = h_tilde_alpha(n, &ar) * gamma_alpha_formula(n, &ar);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn b_lambda_is_delta_plus_lambda_h() {
        for (n, a, l) in [(5u32, 0.5, 1.25), (7, -1.0, -0.5), (10, 3.0, 4.0)] {
            let (ar, lr) = (rat(a), rat(l));
            let lhs = b_lambda(n, &ar, &lr);
            let rhs = delta_alpha(n, &ar) + &lr * h_tilde_alpha(n, &ar);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lambda_alpha_reference_value() {
        // n=5, alpha=2: A=13/4, B=19/8, lambda_alpha=-26/19
        let a = rat(2.0);
        assert_eq!(cap_a_alpha(5, &a), rat_int(13) / rat_int(4));
        assert_eq!(cap_b_alpha(5, &a), rat_int(19) / rat_int(8));
        assert_eq!(lambda_alpha(5, &a), rat_int(-26) / rat_int(19));
    }
}
