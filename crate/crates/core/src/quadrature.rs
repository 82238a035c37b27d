//! High-accuracy radial quadrature for the explicit n-dimensional
//! integrals: quotients of the extremal profile U = (1+|x|^2)^{-(n-4)/2},
//! the shifted-energy identities, the weight-shift identity, and the
//! concentrated bump.
//!
//! All radial integrals substitute r = e^s, which turns the homogeneous
//! weights into exponentials and makes every integrand analytic on the
//! line; composite Gauss panels then converge superalgebraically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::params::{omega_n, ProblemParams};

// ---------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------

/// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    assert!(k >= 2);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(k, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre_and_deriv(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn panel_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

// ---------------------------------------------------------------------
// Adaptive composite rule in log r
// ---------------------------------------------------------------------

/// Composite log-substituted Gauss quadrature over (r_min, r_max).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialQuadSpec {
    pub r_min: f64,
    pub r_max: f64,
    /// Evaluation budget across all refinement levels.
    pub max_nodes: usize,
    /// Successive refinements must agree to this relative tolerance.
    pub rel_tol: f64,
}

impl Default for RadialQuadSpec {
    fn default() -> Self {
        RadialQuadSpec {
            r_min: (-45.0f64).exp(),
            r_max: 45.0f64.exp(),
            max_nodes: 2_000_000,
            rel_tol: 1e-10,
        }
    }
}

impl RadialQuadSpec {
    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0) {
            return Err(Error::InvalidParams(
                "radial quadrature needs 0 < r_min < 1 < r_max".into(),
            ));
        }
        if self.max_nodes < 256 {
            return Err(Error::InvalidParams("node budget must be at least 256".into()));
        }
        Ok(())
    }
}

/// Integrates f over (r_min, r_max) dr. The caller's integrand carries all
/// weights and the r^{n-1} surface factor.
pub fn radial_integral(f: impl Fn(f64) -> f64, spec: &RadialQuadSpec) -> Result<f64> {
    spec.validate()?;
    let g = |s: f64| {
        let r = s.exp();
        f(r) * r
    };
    let (s_lo, s_hi) = (spec.r_min.ln(), spec.r_max.ln());
    let rule = gauss_legendre(16);
    let mut used = 0usize;

    let estimate = |width: f64, used: &mut usize| -> f64 {
        // cover outward from the bulk region until panels stop contributing
        let mut total = 0.0;
        let mut negligible_runs = 0;
        let mut a = 0.0;
        // first sweep to the right from s = 0, then to the left
        while a < s_hi {
            let b = (a + width).min(s_hi);
            let v = panel_integral(&g, a, b, &rule);
            *used += rule.len();
            total += v;
            if v.abs() <= 1e-16 * total.abs().max(1e-300) {
                negligible_runs += 1;
                if negligible_runs >= 3 {
                    break;
                }
            } else {
                negligible_runs = 0;
            }
            a = b;
        }
        negligible_runs = 0;
        let mut b = 0.0;
        while b > s_lo {
            let a2 = (b - width).max(s_lo);
            let v = panel_integral(&g, a2, b, &rule);
            *used += rule.len();
            total += v;
            if v.abs() <= 1e-16 * total.abs().max(1e-300) {
                negligible_runs += 1;
                if negligible_runs >= 3 {
                    break;
                }
            } else {
                negligible_runs = 0;
            }
            b = a2;
        }
        total
    };

    let mut width = 2.0;
    let mut prev = estimate(width, &mut used);
    loop {
        width *= 0.5;
        let cur = estimate(width, &mut used);
        let denom = cur.abs().max(1e-300);
        if (cur - prev).abs() <= spec.rel_tol * denom {
            return Ok(cur);
        }
        if used > spec.max_nodes {
            return Err(Error::QuadratureNonConvergence(format!(
                "budget exhausted: last two estimates {prev:.17e} and {cur:.17e}"
            )));
        }
        prev = cur;
    }
}

// ---------------------------------------------------------------------
// Radial expressions: sums of c * r^p * (1+r^2)^s
// ---------------------------------------------------------------------

/// Closed-form radial functions of the shape sum_i c_i r^{p_i}(1+r^2)^{s_i};
/// the class is closed under d/dr and division by r, which covers the
/// extremal profile and its weighted shifts exactly.
#[derive(Debug, Clone)]
pub struct RadialExpr {
    terms: Vec<(f64, f64, f64)>,
}

impl RadialExpr {
    pub fn term(c: f64, p: f64, s: f64) -> Self {
        RadialExpr { terms: vec![(c, p, s)] }
    }

    /// The extremal profile U = (1+r^2)^{-(n-4)/2}.
    pub fn extremal_u(n: u32) -> Self {
        RadialExpr::term(1.0, 0.0, -(n as f64 - 4.0) / 2.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let one_r2 = 1.0 + r * r;
        self.terms
            .iter()
            .map(|&(c, p, s)| c * r.powf(p) * one_r2.powf(s))
            .sum()
    }

    pub fn deriv(&self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * 2);
        for &(c, p, s) in &self.terms {
            if p != 0.0 {
                terms.push((c * p, p - 1.0, s));
            }
            if s != 0.0 {
                terms.push((2.0 * c * s, p + 1.0, s - 1.0));
            }
        }
        RadialExpr { terms }
    }

    pub fn div_r(&self) -> Self {
        RadialExpr { terms: self.terms.iter().map(|&(c, p, s)| (c, p - 1.0, s)).collect() }
    }

    pub fn mul_power(&self, p: f64) -> Self {
        RadialExpr { terms: self.terms.iter().map(|&(c, pp, s)| (c, pp + p, s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        RadialExpr { terms }
    }

    pub fn scale(&self, c: f64) -> Self {
        RadialExpr { terms: self.terms.iter().map(|&(cc, p, s)| (c * cc, p, s)).collect() }
    }

    /// Radial Laplacian u'' + (n-1) u'/r.
    pub fn laplacian(&self, n: u32) -> Self {
        let d1 = self.deriv();
        let d2 = d1.deriv();
        d2.add(&d1.div_r().scale(n as f64 - 1.0))
    }
}

/// A radial function smooth on (0, infinity) with two derivatives.
pub trait RadialCurve {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

impl RadialCurve for RadialExpr {
    fn value(&self, r: f64) -> f64 {
        self.eval(r)
    }
    fn d1(&self, r: f64) -> f64 {
        self.deriv().eval(r)
    }
    fn d2(&self, r: f64) -> f64 {
        self.deriv().deriv().eval(r)
    }
}

/// Gaussian ring exp(-(r-center)^2/width^2).
#[derive(Debug, Clone, Copy)]
pub struct GaussianRing {
    pub center: f64,
    pub width: f64,
}

impl RadialCurve for GaussianRing {
    fn value(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        (-z * z).exp()
    }
    fn d1(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        -2.0 * z / self.width * self.value(r)
    }
    fn d2(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        (4.0 * z * z - 2.0) / (self.width * self.width) * self.value(r)
    }
}

/// Compactly supported bump exp(1 - 1/(1-z^2)) on |r-center| < radius.
#[derive(Debug, Clone, Copy)]
pub struct CompactBump {
    pub center: f64,
    pub radius: f64,
}

impl CompactBump {
    fn z(&self, r: f64) -> f64 {
        (r - self.center) / self.radius
    }
}

impl RadialCurve for CompactBump {
    fn value(&self, r: f64) -> f64 {
        let z = self.z(r);
        mollifier(z.abs())
    }
    fn d1(&self, r: f64) -> f64 {
        let z = self.z(r);
        mollifier_d1(z) / self.radius
    }
    fn d2(&self, r: f64) -> f64 {
        let z = self.z(r);
        mollifier_d2(z) / (self.radius * self.radius)
    }
}

// ---------------------------------------------------------------------
// Mollifier phi(rho) = exp(1 - 1/(1-rho^2)), |rho| < 1
// ---------------------------------------------------------------------

pub fn mollifier(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

pub fn mollifier_d1(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        0.0
    } else {
        let om = 1.0 - rho * rho;
        -2.0 * rho / (om * om) * mollifier(rho)
    }
}

pub fn mollifier_d2(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        0.0
    } else {
        let om = 1.0 - rho * rho;
        let g1 = -2.0 * rho / (om * om);
        let g2 = -2.0 / (om * om) - 8.0 * rho * rho / (om * om * om);
        (g2 + g1 * g1) * mollifier(rho)
    }
}

/// phi'(rho)/rho, computed without the division (regular at 0).
fn mollifier_d1_over_rho(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        0.0
    } else {
        let om = 1.0 - rho * rho;
        -2.0 / (om * om) * mollifier(rho)
    }
}

// ---------------------------------------------------------------------
// Quotient of the extremal profile and the shifted-energy identities
// ---------------------------------------------------------------------

/// Test-function value of the critical quotient: for u = |x|^{-alpha/2} U,
///
///   [ int |Delta U|^2 + (A_alpha + lambda B_alpha) int |x|^{-4} U^2 ]
///   / ( int U^{2**} )^{2/2**}
///
/// For alpha = 0, lambda = 0 this is the unweighted critical constant.
pub fn quotient_of_u(p: &ProblemParams, spec: &RadialQuadSpec) -> Result<f64> {
    p.validate()?;
    if !p.q_regime().q_critical {
        return Err(Error::Precondition(format!(
            "quotient of the extremal profile needs q = 2n/(n-4) = {} (got q = {})",
            p.two_double_star(),
            p.q
        )));
    }
    let n = p.n;
    let u = RadialExpr::extremal_u(n);
    let lap = u.laplacian(n);
    let nm1 = n as f64 - 1.0;
    let bilap = radial_integral(|r| lap.eval(r).powi(2) * r.powf(nm1), spec)?;
    let hardy = radial_integral(|r| u.eval(r).powi(2) * r.powf(nm1 - 4.0), spec)?;
    let tds = p.two_double_star();
    // U^{2**} = (1+r^2)^{-n} exactly
    let mass = radial_integral(|r| (1.0 + r * r).powf(-(n as f64)) * r.powf(nm1), spec)?;
    let a = exact::rat(p.alpha);
    let cap_a = exact::to_f64(&exact::cap_a_alpha(n, &a));
    let cap_b = exact::to_f64(&exact::cap_b_alpha(n, &a));
    let omega = omega_n(n);
    Ok(omega.powf(1.0 - 2.0 / tds) * (bilap + (cap_a + p.lambda * cap_b) * hardy)
        / mass.powf(2.0 / tds))
}

/// Per-identity relative errors of the shifted-energy expansion of
/// u = |x|^{-alpha/2} U.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbIdentityReport {
    /// int |x|^alpha |Delta u|^2  vs  int |Delta U|^2 + A int |x|^{-4} U^2
    pub bilaplacian_rel_err: f64,
    /// int |x|^{alpha-2} |grad u|^2  vs  B int |x|^{-4} U^2
    pub gradient_rel_err: f64,
    /// int |x|^{-beta} |u|^{2**}  vs  int U^{2**}
    pub mass_rel_err: f64,
    pub max_rel_err: f64,
    /// All three within 1e-6.
    pub pass: bool,
}

/// Verifies the three shifted-energy identities by quadrature of both
/// sides; failures above 1e-6 are flagged.
pub fn verify_ab_identities(n: u32, alpha: f64, spec: &RadialQuadSpec) -> Result<AbIdentityReport> {
    // same admissibility window as the problem itself
    ProblemParams::new(n, alpha, 3.0, 0.0)?;
    let nm1 = n as f64 - 1.0;
    let ar = exact::rat(alpha);
    let cap_a = exact::to_f64(&exact::cap_a_alpha(n, &ar));
    let cap_b = exact::to_f64(&exact::cap_b_alpha(n, &ar));

    let u_big = RadialExpr::extremal_u(n);
    let v = u_big.mul_power(-alpha / 2.0); // |x|^{-alpha/2} U
    let lap_u = u_big.laplacian(n);
    let lap_v = v.laplacian(n);
    let dv = v.deriv();

    let bilap_u = radial_integral(|r| lap_u.eval(r).powi(2) * r.powf(nm1), spec)?;
    let hardy_u = radial_integral(|r| u_big.eval(r).powi(2) * r.powf(nm1 - 4.0), spec)?;

    let lhs_bilap = radial_integral(|r| lap_v.eval(r).powi(2) * r.powf(nm1 + alpha), spec)?;
    let rhs_bilap = bilap_u + cap_a * hardy_u;

    let lhs_grad = radial_integral(|r| dv.eval(r).powi(2) * r.powf(nm1 + alpha - 2.0), spec)?;
    let rhs_grad = cap_b * hardy_u;

    // |v|^{2**} carries weight |x|^{-beta}; the weights cancel exactly, so
    // both sides integrate (1+r^2)^{-n} against different but equal
    // exponent bookkeeping. Assembled in log form: the raw power
    // r^{-alpha 2**/2} overflows near r_min for alpha > 0.
    let tds = 2.0 * n as f64 / (n as f64 - 4.0);
    let beta = n as f64 - tds * (n as f64 - 4.0 + alpha) / 2.0;
    let lhs_mass = radial_integral(
        |r| {
            let log_pow = (nm1 - beta - alpha * tds / 2.0) * r.ln()
                - n as f64 * (1.0 + r * r).ln();
            log_pow.exp()
        },
        spec,
    )?;
    let rhs_mass = radial_integral(|r| (1.0 + r * r).powf(-(n as f64)) * r.powf(nm1), spec)?;

    let rel = |l: f64, r: f64| (l - r).abs() / l.abs().max(r.abs());
    let b_err = rel(lhs_bilap, rhs_bilap);
    let g_err = rel(lhs_grad, rhs_grad);
    let m_err = rel(lhs_mass, rhs_mass);
    let max = b_err.max(g_err).max(m_err);
    Ok(AbIdentityReport {
        bilaplacian_rel_err: b_err,
        gradient_rel_err: g_err,
        mass_rel_err: m_err,
        max_rel_err: max,
        pass: max <= 1e-6,
    })
}

/// Integrates both sides of the pointwise expansion of
/// |x|^{-alpha} |Delta(|x|^{alpha/2} w)|^2 into its six terms and returns
/// the relative disagreement.
pub fn verify_weight_shift_identity(
    n: u32,
    alpha: f64,
    w: &dyn RadialCurve,
    spec: &RadialQuadSpec,
) -> Result<f64> {
    let nm1 = n as f64 - 1.0;
    let half = alpha / 2.0;
    let kappa = n as f64 - 2.0 + half;

    // f = r^{alpha/2} w; Delta f built from w, w', w''
    let lhs = radial_integral(
        |r| {
            let (w0, w1, w2) = (w.value(r), w.d1(r), w.d2(r));
            let f1 = half * r.powf(half - 1.0) * w0 + r.powf(half) * w1;
            let f2 = half * (half - 1.0) * r.powf(half - 2.0) * w0
                + alpha * r.powf(half - 1.0) * w1
                + r.powf(half) * w2;
            let lap_f = f2 + nm1 * f1 / r;
            r.powf(-alpha) * lap_f * lap_f * r.powf(nm1)
        },
        spec,
    )?;

    let rhs = radial_integral(
        |r| {
            let (w0, w1, w2) = (w.value(r), w.d1(r), w.d2(r));
            let lap_w = w2 + nm1 * w1 / r;
            let radial_grad = r * w1; // x . grad w for radial w
            let t1 = lap_w * lap_w;
            let t2 = alpha * alpha * radial_grad * radial_grad / r.powi(4);
            let t3 = alpha * alpha / 4.0 * kappa * kappa * w0 * w0 / r.powi(4);
            let t4 = 2.0 * alpha * radial_grad * lap_w / (r * r);
            let t5 = alpha * alpha * kappa * w0 * radial_grad / r.powi(4);
            let t6 = alpha * kappa * w0 * lap_w / (r * r);
            (t1 + t2 + t3 + t4 + t5 + t6) * r.powf(nm1)
        },
        spec,
    )?;

    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()))
}

// ---------------------------------------------------------------------
// Log-radial cross-checks of the 1D reduction
// ---------------------------------------------------------------------

/// A profile of t with two analytic derivatives, used to cross-check the
/// log-radial reduction at quadrature accuracy.
pub trait Curve1D {
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
}

pub struct GaussCurve;

impl Curve1D for GaussCurve {
    fn value(&self, t: f64) -> f64 {
        (-t * t).exp()
    }
    fn d1(&self, t: f64) -> f64 {
        -2.0 * t * self.value(t)
    }
    fn d2(&self, t: f64) -> f64 {
        (4.0 * t * t - 2.0) * self.value(t)
    }
}

pub struct SechCurve {
    pub k: f64,
}

impl Curve1D for SechCurve {
    fn value(&self, t: f64) -> f64 {
        1.0 / (self.k * t).cosh()
    }
    fn d1(&self, t: f64) -> f64 {
        let s = self.value(t);
        -self.k * s * (self.k * t).tanh()
    }
    fn d2(&self, t: f64) -> f64 {
        let s = self.value(t);
        self.k * self.k * s * (1.0 - 2.0 * s * s)
    }
}

pub struct ModulatedGaussCurve {
    pub freq: f64,
}

impl Curve1D for ModulatedGaussCurve {
    fn value(&self, t: f64) -> f64 {
        (-t * t).exp() * (self.freq * t).cos()
    }
    fn d1(&self, t: f64) -> f64 {
        let e = (-t * t).exp();
        let (s, c) = (self.freq * t).sin_cos();
        e * (-2.0 * t * c - self.freq * s)
    }
    fn d2(&self, t: f64) -> f64 {
        let e = (-t * t).exp();
        let (s, c) = (self.freq * t).sin_cos();
        e * ((4.0 * t * t - 2.0 - self.freq * self.freq) * c + 4.0 * t * self.freq * s)
    }
}

/// Relative errors between the n-dimensional radial quadrature of the
/// three weighted forms and omega_n times the 1D trapezoid of their
/// log-radial counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub second_order_rel_err: f64,
    pub first_order_rel_err: f64,
    pub mass_rel_err: f64,
    pub max_rel_err: f64,
}

/// Cross-checks the log-radial reduction for a given profile w(t): pushes
/// it to u(r) = r^sigma w(-log r) analytically and integrates both sides.
///
/// The 1D side uses the profile's analytic derivatives on a uniform grid
/// (trapezoid, which is superalgebraically accurate for decaying smooth
/// integrands); finite-difference accuracy is covered separately by the
/// grid-refinement tests.
pub fn reduction_cross_check(
    p: &ProblemParams,
    w: &dyn Curve1D,
    half_length: f64,
    n_nodes: usize,
    spec: &RadialQuadSpec,
) -> Result<ReductionCheck> {
    p.validate()?;
    let n = p.n;
    let nm1 = n as f64 - 1.0;
    let d = p.derived_exponents();
    let sigma = d.sigma;
    let beta = d.beta;
    let a = exact::rat(p.alpha);
    let delta = exact::to_f64(&exact::delta_alpha(n, &a));
    let delta_t = exact::to_f64(&exact::delta_tilde_alpha(n, &a));
    let h_t = exact::to_f64(&exact::h_tilde_alpha(n, &a));
    let omega = omega_n(n);

    // n-dimensional side: u(r) = r^sigma w(t), t = -ln r
    let u_parts = |r: f64| {
        let t = -r.ln();
        let (w0, w1, w2) = (w.value(t), w.d1(t), w.d2(t));
        let u0 = r.powf(sigma) * w0;
        let u1 = r.powf(sigma - 1.0) * (sigma * w0 - w1);
        let u2 = r.powf(sigma - 2.0)
            * (sigma * (sigma - 1.0) * w0 - (2.0 * sigma - 1.0) * w1 + w2);
        (u0, u1, u2)
    };
    let lhs_second = omega
        * radial_integral(
            |r| {
                let (_, u1, u2) = u_parts(r);
                let lap = u2 + nm1 * u1 / r;
                lap * lap * r.powf(nm1 + p.alpha)
            },
            spec,
        )?;
    let lhs_first = omega
        * radial_integral(
            |r| {
                let (_, u1, _) = u_parts(r);
                u1 * u1 * r.powf(nm1 + p.alpha - 2.0)
            },
            spec,
        )?;
    let lhs_mass = omega
        * radial_integral(
            |r| {
                let (u0, _, _) = u_parts(r);
                u0.abs().powf(p.q) * r.powf(nm1 - beta)
            },
            spec,
        )?;

    // 1D side: trapezoid of the analytic integrands
    let h = 2.0 * half_length / (n_nodes - 1) as f64;
    let mut s2 = 0.0;
    let mut s1 = 0.0;
    let mut sm = 0.0;
    for i in 0..n_nodes {
        let t = -half_length + i as f64 * h;
        let trap = if i == 0 || i == n_nodes - 1 { 0.5 } else { 1.0 };
        let (w0, w1, w2) = (w.value(t), w.d1(t), w.d2(t));
        s2 += trap * (w2 * w2 + 2.0 * delta_t * w1 * w1 + delta * w0 * w0);
        s1 += trap * (w1 * w1 + h_t * w0 * w0);
        sm += trap * w0.abs().powf(p.q);
    }
    let rhs_second = omega * h * s2;
    let rhs_first = omega * h * s1;
    let rhs_mass = omega * h * sm;

    let rel = |l: f64, r: f64| (l - r).abs() / l.abs().max(r.abs());
    let e2 = rel(lhs_second, rhs_second);
    let e1 = rel(lhs_first, rhs_first);
    let em = rel(lhs_mass, rhs_mass);
    Ok(ReductionCheck {
        second_order_rel_err: e2,
        first_order_rel_err: e1,
        mass_rel_err: em,
        max_rel_err: e2.max(e1).max(em),
    })
}

// ---------------------------------------------------------------------
// Concentrated bump
// ---------------------------------------------------------------------

/// Geometry and resolution of the concentrated test bump
/// u_delta(x) = delta^{-(n-2)/2} phi(|x - x0|/delta), |x0| = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    /// Support radius, in (0, 1/2) so the support stays away from the
    /// origin.
    pub delta: f64,
    /// Base number of radial Gauss panels.
    pub radial_panels: usize,
    /// Base number of angular Gauss panels.
    pub angular_panels: usize,
}

impl BumpSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidParams(format!(
                "bump radius must lie in (0, 1/2) (got {delta})"
            )));
        }
        Ok(BumpSpec { delta, radial_panels: 8, angular_panels: 8 })
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidParams(format!(
                "bump radius must lie in (0, 1/2) (got {})",
                self.delta
            )));
        }
        if self.radial_panels == 0 || self.angular_panels == 0 {
            return Err(Error::InvalidParams("panel counts must be positive".into()));
        }
        Ok(())
    }
}

/// The three weighted energies of the bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpEnergies {
    /// int |x|^{alpha-2} |grad u_delta|^2
    pub gradient: f64,
    /// int |x|^alpha |Delta u_delta|^2
    pub bilaplacian: f64,
    /// int |x|^{-beta} |u_delta|^q
    pub lq_mass: f64,
}

/// Weighted moment of the bump: in coordinates x = x0 + s omega,
/// |x|^2 = 1 + 2 s cos(theta) + s^2 and dx = omega_{n-1} s^{n-1}
/// sin^{n-2}(theta) dtheta ds; after s = delta rho the radial profile F
/// is integrated over (rho, theta) in (0,1) x (0,pi).
fn bump_moment(
    n: u32,
    weight_exp: f64,
    delta: f64,
    f_radial: &dyn Fn(f64) -> f64,
    radial_panels: usize,
    angular_panels: usize,
) -> f64 {
    let rule = gauss_legendre(12);
    let nm1 = n as f64 - 1.0;
    let nm2 = n as f64 - 2.0;
    let mut total = 0.0;
    for ip in 0..radial_panels {
        let (ra, rb) = (
            ip as f64 / radial_panels as f64,
            (ip + 1) as f64 / radial_panels as f64,
        );
        for &(xr, wr) in &rule {
            let rho = 0.5 * (ra + rb) + 0.5 * (rb - ra) * xr;
            let wrho = 0.5 * (rb - ra) * wr;
            let fr = f_radial(rho) * rho.powf(nm1);
            if fr == 0.0 {
                continue;
            }
            let mut ang = 0.0;
            for jp in 0..angular_panels {
                let (ta, tb) = (
                    std::f64::consts::PI * jp as f64 / angular_panels as f64,
                    std::f64::consts::PI * (jp + 1) as f64 / angular_panels as f64,
                );
                for &(xt, wt) in &rule {
                    let theta = 0.5 * (ta + tb) + 0.5 * (tb - ta) * xt;
                    let wtheta = 0.5 * (tb - ta) * wt;
                    let s = delta * rho;
                    let x_sq = 1.0 + 2.0 * s * theta.cos() + s * s;
                    ang += wtheta * x_sq.powf(weight_exp / 2.0) * theta.sin().powf(nm2);
                }
            }
            total += wrho * fr * ang;
        }
    }
    omega_n(n - 1) * total
}

/// Computes the bump energies with one panel-doubling refinement check.
pub fn bump_energies(p: &ProblemParams, spec: &BumpSpec) -> Result<BumpEnergies> {
    p.validate()?;
    spec.validate()?;
    let n = p.n;
    let q = p.q;
    let beta = p.derived_exponents().beta;
    let delta = spec.delta;
    let nf = n as f64;

    let grad_profile = |rho: f64| mollifier_d1(rho).powi(2);
    let bilap_profile = |rho: f64| {
        let psi = mollifier_d2(rho) + (nf - 1.0) * mollifier_d1_over_rho(rho);
        psi * psi
    };
    let mass_profile = |rho: f64| mollifier(rho).powf(q);

    let compute = |rp: usize, ap: usize| -> BumpEnergies {
        BumpEnergies {
            gradient: bump_moment(n, p.alpha - 2.0, delta, &grad_profile, rp, ap),
            bilaplacian: bump_moment(n, p.alpha, delta, &bilap_profile, rp, ap) / (delta * delta),
            lq_mass: bump_moment(n, -beta, delta, &mass_profile, rp, ap)
                * delta.powf(n as f64 - q * (n as f64 - 2.0) / 2.0),
        }
    };

    // The mollifier is flat-but-not-analytic at the support edge, so panel
    // doubling converges superalgebraically rather than exponentially;
    // keep doubling until two consecutive levels agree.
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let (mut rp, mut ap) = (spec.radial_panels, spec.angular_panels);
    let mut prev = compute(rp, ap);
    for _ in 0..5 {
        rp *= 2;
        ap *= 2;
        let cur = compute(rp, ap);
        let worst = rel(prev.gradient, cur.gradient)
            .max(rel(prev.bilaplacian, cur.bilaplacian))
            .max(rel(prev.lq_mass, cur.lq_mass));
        if worst <= 1e-9 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence(
        "bump energies unstable under panel refinement".into(),
    ))
}

/// The normalized-at-zero bump quotient
/// int |x|^{alpha-2}|grad u_delta|^2 / (int |x|^{-beta}|u_delta|^q)^{2/q}.
///
/// Decays like delta^{n-2-2n/q} (up to weight variation) and certifies a
/// vanishing lower-order infimum exactly when q exceeds 2n/(n-2).
pub fn bump_quotient(p: &ProblemParams, spec: &BumpSpec) -> Result<f64> {
    if p.q < p.two_star() - 1e-12 {
        return Err(Error::Precondition(format!(
            "bump certification applies for q >= 2n/(n-2) = {} (got q = {})",
            p.two_star(),
            p.q
        )));
    }
    let e = bump_energies(p, spec)?;
    Ok(e.gradient / e.lq_mass.powf(2.0 / p.q))
}

/// Bump value of the eps-weighted quotient
/// (eps * bilaplacian + gradient) / mass^{2/q}; an upper bound for the
/// corresponding normalized infimum.
pub fn bump_quotient_eps(p: &ProblemParams, spec: &BumpSpec, eps: f64) -> Result<f64> {
    if eps < 0.0 {
        return Err(Error::Precondition("eps must be nonnegative".into()));
    }
    let e = bump_energies(p, spec)?;
    Ok((eps * e.bilaplacian + e.gradient) / e.lq_mass.powf(2.0 / p.q))
}

/// Frozen-weight decay exponent of the bump quotient: n - 2 - 2n/q.
pub fn bump_scaling_exponent(p: &ProblemParams) -> f64 {
    p.n as f64 - 2.0 - 2.0 * p.n as f64 / p.q
}
