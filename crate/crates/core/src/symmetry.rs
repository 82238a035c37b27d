//! Pointwise symmetry-breaking verdicts and phase-diagram scans.
//!
//! A point is certified only through a strictly positive numeric margin:
//! either a test-function upper bound on the full infimum drops below the
//! computed radial value by more than three times the combined numeric
//! tolerance, or a closed-form criterion fires. The closed-form
//! instability criterion certifies breaking only in the large-coupling
//! limit and is flagged as such; no coupling threshold is invented for it.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{felli_schneider_margin, ClosedFormConstants};
use crate::emden_fowler::reduce_fourth_order;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::{bump_quotient_eps, quotient_of_u, BumpSpec, RadialQuadSpec};
use crate::solvers::{solve_fourth, MinimizeResult, SolverConfig};

/// Per-point classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Some criterion fired with margin above its tolerance.
    RadialBreaksCertified,
    /// All applicable criteria evaluated negative.
    NoBreakingEvidence,
    /// Budgets exhausted, margins within tolerance, or the question is
    /// not posed at this point.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::RadialBreaksCertified => "radial_breaks_certified",
            Verdict::NoBreakingEvidence => "no_breaking_evidence",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionKind {
    /// Closed-form instability inequality of the lower-order problem.
    FsCondition,
    /// Coupling below the threshold -A_alpha/B_alpha at critical q.
    LambdaAlphaThreshold,
    /// Test-function upper bound strictly below the radial value.
    UpperBoundVsRadial,
    /// Critical unweighted point: the full infimum is pinned to the
    /// unweighted critical constant and not attained.
    CriticalNonattainment,
}

impl CriterionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionKind::FsCondition => "FS_condition",
            CriterionKind::LambdaAlphaThreshold => "lambda_alpha_threshold",
            CriterionKind::UpperBoundVsRadial => "upper_bound_vs_radial",
            CriterionKind::CriticalNonattainment => "critical_nonattainment",
        }
    }

    /// The coupling threshold certifies attainment of the critical
    /// infimum, not symmetry breaking; it is recorded as context only.
    pub fn certifies_breaking(&self) -> bool {
        !matches!(self, CriterionKind::LambdaAlphaThreshold)
    }
}

/// One fired criterion with its numeric evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiredCriterion {
    pub kind: CriterionKind,
    /// Positive margin backing the criterion.
    pub margin: f64,
    /// Combined numeric tolerance the margin was measured against.
    pub tolerance: f64,
    /// True when the criterion certifies breaking only for large coupling
    /// rather than at the given lambda.
    pub lambda_large_only: bool,
}

/// Symmetry-breaking classification at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVerdict {
    pub params: ProblemParams,
    pub verdict: Verdict,
    pub criteria_fired: Vec<FiredCriterion>,
    /// Certified upper bound on the (normalized) full infimum, when one
    /// was computed.
    pub s_upper_bound: Option<f64>,
    /// Computed (normalized) radial value, when one was computed.
    pub s_radial: Option<f64>,
    /// s_radial - s_upper_bound for the margin-based criteria.
    pub margin: Option<f64>,
    /// Per-point diagnostic (errors during scans land here).
    pub note: Option<String>,
}

/// Margin multiplier guarding against correlated quadrature/solver bias.
pub const MARGIN_SAFETY: f64 = 3.0;

/// Test-function upper bound for the critical-exponent infimum, plus the
/// closed-form threshold telling when the bound is strictly below the
/// unweighted critical constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBound {
    /// Quotient of the shifted extremal profile: an upper bound for the
    /// full infimum at q = 2n/(n-4).
    pub bound: f64,
    /// lambda_alpha = -A_alpha/B_alpha.
    pub lambda_alpha: f64,
    /// Set exactly when lambda < lambda_alpha, i.e. the bound is strictly
    /// below the unweighted critical constant.
    pub strictly_below_unweighted: bool,
}

/// Computes the critical-exponent upper bound.
pub fn critical_upper_bound(p: &ProblemParams, quad: &RadialQuadSpec) -> Result<CriticalBound> {
    p.validate()?;
    if !p.q_regime().q_critical {
        return Err(Error::Precondition(format!(
            "critical bound needs q = 2n/(n-4) = {} (got {})",
            p.two_double_star(),
            p.q
        )));
    }
    let c = ClosedFormConstants::for_params(p)?;
    if !(p.lambda > -c.gamma_alpha_formula) {
        return Err(Error::Precondition(
            "lambda must exceed the negative embedding constant".into(),
        ));
    }
    Ok(CriticalBound {
        bound: quotient_of_u(p, quad)?,
        lambda_alpha: c.lambda_alpha,
        strictly_below_unweighted: p.lambda < c.lambda_alpha,
    })
}

/// Solves the radial problem at the budget grid and once more refined,
/// returning (value, absolute error estimate, result).
fn solve_radial_with_tolerance(
    p: &ProblemParams,
    budget: &SolverConfig,
) -> Result<(f64, f64, MinimizeResult)> {
    let form = reduce_fourth_order(p)?;
    let coarse = solve_fourth(&form, budget)?;
    let mut fine_cfg = *budget;
    fine_cfg.grid = Some(coarse.profile.grid().refined());
    let fine = solve_fourth(&form, &fine_cfg)?;
    let grid_err = (fine.infimum - coarse.infimum).abs() / 3.0;
    let tol = 2.0 * grid_err + 10.0 * budget.el_tolerance * fine.infimum.abs();
    Ok((fine.infimum, tol, fine))
}

/// Classifies one parameter point. Routes by the position of q:
/// closed-form instability for q <= 2n/(n-2), the concentrated-bump
/// comparison on the normalized scale for q strictly between the critical
/// exponents (lambda > 0), and extremal-profile comparisons at critical q.
pub fn verdict_at(p: &ProblemParams, budget: &SolverConfig) -> Result<PhaseVerdict> {
    p.validate()?;
    if !(p.lambda > p.radial_lambda_floor()) {
        return Err(Error::Precondition(format!(
            "lambda must exceed -(n-alpha)^2/4 = {}",
            p.radial_lambda_floor()
        )));
    }
    let regime = p.q_regime();
    let quad = RadialQuadSpec::default();
    let mut criteria = Vec::new();
    let mut s_upper = None;
    let mut s_radial = None;
    let mut margin = None;
    let mut note = None;

    if p.q <= p.two_star() {
        // closed-form instability criterion; exact rational margin
        let m = felli_schneider_margin(p);
        if m > 0.0 {
            criteria.push(FiredCriterion {
                kind: CriterionKind::FsCondition,
                margin: m,
                tolerance: 0.0,
                lambda_large_only: true,
            });
        }
    } else if regime.q_critical {
        let cb = critical_upper_bound(p, &quad)?;
        let (rad, rad_tol, _) = solve_radial_with_tolerance(p, budget)?;
        s_radial = Some(rad);
        let quad_tol = 1e-8 * cb.bound.abs();
        if cb.strictly_below_unweighted {
            criteria.push(FiredCriterion {
                kind: CriterionKind::LambdaAlphaThreshold,
                margin: cb.lambda_alpha - p.lambda,
                tolerance: 0.0,
                lambda_large_only: false,
            });
        }
        let upper = if p.alpha == 0.0 && p.lambda >= 0.0 {
            // the full infimum is pinned to the unweighted critical
            // constant here (and not attained for lambda > 0)
            let unweighted = ProblemParams::new(p.n, 0.0, p.q, 0.0)?;
            quotient_of_u(&unweighted, &quad)?
        } else {
            cb.bound
        };
        s_upper = Some(upper);
        let gap = rad - upper;
        margin = Some(gap);
        let tol = quad_tol + rad_tol;
        if gap > MARGIN_SAFETY * tol {
            let kind = if p.alpha == 0.0 && p.lambda > 0.0 {
                CriterionKind::CriticalNonattainment
            } else {
                CriterionKind::UpperBoundVsRadial
            };
            criteria.push(FiredCriterion {
                kind,
                margin: gap,
                tolerance: tol,
                lambda_large_only: false,
            });
        }
    } else if regime.q_subcritical && p.q > p.two_star() {
        if p.lambda > 0.0 {
            // normalized comparison at eps = 1/lambda: bump upper bound
            // against the rescaled radial value
            let eps = 1.0 / p.lambda;
            let mut best_bound = f64::INFINITY;
            for delta in [0.4, 0.2, 0.1] {
                let b = bump_quotient_eps(p, &BumpSpec::new(delta)?, eps)?;
                best_bound = best_bound.min(b);
            }
            let (rad, rad_tol, _) = solve_radial_with_tolerance(p, budget)?;
            let s_rad_eps = rad / p.lambda;
            s_radial = Some(s_rad_eps);
            s_upper = Some(best_bound);
            let gap = s_rad_eps - best_bound;
            margin = Some(gap);
            let tol = 1e-8 * best_bound.abs() + rad_tol / p.lambda;
            if gap > MARGIN_SAFETY * tol {
                criteria.push(FiredCriterion {
                    kind: CriterionKind::UpperBoundVsRadial,
                    margin: gap,
                    tolerance: tol,
                    lambda_large_only: false,
                });
            }
        } else {
            note = Some("bump comparison needs lambda > 0".into());
        }
    } else {
        // q above the critical exponent: the full minimization problem is
        // not posed, only the radial one
        note = Some("full problem undefined above the critical exponent".into());
        return Ok(PhaseVerdict {
            params: *p,
            verdict: Verdict::Inconclusive,
            criteria_fired: criteria,
            s_upper_bound: s_upper,
            s_radial,
            margin,
            note,
        });
    }

    let certifying = criteria
        .iter()
        .any(|c| c.kind.certifies_breaking() && c.margin > 0.0 && c.margin > MARGIN_SAFETY * c.tolerance);
    // absence of breaking is never certified: a clean negative comparison
    // is "no evidence", a positive margin inside the tolerance band is
    // inconclusive
    let verdict = if certifying {
        Verdict::RadialBreaksCertified
    } else {
        match margin {
            Some(m) if m <= 0.0 => Verdict::NoBreakingEvidence,
            Some(_) => Verdict::Inconclusive,
            None if note.is_none() => Verdict::NoBreakingEvidence,
            None => Verdict::Inconclusive,
        }
    };
    Ok(PhaseVerdict {
        params: *p,
        verdict,
        criteria_fired: criteria,
        s_upper_bound: s_upper,
        s_radial,
        margin,
        note,
    })
}

/// The interpolation/shift chain bounding the radial value at (alpha, q)
/// from below in terms of a reference radial value at (0, 2**).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityChain {
    /// theta_q = (q-2)/(2**-2), in (0,1] for q in (2, 2**].
    pub theta_q: f64,
    /// tau_alpha = 1 + alpha/(n-4).
    pub tau_alpha: f64,
    /// eps_alpha = |tau_alpha - 1| (n-2) / sqrt(gamma).
    pub eps_alpha: f64,
    /// Constant relating the radial critical values at alpha and 0.
    pub k_alpha: f64,
    /// Chained lower bound for the radial value at (alpha, q, lambda).
    pub radial_lower_bound: f64,
}

/// Evaluates the chain. `gamma` is the embedding constant at alpha (use
/// the closed form for alpha >= 0) and `s_radial_ref` a radial value at
/// (alpha = 0, q = 2**) with the same lambda.
pub fn semicontinuity_chain(
    p: &ProblemParams,
    gamma: f64,
    s_radial_ref: f64,
) -> Result<SemicontinuityChain> {
    p.validate()?;
    if p.lambda < 0.0 {
        return Err(Error::Precondition("chain needs lambda >= 0".into()));
    }
    let tds = p.two_double_star();
    if !(p.q > 2.0 && p.q <= tds + crate::params::CRITICAL_Q_TOL) {
        return Err(Error::Precondition(format!(
            "chain needs q in (2, 2**] (got {})",
            p.q
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::Precondition("gamma must be positive".into()));
    }
    let n = p.n as f64;
    let theta_q = (p.q - 2.0) / (tds - 2.0);
    let tau_alpha = 1.0 + p.alpha / (n - 4.0);
    let eps_alpha = (tau_alpha - 1.0).abs() * (n - 2.0) / gamma.sqrt();
    let one_eps_sq = (1.0 + eps_alpha) * (1.0 + eps_alpha);
    let k_alpha = one_eps_sq / tau_alpha.powf(3.0 + 2.0 / tds)
        + p.lambda / gamma / tau_alpha.powf(1.0 + 2.0 / tds)
            * (1.0 - one_eps_sq / (tau_alpha * tau_alpha)).abs();
    let c = ClosedFormConstants::for_params(p)?;
    let bound = (c.delta_alpha.powf(2.0 * (1.0 - theta_q) / (theta_q * tds)) / k_alpha
        * s_radial_ref)
        .powf(theta_q * tds / p.q);
    Ok(SemicontinuityChain {
        theta_q,
        tau_alpha,
        eps_alpha,
        k_alpha,
        radial_lower_bound: bound,
    })
}

// ---------------------------------------------------------------------
// Phase scans
// ---------------------------------------------------------------------

/// Cache for verdicts: scans consult it before solving and publish after.
pub trait VerdictCache: Sync {
    fn get(&self, key: &str) -> Option<PhaseVerdict>;
    fn put(&self, key: &str, verdict: &PhaseVerdict);
}

/// In-memory verdict cache.
#[derive(Default)]
pub struct MemoryCache {
    map: Mutex<HashMap<String, PhaseVerdict>>,
}

impl VerdictCache for MemoryCache {
    fn get(&self, key: &str) -> Option<PhaseVerdict> {
        self.map.lock().unwrap().get(key).cloned()
    }
    fn put(&self, key: &str, verdict: &PhaseVerdict) {
        self.map
            .lock()
            .unwrap()
            .insert(key.to_string(), verdict.clone());
    }
}

/// Deterministic cache key for a (point, budget) pair: bit patterns of
/// every float that influences the result.
pub fn verdict_cache_key(p: &ProblemParams, budget: &SolverConfig) -> String {
    let grid = budget.grid.map(|g| (g.half_length().to_bits(), g.n_cells()));
    format!(
        "v1:n={};a={:016x};q={:016x};l={:016x};grid={:?};mi={};tol={:016x};r={};s={}",
        p.n,
        p.alpha.to_bits(),
        p.q.to_bits(),
        p.lambda.to_bits(),
        grid,
        budget.max_iterations,
        budget.el_tolerance.to_bits(),
        budget.restarts,
        budget.seed
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScanStats {
    pub computed: usize,
    pub cached: usize,
    pub errored: usize,
}

/// Runs verdicts over a list of points; deterministic, resumable through
/// the cache, and tolerant of per-point failures (recorded in the
/// verdict note).
pub fn phase_scan(
    points: &[ProblemParams],
    budget: &SolverConfig,
    cache: Option<&dyn VerdictCache>,
) -> (Vec<PhaseVerdict>, ScanStats) {
    let outcomes: Vec<(PhaseVerdict, bool, bool)> = points
        .par_iter()
        .map(|p| {
            let key = verdict_cache_key(p, budget);
            if let Some(c) = cache {
                if let Some(hit) = c.get(&key) {
                    return (hit, true, false);
                }
            }
            match verdict_at(p, budget) {
                Ok(v) => {
                    if let Some(c) = cache {
                        c.put(&key, &v);
                    }
                    (v, false, false)
                }
                Err(e) => (
                    PhaseVerdict {
                        params: *p,
                        verdict: Verdict::Inconclusive,
                        criteria_fired: Vec::new(),
                        s_upper_bound: None,
                        s_radial: None,
                        margin: None,
                        note: Some(format!("error: {e}")),
                    },
                    false,
                    true,
                ),
            }
        })
        .collect();
    let mut stats = ScanStats::default();
    let mut verdicts = Vec::with_capacity(outcomes.len());
    for (v, was_cached, errored) in outcomes {
        if was_cached {
            stats.cached += 1;
        } else if errored {
            stats.errored += 1;
        } else {
            stats.computed += 1;
        }
        verdicts.push(v);
    }
    (verdicts, stats)
}

/// Header of the scan CSV schema.
pub fn csv_header() -> &'static str {
    "n,alpha,q,lambda,verdict,criteria,s_upper,s_radial,margin"
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// One CSV row per verdict; criteria are ';'-joined, large-coupling-only
/// criteria are marked.
pub fn csv_row(v: &PhaseVerdict) -> String {
    let criteria = v
        .criteria_fired
        .iter()
        .map(|c| {
            if c.lambda_large_only {
                format!("{}(lambda_large)", c.kind.as_str())
            } else {
                c.kind.as_str().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{:.16e},{:.16e},{:.16e},{},{},{},{},{}",
        v.params.n,
        v.params.alpha,
        v.params.q,
        v.params.lambda,
        v.verdict.as_str(),
        criteria,
        fmt_opt(v.s_upper_bound),
        fmt_opt(v.s_radial),
        fmt_opt(v.margin)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> SolverConfig {
        SolverConfig::with_grid(40.0, 1024).unwrap()
    }

    #[test]
    fn fs_route_fires_qualitatively() {
        let p = ProblemParams::new(5, 3.0, 3.0, 1.0).unwrap();
        let v = verdict_at(&p, &budget()).unwrap();
        assert_eq!(v.verdict, Verdict::RadialBreaksCertified);
        assert_eq!(v.criteria_fired.len(), 1);
        let c = &v.criteria_fired[0];
        assert_eq!(c.kind, CriterionKind::FsCondition);
        assert!(c.lambda_large_only);
        assert!(c.margin > 0.0);
    }

    #[test]
    fn fs_route_negative_is_no_evidence() {
        let p = ProblemParams::new(5, 0.0, 3.0, 1.0).unwrap();
        let v = verdict_at(&p, &budget()).unwrap();
        assert_eq!(v.verdict, Verdict::NoBreakingEvidence);
        assert!(v.criteria_fired.is_empty());
    }

    #[test]
    fn supercritical_q_is_not_posed() {
        let p = ProblemParams::new(5, 0.0, 12.0, 1.0).unwrap();
        let v = verdict_at(&p, &budget()).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert!(v.note.is_some());
    }

    #[test]
    fn chain_reference_behavior() {
        // alpha = 0 collapses the constants
        let p = ProblemParams::new(5, 0.0, 4.0, 1.0).unwrap();
        let chain = semicontinuity_chain(&p, 6.25, 10.0).unwrap();
        assert_eq!(chain.tau_alpha, 1.0);
        assert_eq!(chain.eps_alpha, 0.0);
        assert_eq!(chain.k_alpha, 1.0);
        // theta at q = 2** collapses the interpolation exponent
        let p = ProblemParams::new(5, 0.0, 10.0, 1.0).unwrap();
        let chain = semicontinuity_chain(&p, 6.25, 10.0).unwrap();
        assert_eq!(chain.theta_q, 1.0);
        assert_eq!(chain.radial_lower_bound, 10.0);
    }

    #[test]
    fn chain_rejects_negative_lambda_and_bad_q() {
        let p = ProblemParams::new(5, 0.0, 4.0, -1.0).unwrap();
        assert!(semicontinuity_chain(&p, 6.25, 10.0).is_err());
        let p = ProblemParams::new(5, 0.0, 11.0, 1.0).unwrap();
        assert!(semicontinuity_chain(&p, 6.25, 10.0).is_err());
    }

    #[test]
    fn empty_scan_is_empty() {
        let (v, stats) = phase_scan(&[], &budget(), None);
        assert!(v.is_empty());
        assert_eq!(stats, ScanStats::default());
    }

    #[test]
    fn warm_cache_scan_recomputes_nothing() {
        let cache = MemoryCache::default();
        let points = vec![
            ProblemParams::new(5, 3.0, 3.0, 1.0).unwrap(),
            ProblemParams::new(5, 0.0, 3.0, 1.0).unwrap(),
        ];
        let (v1, s1) = phase_scan(&points, &budget(), Some(&cache));
        assert_eq!(s1.computed, 2);
        assert_eq!(s1.cached, 0);
        let (v2, s2) = phase_scan(&points, &budget(), Some(&cache));
        assert_eq!(s2.computed, 0);
        assert_eq!(s2.cached, 2);
        assert_eq!(v1, v2);
    }

    #[test]
    fn scan_records_per_point_errors_and_continues() {
        // lambda at the floor errors out for this point
        let bad = ProblemParams { n: 5, alpha: 0.0, q: 4.0, lambda: -6.25 };
        let good = ProblemParams::new(5, 3.0, 3.0, 1.0).unwrap();
        let (v, stats) = phase_scan(&[bad, good], &budget(), None);
        assert_eq!(stats.errored, 1);
        assert_eq!(stats.computed, 1);
        assert_eq!(v[0].verdict, Verdict::Inconclusive);
        assert!(v[0].note.as_deref().unwrap().starts_with("error:"));
        assert_eq!(v[1].verdict, Verdict::RadialBreaksCertified);
    }

    #[test]
    fn bump_route_fires_monotonically_in_lambda() {
        // once the normalized comparison fires at some coupling, it keeps
        // firing for every larger tested coupling (same bump radii)
        let mut fired_at = None;
        for lambda in [1e2, 1e3, 1e4, 1e5] {
            let p = ProblemParams::new(5, 0.0, 6.0, lambda).unwrap();
            let v = verdict_at(&p, &budget()).unwrap();
            let fired = v.verdict == Verdict::RadialBreaksCertified;
            if fired && fired_at.is_none() {
                fired_at = Some(lambda);
            }
            if let Some(l0) = fired_at {
                assert!(fired, "fired at {l0} but not at {lambda}");
                assert!(v
                    .criteria_fired
                    .iter()
                    .any(|c| c.kind == CriterionKind::UpperBoundVsRadial));
            }
        }
        assert!(fired_at.is_some(), "route never fired in the tested range");
    }

    #[test]
    fn chain_bound_stays_below_direct_value() {
        use crate::emden_fowler::reduce_fourth_order;
        use crate::solvers::solve_fourth;
        let lambda = 1.0;
        let reference = {
            let p = ProblemParams::new(5, 0.0, 10.0, lambda).unwrap();
            solve_fourth(&reduce_fourth_order(&p).unwrap(), &budget()).unwrap()
        };
        for q in [4.0, 7.0, 9.5] {
            let p = ProblemParams::new(5, 0.1, q, lambda).unwrap();
            let c = ClosedFormConstants::for_params(&p).unwrap();
            let chain = semicontinuity_chain(&p, c.gamma_alpha_formula, reference.infimum).unwrap();
            let direct = solve_fourth(&reduce_fourth_order(&p).unwrap(), &budget()).unwrap();
            assert!(
                chain.radial_lower_bound <= direct.infimum,
                "q={q}: bound {} exceeds direct {}",
                chain.radial_lower_bound,
                direct.infimum
            );
        }
    }

    #[test]
    fn csv_schema_is_stable() {
        assert_eq!(
            csv_header(),
            "n,alpha,q,lambda,verdict,criteria,s_upper,s_radial,margin"
        );
        let p = ProblemParams::new(5, 3.0, 3.0, 1.0).unwrap();
        let v = verdict_at(&p, &budget()).unwrap();
        let row = csv_row(&v);
        assert!(row.starts_with("5,"));
        assert!(row.contains("radial_breaks_certified"));
        assert!(row.contains("FS_condition(lambda_large)"));
    }
}
