//! Command front ends: argument resolution, caching, payload assembly.

use std::path::Path;

use serde_json::{json, Map, Value};

use rellich_core::asymptotics::limiting_profile_run;
use rellich_core::constants::{felli_schneider_holds, ClosedFormConstants};
use rellich_core::emden_fowler::{
    reduce_fourth_order, reduce_second_order, write_profile, Grid1D, Profile1D,
};
use rellich_core::gamma::gamma_alpha_numeric;
use rellich_core::params::ProblemParams;
use rellich_core::quadrature::RadialQuadSpec;
use rellich_core::solvers::{solve_fourth, solve_second, MinimizeResult, SolverConfig};
use rellich_core::symmetry::{
    critical_upper_bound, csv_header, csv_row, phase_scan, PhaseVerdict, VerdictCache,
};

use crate::cache::{request_digest, resolve_cache_dir, FileCache};
use crate::json::to_canonical_string;
use crate::{
    BudgetArgs, CliError, ConstantsArgs, GammaArgs, GridArgs, LimitArgs, OutArgs, QuotientArgs,
    ScanArgs, SolveArgs, SolveLowerArgs,
};

fn bits(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

/// Writes the payload to --out (or stdout) and prints a one-line summary.
fn emit(out: &OutArgs, command: &str, digest: &str, cached: bool, payload: &Value) -> Result<(), CliError> {
    let text = to_canonical_string(payload);
    match &out.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, &text)?;
            println!(
                "{command}: wrote {} (digest {}, cached: {cached})",
                path.display(),
                &digest[..16.min(digest.len())]
            );
        }
        None => {
            print!("{text}");
            eprintln!(
                "{command}: digest {}, cached: {cached}",
                &digest[..16.min(digest.len())]
            );
        }
    }
    Ok(())
}

/// Consults the cache, computes on miss, and emits the payload.
fn with_cache(
    out: &OutArgs,
    command: &str,
    digest_parts: &[(&str, String)],
    compute: impl FnOnce() -> Result<Value, CliError>,
) -> Result<Value, CliError> {
    let digest = request_digest(digest_parts);
    let cache = if out.no_cache {
        None
    } else {
        Some(FileCache::new(&resolve_cache_dir(out.cache.as_deref())))
    };
    if let Some(c) = &cache {
        if let Some(hit) = c.get(&digest)? {
            emit(out, command, &digest, true, &hit.payload)?;
            return Ok(hit.payload);
        }
    }
    let payload = compute()?;
    if let Some(c) = &cache {
        c.put(&digest, command, &payload)?;
    }
    emit(out, command, &digest, false, &payload)?;
    Ok(payload)
}

fn grid_from(args: &GridArgs, default: Grid1D) -> Result<Grid1D, CliError> {
    let l = args.l_half.unwrap_or(default.half_length());
    let n = args.n_cells.unwrap_or(default.n_cells());
    Ok(Grid1D::new(l, n)?)
}

fn solver_config(grid: Grid1D, budget: &BudgetArgs) -> SolverConfig {
    SolverConfig {
        grid: Some(grid),
        el_tolerance: budget.el_tol,
        max_iterations: budget.max_iters,
        restarts: budget.restarts,
        seed: budget.seed,
        ..Default::default()
    }
}

fn budget_digest_parts(grid: Grid1D, budget: &BudgetArgs) -> Vec<(&'static str, String)> {
    vec![
        ("L", bits(grid.half_length())),
        ("N", grid.n_cells().to_string()),
        ("el_tol", bits(budget.el_tol)),
        ("max_iters", budget.max_iters.to_string()),
        ("restarts", budget.restarts.to_string()),
        ("seed", budget.seed.to_string()),
    ]
}

fn minimize_payload(p: &ProblemParams, r: &MinimizeResult) -> Value {
    json!({
        "n": p.n,
        "alpha": p.alpha,
        "q": p.q,
        "lambda": p.lambda,
        "grid_half_length": r.profile.grid().half_length(),
        "grid_cells": r.profile.grid().n_cells(),
        "infimum": r.infimum,
        "infimum_unscaled": r.infimum_unscaled,
        "el_residual": r.el_residual,
        "iterations": r.iterations,
        "converged": r.converged,
        "tau_scale": r.tau_scale,
        "restart_infima": r.restart_infima,
    })
}

fn write_profile_file(
    path: &Path,
    profile: &Profile1D,
    p: &ProblemParams,
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_profile(&mut f, profile, p)?;
    Ok(())
}

// ---------------------------------------------------------------------

pub fn cmd_constants(args: &ConstantsArgs) -> Result<(), CliError> {
    let q_probe = args.q.unwrap_or(3.0);
    let p = ProblemParams::new(args.n, args.alpha, q_probe, args.lambda)?;
    let c = ClosedFormConstants::for_params(&p)?;
    let d = p.derived_exponents();
    let mut m = Map::new();
    m.insert("n".into(), json!(p.n));
    m.insert("alpha".into(), json!(p.alpha));
    m.insert("lambda".into(), json!(p.lambda));
    m.insert("two_star".into(), json!(d.two_star));
    m.insert("two_double_star".into(), json!(d.two_double_star));
    m.insert("sigma".into(), json!(d.sigma));
    m.insert("delta_alpha".into(), json!(c.delta_alpha));
    m.insert("delta_tilde_alpha".into(), json!(c.delta_tilde_alpha));
    m.insert("h_tilde_alpha".into(), json!(c.h_tilde_alpha));
    m.insert("gamma_alpha_formula".into(), json!(c.gamma_alpha_formula));
    m.insert("gamma_formula_valid".into(), json!(c.gamma_formula_valid));
    m.insert("omega_n".into(), json!(c.omega_n));
    m.insert("a_lambda".into(), json!(c.a_lambda));
    m.insert("b_lambda".into(), json!(c.b_lambda));
    m.insert("cap_a_alpha".into(), json!(c.cap_a_alpha));
    m.insert("cap_b_alpha".into(), json!(c.cap_b_alpha));
    m.insert("lambda_alpha".into(), json!(c.lambda_alpha));
    if let Some(q) = args.q {
        m.insert("q".into(), json!(q));
        m.insert("beta".into(), json!(d.beta));
        let flags = p.q_regime();
        m.insert("q_subcritical".into(), json!(flags.q_subcritical));
        m.insert("q_critical".into(), json!(flags.q_critical));
        m.insert("q_supercritical_full".into(), json!(flags.q_supercritical_full));
        m.insert(
            "q_below_first_order_critical".into(),
            json!(flags.q_below_first_order_critical),
        );
        if p.q <= p.two_star() {
            m.insert("felli_schneider".into(), json!(felli_schneider_holds(&p)?));
        }
    }
    let payload = Value::Object(m);
    let digest = request_digest(&[
        ("cmd", "constants".into()),
        ("n", args.n.to_string()),
        ("alpha", bits(args.alpha)),
        ("q", args.q.map(bits).unwrap_or_default()),
        ("lambda", bits(args.lambda)),
    ]);
    emit(&args.out, "constants", &digest, false, &payload)
}

pub fn cmd_gamma(args: &GammaArgs) -> Result<(), CliError> {
    let p = ProblemParams::new(args.n, args.alpha, 3.0, 0.0)?;
    let scan = gamma_alpha_numeric(&p, args.mode_cap, args.tol)?;
    let payload = json!({
        "n": args.n,
        "alpha": args.alpha,
        "mode_cap": args.mode_cap,
        "tolerance": args.tol,
        "gamma_numeric": scan.infimum,
        "attaining_mode": scan.attaining_mode,
        "attaining_xi_sq": scan.attaining_xi_sq,
        "gamma_radial_mode": scan.mode0_value,
        "gamma_formula": scan.formula_value,
        "formula_valid": scan.formula_valid,
        "formula_agrees": scan.formula_agrees,
        "cap_warning": scan.cap_warning,
    });
    let digest = request_digest(&[
        ("cmd", "gamma".into()),
        ("n", args.n.to_string()),
        ("alpha", bits(args.alpha)),
        ("mode_cap", args.mode_cap.to_string()),
        ("tol", bits(args.tol)),
    ]);
    emit(&args.out, "gamma", &digest, false, &payload)
}

pub fn cmd_solve_radial(args: &SolveArgs) -> Result<(), CliError> {
    let p = ProblemParams::new(args.n, args.alpha, args.q, args.lambda)?;
    let form = reduce_fourth_order(&p)?;
    let grid = grid_from(&args.grid, form.coeffs().default_grid())?;
    let cfg = solver_config(grid, &args.budget);

    let mut parts = vec![
        ("cmd", "solve-radial".to_string()),
        ("n", p.n.to_string()),
        ("alpha", bits(p.alpha)),
        ("q", bits(p.q)),
        ("lambda", bits(p.lambda)),
    ];
    parts.extend(budget_digest_parts(grid, &args.budget));

    // profiles only land on disk for fresh solves; cached payloads carry
    // the summary alone
    let mut solved: Option<MinimizeResult> = None;
    let payload = with_cache(&args.out, "solve-radial", &parts, || {
        let r = solve_fourth(&form, &cfg)?;
        let payload = minimize_payload(&p, &r);
        solved = Some(r);
        Ok(payload)
    })?;
    if let (Some(path), Some(r)) = (&args.profile_out, &solved) {
        write_profile_file(path, &r.profile, &p)?;
    }
    let converged = payload
        .get("converged")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);
    if !converged {
        return Err(CliError::NonConvergence(
            "radial solve did not meet the residual tolerance".into(),
        ));
    }
    Ok(())
}

pub fn cmd_solve_lower(args: &SolveLowerArgs) -> Result<(), CliError> {
    let p = ProblemParams::new(args.n, args.alpha, args.q, 0.0)?;
    let form = reduce_second_order(&p)?;
    let grid = grid_from(&args.grid, form.coeffs().default_grid())?;
    let cfg = solver_config(grid, &args.budget);

    let mut parts = vec![
        ("cmd", "solve-lower".to_string()),
        ("n", p.n.to_string()),
        ("alpha", bits(p.alpha)),
        ("q", bits(p.q)),
    ];
    parts.extend(budget_digest_parts(grid, &args.budget));

    let mut solved: Option<MinimizeResult> = None;
    let payload = with_cache(&args.out, "solve-lower", &parts, || {
        let r = solve_second(&form, &cfg)?;
        let payload = minimize_payload(&p, &r);
        solved = Some(r);
        Ok(payload)
    })?;
    if let (Some(path), Some(r)) = (&args.profile_out, &solved) {
        write_profile_file(path, &r.profile, &p)?;
    }
    let converged = payload
        .get("converged")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);
    if !converged {
        return Err(CliError::NonConvergence(
            "lower-order solve did not meet the residual tolerance".into(),
        ));
    }
    Ok(())
}

pub fn cmd_quotient_u(args: &QuotientArgs) -> Result<(), CliError> {
    let n = args.n;
    let p = ProblemParams::new(
        n,
        args.alpha,
        2.0 * n as f64 / (n as f64 - 4.0),
        args.lambda,
    )?;
    let parts = vec![
        ("cmd", "quotient-u".to_string()),
        ("n", n.to_string()),
        ("alpha", bits(args.alpha)),
        ("lambda", bits(args.lambda)),
    ];
    with_cache(&args.out, "quotient-u", &parts, || {
        let cb = critical_upper_bound(&p, &RadialQuadSpec::default())?;
        let c = ClosedFormConstants::for_params(&p)?;
        Ok(json!({
            "n": n,
            "alpha": p.alpha,
            "q": p.q,
            "lambda": p.lambda,
            "s_upper_bound": cb.bound,
            "lambda_alpha": cb.lambda_alpha,
            "strictly_below_unweighted": cb.strictly_below_unweighted,
            "cap_a_alpha": c.cap_a_alpha,
            "cap_b_alpha": c.cap_b_alpha,
        }))
    })?;
    Ok(())
}

// ---------------------------------------------------------------------
// phase scan
// ---------------------------------------------------------------------

/// Inclusive a:b:step range; step must be positive.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::BadArgs(format!(
            "range must be start:end:step (got {spec})"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::BadArgs(format!("bad range start: {e}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::BadArgs(format!("bad range end: {e}")))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|e| CliError::BadArgs(format!("bad range step: {e}")))?;
    if !(step > 0.0) {
        return Err(CliError::BadArgs("range step must be positive".into()));
    }
    let mut out = Vec::new();
    let count = ((b - a) / step + 1e-9).floor() as usize;
    for k in 0..=count {
        out.push(a + k as f64 * step);
    }
    Ok(out)
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::BadArgs(format!("bad list entry {tok}: {e}")))
        })
        .collect()
}

fn values_from(range: Option<&str>, list: Option<&str>, what: &str) -> Result<Vec<f64>, CliError> {
    match (range, list) {
        (Some(r), None) => parse_range(r),
        (None, Some(l)) => parse_list(l),
        (None, None) => Err(CliError::BadArgs(format!(
            "{what} needs either a range or a list"
        ))),
        (Some(_), Some(_)) => Err(CliError::BadArgs(format!(
            "{what}: give a range or a list, not both"
        ))),
    }
}

/// Directory-backed verdict cache used by scans; corruption is recorded
/// and re-raised after the scan.
struct ScanCache {
    cache: FileCache,
    corruption: std::sync::Mutex<Option<String>>,
}

impl VerdictCache for ScanCache {
    fn get(&self, key: &str) -> Option<PhaseVerdict> {
        let digest = request_digest(&[("scan-point", key.to_string())]);
        match self.cache.get(&digest) {
            Ok(hit) => hit.and_then(|h| serde_json::from_value(h.payload).ok()),
            Err(CliError::CacheCorruption(msg)) => {
                self.corruption.lock().unwrap().get_or_insert(msg);
                None
            }
            Err(_) => None,
        }
    }
    fn put(&self, key: &str, verdict: &PhaseVerdict) {
        let digest = request_digest(&[("scan-point", key.to_string())]);
        if let Ok(v) = serde_json::to_value(verdict) {
            let _ = self.cache.put(&digest, "phase-scan-point", &v);
        }
    }
}

pub fn cmd_phase_scan(args: &ScanArgs) -> Result<(), CliError> {
    let alphas = values_from(args.alpha_range.as_deref(), args.alpha_list.as_deref(), "alpha")?;
    let qs = values_from(args.q_range.as_deref(), args.q_list.as_deref(), "q")?;
    let lambdas =
        values_from(args.lambda_range.as_deref(), args.lambda_list.as_deref(), "lambda")?;

    let mut points = Vec::new();
    for &alpha in &alphas {
        for &q in &qs {
            for &lambda in &lambdas {
                points.push(ProblemParams::new(args.n, alpha, q, lambda)?);
            }
        }
    }

    let budget = SolverConfig {
        grid: match (args.grid.l_half, args.grid.n_cells) {
            (None, None) => None,
            (l, n) => Some(Grid1D::new(l.unwrap_or(40.0), n.unwrap_or(4096))?),
        },
        el_tolerance: args.budget.el_tol,
        max_iterations: args.budget.max_iters,
        restarts: args.budget.restarts,
        seed: args.budget.seed,
        ..Default::default()
    };

    let scan_cache = if args.out.no_cache {
        None
    } else {
        Some(ScanCache {
            cache: FileCache::new(&resolve_cache_dir(args.out.cache.as_deref()).join("points")),
            corruption: std::sync::Mutex::new(None),
        })
    };

    let (verdicts, stats) = phase_scan(
        &points,
        &budget,
        scan_cache.as_ref().map(|c| c as &dyn VerdictCache),
    );
    if let Some(c) = &scan_cache {
        if let Some(msg) = c.corruption.lock().unwrap().take() {
            return Err(CliError::CacheCorruption(msg));
        }
    }

    let text = match args.format.as_str() {
        "csv" => {
            let mut s = String::from(csv_header());
            s.push('\n');
            for v in &verdicts {
                s.push_str(&csv_row(v));
                s.push('\n');
            }
            s
        }
        "json" => {
            let rows: Vec<Value> = verdicts
                .iter()
                .map(|v| {
                    json!({
                        "n": v.params.n,
                        "alpha": v.params.alpha,
                        "q": v.params.q,
                        "lambda": v.params.lambda,
                        "verdict": v.verdict.as_str(),
                        "criteria": v.criteria_fired.iter().map(|c| json!({
                            "kind": c.kind.as_str(),
                            "margin": c.margin,
                            "tolerance": c.tolerance,
                            "lambda_large_only": c.lambda_large_only,
                        })).collect::<Vec<_>>(),
                        "s_upper": v.s_upper_bound,
                        "s_radial": v.s_radial,
                        "margin": v.margin,
                        "note": v.note,
                    })
                })
                .collect();
            to_canonical_string(&json!({ "points": rows }))
        }
        other => {
            return Err(CliError::BadArgs(format!(
                "unknown format {other} (expected csv or json)"
            )))
        }
    };

    match &args.out.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, &text)?;
            if args.gnuplot {
                write_scan_gnuplot(path, &verdicts)?;
            }
            println!(
                "phase-scan: {} points ({} computed, {} cached, {} errored) -> {}",
                verdicts.len(),
                stats.computed,
                stats.cached,
                stats.errored,
                path.display()
            );
        }
        None => {
            print!("{text}");
            eprintln!(
                "phase-scan: {} points ({} computed, {} cached, {} errored)",
                verdicts.len(),
                stats.computed,
                stats.cached,
                stats.errored
            );
        }
    }
    Ok(())
}

fn write_scan_gnuplot(csv_path: &Path, verdicts: &[PhaseVerdict]) -> Result<(), CliError> {
    let stem = csv_path.with_extension("");
    let dat = stem.with_extension("gpdat");
    let gp = stem.with_extension("gp");
    let mut data = String::from("# alpha q lambda verdict_code margin\n");
    for v in verdicts {
        let code = match v.verdict.as_str() {
            "radial_breaks_certified" => 2,
            "no_breaking_evidence" => 1,
            _ => 0,
        };
        data.push_str(&format!(
            "{:.16e} {:.16e} {:.16e} {code} {:.16e}\n",
            v.params.alpha,
            v.params.q,
            v.params.lambda,
            v.margin.unwrap_or(f64::NAN)
        ));
    }
    std::fs::write(&dat, data)?;
    let script = format!(
        "set title 'symmetry-breaking verdicts'\n\
         set xlabel 'alpha'\nset ylabel 'q'\n\
         set palette defined (0 'gray', 1 'blue', 2 'red')\n\
         set cbrange [0:2]\nunset colorbox\n\
         plot '{}' using 1:2:4 with points pt 7 ps 1.5 palette title ''\n",
        dat.display()
    );
    std::fs::write(&gp, script)?;
    Ok(())
}

// ---------------------------------------------------------------------
// limiting profile
// ---------------------------------------------------------------------

pub fn cmd_limit_profile(args: &LimitArgs) -> Result<(), CliError> {
    let p = ProblemParams::new(args.n, args.alpha, args.q, 0.0)?;
    let eps: Vec<f64> = parse_list(&args.eps_list)?;
    let second = reduce_second_order(&p)?;
    let grid = grid_from(&args.grid, second.coeffs().default_grid())?;
    let cfg = solver_config(grid, &args.budget);

    let mut parts = vec![
        ("cmd", "limit-profile".to_string()),
        ("n", p.n.to_string()),
        ("alpha", bits(p.alpha)),
        ("q", bits(p.q)),
        (
            "eps",
            eps.iter().map(|e| bits(*e)).collect::<Vec<_>>().join(","),
        ),
    ];
    parts.extend(budget_digest_parts(grid, &args.budget));

    let mut run_opt = None;
    let payload = with_cache(&args.out, "limit-profile", &parts, || {
        let run = limiting_profile_run(&p, &eps, &cfg)?;
        let records: Vec<Value> = run
            .records
            .iter()
            .map(|r| {
                json!({
                    "eps": r.eps,
                    "s_tilde": r.s_tilde,
                    "gap_to_limit": r.s_tilde - run.limit.infimum,
                    "h1_distance_to_limit": r.h1_distance_to_limit,
                    "converged": r.converged,
                    "el_residual": r.el_residual,
                })
            })
            .collect();
        let payload = json!({
            "n": p.n,
            "alpha": p.alpha,
            "q": p.q,
            "s_tilde_limit": run.limit.infimum,
            "degraded": run.degraded,
            "records": records,
        });
        run_opt = Some(run);
        Ok(payload)
    })?;

    if let (Some(dir), Some(run)) = (&args.profile_dir, &run_opt) {
        std::fs::create_dir_all(dir)?;
        write_profile_file(&dir.join("limit.txt"), &run.limit.profile, &p)?;
        for (i, r) in run.records.iter().enumerate() {
            write_profile_file(&dir.join(format!("eps_{i:03}.txt")), &r.profile, &p)?;
        }
        if args.gnuplot {
            let gp = dir.join("profiles.gp");
            let mut script = String::from(
                "set xlabel 't'\nset ylabel 'w(t)'\nset key outside\nplot \\\n",
            );
            script.push_str(&format!(
                "  'limit.txt' using 1:2 with lines lw 2 title 'limit', \\\n"
            ));
            for (i, r) in run.records.iter().enumerate() {
                script.push_str(&format!(
                    "  'eps_{i:03}.txt' using 1:2 with lines title 'eps={}'{}\n",
                    r.eps,
                    if i + 1 < run.records.len() { ", \\" } else { "" }
                ));
            }
            std::fs::write(gp, script)?;
        }
    }

    let degraded = payload
        .get("degraded")
        .and_then(|v| v.as_bool())
        .unwrap_or(true);
    if degraded {
        return Err(CliError::NonConvergence(
            "one or more continuation solves did not converge".into(),
        ));
    }
    Ok(())
}
