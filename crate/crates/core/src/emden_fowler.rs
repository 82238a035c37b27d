//! Log-radial change of variables and the discrete 1D infrastructure.
//!
//! Radial functions u on R^n map to profiles w on the line through
//! u(x) = |x|^sigma w(-log|x|) with sigma = (4-n-alpha)/2. The weighted
//! n-dimensional quadratic forms become autonomous 1D forms; everything
//! downstream (solvers, continuation, verdicts) works on the truncated
//! symmetric grid defined here.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::params::{omega_n, ProblemParams};

/// Uniform symmetric grid t_i = -L + i h, i = 0..=N, h = 2L/N.
///
/// Profiles are clamped to zero outside [-L, L]; the two boundary nodes
/// are pinned to zero as the discrete decay surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_length: f64,
    n_cells: usize,
}

impl Grid1D {
    /// `n_cells` must be even and at least 64; `half_length` positive.
    pub fn new(half_length: f64, n_cells: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidParams("grid half-length must be positive".into()));
        }
        if n_cells < 64 || n_cells % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "grid point count must be even and >= 64 (got {n_cells})"
            )));
        }
        Ok(Grid1D { half_length, n_cells })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Number of cells N; there are N+1 nodes.
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }

    /// Same spacing class, twice the cells.
    pub fn refined(&self) -> Grid1D {
        Grid1D { half_length: self.half_length, n_cells: self.n_cells * 2 }
    }
}

/// A sampled profile w on a [`Grid1D`], boundary nodes pinned to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Profile1D {
    /// Wraps node values; the two boundary entries are clamped to zero.
    pub fn new(grid: Grid1D, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidParams(format!(
                "profile needs {} node values (got {})",
                grid.n_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("profile values must be finite".into()));
        }
        values[0] = 0.0;
        let last = grid.n_cells;
        values[last] = 0.0;
        Ok(Profile1D { grid, values })
    }

    /// Samples a function of t on the grid.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Profile1D::new(grid, values)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Discrete L^q norm: (h sum |w_i|^q)^{1/q}.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let h = self.grid.spacing();
        (h * self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
    }

    /// Rescales to unit discrete L^q norm.
    pub fn normalize_lq(&mut self, q: f64) -> Result<()> {
        let norm = self.lq_norm(q);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroDenominator);
        }
        for v in &mut self.values {
            *v /= norm;
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Index of the largest |w|.
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Translates by a whole number of cells so the peak of |w| sits at
    /// t = 0, dropping content shifted past the boundary. Also flips the
    /// sign so the peak value is positive.
    pub fn center_and_orient(&mut self) {
        let mid = self.grid.n_cells / 2;
        let peak = self.argmax_abs();
        let shift = mid as isize - peak as isize;
        self.translate_cells(shift);
        if self.values[self.grid.n_cells / 2] < 0.0 {
            self.scale(-1.0);
        }
    }

    /// Shifts node values by `k` cells (zero fill).
    pub fn translate_cells(&mut self, k: isize) {
        let n = self.values.len() as isize;
        let mut out = vec![0.0; self.values.len()];
        for i in 0..n {
            let src = i - k;
            if src >= 0 && src < n {
                out[i as usize] = self.values[src as usize];
            }
        }
        out[0] = 0.0;
        out[(n - 1) as usize] = 0.0;
        self.values = out;
    }

    /// Discrete H^1 distance sqrt(h sum (d(w-v))^2 + h sum (w-v)^2) using
    /// forward differences; panics unless the grids match.
    pub fn h1_distance(&self, other: &Profile1D) -> f64 {
        assert_eq!(self.grid, other.grid, "grids must match");
        let h = self.grid.spacing();
        let d: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        let mut grad = 0.0;
        for i in 0..d.len() - 1 {
            let g = (d[i + 1] - d[i]) / h;
            grad += g * g;
        }
        let mass: f64 = d.iter().map(|x| x * x).sum();
        (h * (grad + mass)).sqrt()
    }

    /// Discrete H^1 norm of the profile itself.
    pub fn h1_norm(&self) -> f64 {
        let h = self.grid.spacing();
        let mut grad = 0.0;
        for i in 0..self.values.len() - 1 {
            let g = (self.values[i + 1] - self.values[i]) / h;
            grad += g * g;
        }
        let mass: f64 = self.values.iter().map(|x| x * x).sum();
        (h * (grad + mass)).sqrt()
    }
}

/// Coefficients of the 1D energy density c4 w''^2 + c2 w'^2 + c0 w^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeffs {
    pub c4: f64,
    pub c2: f64,
    pub c0: f64,
}

impl QuadCoeffs {
    /// Slowest decay rate among the characteristic roots of the linear
    /// part c4 k^4 - c2 k^2 + c0 (k the decay exponent of e^{-kt} tails).
    pub fn min_decay_rate(&self) -> f64 {
        if self.c4 == 0.0 {
            return (self.c0 / self.c2).sqrt();
        }
        let a = self.c2 / (2.0 * self.c4);
        let b = self.c0 / self.c4;
        let disc = a * a - b;
        if disc >= 0.0 {
            (a - disc.sqrt()).max(0.0).sqrt()
        } else {
            // complex pair k^2 = a +/- i sqrt(b-a^2); Re k = sqrt((|k^2|+a)/2)
            ((b.sqrt() + a) / 2.0).sqrt()
        }
    }

    /// Default grid: half-length max(20, 40/decay), 4096 cells.
    pub fn default_grid(&self) -> Grid1D {
        let decay = self.min_decay_rate();
        let half = if decay > 0.0 { (40.0 / decay).max(20.0) } else { 20.0 };
        Grid1D::new(half, 4096).expect("default grid is valid")
    }
}

/// A reduced 1D quotient: energy form, exponent q, and the sphere-measure
/// factor relating the 1D infimum to the n-dimensional one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReducedForm {
    /// (w''^2 + 2a w'^2 + b w^2) / (int |w|^q)^{2/q}, admissible iff a,b > 0.
    Fourth { a: f64, b: f64, q: f64, sphere_factor: f64 },
    /// (w'^2 + h w^2) / (int |w|^q)^{2/q}, admissible iff h > 0.
    Second { h: f64, q: f64, sphere_factor: f64 },
}

impl ReducedForm {
    pub fn q(&self) -> f64 {
        match self {
            ReducedForm::Fourth { q, .. } | ReducedForm::Second { q, .. } => *q,
        }
    }

    pub fn sphere_factor(&self) -> f64 {
        match self {
            ReducedForm::Fourth { sphere_factor, .. }
            | ReducedForm::Second { sphere_factor, .. } => *sphere_factor,
        }
    }

    pub fn coeffs(&self) -> QuadCoeffs {
        match self {
            ReducedForm::Fourth { a, b, .. } => QuadCoeffs { c4: 1.0, c2: 2.0 * a, c0: *b },
            ReducedForm::Second { h, .. } => QuadCoeffs { c4: 0.0, c2: 1.0, c0: *h },
        }
    }

    /// Generic fourth-order form with caller-supplied coefficients; no
    /// positivity claim is attached when a^2 < b.
    pub fn fourth_raw(a: f64, b: f64, q: f64, sphere_factor: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InadmissibleForm(format!(
                "fourth-order coefficients must be positive (a = {a}, b = {b})"
            )));
        }
        if !(q > 2.0) {
            return Err(Error::InadmissibleForm(format!("q must exceed 2 (got {q})")));
        }
        Ok(ReducedForm::Fourth { a, b, q, sphere_factor })
    }

    pub fn second_raw(h: f64, q: f64, sphere_factor: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InadmissibleForm(format!(
                "second-order coefficient must be positive (h = {h})"
            )));
        }
        if !(q > 2.0) {
            return Err(Error::InadmissibleForm(format!("q must exceed 2 (got {q})")));
        }
        Ok(ReducedForm::Second { h, q, sphere_factor })
    }
}

/// Builds the fourth-order reduced form of the radial problem.
/// Requires lambda > -(n-alpha)^2/4 so that both coefficients are positive.
pub fn reduce_fourth_order(p: &ProblemParams) -> Result<ReducedForm> {
    p.validate()?;
    let floor = p.radial_lambda_floor();
    if !(p.lambda > floor) {
        return Err(Error::InadmissibleForm(format!(
            "lambda must exceed -(n-alpha)^2/4 = {floor} (got {}); the zeroth-order \
             coefficient vanishes or turns negative",
            p.lambda
        )));
    }
    let ar = exact::rat(p.alpha);
    let lr = exact::rat(p.lambda);
    let a = exact::to_f64(&exact::a_lambda(p.n, &ar, &lr));
    let b = exact::to_f64(&exact::b_lambda(p.n, &ar, &lr));
    let q = p.q;
    ReducedForm::fourth_raw(a, b, q, omega_n(p.n).powf((q - 2.0) / q))
}

/// Builds the second-order reduced form of the lower-order radial problem.
pub fn reduce_second_order(p: &ProblemParams) -> Result<ReducedForm> {
    p.validate()?;
    let h = exact::to_f64(&exact::h_tilde_alpha(p.n, &exact::rat(p.alpha)));
    let q = p.q;
    ReducedForm::second_raw(h, q, omega_n(p.n).powf(1.0 - 2.0 / q))
}

/// Pulls a radial sample u(r_i), r_i = e^{-t_i}, back to the profile
/// w_i = r_i^{-sigma} u(r_i).
pub fn ef_transform_radial(u: &[f64], grid: Grid1D, p: &ProblemParams) -> Result<Profile1D> {
    p.validate()?;
    if u.len() != grid.n_nodes() {
        return Err(Error::InvalidParams(format!(
            "expected {} radial samples (got {})",
            grid.n_nodes(),
            u.len()
        )));
    }
    let sigma = p.derived_exponents().sigma;
    let values = grid
        .nodes()
        .zip(u)
        .map(|(t, &ui)| (sigma * t).exp() * ui)
        .collect();
    Profile1D::new(grid, values)
}

/// Pushes a profile forward to radial samples u(r_i) = r_i^{sigma} w_i.
pub fn ef_inverse_radial(w: &Profile1D, p: &ProblemParams) -> Vec<f64> {
    let sigma = p.derived_exponents().sigma;
    w.grid()
        .nodes()
        .zip(w.values())
        .map(|(t, &wi)| (-sigma * t).exp() * wi)
        .collect()
}

/// Discrete energy h * (c4 sum (Tw)^2 + c2 sum fwd-diff^2 + c0 sum w^2)
/// with T the central second difference on interior nodes (zero clamp).
///
/// The forward-difference realization of the gradient term makes the
/// first variation of this energy exactly the pentadiagonal operator
/// used by the Euler-Lagrange residual.
pub fn discrete_energy(coeffs: QuadCoeffs, w: &Profile1D) -> f64 {
    let h = w.grid().spacing();
    let v = w.values();
    let n = v.len();
    let mut e4 = 0.0;
    if coeffs.c4 != 0.0 {
        for i in 1..n - 1 {
            let t = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h);
            e4 += t * t;
        }
    }
    let mut e2 = 0.0;
    for i in 0..n - 1 {
        let d = (v[i + 1] - v[i]) / h;
        e2 += d * d;
    }
    let e0: f64 = v.iter().map(|x| x * x).sum();
    h * (coeffs.c4 * e4 + coeffs.c2 * e2 + coeffs.c0 * e0)
}

/// Discrete L^q mass h sum |w_i|^q.
pub fn discrete_lq_mass(w: &Profile1D, q: f64) -> f64 {
    let h = w.grid().spacing();
    h * w.values().iter().map(|v| v.abs().powf(q)).sum::<f64>()
}

/// The reduced quotient sphere_factor * energy / mass^{2/q}.
pub fn discrete_quotient(form: &ReducedForm, w: &Profile1D) -> Result<f64> {
    let q = form.q();
    let mass = discrete_lq_mass(w, q);
    if mass <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(form.sphere_factor() * discrete_energy(form.coeffs(), w) / mass.powf(2.0 / q))
}

/// Writes a profile as two-column text with a single header line carrying
/// the grid and the generating parameters. 17 significant digits, so the
/// round-trip is bit-exact.
pub fn write_profile(
    out: &mut impl Write,
    w: &Profile1D,
    p: &ProblemParams,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# profile L={:.16e} N={} n={} alpha={:.16e} q={:.16e} lambda={:.16e}",
        w.grid().half_length(),
        w.grid().n_cells(),
        p.n,
        p.alpha,
        p.q,
        p.lambda
    )?;
    for (t, v) in w.grid().nodes().zip(w.values()) {
        writeln!(out, "{t:.16e} {v:.16e}")?;
    }
    Ok(())
}

/// Reads back a profile written by [`write_profile`].
pub fn read_profile(input: &mut impl BufRead) -> Result<(Profile1D, ProblemParams)> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let fields: std::collections::HashMap<&str, &str> = header
        .trim()
        .trim_start_matches('#')
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect();
    let get = |k: &str| -> Result<&str> {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::Parse(format!("missing header field {k}")))
    };
    let parse_f = |k: &str| -> Result<f64> {
        get(k)?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad {k}: {e}")))
    };
    let half_length = parse_f("L")?;
    let n_cells: usize = get("N")?
        .parse()
        .map_err(|e| Error::Parse(format!("bad N: {e}")))?;
    let n: u32 = get("n")?
        .parse()
        .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
    let p = ProblemParams::new(n, parse_f("alpha")?, parse_f("q")?, parse_f("lambda")?)?;
    let grid = Grid1D::new(half_length, n_cells)?;
    let mut values = Vec::with_capacity(grid.n_nodes());
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let _t = it.next();
        let v = it
            .next()
            .ok_or_else(|| Error::Parse("expected two columns".into()))?;
        values.push(
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value: {e}")))?,
        );
    }
    Ok((Profile1D::new(grid, values)?, p))
}
