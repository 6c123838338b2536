//! Built-in oracle suite behind the `verify` command.
//!
//! Every check compares a measured discrepancy with a tolerance multiplied by
//! [`VerifyOptions::tolerance_scale`]; a scale of zero makes any inexact check fail.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use crate::adiabatic::{
    adiabatic_retardation_force, series_term_nested, NestedQuadrature, Trajectory,
};
use crate::dressing::{
    force_mode_sum, momentum_expectation, momentum_from_generating_function, run_recursion,
    second_order_a, PathSpec,
};
use crate::error::Result;
use crate::model::{AtomParams, ModeGrid, ReleaseDistance};
use crate::quadrature::QuadratureConfig;
use crate::steady::{
    retardation_force_deriv, stationary_potential, stationary_retardation_force,
    stationary_retardation_force_k, stationary_total_force,
};
use crate::transient::{switch_on_force, transient_force};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Convergence orders across successive step halvings of the recursion.
    pub recursion_orders: Vec<f64>,
    /// Measurements reported without a pass/fail verdict.
    pub notes: Vec<String>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<32} {:>7.2}s  {}", c.name, c.seconds, c.detail)?;
        }
        for n in &self.notes {
            writeln!(f, "note  {n}")?;
        }
        let passed = self.checks.len() - self.failures();
        write!(f, "{passed}/{} checks passed", self.checks.len())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit() -> AtomParams {
    AtomParams::new(1.0, 1.0, 1.0).expect("unit parameters are valid")
}

/// Worst value of `measure` with its tolerance, as `(passed, detail)`.
fn within(worst: f64, tol: f64, scale: f64, what: &str) -> (bool, String) {
    (worst <= tol * scale, format!("{what} {worst:.3e} (tol {:.1e})", tol * scale))
}

fn far_field(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let r = 100.0 * p.c / p.omega0;
    let u = stationary_potential(r, &p)?.u;
    let want = -3.0 * p.alpha0 * p.c / (8.0 * PI);
    Ok(within(rel(r.powi(4) * u, want), 0.01, scale, "rel dev of r⁴U"))
}

fn near_field(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let r = 0.01 * p.c / p.omega0;
    let u = stationary_potential(r, &p)?.u;
    let want = -p.alpha0 * p.omega0 / 8.0;
    Ok(within(rel(r.powi(3) * u, want), 0.01, scale, "rel dev of r³U"))
}

fn representations(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let r = 0.05 * 1000f64.powf(i as f64 / 19.0);
        let x = stationary_retardation_force(r, &p)?.f_z;
        let k = stationary_retardation_force_k(r, &p, &cfg)?.f_z;
        worst = worst.max(rel(k, x));
    }
    Ok(within(worst, 1e-6, scale, "max rel diff x/k form"))
}

fn factor_two(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let mut worst = 0.0f64;
    for r in [0.1, 1.0, 10.0] {
        let a = adiabatic_retardation_force(r, ReleaseDistance::Infinite, &p)?.f_z;
        let s = stationary_retardation_force(r, &p)?.f_z;
        worst = worst.max((a / s - 2.0).abs());
    }
    Ok(within(worst, 1e-9, scale, "max |ratio − 2|"))
}

fn gradient_law(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let mut worst = 0.0f64;
    for r in [0.03, 0.5, 4.0, 30.0] {
        let u = |x: f64| stationary_potential(x, &p).map(|v| v.u);
        let d = |h: f64| -> Result<f64> { Ok((u(r + h)? - u(r - h)?) / (2.0 * h)) };
        let h = 1e-3 * r;
        let grad = (4.0 * d(h / 2.0)? - d(h)?) / 3.0;
        worst = worst.max(rel(-grad, stationary_total_force(r, &p)?.f_z));
    }
    Ok(within(worst, 1e-8, scale, "max rel dev of −∂U/∂r"))
}

/// Monotone trajectories used by the nested-series checks.
pub fn reference_trajectories() -> Result<Vec<Trajectory>> {
    let tt = 10.0;
    let inward = Trajectory::from_fn(
        0.0,
        tt,
        2001,
        |t| 1.5 + 0.5 * (PI * t / tt).cos(),
        |t| -0.5 * PI / tt * (PI * t / tt).sin(),
    )?;
    // smoothstep from 0.5 to 3
    let outward = Trajectory::from_fn(
        0.0,
        tt,
        2001,
        |t| {
            let x = t / tt;
            0.5 + 2.5 * x * x * (3.0 - 2.0 * x)
        },
        |t| {
            let x = t / tt;
            15.0 * x * (1.0 - x) / tt
        },
    )?;
    Ok(vec![inward, outward])
}

/// `2⁻ⁿ [F(R) − Σ_{j<n} F⁽ʲ⁾(R₀)(R−R₀)ʲ/j!]`, the exact value of the n-fold term.
pub fn nested_term_exact(n: usize, r0: f64, r: f64, params: &AtomParams) -> Result<f64> {
    let mut taylor = 0.0;
    let mut fact = 1.0;
    for j in 0..n {
        if j > 0 {
            fact *= j as f64;
        }
        taylor += retardation_force_deriv(r0, j, params)?.f_z * (r - r0).powi(j as i32) / fact;
    }
    let f = stationary_retardation_force(r, params)?.f_z;
    Ok((f - taylor) / 2f64.powi(n as i32))
}

fn nested_series(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let mut worst = 0.0f64;
    for traj in reference_trajectories()? {
        for n in 1..=3 {
            let got = series_term_nested(n, &traj, &p, NestedQuadrature::default())?;
            let want = nested_term_exact(n, traj.r_start(), traj.r_end(), &p)?;
            worst = worst.max(rel(got, want));
        }
    }
    Ok(within(worst, 1e-4, scale, "max rel dev, Taylor-corrected terms n≤3"))
}

/// Relative gap between the nested terms and the uncorrected `2⁻ⁿ ΔF`.
pub fn uncorrected_identity_gaps(traj: &Trajectory, params: &AtomParams) -> Result<Vec<f64>> {
    let f = |r| stationary_retardation_force(r, params).map(|v| v.f_z);
    let delta = f(traj.r_end())? - f(traj.r_start())?;
    (1..=3)
        .map(|n| {
            let got = series_term_nested(n, traj, params, NestedQuadrature::default())?;
            Ok(rel(got, delta / 2f64.powi(n as i32)))
        })
        .collect()
}

/// Grid, path and couplings of the recursion convergence check.
pub fn recursion_setup() -> Result<(PathSpec, ModeGrid, AtomParams)> {
    let path = PathSpec::new([0.0, 0.0, 1.0], [0.2, 0.1, 1.3], 0.0, 2.0)?;
    let grid = ModeGrid::new(vec![0.5, 1.0, 1.5, 2.0], 6.0)?;
    Ok((path, grid, unit().scale_couplings(1e-4)))
}

/// Orders `log₂(e_i/e_{i+1})` for the recursion against the closed form.
pub fn recursion_orders(steps: &[usize]) -> Result<Vec<f64>> {
    let (path, grid, p) = recursion_setup()?;
    let exact = second_order_a(&path, &grid, &p)?;
    let errs = steps
        .iter()
        .map(|&n| run_recursion(&path, &grid, &p, n).map(|s| (s.a - exact).norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

fn momentum_force(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let grid = ModeGrid::new(vec![0.5, 1.0, 1.5, 2.0], 6.0)?;
    let r = 1.1;
    let mut worst = 0.0f64;
    for tau in [0.5, 2.0, 5.0] {
        let m = |t: f64| momentum_expectation(r, [0.0; 3], t, &grid, &p).map(|v| v[2]);
        let h = 1e-3;
        let d = |h: f64| -> Result<f64> { Ok((m(tau + h)? - m(tau - h)?) / (2.0 * h)) };
        let fd = (4.0 * d(h / 2.0)? - d(h)?) / 3.0;
        worst = worst.max(rel(fd, force_mode_sum(r, tau, &grid, &p)?));
    }
    let still = momentum_expectation(r, [0.0; 3], 3.0, &grid, &p)?;
    let sliding = momentum_expectation(r, [0.3, -0.2, 0.0], 3.0, &grid, &p)?;
    let (ok, detail) = within(worst, 1e-6, scale, "max rel dev of dP/dτ");
    let invariant = still == sliding;
    Ok((ok && invariant, format!("{detail}; parallel invariance {}", if invariant { "exact" } else { "broken" })))
}

fn generating_function(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let grid = ModeGrid::new(vec![0.5, 1.0, 1.5, 2.0], 6.0)?;
    let mut worst = 0.0f64;
    for v in [[0.0; 3], [0.0, 0.0, 0.1]] {
        let z = momentum_from_generating_function(1.1, v, 2.5, &grid, &p)?;
        let direct = momentum_expectation(1.1, v, 2.5, &grid, &p)?[2];
        worst = worst.max((z.re - direct).abs().max(z.im.abs()) / direct.abs());
    }
    Ok(within(worst, 1e-8, scale, "max rel dev of ∂J log Z"))
}

fn transient_limits(scale: f64) -> Result<(bool, String)> {
    let p = unit();
    let cfg = QuadratureConfig::default();
    let doubled = QuadratureConfig { k_max: 2.0 * cfg.k_max, ..cfg.clone() };
    let mut worst = 0.0f64;
    for tau in [0.7, 3.0, 11.0] {
        let a = transient_force(1.0, tau, &p, &cfg)?;
        let b = transient_force(1.0, tau, &p, &doubled)?;
        worst = worst.max((a.f_z - b.f_z).abs() / a.abs_error_estimate);
        if !a.f_z.is_finite() {
            return Ok((false, "non-finite force".into()));
        }
    }
    // the soft cutoff shifts the τ = 0 value by O(c/(k_max ω₀))
    let sharp = QuadratureConfig { k_max: 1e6, ..cfg.clone() };
    let start = transient_force(1.0, 0.0, &p, &sharp)?.f_z;
    let dev = rel(start, switch_on_force(1.0, &p));
    let (a, da) = within(worst, 1.0, scale, "cutoff doubling / error bar");
    let (b, db) = within(dev, 1e-5, scale, "switch-on rel dev");
    Ok((a && b, format!("{da}; {db}")))
}

fn recursion(scale: f64, report: &mut Report) -> Result<(bool, String)> {
    let orders = recursion_orders(&[200, 400, 800, 1600])?;
    let worst = orders.iter().map(|o| (o - 1.0).abs()).fold(0.0, f64::max);
    report.recursion_orders = orders.clone();
    let list: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    Ok((worst <= 0.2 * scale, format!("orders [{}] (allowed 1 ± {:.2})", list.join(", "), 0.2 * scale)))
}

/// Runs every check; a check that errors counts as failed.
pub fn run_all(opts: VerifyOptions) -> Report {
    let s = opts.tolerance_scale;
    let mut report = Report::default();
    type Plain = fn(f64) -> Result<(bool, String)>;
    let plain: [(&'static str, Plain); 9] = [
        ("far-field law", far_field),
        ("near-field law", near_field),
        ("x/k representation equivalence", representations),
        ("factor of two", factor_two),
        ("gradient law", gradient_law),
        ("nested-series identities", nested_series),
        ("transient cutoff and switch-on", transient_limits),
        ("momentum/force consistency", momentum_force),
        ("generating function", generating_function),
    ];
    let record = |name, start: Instant, out: Result<(bool, String)>, report: &mut Report| {
        let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        report.checks.push(Check { name, passed, detail, seconds: start.elapsed().as_secs_f64() });
    };
    for (name, check) in plain {
        let start = Instant::now();
        record(name, start, check(s), &mut report);
    }
    if let Ok(trajs) = reference_trajectories() {
        for (i, traj) in trajs.iter().enumerate() {
            if let Ok(gaps) = uncorrected_identity_gaps(traj, &unit()) {
                let list: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
                report.notes.push(format!(
                    "trajectory {}: nested term n = 1..3 vs 2⁻ⁿ ΔF without Taylor correction, rel gap [{}]",
                    i + 1,
                    list.join(", ")
                ));
            }
        }
    }
    let start = Instant::now();
    let out = recursion(s, &mut report);
    record("recursion convergence order", start, out, &mut report);
    report
}
