//! Retardation force on an adiabatically moving atom.
//!
//! The steady-state Taylor series in the velocity resums to
//! `F_c(R) = 2F⁽⁰⁾(R) − F⁽⁰⁾(R₀)`, where `R₀` is the distance of release
//! from rest. The embedded time integrals behind the series are evaluated
//! here by nested Gauss-Legendre quadrature along sampled trajectories.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::model::{AtomParams, ReleaseDistance};
use crate::quadrature::gauss_legendre;
use crate::steady::{
    retardation_force_deriv, retardation_potential, stationary_potential,
    stationary_retardation_force, stationary_total_force, ForceValue, PotentialValue,
};

/// Highest order of the steady-state expansion with analytic kernels.
pub const MAX_EXPANSION_ORDER: usize = 2;
/// Highest order evaluated by nested quadrature.
pub const MAX_NESTED_ORDER: usize = 3;

fn retardation_at(r0: ReleaseDistance, params: &AtomParams) -> Result<(f64, f64)> {
    match r0 {
        ReleaseDistance::Infinite => Ok((0.0, 0.0)),
        ReleaseDistance::Finite(r0) => {
            let f = stationary_retardation_force(r0, params)?;
            Ok((f.f_z, f.abs_error_estimate))
        }
    }
}

/// `2F⁽⁰⁾(r) − F⁽⁰⁾(r₀)`, with `F⁽⁰⁾(∞) = 0`.
pub fn adiabatic_retardation_force(
    r: f64,
    r0: ReleaseDistance,
    params: &AtomParams,
) -> Result<ForceValue> {
    let f = stationary_retardation_force(r, params)?;
    let (f0, e0) = retardation_at(r0, params)?;
    Ok(ForceValue {
        f_z: 2.0 * f.f_z - f0,
        abs_error_estimate: 2.0 * f.abs_error_estimate + e0,
        regime: f.regime,
    })
}

/// Stationary atom-wall force plus the residual `F⁽⁰⁾(r) − F⁽⁰⁾(r₀)`.
pub fn adiabatic_total_force(r: f64, r0: ReleaseDistance, params: &AtomParams) -> Result<ForceValue> {
    let total = stationary_total_force(r, params)?;
    let f = stationary_retardation_force(r, params)?;
    let (f0, e0) = retardation_at(r0, params)?;
    Ok(ForceValue {
        f_z: total.f_z + (f.f_z - f0),
        abs_error_estimate: total.abs_error_estimate + f.abs_error_estimate + e0,
        regime: total.regime,
    })
}

/// Potential whose negative gradient is [`adiabatic_total_force`] at fixed `r₀`:
/// `U_sa(r) + U⁽⁰⁾(r) − U⁽⁰⁾(r₀) + F⁽⁰⁾(r₀)(r − r₀)`.
pub fn adiabatic_potential(
    r: f64,
    r0: ReleaseDistance,
    params: &AtomParams,
) -> Result<PotentialValue> {
    let us = stationary_potential(r, params)?;
    let u = retardation_potential(r, params)?;
    let (residual, err) = match r0 {
        ReleaseDistance::Infinite => (u.u, u.abs_error_estimate),
        ReleaseDistance::Finite(r0) => {
            let u0 = retardation_potential(r0, params)?;
            let f0 = stationary_retardation_force(r0, params)?;
            (
                u.u - u0.u + f0.f_z * (r - r0),
                u.abs_error_estimate + u0.abs_error_estimate + f0.abs_error_estimate * (r - r0).abs(),
            )
        }
    };
    Ok(PotentialValue {
        u: us.u + residual,
        abs_error_estimate: us.abs_error_estimate + err,
    })
}

/// `(τ/2)ⁿ dⁿF⁽⁰⁾/drⁿ`, the long-time form of the n-th velocity derivative.
pub fn steady_state_expansion_term(n: usize, r: f64, tau: f64, params: &AtomParams) -> Result<f64> {
    if n > MAX_EXPANSION_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_EXPANSION_ORDER,
        });
    }
    let d = retardation_force_deriv(r, n, params)?;
    Ok((0.5 * tau).powi(n as i32) * d.f_z)
}

/// Sampled atom trajectory `(t, r, v)`, released from rest at the first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t: Vec<f64>,
    r: Vec<f64>,
    v: Vec<f64>,
    monotone: bool,
}

/// Relative tolerance of the central-difference velocity check.
pub const VELOCITY_CONSISTENCY: f64 = 1e-6;

impl Trajectory {
    pub fn new(t: Vec<f64>, r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != r.len() || t.len() != v.len() {
            return domain("trajectory columns differ in length");
        }
        if t.len() < 3 {
            return Err(Error::Trajectory {
                index: t.len(),
                reason: "at least three samples are required".into(),
            });
        }
        for i in 0..t.len() {
            if !(t[i].is_finite() && r[i].is_finite() && v[i].is_finite()) {
                return Err(Error::Trajectory {
                    index: i,
                    reason: "non-finite value".into(),
                });
            }
            if r[i] <= 0.0 {
                return Err(Error::Trajectory {
                    index: i,
                    reason: format!("distance {} is not positive", r[i]),
                });
            }
            if i > 0 && t[i] <= t[i - 1] {
                return Err(Error::Trajectory {
                    index: i,
                    reason: format!("time {} does not increase", t[i]),
                });
            }
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v[0].abs() > 1e-12 * vmax {
            return Err(Error::Trajectory {
                index: 0,
                reason: format!("release velocity {} is not zero", v[0]),
            });
        }
        for i in 1..t.len() - 1 {
            let central = (r[i + 1] - r[i - 1]) / (t[i + 1] - t[i - 1]);
            if (central - v[i]).abs() > VELOCITY_CONSISTENCY * vmax.max(f64::MIN_POSITIVE) {
                return Err(Error::Trajectory {
                    index: i,
                    reason: format!("velocity {} disagrees with central difference {central}", v[i]),
                });
            }
        }
        let increasing = r.windows(2).all(|w| w[1] > w[0]);
        let decreasing = r.windows(2).all(|w| w[1] < w[0]);
        Ok(Self {
            t,
            r,
            v,
            monotone: increasing || decreasing,
        })
    }

    /// Samples `n` uniformly spaced points of an analytic path on `[t0, t1]`.
    pub fn from_fn(
        t0: f64,
        t1: f64,
        n: usize,
        r: impl Fn(f64) -> f64,
        v: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n < 3 || !(t1 > t0) {
            return domain("need at least three samples on a nonempty interval");
        }
        let t: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        let rs = t.iter().map(|&x| r(x)).collect();
        let vs = t.iter().map(|&x| v(x)).collect();
        Self::new(t, rs, vs)
    }

    /// Three whitespace- or comma-separated columns `t r v`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut t, mut r, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for (no, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let cols: Vec<&str> = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: no + 1,
                    reason: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (slot, col) in vals.iter_mut().zip(&cols) {
                *slot = col.parse().map_err(|_| Error::Parse {
                    line: no + 1,
                    reason: format!("not a number: {col}"),
                })?;
            }
            t.push(vals[0]);
            r.push(vals[1]);
            v.push(vals[2]);
        }
        Self::new(t, r, v)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn start_time(&self) -> f64 {
        self.t[0]
    }

    pub fn end_time(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn r_start(&self) -> f64 {
        self.r[0]
    }

    pub fn r_end(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn max_speed(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn check_speed(&self, params: &AtomParams) -> Result<()> {
        if !(self.max_speed() / params.c < 0.5) {
            return domain(format!(
                "trajectory speed {} violates the adiabaticity bound c/2",
                self.max_speed()
            ));
        }
        Ok(())
    }

    /// Cubic Hermite interpolant `(r(s), r'(s))`; `r'` is the exact derivative.
    pub fn state(&self, s: f64) -> (f64, f64) {
        let n = self.t.len();
        let s = s.clamp(self.t[0], self.t[n - 1]);
        let i = match self.t.partition_point(|&x| x <= s) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let x = (s - self.t[i]) / h;
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let (m0, m1) = (self.v[i] * h, self.v[i + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        let r = (2.0 * x3 - 3.0 * x2 + 1.0) * r0
            + (x3 - 2.0 * x2 + x) * m0
            + (-2.0 * x3 + 3.0 * x2) * r1
            + (x3 - x2) * m1;
        let dr = ((6.0 * x2 - 6.0 * x) * r0
            + (3.0 * x2 - 4.0 * x + 1.0) * m0
            + (-6.0 * x2 + 6.0 * x) * r1
            + (3.0 * x2 - 2.0 * x) * m1)
            / h;
        (r, dr)
    }
}

/// Node count of each Gauss-Legendre level in the embedded integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NestedQuadrature {
    pub nodes: usize,
}

impl Default for NestedQuadrature {
    fn default() -> Self {
        Self { nodes: 24 }
    }
}

struct Nested<'a> {
    traj: &'a Trajectory,
    params: &'a AtomParams,
    order: usize,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Nested<'_> {
    /// `∫_{t₀}^{s} ds' v(s')/2 · inner(s')` with `levels` integrals still open.
    fn level(&self, s: f64, levels: usize) -> Result<f64> {
        if levels == 0 {
            let (r, _) = self.traj.state(s);
            return retardation_force_deriv(r, self.order, self.params).map(|f| f.f_z);
        }
        let t0 = self.traj.start_time();
        let half = 0.5 * (s - t0);
        if half == 0.0 {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        for (x, w) in self.x.iter().zip(&self.w) {
            let u = t0 + half * (x + 1.0);
            let (_, v) = self.traj.state(u);
            if v == 0.0 {
                continue;
            }
            sum += w * 0.5 * v * self.level(u, levels - 1)?;
        }
        Ok(half * sum)
    }
}

/// n-fold embedded integral
/// `∫ds₁ ∫^{s₁}ds₂ … ∫^{s_{n−1}}ds_n (v₁…v_n / 2ⁿ) dⁿF⁽⁰⁾/drⁿ(R(s_n))`.
pub fn series_term_nested(
    n: usize,
    traj: &Trajectory,
    params: &AtomParams,
    quad: NestedQuadrature,
) -> Result<f64> {
    if n == 0 || n > MAX_NESTED_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_NESTED_ORDER,
        });
    }
    if quad.nodes == 0 {
        return domain("nested quadrature needs at least one node");
    }
    traj.check_speed(params)?;
    let (x, w) = gauss_legendre(quad.nodes);
    let nested = Nested {
        traj,
        params,
        order: n,
        x,
        w,
    };
    let t0 = traj.start_time();
    let half = 0.5 * (traj.end_time() - t0);
    // Outermost level in parallel; the rest recurse serially.
    let parts = nested
        .x
        .par_iter()
        .zip(nested.w.par_iter())
        .map(|(x, w)| {
            let u = t0 + half * (x + 1.0);
            let (_, v) = traj.state(u);
            if v == 0.0 {
                return Ok(0.0);
            }
            Ok(w * 0.5 * v * nested.level(u, n - 1)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(half * parts.iter().sum::<f64>())
}

/// Partial sum of the embedded-integral series with its geometric tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub remainder_bound: f64,
    /// Terms `n = 1..=n_max` as summed.
    pub terms: Vec<f64>,
}

/// `F⁽⁰⁾(r_end) + Σ_{n=1}^{n_max} term_n`, nested quadrature for `n ≤ 3`
/// and `2⁻ⁿ ΔF` beyond; the bound is `2^{−n_max} |ΔF|`.
pub fn series_sum(
    traj: &Trajectory,
    n_max: usize,
    params: &AtomParams,
    quad: NestedQuadrature,
) -> Result<SeriesSum> {
    if n_max == 0 {
        return domain("series needs at least one term");
    }
    let f_end = stationary_retardation_force(traj.r_end(), params)?.f_z;
    let f_start = stationary_retardation_force(traj.r_start(), params)?.f_z;
    let delta = f_end - f_start;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let term = if n <= MAX_NESTED_ORDER {
            series_term_nested(n, traj, params, quad)?
        } else {
            delta / 2f64.powi(n as i32)
        };
        terms.push(term);
    }
    Ok(SeriesSum {
        value: f_end + terms.iter().sum::<f64>(),
        remainder_bound: delta.abs() / 2f64.powi(n_max as i32),
        terms,
    })
}

/// Ratio of the adiabatic to the stationary retardation force.
pub fn ratio_to_stationary(r: f64, r0: ReleaseDistance, params: &AtomParams) -> Result<f64> {
    let a = adiabatic_retardation_force(r, r0, params)?;
    let s = stationary_retardation_force(r, params)?;
    Ok(a.f_z / s.f_z)
}
