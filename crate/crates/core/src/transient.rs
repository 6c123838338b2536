//! Retardation force on a stationary atom after a sudden switch-on.
//!
//! After the half-space mode sum is turned into an integral and the time and
//! angular integrals are done in closed form,
//!
//! `F(R, τ) = F⁽⁰⁾(R) + (2α₀ω₀³/(πc)) Im[ e^{iω₀τ} ∫₀^∞ dk k²/(kc+ω₀) e^{ikcτ} E(2kR) ]`
//!
//! with `E(a) = ∫₀¹ μ³ e^{−iaμ} dμ`. The oscillatory part is integrated
//! adaptively on `[0, 4/R]`; beyond that `E` is expanded exactly into the
//! two phases `e^{ik(cτ−2R)}` and `e^{ikcτ}` and the tail is summed in closed
//! form with the soft cutoff `e^{−k c/(k_max ω₀)}`. The round-trip phase
//! `cτ − 2R` makes the tail resonant at `τ = 2R/c`.

use num_complex::Complex64;
use rayon::prelude::*;

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::model::AtomParams;
use crate::quadrature::{integrate_with_breaks, QuadratureConfig, Tolerance};
use crate::specfun::{exp_integral_e1, mu3_transform};
use crate::steady::{electrostatic_force, stationary_retardation_force_k, ForceValue, Regime};

/// One sample of a transient curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSample {
    pub tau: f64,
    pub f_z: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientCurve {
    pub samples: Vec<TransientSample>,
}

impl TransientCurve {
    /// Sample with the largest `|f_z − reference|` among `tau > 0`.
    pub fn max_deviation(&self, reference: f64) -> Option<TransientSample> {
        self.samples
            .iter()
            .filter(|s| s.tau > 0.0)
            .max_by(|a, b| (a.f_z - reference).abs().total_cmp(&(b.f_z - reference).abs()))
            .copied()
    }
}

/// One row of a fixed-time snapshot across distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub r: f64,
    /// `r⁴ (F_retardation + F_electrostatic)`.
    pub coeff_total: f64,
    /// `r⁴ F_retardation`.
    pub coeff_retardation: f64,
    pub abs_error: f64,
}

/// Transient evaluator at fixed distance; caches the steady value.
#[derive(Debug, Clone)]
pub struct TransientEvaluator {
    r: f64,
    params: AtomParams,
    cfg: QuadratureConfig,
    steady: ForceValue,
}

const TAIL_COEFFS: [f64; 4] = [1.0, -3.0, 6.0, -6.0];

impl TransientEvaluator {
    pub fn new(r: f64, params: &AtomParams, cfg: &QuadratureConfig) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("distance must be positive and finite, got {r}"));
        }
        cfg.validate()?;
        let steady = stationary_retardation_force_k(r, params, cfg)?;
        Ok(Self {
            r,
            params: *params,
            cfg: cfg.clone(),
            steady,
        })
    }

    pub fn steady_state(&self) -> ForceValue {
        self.steady
    }

    fn split_point(&self) -> f64 {
        4.0 / self.r
    }

    /// Soft-cutoff length `c / (k_max ω₀)`.
    fn regulator(&self) -> f64 {
        self.params.c / (self.cfg.k_max * self.params.omega0)
    }

    /// `∫_K^∞ k^p / (c (k + w)) e^{iκk} dk`, `p ∈ {1, 0, −1, −2}`, `κ = ν + iη`.
    fn tail_power(&self, p: i32, nu: f64, eta: f64) -> Complex64 {
        let c = self.params.c;
        let w = self.params.omega0 / c;
        let big_k = self.split_point();
        let i = Complex64::i();
        let kappa = Complex64::new(nu, eta);
        let phase = (i * kappa * big_k).exp();
        let t0 = || i * phase / kappa;
        let t1 = || exp_integral_e1(-i * kappa * big_k);
        let tw = || (-i * kappa * w).exp() * exp_integral_e1(-i * kappa * (big_k + w));
        let v = match p {
            1 => t0() - w * tw(),
            0 => tw(),
            -1 => (t1() - tw()) / w,
            -2 => {
                let t1v = t1();
                let t2 = phase / big_k + i * kappa * t1v;
                (t2 - t1v / w + tw() / w) / w
            }
            _ => unreachable!("tail power {p}"),
        };
        v / c
    }

    /// Closed-form tail of `∫ k²/(kc+ω₀) e^{iskcτ} E(2skR) dk` over `[K, ∞)`.
    fn tail(&self, tau: f64, s: f64, eta: f64) -> Complex64 {
        let r = self.r;
        let ct = self.params.c * tau;
        // E(2skR) = e^{b}(1/b − 3/b² + 6/b³ − 6/b⁴) + 6/b⁴, b = −2iskR.
        let base = Complex64::new(0.0, -2.0 * s * r).inv();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(1.0, 0.0);
        for (m, coeff) in TAIL_COEFFS.iter().enumerate() {
            factor *= base;
            sum += coeff * factor * self.tail_power(1 - m as i32, s * (ct - 2.0 * r), eta);
        }
        sum + 6.0 * factor * self.tail_power(-2, s * ct, eta)
    }

    /// Returns `e^{isω₀τ} ∫₀^∞ k²/(kc+ω₀) e^{iskcτ} E(2skR) dk` and its error.
    fn oscillatory(&self, tau: f64, s: f64, abs_floor: f64) -> Result<(Complex64, f64)> {
        let (c, omega0, r) = (self.params.c, self.params.omega0, self.r);
        let big_k = self.split_point();
        let integrand = |k: f64| {
            let weight = k * k / (k * c + omega0);
            Complex64::from_polar(weight, s * k * c * tau) * mu3_transform(2.0 * s * k * r)
        };
        let fastest = (c * tau).max((c * tau - 2.0 * r).abs()).max(2.0 * r);
        let panels = ((big_k * fastest / PI).ceil() as usize).clamp(1, 4096);
        let breaks: Vec<f64> = (1..panels).map(|j| big_k * j as f64 / panels as f64).collect();
        let tol = Tolerance {
            abs: abs_floor,
            ..self.cfg.tolerance()
        };
        let head = integrate_with_breaks(integrand, 0.0, big_k, &breaks, tol)?;
        let eta = self.regulator();
        let tail = self.tail(tau, s, eta);
        let tail_err = (tail - self.tail(tau, s, 0.5 * eta)).norm()
            + (tail - self.tail(tau, s, 2.0 * eta)).norm();
        let rotate = Complex64::from_polar(1.0, s * omega0 * tau);
        Ok((rotate * (head.value + tail), head.abs_error + tail_err))
    }

    /// Force at time `tau` after switch-on.
    pub fn force(&self, tau: f64) -> Result<ForceValue> {
        self.force_with_residue(tau).map(|(f, _)| f)
    }

    /// Force together with the imaginary residue left after conjugate pairing.
    pub fn force_with_residue(&self, tau: f64) -> Result<(ForceValue, f64)> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return domain(format!("time must be nonnegative and finite, got {tau}"));
        }
        let p = &self.params;
        let pref = 2.0 * p.alpha0 * p.omega0.powi(3) / (PI * p.c);
        let abs_floor = 1e-3 * self.cfg.rel_tol * self.steady.f_z.abs() / pref;
        let (plus, e_plus) = self.oscillatory(tau, 1.0, abs_floor)?;
        let (minus, e_minus) = self.oscillatory(tau, -1.0, abs_floor)?;
        // (X − X̄)/(2i) is Im X; its imaginary part must vanish.
        let paired = (plus - minus) / Complex64::new(0.0, 2.0);
        let f_osc = pref * paired.re;
        let residue = pref * paired.im;
        let f_z = self.steady.f_z + f_osc;
        if !f_z.is_finite() {
            return Err(Error::Overflow(format!("transient force at τ = {tau}")));
        }
        let quad_err = pref * 0.5 * (e_plus + e_minus);
        let limit = 10.0 * self.cfg.rel_tol * f_z.abs();
        if residue.abs() > limit.max(10.0 * quad_err) {
            return Err(Error::Consistency(format!(
                "imaginary residue {residue:e} at τ = {tau}, r = {} exceeds {limit:e}",
                self.r
            )));
        }
        let value = ForceValue {
            f_z,
            abs_error_estimate: self.steady.abs_error_estimate + quad_err + residue.abs(),
            regime: Regime::classify(self.r, p),
        };
        Ok((value, residue))
    }
}

/// Retardation force at distance `r`, time `tau` after switch-on.
pub fn transient_force(
    r: f64,
    tau: f64,
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<ForceValue> {
    TransientEvaluator::new(r, params, cfg)?.force(tau)
}

/// Value of the transient force at `τ = 0`, `α₀ω₀²/(2πcR³)`.
pub fn switch_on_force(r: f64, params: &AtomParams) -> f64 {
    params.alpha0 * params.omega0 * params.omega0 / (2.0 * PI * params.c * r.powi(3))
}

/// Transient force on a time grid; samples are evaluated in parallel.
pub fn transient_sweep(
    r: f64,
    tau_grid: &[f64],
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<TransientCurve> {
    if tau_grid.is_empty() {
        return domain("time grid is empty");
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("time grid must be strictly increasing");
    }
    let eval = TransientEvaluator::new(r, params, cfg)?;
    let samples = tau_grid
        .par_iter()
        .map(|&tau| {
            eval.force(tau).map(|f| TransientSample {
                tau,
                f_z: f.f_z,
                abs_error: f.abs_error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransientCurve { samples })
}

/// `r⁴`-scaled transient force at fixed `tau` over a distance grid.
pub fn snapshot_sweep(
    tau: f64,
    r_grid: &[f64],
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<SnapshotRow>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return domain(format!("snapshot time must be positive, got {tau}"));
    }
    if r_grid.is_empty() {
        return domain("distance grid is empty");
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] <= 0.0 {
        return domain("distance grid must be positive and strictly increasing");
    }
    r_grid
        .par_iter()
        .map(|&r| {
            let f = transient_force(r, tau, params, cfg)?;
            let el = electrostatic_force(r, params)?;
            let r4 = r.powi(4);
            Ok(SnapshotRow {
                r,
                coeff_total: r4 * (f.f_z + el.f_z),
                coeff_retardation: r4 * f.f_z,
                abs_error: r4 * f.abs_error_estimate,
            })
        })
        .collect()
}
