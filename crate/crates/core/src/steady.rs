//! Forces and potentials on a stationary atom in the steady state.
//!
//! With `P = α₀ω₀²/(8π)` and the kernel `K(r) = I(r)/r`:
//!
//! * total force            `F_sa = P K'''(r)`
//! * total potential        `U_sa = −P K''(r)`
//! * electrostatic image    `−3α₀ω₀/(8r⁴)` (the instantaneous part of `K`)
//! * retardation correction `F⁽⁰⁾ = P K̃'''(r)`, `K̃ = (I − π/(2ω₀))/r`
//!
//! so that `F_sa = electrostatic + F⁽⁰⁾` exactly. The same correction in the
//! wave-number representation, `−(α₀ω₀²/4π) d³/dr³ ∫dk sin(2kr)/(2kr(kc+ω₀))`,
//! is exposed as an independent oracle.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::AtomParams;
use crate::quadrature::QuadratureConfig;
use crate::specfun::{kernel_deriv, oscillatory_k_integral_deriv, subtracted_kernel_deriv, KernelEval};

/// `r ω₀ / c` below which a distance is labeled near field.
pub const NEAR_THRESHOLD: f64 = 0.1;
/// `r ω₀ / c` above which a distance is labeled far field.
pub const FAR_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Near,
    Intermediate,
    Far,
}

impl Regime {
    pub fn classify(r: f64, params: &AtomParams) -> Self {
        let x = r * params.omega0 / params.c;
        if x < NEAR_THRESHOLD {
            Regime::Near
        } else if x > FAR_THRESHOLD {
            Regime::Far
        } else {
            Regime::Intermediate
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Near => "near",
            Regime::Intermediate => "intermediate",
            Regime::Far => "far",
        }
    }
}

/// Wall-normal force, positive away from the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceValue {
    pub f_z: f64,
    pub abs_error_estimate: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub u: f64,
    pub abs_error_estimate: f64,
}

fn prefactor(params: &AtomParams) -> f64 {
    params.alpha0 * params.omega0 * params.omega0 / (8.0 * PI)
}

fn force(r: f64, params: &AtomParams, scale: f64, k: KernelEval) -> ForceValue {
    ForceValue {
        f_z: scale * k.value,
        abs_error_estimate: scale.abs() * k.abs_error_estimate,
        regime: Regime::classify(r, params),
    }
}

fn potential(scale: f64, k: KernelEval) -> PotentialValue {
    PotentialValue {
        u: scale * k.value,
        abs_error_estimate: scale.abs() * k.abs_error_estimate,
    }
}

/// Image-dipole force `−3α₀ω₀/(8r⁴)`.
pub fn electrostatic_force(r: f64, params: &AtomParams) -> Result<ForceValue> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("distance must be positive and finite, got {r}"));
    }
    Ok(ForceValue {
        f_z: -3.0 * params.alpha0 * params.omega0 / (8.0 * r.powi(4)),
        abs_error_estimate: 0.0,
        regime: Regime::classify(r, params),
    })
}

/// Image-dipole potential `−α₀ω₀/(8r³)`.
pub fn electrostatic_potential(r: f64, params: &AtomParams) -> Result<PotentialValue> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("distance must be positive and finite, got {r}"));
    }
    Ok(PotentialValue {
        u: -params.alpha0 * params.omega0 / (8.0 * r.powi(3)),
        abs_error_estimate: 0.0,
    })
}

/// Retardation correction `F⁽⁰⁾(r)` to the electrostatic force.
pub fn stationary_retardation_force(r: f64, params: &AtomParams) -> Result<ForceValue> {
    let k = subtracted_kernel_deriv(r, 3, params)?;
    Ok(force(r, params, prefactor(params), k))
}

/// `dⁿ/drⁿ F⁽⁰⁾(r)` for `n ≤ 3`.
pub fn retardation_force_deriv(r: f64, n: usize, params: &AtomParams) -> Result<ForceValue> {
    let k = subtracted_kernel_deriv(r, n + 3, params)?;
    Ok(force(r, params, prefactor(params), k))
}

/// `F⁽⁰⁾(r)` from the damped wave-number integral.
pub fn stationary_retardation_force_k(
    r: f64,
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<ForceValue> {
    let g3 = oscillatory_k_integral_deriv(r, 3, params, cfg)?;
    Ok(force(r, params, -2.0 * prefactor(params), g3))
}

/// Electrostatic plus retardation force, evaluated from the undivided kernel.
pub fn stationary_total_force(r: f64, params: &AtomParams) -> Result<ForceValue> {
    let k = kernel_deriv(r, 3, params)?;
    Ok(force(r, params, prefactor(params), k))
}

/// Total potential `U_sa(r)`, vanishing at infinity.
pub fn stationary_potential(r: f64, params: &AtomParams) -> Result<PotentialValue> {
    let k = kernel_deriv(r, 2, params)?;
    Ok(potential(-prefactor(params), k))
}

/// Retardation part of the potential; `−dU⁽⁰⁾/dr = F⁽⁰⁾`.
pub fn retardation_potential(r: f64, params: &AtomParams) -> Result<PotentialValue> {
    let k = subtracted_kernel_deriv(r, 2, params)?;
    Ok(potential(-prefactor(params), k))
}

/// Leading near-field potential `−α₀ω₀/(8r³)`.
pub fn near_field_potential(r: f64, params: &AtomParams) -> f64 {
    -params.alpha0 * params.omega0 / (8.0 * r.powi(3))
}

/// Leading far-field potential `−3α₀c/(8πr⁴)`.
pub fn far_field_potential(r: f64, params: &AtomParams) -> f64 {
    -3.0 * params.alpha0 * params.c / (8.0 * PI * r.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> AtomParams {
        AtomParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn electrostatic_examples() {
        let p = unit();
        assert_eq!(electrostatic_force(2.0, &p).unwrap().f_z, -0.0234375);
        assert_eq!(electrostatic_force(1.0, &p).unwrap().f_z, -0.375);
        let q = AtomParams::new(0.3, 7.0, 2.0).unwrap();
        let ratio = electrostatic_force(3.4, &q).unwrap().f_z / electrostatic_force(1.7, &q).unwrap().f_z;
        assert!((ratio - 1.0 / 16.0).abs() < 1e-15);
        assert!(electrostatic_force(0.0, &p).is_err());
    }

    #[test]
    fn total_is_electrostatic_plus_retardation() {
        let p = AtomParams::new(0.8, 2.5, 1.3).unwrap();
        for r in [0.01, 0.3, 2.0, 40.0] {
            let total = stationary_total_force(r, &p).unwrap().f_z;
            let sum = electrostatic_force(r, &p).unwrap().f_z
                + stationary_retardation_force(r, &p).unwrap().f_z;
            assert!(rel(sum, total) < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn limits_of_the_potential() {
        let p = unit();
        let near = stationary_potential(0.01, &p).unwrap().u;
        assert!(rel(near * 1e-6, -1.0 / 8.0) < 0.01);
        let far = stationary_potential(100.0, &p).unwrap().u;
        assert!(rel(far * 1e8, -3.0 / (8.0 * PI)) < 0.01);
    }

    #[test]
    fn far_field_total_force() {
        let p = unit();
        let f = stationary_total_force(100.0, &p).unwrap().f_z;
        assert!(rel(f * 1e10, -3.0 / (2.0 * PI)) < 0.02);
        assert_eq!(stationary_total_force(100.0, &p).unwrap().regime, Regime::Far);
    }

    #[test]
    fn near_field_retardation_is_subdominant() {
        let p = unit();
        let ret = stationary_retardation_force(0.01, &p).unwrap().f_z;
        let el = electrostatic_force(0.01, &p).unwrap().f_z;
        assert!((ret / el).abs() < 0.05);
        assert_eq!(stationary_retardation_force(0.01, &p).unwrap().regime, Regime::Near);
    }

    #[test]
    fn gradients_by_finite_difference() {
        let p = unit();
        for r in [0.05, 1.0, 20.0] {
            let h = 1e-3 * r;
            let d = |f: &dyn Fn(f64) -> f64, h: f64| (f(r + h) - f(r - h)) / (2.0 * h);
            let u = |x: f64| stationary_potential(x, &p).unwrap().u;
            let grad = (4.0 * d(&u, h / 2.0) - d(&u, h)) / 3.0;
            assert!(rel(-grad, stationary_total_force(r, &p).unwrap().f_z) < 1e-8, "r = {r}");
            let u0 = |x: f64| retardation_potential(x, &p).unwrap().u;
            let grad0 = (4.0 * d(&u0, h / 2.0) - d(&u0, h)) / 3.0;
            assert!(rel(-grad0, stationary_retardation_force(r, &p).unwrap().f_z) < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn retardation_in_both_representations() {
        let p = unit();
        let cfg = QuadratureConfig::default();
        for r in [0.1, 1.0, 10.0] {
            let x = stationary_retardation_force(r, &p).unwrap().f_z;
            let k = stationary_retardation_force_k(r, &p, &cfg).unwrap().f_z;
            assert!(rel(k, x) < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn regimes() {
        let p = AtomParams::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(Regime::classify(0.01, &p), Regime::Near);
        assert_eq!(Regime::classify(1.0, &p), Regime::Intermediate);
        assert_eq!(Regime::classify(6.0, &p), Regime::Far);
    }
}
