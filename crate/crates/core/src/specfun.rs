//! Auxiliary functions and analytic kernel derivatives.
//!
//! The central object is the Laplace-type kernel
//! `I(r) = ∫₀^∞ e^{-2rx/c} / (x² + ω₀²) dx = f(2rω₀/c) / ω₀`
//! and `K(r) = I(r) / r`. Every r-derivative is taken under the integral
//! sign through the moments
//! `h_m(z) = ∫₀^∞ tᵐ e^{-zt} / (1 + t²) dt`, so no numerical differencing
//! ever enters a force.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::model::AtomParams;
use crate::quadrature::{
    gauss_kronrod_21, integrate_to_infinity, integrate_with_breaks, neville_to_zero, Estimate,
    QuadratureConfig, Tolerance,
};

/// Highest kernel derivative order with an analytic implementation.
pub const MAX_KERNEL_ORDER: usize = 6;

/// Switch from quadrature to the asymptotic series.
pub const ASYMPTOTIC_SWITCH: f64 = 30.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// A kernel value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub abs_error_estimate: f64,
}

fn aux_tolerance() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_subdivisions: 4000,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `Σ_j (-1)^j (m+2j)! / z^{m+2j+1}`, or `None` when the smallest term
/// stays above 1e-15 of the sum.
fn moment_asymptotic(m: usize, z: f64) -> Option<f64> {
    let mut term = factorial(m) / z.powi(m as i32 + 1);
    let mut sum = 0.0;
    let mut j = 0usize;
    loop {
        sum += term;
        let k = m + 2 * j;
        let next = -term * ((k + 1) * (k + 2)) as f64 / (z * z);
        if next.abs() <= 1e-16 * sum.abs() {
            return Some(sum);
        }
        if next.abs() >= term.abs() {
            return None;
        }
        term = next;
        j += 1;
    }
}

/// `h_m(z) = ∫₀^∞ tᵐ e^{-zt} / (1 + t²) dt` for `m ≤ MAX_KERNEL_ORDER`.
pub fn auxiliary_h(m: usize, z: f64) -> Result<Estimate<f64>> {
    if m > MAX_KERNEL_ORDER {
        return Err(Error::UnsupportedOrder {
            order: m,
            max: MAX_KERNEL_ORDER,
        });
    }
    if !(z > 0.0) || z.is_nan() {
        return domain(format!("auxiliary function argument must be positive, got {z}"));
    }
    if z.is_infinite() {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    if z >= ASYMPTOTIC_SWITCH {
        if let Some(v) = moment_asymptotic(m, z) {
            return Ok(Estimate {
                value: v,
                abs_error: 1e-15 * v.abs(),
            });
        }
    }
    // u = z t keeps the exponential scale fixed: h_m = z^{-(m+1)} ∫ uᵐ e^{-u}/(1+(u/z)²) du.
    let inv = 1.0 / z;
    let integrand = move |u: f64| {
        let s = u * inv;
        u.powi(m as i32) * (-u).exp() / (1.0 + s * s)
    };
    let breaks = [z, 1.0, m as f64 + 1.0, m as f64 + 10.0];
    let est = integrate_to_infinity(integrand, 0.0, &breaks, aux_tolerance())?;
    let scale = inv.powi(m as i32 + 1);
    if !scale.is_finite() {
        return Err(Error::Overflow(format!("h_{m}({z})")));
    }
    Ok(Estimate {
        value: est.value * scale,
        abs_error: est.abs_error * scale + 4.0 * f64::EPSILON * (est.value * scale).abs(),
    })
}

/// `f(z) = ∫₀^∞ e^{-zt} / (1 + t²) dt`.
pub fn auxiliary_f(z: f64) -> Result<f64> {
    auxiliary_h(0, z).map(|e| e.value)
}

/// `g(z) = ∫₀^∞ t e^{-zt} / (1 + t²) dt`.
pub fn auxiliary_g(z: f64) -> Result<f64> {
    auxiliary_h(1, z).map(|e| e.value)
}

/// `f(z) − π/2 = −∫₀^∞ (1 − e^{-zt}) / (1 + t²) dt`, free of cancellation at small z.
pub fn auxiliary_f_deficit(z: f64) -> Result<Estimate<f64>> {
    if !(z > 0.0) || z.is_nan() {
        return domain(format!("auxiliary function argument must be positive, got {z}"));
    }
    if z >= 2.0 {
        let f = auxiliary_h(0, z)?;
        return Ok(Estimate {
            value: f.value - FRAC_PI_2,
            abs_error: f.abs_error + 2.0 * f64::EPSILON,
        });
    }
    let integrand = move |t: f64| -(-z * t).exp_m1() / (1.0 + t * t);
    let est = integrate_to_infinity(integrand, 0.0, &[1.0, 1.0 / z], aux_tolerance())?;
    Ok(Estimate {
        value: -est.value,
        abs_error: est.abs_error + 4.0 * f64::EPSILON * est.value.abs(),
    })
}

/// Exponential integral `E₁(z)` on the principal branch, `z ≠ 0`.
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    if z.norm() <= 2.0 {
        // −γ − ln z − Σ (−z)ⁿ / (n·n!)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..200 {
            term *= -z / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA - z.ln() - sum;
    }
    // e^{-z} / (z + 1 − 1²/(z + 3 − 2²/(z + 5 − …))), modified Lentz.
    let tiny = 1e-300;
    let mut f = z + 1.0;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..200_000 {
        let a = -((n * n) as f64);
        let b = z + (2 * n + 1) as f64;
        d = b + a * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        c = b + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() / f
}

/// `E(a) = ∫₀¹ μ³ e^{-iaμ} dμ`.
pub fn mu3_transform(a: f64) -> Complex64 {
    if a.abs() < 2.0 {
        let x = Complex64::new(0.0, -a);
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..60 {
            if n > 0 {
                power *= x / n as f64;
            }
            let add = power / (n + 4) as f64;
            sum += add;
            if n > 4 && add.norm() < 1e-18 {
                break;
            }
        }
        return sum;
    }
    let b = Complex64::new(0.0, -a);
    let b1 = b.inv();
    let b2 = b1 * b1;
    let b3 = b2 * b1;
    let b4 = b2 * b2;
    b.exp() * (b1 - 3.0 * b2 + 6.0 * b3 - 6.0 * b4) + 6.0 * b4
}

/// `I(r) = f(2rω₀/c) / ω₀`.
pub fn laplace_kernel(r: f64, params: &AtomParams) -> Result<KernelEval> {
    check_distance(r)?;
    let h = auxiliary_h(0, params.phase_distance(r))?;
    Ok(KernelEval {
        value: h.value / params.omega0,
        abs_error_estimate: h.abs_error / params.omega0,
    })
}

fn check_distance(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("distance must be positive and finite, got {r}"));
    }
    Ok(())
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_KERNEL_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_KERNEL_ORDER,
        });
    }
    Ok(())
}

/// Leibniz expansion of `dⁿ/drⁿ [I(r)/r]` with `I^{(j)} = (−2/c)ʲ ω₀^{j−1} h_j(z)`.
/// `i0` replaces the undifferentiated `I` (used for the subtracted kernel).
fn leibniz(r: f64, n: usize, params: &AtomParams, i0: Estimate<f64>) -> Result<KernelEval> {
    let z = params.phase_distance(r);
    let a = 2.0 / params.c;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut magnitude = 0.0;
    for j in 0..=n {
        let ij = if j == 0 {
            i0
        } else {
            let h = auxiliary_h(j, z)?;
            let s = (-a).powi(j as i32) * params.omega0.powi(j as i32 - 1);
            Estimate {
                value: s * h.value,
                abs_error: s.abs() * h.abs_error,
            }
        };
        let m = n - j;
        let inv_r = (-1.0f64).powi(m as i32) * factorial(m) / r.powi(m as i32 + 1);
        let w = binomial(n, j) * inv_r;
        value += w * ij.value;
        err += w.abs() * ij.abs_error;
        magnitude += (w * ij.value).abs();
    }
    if !value.is_finite() {
        return Err(Error::Overflow(format!("kernel derivative of order {n} at r = {r}")));
    }
    Ok(KernelEval {
        value,
        abs_error_estimate: err + 4.0 * f64::EPSILON * magnitude,
    })
}

/// `dⁿ/drⁿ [I(r)/r]`, analytic, `0 ≤ n ≤ MAX_KERNEL_ORDER`.
pub fn kernel_deriv(r: f64, n: usize, params: &AtomParams) -> Result<KernelEval> {
    check_distance(r)?;
    check_order(n)?;
    let h = auxiliary_h(0, params.phase_distance(r))?;
    let i0 = Estimate {
        value: h.value / params.omega0,
        abs_error: h.abs_error / params.omega0,
    };
    leibniz(r, n, params, i0)
}

/// `dⁿ/drⁿ [(I(r) − π/(2ω₀)) / r]`: the kernel with its instantaneous
/// (electrostatic) part removed. Tends to zero at large r.
pub fn subtracted_kernel_deriv(r: f64, n: usize, params: &AtomParams) -> Result<KernelEval> {
    check_distance(r)?;
    check_order(n)?;
    let d = auxiliary_f_deficit(params.phase_distance(r))?;
    let i0 = Estimate {
        value: d.value / params.omega0,
        abs_error: d.abs_error / params.omega0,
    };
    leibniz(r, n, params, i0)
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `Q_n(z; η) = ∫₀^∞ sin u · e^{−ηu} / (u (u+z)^{n+1}) du`, summed over half periods.
fn damped_q(n: usize, z: f64, eta: f64, tol: Tolerance) -> Result<Estimate<f64>> {
    let p = n as i32 + 1;
    let integrand = move |u: f64| sinc(u) * (-eta * u).exp() / (u + z).powi(p);
    let head = integrate_with_breaks(integrand, 0.0, PI, &[z, 10.0 * z], tol)?;
    let mut sum = head.value;
    let mut err = head.abs_error;
    let mut j = 1usize;
    loop {
        let lo = j as f64 * PI;
        let envelope = (-eta * lo).exp() / (lo * (lo + z).powi(p)) * PI;
        if envelope <= 1e-17 * sum.abs() || envelope < 1e-300 {
            err += envelope;
            break;
        }
        if j > 50_000_000 {
            return Err(Error::Convergence {
                context: format!("damped half-period sum for Q_{n}({z}) at η = {eta}"),
                last: sum,
                previous: sum - envelope,
            });
        }
        let panel: Estimate<f64> = gauss_kronrod_21(&integrand, lo, lo + PI);
        sum += panel.value;
        err += panel.abs_error;
        j += 1;
    }
    Ok(Estimate {
        value: sum,
        abs_error: err,
    })
}

/// Extrapolates `Q_n(z; η)` along the damping ladder to η = 0.
pub fn damped_q_extrapolated(n: usize, z: f64, cfg: &QuadratureConfig) -> Result<Estimate<f64>> {
    cfg.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return domain(format!("phase distance must be positive, got {z}"));
    }
    let tol = cfg.tolerance();
    let mut values = Vec::with_capacity(cfg.eta_ladder.len());
    let mut quad_err: f64 = 0.0;
    for &eta in &cfg.eta_ladder {
        let q = damped_q(n, z, eta, tol)?;
        quad_err = quad_err.max(q.abs_error);
        values.push(q.value);
    }
    let (best, extrap_err) = neville_to_zero(&cfg.eta_ladder, &values);
    let total_err = extrap_err + quad_err;
    if !(total_err <= cfg.rel_tol * best.abs()) {
        let k = values.len() - 1;
        let (previous, _) = neville_to_zero(&cfg.eta_ladder[..k], &values[..k]);
        return Err(Error::Convergence {
            context: format!("damping ladder for Q_{n}({z})"),
            last: best,
            previous,
        });
    }
    Ok(Estimate {
        value: best,
        abs_error: total_err,
    })
}

/// `dⁿ/drⁿ ∫₀^∞ dk sin(2kr) / (2kr (kc + ω₀))`, by damping and extrapolation.
///
/// With `u = 2kr` the n-th derivative is `(1/c)(−2ω₀/c)ⁿ n! Q_n(2rω₀/c)`.
pub fn oscillatory_k_integral_deriv(
    r: f64,
    n: usize,
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<KernelEval> {
    check_distance(r)?;
    check_order(n)?;
    let q = damped_q_extrapolated(n, params.phase_distance(r), cfg)?;
    let scale = (-2.0 * params.omega0 / params.c).powi(n as i32) * factorial(n) / params.c;
    Ok(KernelEval {
        value: scale * q.value,
        abs_error_estimate: scale.abs() * q.abs_error,
    })
}

/// `∫₀^∞ dk sin(2kr) / (2kr (kc + ω₀))`.
pub fn oscillatory_k_integral(
    r: f64,
    params: &AtomParams,
    cfg: &QuadratureConfig,
) -> Result<KernelEval> {
    oscillatory_k_integral_deriv(r, 0, params, cfg)
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

    // Reference values from 30-digit quadrature.
    const H_REF: [(f64, [f64; 7]); 4] = [
        (
            0.5,
            [
                0.860_526_765_726_158_6,
                0.672_691_792_868_549_1,
                1.139_473_234_273_841_4,
                3.327_308_207_131_450_9,
                14.860_526_765_726_159,
                92.672_691_792_868_55,
                753.139_473_234_273_8,
            ],
        ),
        (
            5.0,
            [
                0.188_142_774_571_418_22,
                0.033_896_220_611_621_765,
                0.011_857_225_428_581_776,
                0.006_103_779_388_378_235,
                0.004_142_774_571_418_224,
                0.003_496_220_611_621_765,
                0.003_537_225_428_581_776,
            ],
        ),
        (
            30.0,
            [
                0.033_260_215_860_585_684,
                0.001_103_861_181_088_416_4,
                7.311_747_274_764_889e-5,
                7.249_930_022_694_692e-6,
                9.566_013_264_251_83e-7,
                1.574_773_847_127_156_8e-7,
                3.105_299_456_247_127e-8,
            ],
        ),
        (
            100.0,
            [
                0.009_998_002_392_839_962,
                9.994_011_949_958_95e-5,
                1.997_607_160_038_175e-6,
                5.988_050_041_050_683e-8,
                2.392_839_961_824_868e-9,
                1.194_995_894_931_693_5e-10,
                7.160_038_175_131_71e-12,
            ],
        ),
    ];

    #[test]
    fn moments_match_reference() {
        for (z, refs) in H_REF {
            for (m, want) in refs.iter().enumerate() {
                let got = auxiliary_h(m, z).unwrap().value;
                assert!(rel(got, *want) < 1e-12, "h_{m}({z}) = {got}, want {want}");
            }
        }
    }

    #[test]
    fn f_examples() {
        assert!(rel(auxiliary_f(1.0).unwrap(), 0.621_449_624_235_813_4) < 1e-12);
        assert!(rel(auxiliary_f(100.0).unwrap(), 0.009_998_002_392_839_962) < 1e-12);
        assert!(rel(auxiliary_f(1e-12).unwrap(), FRAC_PI_2) < 1e-10);
    }

    #[test]
    fn switchover_overlap() {
        for m in 0..=MAX_KERNEL_ORDER {
            for z in [30.0, 45.0, 80.0] {
                let asym = match moment_asymptotic(m, z) {
                    Some(v) => v,
                    None => continue,
                };
                let inv = 1.0 / z;
                let quad = integrate_to_infinity(
                    move |u: f64| u.powi(m as i32) * (-u).exp() / (1.0 + (u * inv).powi(2)),
                    0.0,
                    &[1.0, m as f64 + 1.0],
                    aux_tolerance(),
                )
                .unwrap()
                .value
                    * inv.powi(m as i32 + 1);
                assert!(rel(asym, quad) < 1e-10, "m = {m}, z = {z}");
            }
        }
    }

    #[test]
    fn deficit_matches_direct_difference() {
        for z in [0.3, 1.0, 1.9, 2.0, 5.0] {
            let d = auxiliary_f_deficit(z).unwrap().value;
            let direct = auxiliary_f(z).unwrap() - FRAC_PI_2;
            assert!((d - direct).abs() < 1e-13, "z = {z}");
        }
        // f(z) − π/2 ≈ z ln z + (γ − 1) z for small z.
        let z = 1e-6;
        let d = auxiliary_f_deficit(z).unwrap().value;
        assert!(rel(d, z * z.ln() + (EULER_GAMMA - 1.0) * z) < 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(auxiliary_f(0.0).is_err());
        assert!(auxiliary_f(-1.0).is_err());
        assert!(kernel_deriv(1.0, MAX_KERNEL_ORDER + 1, &unit()).is_err());
        assert!(kernel_deriv(0.0, 1, &unit()).is_err());
    }

    #[test]
    fn e1_matches_real_reference() {
        // E₁(1), E₁(3), E₁(0.1)
        for (x, want) in [
            (1.0, 0.219_383_934_395_520_27),
            (3.0, 0.013_048_381_094_197_04),
            (0.1, 1.822_923_958_419_390_7),
        ] {
            let got = exp_integral_e1(Complex64::new(x, 0.0));
            assert!(rel(got.re, want) < 1e-13 && got.im.abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn e1_on_imaginary_axis_matches_auxiliary_pair() {
        // E₁(−ix) = e^{ix} (g(x) + i f(x))
        for x in [0.5, 1.9, 2.1, 7.0, 40.0] {
            let got = exp_integral_e1(Complex64::new(0.0, -x));
            let aux = Complex64::new(auxiliary_g(x).unwrap(), auxiliary_f(x).unwrap());
            let want = Complex64::from_polar(1.0, x) * aux;
            assert!((got - want).norm() < 1e-12 * want.norm(), "x = {x}");
        }
    }

    #[test]
    fn mu3_transform_branches_agree() {
        let gl = crate::quadrature::gauss_legendre(40);
        for a in [-3.0, -1.99, 0.0, 0.7, 1.999, 2.0, 5.0, 31.0] {
            let got = mu3_transform(a);
            let quad: Complex64 = gl
                .0
                .iter()
                .zip(&gl.1)
                .map(|(x, w)| {
                    let mu = 0.5 * (x + 1.0);
                    0.5 * w * mu.powi(3) * Complex64::from_polar(1.0, -a * mu)
                })
                .sum();
            assert!((got - quad).norm() < 1e-13, "a = {a}");
        }
        assert!((mu3_transform(0.0) - 0.25).norm() < 1e-16);
    }

    #[test]
    fn laplace_kernel_examples() {
        let p = unit();
        assert!(rel(laplace_kernel(0.5, &p).unwrap().value, 0.621_449_624_235_813_4) < 1e-12);
        assert!(rel(laplace_kernel(50.0, &p).unwrap().value, 0.009_998_002_392_839_962) < 1e-12);
        assert!(rel(laplace_kernel(1e-10, &p).unwrap().value, FRAC_PI_2) < 1e-8);
        let k0 = kernel_deriv(0.5, 0, &p).unwrap().value;
        assert!(rel(k0, laplace_kernel(0.5, &p).unwrap().value / 0.5) < 1e-12);
    }

    fn richardson_derivative(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
        let d = |h: f64| (f(r + h) - f(r - h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        let p = unit();
        for r in [0.01, 0.1, 1.0, 10.0, 100.0] {
            for n in 1..=MAX_KERNEL_ORDER {
                let analytic = kernel_deriv(r, n, &p).unwrap().value;
                let fd = richardson_derivative(
                    |x| kernel_deriv(x, n - 1, &p).unwrap().value,
                    r,
                    1e-3 * r,
                );
                assert!(rel(fd, analytic) < 1e-7, "n = {n}, r = {r}");
                let analytic = subtracted_kernel_deriv(r, n, &p).unwrap().value;
                let fd = richardson_derivative(
                    |x| subtracted_kernel_deriv(x, n - 1, &p).unwrap().value,
                    r,
                    1e-3 * r,
                );
                assert!(rel(fd, analytic) < 1e-6, "subtracted n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn third_derivative_against_third_difference() {
        let p = unit();
        let k = |x: f64| kernel_deriv(x, 0, &p).unwrap().value;
        let d3 = |h: f64| (k(1.0 + 2.0 * h) - 2.0 * k(1.0 + h) + 2.0 * k(1.0 - h) - k(1.0 - 2.0 * h)) / (2.0 * h.powi(3));
        let extrapolated = (4.0 * d3(5e-3) - d3(1e-2)) / 3.0;
        let analytic = kernel_deriv(1.0, 3, &p).unwrap().value;
        assert!(rel(extrapolated, analytic) < 1e-4);
    }

    #[test]
    fn subtracted_kernel_differs_by_static_term() {
        let p = AtomParams::new(1.3, 1.0, 2.0).unwrap();
        for r in [0.05, 0.7, 3.0] {
            for n in 0..=4 {
                let full = kernel_deriv(r, n, &p).unwrap().value;
                let sub = subtracted_kernel_deriv(r, n, &p).unwrap().value;
                let stat = FRAC_PI_2 / p.omega0 * (-1.0f64).powi(n as i32) * factorial(n)
                    / r.powi(n as i32 + 1);
                assert!((full - sub - stat).abs() < 1e-11 * stat.abs(), "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn k_integral_far_field() {
        let p = unit();
        let cfg = QuadratureConfig::default();
        let g = oscillatory_k_integral(100.0, &p, &cfg).unwrap().value;
        let asym = PI / (4.0 * 100.0);
        assert!(rel(g, asym) < 0.02);
    }

    #[test]
    fn k_integral_equals_subtracted_x_form() {
        // −2G(r) = (I(r) − π/(2ω₀)) / r, and likewise for every derivative.
        let p = AtomParams::new(1.0, 1.0, 1.0).unwrap();
        let cfg = QuadratureConfig::default();
        for r in [0.1, 1.0, 10.0] {
            for n in [0, 3] {
                let g = oscillatory_k_integral_deriv(r, n, &p, &cfg).unwrap().value;
                let x = subtracted_kernel_deriv(r, n, &p).unwrap().value;
                assert!(rel(-2.0 * g, x) < 1e-7, "n = {n}, r = {r}: {} vs {x}", -2.0 * g);
            }
        }
    }

    #[test]
    fn k_integrand_is_finite_at_origin() {
        assert_eq!(sinc(0.0), 1.0);
        let q = damped_q(0, 1.0, 0.1, Tolerance::default()).unwrap();
        assert!(q.value.is_finite());
    }
}
