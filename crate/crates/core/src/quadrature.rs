//! Numerical integration primitives.
//!
//! Adaptive 21-point Gauss-Kronrod on finite intervals (QUADPACK-style error
//! estimate), composite Gauss-Legendre rules for nested integrals, and
//! Neville extrapolation of a damping ladder to zero damping.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be accumulated by the quadrature rules.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Default
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// An integral value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_error: f64,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_793,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// 10-point Gauss weights, paired with XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Single 21-point Gauss-Kronrod panel on `[a, b]`.
pub fn gauss_kronrod_21<T, F>(f: &F, a: f64, b: f64) -> Estimate<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut kronrod = f_center * WGK[10];
    let mut gauss = T::default();
    let mut res_abs = f_center.magnitude() * WGK[10];
    let mut values = [(T::default(), T::default()); 10];

    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
        *slot = (f1, f2);
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for (j, (f1, f2)) in values.iter().enumerate() {
        res_asc += WGK[j] * ((*f1 - mean).magnitude() + (*f2 - mean).magnitude());
    }

    let abs_half = half.abs();
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Estimate {
        value: kronrod * half,
        abs_error: err,
    }
}

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

/// Controls for the damped oscillatory integrals.
///
/// `eta_ladder` holds damping rates in the dimensionless phase variable of
/// each integrand; `k_max` is the soft wave-number cutoff of the transient
/// tail in units of ω₀/c.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub k_max: f64,
    pub eta_ladder: Vec<f64>,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            k_max: 1.0e3,
            eta_ladder: vec![0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625],
            rel_tol: 1e-7,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(Error::Domain(format!("k_max must be positive, got {}", self.k_max)));
        }
        if self.eta_ladder.len() < 3 {
            return Err(Error::Domain("damping ladder needs at least three rungs".into()));
        }
        if self.eta_ladder.iter().any(|e| !(*e > 0.0 && e.is_finite()))
            || self.eta_ladder.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::Domain(
                "damping ladder must be positive and strictly decreasing".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 0.1) {
            return Err(Error::Domain(format!("rel_tol must lie in (0, 0.1), got {}", self.rel_tol)));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            abs: 0.0,
            rel: (self.rel_tol * 1e-3).max(1e-13),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Globally adaptive Gauss-Kronrod integration over `[a, b]`, starting from
/// the panels delimited by `breakpoints` (which must lie inside `[a, b]`).
pub fn integrate_with_breaks<T, F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut panels: Vec<(f64, f64, Estimate<T>)> = edges
        .windows(2)
        .map(|w| (w[0], w[1], gauss_kronrod_21(&f, w[0], w[1])))
        .collect();

    loop {
        let (total, err) = panels.iter().fold((T::default(), 0.0), |(v, e), p| {
            (v + p.2.value, e + p.2.abs_error)
        });
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            return Ok(Estimate {
                value: total,
                abs_error: err,
            });
        }
        if panels.len() >= tol.max_subdivisions {
            return Err(Error::Convergence {
                context: format!("adaptive quadrature on [{a}, {b}]"),
                last: total.magnitude(),
                previous: err,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.abs_error.total_cmp(&y.1 .2.abs_error))
            .expect("at least one panel");
        let (lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Panel cannot be split further in floating point.
            return Err(Error::Convergence {
                context: format!("adaptive quadrature near {lo}"),
                last: total.magnitude(),
                previous: err,
            });
        }
        panels.push((lo, mid, gauss_kronrod_21(&f, lo, mid)));
        panels.push((mid, hi, gauss_kronrod_21(&f, mid, hi)));
    }
}

pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Integral over `[a, ∞)` via the map `x = a + t/(1-t)`, `t ∈ [0, 1)`.
pub fn integrate_to_infinity<T, F>(
    f: F,
    a: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mapped = |t: f64| {
        if t >= 1.0 {
            return T::default();
        }
        let s = 1.0 - t;
        let x = a + t / s;
        let v = f(x);
        if v.magnitude().is_finite() {
            v * (1.0 / (s * s))
        } else {
            T::default()
        }
    };
    let breaks: Vec<f64> = breakpoints
        .iter()
        .filter(|x| **x > a)
        .map(|x| (x - a) / (1.0 + x - a))
        .collect();
    integrate_with_breaks(mapped, 0.0, 1.0, &breaks, tol)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Polynomial (Neville) extrapolation of `(h_i, y_i)` to `h = 0`.
///
/// Returns the extrapolated value from all points and the magnitude of the
/// difference to the extrapolant built from all points but the last, which
/// serves as the error estimate.
pub fn neville_to_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(h.len(), y.len());
    assert!(!h.is_empty());
    let n = h.len();
    let mut p = y.to_vec();
    let mut diagonal = vec![y[0]];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
        diagonal.push(p[0]);
    }
    let best = diagonal[n - 1];
    let err = if n >= 2 {
        (best - diagonal[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    (best, err)
}
