//! Physical parameters, kinematics and conducting-wall mode functions.
//!
//! Natural units with ħ = 1 throughout; the speed of light is configurable.
//! The wall occupies the plane z = 0 and the atom lives in z > 0.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Speed of light in atomic units.
pub const C_ATOMIC: f64 = 137.035_999_084;

/// Unit convention for the speed of light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// c = 1: the light round trip to the wall takes 2R.
    #[default]
    LightUnits,
    /// Hartree atomic units, c ≈ 137.036.
    Atomic,
}

impl Units {
    pub fn speed_of_light(self) -> f64 {
        match self {
            Units::LightUnits => 1.0,
            Units::Atomic => C_ATOMIC,
        }
    }
}

/// Two-level atom parameters.
///
/// `pz2` is fixed to one and `g2` carries the full product g²·⟨p_z²⟩, which
/// is the only combination that reaches the force formulas. The couplings
/// obey the Thomas-Reiche-Kuhn relation `lambda2 = g2 * pz2 / omega0` and
/// `lambda2 = π α₀ ω₀²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub omega0: f64,
    pub alpha0: f64,
    pub pz2: f64,
    pub g2: f64,
    pub lambda2: f64,
    pub c: f64,
}

impl AtomParams {
    pub fn new(omega0: f64, alpha0: f64, c: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("alpha0", alpha0), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be finite and positive, got {v}"));
            }
        }
        let lambda2 = PI * alpha0 * omega0 * omega0;
        Ok(Self {
            omega0,
            alpha0,
            pz2: 1.0,
            g2: lambda2 * omega0,
            lambda2,
            c,
        })
    }

    /// Parameters of the switch-on figures: ω₀ = 0.057 Hartree and
    /// α₀ = 162.7 bohr³ expressed with c = 1 and lengths in bohr.
    pub fn figure_preset() -> Self {
        Self::new(0.057 / C_ATOMIC, 162.7, 1.0).expect("preset parameters are valid")
    }

    pub fn with_units(omega0: f64, alpha0: f64, units: Units) -> Result<Self> {
        Self::new(omega0, alpha0, units.speed_of_light())
    }

    /// Copy with both couplings multiplied by `factor` (the coupling
    /// amplitudes g and λ scale by `sqrt(factor)`). TRK closure is kept.
    pub fn scale_couplings(&self, factor: f64) -> Self {
        Self {
            g2: self.g2 * factor,
            lambda2: self.lambda2 * factor,
            ..*self
        }
    }

    /// Dimensionless distance 2 r ω₀ / c, the argument of the auxiliary kernel.
    pub fn phase_distance(&self, r: f64) -> f64 {
        2.0 * r * self.omega0 / self.c
    }

    /// Wavelength scale c/ω₀.
    pub fn reduced_wavelength(&self) -> f64 {
        self.c / self.omega0
    }
}

/// Sentinel-aware release distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReleaseDistance {
    Finite(f64),
    Infinite,
}

impl ReleaseDistance {
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Some(Self::Infinite);
        }
        t.parse::<f64>().ok().map(|v| {
            if v.is_infinite() {
                Self::Infinite
            } else {
                Self::Finite(v)
            }
        })
    }
}

/// Atom position and wall-normal velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub r: f64,
    pub v: f64,
    pub r0: ReleaseDistance,
}

impl Kinematics {
    pub fn new(r: f64, v: f64, r0: ReleaseDistance, params: &AtomParams) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("distance must be positive, got {r}"));
        }
        if let ReleaseDistance::Finite(r0) = r0 {
            if !(r0 > 0.0 && r0.is_finite()) {
                return domain(format!("release distance must be positive, got {r0}"));
            }
        }
        if !(v.abs() / params.c < 0.5) {
            return domain(format!("|v|/c = {} violates the adiabaticity bound 1/2", v.abs() / params.c));
        }
        Ok(Self { r, v, r0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    TE,
    TM,
}

/// Half-space wave vector in spherical coordinates about the wall normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub k: f64,
    pub theta: f64,
    pub phi: f64,
    pub polarization: Polarization,
}

impl WaveVector {
    pub fn new(k: f64, theta: f64, phi: f64, polarization: Polarization) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return domain(format!("wave number must be positive, got {k}"));
        }
        if !(0.0..=PI / 2.0 + 1e-15).contains(&theta) {
            return domain(format!("theta must lie in [0, π/2], got {theta}"));
        }
        Ok(Self {
            k,
            theta: theta.min(PI / 2.0),
            phi: phi.rem_euclid(2.0 * PI),
            polarization,
        })
    }

    pub fn kz(&self) -> f64 {
        self.k * self.theta.cos()
    }

    pub fn k_parallel(&self) -> f64 {
        self.k * self.theta.sin()
    }

    /// Unit vector along k_∥ (defined through phi also when k_∥ = 0).
    pub fn parallel_unit(&self) -> [f64; 2] {
        [self.phi.cos(), self.phi.sin()]
    }

    pub fn frequency(&self, c: f64) -> f64 {
        self.k * c
    }
}

pub type Vec3c = [Complex64; 3];

/// Mode function u_{k,λ}(x_∥, z) of the conducting half space, normalized
/// in a box of side `box_side`:
///
/// TE: √(2/L³) (k̂_∥ × ẑ) sin(k_z z) e^{i k_∥·x}
/// TM: √(2/L³) (1/k) [k_∥ ẑ cos(k_z z) − i k_z k̂_∥ sin(k_z z)] e^{i k_∥·x}
/// Split of a mode function as `(s sin(k_z z) + c cos(k_z z)) e^{i k_∥·x_∥}`.
pub fn mode_function_parts(wv: &WaveVector, box_side: f64) -> Result<(Vec3c, Vec3c)> {
    if !(box_side > 0.0) {
        return domain(format!("box side must be positive, got {box_side}"));
    }
    let norm = (2.0 / box_side.powi(3)).sqrt();
    let [ux, uy] = wv.parallel_unit();
    let kpar = wv.k_parallel();
    let kz = wv.kz();
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(norm * x, 0.0);
    let parts = match wv.polarization {
        // k̂_∥ × ẑ = (uy, -ux, 0)
        Polarization::TE => ([re(uy), re(-ux), zero], [zero; 3]),
        Polarization::TM => {
            let t = Complex64::new(0.0, -norm * kz / wv.k);
            ([t * ux, t * uy, zero], [zero, zero, re(kpar / wv.k)])
        }
    };
    Ok(parts)
}

pub fn mode_function(wv: &WaveVector, x_par: [f64; 2], z: f64, box_side: f64) -> Result<Vec3c> {
    if !(z >= 0.0) {
        return domain(format!("z = {z} lies behind the wall"));
    }
    let (sv, cv) = mode_function_parts(wv, box_side)?;
    let [ux, uy] = wv.parallel_unit();
    let plane = Complex64::from_polar(1.0, wv.k_parallel() * (ux * x_par[0] + uy * x_par[1]));
    let (s, c) = (wv.kz() * z).sin_cos();
    Ok([0, 1, 2].map(|i| plane * (sv[i] * s + cv[i] * c)))
}

/// Hermitian inner product Σ conj(a_i) b_i.
pub fn dot_conj(a: &Vec3c, b: &Vec3c) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear product Σ a_i b_i.
pub fn dot(a: &Vec3c, b: &Vec3c) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn conj3(a: &Vec3c) -> Vec3c {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

/// Direction on the half-space stencil used to expand each |k| of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
    pub polarization: Polarization,
}

/// Truncated set of field modes for the discrete oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    k_values: Vec<f64>,
    box_side: f64,
    excited_states: usize,
    stencil: Vec<Direction>,
}

impl ModeGrid {
    /// Grid with one TM direction at θ = π/4 per wave number.
    pub fn new(k_values: Vec<f64>, box_side: f64) -> Result<Self> {
        Self::with_stencil(
            k_values,
            box_side,
            vec![Direction {
                theta: PI / 4.0,
                phi: 0.0,
                polarization: Polarization::TM,
            }],
        )
    }

    pub fn with_stencil(k_values: Vec<f64>, box_side: f64, stencil: Vec<Direction>) -> Result<Self> {
        if k_values.is_empty() {
            return domain("mode grid needs at least one wave number");
        }
        if k_values.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return domain("wave numbers must be positive and finite");
        }
        if k_values.windows(2).any(|w| w[1] <= w[0]) {
            return domain("wave numbers must be strictly increasing");
        }
        if !(box_side > 0.0 && box_side.is_finite()) {
            return domain(format!("box side must be positive, got {box_side}"));
        }
        if stencil.is_empty() {
            return domain("direction stencil is empty");
        }
        Ok(Self {
            k_values,
            box_side,
            excited_states: 1,
            stencil,
        })
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    pub fn excited_states(&self) -> usize {
        self.excited_states
    }

    pub fn modes(&self) -> Vec<WaveVector> {
        self.k_values
            .iter()
            .flat_map(|&k| {
                self.stencil.iter().map(move |d| WaveVector {
                    k,
                    theta: d.theta,
                    phi: d.phi,
                    polarization: d.polarization,
                })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.k_values.len() * self.stencil.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
