//! Discrete-mode dressing of a two-level atom near the wall.
//!
//! Finite mode grids in a box of side `L`; one excited state with dipole
//! `p_eg = ẑ`, coupling `g = √g2` and mode frequencies `ω_k = k c`. Used as an
//! oracle against the continuum formulas, not as a production path.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::model::{dot, dot_conj, mode_function, mode_function_parts, AtomParams, ModeGrid, Vec3c, WaveVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Straight path from `x0` at time `t` to `xf` at time `t + tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub x0: [f64; 3],
    pub xf: [f64; 3],
    pub t: f64,
    pub tau: f64,
}

impl PathSpec {
    pub fn new(x0: [f64; 3], xf: [f64; 3], t: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("path duration must be positive, got {tau}"));
        }
        if !(x0[2] >= 0.0 && xf[2] >= 0.0) {
            return domain("path crosses behind the wall");
        }
        if !(x0.iter().chain(&xf).all(|x| x.is_finite()) && t.is_finite()) {
            return domain("path endpoints must be finite");
        }
        Ok(PathSpec { x0, xf, t, tau })
    }

    pub fn stationary(x: [f64; 3], tau: f64) -> Result<Self> {
        Self::new(x, x, 0.0, tau)
    }

    pub fn position(&self, s: f64) -> [f64; 3] {
        let w = (s - self.t) / self.tau;
        [0, 1, 2].map(|i| self.x0[i] + (self.xf[i] - self.x0[i]) * w)
    }

    fn displacement(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.xf[i] - self.x0[i])
    }
}

/// Vacuum-to-dressed amplitudes after `step_count` steps of size `epsilon`.
///
/// `c_mat` is row-major `n × n` over the grid's modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorState {
    pub a: Complex64,
    pub b: Vec<Complex64>,
    pub c_mat: Vec<Complex64>,
    pub step_count: usize,
    pub epsilon: f64,
}

impl PropagatorState {
    pub fn vacuum(modes: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return domain(format!("step must be positive, got {epsilon}"));
        }
        let zero = Complex64::new(0.0, 0.0);
        Ok(PropagatorState {
            a: zero,
            b: vec![zero; modes],
            c_mat: vec![zero; modes * modes],
            step_count: 0,
            epsilon,
        })
    }

    pub fn modes(&self) -> usize {
        self.b.len()
    }

    pub fn elapsed(&self) -> f64 {
        self.step_count as f64 * self.epsilon
    }
}

fn mode_values(path: &PathSpec, modes: &[WaveVector], box_side: f64, s: f64) -> Result<Vec<Vec3c>> {
    let x = path.position(s);
    modes.iter().map(|wv| mode_function(wv, [x[0], x[1]], x[2], box_side)).collect()
}

/// One explicit step of the coefficient difference equations.
///
/// Mode functions are sampled at `X(t + (n+1) ε)`. The coupled equations keep
/// every term through second order in the amplitudes, including `B·B` and `C·B`.
pub fn step_recursion(
    state: &PropagatorState,
    path: &PathSpec,
    grid: &ModeGrid,
    params: &AtomParams,
) -> Result<PropagatorState> {
    step_impl(state, path, grid, params, true)
}

fn step_impl(
    state: &PropagatorState,
    path: &PathSpec,
    grid: &ModeGrid,
    params: &AtomParams,
    nonlinear: bool,
) -> Result<PropagatorState> {
    let modes = grid.modes();
    let n = modes.len();
    if state.modes() != n || state.c_mat.len() != n * n {
        return domain(format!("state holds {} modes, grid has {n}", state.modes()));
    }
    let eps = state.epsilon;
    let s = path.t + (state.step_count + 1) as f64 * eps;
    let u = mode_values(path, &modes, grid.box_side(), s)?;
    let w: Vec<f64> = modes.iter().map(|m| m.frequency(params.c)).collect();
    let g = params.g2.sqrt();
    let l2 = params.lambda2;
    let ie = I * eps;

    // (g/√ω_k) p·u_k and (g/√ω_k) p·u_k† with p = ẑ
    let gu: Vec<Complex64> = (0..n).map(|k| u[k][2] * g / w[k].sqrt()).collect();
    let gu_dag: Vec<Complex64> = (0..n).map(|k| u[k][2].conj() * g / w[k].sqrt()).collect();
    // λ²/√(ω_k ω_l) u_k†·u_l and u_k†·u_l†
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    let mut pair = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let uk_dag = [u[k][0].conj(), u[k][1].conj(), u[k][2].conj()];
        for l in 0..n {
            let scale = l2 / (w[k] * w[l]).sqrt();
            h[k * n + l] = dot_conj(&u[k], &u[l]) * scale;
            let ul_dag = [u[l][0].conj(), u[l][1].conj(), u[l][2].conj()];
            pair[k * n + l] = dot(&uk_dag, &ul_dag) * scale;
        }
    }

    let b = &state.b;
    let cm = &state.c_mat;
    let gb: Complex64 = (0..n).map(|l| gu[l] * b[l]).sum();
    let quad = if nonlinear { 1.0 } else { 0.0 };

    let self_energy: Complex64 = (0..n).map(|k| h[k * n + k]).sum();
    let a = state.a - ie * self_energy - ie * gb;

    let mut b_new = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut hb = Complex64::new(0.0, 0.0);
        let mut gc = Complex64::new(0.0, 0.0);
        for l in 0..n {
            hb += h[k * n + l] * b[l];
            gc += gu[l] * cm[k * n + l];
        }
        b_new[k] = (1.0 - ie * (params.omega0 + w[k])) * b[k] - ie * gu_dag[k] + quad * ie * gb * b[k]
            - ie * 2.0 * hb
            - ie * 2.0 * gc;
    }

    let mut c_new = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for l in 0..n {
            let mut hc_l = Complex64::new(0.0, 0.0);
            let mut hc_k = Complex64::new(0.0, 0.0);
            let mut gc = Complex64::new(0.0, 0.0);
            for q in 0..n {
                hc_l += h[l * n + q] * cm[k * n + q];
                hc_k += h[k * n + q] * cm[q * n + l];
                gc += gu[q] * cm[l * n + q];
            }
            c_new[k * n + l] = (1.0 - ie * (w[k] + w[l])) * cm[k * n + l] - ie * pair[k * n + l]
                - ie * 2.0 * hc_l
                - ie * 2.0 * hc_k
                - quad * ie * 2.0 * gc * b[k]
                - ie * gu_dag[l] * b[k];
        }
    }

    let finite = a.is_finite() && b_new.iter().chain(&c_new).all(|z| z.is_finite());
    if !finite {
        return Err(Error::Overflow(format!("recursion diverged at step {}", state.step_count + 1)));
    }
    Ok(PropagatorState {
        a,
        b: b_new,
        c_mat: c_new,
        step_count: state.step_count + 1,
        epsilon: eps,
    })
}

/// Runs `steps` recursion steps across the whole path.
pub fn run_recursion(path: &PathSpec, grid: &ModeGrid, params: &AtomParams, steps: usize) -> Result<PropagatorState> {
    if steps == 0 {
        return domain("at least one step is required");
    }
    run_impl(path, grid, params, steps, true)
}

fn run_impl(path: &PathSpec, grid: &ModeGrid, params: &AtomParams, steps: usize, nonlinear: bool) -> Result<PropagatorState> {
    let mut state = PropagatorState::vacuum(grid.len(), path.tau / steps as f64)?;
    for _ in 0..steps {
        state = step_impl(&state, path, grid, params, nonlinear)?;
    }
    Ok(state)
}

/// Divided difference `exp[z₀, …, z_m]` for `m ≤ 2`.
///
/// Equals the simplex integral of `exp(Σ z_i t_i)`.
pub fn exp_divided_difference(z: &[Complex64]) -> Complex64 {
    match z.len() {
        1 => z[0].exp(),
        2 => z[0].exp() * phi1(z[1] - z[0]),
        3 => {
            let pairs = [(0, 1, 2), (1, 0, 2), (2, 0, 1)];
            let (a, b, c) = pairs
                .into_iter()
                .max_by(|p, q| (z[p.1] - z[p.2]).norm().total_cmp(&(z[q.1] - z[q.2]).norm()))
                .unwrap();
            let spread = (z[b] - z[c]).norm();
            if spread < 0.5 {
                let m = (z[0] + z[1] + z[2]) / 3.0;
                m.exp() * series3([z[0] - m, z[1] - m, z[2] - m])
            } else {
                let ab = z[a].exp() * phi1(z[b] - z[a]);
                let ac = z[a].exp() * phi1(z[c] - z[a]);
                (ac - ab) / (z[c] - z[b])
            }
        }
        _ => panic!("divided differences beyond second order are not needed"),
    }
}

/// `(eˣ − 1)/x`.
fn phi1(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term *= x / k as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (x.exp() - 1.0) / x
    }
}

/// `Σ_{n≥2} h_{n−2}(w)/n!` with complete homogeneous polynomials `h`.
fn series3(w: [Complex64; 3]) -> Complex64 {
    const TERMS: usize = 30;
    // h_k over a growing variable set: h_k(x..x_m) = h_k(x..x_{m−1}) + x_m h_{k−1}(x..x_m)
    let mut hk = [Complex64::new(0.0, 0.0); TERMS];
    hk[0] = Complex64::new(1.0, 0.0);
    for k in 1..TERMS {
        hk[k] = hk[k - 1] * w[0];
    }
    for x in &w[1..] {
        for k in 1..TERMS {
            let prev = hk[k - 1];
            hk[k] += *x * prev;
        }
    }
    let mut fact = 2.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, h) in hk.iter().enumerate().take(TERMS - 2) {
        sum += h / fact;
        fact *= (k + 3) as f64;
    }
    sum
}

/// `∫₀^τ e^{aσ} dσ`.
fn single(a: Complex64, tau: f64) -> Complex64 {
    tau * phi1(a * tau)
}

/// `∫₀^τ dσ ∫₀^σ dρ e^{aσ + bρ}`.
fn ordered(a: Complex64, b: Complex64, tau: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    tau * tau * exp_divided_difference(&[zero, a * tau, (a + b) * tau])
}

/// Along a straight path, `u_k(X(σ)) = Σ_± c_± e^{α_± σ}` exactly.
fn exponential_parts(wv: &WaveVector, path: &PathSpec, box_side: f64) -> Result<[(Vec3c, Complex64); 2]> {
    let (sv, cv) = mode_function_parts(wv, box_side)?;
    let [ux, uy] = wv.parallel_unit();
    let kp = wv.k_parallel();
    let kz = wv.kz();
    let d = path.displacement();
    let par_rate = kp * (ux * d[0] + uy * d[1]) / path.tau;
    let z_rate = kz * d[2] / path.tau;
    let plane0 = kp * (ux * path.x0[0] + uy * path.x0[1]);
    let mut out = [([Complex64::new(0.0, 0.0); 3], Complex64::new(0.0, 0.0)); 2];
    for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
        let phase = Complex64::from_polar(1.0, plane0 + sign * kz * path.x0[2]);
        // sin = (e^{iθ} − e^{−iθ})/2i, cos = (e^{iθ} + e^{−iθ})/2
        let coef = [0, 1, 2].map(|i| phase * (sv[i] * sign / (2.0 * I) + cv[i] * 0.5));
        *slot = (coef, I * (par_rate + sign * z_rate));
    }
    Ok(out)
}

/// Closed-form `O(g²)` vacuum amplitude along a straight path.
///
/// `−i Σ_k (λ²/ω_k) ∫|u_k|² − Σ_k (g²/ω_k) ∫∫_{r<s} e^{−iΩ_k(s−r)} (p·u_k(s))(p·u_k†(r))`
/// with `Ω_k = ω_k + ω₀`.
pub fn second_order_a(path: &PathSpec, grid: &ModeGrid, params: &AtomParams) -> Result<Complex64> {
    let tau = path.tau;
    let mut total = Complex64::new(0.0, 0.0);
    for wv in grid.modes() {
        let w = wv.frequency(params.c);
        let big = w + params.omega0;
        let parts = exponential_parts(&wv, path, grid.box_side())?;
        let mut norm = Complex64::new(0.0, 0.0);
        let mut vertex = Complex64::new(0.0, 0.0);
        for (cj, aj) in &parts {
            for (ck, ak) in &parts {
                norm += dot_conj(cj, ck) * single(aj.conj() + ak, tau);
                vertex += cj[2] * ck[2].conj() * ordered(aj - I * big, ak.conj() + I * big, tau);
            }
        }
        total += -I * params.lambda2 / w * norm - params.g2 / w * vertex;
    }
    Ok(total)
}

fn wall_weight(wv: &WaveVector, c: f64) -> f64 {
    wv.kz() * wv.theta.cos().powi(2) / wv.frequency(c)
}

fn check_motion(r: f64, v: [f64; 3], tau: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("distance must be positive, got {r}"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return domain(format!("elapsed time must be non-negative, got {tau}"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return domain("velocity must be finite");
    }
    if r + v[2] * tau <= 0.0 {
        return domain("trajectory reaches the wall");
    }
    Ok(())
}

/// `P(t+τ) − P₀` for an atom starting at distance `r` with constant velocity `v`.
///
/// Real form obtained from the generating function; only `v_z` enters and only
/// the wall-normal component is nonzero.
pub fn momentum_expectation(r: f64, v: [f64; 3], tau: f64, grid: &ModeGrid, params: &AtomParams) -> Result<[f64; 3]> {
    check_motion(r, v, tau)?;
    if tau == 0.0 {
        return Ok([0.0; 3]);
    }
    let vol = grid.box_side().powi(3);
    let vz = v[2];
    let mut lam = 0.0;
    let mut dyn_ = 0.0;
    for wv in grid.modes() {
        let weight = wall_weight(&wv, params.c);
        let kz = wv.kz();
        let big = wv.frequency(params.c) + params.omega0;
        let phase = Complex64::from_polar(1.0, 2.0 * kz * r);
        lam += weight * (phase * single(I * 2.0 * kz * vz, tau)).im;
        dyn_ += weight * (phase * ordered(I * (kz * vz - big), I * (kz * vz + big), tau)).re;
    }
    let pz = -2.0 * params.lambda2 / vol * lam + 2.0 * params.g2 / vol * dyn_;
    Ok([0.0, 0.0, pz])
}

/// `d/dτ` of [`momentum_expectation`], wall-normal component.
pub fn momentum_rate(r: f64, v: [f64; 3], tau: f64, grid: &ModeGrid, params: &AtomParams) -> Result<f64> {
    check_motion(r, v, tau)?;
    let vol = grid.box_side().powi(3);
    let vz = v[2];
    let mut lam = 0.0;
    let mut dyn_ = 0.0;
    for wv in grid.modes() {
        let weight = wall_weight(&wv, params.c);
        let kz = wv.kz();
        let big = wv.frequency(params.c) + params.omega0;
        lam += weight * (2.0 * kz * (r + vz * tau)).sin();
        let phase = Complex64::from_polar(1.0, 2.0 * kz * r + (kz * vz - big) * tau);
        dyn_ += weight * (phase * single(I * (kz * vz + big), tau)).re;
    }
    Ok(-2.0 * params.lambda2 / vol * lam + 2.0 * params.g2 / vol * dyn_)
}

/// Force on a stationary atom a time `tau` after switch-on, summed over the grid:
/// `(2/L³) Σ_k W_k [−λ² sin φ_k + (g²/Ω_k)(sin φ_k + sin(Ω_k τ − φ_k))]`, `φ_k = 2k_z r`.
pub fn force_mode_sum(r: f64, tau: f64, grid: &ModeGrid, params: &AtomParams) -> Result<f64> {
    check_motion(r, [0.0; 3], tau)?;
    let vol = grid.box_side().powi(3);
    let sum: f64 = grid
        .modes()
        .iter()
        .map(|wv| {
            let phi = 2.0 * wv.kz() * r;
            let big = wv.frequency(params.c) + params.omega0;
            wall_weight(wv, params.c)
                * (-params.lambda2 * phi.sin() + params.g2 / big * (phi.sin() + (big * tau - phi).sin()))
        })
        .sum();
    Ok(2.0 * sum / vol)
}

/// `log Z(J)` for the momentum generating function, including the
/// parallel-velocity phases and the `J`-independent normalization.
pub fn log_generating_function(
    r: f64,
    v: [f64; 3],
    tau: f64,
    grid: &ModeGrid,
    params: &AtomParams,
    j: [f64; 3],
) -> Result<Complex64> {
    check_motion(r, v, tau)?;
    let vol = grid.box_side().powi(3);
    let mut total = Complex64::new(0.0, 0.0);
    for wv in grid.modes() {
        let w = wv.frequency(params.c);
        let big = w + params.omega0;
        let kz = wv.kz();
        let [ux, uy] = wv.parallel_unit();
        let kv_par = wv.k_parallel() * (ux * v[0] + uy * v[1]);
        let cos2 = wv.theta.cos().powi(2);
        let shift = Complex64::from_polar(1.0, kz * j[2]);

        let x = Complex64::from_polar(1.0, 2.0 * kz * r) * single(I * 2.0 * kz * v[2], tau);
        total += I * params.lambda2 / vol * cos2 / w * shift * (x - x.conj());

        let beta = I * (kv_par + kz * v[2] - big);
        let norm = ordered(beta, -beta, tau);
        total -= params.g2 / vol / w * (norm + norm.conj());

        let e = Complex64::from_polar(1.0, 2.0 * kz * r)
            * ordered(I * (kv_par + kz * v[2] - big), I * (kz * v[2] - kv_par + big), tau);
        total += params.g2 / vol * cos2 / w * shift * (e + e.conj());
    }
    Ok(total)
}

/// `Z(J)`; real and positive at `J = 0`.
pub fn generating_function_check(
    r: f64,
    v: [f64; 3],
    tau: f64,
    grid: &ModeGrid,
    params: &AtomParams,
    j: [f64; 3],
) -> Result<Complex64> {
    Ok(log_generating_function(r, v, tau, grid, params, j)?.exp())
}

/// `(1/i) ∂_{J_z} log Z` at `J = 0` by Richardson-extrapolated central differences.
pub fn momentum_from_generating_function(
    r: f64,
    v: [f64; 3],
    tau: f64,
    grid: &ModeGrid,
    params: &AtomParams,
) -> Result<Complex64> {
    let k_max = grid.k_values().iter().cloned().fold(0.0, f64::max);
    let h = 1e-2 / k_max;
    let d = |h: f64| -> Result<Complex64> {
        let up = log_generating_function(r, v, tau, grid, params, [0.0, 0.0, h])?;
        let down = log_generating_function(r, v, tau, grid, params, [0.0, 0.0, -h])?;
        Ok((up - down) / (2.0 * h))
    };
    let (d1, d2) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * d2 - d1) / 3.0 / I)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{conj3, Direction, Polarization};
    use std::f64::consts::PI;

    fn params() -> AtomParams {
        AtomParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn grid() -> ModeGrid {
        let stencil = vec![
            Direction { theta: PI / 4.0, phi: 0.0, polarization: Polarization::TM },
            Direction { theta: PI / 3.0, phi: 1.0, polarization: Polarization::TE },
            Direction { theta: 0.3, phi: 2.5, polarization: Polarization::TM },
        ];
        ModeGrid::with_stencil(vec![0.5, 1.3, 2.2], 6.0, stencil).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn divided_differences() {
        let z = |re: f64, im: f64| Complex64::new(re, im);
        let pts = [z(0.0, 0.0), z(0.0, -3.0), z(0.0, 0.0)];
        let x = z(0.0, -3.0);
        let want = (x.exp() - 1.0 - x) / (x * x);
        assert!(close(exp_divided_difference(&pts), want, 1e-14));
        // series and direct branches agree across the switch
        for s in [0.49, 0.51] {
            let p = [z(0.1, 0.2), z(0.1 + s, 0.2), z(0.1, 0.2 + 0.3 * s)];
            let direct = {
                let ab = p[0].exp() * phi1(p[1] - p[0]);
                let ac = p[0].exp() * phi1(p[2] - p[0]);
                (ac - ab) / (p[2] - p[1])
            };
            assert!(close(exp_divided_difference(&p), direct, 1e-12));
        }
        let tiny = [z(1e-9, 0.0), z(0.0, 1e-9), z(0.0, 0.0)];
        assert!(close(exp_divided_difference(&tiny), z(0.5, 0.0), 1e-8));
    }

    #[test]
    fn zero_couplings_stay_in_vacuum() {
        let mut p = params();
        p.g2 = 0.0;
        p.lambda2 = 0.0;
        let path = PathSpec::new([0.1, 0.0, 1.0], [0.3, 0.2, 1.4], 0.0, 2.0).unwrap();
        let s = run_recursion(&path, &grid(), &p, 50).unwrap();
        assert_eq!(s.a, Complex64::new(0.0, 0.0));
        assert!(s.b.iter().chain(&s.c_mat).all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn first_step_from_vacuum() {
        let p = params();
        let wv = WaveVector::new(1.0, PI / 4.0, 0.0, Polarization::TM).unwrap();
        let g = ModeGrid::new(vec![1.0], 5.0).unwrap();
        assert_eq!(g.modes(), vec![wv]);
        let path = PathSpec::stationary([0.0, 0.0, 0.7], 0.1).unwrap();
        let eps = 0.01;
        let s = step_recursion(&PropagatorState::vacuum(1, eps).unwrap(), &path, &g, &p).unwrap();
        let u = mode_function(&wv, [0.0, 0.0], 0.7, 5.0).unwrap();
        let w = wv.frequency(p.c);
        let a = -I * eps * p.lambda2 / w * dot_conj(&u, &u);
        let b = -I * eps * p.g2.sqrt() / w.sqrt() * u[2].conj();
        let c = -I * eps * p.lambda2 / w * dot(&conj3(&u), &conj3(&u));
        assert!(close(s.a, a, 1e-15) && close(s.b[0], b, 1e-15) && close(s.c_mat[0], c, 1e-15));
    }

    #[test]
    fn stationary_vertex_per_mode() {
        let mut p = params();
        p.lambda2 = 0.0;
        p.g2 = 0.8;
        let wv = WaveVector::new(1.7, 0.4, 0.0, Polarization::TM).unwrap();
        let g = ModeGrid::with_stencil(
            vec![1.7],
            4.0,
            vec![Direction { theta: 0.4, phi: 0.0, polarization: Polarization::TM }],
        )
        .unwrap();
        let tau = 2.3;
        let x = [0.0, 0.0, 0.9];
        let a = second_order_a(&PathSpec::stationary(x, tau).unwrap(), &g, &p).unwrap();
        let w = wv.frequency(p.c);
        let big = w + p.omega0;
        let u = mode_function(&wv, [0.0, 0.0], x[2], 4.0).unwrap();
        let bracket = I * tau / big + ((-I * big * tau).exp() - 1.0) / (big * big);
        let want = p.g2 / w * u[2].norm_sqr() * bracket;
        assert!(close(a, want, 1e-13));
    }

    #[test]
    fn closed_form_matches_brute_force_integral() {
        let p = params();
        let g = grid();
        let path = PathSpec::new([0.2, -0.1, 1.1], [0.5, 0.3, 0.6], 0.0, 1.5).unwrap();
        let a = second_order_a(&path, &g, &p).unwrap();
        // midpoint-rule double integral with Richardson in the cell count
        let brute = |n: usize| -> Complex64 {
            let h = path.tau / n as f64;
            let modes = g.modes();
            let us: Vec<Vec<Vec3c>> = (0..n)
                .map(|i| mode_values(&path, &modes, g.box_side(), (i as f64 + 0.5) * h).unwrap())
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for (m, wv) in modes.iter().enumerate() {
                let w = wv.frequency(p.c);
                let big = w + p.omega0;
                for i in 0..n {
                    total += -I * p.lambda2 / w * dot_conj(&us[i][m], &us[i][m]) * h;
                    for k in 0..=i {
                        let weight = if k == i { 0.5 } else { 1.0 };
                        let ph = (-I * big * (i as f64 - k as f64) * h).exp();
                        total -= p.g2 / w * ph * us[i][m][2] * us[k][m][2].conj() * h * h * weight;
                    }
                }
            }
            total
        };
        let (b1, b2) = (brute(400), brute(800));
        let extrap = (4.0 * b2 - b1) / 3.0;
        assert!(close(a, extrap, 1e-6), "{a} vs {extrap}");
    }

    #[test]
    fn recursion_converges_at_first_order() {
        let p = params().scale_couplings(1e-4);
        let g = grid();
        let path = PathSpec::new([0.0, 0.0, 1.0], [0.2, 0.1, 1.3], 0.0, 2.0).unwrap();
        let exact = second_order_a(&path, &g, &p).unwrap();
        let errs: Vec<f64> = [200, 400, 800, 1600]
            .iter()
            .map(|&n| (run_recursion(&path, &g, &p, n).unwrap().a - exact).norm())
            .collect();
        for pair in errs.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((0.8..=1.2).contains(&order), "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn nonlinear_terms_are_quartic() {
        let g = grid();
        let path = PathSpec::new([0.0, 0.0, 1.0], [0.1, 0.0, 1.2], 0.0, 2.0).unwrap();
        let shift = |f: f64| {
            let p = params().scale_couplings(f);
            let full = run_impl(&path, &g, &p, 200, true).unwrap().a;
            let linear = run_impl(&path, &g, &p, 200, false).unwrap().a;
            (full - linear).norm()
        };
        let (big, small) = (shift(1e-2), shift(1e-3));
        assert!(big > 0.0);
        let ratio = big / small;
        assert!((80.0..125.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn parallel_motion_is_invisible() {
        let p = params();
        let g = grid();
        let base = momentum_expectation(1.2, [0.0; 3], 3.0, &g, &p).unwrap();
        let moving = momentum_expectation(1.2, [0.3, -0.2, 0.0], 3.0, &g, &p).unwrap();
        assert_eq!(base, moving);
        assert_eq!(base[0], 0.0);
        assert_eq!(base[1], 0.0);
    }

    #[test]
    fn rate_is_the_time_derivative() {
        let p = params();
        let g = grid();
        for v in [[0.0; 3], [0.0, 0.0, 0.05]] {
            let tau = 2.0;
            let h = 1e-3;
            let m = |t: f64| momentum_expectation(1.1, v, t, &g, &p).unwrap()[2];
            let d = |h: f64| (m(tau + h) - m(tau - h)) / (2.0 * h);
            let fd = (4.0 * d(h / 2.0) - d(h)) / 3.0;
            let rate = momentum_rate(1.1, v, tau, &g, &p).unwrap();
            assert!((fd - rate).abs() < 1e-9 * rate.abs(), "{fd} vs {rate}");
        }
        for tau in [0.0, 0.4, 3.0] {
            let rate = momentum_rate(1.1, [0.0; 3], tau, &g, &p).unwrap();
            let sum = force_mode_sum(1.1, tau, &g, &p).unwrap();
            assert!((rate - sum).abs() < 1e-13 * sum.abs(), "{rate} vs {sum}");
        }
    }

    #[test]
    fn generating_function_consistency() {
        let p = params();
        let g = grid();
        for v in [[0.0; 3], [0.0, 0.0, 0.1]] {
            let z0 = generating_function_check(1.1, v, 2.5, &g, &p, [0.0; 3]).unwrap();
            assert!(z0.im.abs() < 1e-14 * z0.re && z0.re > 0.0);
            let from_z = momentum_from_generating_function(1.1, v, 2.5, &g, &p).unwrap();
            let direct = momentum_expectation(1.1, v, 2.5, &g, &p).unwrap()[2];
            assert!(from_z.im.abs() < 1e-10 * direct.abs());
            assert!((from_z.re - direct).abs() < 1e-8 * direct.abs(), "{from_z} vs {direct}");
        }
    }

    #[test]
    fn lambda_only_generating_function() {
        let mut p = params();
        p.g2 = 0.0;
        let g = grid();
        let (r, tau) = (0.8, 1.7);
        let log_z = log_generating_function(r, [0.0; 3], tau, &g, &p, [0.0; 3]).unwrap();
        let vol = g.box_side().powi(3);
        let want: f64 = g
            .modes()
            .iter()
            .map(|wv| {
                let cos2 = wv.theta.cos().powi(2);
                -2.0 * p.lambda2 / vol * cos2 / wv.frequency(p.c) * (2.0 * wv.kz() * r).sin() * tau
            })
            .sum();
        assert!((log_z.re - want).abs() < 1e-14 * want.abs() && log_z.im.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PathSpec::new([0.0; 3], [0.0, 0.0, -1.0], 0.0, 1.0).is_err());
        assert!(PathSpec::new([0.0; 3], [0.0; 3], 0.0, 0.0).is_err());
        assert!(momentum_expectation(1.0, [0.0, 0.0, -1.0], 2.0, &grid(), &params()).is_err());
        assert!(run_recursion(&PathSpec::stationary([0.0, 0.0, 1.0], 1.0).unwrap(), &grid(), &params(), 0).is_err());
    }
}
