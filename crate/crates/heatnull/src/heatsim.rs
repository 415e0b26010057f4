//! Modal simulation of the controlled heat equation, the heat kernel, the
//! observability quotient and the truncated-kernel lower-bound experiment.

use crate::biorthogonal::{ControlSignal, ExactControl};
use crate::error::{Error, Result};
use crate::io::Grid;
use crate::mp;
use crate::quad::Rule;
use crate::spectral::{reduce_to_canonical, Eigfun, HeatState, SpectralBasis};
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRegion {
    pub a: f64,
    pub b: f64,
}

impl ObservationRegion {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(Error::Config(format!("observation region ({a}, {b}) must satisfy 0 ≤ a < b")));
        }
        Ok(ObservationRegion { a, b })
    }

    pub fn check_inside(&self, x_len: f64) -> Result<()> {
        if self.b > x_len * (1.0 + 1e-12) {
            return Err(Error::Config(format!("region ({}, {}) leaves [0, {x_len}]", self.a, self.b)));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Distance from y to the closed region.
    pub fn distance(&self, y: f64) -> f64 {
        if y < self.a {
            self.a - y
        } else if y > self.b {
            y - self.b
        } else {
            0.0
        }
    }

    /// Point of [0, X] farthest from the region.
    pub fn farthest_point(&self, x_len: f64) -> f64 {
        if self.a >= x_len - self.b {
            0.0
        } else {
            x_len
        }
    }
}

/// M_jk = ∫_Ω e_j e_k for j, k ≤ n.
pub fn region_mass(basis: &SpectralBasis, region: &ObservationRegion, n: usize) -> Vec<Vec<f64>> {
    let n = n.min(basis.count());
    let (a, b) = (region.a, region.b);
    match basis.eigfun {
        Eigfun::Sine { x_len } | Eigfun::QuarterCos { x_len } => {
            let quarter = matches!(basis.eigfun, Eigfun::QuarterCos { .. });
            let kap = std::f64::consts::PI / x_len;
            // ∫_a^b cos(m κ x) dx
            let f = |m: f64| if m == 0.0 { b - a } else { ((m * kap * b).sin() - (m * kap * a).sin()) / (m * kap) };
            (1..=n)
                .map(|j| {
                    (1..=n)
                        .map(|k| {
                            let (j, k) = (j as f64, k as f64);
                            if quarter {
                                (f(j - k) + f(j + k - 1.0)) / x_len
                            } else {
                                (f(j - k) - f(j + k)) / x_len
                            }
                        })
                        .collect()
                })
                .collect()
        }
        Eigfun::Sampled { .. } => {
            let top = basis.lambdas[n - 1].max(1.0).sqrt();
            let rule = Rule::for_frequency(a, b, 2.0 * top, 16);
            let vals: Vec<Vec<f64>> = (1..=n).map(|j| rule.nodes.iter().map(|x| basis.eval(j, *x)).collect()).collect();
            (0..n)
                .map(|j| (0..n).map(|k| rule.weights.iter().enumerate().map(|(i, w)| w * vals[j][i] * vals[k][i]).sum()).collect())
                .collect()
        }
    }
}

/// Sampled modal trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<HeatState>,
    pub lambdas: Vec<f64>,
    /// last state computed from the exact form of the control
    pub terminal_exact: bool,
}

impl Trajectory {
    pub fn initial(&self) -> &HeatState {
        &self.states[0]
    }

    pub fn terminal(&self) -> &HeatState {
        self.states.last().unwrap()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.norm()).collect()
    }

    /// CSV with t, |u_j| per mode and ‖u‖.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.csv_bytes()?)
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let modes = self.states.first().map(|s| s.coeffs.len()).unwrap_or(0);
        let mut buf = Vec::new();
        write!(buf, "t")?;
        for j in 1..=modes {
            write!(buf, ",mode{j}")?;
        }
        writeln!(buf, ",norm")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(buf, "{t:.12e}")?;
            for c in &s.coeffs {
                write!(buf, ",{:.12e}", c.abs())?;
            }
            writeln!(buf, ",{:.12e}", s.norm())?;
        }
        Ok(buf)
    }
}

/// c_j ↦ e^{−λ_j dt} c_j.
pub fn evolve_free(basis: &SpectralBasis, state: &HeatState, dt: f64) -> Result<HeatState> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(Error::Precondition(format!("free evolution needs dt ≥ 0, got {dt}")));
    }
    let coeffs = state.coeffs.iter().zip(&basis.lambdas).map(|(c, l)| c * (-l * dt).exp()).collect();
    Ok(HeatState { coeffs, basis_id: state.basis_id.clone() })
}

/// Weights (w0, w1) with ∫_0^Δ e^{−λ(Δ−s)} ℓ(s) ds = w0 ℓ(0) + w1 ℓ(Δ) for linear ℓ.
fn linear_weights(lambda: f64, dt: f64) -> (f64, f64) {
    let x = lambda * dt;
    let (p1, p2) = if x.abs() < 1e-4 {
        (dt * (1.0 - x / 2.0 + x * x / 6.0), dt * (0.5 - x / 6.0 + x * x / 24.0))
    } else {
        let em = (-x).exp_m1();
        (-em / lambda, (x + em) / (lambda * x))
    };
    (p1 - p2, p2)
}

/// Trajectory times: every `stride`-th grid point.
fn output_stride(samples: usize) -> usize {
    (samples - 1).div_ceil(256).max(1)
}

/// Modal Duhamel u_j' = −λ_j u_j + γ_j g with g piecewise linear in its samples;
/// when `g` carries an exact form for this basis and T, the terminal state is
/// recomputed from it in multiprecision.
pub fn simulate_boundary_control(basis: &SpectralBasis, u0: &HeatState, g: &ControlSignal, t: f64) -> Result<Trajectory> {
    let tol = 1e-9 * t.max(1.0);
    if (g.window.0).abs() > tol || (g.window.1 - t).abs() > tol {
        return Err(Error::Config(format!("control window ({}, {}) is not [0, {t}]", g.window.0, g.window.1)));
    }
    if u0.coeffs.len() > basis.count() {
        return Err(Error::Config("initial state has more modes than the basis".into()));
    }
    let n = basis.count();
    let mut c: Vec<f64> = (0..n).map(|j| u0.coeffs.get(j).copied().unwrap_or(0.0)).collect();
    let dt = g.dt();
    let steps = g.len() - 1;
    let weights: Vec<(f64, f64, f64)> = basis
        .lambdas
        .iter()
        .map(|l| {
            let (w0, w1) = linear_weights(*l, dt);
            ((-l * dt).exp(), w0, w1)
        })
        .collect();
    let stride = output_stride(g.len());
    let mut times = vec![0.0];
    let mut states = vec![HeatState { coeffs: c.clone(), basis_id: basis.id() }];
    for i in 0..steps {
        let (g0, g1) = (g.samples[i], g.samples[i + 1]);
        for j in 0..n {
            let (e, w0, w1) = weights[j];
            c[j] = e * c[j] + basis.traces[j] * (w0 * g0 + w1 * g1);
        }
        if (i + 1) % stride == 0 || i + 1 == steps {
            times.push(g.time(i + 1) - g.window.0);
            states.push(HeatState { coeffs: c.clone(), basis_id: basis.id() });
        }
    }
    let mut terminal_exact = false;
    if let Some(ex) = &g.exact {
        if let Some(v) = exact_terminal(basis, u0, ex, t) {
            states.last_mut().unwrap().coeffs = v;
            terminal_exact = true;
        }
    }
    Ok(Trajectory { times, states, lambdas: basis.lambdas.clone(), terminal_exact })
}

/// States of u_j' = −λ_j u_j + γ_j g at every sample of `g` (piecewise-linear g).
pub fn boundary_states(lambdas: &[f64], traces: &[f64], c0: &[f64], g: &ControlSignal) -> Vec<Vec<f64>> {
    let dt = g.dt();
    let w: Vec<(f64, f64, f64)> = lambdas
        .iter()
        .map(|l| {
            let (w0, w1) = linear_weights(*l, dt);
            ((-l * dt).exp(), w0, w1)
        })
        .collect();
    let mut c = c0.to_vec();
    let mut out = Vec::with_capacity(g.len());
    out.push(c.clone());
    for i in 0..g.len() - 1 {
        let (g0, g1) = (g.samples[i], g.samples[i + 1]);
        for j in 0..c.len() {
            let (e, w0, w1) = w[j];
            c[j] = e * c[j] + traces[j] * (w0 * g0 + w1 * g1);
        }
        out.push(c.clone());
    }
    out
}

/// u(T) from the exponential-sum form: reduced Duhamel in MPFR, then e^{sT}.
pub fn exact_terminal(basis: &SpectralBasis, u0: &HeatState, ex: &ExactControl, t: f64) -> Option<Vec<f64>> {
    let (red, sched) = reduce_to_canonical(basis, t);
    if !sched.matches(&ex.sched) {
        return None;
    }
    let p = ex.sum.prec;
    let tau = sched.t_reduced / 2.0;
    let w = ex.sum.window(-tau, tau);
    let tr = Float::with_val(p, sched.t_reduced);
    let back = Float::with_val(p, Float::with_val(p, sched.shift * t).exp());
    let out = (0..red.count())
        .into_par_iter()
        .map(|j| {
            let lam = Float::with_val(p, red.lambdas[j]);
            let c = u0.coeffs.get(j).copied().unwrap_or(0.0);
            let free = Float::with_val(p, Float::with_val(p, -Float::with_val(p, &lam * &tr)).exp() * c);
            let d = ex.sum.duhamel(&w, &lam) * red.traces[j];
            (Float::with_val(p, free + d) * &back).to_f64()
        })
        .collect();
    Some(out)
}

/// Interior forcing g(t, x) on a (t, x) grid covering part of [0, X]; the
/// source coefficients are ⟨g(t,·), e_j⟩ over the grid's x-range.
pub fn simulate_interior_control(basis: &SpectralBasis, u0: &HeatState, forcing: &Grid, t: f64) -> Result<Trajectory> {
    if forcing.axes.len() != 2 || forcing.axes[0].count < 2 {
        return Err(Error::Config("forcing must be a (t, x) grid with at least two times".into()));
    }
    let (ta, xa) = (&forcing.axes[0], &forcing.axes[1]);
    let tol = 1e-9 * t.max(1.0);
    if ta.origin.abs() > tol || (ta.end() - t).abs() > tol {
        return Err(Error::Config(format!("forcing time axis [{}, {}] is not [0, {t}]", ta.origin, ta.end())));
    }
    let n = basis.count();
    let (x0, x1) = (xa.origin, xa.end());
    // space quadrature 4× oversampled against the top mode
    let kmax = basis.lambdas[n - 1].abs().sqrt().max(1.0);
    let per = 4.0 * kmax * (x1 - x0) / std::f64::consts::PI;
    let nx = ((per.ceil() as usize).max(xa.count - 1) * 2).max(8);
    let hx = (x1 - x0) / nx as f64;
    let xs: Vec<f64> = (0..=nx).map(|i| x0 + hx * i as f64).collect();
    let modes: Vec<Vec<f64>> = (1..=n).map(|j| xs.iter().map(|x| basis.eval(j, *x)).collect()).collect();
    let src: Vec<Vec<f64>> = (0..ta.count)
        .into_par_iter()
        .map(|i| {
            let tv = ta.at(i);
            let vals: Vec<f64> = xs.iter().map(|x| forcing.interp2(tv, *x)).collect();
            (0..n)
                .map(|j| {
                    let mut s = 0.0;
                    for (k, v) in vals.iter().enumerate() {
                        let w = if k == 0 || k == nx { 0.5 } else { 1.0 };
                        s += w * v * modes[j][k];
                    }
                    s * hx
                })
                .collect()
        })
        .collect();
    simulate_modal_source(basis, u0, &src, ta.spacing)
}

/// Modal Duhamel u_j' = −λ_j u_j + s_j(t) with s_j piecewise linear on a uniform grid.
pub fn simulate_modal_source(basis: &SpectralBasis, u0: &HeatState, src: &[Vec<f64>], dt: f64) -> Result<Trajectory> {
    let n = basis.count();
    let mut c: Vec<f64> = (0..n).map(|j| u0.coeffs.get(j).copied().unwrap_or(0.0)).collect();
    let weights: Vec<(f64, f64, f64)> = basis
        .lambdas
        .iter()
        .map(|l| {
            let (w0, w1) = linear_weights(*l, dt);
            ((-l * dt).exp(), w0, w1)
        })
        .collect();
    let stride = output_stride(src.len());
    let mut times = vec![0.0];
    let mut states = vec![HeatState { coeffs: c.clone(), basis_id: basis.id() }];
    for i in 0..src.len() - 1 {
        for j in 0..n {
            let (e, w0, w1) = weights[j];
            let s0 = src[i].get(j).copied().unwrap_or(0.0);
            let s1 = src[i + 1].get(j).copied().unwrap_or(0.0);
            c[j] = e * c[j] + w0 * s0 + w1 * s1;
        }
        if (i + 1) % stride == 0 || i + 2 == src.len() {
            times.push(dt * (i + 1) as f64);
            states.push(HeatState { coeffs: c.clone(), basis_id: basis.id() });
        }
    }
    Ok(Trajectory { times, states, lambdas: basis.lambdas.clone(), terminal_exact: false })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub error_bound: f64,
}

/// sup_x |e_j(x)| over the stored modes.
fn eigfun_bound(basis: &SpectralBasis) -> f64 {
    match &basis.eigfun {
        Eigfun::Sine { x_len } | Eigfun::QuarterCos { x_len } => (2.0 / x_len).sqrt(),
        Eigfun::Sampled { values, .. } => values.iter().flat_map(|v| v.iter()).fold(0.0f64, |m, v| m.max(v.abs())) * 1.05,
    }
}

/// k(t, x, y) = Σ_j e^{−λ_j t} e_j(x) e_j(y), truncated at the basis size.
pub fn heat_kernel_eval(basis: &SpectralBasis, t: f64, x: f64, y: f64) -> Result<KernelValue> {
    heat_kernel_eval_tol(basis, t, x, y, 1e-10)
}

pub fn heat_kernel_eval_tol(basis: &SpectralBasis, t: f64, x: f64, y: f64, tol: f64) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("heat kernel needs t > 0, got {t}")));
    }
    let n = basis.count();
    let mut value = 0.0;
    let mut mag = 0.0;
    for j in 1..=n {
        let term = (-basis.lambdas[j - 1] * t).exp() * (basis.eval(j, x) * basis.eval(j, y));
        value += term;
        mag += term.abs();
    }
    // tail: model eigenvalues beyond n, geometric in the gaps
    let b2 = eigfun_bound(basis).powi(2);
    let m = basis.model;
    let l_next = m.lambda(n + 1).max(basis.lambdas[n - 1]);
    let gap = m.scale * (2.0 * (n as f64 + 1.0 + m.nu) + 1.0);
    let q = (-t * gap).exp();
    let error_bound = if q < 1.0 { b2 * (-t * l_next).exp() / (1.0 - q) } else { f64::INFINITY };
    if error_bound > tol {
        return Err(Error::truncation(format!("{n} modes leave a kernel tail above {tol:e} at t = {t}"), error_bound));
    }
    // rounding in the cancelling sum
    let error_bound = error_bound + 4.0 * f64::EPSILON * n as f64 * mag;
    Ok(KernelValue { value, error_bound })
}

/// ∫ c(t)ᵀ M c(t) dt over a trajectory, each segment integrated as free decay
/// from its left state (exact for uncontrolled segments).
fn region_energy(traj: &Trajectory, mass: &[Vec<f64>]) -> f64 {
    let n = mass.len();
    let lam = &traj.lambdas;
    let mut total = 0.0;
    for w in 0..traj.times.len() - 1 {
        let dt = traj.times[w + 1] - traj.times[w];
        let c = &traj.states[w].coeffs;
        let mut s = 0.0;
        for j in 0..n.min(c.len()) {
            if c[j] == 0.0 {
                continue;
            }
            for k in 0..n.min(c.len()) {
                let r = lam[j] + lam[k];
                let f = if (r * dt).abs() < 1e-12 { dt } else { -(-r * dt).exp_m1() / r };
                s += c[j] * c[k] * mass[j][k] * f;
            }
        }
        total += s;
    }
    total
}

/// ‖u(T)‖ / ‖u‖_{L²((0,T)×Ω)}.
pub fn observability_quotient(basis: &SpectralBasis, traj: &Trajectory, region: &ObservationRegion, t: f64) -> Result<f64> {
    let last = *traj.times.last().unwrap();
    if (last - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::Config(format!("trajectory ends at {last}, not T = {t}")));
    }
    let mass = region_mass(basis, region, traj.lambdas.len());
    let e = region_energy(traj, &mass);
    if !(e > 0.0) {
        return Err(Error::Degenerate("solution vanishes on the observation cylinder".into()));
    }
    Ok(traj.terminal().norm() / e.sqrt())
}

/// Free trajectory sampled at `count` uniform times.
pub fn free_trajectory(basis: &SpectralBasis, u0: &HeatState, t: f64, count: usize) -> Result<Trajectory> {
    let count = count.max(2);
    let times: Vec<f64> = (0..count).map(|i| t * i as f64 / (count - 1) as f64).collect();
    let states = times.iter().map(|s| evolve_free(basis, u0, *s)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times, states, lambdas: basis.lambdas.clone(), terminal_exact: false })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub q: f64,
    #[serde(rename = "minus_T_ln_q")]
    pub minus_t_ln_q: f64,
    pub d_squared_over_4: f64,
    pub y: f64,
    pub eps: f64,
    pub modes: usize,
}

/// Default smoothing fraction ε = min(0.2, 1/(8β)), β = 0.9·d²/4.
pub fn default_lower_eps(d: f64) -> f64 {
    let beta = 0.9 * d * d / 4.0;
    (1.0 / (8.0 * beta)).min(0.2)
}

/// Truncated kernel data u0 = Σ_{ω_j ≤ 1/(εT)} e^{−εTλ_j} e_j(y) e_j, evolved
/// freely; q(T) = ‖u‖_{L²((0,T)×Ω)} / ‖e^{TΔ}u0‖ with all sums in MPFR.
pub fn lower_bound_experiment(basis: &SpectralBasis, region: &ObservationRegion, y: f64, eps: f64, t: f64) -> Result<LowerBoundReport> {
    region.check_inside(basis.x_len)?;
    if y >= region.a && y <= region.b {
        return Err(Error::Precondition(format!("y = {y} lies in the closed region [{}, {}]", region.a, region.b)));
    }
    if !(y >= 0.0 && y <= basis.x_len) {
        return Err(Error::Precondition(format!("y = {y} outside [0, {}]", basis.x_len)));
    }
    if !(eps > 0.0 && t > 0.0) {
        return Err(Error::Precondition("eps and T must be positive".into()));
    }
    let d = region.distance(y);
    let cut = 1.0 / (eps * t);
    let modes = basis.lambdas.iter().take_while(|l| l.max(0.0).sqrt() <= cut).count();
    if modes == basis.count() && basis.model.lambda(basis.count() + 1).max(0.0).sqrt() <= cut {
        return Err(Error::truncation(format!("frequency cutoff {cut:.3} needs more than {} modes", basis.count()), cut));
    }
    if modes == 0 {
        return Err(Error::Degenerate("no mode below the frequency cutoff".into()));
    }
    let prec = 192;
    let mass = region_mass_mp(basis, region, modes, prec);
    let coef: Vec<Float> = (0..modes)
        .map(|j| {
            let l = basis.lambdas[j];
            Float::with_val(prec, Float::with_val(prec, -eps * t * l).exp() * basis.eval(j + 1, y))
        })
        .collect();
    let tf = Float::with_val(prec, t);
    let mut num = Float::new(prec);
    let mut den = Float::new(prec);
    for j in 0..modes {
        let lj = Float::with_val(prec, basis.lambdas[j]);
        let ej = Float::with_val(prec, Float::with_val(prec, -Float::with_val(prec, &lj * &tf) * 2u32).exp());
        den += Float::with_val(prec, coef[j].square_ref()) * ej;
        for k in 0..modes {
            let r = Float::with_val(prec, &lj + basis.lambdas[k]);
            let f = if r.is_zero() {
                tf.clone()
            } else {
                let e = Float::with_val(prec, -Float::with_val(prec, &r * &tf)).exp_m1();
                Float::with_val(prec, -e / &r)
            };
            num += Float::with_val(prec, &coef[j] * &coef[k]) * &mass[j][k] * f;
        }
    }
    let q = Float::with_val(prec, num.sqrt() / den.sqrt());
    let ln_q = Float::with_val(prec, q.ln_ref()).to_f64();
    Ok(LowerBoundReport { t, q: q.to_f64(), minus_t_ln_q: -t * ln_q, d_squared_over_4: d * d / 4.0, y, eps, modes })
}

/// Region mass matrix in MPFR (closed forms for sine/cosine bases).
fn region_mass_mp(basis: &SpectralBasis, region: &ObservationRegion, n: usize, prec: u32) -> Vec<Vec<Float>> {
    match basis.eigfun {
        Eigfun::Sine { x_len } | Eigfun::QuarterCos { x_len } => {
            let quarter = matches!(basis.eigfun, Eigfun::QuarterCos { .. });
            let kap = Float::with_val(prec, mp::pi(prec) / x_len);
            let a = Float::with_val(prec, region.a);
            let b = Float::with_val(prec, region.b);
            let f = |m: i64| -> Float {
                if m == 0 {
                    return Float::with_val(prec, &b - &a);
                }
                let mk = Float::with_val(prec, &kap * m);
                let sb = Float::with_val(prec, &mk * &b).sin();
                let sa = Float::with_val(prec, &mk * &a).sin();
                Float::with_val(prec, sb - sa) / mk
            };
            (1..=n as i64)
                .map(|j| {
                    (1..=n as i64)
                        .map(|k| {
                            let v = if quarter { f(j - k) + f(j + k - 1) } else { f(j - k) - f(j + k) };
                            v / x_len
                        })
                        .collect()
                })
                .collect()
        }
        Eigfun::Sampled { .. } => region_mass(basis, region, n).into_iter().map(|r| r.into_iter().map(|v| Float::with_val(prec, v)).collect()).collect(),
    }
}

#[cfg(test)]
mod tests;
