use super::fundamental::{kappa, mean_coeff};
use super::{int_cos, int_sin, FundamentalControlledSolution, WaveControlledTrajectory};
use crate::error::{Error, Result};
use crate::heatsim::Trajectory;
use crate::io::{Axis, Grid};
use crate::quad::Rule;
use crate::spectral::HeatState;
use rayon::prelude::*;
use rug::Float;

/// Interior heat control g(t, x) = ∫ v(t, s) f(s, x) ds built from a controlled
/// fundamental solution v and an N-mode wave control f (S = L, f extended oddly
/// in s). Modal quantities live in the wave basis.
#[derive(Clone, Debug)]
pub struct Transmuted {
    pub t: f64,
    pub l: f64,
    pub n: usize,
    pub u0: Vec<f64>,
    /// u(t) = Σ_j v_j(t)·W_{·j}
    pub trajectory: Trajectory,
    /// u(0) − u0 at the δ truncation
    pub initial_error: Vec<f64>,
    /// u(T) from the transmutation identity
    pub terminal_transmuted: Vec<f64>,
    /// u(T) from the modal Duhamel formula driven by g
    pub terminal_simulated: Vec<f64>,
    /// ‖g‖ on (0, T) × Ω
    pub g_norm: f64,
    pub v_norm: f64,
    /// ‖f‖ on (−S, S) × Ω
    pub f_ext_norm: f64,
    /// q_k(t) = ⟨g(t), e_k⟩ on Ω, per mode
    p: Vec<Vec<f64>>,
    bp: Vec<f64>,
    v: FundamentalControlledSolution,
    wave: WaveControlledTrajectory,
}

/// ∫_0^L cos(κs)cos(νs) and ∫_0^L cos(κs)sin(νs)
fn cc_cs(k: f64, v: f64, l: f64) -> (f64, f64) {
    (0.5 * (int_cos(k - v, l) + int_cos(k + v, l)), 0.5 * (int_sin(v + k, l) + int_sin(v - k, l)))
}

/// (e^{−μT} − e^{−λT})/(λ − μ) without cancellation.
fn exp_divided(lam: f64, mu: f64, t: f64) -> f64 {
    let x = (lam - mu) * t;
    if x == 0.0 {
        return t * (-lam * t).exp();
    }
    (-lam * t).exp() * t * x.exp_m1() / x
}

pub fn transmute_control(v: &FundamentalControlledSolution, wave: &WaveControlledTrajectory) -> Result<Transmuted> {
    if (wave.s - v.l).abs() > 1e-12 * v.l {
        return Err(Error::Config(format!("wave control time S = {} must equal the half-width L = {}", wave.s, v.l)));
    }
    let l = v.l;
    let n = wave.n;
    let (kv, kf) = (v.forced_modes, v.free_modes);
    let norm = (2.0 / l).sqrt();
    // P_kj = 2∫_0^L e_j p_k
    let p: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            (1..=kf)
                .map(|j| {
                    let (cc, cs) = cc_cs(kappa(j, l), wave.omegas[k], l);
                    2.0 * norm * (wave.a[k] * cc + wave.b[k] * cs)
                })
                .collect()
        })
        .collect();
    let mm = |i: usize, k: usize| wave.mass[i][k];
    let phi: Vec<Vec<f64>> = (0..n).map(|i| (0..kf).map(|j| (0..n).map(|k| mm(i, k) * p[k][j]).sum()).collect()).collect();
    let lam = &wave.basis.lambdas;
    // W_ij = 2∫_0^L e_j w_i ds via the wave equation in s
    let (w_l, _) = wave.state(l);
    let rule = Rule::for_frequency(0.0, l, wave.omegas[n - 1] + kappa(kf.min(64), l), 16);
    let mut wq: Option<Vec<Vec<f64>>> = None;
    let mut w = vec![vec![0.0; kf]; n];
    for i in 0..n {
        for j in 0..kf {
            let mu = kappa(j + 1, l).powi(2);
            let de = -norm * kappa(j + 1, l) * (kappa(j + 1, l) * l).sin();
            if (lam[i] - mu).abs() > 1e-8 * lam[i] {
                w[i][j] = (phi[i][j] + 2.0 * de * w_l[i]) / (lam[i] - mu);
            } else {
                let tab = wq.get_or_insert_with(|| rule.nodes.iter().map(|s| wave.state(*s).0).collect());
                w[i][j] = 2.0 * rule.weights.iter().zip(&rule.nodes).zip(tab.iter()).map(|((wt, s), st)| wt * norm * (kappa(j + 1, l) * s).cos() * st[i]).sum::<f64>();
            }
        }
    }
    // lifting constants: forcing by the constant boundary value minus its modal part
    let bp: Vec<f64> = (0..n)
        .map(|k| {
            let om = wave.omegas[k];
            2.0 * (wave.a[k] * int_cos(om, l) + wave.b[k] * int_sin(om, l)) - (0..kv).map(|j| mean_coeff(j + 1, l) * p[k][j]).sum::<f64>()
        })
        .collect();
    let b_i: Vec<f64> = (0..n).map(|i| (0..n).map(|k| mm(i, k) * bp[k]).sum()).collect();

    let u0 = wave.u0.clone();
    let c0 = v.c0();
    let nd = (v.delta_modes + 1) / 2;
    let u_at = |t: f64| -> Vec<f64> {
        let nf = v.free_count(t);
        let f = v.forced_at(t);
        (0..n)
            .map(|i| {
                let mut s: f64 = (0..nf).map(|j| v.free_coeff(j + 1, t) * w[i][j]).sum();
                if t > v.t0 {
                    s += (0..kv).map(|j| f[j] * w[i][j]).sum::<f64>();
                }
                s
            })
            .collect()
    };
    let u_init: Vec<f64> = (0..n).map(|i| (0..nd).map(|j| c0 * w[i][j]).sum()).collect();
    let initial_error: Vec<f64> = u_init.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let terminal_transmuted: Vec<f64> = (0..n)
        .map(|i| (0..kv).map(|j| v.terminal[j] * w[i][j]).sum::<f64>() + (kv..kf).map(|j| v.free_coeff(j + 1, v.t) * w[i][j]).sum::<f64>())
        .collect();

    // output times: a few in the free phase, then the control grid thinned
    let mut times: Vec<f64> = (0..=16).map(|i| v.t0 * i as f64 / 16.0).collect();
    let ct = v.control_times();
    let stride = (ct.len() / 240).max(1);
    times.extend(ct.iter().enumerate().skip(1).filter(|(i, _)| i % stride == 0 || *i == ct.len() - 1).map(|(_, t)| *t));
    let states: Vec<HeatState> = times
        .par_iter()
        .map(|t| if *t == 0.0 { HeatState { coeffs: u_init.clone(), basis_id: wave.basis.id() } } else { HeatState { coeffs: u_at(*t), basis_id: wave.basis.id() } })
        .collect();
    let trajectory = Trajectory { times, states, lambdas: lam.clone(), terminal_exact: false };

    let mut out = Transmuted {
        t: v.t,
        l,
        n,
        u0,
        trajectory,
        initial_error,
        terminal_transmuted,
        terminal_simulated: Vec::new(),
        g_norm: 0.0,
        v_norm: v.norm,
        f_ext_norm: std::f64::consts::SQRT_2 * wave.f_norm,
        p,
        bp,
        v: v.clone(),
        wave: wave.clone(),
    };
    out.g_norm = out.control_norm();
    out.terminal_simulated = out.simulate_terminal(&phi, &b_i)?;
    Ok(out)
}

impl Transmuted {
    /// q_k(t) = ⟨g(t), e_k⟩
    pub fn modal_control(&self, t: f64) -> Vec<f64> {
        let v = &self.v;
        let nf = v.free_count(t).min(v.free_modes);
        let f = v.forced_at(t);
        let g = v.boundary_at(t);
        let lifted = t > v.t0;
        (0..self.n)
            .map(|k| {
                let pk = &self.p[k];
                let mut s: f64 = (0..nf).map(|j| v.free_coeff(j + 1, t) * pk[j]).sum();
                if lifted {
                    s += g * self.bp[k] + f.iter().zip(pk).map(|(a, b)| a * b).sum::<f64>();
                }
                s
            })
            .collect()
    }

    fn mass_form(&self, q: &[f64]) -> f64 {
        let m = &self.wave.mass;
        (0..self.n).map(|i| q[i] * (0..self.n).map(|k| m[i][k] * q[k]).sum::<f64>()).sum()
    }

    /// ∫ qᵀMq dt: graded panels toward t = 0 in the free phase, then the control grid.
    fn control_norm(&self) -> f64 {
        let v = &self.v;
        let mut acc = 0.0;
        let mut hi = v.t0;
        for _ in 0..40 {
            let lo = hi / 2.0;
            let r = Rule::composite(lo, hi, 1, 16);
            acc += r.nodes.par_iter().zip(&r.weights).map(|(t, wt)| wt * self.mass_form(&self.modal_control(*t))).sum::<f64>();
            hi = lo;
        }
        let ct = v.control_times();
        let m = ct.len();
        let vals: Vec<f64> = ct.par_iter().map(|t| self.mass_form(&self.modal_control(*t))).collect();
        let trap: f64 = vals.iter().enumerate().map(|(i, x)| if i == 0 || i == m - 1 { 0.5 * x } else { *x }).sum::<f64>() * v.control.dt();
        (acc + trap).max(0.0).sqrt()
    }

    /// u(T) under g, mode by mode and in closed form. The boundary-driven
    /// Duhamel integrals use the exact exponential-sum control.
    fn simulate_terminal(&self, phi: &[Vec<f64>], b_i: &[f64]) -> Result<Vec<f64>> {
        let v = &self.v;
        let t = v.t;
        let lam = &self.wave.basis.lambdas;
        let sum = &v.control_sum;
        let p = sum.prec;
        let win = sum.window(0.0, v.t - v.t0);
        let c0 = v.c0();
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let li = lam[i];
                let mut u = (-li * t).exp() * self.u0[i];
                // free part of v, integrated against e^{−λ_i(T−t)} over [0, T]
                for j in 0..v.free_modes {
                    u += c0 * phi[i][j] * exp_divided(li, v.mu(j + 1), t);
                }
                let di = sum.duhamel(&win, &Float::with_val(p, li));
                let mut acc = Float::with_val(p, &di * b_i[i]);
                for j in 0..v.forced_modes {
                    let mu = v.basis.lambdas[j];
                    let g = v.basis.traces[j];
                    let diff = if li != mu {
                        let num = Float::with_val(p, &v.duhamel_mu[j] - &di);
                        num / Float::with_val(p, Float::with_val(p, li) - mu)
                    } else {
                        // derivative in λ by a tiny MP step
                        let h = Float::with_val(p, li) >> (p / 3);
                        let dh = sum.duhamel(&win, &Float::with_val(p, Float::with_val(p, li) + &h));
                        -(Float::with_val(p, dh - &di) / h)
                    };
                    acc += diff * Float::with_val(p, phi[i][j] * g);
                }
                Ok(u + acc.to_f64())
            })
            .collect()
    }

    /// u(t, x) trajectory in the wave basis.
    pub fn norms(&self) -> Vec<f64> {
        self.trajectory.norms()
    }

    /// g(t, x) on [0, T] × [a, b].
    pub fn g_field(&self, nt: usize, nx: usize) -> Grid {
        let ta = Axis::spanning(0.0, self.t, nt.max(2));
        let r = self.wave.region;
        let xa = Axis::spanning(r.a, r.b, nx.max(2));
        let basis = &self.wave.basis;
        let rows: Vec<Vec<f64>> = ta
            .points()
            .par_iter()
            .map(|t| {
                let q = self.modal_control(*t);
                xa.points().iter().map(|x| q.iter().enumerate().map(|(k, c)| c * basis.eval(k + 1, *x)).sum()).collect()
            })
            .collect();
        Grid { axes: vec![ta, xa], data: rows.concat() }
    }

    pub fn initial_residual(&self) -> f64 {
        self.initial_error.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn terminal_residual(&self) -> f64 {
        self.terminal_simulated.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// ‖g‖ ≤ ‖v‖·‖f_ext‖ up to the relative slack `tol`.
    pub fn cost_consistent(&self, tol: f64) -> bool {
        self.g_norm <= self.v_norm * self.f_ext_norm * (1.0 + tol)
    }

    pub fn u0_norm(&self) -> f64 {
        self.u0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}
