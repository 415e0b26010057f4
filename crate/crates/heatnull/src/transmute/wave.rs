use super::{int_cos, int_sin};
use crate::error::{Error, Result};
use crate::heatsim::{region_mass, ObservationRegion};
use crate::io::{Axis, Grid};
use crate::spectral::{HeatState, SpectralBasis};
use nalgebra::{DMatrix, DVector};

/// Minimal-norm control of the N-mode wave system w_j'' = −λ_j w_j + ⟨1_Ω f, e_j⟩
/// from (u0, 0) to (0, 0) in time S. The control is f = 1_Ω Σ_k p_k(s) e_k with
/// p_k(s) = a_k cos(ω_k s) + b_k sin(ω_k s).
#[derive(Clone, Debug)]
pub struct WaveControlledTrajectory {
    pub s: f64,
    pub n: usize,
    pub basis: SpectralBasis,
    pub region: ObservationRegion,
    pub u0: Vec<f64>,
    pub omegas: Vec<f64>,
    pub mass: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub gramian_cond: f64,
    /// ‖f‖ on (0, S) × Ω
    pub f_norm: f64,
    /// max |w_j(S)|, |w_j'(S)| over the retained modes
    pub steering_residual: f64,
}

/// ∫_0^S sin(ωs)·sin(νs) style integrals: (ss, sc, cs, cc).
fn trig_products(w: f64, v: f64, s: f64) -> (f64, f64, f64, f64) {
    let ss = 0.5 * (int_cos(w - v, s) - int_cos(w + v, s));
    let cc = 0.5 * (int_cos(w - v, s) + int_cos(w + v, s));
    // ∫ sin(ωu) cos(νu)
    let sc = 0.5 * (int_sin(w + v, s) + int_sin(w - v, s));
    let cs = 0.5 * (int_sin(v + w, s) + int_sin(v - w, s));
    (ss, sc, cs, cc)
}

/// ∫_0^s sin(ω(s−r)) cos(νr) dr and ∫_0^s sin(ω(s−r)) sin(νr) dr with their s-derivatives.
fn duhamel_trig(w: f64, v: f64, s: f64) -> (f64, f64, f64, f64) {
    if (w - v).abs() <= 1e-12 * w.abs().max(v.abs()) {
        let (sn, cn) = (w * s).sin_cos();
        let isc = 0.5 * s * sn;
        let iss = (sn - w * s * cn) / (2.0 * w);
        let dsc = 0.5 * (sn + w * s * cn);
        let dss = 0.5 * w * s * sn;
        return (isc, iss, dsc, dss);
    }
    let d = w * w - v * v;
    let (sw, cw) = (w * s).sin_cos();
    let (sv, cv) = (v * s).sin_cos();
    (w * (cv - cw) / d, (w * sv - v * sw) / d, w * (w * sw - v * sv) / d, w * v * (cv - cw) / d)
}

pub fn wave_hum_control(basis: &SpectralBasis, region: &ObservationRegion, u0: &HeatState, s: f64, n: usize) -> Result<WaveControlledTrajectory> {
    wave_hum_control_with(basis, region, u0, s, n, 1e12)
}

pub fn wave_hum_control_with(basis: &SpectralBasis, region: &ObservationRegion, u0: &HeatState, s: f64, n: usize, max_cond: f64) -> Result<WaveControlledTrajectory> {
    region.check_inside(basis.x_len)?;
    if n == 0 || n > basis.count() {
        return Err(Error::Config(format!("wave mode count {n} outside 1..={}", basis.count())));
    }
    if !(s > 0.0) {
        return Err(Error::Config(format!("wave control time must be positive, got {s}")));
    }
    if u0.coeffs.iter().skip(n).any(|c| *c != 0.0) {
        return Err(Error::truncation(format!("initial state excites modes beyond N = {n}"), n as f64));
    }
    if basis.lambdas[..n].iter().any(|l| *l <= 0.0) {
        return Err(Error::Precondition("wave frequencies need a positive spectrum".into()));
    }
    let basis = basis.truncated(n);
    let omegas: Vec<f64> = basis.lambdas.iter().map(|l| l.sqrt()).collect();
    let mass = region_mass(&basis, region, n);
    let c: Vec<f64> = (0..n).map(|j| u0.coeffs.get(j).copied().unwrap_or(0.0)).collect();
    // Gramian over (j, a), a = 0: sin(ωu)/ω, a = 1: cos(ωu)
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let (wj, wk) = (omegas[j], omegas[k]);
            let (ss, sc, cs, cc) = trig_products(wj, wk, s);
            let m = mass[j][k];
            g[(2 * j, 2 * k)] = m * ss / (wj * wk);
            g[(2 * j, 2 * k + 1)] = m * sc / wj;
            g[(2 * j + 1, 2 * k)] = m * cs / wk;
            g[(2 * j + 1, 2 * k + 1)] = m * cc;
        }
    }
    let ev = g.clone().symmetric_eigen();
    let (lo, hi) = ev.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(v.abs())));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= max_cond) {
        return Err(Error::IllConditioned { log10_cond: cond.log10() });
    }
    // free state at S
    let rhs = DVector::from_fn(2 * n, |i, _| {
        let j = i / 2;
        let (sn, cn) = (omegas[j] * s).sin_cos();
        if i % 2 == 0 {
            -c[j] * cn
        } else {
            c[j] * omegas[j] * sn
        }
    });
    let chol = g.clone().cholesky().ok_or(Error::IllConditioned { log10_cond: cond.log10() })?;
    let eta = chol.solve(&rhs);
    let f_norm = eta.dot(&(&g * &eta)).max(0.0).sqrt();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let (e0, e1) = (eta[2 * k], eta[2 * k + 1]);
        let v = omegas[k];
        let (sn, cn) = (v * s).sin_cos();
        a[k] = e0 * sn / v + e1 * cn;
        b[k] = -e0 * cn / v + e1 * sn;
    }
    let mut out = WaveControlledTrajectory {
        s,
        n,
        basis,
        region: *region,
        u0: c,
        omegas,
        mass,
        a,
        b,
        gramian_cond: cond,
        f_norm,
        steering_residual: 0.0,
    };
    let (w, dw) = out.state(s);
    out.steering_residual = w.iter().chain(&dw).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(out)
}

impl WaveControlledTrajectory {
    /// p_k(s)
    pub fn adjoint(&self, s: f64) -> Vec<f64> {
        (0..self.n).map(|k| {
            let (sn, cn) = (self.omegas[k] * s).sin_cos();
            self.a[k] * cn + self.b[k] * sn
        })
        .collect()
    }

    /// F_j(s) = ⟨1_Ω f(s), e_j⟩
    pub fn forcing(&self, s: f64) -> Vec<f64> {
        let p = self.adjoint(s);
        self.mass.iter().map(|row| row.iter().zip(&p).map(|(m, v)| m * v).sum()).collect()
    }

    /// (w_j(s), w_j'(s))
    pub fn state(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut w = vec![0.0; n];
        let mut dw = vec![0.0; n];
        for j in 0..n {
            let om = self.omegas[j];
            let (sn, cn) = (om * s).sin_cos();
            let mut acc = 0.0;
            let mut dacc = 0.0;
            for k in 0..n {
                let m = self.mass[j][k];
                if m == 0.0 {
                    continue;
                }
                let (isc, iss, dsc, dss) = duhamel_trig(om, self.omegas[k], s);
                acc += m * (self.a[k] * isc + self.b[k] * iss);
                dacc += m * (self.a[k] * dsc + self.b[k] * dss);
            }
            w[j] = self.u0[j] * cn + acc / om;
            dw[j] = -om * self.u0[j] * sn + dacc / om;
        }
        (w, dw)
    }

    /// w(s, x) on [0, S] × [0, X].
    pub fn w_field(&self, ns: usize, nx: usize) -> Grid {
        let sa = Axis::spanning(0.0, self.s, ns.max(2));
        let xa = Axis::spanning(0.0, self.basis.x_len, nx.max(2));
        let states: Vec<Vec<f64>> = sa.points().iter().map(|s| self.state(*s).0).collect();
        let modes: Vec<Vec<f64>> = (1..=self.n).map(|j| xa.points().iter().map(|x| self.basis.eval(j, *x)).collect()).collect();
        let mut data = Vec::with_capacity(sa.count * xa.count);
        for st in &states {
            for i in 0..xa.count {
                data.push((0..self.n).map(|j| st[j] * modes[j][i]).sum());
            }
        }
        Grid { axes: vec![sa, xa], data }
    }

    /// f(s, x) = 1_Ω Σ_k p_k(s) e_k(x) on [0, S] × [0, X].
    pub fn f_field(&self, ns: usize, nx: usize) -> Grid {
        let sa = Axis::spanning(0.0, self.s, ns.max(2));
        let xa = Axis::spanning(0.0, self.basis.x_len, nx.max(2));
        let (a, b) = (self.region.a, self.region.b);
        Grid::from_fn2(sa, xa, |s, x| {
            if x <= a || x >= b {
                return 0.0;
            }
            self.adjoint(s).iter().enumerate().map(|(k, p)| p * self.basis.eval(k + 1, x)).sum()
        })
    }
}
