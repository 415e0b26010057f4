//! Spectral data of 1D parabolic operators: closed-form interval bases,
//! finite-difference Sturm–Liouville bases, asymptotic checks and the
//! canonical reduction (λ_1 > 0, length π, centered window).

use crate::biorthogonal::ControlSignal;
use crate::error::{Error, Result};
use crate::tridiag::SymTridiag;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Coefficient {
    Const { value: f64 },
    Samples { values: Vec<f64> },
}

impl Coefficient {
    /// Value at x ∈ [0, X]; samples are uniform on [0, X] and linearly interpolated.
    pub fn eval(&self, x: f64, x_len: f64) -> f64 {
        match self {
            Coefficient::Const { value } => *value,
            Coefficient::Samples { values } => {
                let n = values.len();
                if n == 1 {
                    return values[0];
                }
                let s = (x / x_len).clamp(0.0, 1.0) * (n - 1) as f64;
                let i = (s.floor() as usize).min(n - 2);
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    fn min_value(&self) -> f64 {
        match self {
            Coefficient::Const { value } => *value,
            Coefficient::Samples { values } => values.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            Coefficient::Const { value } => value.is_finite(),
            Coefficient::Samples { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
        }
    }
}

/// ∂_t u = (p u')' + q u on (0, X) with (a0 + b0 ∂x)u(0) = 0 and the
/// control entering through (a1 + b1 ∂x)u(X).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ParabolicProblem {
    #[serde(rename = "X")]
    pub x_len: f64,
    pub p: Coefficient,
    pub q: Coefficient,
    pub bc0: [f64; 2],
    pub bc1: [f64; 2],
}

impl ParabolicProblem {
    pub fn dirichlet(x_len: f64) -> Self {
        ParabolicProblem {
            x_len,
            p: Coefficient::Const { value: 1.0 },
            q: Coefficient::Const { value: 0.0 },
            bc0: [1.0, 0.0],
            bc1: [1.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_len > 0.0 && self.x_len.is_finite()) {
            return Err(Error::Config(format!("X must be positive, got {}", self.x_len)));
        }
        for (name, bc) in [("bc0", self.bc0), ("bc1", self.bc1)] {
            let n2 = bc[0] * bc[0] + bc[1] * bc[1];
            if (n2 - 1.0).abs() > 1e-12 {
                return Err(Error::Invariant(format!("{name} must satisfy a²+b² = 1, got {n2}")));
            }
        }
        if !self.p.is_valid() || !self.q.is_valid() {
            return Err(Error::Config("p and q must be finite".into()));
        }
        if self.p.min_value() <= 0.0 {
            return Err(Error::Invariant("p must be positive on the sample grid".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: ParabolicProblem = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Travel time ∫ dx/√p; with it λ_n ≈ (π(n+ν)/L)².
    pub fn effective_length(&self) -> f64 {
        let n = 4096;
        let h = self.x_len / n as f64;
        let f = |i: usize| 1.0 / self.p.eval(i as f64 * h, self.x_len).sqrt();
        // Simpson
        let mut s = f(0) + f(n);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        s * h / 3.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    ExactDD,
    ExactND,
    NumericSL,
}

impl FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DD" | "dd" | "exact-DD" => Ok(BasisKind::ExactDD),
            "ND" | "nd" | "exact-ND" => Ok(BasisKind::ExactND),
            "SL" | "numeric-SL" => Ok(BasisKind::NumericSL),
            other => Err(Error::Config(format!("unsupported boundary kind '{other}'"))),
        }
    }
}

impl BasisKind {
    pub fn tag(&self) -> &'static str {
        match self {
            BasisKind::ExactDD => "exact-DD",
            BasisKind::ExactND => "exact-ND",
            BasisKind::NumericSL => "numeric-SL",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Eigfun {
    /// √(2/X) sin(nπx/X)
    Sine { x_len: f64 },
    /// √(2/X) cos((n−½)πx/X)
    QuarterCos { x_len: f64 },
    /// values on the uniform grid x_i = iX/(len−1), one vector per mode
    Sampled { x_len: f64, values: Vec<Vec<f64>> },
}

/// Zeros beyond the stored modes follow scale·(k+ν)² + shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroModel {
    pub nu: f64,
    pub scale: f64,
    pub shift: f64,
    /// the model reproduces every eigenvalue (closed-form spectra)
    pub exact: bool,
}

impl ZeroModel {
    pub fn lambda(&self, k: usize) -> f64 {
        let m = k as f64 + self.nu;
        self.scale * m * m + self.shift
    }
}

#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub kind: BasisKind,
    pub lambdas: Vec<f64>,
    pub traces: Vec<f64>,
    pub nu: f64,
    /// effective length (π after reduction)
    pub length: f64,
    pub x_len: f64,
    pub gamma_min: f64,
    pub eig_errors: Vec<f64>,
    pub eigfun: Eigfun,
    pub model: ZeroModel,
}

impl SpectralBasis {
    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn id(&self) -> String {
        format!("{}:X={}:L={:.12}:n={}:l1={:.12e}", self.kind.tag(), self.x_len, self.length, self.count(), self.lambdas[0])
    }

    /// e_n(x), n ≥ 1.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        match &self.eigfun {
            Eigfun::Sine { x_len } => (2.0 / x_len).sqrt() * (n as f64 * PI * x / x_len).sin(),
            Eigfun::QuarterCos { x_len } => (2.0 / x_len).sqrt() * ((n as f64 - 0.5) * PI * x / x_len).cos(),
            Eigfun::Sampled { x_len, values } => interp4(&values[n - 1], x / x_len),
        }
    }

    /// e_n'(x), n ≥ 1.
    pub fn eval_deriv(&self, n: usize, x: f64) -> f64 {
        match &self.eigfun {
            Eigfun::Sine { x_len } => {
                let k = n as f64 * PI / x_len;
                (2.0 / x_len).sqrt() * k * (k * x).cos()
            }
            Eigfun::QuarterCos { x_len } => {
                let k = (n as f64 - 0.5) * PI / x_len;
                -(2.0 / x_len).sqrt() * k * (k * x).sin()
            }
            Eigfun::Sampled { x_len, values } => {
                let v = &values[n - 1];
                let h = x_len / (v.len() - 1) as f64;
                let s = (x / x_len).clamp(0.0, 1.0);
                let eps = 2.0 * h;
                let a = (s * x_len - eps).max(0.0);
                let b = (s * x_len + eps).min(*x_len);
                (interp4(v, b / x_len) - interp4(v, a / x_len)) / (b - a)
            }
        }
    }

    /// Keep the first `n` modes.
    pub fn truncated(&self, n: usize) -> SpectralBasis {
        let n = n.min(self.count());
        let mut b = self.clone();
        b.lambdas.truncate(n);
        b.traces.truncate(n);
        b.eig_errors.truncate(n);
        if let Eigfun::Sampled { values, .. } = &mut b.eigfun {
            values.truncate(n);
        }
        b.gamma_min = b.traces.iter().fold(f64::INFINITY, |m, g| m.min(g.abs()));
        b
    }

    /// Function values on a grid → modal coefficients (trapezoid in x).
    pub fn project(&self, f: &dyn Fn(f64) -> f64, oversample: usize) -> HeatState {
        let npts = (self.count() * oversample.max(4) * 2).max(64);
        let h = self.x_len / npts as f64;
        let coeffs = (1..=self.count())
            .map(|n| {
                let mut s = 0.0;
                for i in 0..=npts {
                    let x = i as f64 * h;
                    let w = if i == 0 || i == npts { 0.5 } else { 1.0 };
                    s += w * f(x) * self.eval(n, x);
                }
                s * h
            })
            .collect();
        HeatState { coeffs, basis_id: self.id() }
    }

    /// Σ c_j e_j(x)
    pub fn synthesize(&self, state: &HeatState, x: f64) -> f64 {
        state.coeffs.iter().enumerate().map(|(j, c)| c * self.eval(j + 1, x)).sum()
    }
}

/// Four-point Lagrange interpolation of uniform samples on [0,1].
fn interp4(v: &[f64], s: f64) -> f64 {
    let n = v.len();
    let pos = s.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    let t = pos - i as f64;
    let (y0, y1, y2, y3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatState {
    pub coeffs: Vec<f64>,
    pub basis_id: String,
}

impl HeatState {
    pub fn new(coeffs: Vec<f64>, basis: &SpectralBasis) -> Self {
        HeatState { coeffs, basis_id: basis.id() }
    }

    pub fn zero(basis: &SpectralBasis) -> Self {
        Self::new(vec![0.0; basis.count()], basis)
    }

    /// Unit vector e_n (n ≥ 1).
    pub fn mode(basis: &SpectralBasis, n: usize) -> Self {
        let mut c = vec![0.0; basis.count()];
        c[n - 1] = 1.0;
        Self::new(c, basis)
    }

    /// Random unit state supported on the first `modes` modes.
    pub fn random<R: Rng>(basis: &SpectralBasis, modes: usize, rng: &mut R) -> Self {
        let mut c = vec![0.0; basis.count()];
        for v in c.iter_mut().take(modes.min(basis.count())) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let nrm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for v in c.iter_mut() {
                *v /= nrm;
            }
        }
        Self::new(c, basis)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        HeatState { coeffs: self.coeffs.iter().map(|c| c * s).collect(), basis_id: self.basis_id.clone() }
    }
}

pub fn build_interval_basis(kind: BasisKind, x_len: f64, count: usize) -> Result<SpectralBasis> {
    if count == 0 || !(x_len > 0.0) {
        return Err(Error::Precondition(format!("need count ≥ 1 and X > 0 (count={count}, X={x_len})")));
    }
    let amp = (2.0 / x_len).sqrt();
    let (lambdas, traces, nu, eigfun): (Vec<f64>, Vec<f64>, f64, Eigfun) = match kind {
        BasisKind::ExactDD => {
            let ks: Vec<f64> = (1..=count).map(|n| n as f64 * PI / x_len).collect();
            let tr = ks.iter().enumerate().map(|(i, k)| amp * k * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            (ks.iter().map(|k| k * k).collect(), tr, 0.0, Eigfun::Sine { x_len })
        }
        BasisKind::ExactND => {
            let ks: Vec<f64> = (1..=count).map(|n| (n as f64 - 0.5) * PI / x_len).collect();
            let tr = ks.iter().enumerate().map(|(i, k)| amp * k * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            (ks.iter().map(|k| k * k).collect(), tr, -0.5, Eigfun::QuarterCos { x_len })
        }
        BasisKind::NumericSL => {
            return Err(Error::Config("numeric-SL bases come from build_sturm_liouville_basis".into()));
        }
    };
    let gamma_min = traces.iter().fold(f64::INFINITY, |m: f64, g: &f64| m.min(g.abs()));
    Ok(SpectralBasis {
        kind,
        lambdas,
        traces,
        nu,
        length: x_len,
        x_len,
        gamma_min,
        eig_errors: vec![0.0; count],
        eigfun,
        model: ZeroModel { nu, scale: (PI / x_len).powi(2), shift: 0.0, exact: true },
    })
}

struct FdLevel {
    lambdas: Vec<f64>,
    traces: Vec<f64>,
    values: Vec<Vec<f64>>,
}

fn fd_level(pb: &ParabolicProblem, count: usize, n: usize) -> Result<FdLevel> {
    let x_len = pb.x_len;
    let h = x_len / n as f64;
    let p = |x: f64| pb.p.eval(x, x_len);
    let q = |x: f64| pb.q.eval(x, x_len);
    let dir0 = pb.bc0[1].abs() < 1e-14;
    let dir1 = pb.bc1[1].abs() < 1e-14;
    let first = if dir0 { 1 } else { 0 };
    let last = if dir1 { n - 1 } else { n };
    let m = last + 1 - first;
    if m < count + 2 {
        return Err(Error::numeric("grid too coarse for requested modes", m as f64));
    }
    let mut kd = vec![0.0; m];
    let mut ko = vec![0.0; m.saturating_sub(1)];
    let mut w = vec![h; m];
    for (r, i) in (first..=last).enumerate() {
        let x = i as f64 * h;
        let pl = if i > 0 { p(x - 0.5 * h) } else { 0.0 };
        let pr = if i < n { p(x + 0.5 * h) } else { 0.0 };
        if i == 0 {
            // half cell with Robin flux: u'(0) = −(a0/b0) u(0)
            kd[r] = pr / h - p(0.0) * pb.bc0[0] / pb.bc0[1] - 0.5 * h * q(0.0);
            w[r] = 0.5 * h;
        } else if i == n {
            kd[r] = pl / h + p(x_len) * pb.bc1[0] / pb.bc1[1] - 0.5 * h * q(x_len);
            w[r] = 0.5 * h;
        } else {
            kd[r] = (pl + pr) / h - h * q(x);
        }
        if r + 1 < m {
            ko[r] = -pr / h;
        }
    }
    // symmetrize K v = λ W v
    let ws: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let t = SymTridiag {
        diag: kd.iter().zip(&w).map(|(k, wi)| k / wi).collect(),
        off: ko.iter().enumerate().map(|(r, k)| k / (ws[r] * ws[r + 1])).collect(),
    };
    let mut lambdas = Vec::with_capacity(count);
    let mut traces = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let lam = t.eigenvalue(k);
        let y = t.eigenvector(lam);
        let mut full = vec![0.0; n + 1];
        for (r, i) in (first..=last).enumerate() {
            full[i] = y[r] / ws[r];
        }
        // sign: e(0) > 0 unless Dirichlet at 0, then e'(0) > 0
        let probe = if dir0 { full[1] } else { full[0] };
        if probe < 0.0 {
            for v in full.iter_mut() {
                *v = -*v;
            }
        }
        let trace = if !dir1 {
            full[n] * p(x_len) / pb.bc1[1]
        } else {
            // one-sided second-order derivative at X (u_N = 0)
            let d = (3.0 * full[n] - 4.0 * full[n - 1] + full[n - 2]) / (2.0 * h);
            -d * p(x_len) / pb.bc1[0]
        };
        lambdas.push(lam);
        traces.push(trace);
        values.push(full);
    }
    Ok(FdLevel { lambdas, traces, values })
}

/// First `count` eigenpairs of −((p u')' + q u) = λ u by finite differences with
/// Richardson extrapolation over three grid levels.
pub fn build_sturm_liouville_basis(pb: &ParabolicProblem, count: usize) -> Result<SpectralBasis> {
    build_sturm_liouville_basis_tol(pb, count, 1e-8)
}

pub fn build_sturm_liouville_basis_tol(pb: &ParabolicProblem, count: usize, tol: f64) -> Result<SpectralBasis> {
    pb.validate()?;
    if count == 0 {
        return Err(Error::Precondition("count must be ≥ 1".into()));
    }
    let mut n0 = (48 * count).max(512).next_power_of_two();
    let max_n = 1 << 16;
    loop {
        let l1 = fd_level(pb, count, n0)?;
        let l2 = fd_level(pb, count, 2 * n0)?;
        let l3 = fd_level(pb, count, 4 * n0)?;
        let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
        let mut lambdas = Vec::with_capacity(count);
        let mut errs = Vec::with_capacity(count);
        let mut traces = Vec::with_capacity(count);
        let mut worst: f64 = 0.0;
        for k in 0..count {
            let r1 = rich(l1.lambdas[k], l2.lambdas[k]);
            let r2 = rich(l2.lambdas[k], l3.lambdas[k]);
            let err = (r2 - r1).abs() / 15.0 + 1e-14 * r2.abs();
            worst = worst.max(err / r2.abs().max(1.0));
            lambdas.push((16.0 * r2 - r1) / 15.0);
            errs.push(err);
            let t1 = rich(l1.traces[k], l2.traces[k]);
            let t2 = rich(l2.traces[k], l3.traces[k]);
            traces.push((16.0 * t2 - t1) / 15.0);
        }
        if worst <= tol {
            for k in 1..count {
                if lambdas[k] <= lambdas[k - 1] {
                    return Err(Error::Invariant("eigenvalues not strictly increasing".into()));
                }
            }
            let length = pb.effective_length();
            let gamma_min = traces.iter().fold(f64::INFINITY, |m: f64, g: &f64| m.min(g.abs()));
            let sigma = (PI / length).powi(2);
            let nu = fit_nu(&lambdas.iter().map(|l| l / sigma).collect::<Vec<_>>()).0;
            let model = snap_model(&lambdas, sigma, nu);
            return Ok(SpectralBasis {
                kind: BasisKind::NumericSL,
                lambdas,
                traces,
                nu,
                length,
                x_len: pb.x_len,
                gamma_min,
                eig_errors: errs,
                eigfun: Eigfun::Sampled { x_len: pb.x_len, values: l3.values },
                model,
            });
        }
        if 8 * n0 > max_n {
            return Err(Error::numeric("finite-difference refinements disagree", worst));
        }
        n0 *= 2;
    }
}

/// Snap ν to the boundary-type classes {0, −½, −1} and fit the constant offset
/// over the top half of the modes.
fn snap_model(lambdas: &[f64], sigma: f64, nu_fit: f64) -> ZeroModel {
    let nu = [0.0, -0.5, -1.0].into_iter().min_by(|a, b| (a - nu_fit).abs().partial_cmp(&(b - nu_fit).abs()).unwrap()).unwrap();
    let n = lambdas.len();
    let start = n / 2;
    let mut off = 0.0;
    for (k, lam) in lambdas.iter().enumerate().skip(start) {
        let m = (k + 1) as f64 + nu;
        off += lam - sigma * m * m;
    }
    off /= (n - start) as f64;
    ZeroModel { nu, scale: sigma, shift: off, exact: false }
}

/// Least squares √λ_n ≈ n + ν over the top half; returns (ν, max residual).
fn fit_nu(reduced: &[f64]) -> (f64, f64) {
    let n = reduced.len();
    let start = n / 2;
    let pts: Vec<(f64, f64)> = (start..n).map(|k| ((k + 1) as f64, reduced[k].max(0.0).sqrt())).collect();
    let nu = pts.iter().map(|(k, s)| s - k).sum::<f64>() / pts.len() as f64;
    let res = pts.iter().map(|(k, s)| (s - k - nu).abs()).fold(0.0, f64::max);
    (nu, res)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AsymptoticsReport {
    pub positive: bool,
    pub increasing: bool,
    pub min_gap: f64,
    pub nu: f64,
    /// max |√λ̃_n − n − ν| over the fitted modes
    pub sqrt_residual: f64,
    /// max |λ̃_n − (n+ν)²| (bounded-remainder regime)
    pub abs_residual: f64,
    /// max |λ̃_n − (n+ν)²|/n (o(n)-remainder regime)
    pub rel_residual: f64,
    pub gamma_min: f64,
}

pub fn verify_spectral_assumption(basis: &SpectralBasis) -> Result<AsymptoticsReport> {
    let n = basis.count();
    if n < 10 {
        return Err(Error::Precondition(format!("need at least 10 modes, have {n}")));
    }
    let mut min_gap = f64::INFINITY;
    for k in 1..n {
        let g = basis.lambdas[k] - basis.lambdas[k - 1];
        if g <= 0.0 {
            return Err(Error::Invariant(format!("eigenvalues not increasing at n = {}", k + 1)));
        }
        min_gap = min_gap.min(g);
    }
    let sigma = (PI / basis.length).powi(2);
    let reduced: Vec<f64> = basis.lambdas.iter().map(|l| l / sigma).collect();
    let (nu, sqrt_residual) = fit_nu(&reduced);
    let mut abs_residual: f64 = 0.0;
    let mut rel_residual: f64 = 0.0;
    for (k, l) in reduced.iter().enumerate().skip(n / 2) {
        let m = (k + 1) as f64 + nu;
        let r = (l - m * m).abs();
        abs_residual = abs_residual.max(r);
        rel_residual = rel_residual.max(r / (k + 1) as f64);
    }
    Ok(AsymptoticsReport {
        positive: basis.lambdas[0] > 0.0,
        increasing: true,
        min_gap,
        nu,
        sqrt_residual,
        abs_residual,
        rel_residual,
        gamma_min: basis.gamma_min,
    })
}

/// Maps the original problem on [0,T] to the canonical one: shift λ ↦ λ + s,
/// time scale t̃ = σt with σ = (π/L)², window [−T̃/2, T̃/2].
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReductionSchedule {
    pub shift: f64,
    pub sigma: f64,
    pub t_orig: f64,
    pub t_reduced: f64,
    pub length: f64,
}

impl ReductionSchedule {
    pub fn identity(t: f64) -> Self {
        ReductionSchedule { shift: 0.0, sigma: 1.0, t_orig: t, t_reduced: t, length: PI }
    }

    /// Worst-case factor L/π · e^{sT} from reduced to original control norms
    /// (e^{sT/2} on the control and e^{sT/2} on the data).
    pub fn cost_factor(&self) -> f64 {
        self.ln_cost_factor().exp()
    }

    /// Same reduction up to rounding.
    pub fn matches(&self, o: &ReductionSchedule) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        close(self.sigma, o.sigma) && close(self.t_orig, o.t_orig) && close(self.t_reduced, o.t_reduced) && (self.shift == o.shift || close(self.shift, o.shift))
    }

    pub fn ln_cost_factor(&self) -> f64 {
        (self.length / PI).ln() + self.shift * self.t_orig
    }

    /// Reduced control on [−T̃/2, T̃/2] → original control on [0, T]:
    /// g(t) = e^{s t} g̃(σ t − T̃/2).
    pub fn control_to_original(&self, g: &ControlSignal) -> ControlSignal {
        let n = g.samples.len();
        let dt = self.t_orig / (n - 1) as f64;
        let samples = g.samples.iter().enumerate().map(|(i, v)| v * (self.shift * i as f64 * dt).exp()).collect();
        let mut out = ControlSignal::new((0.0, self.t_orig), samples);
        if self.shift == 0.0 {
            out.norm_cache = g.norm_cache.map(|c| c / self.sigma.sqrt());
        }
        out.exact = g.exact.clone();
        out
    }

    pub fn control_to_reduced(&self, g: &ControlSignal) -> ControlSignal {
        let n = g.samples.len();
        let dt = self.t_orig / (n - 1) as f64;
        let samples = g.samples.iter().enumerate().map(|(i, v)| v * (-self.shift * i as f64 * dt).exp()).collect();
        let h = self.t_reduced / 2.0;
        let mut out = ControlSignal::new((-h, h), samples);
        if self.shift == 0.0 {
            out.norm_cache = g.norm_cache.map(|c| c * self.sigma.sqrt());
        }
        out.exact = g.exact.clone();
        out
    }
}

pub fn reduce_to_canonical(basis: &SpectralBasis, t: f64) -> (SpectralBasis, ReductionSchedule) {
    let sigma = (PI / basis.length).powi(2);
    // reduced λ̃_1 = (λ_1 + s)/σ ≥ 1
    let shift = (sigma - basis.lambdas[0]).max(0.0);
    let mut red = basis.clone();
    let m = basis.model;
    red.model = ZeroModel { nu: m.nu, scale: m.scale / sigma, shift: (m.shift + shift) / sigma, exact: m.exact };
    if m.exact && shift == 0.0 {
        // avoid rounding in (nπ/X)²/σ: the reduced spectrum is exactly (n+ν)²
        red.model.scale = 1.0;
        red.model.shift = 0.0;
        red.lambdas = (1..=basis.count()).map(|k| red.model.lambda(k)).collect();
    } else {
        red.lambdas = basis.lambdas.iter().map(|l| (l + shift) / sigma).collect();
    }
    red.traces = basis.traces.iter().map(|g| g / sigma).collect();
    red.gamma_min = basis.gamma_min / sigma;
    red.length = PI;
    let sched = ReductionSchedule { shift, sigma, t_orig: t, t_reduced: sigma * t, length: basis.length };
    (red, sched)
}
