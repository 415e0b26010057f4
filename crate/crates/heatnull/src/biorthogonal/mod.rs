//! Biorthogonal families to {e^{−λ_k t}} on a centered window, from the
//! multiplier construction (Paley–Wiener inversion of G_n) or from the Gram
//! matrix of the first N exponentials, and the null-control series built on them.

pub mod expsum;
pub mod signal;

pub use expsum::{ExpSum, WindowExps};
pub use signal::{control_cost, ControlSignal, ExactControl};

use crate::entire::mp_eval::{mp_f, mp_f_n_own, mp_multiplier_imag, mp_multiplier_real_grid};
use crate::entire::{log_m, log_m_upper, GnEvaluator, MultiplierSpec, ZeroProduct};
use crate::error::{Error, Result};
use crate::mp::{self, MpC};
use crate::spectral::{reduce_to_canonical, HeatState, ReductionSchedule, SpectralBasis};
use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FamilyOptions {
    /// multiplier slack: d = π + 2ε
    pub eps: f64,
    pub tol: f64,
    /// moments against e^{−λ_k t}, k ≤ this, are certified (0: family size)
    pub moment_modes: usize,
    /// samples per signal when a sampled view is requested
    pub samples: usize,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { eps: 0.3, tol: 1e-12, moment_modes: 0, samples: 0 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FamilyDiagnostics {
    pub kind: String,
    pub precision_bits: u32,
    pub grid_step: f64,
    pub grid_points: usize,
    pub x_cap: f64,
    /// largest ln|G_n| on the frequency grid
    pub peak_log: f64,
    /// envelope bound on the discarded frequency tail, log form
    pub tail_log: f64,
    /// highest frequency carrying non-negligible weight
    pub x_sig: f64,
    pub log10_cond: Option<f64>,
    pub multiplier: Option<MultiplierSpec>,
}

#[derive(Clone, Debug)]
enum Source {
    Multiplier { xs: Vec<Float>, bvals: Vec<MpC>, cn: Vec<Float>, h: Float },
    Gram { inv: Vec<Vec<Float>> },
}

/// Signals g_n on the reduced window with ∫ g_n e^{−λ_k t} dt = δ_nk.
#[derive(Clone, Debug)]
pub struct BiorthogonalFamily {
    pub lambdas: Vec<f64>,
    pub window: (f64, f64),
    pub norms: Vec<f64>,
    pub ln_norms: Vec<f64>,
    pub sched: ReductionSchedule,
    pub diagnostics: FamilyDiagnostics,
    pub prec: u32,
    rates: Arc<Vec<MpC>>,
    lam_mp: Vec<Float>,
    source: Source,
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    lambdas: &'a [f64],
    window: (f64, f64),
    norms: &'a [f64],
    ln_norms: &'a [f64],
    schedule: &'a ReductionSchedule,
    diagnostics: &'a FamilyDiagnostics,
}

impl BiorthogonalFamily {
    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn tau(&self) -> f64 {
        self.window.1
    }

    pub fn is_multiplier(&self) -> bool {
        matches!(self.source, Source::Multiplier { .. })
    }

    /// g_n (1-based) as an exponential sum in window time.
    pub fn sum(&self, n: usize) -> ExpSum {
        let i = n - 1;
        let p = self.prec;
        match &self.source {
            Source::Multiplier { xs, bvals, cn, h, .. } => {
                let lam = &self.lam_mp[i];
                let w0 = Float::with_val(p, h / (mp::pi(p) * 2u32));
                let w1 = Float::with_val(p, &w0 * 2u32);
                let coeffs = xs
                    .par_iter()
                    .zip(bvals.par_iter())
                    .enumerate()
                    .map(|(m, (x, b))| {
                        // w_m B_m c_n/(1 + i x/λ_n)
                        let r = Float::with_val(p, x / lam);
                        let den = Float::with_val(p, r.square_ref()) + 1u32;
                        let q = MpC::from_parts(Float::with_val(p, 1u32 / &den), Float::with_val(p, -(r / &den)));
                        let w = if m == 0 { &w0 } else { &w1 };
                        b.mul(&q).scale(&Float::with_val(p, w * &cn[i]))
                    })
                    .collect();
                ExpSum::new(coeffs, self.rates.clone())
            }
            Source::Gram { inv } => ExpSum::new(inv[i].iter().map(|c| MpC::real(c.clone())).collect(), self.rates.clone()),
        }
    }

    /// Σ_n w_n g_n for weights indexed 1..=count (zeros skipped).
    pub fn combination(&self, weights: &[Float]) -> ExpSum {
        let sums: Vec<(Float, ExpSum)> =
            weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, w)| (w.clone(), self.sum(i + 1))).collect();
        if sums.is_empty() {
            return ExpSum::new(vec![MpC::zero(self.prec); self.rates.len()], self.rates.clone());
        }
        let refs: Vec<(Float, &ExpSum)> = sums.iter().map(|(w, s)| (w.clone(), s)).collect();
        ExpSum::combine(&refs)
    }

    pub fn window_exps(&self) -> WindowExps {
        ExpSum::new(vec![MpC::zero(self.prec); self.rates.len()], self.rates.clone()).window(self.window.0, self.window.1)
    }

    /// Sampled view of g_n on the window (exact form attached).
    pub fn signal(&self, n: usize, samples: usize) -> ControlSignal {
        let sum = self.sum(n);
        let count = if samples == 0 { self.default_samples() } else { samples };
        let vals = sum.sample(self.window.0, self.window.1, count);
        let mut s = ControlSignal::new(self.window, vals);
        s.norm_cache = Some(self.norms[n - 1]);
        s.exact = Some(Arc::new(ExactControl { sum, sched: self.sched }));
        s
    }

    /// Enough samples to resolve the highest significant frequency.
    pub fn default_samples(&self) -> usize {
        let len = self.window.1 - self.window.0;
        let n = (4.0 * len * self.diagnostics.x_sig / PI).ceil() as usize + 1;
        n.clamp(513, 16385) | 1
    }

    /// ln ‖G_n‖ on the real line (unitary transform of g_n).
    pub fn ln_freq_norm(&self, n: usize) -> f64 {
        self.ln_norms[n - 1] + 0.5 * (2.0 * PI).ln()
    }

    /// ∫_window g_n(t) e^{ixt} dt, which is G_n(x) for the multiplier family.
    pub fn forward(&self, n: usize, x: f64) -> (f64, f64) {
        let p = self.prec;
        match &self.source {
            Source::Multiplier { xs, bvals, cn, h, .. } => {
                // ∫_{−τ}^{τ} e^{i(x−x_m)t} dt = 2 sin((x−x_m)τ)/(x−x_m), with x_m τ = mπ/2
                let tau = Float::with_val(p, self.tau());
                let xf = Float::with_val(p, x);
                let (s, c) = Float::with_val(p, &xf * &tau).sin_cos(Float::new(p));
                let lam = &self.lam_mp[n - 1];
                let mut acc = MpC::zero(p);
                let two_tau = Float::with_val(p, &tau * 2u32);
                for (m, (xm, b)) in xs.iter().zip(bvals).enumerate() {
                    let r = Float::with_val(p, xm / lam);
                    let g = b.mul(&MpC::from_parts(Float::with_val(p, 1u32), r).recip());
                    // both ±x_m; G(−x_m) = conj G(x_m)
                    for sign in [1i32, -1] {
                        if m == 0 && sign < 0 {
                            continue;
                        }
                        let k = (sign * m as i32).rem_euclid(4);
                        // sin(xτ − kπ/2)
                        let sk = match k {
                            0 => s.clone(),
                            1 => Float::with_val(p, -&c),
                            2 => Float::with_val(p, -&s),
                            _ => c.clone(),
                        };
                        let d = Float::with_val(p, &xf - Float::with_val(p, xm * sign));
                        let ker = if d.is_zero() { two_tau.clone() } else { Float::with_val(p, sk * 2u32) / d };
                        let gv = if sign > 0 { g.clone() } else { g.conj() };
                        acc.add_assign(&gv.scale(&ker));
                    }
                }
                let w = Float::with_val(p, Float::with_val(p, h / (mp::pi(p) * 2u32)) * &cn[n - 1]);
                acc.scale(&w).to_c64()
            }
            Source::Gram { inv } => {
                let mut re = 0.0;
                let mut im = 0.0;
                let (a, b) = self.window;
                for (c, l) in inv[n - 1].iter().zip(&self.lambdas) {
                    let z = Complex64::new(-l, x);
                    let v = c.to_f64() * ((z * b).exp() - (z * a).exp()) / z;
                    re += v.re;
                    im += v.im;
                }
                (re, im)
            }
        }
    }

    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.manifest_json()?)
    }

    pub fn manifest_json(&self) -> Result<Vec<u8>> {
        let m = Manifest {
            kind: &self.diagnostics.kind,
            lambdas: &self.lambdas,
            window: self.window,
            norms: &self.norms,
            ln_norms: &self.ln_norms,
            schedule: &self.sched,
            diagnostics: &self.diagnostics,
        };
        Ok(serde_json::to_vec_pretty(&m)?)
    }
}

fn ln_abs_f(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        Float::with_val(x.prec(), x.abs_ref()).ln().to_f64()
    }
}

/// Multiplier-built family for modes 1..=count of a reduced basis on the
/// window [−T̃/2, T̃/2] of `sched`.
pub fn multiplier_family(red: &SpectralBasis, sched: ReductionSchedule, count: usize, opts: &FamilyOptions) -> Result<BiorthogonalFamily> {
    if count == 0 || count > red.count() {
        return Err(Error::Precondition(format!("family size {count} outside 1..={}", red.count())));
    }
    if red.lambdas[0] <= 0.0 {
        return Err(Error::Precondition("multiplier family needs a reduced basis (λ_1 > 0)".into()));
    }
    let tau = sched.t_reduced / 2.0;
    let spec = MultiplierSpec::new(PI + 2.0 * opts.eps, tau)?;
    let product = ZeroProduct::from_basis(red);
    build_multiplier(&product, spec, count, sched, opts)
}

/// Single-signal inversion g_n = (unitary transform)⁻¹ of G_n, scaled to the
/// biorthogonal normalization ∫ g_n e^{−λ_n t} = 1.
pub fn invert_to_time(ev: &GnEvaluator, t: f64, tol: f64) -> Result<ControlSignal> {
    if (ev.spec.tau - t / 2.0).abs() > 1e-12 * t {
        return Err(Error::Precondition(format!("evaluator type {} differs from T/2 = {}", ev.spec.tau, t / 2.0)));
    }
    let opts = FamilyOptions { eps: (ev.spec.d - PI) / 2.0, tol, moment_modes: ev.n, samples: 0 };
    let fam = build_multiplier(&ev.product, ev.spec, ev.n, ReductionSchedule::identity(t), &opts)?;
    Ok(fam.signal(ev.n, 0))
}

fn build_multiplier(product: &ZeroProduct, spec: MultiplierSpec, count: usize, sched: ReductionSchedule, opts: &FamilyOptions) -> Result<BiorthogonalFamily> {
    let tau = spec.tau;
    let lambdas: Vec<f64> = (1..=count).map(|k| product.lambda(k)).collect();
    let mm = if opts.moment_modes == 0 { count } else { opts.moment_modes };
    let extra = product.lambda(mm.max(1)) * tau;
    let target = (-opts.tol.ln()).max(0.0) + 10.0;
    // ln|c_n|, c_n = 1/(f_n(λ_n) M(iλ_n))
    let ln_c: Vec<f64> = (1..=count)
        .map(|n| -product.ln_f_n_own(n).logmag - log_m(&spec, Complex64::new(0.0, product.lambda(n)), 1e-15).logmag)
        .collect();
    let peak_c = ln_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_b_up = |x: f64| product.ln_f(Complex64::new(0.0, -x)).logmag + log_m_upper(&spec, x);
    let h = PI / (2.0 * tau);
    // envelope scan for the cutoff and the peak
    let mut x = h;
    let mut last_bad = 0.0;
    let mut peak = ln_b_up(0.0) + peak_c;
    let limit = 1e12;
    while x < limit {
        let v = ln_b_up(x) + peak_c;
        peak = peak.max(v);
        if v + (x + 1.0).ln() > -(extra + target) {
            last_bad = x;
        }
        if x > 4.0 * last_bad && x > 200.0 * h {
            break;
        }
        x *= 1.01;
    }
    if x >= limit {
        return Err(Error::truncation("multiplier envelope does not decay within the frequency budget", last_bad));
    }
    if peak > 700.0 {
        return Err(Error::truncation(format!("peak log-magnitude {peak:.1} exceeds the floating-point budget"), peak));
    }
    let x_cap = last_bad * 1.01 + 2.0 * h;
    let points = (x_cap / h).ceil() as usize + 1;
    let range = peak + extra + (points as f64).ln() + 10.0;
    let prec = mp::bits_for(range, target) + 32;
    // exact step π/(2τ): the Poisson period must be exactly twice the window
    let h_mp = Float::with_val(prec, mp::pi(prec) / (Float::with_val(prec, tau) * 2u32));
    let xs: Vec<Float> = (0..points).map(|m| Float::with_val(prec, &h_mp * m as u64)).collect();
    let mvals = mp_multiplier_real_grid(&spec, &h_mp, points, prec);
    let bvals: Vec<MpC> = xs
        .par_iter()
        .zip(mvals.par_iter())
        .map(|(x, mv)| {
            let z = MpC::from_parts(Float::new(prec), Float::with_val(prec, -x));
            mp_f(product, &z).scale(mv)
        })
        .collect();
    let bnorm2: Vec<Float> = bvals.iter().map(|b| b.norm_sqr()).collect();
    let own = mp_multiplier_imag(&spec, &lambdas, prec);
    let cn: Vec<Float> = (1..=count)
        .map(|n| {
            let f = mp_f_n_own(product, n, prec);
            Float::with_val(prec, 1u32 / (f * &own[n - 1]))
        })
        .collect();
    let lam_mp: Vec<Float> = lambdas.iter().map(|l| Float::with_val(prec, *l)).collect();
    // ‖g_n‖² = (h/2π) Σ_{m∈Z} |G_n(x_m)|²
    let mut ln_norms = Vec::with_capacity(count);
    let mut x_sig: f64 = 0.0;
    for n in 0..count {
        let mut s = Float::new(prec);
        let mut best = f64::NEG_INFINITY;
        let lns: Vec<f64> = xs
            .iter()
            .zip(&bnorm2)
            .enumerate()
            .map(|(m, (x, b2))| {
                let r = Float::with_val(prec, x / &lam_mp[n]);
                let den = Float::with_val(prec, r.square_ref()) + 1u32;
                let v = Float::with_val(prec, b2 / den);
                let w = if m == 0 { 1u32 } else { 2u32 };
                s += Float::with_val(prec, &v * w);
                ln_abs_f(&v) / 2.0
            })
            .collect();
        for l in &lns {
            best = best.max(*l);
        }
        for (m, l) in lns.iter().enumerate() {
            if *l > best - 40.0 {
                x_sig = x_sig.max(m as f64 * h);
            }
        }
        s *= Float::with_val(prec, &h_mp / (mp::pi(prec) * 2u32));
        s *= Float::with_val(prec, cn[n].square_ref());
        ln_norms.push(ln_abs_f(&s) / 2.0);
    }
    let tail_log = ln_b_up(x_cap) + peak_c + (x_cap + 1.0).ln();
    let diagnostics = FamilyDiagnostics {
        kind: "multiplier".into(),
        precision_bits: prec,
        grid_step: h,
        grid_points: points,
        x_cap,
        peak_log: peak,
        tail_log,
        x_sig,
        log10_cond: None,
        multiplier: Some(spec),
    };
    let rates = Arc::new(xs.iter().map(|x| MpC::from_parts(Float::new(prec), Float::with_val(prec, -x))).collect());
    Ok(BiorthogonalFamily {
        norms: ln_norms.iter().map(|l| l.exp()).collect(),
        ln_norms,
        lambdas,
        window: (-tau, tau),
        sched,
        diagnostics,
        prec,
        rates,
        lam_mp,
        source: Source::Multiplier { xs, bvals, cn, h: h_mp },
    })
}

/// Minimal-norm biorthogonal family inside span{e^{−λ_k t}, k ≤ N} on
/// [−T/2, T/2], from the inverse Gram matrix computed in MPFR.
pub fn gram_minimal_family(lambdas: &[f64], count: usize, t: f64) -> Result<BiorthogonalFamily> {
    gram_family_with(lambdas, count, ReductionSchedule::identity(t), 2400.0)
}

pub fn gram_family_with(lambdas: &[f64], count: usize, sched: ReductionSchedule, max_log10_cond: f64) -> Result<BiorthogonalFamily> {
    if count == 0 || count > lambdas.len() {
        return Err(Error::Precondition(format!("family size {count} outside 1..={}", lambdas.len())));
    }
    let lam = &lambdas[..count];
    for i in 0..count {
        for j in 0..i {
            if lam[i] == lam[j] {
                return Err(Error::Precondition("exponents must be distinct".into()));
            }
        }
    }
    let tau = sched.t_reduced / 2.0;
    let mut prec = 256u32;
    loop {
        let (inv, log10_cond, resid) = gram_inverse(lam, tau, prec);
        if log10_cond > max_log10_cond {
            return Err(Error::IllConditioned { log10_cond });
        }
        let ok = resid < 1e-40;
        if !ok && prec < mp::MAX_BITS {
            prec = (prec * 2).min(mp::MAX_BITS);
            continue;
        }
        if !ok {
            return Err(Error::IllConditioned { log10_cond });
        }
        let ln_norms: Vec<f64> = (0..count).map(|n| ln_abs_f(&inv[n][n]) / 2.0).collect();
        let lam_mp: Vec<Float> = lam.iter().map(|l| Float::with_val(prec, *l)).collect();
        let rates = Arc::new(lam_mp.iter().map(|l| MpC::real(Float::with_val(prec, -l))).collect());
        let x_sig = lam.iter().cloned().fold(0.0, f64::max);
        return Ok(BiorthogonalFamily {
            lambdas: lam.to_vec(),
            window: (-tau, tau),
            norms: ln_norms.iter().map(|l| l.exp()).collect(),
            ln_norms,
            sched,
            diagnostics: FamilyDiagnostics {
                kind: "gram".into(),
                precision_bits: prec,
                x_sig,
                log10_cond: Some(log10_cond),
                ..Default::default()
            },
            prec,
            rates,
            lam_mp,
            source: Source::Gram { inv },
        });
    }
}

/// (Γ⁻¹, log10 cond₁, max |ΓΓ⁻¹ − I|).
fn gram_inverse(lam: &[f64], tau: f64, prec: u32) -> (Vec<Vec<Float>>, f64, f64) {
    let n = lam.len();
    let t = Float::with_val(prec, tau);
    let g: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s = Float::with_val(prec, lam[i]) + lam[j];
                    if s.is_zero() {
                        Float::with_val(prec, &t * 2u32)
                    } else {
                        let st = Float::with_val(prec, &s * &t).sinh();
                        Float::with_val(prec, st * 2u32) / s
                    }
                })
                .collect()
        })
        .collect();
    // Cholesky Γ = L Lᵀ
    let mut l = vec![vec![Float::new(prec); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= Float::with_val(prec, &l[i][k] * &l[j][k]);
            }
            if i == j {
                if s <= 0 {
                    return (vec![vec![Float::new(prec); n]; n], f64::INFINITY, f64::INFINITY);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / &l[j][j];
            }
        }
    }
    // inverse column by column
    let mut inv = vec![vec![Float::new(prec); n]; n];
    for c in 0..n {
        let mut y = vec![Float::new(prec); n];
        for i in 0..n {
            let mut s = Float::with_val(prec, if i == c { 1 } else { 0 });
            for k in 0..i {
                s -= Float::with_val(prec, &l[i][k] * &y[k]);
            }
            y[i] = s / &l[i][i];
        }
        let mut x = vec![Float::new(prec); n];
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s -= Float::with_val(prec, &l[k][i] * &x[k]);
            }
            x[i] = s / &l[i][i];
        }
        for i in 0..n {
            inv[i][c] = x[i].clone();
        }
    }
    let norm1 = |m: &Vec<Vec<Float>>| -> Float {
        let mut best = Float::new(prec);
        for j in 0..n {
            let mut s = Float::new(prec);
            for row in m.iter() {
                s += Float::with_val(prec, row[j].abs_ref());
            }
            if s > best {
                best = s;
            }
        }
        best
    };
    let cond = Float::with_val(prec, norm1(&g) * norm1(&inv));
    let log10_cond = cond.log10().to_f64();
    let mut resid: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut s = Float::with_val(prec, if i == j { -1 } else { 0 });
            for k in 0..n {
                s += Float::with_val(prec, &g[i][k] * &inv[k][j]);
            }
            resid = resid.max(s.to_f64().abs());
        }
    }
    (inv, log10_cond, resid)
}

/// B_nk = ∫ g_n e^{−λ_k t} dt over the window, n, k ≤ k_max.
pub fn biorthogonality_matrix(family: &BiorthogonalFamily, k_max: usize) -> Vec<Vec<f64>> {
    let k_max = k_max.min(family.count());
    let lams = &family.lambdas[..k_max];
    let w = family.window_exps();
    (1..=k_max).map(|n| family.sum(n).moments(&w, lams).iter().map(|v| v.to_f64()).collect()).collect()
}

/// Result of assembling the series for one initial state.
#[derive(Clone, Debug)]
pub struct AssembledControl {
    pub signal: ControlSignal,
    /// ‖g‖ in original units (log form)
    pub ln_cost: f64,
    pub terms: usize,
}

/// g(t) = −Σ_n (c_n/γ_n) e^{−λ_n T/2} g_n(−t) in canonical time, mapped back
/// to [0, T]; `basis` is the original basis, `family` built on its reduction.
pub fn assemble_control(basis: &SpectralBasis, u0: &HeatState, family: &BiorthogonalFamily, t: f64) -> Result<AssembledControl> {
    let (red, sched) = reduce_to_canonical(basis, t);
    let fs = family.sched;
    if !fs.matches(&sched) {
        return Err(Error::Config("family window does not match the reduced problem".into()));
    }
    for (a, b) in family.lambdas.iter().zip(&red.lambdas) {
        if a != b {
            return Err(Error::Config("family exponents differ from the reduced spectrum".into()));
        }
    }
    if u0.coeffs.len() > red.count() {
        return Err(Error::Config("initial state has more modes than the basis".into()));
    }
    let n_fam = family.count();
    let terms = u0.coeffs.iter().rposition(|c| *c != 0.0).map(|i| i + 1).unwrap_or(0);
    if terms > n_fam {
        return Err(Error::truncation(format!("initial state excites mode {terms} beyond the family size {n_fam}"), terms as f64));
    }
    let p = family.prec;
    let tr = Float::with_val(p, sched.t_reduced);
    let weights: Vec<Float> = (0..n_fam)
        .map(|i| {
            let c = u0.coeffs.get(i).copied().unwrap_or(0.0);
            if c == 0.0 {
                return Float::new(p);
            }
            let l = Float::with_val(p, red.lambdas[i]);
            let e = Float::with_val(p, -(l * &tr) / 2u32).exp();
            Float::with_val(p, -c / red.traces[i]) * e
        })
        .collect();
    let sum = family.combination(&weights);
    // cost: Plancherel on the frequency grid (multiplier) or exact pairs (Gram)
    let ln_red_norm = match &family.source {
        Source::Multiplier { h, .. } => {
            let mut s = Float::new(p);
            for (m, a) in sum.coeffs.iter().enumerate() {
                // coefficients are (h/π)G_m (m ≥ 1), (h/2π)G_0
                let w: f64 = if m == 0 { 2.0 } else { 1.0 };
                s += Float::with_val(p, a.norm_sqr() * w);
            }
            s *= Float::with_val(p, mp::pi(p) / h);
            ln_abs_f(&s) / 2.0
        }
        Source::Gram { .. } => ln_abs_f(&sum.norm_sqr_exact(family.window.0, family.window.1)) / 2.0,
    };
    let reversed = sum.reversed();
    let exact = ExactControl { sum: reversed, sched };
    let samples = family.default_samples();
    let (ln_cost, norm) = if sched.shift == 0.0 {
        let l = ln_red_norm - 0.5 * sched.sigma.ln();
        (l, Some(l.exp()))
    } else {
        (f64::NAN, None)
    };
    let mut signal = ControlSignal::from_exact(exact, samples, norm);
    let ln_cost = if ln_cost.is_nan() { signal.quadrature_norm().ln() } else { ln_cost };
    if terms == 0 {
        signal.norm_cache = Some(0.0);
    }
    Ok(AssembledControl { signal, ln_cost, terms })
}

#[cfg(test)]
mod tests;
