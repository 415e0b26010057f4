use crate::biorthogonal::{assemble_control, multiplier_family, ControlSignal, ExpSum, FamilyOptions};
use crate::error::{Error, Result};
use crate::heatsim::boundary_states;
use crate::io::{Axis, Grid};
use crate::quad::Rule;
use crate::spectral::{build_interval_basis, reduce_to_canonical, BasisKind, HeatState, SpectralBasis};
use rand::Rng;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FundamentalOptions {
    /// free-evolution fraction of T
    pub eps: f64,
    /// modes of the full interval used for δ at t = 0 (only odd ones are nonzero)
    pub delta_modes: usize,
    /// half-interval modes carrying the boundary-driven part
    pub forced_modes: usize,
    /// half-interval modes kept for the free part
    pub free_modes: usize,
    /// modes with e^{−μ_j T} below this are left uncontrolled
    pub cutoff: f64,
    pub family: FamilyOptions,
}

impl Default for FundamentalOptions {
    fn default() -> Self {
        FundamentalOptions {
            eps: 0.2,
            delta_modes: 64,
            forced_modes: 64,
            free_modes: 4096,
            cutoff: 1e-12,
            family: FamilyOptions { moment_modes: 1, ..FamilyOptions::default() },
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostPoint {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub norm: f64,
}

/// ‖v‖ ≤ A·e^{αL²/T} over the recorded points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostRecord {
    #[serde(rename = "A")]
    pub a: f64,
    pub alpha: f64,
    pub points: Vec<CostPoint>,
}

/// Least squares for ln‖v‖ against L²/T, then A raised until every point obeys the bound.
pub fn fit_cost_record(points: &[CostPoint]) -> Result<CostRecord> {
    if points.len() < 2 {
        return Err(Error::Degenerate("a cost record needs at least two (T, L) points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.l * p.l / p.t).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.norm.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all points share the same L²/T".into()));
    }
    let alpha = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let ln_a = xs.iter().zip(&ys).map(|(x, y)| y - alpha * x).fold(f64::NEG_INFINITY, f64::max);
    Ok(CostRecord { a: ln_a.exp(), alpha, points: points.to_vec() })
}

/// v on [0, T] × [−L, L]: free heat flow of δ for εT, then null-controlled from
/// both ends by the same signal. Stored modally on the half interval [0, L]
/// (v is even) with e_j = √(2/L) cos(κ_j s), κ_j = (j − ½)π/L.
#[derive(Clone, Debug)]
pub struct FundamentalControlledSolution {
    pub t: f64,
    pub l: f64,
    pub eps: f64,
    /// start of the controlled phase
    pub t0: f64,
    pub delta_modes: usize,
    pub controlled_modes: usize,
    pub forced_modes: usize,
    pub free_modes: usize,
    /// half-interval basis with `forced_modes` modes
    pub basis: SpectralBasis,
    /// boundary value v(t0 + r, ±L), r ∈ [0, T − t0]
    pub control: ControlSignal,
    /// control in phase time as an exact exponential sum
    pub control_sum: ExpSum,
    /// boundary-driven coefficients at each control sample
    pub forced: Vec<Vec<f64>>,
    /// ∫ e^{−μ_j(T−t)} g over the controlled phase, j ≤ forced_modes
    pub duhamel_mu: Vec<Float>,
    /// v_j(T), j ≤ forced_modes
    pub terminal: Vec<f64>,
    /// ‖v‖ on (0, T) × (−L, L)
    pub norm: f64,
    pub terminal_norm: f64,
    /// ‖(g, g)‖ over both ends
    pub control_cost: f64,
    pub cost: Option<CostRecord>,
}

pub(crate) fn kappa(j: usize, l: f64) -> f64 {
    (j as f64 - 0.5) * PI / l
}

/// ∫_0^L e_j
pub(crate) fn mean_coeff(j: usize, l: f64) -> f64 {
    let k = kappa(j, l);
    (2.0 / l).sqrt() * (k * l).sin() / k
}

pub fn fundamental_solution(t: f64, l: f64, opts: &FundamentalOptions) -> Result<FundamentalControlledSolution> {
    if !(t > 0.0 && l > 0.0) {
        return Err(Error::Config(format!("fundamental solution needs T > 0 and L > 0, got T = {t}, L = {l}")));
    }
    let eps = opts.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("free-evolution fraction {eps} outside (0, 1)")));
    }
    let t0 = eps * t;
    // the free series must converge at t0 within the mode budget
    let mu_free = kappa(opts.free_modes, l).powi(2);
    if mu_free * t0 < 40.0 {
        return Err(Error::Config(format!("free phase εT = {t0:e} is too short for {} free modes", opts.free_modes)));
    }
    let kv = opts.forced_modes;
    let kc = (1..=opts.free_modes).find(|j| (-kappa(*j + 1, l).powi(2) * t).exp() <= opts.cutoff).unwrap_or(opts.free_modes);
    if kc > kv {
        return Err(Error::truncation(format!("{kc} modes need control, only {kv} forced modes available"), kc as f64));
    }
    let basis = build_interval_basis(BasisKind::ExactND, l, kv)?;
    let c0 = 1.0 / (2.0 * l).sqrt();
    let tc = t - t0;
    let start: Vec<f64> = (0..kv).map(|j| if j < kc { c0 * (-basis.lambdas[j] * t0).exp() } else { 0.0 }).collect();
    let (red, sched) = reduce_to_canonical(&basis, tc);
    let fam = multiplier_family(&red, sched, kc, &opts.family)?;
    let out = assemble_control(&basis, &HeatState::new(start, &basis), &fam, tc)?;
    let control = out.signal;
    let control_sum = control.exact.as_ref().expect("assembled controls carry their exact form").original();
    let forced = boundary_states(&basis.lambdas, &basis.traces, &vec![0.0; kv], &control);
    let w = control_sum.window(0.0, tc);
    let p = control_sum.prec;
    let duhamel_mu: Vec<Float> = basis.lambdas.par_iter().map(|m| control_sum.duhamel(&w, &Float::with_val(p, *m))).collect();
    let terminal: Vec<f64> = (0..kv)
        .map(|j| {
            let free = Float::with_val(p, Float::with_val(p, -Float::with_val(p, basis.lambdas[j] * t)).exp() * c0);
            Float::with_val(p, free + Float::with_val(p, &duhamel_mu[j] * basis.traces[j])).to_f64()
        })
        .collect();
    let mut sol = FundamentalControlledSolution {
        t,
        l,
        eps,
        t0,
        delta_modes: opts.delta_modes,
        controlled_modes: kc,
        forced_modes: kv,
        free_modes: opts.free_modes,
        basis,
        control,
        control_sum,
        forced,
        duhamel_mu,
        terminal,
        norm: 0.0,
        terminal_norm: 0.0,
        control_cost: std::f64::consts::SQRT_2 * out.ln_cost.exp(),
        cost: None,
    };
    sol.norm = sol.space_time_norm();
    let tail: f64 = (kv + 1..=sol.free_modes).map(|j| (c0 * (-kappa(j, l).powi(2) * t).exp()).powi(2)).sum();
    sol.terminal_norm = (2.0 * (sol.terminal.iter().map(|v| v * v).sum::<f64>() + tail)).sqrt();
    Ok(sol)
}

impl FundamentalControlledSolution {
    pub fn c0(&self) -> f64 {
        1.0 / (2.0 * self.l).sqrt()
    }

    pub fn mu(&self, j: usize) -> f64 {
        kappa(j, self.l).powi(2)
    }

    /// e_j(s) on [−L, L] (even)
    pub fn mode(&self, j: usize, s: f64) -> f64 {
        (2.0 / self.l).sqrt() * (kappa(j, self.l) * s).cos()
    }

    /// Free part c0·e^{−μ_j t}.
    pub fn free_coeff(&self, j: usize, t: f64) -> f64 {
        self.c0() * (-self.mu(j) * t).exp()
    }

    /// Modes needed for the free part at time t > 0.
    pub fn free_count(&self, t: f64) -> usize {
        if t <= 0.0 {
            return (self.delta_modes + 1) / 2;
        }
        let j = ((40.0 / t).sqrt() * self.l / PI + 1.0).ceil() as usize;
        j.clamp(self.forced_modes, self.free_modes)
    }

    /// Times of the control samples in [t0, T].
    pub fn control_times(&self) -> Vec<f64> {
        (0..self.control.len()).map(|i| self.t0 + self.control.time(i)).collect()
    }

    /// Boundary-driven coefficients at time t (zero before t0), linear in the samples.
    pub fn forced_at(&self, t: f64) -> Vec<f64> {
        if t <= self.t0 {
            return vec![0.0; self.forced_modes];
        }
        let u = ((t - self.t0) / self.control.dt()).min((self.control.len() - 1) as f64);
        let i = (u.floor() as usize).min(self.control.len() - 2);
        let w = u - i as f64;
        self.forced[i].iter().zip(&self.forced[i + 1]).map(|(a, b)| a * (1.0 - w) + b * w).collect()
    }

    /// Boundary value g(t) = v(t, ±L).
    pub fn boundary_at(&self, t: f64) -> f64 {
        if t < self.t0 {
            0.0
        } else {
            self.control.value_at(t - self.t0)
        }
    }

    /// v(t, s); t = 0 gives the δ partial sum.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let nf = self.free_count(t);
        let mut v: f64 = (1..=nf).map(|j| self.free_coeff(j, t.max(0.0)) * self.mode(j, s)).sum();
        if t > self.t0 {
            // lift the boundary value so the modal tail converges
            let g = self.boundary_at(t);
            let f = self.forced_at(t);
            v += g;
            for (j, fj) in f.iter().enumerate() {
                v += (fj - g * mean_coeff(j + 1, self.l)) * self.mode(j + 1, s);
            }
        }
        v
    }

    pub fn field(&self, nt: usize, ns: usize) -> Grid {
        let ta = Axis::spanning(0.0, self.t, nt.max(2));
        let sa = Axis::spanning(-self.l, self.l, ns.max(2));
        let rows: Vec<Vec<f64>> = ta.points().par_iter().map(|t| sa.points().iter().map(|s| self.eval(*t, *s)).collect()).collect();
        Grid { axes: vec![ta, sa], data: rows.concat() }
    }

    /// ⟨v(0, ·), φ⟩ at the δ truncation.
    pub fn pairing(&self, phi: &dyn Fn(f64) -> f64) -> f64 {
        let nd = (self.delta_modes + 1) / 2;
        let rule = Rule::for_frequency(0.0, self.l, kappa(nd, self.l), 16);
        (1..=nd).map(|j| self.c0() * rule.integrate(|s| self.mode(j, s) * (phi(s) + phi(-s)))).sum()
    }

    /// ‖v‖² = 2∫ Σ_j v_j² dt: free phase in closed form, controlled phase by
    /// the trapezoid rule on the control grid with the lifted tail g²(L − Σ α_j²).
    fn space_time_norm(&self) -> f64 {
        let c0 = self.c0();
        let mut free = 0.0;
        let jmax = 1_000_000;
        for j in 1..=jmax {
            let m = self.mu(j);
            free += c0 * c0 * -(-2.0 * m * self.t0).exp_m1() / (2.0 * m);
        }
        // Σ_{j>J} 1/(2μ_j) ≤ (L/π)²/(2(J − ½))
        free += c0 * c0 * (self.l / PI).powi(2) / (2.0 * (jmax as f64 - 0.5));
        let kv = self.forced_modes;
        let lift = self.l - (1..=kv).map(|j| mean_coeff(j, self.l).powi(2)).sum::<f64>();
        let times = self.control_times();
        let n = times.len();
        let mut ctl = 0.0;
        for (i, t) in times.iter().enumerate() {
            let g = self.control.samples[i];
            let mut s = g * g * lift.max(0.0);
            for j in 0..kv {
                let v = self.free_coeff(j + 1, *t) + self.forced[i][j];
                s += v * v;
            }
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            ctl += w * s;
        }
        ctl *= self.control.dt();
        (2.0 * (free + ctl)).sqrt()
    }

    /// Largest |⟨v, −φ_t − φ_ss⟩| / (‖v‖·‖φ_t + φ_ss‖) over `count` random
    /// products of smooth bumps supported in the open cylinder.
    pub fn weak_residual<R: Rng>(&self, rng: &mut R, count: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let nf = self.forced_modes;
        for _ in 0..count {
            let tw = rng.gen_range(0.1..0.45) * self.t;
            let tc = rng.gen_range(tw * 1.01..self.t - tw * 1.01);
            let sw = rng.gen_range(0.1..0.45) * self.l;
            let sc = rng.gen_range(-self.l + sw * 1.01..self.l - sw * 1.01);
            let bump = |y: f64| if y.abs() < 1.0 { (-1.0 / (1.0 - y * y)).exp() } else { 0.0 };
            let dbump = |y: f64| {
                if y.abs() < 1.0 {
                    let q = 1.0 - y * y;
                    bump(y) * (-2.0 * y / (q * q))
                } else {
                    0.0
                }
            };
            let ddbump = |y: f64| {
                if y.abs() < 1.0 {
                    let q = 1.0 - y * y;
                    bump(y) * (4.0 * y * y / q.powi(4) - 2.0 / (q * q) - 8.0 * y * y / q.powi(3))
                } else {
                    0.0
                }
            };
            let b = |t: f64| bump((t - tc) / tw);
            let db = |t: f64| dbump((t - tc) / tw) / tw;
            let c = |s: f64| bump((s - sc) / sw);
            let ddc = |s: f64| ddbump((s - sc) / sw) / (sw * sw);
            let srule = Rule::composite(sc - sw, sc + sw, 24, 16);
            let trule = Rule::composite(tc - tw, tc + tw, 64, 16);
            // C_j = ∫ e_j(|s|) C(s) ds
            let cj: Vec<f64> = (1..=self.free_modes.min(4 * nf)).map(|j| srule.integrate(|s| self.mode(j, s) * c(s))).collect();
            let mut r = 0.0;
            for (x, wt) in trule.nodes.iter().zip(&trule.weights) {
                let f = self.forced_at(*x);
                let nj = self.free_count(*x).min(cj.len());
                let (bv, dbv) = (b(*x), db(*x));
                let g = self.boundary_at(*x);
                for j in 1..=nj {
                    let mut v = self.free_coeff(j, *x);
                    if j <= nf {
                        v += f[j - 1];
                    } else if *x > self.t0 {
                        v += g * mean_coeff(j, self.l);
                    }
                    r += wt * cj[j - 1] * (-dbv + self.mu(j) * bv) * v;
                }
            }
            let lphi2: f64 = trule
                .nodes
                .iter()
                .zip(&trule.weights)
                .map(|(t, wt)| wt * srule.integrate(|s| (db(*t) * c(s) + b(*t) * ddc(s)).powi(2)))
                .sum();
            worst = worst.max(r.abs() / (self.norm * lphi2.sqrt()));
        }
        worst
    }
}
