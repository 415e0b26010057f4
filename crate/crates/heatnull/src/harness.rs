//! Experiment orchestration: configuration, cost sweeps over T, the
//! lower/upper bound sandwich and the subcommand dispatcher behind the CLI.

use crate::biorthogonal::{assemble_control, multiplier_family, FamilyOptions};
use crate::entire::ALPHA_2;
use crate::error::{Error, Result};
use crate::heatsim::{default_lower_eps, lower_bound_experiment, simulate_boundary_control, LowerBoundReport, ObservationRegion};
use crate::spectral::{build_interval_basis, build_sturm_liouville_basis, reduce_to_canonical, BasisKind, Coefficient, HeatState, ParabolicProblem, SpectralBasis};
use crate::entire::{GnEvaluator, MultiplierSpec};
use crate::io::write_atomic;
use crate::transmute::{fit_cost_record, fundamental_solution, longest_avoiding_ray, transmute_control, wave_hum_control, CostPoint, FundamentalOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Peak log-magnitudes α₂L²/T above this overflow the f64 views of the controls.
pub const PEAK_LOG_BUDGET: f64 = 700.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_problem")]
    pub problem: ParabolicProblem,
    /// observation region (a, b) for interior experiments
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<f64>,
    /// modes of the simulation basis
    #[serde(default = "d_modes")]
    pub modes: usize,
    /// biorthogonal family size; the basket lives on these modes
    #[serde(default = "d_family_modes")]
    pub family_modes: usize,
    #[serde(default = "d_random_states")]
    pub random_states: usize,
    /// replace the basket by u0 = 0
    #[serde(default)]
    pub zero_data: bool,
    /// multiplier slack ε (d = π + 2ε)
    #[serde(default = "d_multiplier_eps")]
    pub multiplier_eps: f64,
    /// free-evolution fraction of the fundamental solution
    #[serde(default = "d_fundamental_eps")]
    pub fundamental_eps: f64,
    /// half-width of the fundamental solution's segment (fundamental subcommand)
    #[serde(default)]
    pub segment: Option<f64>,
    #[serde(default = "d_wave_modes")]
    pub wave_modes: usize,
    /// wave control time S; defaults to 1.1·L_Ω
    #[serde(default)]
    pub wave_time: Option<f64>,
    /// source point of the lower-bound experiment
    #[serde(default)]
    pub lower_y: Option<f64>,
    #[serde(default)]
    pub lower_eps: Option<f64>,
    #[serde(default = "d_lower_modes")]
    pub lower_modes: usize,
    /// terminal tolerance relative to ‖u0‖
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// initial coefficients for single-run subcommands (default e_1)
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_problem() -> ParabolicProblem {
    ParabolicProblem::dirichlet(PI)
}
fn d_modes() -> usize {
    30
}
fn d_family_modes() -> usize {
    10
}
fn d_random_states() -> usize {
    5
}
fn d_multiplier_eps() -> f64 {
    FamilyOptions::default().eps
}
fn d_fundamental_eps() -> f64 {
    0.2
}
fn d_wave_modes() -> usize {
    12
}
fn d_lower_modes() -> usize {
    400
}
fn d_tol() -> f64 {
    1e-3
}

impl ExperimentConfig {
    pub fn new(t_grid: Vec<f64>) -> Self {
        serde_json::from_value(serde_json::json!({ "T_grid": t_grid })).expect("defaults deserialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Usage(format!("malformed config at line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn length(&self) -> f64 {
        self.problem.effective_length()
    }

    /// Smallest T with α₂L²/T inside the floating-point budget.
    pub fn t_floor(&self) -> f64 {
        let l = self.wave_time.unwrap_or(0.0).max(self.length());
        ALPHA_2 * l * l / PEAK_LOG_BUDGET
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.t_grid.is_empty() {
            return Err(Error::Config("T_grid is empty".into()));
        }
        let t_max = PI.min(self.length()).powi(2);
        let floor = self.t_floor();
        for t in &self.t_grid {
            if !(*t > 0.0 && *t <= t_max) {
                return Err(Error::Config(format!("T = {t} outside (0, min(π, L)²] = (0, {t_max:.6}]: the cost estimates hold for short times only")));
            }
            if *t < floor {
                return Err(Error::Config(format!("T = {t} below the floating-point floor α₂L²/{PEAK_LOG_BUDGET} = {floor:.4e}")));
            }
        }
        if self.modes == 0 || self.family_modes == 0 || self.family_modes > self.modes {
            return Err(Error::Config(format!("need 1 ≤ family_modes ≤ modes, got {} and {}", self.family_modes, self.modes)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if !(self.fundamental_eps > 0.0 && self.fundamental_eps < 1.0) {
            return Err(Error::Config("fundamental_eps must lie in (0, 1)".into()));
        }
        if let Some([a, b]) = self.region {
            ObservationRegion::new(a, b)?.check_inside(self.problem.x_len)?;
        }
        Ok(())
    }

    pub fn region(&self) -> Result<ObservationRegion> {
        let [a, b] = self.region.ok_or_else(|| Error::Config("this experiment needs a region [a, b]".into()))?;
        let r = ObservationRegion::new(a, b)?;
        r.check_inside(self.problem.x_len)?;
        Ok(r)
    }

    pub fn family_options(&self) -> FamilyOptions {
        FamilyOptions { eps: self.multiplier_eps, ..FamilyOptions::default() }
    }

    pub fn fundamental_options(&self) -> FundamentalOptions {
        FundamentalOptions { eps: self.fundamental_eps, ..FundamentalOptions::default() }
    }

    /// First `family_modes` unit modes, then seeded random states on the same modes.
    pub fn basket(&self, basis: &SpectralBasis, modes: usize) -> Vec<HeatState> {
        if self.zero_data {
            return vec![HeatState::zero(basis)];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out: Vec<HeatState> = (1..=modes).map(|k| HeatState::mode(basis, k)).collect();
        out.extend((0..self.random_states).map(|_| HeatState::random(basis, modes, &mut rng)));
        out
    }
}

/// Closed-form basis for the constant-coefficient Dirichlet and Neumann–Dirichlet
/// problems, the numeric Sturm–Liouville basis otherwise.
pub fn problem_basis(pb: &ParabolicProblem, count: usize) -> Result<SpectralBasis> {
    let plain = pb.p == Coefficient::Const { value: 1.0 } && pb.q == Coefficient::Const { value: 0.0 } && pb.bc1 == [1.0, 0.0];
    if plain && pb.bc0 == [1.0, 0.0] {
        build_interval_basis(BasisKind::ExactDD, pb.x_len, count)
    } else if plain && pb.bc0 == [0.0, 1.0] {
        build_interval_basis(BasisKind::ExactND, pb.x_len, count)
    } else {
        build_sturm_liouville_basis(pb, count)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostRow {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// worst ln(‖g‖/‖u0‖) over the basket
    pub cost_log: f64,
    pub alpha_eff: f64,
    pub n_modes: usize,
    /// worst ‖u(T)‖/‖u0‖
    pub terminal_residual: f64,
    pub status: String,
    pub wall_seconds: f64,
}

impl CostRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(t: f64, l: f64, n: usize, e: &Error) -> Self {
        CostRow { t, l, cost_log: f64::NAN, alpha_eff: f64::NAN, n_modes: n, terminal_residual: f64::NAN, status: format!("failed: {e}").replace([',', '\n'], ";"), wall_seconds: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostSweep {
    pub rows: Vec<CostRow>,
    /// slope of cost_log against 1/T over the three smallest valid T
    pub slope: Option<f64>,
    /// ln C = max over valid rows of cost_log − α₂L²/T
    pub ln_c: Option<f64>,
    pub alpha_2: f64,
}

pub const COST_CSV_HEADER: &str = "T,L,cost_log,alpha_eff,n_modes,terminal_residual,status";

impl CostSweep {
    fn new(rows: Vec<CostRow>, l: f64) -> Self {
        let mut ok: Vec<&CostRow> = rows.iter().filter(|r| r.is_ok() && r.cost_log.is_finite()).collect();
        ok.sort_by(|a, b| a.t.total_cmp(&b.t));
        let slope = if ok.len() >= 2 {
            let pts: Vec<(f64, f64)> = ok.iter().take(3).map(|r| (1.0 / r.t, r.cost_log)).collect();
            Some(ls_slope(&pts))
        } else {
            None
        };
        let ln_c = ok.iter().map(|r| r.cost_log - ALPHA_2 * l * l / r.t).reduce(f64::max);
        CostSweep { rows, slope, ln_c, alpha_2: ALPHA_2 }
    }

    /// Deterministic CSV; wall time is kept out of it.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(COST_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:e},{:e},{},{:e},{}", r.t, r.l, r.cost_log, r.alpha_eff, r.n_modes, r.terminal_residual, r.status);
        }
        s
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn boundary_row(cfg: &ExperimentConfig, basis: &SpectralBasis, basket: &[HeatState], t: f64) -> Result<CostRow> {
    let start = Instant::now();
    let (red, sched) = reduce_to_canonical(basis, t);
    let fam = multiplier_family(&red, sched, cfg.family_modes, &cfg.family_options())?;
    let mut worst = f64::NEG_INFINITY;
    let mut resid: f64 = 0.0;
    for u0 in basket {
        let out = assemble_control(basis, u0, &fam, t)?;
        let tr = simulate_boundary_control(basis, u0, &out.signal, t)?;
        let n0 = u0.norm();
        if n0 == 0.0 {
            resid = resid.max(tr.terminal().norm());
            continue;
        }
        worst = worst.max(out.ln_cost - n0.ln());
        resid = resid.max(tr.terminal().norm() / n0);
    }
    let status = if resid <= cfg.tol { "ok" } else { "invalid" };
    Ok(CostRow { t, l: basis.length, cost_log: worst, alpha_eff: t * worst, n_modes: basis.count(), terminal_residual: resid, status: status.into(), wall_seconds: start.elapsed().as_secs_f64() })
}

/// Boundary null-controls from x = X for the basket at every T; failures are
/// recorded per row and the sweep continues.
pub fn cost_sweep(cfg: &ExperimentConfig) -> Result<CostSweep> {
    cfg.validate()?;
    let basis = problem_basis(&cfg.problem, cfg.modes)?;
    let basket = cfg.basket(&basis, cfg.family_modes);
    let rows: Vec<CostRow> = cfg
        .t_grid
        .par_iter()
        .map(|t| boundary_row(cfg, &basis, &basket, *t).unwrap_or_else(|e| CostRow::failed(*t, basis.length, basis.count(), &e)))
        .collect();
    Ok(CostSweep::new(rows, basis.length))
}

/// Interior controls on Ω by transmutation: one fundamental solution per T,
/// one wave control per basket element.
pub fn transmuted_sweep(cfg: &ExperimentConfig) -> Result<CostSweep> {
    cfg.validate()?;
    let region = cfg.region()?;
    let basis = problem_basis(&cfg.problem, cfg.wave_modes)?;
    let s = wave_time(cfg, &region)?;
    let n = cfg.wave_modes;
    let basket = cfg.basket(&basis, n.min(cfg.family_modes));
    let waves = basket.iter().map(|u0| wave_hum_control(&basis, &region, u0, s, n)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<CostRow> = cfg
        .t_grid
        .iter()
        .map(|t| {
            let start = Instant::now();
            let run = || -> Result<CostRow> {
                let v = fundamental_solution(*t, s, &cfg.fundamental_options())?;
                let mut worst = f64::NEG_INFINITY;
                let mut resid: f64 = 0.0;
                for w in &waves {
                    let tr = transmute_control(&v, w)?;
                    let n0 = tr.u0_norm();
                    if n0 == 0.0 {
                        continue;
                    }
                    worst = worst.max((tr.g_norm / n0).ln());
                    resid = resid.max(tr.terminal_residual() / n0);
                }
                let status = if resid <= cfg.tol { "ok" } else { "invalid" };
                Ok(CostRow { t: *t, l: s, cost_log: worst, alpha_eff: t * worst, n_modes: n, terminal_residual: resid, status: status.into(), wall_seconds: start.elapsed().as_secs_f64() })
            };
            run().unwrap_or_else(|e| CostRow::failed(*t, s, n, &e))
        })
        .collect();
    Ok(CostSweep::new(rows, s))
}

fn wave_time(cfg: &ExperimentConfig, region: &ObservationRegion) -> Result<f64> {
    let l_omega = longest_avoiding_ray(region, cfg.problem.x_len)?;
    let s = cfg.wave_time.unwrap_or(1.1 * l_omega);
    if s <= l_omega {
        return Err(Error::Config(format!("wave time S = {s} must exceed the longest avoiding ray {l_omega}")));
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    pub region: [f64; 2],
    pub y: f64,
    pub d: f64,
    pub d_squared_over_4: f64,
    pub l_omega: f64,
    pub wave_time: f64,
    pub alpha2_l_omega_sq: f64,
    pub lower: Vec<LowerBoundReport>,
    pub upper: Vec<CostRow>,
    /// max over T of −T ln q
    pub empirical_lower: f64,
    /// min over valid T of T·ln(‖g‖/‖u0‖)
    pub empirical_upper: f64,
    pub ordered: bool,
    /// empirical interval inside [0.7·d²/4, 1.15·α₂L_Ω²]
    pub within_bounds: bool,
}

pub fn bound_sandwich_report(cfg: &ExperimentConfig) -> Result<SandwichReport> {
    cfg.validate()?;
    let region = cfg.region()?;
    if region.a <= 0.0 || region.b >= cfg.problem.x_len {
        return Err(Error::Precondition("the sandwich needs a region strictly inside the interval".into()));
    }
    let x = cfg.problem.x_len;
    let y = cfg.lower_y.unwrap_or(0.05 * x / PI);
    let d = region.distance(y);
    let eps = cfg.lower_eps.unwrap_or_else(|| default_lower_eps(d));
    let lb_basis = problem_basis(&cfg.problem, cfg.lower_modes)?;
    let lower = cfg.t_grid.iter().map(|t| lower_bound_experiment(&lb_basis, &region, y, eps, *t)).collect::<Result<Vec<_>>>()?;
    let sweep = transmuted_sweep(cfg)?;
    let l_omega = longest_avoiding_ray(&region, x)?;
    let s = wave_time(cfg, &region)?;
    let empirical_lower = lower.iter().map(|r| r.minus_t_ln_q).fold(f64::NEG_INFINITY, f64::max);
    let empirical_upper = sweep.rows.iter().filter(|r| r.is_ok()).map(|r| r.alpha_eff).fold(f64::INFINITY, f64::min);
    let d4 = d * d / 4.0;
    let a2l = ALPHA_2 * l_omega * l_omega;
    Ok(SandwichReport {
        region: [region.a, region.b],
        y,
        d,
        d_squared_over_4: d4,
        l_omega,
        wave_time: s,
        alpha2_l_omega_sq: a2l,
        lower,
        upper: sweep.rows,
        empirical_lower,
        empirical_upper,
        ordered: empirical_lower <= empirical_upper,
        within_bounds: empirical_lower >= 0.7 * d4 && empirical_upper <= 1.15 * a2l,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synthesize,
    Simulate,
    CostSweep,
    LowerBound,
    Fundamental,
    Transmute,
    Sandwich,
    Verify,
}

fn initial_state(cfg: &ExperimentConfig, basis: &SpectralBasis) -> Result<HeatState> {
    match &cfg.initial {
        None => Ok(HeatState::mode(basis, 1)),
        Some(c) if c.len() > basis.count() => Err(Error::Config(format!("initial state has {} coefficients, basis has {}", c.len(), basis.count()))),
        Some(c) => {
            let mut v = c.clone();
            v.resize(basis.count(), 0.0);
            Ok(HeatState::new(v, basis))
        }
    }
}

fn check(ok: bool, what: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(what.into()))
    }
}

/// Runs one subcommand on the first T of the grid (or the whole grid for
/// sweeps), writes its outputs under `out` atomically and returns their paths.
/// Any failed invariant is an error.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let t = cfg.t_grid[0];
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let p = out.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    match cmd {
        Command::Synthesize | Command::Simulate => {
            let basis = problem_basis(&cfg.problem, cfg.modes)?;
            let u0 = initial_state(cfg, &basis)?;
            let (red, sched) = reduce_to_canonical(&basis, t);
            let fam = multiplier_family(&red, sched, cfg.family_modes, &cfg.family_options())?;
            let ctl = assemble_control(&basis, &u0, &fam, t)?;
            emit("family.json", fam.manifest_json()?)?;
            emit("control.csv", ctl.signal.to_csv().into_bytes())?;
            let spec = MultiplierSpec::new(PI + 2.0 * cfg.multiplier_eps, sched.t_reduced / 2.0)?;
            let ev = GnEvaluator::new(&red, spec, 1, 1e-12)?;
            let mut dbg = String::from("x,ln_abs_G1\n");
            for x in crate::entire::log_grid(1e-2, 1e4, 400) {
                let _ = writeln!(dbg, "{x},{}", ev.log_g(x).logmag);
            }
            emit("debug_g1.csv", dbg.into_bytes())?;
            if cmd == Command::Simulate {
                let tr = simulate_boundary_control(&basis, &u0, &ctl.signal, t)?;
                emit("trajectory.csv", tr.csv_bytes()?)?;
                let resid = tr.terminal().norm() / u0.norm().max(f64::MIN_POSITIVE);
                let rep = serde_json::json!({ "T": t, "ln_cost": ctl.ln_cost, "terminal_residual": resid, "terminal_exact": tr.terminal_exact });
                emit("simulate.json", serde_json::to_vec_pretty(&rep)?)?;
                check(resid <= cfg.tol, format!("terminal residual {resid:e} above {}", cfg.tol))?;
            }
        }
        Command::CostSweep => {
            let sweep = cost_sweep(cfg)?;
            emit("cost_sweep.csv", sweep.to_csv().into_bytes())?;
            emit("cost_sweep.json", serde_json::to_vec_pretty(&sweep)?)?;
            check(sweep.rows.iter().all(|r| r.is_ok()), "a sweep row failed or was not certified by its terminal residual")?;
        }
        Command::LowerBound => {
            let region = cfg.region()?;
            let basis = problem_basis(&cfg.problem, cfg.lower_modes)?;
            let y = cfg.lower_y.unwrap_or(0.05 * cfg.problem.x_len / PI);
            let eps = cfg.lower_eps.unwrap_or_else(|| default_lower_eps(region.distance(y)));
            let reps = cfg.t_grid.iter().map(|t| lower_bound_experiment(&basis, &region, y, eps, *t)).collect::<Result<Vec<_>>>()?;
            emit("lower_bound.json", serde_json::to_vec_pretty(&reps)?)?;
        }
        Command::Fundamental => {
            let l = cfg.segment.unwrap_or(cfg.length() / 2.0);
            let opts = cfg.fundamental_options();
            let mut pts = Vec::new();
            let mut summary = Vec::new();
            for (i, t) in cfg.t_grid.iter().enumerate() {
                let v = fundamental_solution(*t, l, &opts)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let weak = v.weak_residual(&mut rng, 20);
                let pairing = v.pairing(&|s: f64| (PI * s / (2.0 * l)).cos());
                if i == 0 {
                    emit("fundamental_v.grid", v.field(201, 201).to_bytes())?;
                }
                summary.push(serde_json::json!({ "T": t, "L": l, "norm": v.norm, "terminal_norm": v.terminal_norm, "control_cost": v.control_cost, "weak_residual": weak, "pairing": pairing, "controlled_modes": v.controlled_modes }));
                check(v.terminal_norm <= cfg.tol * v.norm, format!("‖v(T)‖ = {:e} above tolerance", v.terminal_norm))?;
                pts.push(CostPoint { t: *t, l, norm: v.norm });
            }
            let rec = if pts.len() >= 2 { Some(fit_cost_record(&pts)?) } else { None };
            emit("fundamental.json", serde_json::to_vec_pretty(&serde_json::json!({ "runs": summary, "cost_record": rec }))?)?;
        }
        Command::Transmute => {
            let region = cfg.region()?;
            let basis = problem_basis(&cfg.problem, cfg.wave_modes)?;
            let u0 = initial_state(cfg, &basis)?;
            let s = wave_time(cfg, &region)?;
            let wave = wave_hum_control(&basis, &region, &u0, s, cfg.wave_modes)?;
            let v = fundamental_solution(t, s, &cfg.fundamental_options())?;
            let tr = transmute_control(&v, &wave)?;
            emit("transmuted_u.csv", tr.trajectory.csv_bytes()?)?;
            emit("transmuted_g.grid", tr.g_field(201, 101).to_bytes())?;
            emit("wave_w.grid", wave.w_field(201, 101).to_bytes())?;
            emit("wave_f.grid", wave.f_field(201, 101).to_bytes())?;
            let n0 = tr.u0_norm();
            let rep = serde_json::json!({
                "T": t, "S": s, "N": cfg.wave_modes, "g_norm": tr.g_norm, "v_norm": tr.v_norm, "f_ext_norm": tr.f_ext_norm,
                "initial_residual": tr.initial_residual(), "terminal_residual": tr.terminal_residual(),
                "alpha_eff": t * (tr.g_norm / n0).ln(), "gramian_cond": wave.gramian_cond, "steering_residual": wave.steering_residual,
            });
            emit("transmute.json", serde_json::to_vec_pretty(&rep)?)?;
            check(tr.terminal_residual() <= cfg.tol * n0, format!("transmuted ‖u(T)‖ = {:e} above tolerance", tr.terminal_residual()))?;
            check(tr.cost_consistent(1e-6), "‖g‖ exceeds ‖v‖·‖f‖")?;
        }
        Command::Sandwich => {
            let rep = bound_sandwich_report(cfg)?;
            emit("sandwich.json", serde_json::to_vec_pretty(&rep)?)?;
            check(rep.ordered, format!("empirical lower {} exceeds upper {}", rep.empirical_lower, rep.empirical_upper))?;
        }
        Command::Verify => {
            let (sigma, a1, a2) = crate::entire::sigma_star(1e-10);
            check(a1 > a2 + 0.05, format!("α₁ = {a1} not above α₂ = {a2} by 0.05 (Σ* = {sigma})"))?;
            let basis = problem_basis(&cfg.problem, cfg.modes)?;
            let u0 = initial_state(cfg, &basis)?;
            let (red, sched) = reduce_to_canonical(&basis, t);
            let fam = multiplier_family(&red, sched, cfg.family_modes, &cfg.family_options())?;
            let b = crate::biorthogonal::biorthogonality_matrix(&fam, cfg.family_modes);
            let dev = b.iter().enumerate().flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (v - if i == j { 1.0 } else { 0.0 }).abs())).fold(0.0, f64::max);
            let ctl = assemble_control(&basis, &u0, &fam, t)?;
            let tr = simulate_boundary_control(&basis, &u0, &ctl.signal, t)?;
            let resid = tr.terminal().norm() / u0.norm().max(f64::MIN_POSITIVE);
            let rep = serde_json::json!({ "sigma_star": sigma, "alpha_1": a1, "alpha_2": a2, "biorthogonality_error": dev, "terminal_residual": resid });
            emit("verify.json", serde_json::to_vec_pretty(&rep)?)?;
            check(dev <= 1e-3, format!("biorthogonality error {dev:e}"))?;
            check(resid <= cfg.tol, format!("terminal residual {resid:e}"))?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests;
