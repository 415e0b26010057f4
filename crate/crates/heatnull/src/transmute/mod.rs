//! Control transmutation: a heat solution v on [−L, L] that starts from δ and
//! is steered to zero from both ends, a finite-modal wave control, and the
//! integral in s that turns the pair into an interior heat control.

mod fundamental;
mod transmutation;
mod wave;

pub use fundamental::{fit_cost_record, fundamental_solution, CostPoint, CostRecord, FundamentalControlledSolution, FundamentalOptions};
pub use transmutation::{transmute_control, Transmuted};
pub use wave::{wave_hum_control, wave_hum_control_with, WaveControlledTrajectory};

use crate::biorthogonal::{assemble_control, multiplier_family, ControlSignal, ExactControl, FamilyOptions};
use crate::error::{Error, Result};
use crate::heatsim::ObservationRegion;
use crate::quad::Rule;
use crate::spectral::{build_interval_basis, reduce_to_canonical, BasisKind, HeatState, SpectralBasis};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// L_Ω = 2·max(a, X − b): twice the longest gap a reflecting ray can stay in.
pub fn longest_avoiding_ray(region: &ObservationRegion, x_len: f64) -> Result<f64> {
    region.check_inside(x_len)?;
    Ok(2.0 * region.a.max(x_len - region.b).max(0.0))
}

/// (4πt)^{−1/2} ∫ e^{−s²/4t} cos(ωs) ds, cut where the weight drops below 1e−16.
pub fn kannai_mode(omega: f64, t: f64) -> f64 {
    let smax = (4.0 * t * 16.0 * std::f64::consts::LN_10).sqrt();
    let rule = Rule::for_frequency(-smax, smax, omega.max(1.0 / t.sqrt()), 20);
    rule.integrate(|s| (-s * s / (4.0 * t)).exp() * (omega * s).cos()) / (4.0 * PI * t).sqrt()
}

/// ‖e^{tΔ}u0 − (4πt)^{−1/2}∫ e^{−s²/4t} cos(s√−Δ) u0 ds‖ / ‖u0‖.
pub fn kannai_residual(basis: &SpectralBasis, u0: &HeatState, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("Kannai formula needs t > 0, got {t}")));
    }
    let nrm = u0.norm();
    if nrm == 0.0 {
        return Ok(0.0);
    }
    let mut r2 = 0.0;
    for (c, l) in u0.coeffs.iter().zip(&basis.lambdas) {
        if *c == 0.0 {
            continue;
        }
        if *l < 0.0 {
            return Err(Error::Precondition("Kannai formula needs a nonnegative spectrum".into()));
        }
        let d = (-l * t).exp() - kannai_mode(l.sqrt(), t);
        r2 += (c * d).powi(2);
    }
    Ok(r2.sqrt() / nrm)
}

/// Dirichlet controls at both ends of [−L, L].
#[derive(Clone, Debug)]
pub struct TwoEndControl {
    pub g_minus: ControlSignal,
    pub g_plus: ControlSignal,
    /// control of the even part (Neumann at 0)
    pub even: ControlSignal,
    /// control of the odd part (Dirichlet at 0)
    pub odd: ControlSignal,
    /// ‖(g_−, g_+)‖
    pub cost: f64,
    pub data_norm: f64,
    /// operator norms of the one-end maps restricted to the retained modes
    pub d_norm: f64,
    pub n_norm: f64,
}

/// One-end null-control of a modal state on [0, L] (control at L).
fn one_end(basis: &SpectralBasis, coeffs: &[f64], t: f64, opts: &FamilyOptions) -> Result<(ControlSignal, f64)> {
    let (red, sched) = reduce_to_canonical(basis, t);
    let fam = multiplier_family(&red, sched, basis.count(), opts)?;
    let out = assemble_control(basis, &HeatState::new(coeffs.to_vec(), basis), &fam, t)?;
    Ok((out.signal, out.ln_cost.exp()))
}

/// Largest singular value of the map coefficients ↦ control, from sampled controls.
fn operator_norm(basis: &SpectralBasis, t: f64, opts: &FamilyOptions) -> Result<f64> {
    let n = basis.count();
    let (red, sched) = reduce_to_canonical(basis, t);
    let fam = multiplier_family(&red, sched, n, opts)?;
    let sigs: Vec<ControlSignal> = (1..=n)
        .map(|k| assemble_control(basis, &HeatState::mode(basis, k), &fam, t).map(|o| o.signal))
        .collect::<Result<_>>()?;
    let count = sigs.iter().map(|s| s.len()).max().unwrap_or(2);
    let vals: Vec<Vec<f64>> = sigs.iter().map(|s| resample(s, count).samples).collect();
    let dt = t / (count - 1) as f64;
    let g = DMatrix::from_fn(n, n, |a, b| {
        let mut s = 0.0;
        for i in 0..count {
            let w = if i == 0 || i == count - 1 { 0.5 } else { 1.0 };
            s += w * vals[a][i] * vals[b][i];
        }
        s * dt
    });
    let ev = g.symmetric_eigen();
    Ok(ev.eigenvalues.iter().cloned().fold(0.0, f64::max).sqrt())
}

/// Same control on `count` samples, exact form kept.
fn resample(s: &ControlSignal, count: usize) -> ControlSignal {
    match &s.exact {
        Some(e) if s.len() != count => ControlSignal::from_exact(ExactControl { sum: e.sum.clone(), sched: e.sched }, count, s.norm_cache),
        _ if s.len() != count => ControlSignal::from_fn(s.window, count, |t| s.value_at(t)),
        _ => s.clone(),
    }
}

/// Splits v0 into odd and even parts, steers each from x = L on [0, L]
/// (odd: Dirichlet at 0, even: Neumann at 0), returns (g − f, g + f).
pub fn two_end_control(v0: &dyn Fn(f64) -> f64, t: f64, l: f64, modes: usize, opts: &FamilyOptions) -> Result<TwoEndControl> {
    if !(t > 0.0 && l > 0.0) || modes == 0 {
        return Err(Error::Config("two-end control needs T > 0, L > 0 and at least one mode".into()));
    }
    let dd = build_interval_basis(BasisKind::ExactDD, l, modes)?;
    let nd = build_interval_basis(BasisKind::ExactND, l, modes)?;
    let rule = Rule::for_frequency(0.0, l, (modes as f64 + 1.0) * PI / l, 16);
    let odd: Vec<f64> = (1..=modes).map(|k| rule.integrate(|s| 0.5 * (v0(s) - v0(-s)) * dd.eval(k, s))).collect();
    let even: Vec<f64> = (1..=modes).map(|k| rule.integrate(|s| 0.5 * (v0(s) + v0(-s)) * nd.eval(k, s))).collect();
    let data_norm = (2.0 * (odd.iter().chain(&even).map(|c| c * c).sum::<f64>())).sqrt();
    let zero = |b: &SpectralBasis| -> Result<(ControlSignal, f64)> {
        let (red, sched) = reduce_to_canonical(b, t);
        let fam = multiplier_family(&red, sched, 1, opts)?;
        Ok((ControlSignal::zero((0.0, t), fam.default_samples()), 0.0))
    };
    let (f, fc) = if odd.iter().all(|c| *c == 0.0) { zero(&dd)? } else { one_end(&dd, &odd, t, opts)? };
    let (g, gc) = if even.iter().all(|c| *c == 0.0) { zero(&nd)? } else { one_end(&nd, &even, t, opts)? };
    let count = f.len().max(g.len());
    let (f, g) = (resample(&f, count), resample(&g, count));
    let g_minus = ControlSignal::new((0.0, t), g.samples.iter().zip(&f.samples).map(|(a, b)| a - b).collect());
    let g_plus = ControlSignal::new((0.0, t), g.samples.iter().zip(&f.samples).map(|(a, b)| a + b).collect());
    let cost = (2.0 * (fc * fc + gc * gc)).sqrt();
    Ok(TwoEndControl {
        g_minus,
        g_plus,
        even: g,
        odd: f,
        cost,
        data_norm,
        d_norm: operator_norm(&dd, t, opts)?,
        n_norm: operator_norm(&nd, t, opts)?,
    })
}

/// ∫_0^len cos(a s) ds
fn int_cos(a: f64, len: f64) -> f64 {
    if a == 0.0 {
        len
    } else {
        (a * len).sin() / a
    }
}

/// ∫_0^len sin(a s) ds
fn int_sin(a: f64, len: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        2.0 * (0.5 * a * len).sin().powi(2) / a
    }
}

#[cfg(test)]
mod tests;
