//! Entire functions behind the biorthogonal family: the zero product f_n, the
//! sinc multiplier M and their normalized product G_n, all in log form.

pub mod logc;
pub mod mp_eval;
pub mod multiplier;
pub mod product;

pub use logc::LogComplex;
pub use multiplier::{log_m, log_m_upper, MultiplierSpec, EPS_RATIO};
pub use product::ZeroProduct;

use crate::error::Result;
use crate::special::zeta_even;
use crate::spectral::SpectralBasis;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// −i z, written out so that −i·(iλ) is exactly λ.
fn rot(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

pub fn log_f_n(basis: &SpectralBasis, n: usize, z: Complex64, tol: f64) -> Result<LogComplex> {
    ZeroProduct::from_basis(basis).ln_f_n_checked(n, z, tol)
}

/// ln F_n(x) with F_n(z) = f_n(−iz)/f_n(λ_n).
#[allow(non_snake_case)]
pub fn log_F_n(basis: &SpectralBasis, n: usize, x: f64, tol: f64) -> Result<LogComplex> {
    let p = ZeroProduct::from_basis(basis);
    Ok(p.ln_f_n_checked(n, rot(Complex64::new(x, 0.0)), tol)?.div(p.ln_f_n_own(n)))
}

/// Alternative product Π_{k≠n}[1 − ((z−λ_n)/(λ_k−λ_n))²] at z = −ix.
#[allow(non_snake_case)]
pub fn log_F_n_alt(basis: &SpectralBasis, n: usize, x: f64) -> LogComplex {
    ZeroProduct::from_basis(basis).ln_f_n_alt(n, rot(Complex64::new(x, 0.0)))
}

pub fn make_multiplier(d: f64, tau: f64) -> Result<MultiplierSpec> {
    MultiplierSpec::new(d, tau)
}

#[allow(non_snake_case)]
pub fn log_M(spec: &MultiplierSpec, z: Complex64, tol: f64) -> LogComplex {
    log_m(spec, z, tol)
}

#[allow(non_snake_case)]
pub fn log_G_n(ev: &GnEvaluator, x: f64) -> LogComplex {
    ev.log_g(x)
}

/// (Σ*, α₁, α₂) with Σ* = Σ_k ζ(2k)/(k(4k−1)π^{2k}).
pub fn sigma_star(tol: f64) -> (f64, f64, f64) {
    let mut s = 0.0;
    for k in 1..200u32 {
        let kf = k as f64;
        let t = zeta_even(k) / (kf * (4.0 * kf - 1.0) * PI.powi(2 * k as i32));
        s += t;
        if t < tol {
            break;
        }
    }
    (s, 4.0 / (2.0 + s), ALPHA_2)
}

pub const ALPHA_2: f64 = 2.0 * (36.0 / 37.0) * (36.0 / 37.0);

/// Fitted constants of the growth bounds
/// ln|F_n(x)| ≤ (π+ε)√|x| + ε√λ_n + 2A_ε and ln|M(x)| ≤ D − d√|x| + α₂d²/(2τ).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub eps: f64,
    pub a_eps: f64,
    pub d_eps: f64,
}

/// Log-spaced probe grid on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// sup_x [ln|M(x)| + d√x − α₂d²/(2τ)] over a log grid.
pub fn fit_multiplier_constant(spec: &MultiplierSpec, xs: &[f64]) -> f64 {
    let shift = ALPHA_2 * spec.d * spec.d / (2.0 * spec.tau);
    xs.iter()
        .map(|&x| log_m(spec, Complex64::new(x, 0.0), 1e-14).logmag + spec.d * x.sqrt() - shift)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// G_n(x) = F_n(x) M(x)/M(iλ_n), normalized so G_n(iλ_k) = δ_nk.
#[derive(Clone, Debug)]
pub struct GnEvaluator {
    pub product: ZeroProduct,
    pub spec: MultiplierSpec,
    pub n: usize,
    pub lambda_n: f64,
    pub ln_fn_own: LogComplex,
    pub ln_m_own: f64,
    pub tol: f64,
    pub k_max: usize,
    pub envelope: Option<Envelope>,
}

impl GnEvaluator {
    pub fn new(basis: &SpectralBasis, spec: MultiplierSpec, n: usize, tol: f64) -> Result<Self> {
        Self::from_product(ZeroProduct::from_basis(basis), spec, n, tol)
    }

    pub fn from_product(product: ZeroProduct, spec: MultiplierSpec, n: usize, tol: f64) -> Result<Self> {
        if n == 0 || n > product.count() {
            return Err(crate::error::Error::Precondition(format!("index {n} outside 1..={}", product.count())));
        }
        let lambda_n = product.lambda(n);
        let ln_fn_own = product.ln_f_n_own(n);
        let ln_m_own = log_m(&spec, Complex64::new(0.0, lambda_n), tol).logmag;
        let k_max = product.count();
        Ok(GnEvaluator { product, spec, n, lambda_n, ln_fn_own, ln_m_own, tol, k_max, envelope: None })
    }

    pub fn log_g_at(&self, z: Complex64) -> LogComplex {
        let f = self.product.ln_f_n(self.n, rot(z));
        if f.is_zero() {
            return f;
        }
        let m = log_m(&self.spec, z, self.tol);
        f.div(self.ln_fn_own).mul(m).div(LogComplex::new(self.ln_m_own, 0.0))
    }

    pub fn log_g(&self, x: f64) -> LogComplex {
        self.log_g_at(Complex64::new(x, 0.0))
    }

    /// ln|F_n(x)| alone.
    pub fn log_f_abs(&self, x: f64) -> f64 {
        self.product.ln_f_n(self.n, rot(Complex64::new(x, 0.0))).logmag - self.ln_fn_own.logmag
    }

    /// Smooth upper bound on ln|G_n(x)| used to pick quadrature cutoffs.
    pub fn log_g_upper(&self, x: f64) -> f64 {
        self.log_f_abs(x) + log_m_upper(&self.spec, x) - self.ln_m_own
    }

    /// Fit A_ε and D_ε on a probe grid up to x_hi and store them.
    pub fn fit_envelope(&mut self, eps: f64, x_hi: f64) -> Envelope {
        let xs = log_grid(1e-2, x_hi.max(1.0), 400);
        let sl = self.lambda_n.max(0.0).sqrt();
        let a_eps = xs
            .iter()
            .map(|&x| 0.5 * (self.log_f_abs(x) - (PI + eps) * x.sqrt() - eps * sl))
            .fold(f64::NEG_INFINITY, f64::max);
        let d_eps = fit_multiplier_constant(&self.spec, &xs);
        let env = Envelope { eps, a_eps, d_eps };
        self.envelope = Some(env);
        env
    }

    /// D_ε + 2A_ε − ε√|x| + ε√λ_n + α₂d²/(2τ).
    pub fn envelope_bound(&self, x: f64) -> Option<f64> {
        let e = self.envelope?;
        let s = &self.spec;
        Some(e.d_eps + 2.0 * e.a_eps - e.eps * x.abs().sqrt() + e.eps * self.lambda_n.max(0.0).sqrt() + ALPHA_2 * s.d * s.d / (2.0 * s.tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_interval_basis, BasisKind};

    fn dd_pi(n: usize) -> SpectralBasis {
        build_interval_basis(BasisKind::ExactDD, PI, n).unwrap()
    }

    #[test]
    fn sigma_star_constants() {
        let (s, a1, a2) = sigma_star(1e-16);
        assert!((a2 - 1.893353).abs() < 1e-6);
        assert!((s - 0.05638).abs() < 1e-4);
        assert!((a1 - 1.9452).abs() < 1e-4);
        assert!(a1 - a2 > 0.05);
        let first = zeta_even(1) / (3.0 * PI * PI);
        assert!((first - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn f_n_basics() {
        let b = dd_pi(30);
        assert_eq!(log_f_n(&b, 2, Complex64::new(0.0, 0.0), 1e-12).unwrap().logmag, 0.0);
        assert!(log_f_n(&b, 2, Complex64::new(9.0, 0.0), 1e-12).unwrap().is_zero());
        let v = log_f_n(&b, 1, Complex64::new(1.0, 0.0), 1e-12).unwrap();
        assert!((v.logmag + std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn big_f_zeros_and_growth() {
        let b = dd_pi(30);
        for k in [2usize, 3, 7] {
            let z = Complex64::new(0.0, (k * k) as f64);
            let p = ZeroProduct::from_basis(&b);
            assert!(p.ln_f_n(1, rot(z)).is_zero());
        }
        let at_own = ZeroProduct::from_basis(&b).ln_f_n(1, rot(Complex64::new(0.0, 1.0))).div(ZeroProduct::from_basis(&b).ln_f_n_own(1));
        assert!(at_own.logmag.abs() < 1e-12);
        for x in [1e2f64, 1e4] {
            let v = log_F_n(&b, 1, x, 1e-12).unwrap();
            assert!(v.logmag <= 3.3 * x.sqrt());
        }
    }

    #[test]
    fn alt_product_cross_check() {
        let b = dd_pi(40);
        let n = 2;
        for k in 1..=10usize {
            let x_k = Complex64::new(0.0, (k * k) as f64);
            let a = ZeroProduct::from_basis(&b).ln_f_n_alt(n, rot(x_k));
            let f = ZeroProduct::from_basis(&b).ln_f_n(n, rot(x_k));
            assert_eq!(a.is_zero(), k != n);
            assert_eq!(f.is_zero(), k != n);
        }
        for i in 0..20 {
            let x = 0.37 + 3.1 * i as f64;
            let r = log_F_n(&b, n, x, 1e-12).unwrap().div(log_F_n_alt(&b, n, x));
            let s = log_F_n(&b, n, -x, 1e-12).unwrap().div(log_F_n_alt(&b, n, -x));
            assert!(r.logmag.is_finite() && r.phase.is_finite());
            // both are real entire functions: the ratio is conjugate-symmetric
            assert!((r.logmag - s.logmag).abs() < 1e-9 * r.logmag.abs().max(1.0));
            assert!(crate::entire::logc::wrap_phase(r.phase + s.phase).abs() < 1e-8);
        }
    }

    #[test]
    fn g_n_zero_placement() {
        let b = dd_pi(24);
        let spec = MultiplierSpec::new(PI + 0.6, 0.5).unwrap();
        for n in [1usize, 3, 8] {
            let ev = GnEvaluator::new(&b, spec, n, 1e-14).unwrap();
            for k in 1..=24usize {
                let v = ev.log_g_at(Complex64::new(0.0, (k * k) as f64));
                if k == n {
                    assert!(v.logmag.abs() < 1e-9 && v.phase.abs() < 1e-9, "{v:?}");
                } else {
                    assert!(v.is_zero());
                }
            }
        }
    }

    #[test]
    fn g_envelope_holds_and_norm_finite() {
        let b = dd_pi(40);
        let spec = MultiplierSpec::new(PI + 0.6, 1.0).unwrap();
        let mut ev = GnEvaluator::new(&b, spec, 1, 1e-14).unwrap();
        ev.fit_envelope(0.3, 1e6);
        let mut norm2 = 0.0;
        let h = 0.05;
        for i in 0..400_000 {
            let x = h * (i as f64 + 0.5);
            let g = ev.log_g(x).logmag;
            assert!(g <= ev.envelope_bound(x).unwrap() + 1e-9 || x < 1e-2);
            assert!(g <= ev.log_g_upper(x) + 1e-9);
            norm2 += 2.0 * h * (2.0 * g).exp();
        }
        let env_int: f64 = (0..400_000).map(|i| {
            let x = h * (i as f64 + 0.5);
            2.0 * h * (2.0 * ev.envelope_bound(x).unwrap()).exp()
        }).sum();
        assert!(norm2.is_finite() && norm2 > 0.0 && norm2 <= env_int);
    }

    #[test]
    fn multiplier_constant_does_not_grow() {
        let xs = log_grid(1.0, 1e6, 300);
        let ds: Vec<f64> = [1.0, 0.5, 0.25, 0.1]
            .iter()
            .map(|&t| fit_multiplier_constant(&MultiplierSpec::new(PI + 0.6, t).unwrap(), &xs))
            .collect();
        for w in ds.windows(2) {
            assert!(w[1] <= w[0].max(ds[0]) + 1e-6, "{ds:?}");
        }
    }
}
