//! The sinc-product multiplier M(z) = Π_n sinc(z/a_n).

use super::logc::{ln_sinc, LogComplex};
use crate::error::{Error, Result};
use crate::special::{hurwitz, hurwitz_scaled, lnsinc_coeffs};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const EPS_RATIO: f64 = 1.0 / 12.0;

/// Zeros: a0 repeated K times, then (m/A)² for m ≥ K+1 so that N(r) = [A√r] for r ≥ a0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub d: f64,
    pub slope: f64,
    pub a0: f64,
    pub tau: f64,
    pub k_rep: usize,
    pub eps_ratio: f64,
}

impl MultiplierSpec {
    pub fn new(d: f64, tau: f64) -> Result<Self> {
        Self::with_slope(d, d / (37.0 / 18.0 + EPS_RATIO), tau)
    }

    pub fn with_slope(d: f64, slope: f64, tau: f64) -> Result<Self> {
        if !(d > 0.0 && tau > 0.0 && slope > 0.0) {
            return Err(Error::Config(format!("need d, A, tau > 0 (d={d}, A={slope}, tau={tau})")));
        }
        let eps_ratio = d / slope - 37.0 / 18.0;
        if !(eps_ratio > 1e-12 && eps_ratio < 1.0 / 6.0 - 1e-12) {
            return Err(Error::Config(format!("d/A − 37/18 = {eps_ratio} must lie in (0, 1/6)")));
        }
        let a0 = (2.0 * slope / tau).powi(2);
        if a0 < slope.powi(-2) {
            return Err(Error::Config(format!("tau = {tau} too large: a0 = {a0} < A^-2")));
        }
        let k_rep = (slope * a0.sqrt()).floor() as usize;
        Ok(MultiplierSpec { d, slope, a0, tau, k_rep, eps_ratio })
    }

    /// First lattice index after the repeated block.
    pub fn m_first(&self) -> usize {
        self.k_rep + 1
    }

    pub fn lattice_zero(&self, m: usize) -> f64 {
        let r = m as f64 / self.slope;
        r * r
    }

    /// n-th zero (0-based) of the multiset.
    pub fn zero(&self, idx: usize) -> f64 {
        if idx < self.k_rep {
            self.a0
        } else {
            self.lattice_zero(self.m_first() + idx - self.k_rep)
        }
    }

    /// Counting function N(r).
    pub fn counting(&self, r: f64) -> usize {
        if r < self.a0 {
            return 0;
        }
        let top = (self.slope * r.sqrt()).floor() as usize;
        self.k_rep + top.saturating_sub(self.k_rep)
    }

    /// (Σ_{n<count} 1/a_n, analytic bound on the rest) with count = K + lattice terms.
    pub fn type_sum(&self, lattice_terms: usize) -> (f64, f64) {
        let mut s = self.k_rep as f64 / self.a0;
        let m0 = self.m_first();
        for m in m0..m0 + lattice_terms {
            s += 1.0 / self.lattice_zero(m);
        }
        let rest = self.slope * self.slope * hurwitz(2.0, (m0 + lattice_terms) as f64);
        (s, rest)
    }

    /// Exponential type Σ 1/a_n.
    pub fn exponential_type(&self) -> f64 {
        let (s, r) = self.type_sum(0);
        s + r
    }
}

const DELTA: f64 = 0.5;

fn canon(z: Complex64) -> Complex64 {
    // M is even: evaluate on Re z ≥ 0
    if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
        -z
    } else {
        z
    }
}

/// ln M(z): direct product while |z|/a_m > δ, then the ζ-series
/// ln sinc θ = −Σ c_k θ^{2k} summed over the remaining lattice.
pub fn log_m(spec: &MultiplierSpec, z: Complex64, tol: f64) -> LogComplex {
    let z = canon(z);
    if z.norm() == 0.0 {
        return LogComplex::ONE;
    }
    let mut v = ln_sinc(z / spec.a0).powi(spec.k_rep as i32);
    let m0 = spec.m_first();
    let m_stop = ((spec.slope * (z.norm() / DELTA).sqrt()).ceil() as usize).max(m0 - 1);
    for m in m0..=m_stop {
        v = v.mul(ln_sinc(z / spec.lattice_zero(m)));
        if v.is_zero() {
            return v;
        }
    }
    v.mul(LogComplex::from_c64(tail_series(spec, z, m_stop + 1, tol).exp()))
}

/// Σ_{m ≥ mt} ln sinc(z/a_m) for |z|/a_mt ≤ δ.
fn tail_series(spec: &MultiplierSpec, z: Complex64, mt: usize, tol: f64) -> Complex64 {
    let coeffs = lnsinc_coeffs(40);
    let theta0 = z * spec.slope * spec.slope / (mt * mt) as f64;
    let mut s = Complex64::new(0.0, 0.0);
    let t2 = theta0 * theta0;
    let mut p = Complex64::new(1.0, 0.0);
    for (i, c) in coeffs.iter().enumerate() {
        let k = (i + 1) as f64;
        p *= t2;
        let term = p * (c * hurwitz_scaled(4.0 * k, mt as f64));
        s -= term;
        if term.norm() < 1e-3 * tol.max(1e-17) {
            break;
        }
    }
    s
}

/// Smooth upper bound for ln|M(x)| on the real axis, using
/// |sinc θ| ≤ min(e^{−θ²/6} for θ < π, 1/θ).
pub fn log_m_upper(spec: &MultiplierSpec, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    let u = |th: f64| {
        let q = -th.ln();
        if th < std::f64::consts::PI {
            q.min(-th * th / 6.0)
        } else {
            q
        }
    };
    let mut v = spec.k_rep as f64 * u(x / spec.a0);
    let m0 = spec.m_first();
    let m_stop = ((spec.slope * (x / DELTA).sqrt()).ceil() as usize).max(m0 - 1);
    for m in m0..=m_stop {
        v += u(x / spec.lattice_zero(m));
    }
    // quadratic part of the tail series is an upper bound (all terms negative)
    let mt = (m_stop + 1) as f64;
    let th = x * spec.slope * spec.slope / (mt * mt);
    v - th * th / 6.0 * hurwitz_scaled(4.0, mt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spec_example_floor_block() {
        let s = MultiplierSpec::new(PI + 0.3, 1.0).unwrap();
        assert!((s.slope - (PI + 0.3) / (37.0 / 18.0 + 1.0 / 12.0)).abs() < 1e-15);
        assert!((s.slope - 1.60906).abs() < 1e-4);
        assert!((s.a0 - 4.0 * s.slope * s.slope).abs() < 1e-12);
        assert_eq!(s.k_rep, 5);
        let t = s.exponential_type();
        assert!(t <= 1.0 + 1e-9, "{t}");
        // a ceil-sized block overshoots the type budget
        let over = t + 1.0 / s.a0;
        assert!(over > 1.0);
    }

    #[test]
    fn halving_tau_scales_block() {
        let a = MultiplierSpec::new(PI + 0.6, 1.0).unwrap();
        let b = MultiplierSpec::new(PI + 0.6, 0.5).unwrap();
        assert!((b.a0 / a.a0 - 4.0).abs() < 1e-12);
        assert!((b.k_rep as i64 - 2 * a.k_rep as i64).abs() <= 1);
    }

    #[test]
    fn boundary_ratio_rejected() {
        let a = 1.5;
        assert!(MultiplierSpec::with_slope(37.0 * a / 18.0, a, 1.0).is_err());
        assert!(MultiplierSpec::with_slope((37.0 / 18.0 + 1.0 / 6.0) * a, a, 1.0).is_err());
        assert!(MultiplierSpec::with_slope((37.0 / 18.0 + 0.1) * a, a, 1.0).is_ok());
        assert!(MultiplierSpec::new(PI, 100.0).is_err());
    }

    #[test]
    fn counting_function_floor() {
        let s = MultiplierSpec::new(PI + 0.6, 0.5).unwrap();
        assert_eq!(s.counting(s.a0 * 0.999), 0);
        for &r in &[s.a0, s.a0 * 1.7, s.a0 * 9.3, 1e5] {
            assert_eq!(s.counting(r), (s.slope * r.sqrt()).floor() as usize);
        }
        for i in 0..300 {
            assert!(s.zero(i) >= s.a0);
        }
    }

    #[test]
    fn single_zero_sinc() {
        let v = ln_sinc(Complex64::new(2.0 / 2.0, 0.0));
        assert!((v.logmag + 0.17260).abs() < 1e-5);
    }

    #[test]
    fn values_on_axes() {
        let s = MultiplierSpec::new(PI + 0.6, 1.0).unwrap();
        assert!(log_m(&s, Complex64::new(0.0, 0.0), 1e-14).logmag.abs() < 1e-15);
        for &y in &[0.5, 10.0, 300.0, 5000.0] {
            assert!(log_m(&s, Complex64::new(0.0, y), 1e-14).logmag >= 0.0);
        }
        for &x in &[0.3, 17.0, 123.4, 9876.5] {
            let a = log_m(&s, Complex64::new(x, 0.0), 1e-14);
            let b = log_m(&s, Complex64::new(-x, 0.0), 1e-14);
            assert_eq!(a, b);
            assert!(a.logmag <= log_m_upper(&s, x) + 1e-12);
        }
    }

    #[test]
    fn tail_series_matches_brute_force() {
        let s = MultiplierSpec::new(PI + 0.6, 1.0).unwrap();
        let z = Complex64::new(50.0, 20.0);
        let v = log_m(&s, z, 1e-15);
        let mut b = ln_sinc(z / s.a0).powi(s.k_rep as i32).to_c64().ln();
        for m in s.m_first()..2_000_000 {
            b += ln_sinc(z / s.lattice_zero(m)).to_c64().ln();
        }
        // brute force tail after 2e6 terms ~ |z|² A⁴ / (18 m³)
        assert!((v.logmag - b.re).abs() < 1e-9, "{} {}", v.logmag, b.re);
    }
}
