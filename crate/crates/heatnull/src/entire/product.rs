//! The zero product f(z) = Π_k (1 − z/λ_k) over a (reduced) spectrum and its
//! one-point deletions f_n.

use super::logc::{ln_cos, ln_sinc, LogComplex};
use crate::error::{Error, Result};
use crate::spectral::{SpectralBasis, ZeroModel};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct ZeroProduct {
    pub lambdas: Vec<f64>,
    pub model: ZeroModel,
    /// bound on |λ_k − model(k)| for unstored k
    pub model_residual: f64,
}

impl ZeroProduct {
    pub fn from_basis(b: &SpectralBasis) -> Self {
        let model = b.model;
        let model_residual = if model.exact {
            0.0
        } else {
            let n = b.count();
            let mut r: f64 = 0.0;
            for k in n / 2..n {
                r = r.max((b.lambdas[k] - model.lambda(k + 1)).abs() + b.eig_errors[k]);
            }
            r
        };
        ZeroProduct { lambdas: b.lambdas.clone(), model, model_residual }
    }

    /// Plain spectrum λ_k = k² (or (k−½)² with `half`), all zeros exact.
    pub fn squares(count: usize, half: bool) -> Self {
        let nu = if half { -0.5 } else { 0.0 };
        let model = ZeroModel { nu, scale: 1.0, shift: 0.0, exact: true };
        ZeroProduct { lambdas: (1..=count).map(|k| model.lambda(k)).collect(), model, model_residual: 0.0 }
    }

    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        if k <= self.count() {
            self.lambdas[k - 1]
        } else {
            self.model.lambda(k)
        }
    }

    pub(crate) fn base_nu(&self) -> f64 {
        if self.model.nu <= -1.0 {
            0.0
        } else {
            self.model.nu
        }
    }

    /// Number of base-sequence factors (j+ν_b)² covered by stored modes.
    pub(crate) fn covered(&self) -> usize {
        if self.model.nu <= -1.0 {
            self.count().saturating_sub(1)
        } else {
            self.count()
        }
    }

    /// P_ν(y) = sin(π√y)/(π√y) or cos(π√y).
    fn ln_p(&self, y: Complex64) -> LogComplex {
        let w = y.sqrt() * PI;
        if self.base_nu() == 0.0 {
            ln_sinc(w)
        } else {
            ln_cos(w)
        }
    }

    /// Base zero (j+ν_b)², j ≤ covered, nearest to y.
    pub(crate) fn nearest_base(&self, y: Complex64) -> Option<usize> {
        let j = (y.sqrt().re - self.base_nu()).round();
        if j >= 1.0 && (j as usize) <= self.covered() {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Π over model indices above the stored ones, in the variable y.
    /// The base factor nearest to y is cancelled analytically against P, so
    /// y sitting on a covered zero stays finite.
    fn ln_q(&self, y: Complex64) -> LogComplex {
        let nb = self.base_nu();
        let near = self.nearest_base(y);
        let mut out = match near {
            Some(j) => {
                // P(y)/(1 − y/m²) with y − m² carried explicitly
                let m = j as f64 + nb;
                let w = y.sqrt();
                let eps = (y - m * m) / (w + m);
                let mag = if nb == 0.0 { m * m / (w * (w + m)) } else { m * m * PI / (w + m) };
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                LogComplex::from_real(sign).mul(LogComplex::from_c64(mag)).mul(ln_sinc(eps * PI))
            }
            None => self.ln_p(y),
        };
        for j in 1..=self.covered() {
            if Some(j) == near {
                continue;
            }
            let m = j as f64 + nb;
            out = out.div(LogComplex::from_c64(Complex64::new(1.0, 0.0) - y / (m * m)));
        }
        out
    }

    fn is_zero_at(&self, z: Complex64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        if self.lambdas.iter().any(|&l| l == z.re) {
            return true;
        }
        if self.model.exact {
            let y = (z.re - self.model.shift) / self.model.scale;
            if y > 0.0 {
                let m = y.sqrt() - self.model.nu;
                return m >= 0.5 && (m - m.round()).abs() < 1e-12 * m.max(1.0);
            }
        }
        false
    }

    /// ln f(z), f(z) = Π_k (1 − z/λ_k).
    pub fn ln_f(&self, z: Complex64) -> LogComplex {
        if self.is_zero_at(z) {
            return LogComplex::ZERO;
        }
        let sc = self.model.scale;
        let sh = self.model.shift;
        let y = (z - sh) / sc;
        let y0 = Complex64::new(-sh / sc, 0.0);
        if self.model.exact {
            let mut v = self.ln_p(y);
            if sh != 0.0 {
                v = v.div(self.ln_p(y0));
            }
            return v;
        }
        let mut v = LogComplex::ONE;
        for &l in &self.lambdas {
            v = v.mul(LogComplex::from_c64(Complex64::new(1.0, 0.0) - z / l));
        }
        v.mul(self.ln_q(y)).div(self.ln_q(y0))
    }

    /// ln f_n(z), f_n(z) = f(z)/(1 − z/λ_n).
    pub fn ln_f_n(&self, n: usize, z: Complex64) -> LogComplex {
        let ln = self.lambda(n);
        if z.im == 0.0 && z.re == ln {
            return self.ln_f_n_own(n);
        }
        let f = self.ln_f(z);
        if f.is_zero() {
            return f;
        }
        f.div(LogComplex::from_c64(Complex64::new(1.0, 0.0) - z / ln))
    }

    /// ln f_n(λ_n) = ln(−λ_n f'(λ_n)).
    pub fn ln_f_n_own(&self, n: usize) -> LogComplex {
        let sc = self.model.scale;
        let sh = self.model.shift;
        let ln = self.lambda(n);
        if self.model.exact {
            let m = n as f64 + self.model.nu;
            let y = m * m;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let val = if self.model.nu == 0.0 {
                sign * ln / (2.0 * y * sc)
            } else {
                sign * PI * ln / (2.0 * m * sc)
            };
            let mut v = LogComplex::from_real(val);
            if sh != 0.0 {
                v = v.div(self.ln_p(Complex64::new(-sh / sc, 0.0)));
            }
            return v;
        }
        let mut v = LogComplex::ONE;
        for (k, &l) in self.lambdas.iter().enumerate() {
            if k + 1 != n {
                v = v.mul(LogComplex::from_real(1.0 - ln / l));
            }
        }
        let y = Complex64::new((ln - sh) / sc, 0.0);
        v.mul(self.ln_q(y)).div(self.ln_q(Complex64::new(-sh / sc, 0.0)))
    }

    /// Bound on the log-error from replacing unstored eigenvalues by the model.
    pub fn model_error(&self, z: Complex64) -> f64 {
        if self.model_residual == 0.0 {
            return 0.0;
        }
        let r = self.model_residual;
        let k0 = self.count() + 1;
        let k_end = (k0 + 1000).max((10.0 * z.norm().sqrt()) as usize + k0);
        let mut s = 0.0;
        for k in k0..=k_end {
            let l = self.model.lambda(k);
            s += r * (1.0 / (l - z).norm().max(1e-300) + 1.0 / l);
        }
        s + 2.0 * r / (self.model.scale * (k_end as f64 + self.model.nu))
    }

    pub fn ln_f_n_checked(&self, n: usize, z: Complex64, tol: f64) -> Result<LogComplex> {
        let e = self.model_error(z) + self.model_error(Complex64::new(self.lambda(n), 0.0));
        if e > tol {
            return Err(Error::truncation("product tail beyond stored modes", e));
        }
        Ok(self.ln_f_n(n, z))
    }

    /// Alternative product Π_{k≠n} [1 − ((z−λ_n)/(λ_k−λ_n))²].
    pub fn ln_f_n_alt(&self, n: usize, z: Complex64) -> LogComplex {
        let ln = self.lambda(n);
        let w = z - ln;
        let w2 = w * w;
        let mut v = LogComplex::ONE;
        let mut k = 1usize;
        loop {
            if k != n {
                let d = self.lambda(k) - ln;
                let u = w2 / (d * d);
                v = v.mul(LogComplex::from_c64(Complex64::new(1.0, 0.0) - u));
                if v.is_zero() {
                    return v;
                }
                if k > n + 100 && k > self.count() && u.norm() < 1e-4 {
                    break;
                }
            }
            k += 1;
        }
        // Σ_{j>k} 1/(λ_j−λ_n)² ≈ 1/(3 sc² (k+ν+½)³)
        let m = k as f64 + self.model.nu + 0.5;
        let tail = w2 / (3.0 * self.model.scale.powi(2) * m.powi(3));
        v.mul(LogComplex::from_c64((-tail).exp()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_interval_basis, reduce_to_canonical, BasisKind};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn telescoping_half() {
        let p = ZeroProduct::squares(64, false);
        let v = p.ln_f_n(1, c(1.0));
        assert!((v.logmag + std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(v.phase, 0.0);
        // brute force partial product with tail
        let mut s = 0.0;
        for k in 2..200000 {
            s += (1.0 - 1.0 / (k as f64 * k as f64)).ln();
        }
        assert!((s + std::f64::consts::LN_2).abs() < 1e-5);
    }

    #[test]
    fn value_at_zero_and_zeros() {
        let p = ZeroProduct::squares(10, false);
        assert!(p.ln_f_n(3, c(0.0)).logmag.abs() < 1e-14);
        assert!(p.ln_f_n(3, c(16.0)).is_zero());
        assert!(p.ln_f_n(3, c(400.0)).is_zero());
        assert!(!p.ln_f_n(3, c(9.0)).is_zero());
    }

    #[test]
    fn own_value_is_limit() {
        for &half in &[false, true] {
            let p = ZeroProduct::squares(10, half);
            for n in 1..6 {
                let ln = p.lambda(n);
                let a = p.ln_f_n_own(n).to_c64();
                let b = p.ln_f_n(n, c(ln * (1.0 + 1e-7))).to_c64();
                assert!((a - b).norm() < 1e-5 * a.norm(), "n={n} half={half} {a} {b}");
            }
        }
    }

    #[test]
    fn closed_form_matches_explicit_product() {
        // truncated explicit product plus numeric tail vs closed form at complex z
        let z = Complex64::new(-3.0, 40.0);
        let p = ZeroProduct::squares(4, false);
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..400000u64 {
            s += (Complex64::new(1.0, 0.0) - z / (k * k) as f64).ln();
        }
        let v = p.ln_f(z);
        assert!((v.logmag - s.re).abs() < 1e-3, "{} {}", v.logmag, s.re);
    }

    #[test]
    fn numeric_model_tail_matches_closed_form() {
        // a numeric-style product for exact data must reproduce the closed form
        let exact = ZeroProduct::squares(12, true);
        let mut numeric = exact.clone();
        numeric.model.exact = false;
        for &z in &[Complex64::new(0.0, -50.0), Complex64::new(7.3, 0.0), Complex64::new(-20.0, 3.0)] {
            let a = exact.ln_f_n(2, z);
            let b = numeric.ln_f_n(2, z);
            assert!((a.logmag - b.logmag).abs() < 1e-9, "{a:?} {b:?}");
            assert!((a.to_c64() / b.to_c64() - 1.0).norm() < 1e-8);
        }
        let a = exact.ln_f_n_own(3);
        let b = numeric.ln_f_n_own(3);
        assert!((a.to_c64() - b.to_c64()).norm() < 1e-9 * a.to_c64().norm());
    }

    #[test]
    fn shifted_exact_spectrum() {
        // λ_k = k² + 2 as a shifted exact model
        let b = build_interval_basis(BasisKind::ExactDD, std::f64::consts::PI, 8).unwrap();
        let mut b2 = b.clone();
        b2.lambdas[0] = -1.0; // forces a shift of 2 in the reduction
        let (red, s) = reduce_to_canonical(&b2, 1.0);
        assert_eq!(s.shift, 2.0);
        let p = ZeroProduct::from_basis(&red);
        assert!(p.ln_f(c(p.lambda(20))).is_zero());
        let own = p.ln_f_n_own(2).to_c64();
        let near = p.ln_f_n(2, c(p.lambda(2) * (1.0 + 1e-8))).to_c64();
        assert!((own - near).norm() < 1e-5 * own.norm());
    }

    #[test]
    fn alternative_product_values() {
        let p = ZeroProduct::squares(64, false);
        assert!(p.ln_f_n_alt(1, c(1.0)).logmag.abs() < 1e-15);
        assert!(p.ln_f_n_alt(1, c(9.0)).is_zero());
        let v = p.ln_f_n_alt(1, c(2.0));
        let mut s = 0.0;
        for k in 2..100000u64 {
            let d = (k * k - 1) as f64;
            s += (1.0 - 1.0 / (d * d)).ln();
        }
        assert!((v.logmag - s).abs() < 1e-10);
    }
}
