//! Exact exponential-sum representation g(t) = Re Σ_k a_k e^{μ_k t} of a
//! control on a bounded window. Integrals against exponentials are closed
//! forms, evaluated in MPFR so that cancelling sums keep their accuracy.

use crate::mp::MpC;
use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct ExpSum {
    pub prec: u32,
    pub coeffs: Vec<MpC>,
    pub rates: Arc<Vec<MpC>>,
}

impl ExpSum {
    pub fn new(coeffs: Vec<MpC>, rates: Arc<Vec<MpC>>) -> Self {
        assert_eq!(coeffs.len(), rates.len());
        let prec = coeffs.first().map(|c| c.prec()).unwrap_or(crate::mp::MIN_BITS);
        ExpSum { prec, coeffs, rates }
    }

    /// Real exponentials Σ a_k e^{−λ_k t}.
    pub fn real_exponentials(coeffs: &[Float], lambdas: &[Float]) -> Self {
        let rates = lambdas.iter().map(|l| MpC::real(Float::with_val(l.prec(), -l))).collect();
        ExpSum::new(coeffs.iter().map(|c| MpC::real(c.clone())).collect(), Arc::new(rates))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn zero_like(&self) -> Self {
        ExpSum { prec: self.prec, coeffs: vec![MpC::zero(self.prec); self.len()], rates: self.rates.clone() }
    }

    /// Linear combination of sums that share the same rate vector.
    pub fn combine(terms: &[(Float, &ExpSum)]) -> Self {
        let first = terms[0].1;
        let mut out = first.zero_like();
        for (w, s) in terms {
            assert!(Arc::ptr_eq(&s.rates, &first.rates), "rate vectors differ");
            for (o, c) in out.coeffs.iter_mut().zip(&s.coeffs) {
                o.add_assign(&c.scale(w));
            }
        }
        out
    }

    pub fn scaled(&self, w: &Float) -> Self {
        ExpSum { prec: self.prec, coeffs: self.coeffs.iter().map(|c| c.scale(w)).collect(), rates: self.rates.clone() }
    }

    /// t ↦ g(−t).
    pub fn reversed(&self) -> Self {
        let rates = self.rates.iter().map(|r| r.neg()).collect();
        ExpSum { prec: self.prec, coeffs: self.coeffs.clone(), rates: Arc::new(rates) }
    }

    /// t ↦ e^{st} g(σt + c).
    pub fn affine(&self, sigma: f64, c: f64, s: f64) -> Self {
        let p = self.prec;
        let sig = Float::with_val(p, sigma);
        let cf = Float::with_val(p, c);
        let sf = Float::with_val(p, s);
        let coeffs = self.coeffs.iter().zip(self.rates.iter()).map(|(a, mu)| a.mul(&mu.scale(&cf).exp())).collect();
        let rates = self
            .rates
            .iter()
            .map(|mu| {
                let r = mu.scale(&sig);
                MpC::from_parts(Float::with_val(p, &r.re + &sf), r.im)
            })
            .collect();
        ExpSum { prec: p, coeffs, rates: Arc::new(rates) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(self.rates.iter())
            .map(|(a, mu)| {
                let (ar, ai) = a.to_c64();
                let (mr, mi) = mu.to_c64();
                (Complex64::new(ar, ai) * (Complex64::new(mr, mi) * t).exp()).re
            })
            .sum()
    }

    /// f64 samples on a uniform grid, by per-rate geometric recurrence.
    pub fn sample(&self, t0: f64, t1: f64, count: usize) -> Vec<f64> {
        let dt = if count > 1 { (t1 - t0) / (count - 1) as f64 } else { 0.0 };
        let mut out = vec![0.0; count];
        for (a, mu) in self.coeffs.iter().zip(self.rates.iter()) {
            let a = c64(a);
            let m = c64(mu);
            let step = (m * dt).exp();
            let mut e = a * (m * t0).exp();
            for (i, o) in out.iter_mut().enumerate() {
                if i % 256 == 0 && i > 0 {
                    // re-anchor to keep the recurrence drift negligible
                    e = a * (m * (t0 + dt * i as f64)).exp();
                }
                *o += e.re;
                e *= step;
            }
        }
        out
    }

    /// Precomputed e^{μ t} at the two ends of an integration window.
    pub fn window(&self, t0: f64, t1: f64) -> WindowExps {
        let p = self.prec;
        let (f0, f1) = (Float::with_val(p, t0), Float::with_val(p, t1));
        let pairs: Vec<(MpC, MpC)> = self.rates.par_iter().map(|mu| (mu.scale(&f0).exp(), mu.scale(&f1).exp())).collect();
        WindowExps { t0, t1, pairs }
    }

    /// ∫_{t0}^{t1} g(t) e^{c t} dt, exactly.
    pub fn integral_exp(&self, w: &WindowExps, c: &Float) -> Float {
        let p = self.prec;
        let e0 = Float::with_val(p, Float::with_val(p, c * w.t0).exp());
        let e1 = Float::with_val(p, Float::with_val(p, c * w.t1).exp());
        let len = Float::with_val(p, w.t1 - w.t0);
        let mut acc = Float::new(p);
        let mut dre = Float::new(p);
        let mut dim = Float::new(p);
        let mut tmp = Float::new(p);
        for ((a, mu), (x0, x1)) in self.coeffs.iter().zip(self.rates.iter()).zip(&w.pairs) {
            // D = x1 e1 − x0 e0, result Re(a D/(μ + c))
            let pre = Float::with_val(p, &mu.re + c);
            if pre.is_zero() && mu.im.is_zero() {
                // ∫ e^{0} over the window times the constant e^{μt}e^{ct} = 1
                tmp.assign(&a.re * &len);
                acc += &tmp;
                continue;
            }
            dre.assign(&x1.re * &e1);
            tmp.assign(&x0.re * &e0);
            dre -= &tmp;
            dim.assign(&x1.im * &e1);
            tmp.assign(&x0.im * &e0);
            dim -= &tmp;
            // w = a·D
            let wre = Float::with_val(p, &a.re * &dre) - Float::with_val(p, &a.im * &dim);
            let wim = Float::with_val(p, &a.re * &dim) + Float::with_val(p, &a.im * &dre);
            let den = Float::with_val(p, pre.square_ref()) + Float::with_val(p, mu.im.square_ref());
            let num = Float::with_val(p, &wre * &pre) + Float::with_val(p, &wim * &mu.im);
            tmp.assign(&num / &den);
            acc += &tmp;
        }
        acc
    }

    /// Moments ∫ g e^{−λ t} over the window for several λ.
    pub fn moments(&self, w: &WindowExps, lambdas: &[f64]) -> Vec<Float> {
        lambdas
            .par_iter()
            .map(|&l| self.integral_exp(w, &Float::with_val(self.prec, -l)))
            .collect()
    }

    /// Duhamel term ∫_{t0}^{t1} e^{−λ(t1−t)} g(t) dt.
    pub fn duhamel(&self, w: &WindowExps, lambda: &Float) -> Float {
        let p = self.prec;
        let i = self.integral_exp(w, lambda);
        let d = Float::with_val(p, Float::with_val(p, -(lambda * Float::with_val(p, w.t1))).exp());
        i * d
    }

    /// ‖g‖² on the window, term by term (quadratic in the number of rates).
    pub fn norm_sqr_exact(&self, t0: f64, t1: f64) -> Float {
        let p = self.prec;
        let n = self.len();
        let (f0, f1) = (Float::with_val(p, t0), Float::with_val(p, t1));
        // g² = ½ Re Σ_jk a_j a_k e^{(μ_j+μ_k)t} + ½ Re Σ_jk a_j ā_k e^{(μ_j+μ̄_k)t}
        let mut acc = Float::new(p);
        for j in 0..n {
            for k in 0..n {
                for conj in [false, true] {
                    let (ak, mk) = if conj { (self.coeffs[k].conj(), self.rates[k].conj()) } else { (self.coeffs[k].clone(), self.rates[k].clone()) };
                    let c = self.coeffs[j].mul(&ak);
                    let r = self.rates[j].add(&mk);
                    let v = if r.re.is_zero() && r.im.is_zero() {
                        c.scale(&Float::with_val(p, &f1 - &f0))
                    } else {
                        r.scale(&f1).exp().sub(&r.scale(&f0).exp()).mul(&c).div(&r)
                    };
                    acc += Float::with_val(p, &v.re / 2u32);
                }
            }
        }
        acc
    }
}

fn c64(z: &MpC) -> Complex64 {
    let (r, i) = z.to_c64();
    Complex64::new(r, i)
}

pub struct WindowExps {
    pub t0: f64,
    pub t1: f64,
    pairs: Vec<(MpC, MpC)>,
}

use rug::Assign;

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> Float {
        Float::with_val(200, v)
    }

    #[test]
    fn constant_duhamel_closed_form() {
        // g = 1 on [0, T]: ∫ e^{−λ(T−t)} dt = (1 − e^{−λT})/λ
        let g = ExpSum::real_exponentials(&[f(1.0)], &[f(0.0)]);
        let w = g.window(0.0, 1.3);
        let v = g.duhamel(&w, &f(2.0)).to_f64();
        assert!((v - (1.0 - (-2.6f64).exp()) / 2.0).abs() < 1e-15);
        // resonant case λ + μ = 0
        let h = ExpSum::real_exponentials(&[f(1.0)], &[f(2.0)]);
        let v = h.duhamel(&h.window(0.0, 1.0), &f(2.0)).to_f64();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_moment_matches_quadrature() {
        let prec = 200;
        let rates = Arc::new(vec![MpC::from_f64(prec, 0.0, -3.0), MpC::from_f64(prec, -0.5, 1.0)]);
        let s = ExpSum::new(vec![MpC::from_f64(prec, 1.0, 0.5), MpC::from_f64(prec, -0.3, 2.0)], rates);
        let w = s.window(-0.7, 0.9);
        let m = s.moments(&w, &[1.5])[0].to_f64();
        let n = 20000;
        let h = 1.6 / n as f64;
        let mut q = 0.0;
        for i in 0..=n {
            let t = -0.7 + h * i as f64;
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
            q += wt * h * s.eval(t) * (-1.5 * t).exp();
        }
        assert!((m - q).abs() < 1e-7, "{m} {q}");
    }

    #[test]
    fn affine_and_reverse() {
        let prec = 200;
        let rates = Arc::new(vec![MpC::from_f64(prec, 0.2, -3.0)]);
        let s = ExpSum::new(vec![MpC::from_f64(prec, 1.0, 0.5)], rates);
        let a = s.affine(2.0, -0.4, 0.7);
        for t in [0.0, 0.3, 1.1] {
            let want = (0.7 * t as f64).exp() * s.eval(2.0 * t - 0.4);
            assert!((a.eval(t) - want).abs() < 1e-12);
            assert!((s.reversed().eval(t) - s.eval(-t)).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_norm_of_exponential() {
        let g = ExpSum::real_exponentials(&[f(1.0)], &[f(1.0)]);
        let v = g.norm_sqr_exact(-1.0, 1.0).to_f64();
        assert!((v - 2.0f64.sinh()).abs() < 1e-14);
    }
}
