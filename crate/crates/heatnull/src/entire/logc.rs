use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// (ln|w|, arg w) with exact zeros represented by logmag = −∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub logmag: f64,
    pub phase: f64,
}

pub fn wrap_phase(p: f64) -> f64 {
    let mut q = p % (2.0 * PI);
    if q <= -PI {
        q += 2.0 * PI;
    } else if q > PI {
        q -= 2.0 * PI;
    }
    q
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex { logmag: 0.0, phase: 0.0 };
    pub const ZERO: LogComplex = LogComplex { logmag: f64::NEG_INFINITY, phase: 0.0 };

    pub fn new(logmag: f64, phase: f64) -> Self {
        if logmag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex { logmag, phase: wrap_phase(phase) }
    }

    pub fn from_c64(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex { logmag: z.norm().ln(), phase: z.arg() }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogComplex { logmag: x.abs().ln(), phase: if x < 0.0 { PI } else { 0.0 } }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.logmag == f64::NEG_INFINITY
    }

    pub fn mul(self, o: LogComplex) -> LogComplex {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        LogComplex::new(self.logmag + o.logmag, self.phase + o.phase)
    }

    pub fn div(self, o: LogComplex) -> LogComplex {
        if self.is_zero() {
            return Self::ZERO;
        }
        LogComplex::new(self.logmag - o.logmag, self.phase - o.phase)
    }

    pub fn powi(self, k: i32) -> LogComplex {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        LogComplex::new(self.logmag * k as f64, self.phase * k as f64)
    }

    pub fn to_c64(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.logmag.exp(), self.phase)
    }

    /// Sum of two values without leaving log form.
    pub fn add(self, o: LogComplex) -> LogComplex {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.logmag >= o.logmag { (self, o) } else { (o, self) };
        let r = Complex64::from_polar((small.logmag - big.logmag).exp(), small.phase - big.phase);
        let s = Complex64::new(1.0, 0.0) + r;
        big.mul(LogComplex::from_c64(s))
    }
}

/// ln sin w for complex w, stable for large |Im w|.
pub fn ln_sin(w: Complex64) -> LogComplex {
    if w.im.abs() < 1.0 {
        if w.im == 0.0 {
            return LogComplex::from_real(w.re.sin());
        }
        return LogComplex::from_c64(w.sin());
    }
    let i = Complex64::new(0.0, 1.0);
    if w.im > 0.0 {
        // sin w = (i/2) e^{−iw} (1 − e^{2iw})
        let corr = Complex64::new(1.0, 0.0) - (2.0 * i * w).exp();
        LogComplex::new(w.im - LN_2, PI / 2.0 - w.re).mul(LogComplex::from_c64(corr))
    } else {
        // sin w = (−i/2) e^{iw} (1 − e^{−2iw})
        let corr = Complex64::new(1.0, 0.0) - (-2.0 * i * w).exp();
        LogComplex::new(-w.im - LN_2, -PI / 2.0 + w.re).mul(LogComplex::from_c64(corr))
    }
}

/// ln cos w for complex w.
pub fn ln_cos(w: Complex64) -> LogComplex {
    if w.im.abs() < 1.0 {
        if w.im == 0.0 {
            return LogComplex::from_real(w.re.cos());
        }
        return LogComplex::from_c64(w.cos());
    }
    let i = Complex64::new(0.0, 1.0);
    if w.im > 0.0 {
        let corr = Complex64::new(1.0, 0.0) + (2.0 * i * w).exp();
        LogComplex::new(w.im - LN_2, -w.re).mul(LogComplex::from_c64(corr))
    } else {
        let corr = Complex64::new(1.0, 0.0) + (-2.0 * i * w).exp();
        LogComplex::new(-w.im - LN_2, w.re).mul(LogComplex::from_c64(corr))
    }
}

/// ln(sin w / w); value 0 at w = 0.
pub fn ln_sinc(w: Complex64) -> LogComplex {
    if w.norm() < 1e-4 {
        // 1 − w²/6 + w⁴/120
        let w2 = w * w;
        return LogComplex::from_c64(Complex64::new(1.0, 0.0) - w2 / 6.0 + w2 * w2 / 120.0);
    }
    ln_sin(w).div(LogComplex::from_c64(w))
}

/// ln(sinh t / t) for real t ≥ 0.
pub fn ln_sinhc(t: f64) -> f64 {
    let t = t.abs();
    if t < 1e-4 {
        return t * t / 6.0;
    }
    if t < 20.0 {
        return (t.sinh() / t).ln();
    }
    t - LN_2 - t.ln() + (-(-2.0 * t).exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_one() {
        let v = ln_sinc(Complex64::new(1.0, 0.0));
        assert!((v.logmag - 1f64.sin().ln()).abs() < 1e-15);
        assert!((v.logmag + 0.17260).abs() < 5e-6);
    }

    #[test]
    fn sin_matches_direct_in_overlap() {
        for &w in &[Complex64::new(0.3, 2.5), Complex64::new(-4.0, -3.0), Complex64::new(7.0, 1.5)] {
            let a = ln_sin(w).to_c64();
            let b = w.sin();
            assert!((a - b).norm() < 1e-12 * b.norm());
            let c = ln_cos(w).to_c64();
            assert!((c - w.cos()).norm() < 1e-12 * w.cos().norm());
        }
    }

    #[test]
    fn huge_imaginary_parts() {
        let w = Complex64::new(3.0, 900.0);
        let v = ln_sin(w);
        assert!((v.logmag - (900.0 - LN_2)).abs() < 1e-12);
    }

    #[test]
    fn zeros_absorb_and_add() {
        let z = LogComplex::ZERO;
        assert!(z.mul(LogComplex::new(5.0, 1.0)).is_zero());
        let a = LogComplex::from_real(2.0).add(LogComplex::from_real(-2.0));
        assert!(a.is_zero() || a.logmag < -30.0);
        let b = LogComplex::from_real(1e300).add(LogComplex::from_real(1e300));
        assert!((b.logmag - (2e300f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn sinhc_branches_agree() {
        let a = ln_sinhc(19.999);
        let b = 19.999 - LN_2 - 19.999f64.ln() + (-(-2.0 * 19.999f64).exp()).ln_1p();
        assert!((a - b).abs() < 1e-12);
    }
}
