//! Multiprecision scalars for the cancellation-heavy sums (moment checks,
//! terminal states, Gram inverses). Thin complex layer over MPFR floats.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

pub const MIN_BITS: u32 = 128;
pub const MAX_BITS: u32 = 8192;

/// Bits needed to keep `target_nats` of accuracy after cancelling through
/// magnitudes spanning `range_nats`.
pub fn bits_for(range_nats: f64, target_nats: f64) -> u32 {
    let nats = range_nats.max(0.0) + target_nats.max(0.0);
    let bits = 64.0 + nats / std::f64::consts::LN_2;
    (bits.ceil() as u32).clamp(MIN_BITS, MAX_BITS)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn f(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

#[derive(Clone, Debug)]
pub struct MpC {
    pub re: Float,
    pub im: Float,
}

impl MpC {
    pub fn zero(prec: u32) -> Self {
        MpC { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        MpC { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        MpC { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        MpC { re, im }
    }

    pub fn real(re: Float) -> Self {
        let prec = re.prec();
        MpC { re, im: Float::new(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &MpC) -> MpC {
        MpC { re: Float::with_val(self.prec(), &self.re + &o.re), im: Float::with_val(self.prec(), &self.im + &o.im) }
    }

    pub fn sub(&self, o: &MpC) -> MpC {
        MpC { re: Float::with_val(self.prec(), &self.re - &o.re), im: Float::with_val(self.prec(), &self.im - &o.im) }
    }

    pub fn add_assign(&mut self, o: &MpC) {
        self.re += &o.re;
        self.im += &o.im;
    }

    pub fn mul(&self, o: &MpC) -> MpC {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        MpC { re: ac - bd, im: ad + bc }
    }

    pub fn scale(&self, s: &Float) -> MpC {
        let p = self.prec();
        MpC { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.clone().square() + self.im.clone().square())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn recip(&self) -> MpC {
        let n = self.norm_sqr();
        let p = self.prec();
        MpC { re: Float::with_val(p, &self.re / &n), im: Float::with_val(p, -Float::with_val(p, &self.im / &n)) }
    }

    pub fn div(&self, o: &MpC) -> MpC {
        self.mul(&o.recip())
    }

    pub fn conj(&self) -> MpC {
        MpC { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn neg(&self) -> MpC {
        MpC { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn exp(&self) -> MpC {
        let p = self.prec();
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        MpC { re: Float::with_val(p, &m * &c), im: Float::with_val(p, &m * &s) }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> MpC {
        let p = self.prec();
        let r = self.abs();
        let re = (Float::with_val(p, &r + &self.re) / 2u32).sqrt();
        let mut im = (Float::with_val(p, &r - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        MpC { re, im }
    }

    pub fn sin(&self) -> MpC {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(Float::new(p));
        let (sh, ch) = self.im.clone().sinh_cosh(Float::new(p));
        MpC { re: Float::with_val(p, &s * &ch), im: Float::with_val(p, &c * &sh) }
    }

    pub fn cos(&self) -> MpC {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(Float::new(p));
        let (sh, ch) = self.im.clone().sinh_cosh(Float::new(p));
        MpC { re: Float::with_val(p, &c * &ch), im: Float::with_val(p, -(s * sh)) }
    }

    pub fn powi(&self, n: u32) -> MpC {
        let mut out = MpC::one(self.prec());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        out
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Natural log of the modulus as f64 (finite for nonzero values of any size).
    pub fn ln_abs(&self) -> f64 {
        let a = self.abs();
        if a.is_zero() {
            f64::NEG_INFINITY
        } else {
            a.ln().to_f64()
        }
    }
}

pub fn pow_f(x: &Float, k: i32) -> Float {
    Float::with_val(x.prec(), x.pow(k))
}
