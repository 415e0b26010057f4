//! Zeta-type sums used by the product tails.

use crate::mp;
use rug::Float;
use std::f64::consts::PI;

/// ζ(2i) for i ≥ 1 in double precision.
pub fn zeta_even(i: u32) -> f64 {
    hurwitz(2.0 * i as f64, 1.0)
}

/// Hurwitz zeta ζ(s, a) = Σ_{j≥0} (a+j)^{−s} for s > 1, a > 0 (Euler–Maclaurin).
pub fn hurwitz(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0);
    // B_{2i}/(2i)!
    const BF: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    ];
    let n = ((s + 20.0).max(2.0 * s) - a).max(0.0).ceil() as usize;
    let mut sum = 0.0;
    for j in (0..n).rev() {
        sum += (a + j as f64).powf(-s);
    }
    let b = a + n as f64;
    let mut tail = b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    let mut rising = s;
    let mut bpow = b.powf(-s - 1.0);
    for (i, c) in BF.iter().enumerate() {
        let i = i as f64 + 1.0;
        tail += c * rising * bpow;
        rising *= (s + 2.0 * i - 1.0) * (s + 2.0 * i);
        bpow /= b * b;
    }
    sum + tail
}

/// a^s ζ(s, a), finite even when a^{−s} underflows.
pub fn hurwitz_scaled(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0);
    const BF: [f64; 6] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0];
    let n = ((s + 20.0).max(2.0 * s) - a).max(0.0).ceil() as usize;
    let mut sum = 0.0;
    for j in (0..n).rev() {
        sum += (a / (a + j as f64)).powf(s);
    }
    let b = a + n as f64;
    let r = (a / b).powf(s); // (a/b)^s
    let mut tail = r * b / (s - 1.0) + 0.5 * r;
    let mut rising = s;
    let mut bpow = r / b;
    for (i, c) in BF.iter().enumerate() {
        let i = i as f64 + 1.0;
        tail += c * rising * bpow;
        rising *= (s + 2.0 * i - 1.0) * (s + 2.0 * i);
        bpow /= b * b;
    }
    sum + tail
}

/// Coefficients c_k = ζ(2k)/(k π^{2k}) of ln(sin πθ'/πθ') ... in the form
/// ln sinc θ = −Σ_k c_k θ^{2k}, valid for |θ| < π.
pub fn lnsinc_coeffs(count: usize) -> Vec<f64> {
    (1..=count as u32).map(|k| zeta_even(k) / (k as f64 * PI.powi(2 * k as i32))).collect()
}

/// MPFR Hurwitz zeta for integer s ≥ 2 and real a > 0.
pub fn hurwitz_mp(s: u32, a: &Float, prec: u32) -> Float {
    assert!(s >= 2);
    let sf = s as f64;
    let bits = prec as f64;
    // shift so the asymptotic series converges fast: b ≳ (s + bits/4)/(2π)·4
    let want = (sf + 0.35 * bits) / 2.0 + 8.0;
    let a64 = a.to_f64();
    let n = (want - a64).max(0.0).ceil() as u64;
    let mut sum = Float::new(prec);
    for j in (0..n).rev() {
        let t = Float::with_val(prec, a + j);
        sum += mp::pow_f(&t, -(s as i32));
    }
    let b = Float::with_val(prec, a + n);
    let b2 = Float::with_val(prec, b.clone().square());
    sum += Float::with_val(prec, mp::pow_f(&b, 1 - s as i32) / (s - 1));
    let bs = mp::pow_f(&b, -(s as i32));
    sum += Float::with_val(prec, &bs / 2u32);
    let two_pi = Float::with_val(prec, mp::pi(prec) * 2u32);
    let two_pi2 = Float::with_val(prec, two_pi.clone().square());
    let mut rising = Float::with_val(prec, s);
    let mut bpow = Float::with_val(prec, &bs / &b);
    let mut inv = Float::with_val(prec, 1u32 / &two_pi2);
    let tiny = Float::with_val(prec, Float::with_val(prec, 2u32).pow(-(prec as i32) - 8));
    for i in 1..(4 * prec) {
        let z = Float::with_val(prec, Float::zeta_u(2 * i));
        let mut coef = Float::with_val(prec, &z * &inv) * 2u32;
        if i % 2 == 0 {
            coef = -coef;
        }
        let term = Float::with_val(prec, &coef * &rising) * &bpow;
        let done = Float::with_val(prec, term.clone().abs()) < Float::with_val(prec, &tiny * &sum);
        sum += &term;
        if done {
            break;
        }
        rising *= (s + 2 * i - 1) as u64 * (s + 2 * i) as u64;
        bpow /= &b2;
        inv /= &two_pi2;
    }
    sum
}

use rug::ops::Pow;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two_and_four() {
        assert!((zeta_even(1) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta_even(2) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_shift_identity() {
        // ζ(s, a) − ζ(s, a+1) = a^{−s}
        for &(s, a) in &[(2.0, 0.5), (4.0, 3.0), (7.5, 10.25)] {
            let lhs = hurwitz(s, a) - hurwitz(s, a + 1.0);
            let a_: f64 = a;
            assert!((lhs - a_.powf(-s)).abs() < 1e-13 * a_.powf(-s).max(1e-3));
        }
    }

    #[test]
    fn scaled_matches_plain() {
        for &(s, a) in &[(4.0, 7.0), (40.0, 300.0), (12.0, 2.5)] {
            let p = hurwitz(s, a) * a.powf(s);
            assert!((hurwitz_scaled(s, a) - p).abs() < 1e-12 * p);
        }
        assert!(hurwitz_scaled(240.0, 500.0).is_finite());
    }

    #[test]
    fn hurwitz_half_is_odd_zeta() {
        // ζ(2, 1/2) = 3ζ(2) = π²/2
        assert!((hurwitz(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mp_hurwitz_matches_known() {
        let prec = 300;
        let one = Float::with_val(prec, 1);
        let z4 = hurwitz_mp(4, &one, prec);
        let exact = Float::with_val(prec, mp::pi(prec).pow(4u32) / 90u32);
        let err = Float::with_val(prec, z4 - exact).abs().to_f64();
        assert!(err < 1e-85, "{err}");
        let a = Float::with_val(prec, 123);
        let h = hurwitz_mp(40, &a, prec);
        let lead = Float::with_val(prec, &a).pow(-40i32);
        assert!(h > lead);
    }
}
