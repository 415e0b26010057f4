//! Multiprecision evaluation of f and M where the time-side sums cancel
//! through magnitudes far beyond f64 (frequency grids, normalizers).

use super::multiplier::MultiplierSpec;
use super::product::ZeroProduct;
use crate::mp::{self, MpC};
use rug::ops::Pow;
use rug::{Assign, Float};

fn p_base(base_nu: f64, y: &MpC) -> MpC {
    let prec = y.prec();
    let w = y.sqrt().scale(&mp::pi(prec));
    if base_nu == 0.0 {
        if w.re.is_zero() && w.im.is_zero() {
            return MpC::one(prec);
        }
        w.sin().div(&w)
    } else {
        w.cos()
    }
}

fn one_minus(z: &MpC, l: &Float) -> MpC {
    let prec = z.prec();
    let inv = Float::with_val(prec, 1u32 / l);
    MpC::one(prec).sub(&z.scale(&inv))
}

fn q_model(prod: &ZeroProduct, y: &MpC) -> MpC {
    let prec = y.prec();
    let nb = prod.base_nu();
    let near = prod.nearest_base(num_complex::Complex64::new(y.re.to_f64(), y.im.to_f64()));
    let mut out = match near {
        Some(j) => {
            let m = Float::with_val(prec, Float::with_val(prec, j) + nb);
            let m2 = Float::with_val(prec, m.square_ref());
            let w = y.sqrt();
            let wm = MpC::from_parts(Float::with_val(prec, &w.re + &m), w.im.clone());
            let delta = MpC::from_parts(Float::with_val(prec, &y.re - &m2), y.im.clone());
            let u = delta.div(&wm).scale(&mp::pi(prec));
            let sinc = if u.re.is_zero() && u.im.is_zero() { MpC::one(prec) } else { u.sin().div(&u) };
            let mag = if nb == 0.0 { MpC::real(m2).div(&w.mul(&wm)) } else { MpC::real(Float::with_val(prec, &m2 * mp::pi(prec))).div(&wm) };
            let v = mag.mul(&sinc);
            if j % 2 == 1 {
                v
            } else {
                v.neg()
            }
        }
        None => p_base(nb, y),
    };
    let mut den = MpC::one(prec);
    for j in 1..=prod.covered() {
        if Some(j) == near {
            continue;
        }
        let m = Float::with_val(prec, Float::with_val(prec, j) + nb);
        let m2 = Float::with_val(prec, m.square_ref());
        den = den.mul(&one_minus(y, &m2));
    }
    out = out.div(&den);
    out
}

fn to_y(prod: &ZeroProduct, z: &MpC) -> MpC {
    let prec = z.prec();
    let sc = Float::with_val(prec, prod.model.scale);
    let sh = Float::with_val(prec, prod.model.shift);
    let re = Float::with_val(prec, &z.re - &sh) / &sc;
    let im = Float::with_val(prec, &z.im / &sc);
    MpC::from_parts(re, im)
}

fn y0(prod: &ZeroProduct, prec: u32) -> MpC {
    let v = Float::with_val(prec, -Float::with_val(prec, prod.model.shift) / Float::with_val(prec, prod.model.scale));
    MpC::real(v)
}

/// f(z) = Π_k (1 − z/λ_k).
pub fn mp_f(prod: &ZeroProduct, z: &MpC) -> MpC {
    let prec = z.prec();
    let y = to_y(prod, z);
    if prod.model.exact {
        let mut v = p_base(prod.base_nu(), &y);
        if prod.model.shift != 0.0 {
            v = v.div(&p_base(prod.base_nu(), &y0(prod, prec)));
        }
        return v;
    }
    let mut v = MpC::one(prec);
    for &l in &prod.lambdas {
        v = v.mul(&one_minus(z, &Float::with_val(prec, l)));
    }
    v.mul(&q_model(prod, &y)).div(&q_model(prod, &y0(prod, prec)))
}

/// f_n(λ_n), consistent with `mp_f` divided by (1 − z/λ_n) in the limit.
pub fn mp_f_n_own(prod: &ZeroProduct, n: usize, prec: u32) -> Float {
    let sc = Float::with_val(prec, prod.model.scale);
    if prod.model.exact {
        let m = Float::with_val(prec, Float::with_val(prec, n) + prod.model.nu);
        let y = Float::with_val(prec, m.square_ref());
        let lam = Float::with_val(prec, &y * &sc) + prod.model.shift;
        let sign: i32 = if n % 2 == 1 { 1 } else { -1 };
        let mut val = if prod.model.nu == 0.0 {
            Float::with_val(prec, &lam / (Float::with_val(prec, &y * &sc) * 2u32))
        } else {
            Float::with_val(prec, mp::pi(prec) * &lam) / (Float::with_val(prec, &m * &sc) * 2u32)
        };
        val *= sign;
        if prod.model.shift != 0.0 {
            let p0 = p_base(prod.base_nu(), &y0(prod, prec));
            val /= &p0.re;
        }
        return val;
    }
    let ln = Float::with_val(prec, prod.lambda(n));
    let mut v = Float::with_val(prec, 1u32);
    for (k, &l) in prod.lambdas.iter().enumerate() {
        if k + 1 != n {
            v *= Float::with_val(prec, 1u32 - Float::with_val(prec, &ln / l));
        }
    }
    let y = to_y(prod, &MpC::real(ln));
    let q = q_model(prod, &y).div(&q_model(prod, &y0(prod, prec)));
    v * q.re
}

fn lnsinc_coeffs_mp(count: usize, prec: u32) -> Vec<Float> {
    let pi2 = Float::with_val(prec, mp::pi(prec).square());
    let mut pk = Float::with_val(prec, 1u32);
    (1..=count as u32)
        .map(|k| {
            pk *= &pi2;
            Float::with_val(prec, Float::zeta_u(2 * k)) / (Float::with_val(prec, &pk * k))
        })
        .collect()
}

/// Σ_{m ≥ m_t} ln sinc(θ_m) with θ_m² = w/m⁴ (w = (xA²)² on the real axis,
/// −(yA²)² on the imaginary one), for a batch sorted by decreasing m_t.
/// Each entry is (m_t, w); the ζ(4k, m_t) table is swept downward once.
fn lattice_tails(batch: &[(usize, Float)], prec: u32, kmax: usize) -> Vec<Float> {
    if batch.is_empty() {
        return Vec::new();
    }
    let coeffs = lnsinc_coeffs_mp(kmax, prec);
    let m_hi = batch[0].0;
    let a = Float::with_val(prec, m_hi);
    let mut z: Vec<Float> = (1..=kmax).map(|k| crate::special::hurwitz_mp(4 * k as u32, &a, prec)).collect();
    let mut cur = m_hi;
    let mut out = Vec::with_capacity(batch.len());
    for (mt, w) in batch {
        assert!(*mt <= cur);
        while cur > *mt {
            cur -= 1;
            let q = Float::with_val(prec, Float::with_val(prec, cur).pow(-4i32));
            let mut qk = q.clone();
            for zk in z.iter_mut() {
                *zk += &qk;
                qk *= &q;
            }
        }
        let mut wk = Float::with_val(prec, 1u32);
        let mut s = Float::new(prec);
        for (c, zk) in coeffs.iter().zip(&z) {
            wk *= w;
            s -= Float::with_val(prec, c * &wk) * zk;
        }
        out.push(s);
    }
    out
}

const DELTA: f64 = 0.5;

fn tail_terms(prec: u32) -> usize {
    // (δ/π)^{2k} per term
    let per = 2.0 * (std::f64::consts::PI / DELTA).log2();
    (prec as f64 / per).ceil() as usize + 4
}

fn split_index(spec: &MultiplierSpec, x: f64) -> usize {
    let m = (spec.slope * (x / DELTA).sqrt()).ceil() as usize;
    m.max(spec.m_first() - 1)
}

/// M(x_m) for x_m = m·h, m = 0..=count−1, exactly on the MP grid. Real valued.
pub fn mp_multiplier_real_grid(spec: &MultiplierSpec, h: &Float, count: usize, prec: u32) -> Vec<Float> {
    let wprec = prec + 64;
    let h = Float::with_val(wprec, h);
    let xs: Vec<Float> = (0..count).map(|m| Float::with_val(wprec, &h * m as u64)).collect();
    let hf = h.to_f64();
    // direct lattice factors: zero j acts on m with x_m ≥ δ a_j
    let stops: Vec<usize> = (0..count).map(|m| split_index(spec, m as f64 * hf)).collect();
    let m0 = spec.m_first();
    let mut prod: Vec<Float> = vec![Float::with_val(wprec, 1u32); count];
    let j_max = *stops.last().unwrap_or(&0);
    let mut first = 0usize;
    for j in m0..=j_max {
        while first < count && stops[first] < j {
            first += 1;
        }
        if first >= count {
            break;
        }
        let a = Float::with_val(wprec, Float::with_val(wprec, j) / spec.slope).square();
        sine_sweep(&mut prod, &h, &a, first);
    }
    // denominators Π_j (x_m/a_j) over the direct lattice zeros
    let mut num = Float::with_val(wprec, 1u32);
    let mut upto = m0 - 1;
    for m in 1..count {
        while upto < stops[m] {
            upto += 1;
            num *= Float::with_val(wprec, Float::with_val(wprec, upto) / spec.slope).square();
        }
        let j = (stops[m] + 1 - m0) as u32;
        if j > 0 {
            let den = Float::with_val(wprec, (&xs[m]).pow(j));
            prod[m] *= &num;
            prod[m] /= den;
        }
    }
    // repeated block at a0
    let a0 = Float::with_val(wprec, spec.a0);
    let mut block: Vec<Float> = vec![Float::with_val(wprec, 1u32); count];
    sine_sweep(&mut block, &h, &a0, 1);
    for m in 1..count {
        let r = Float::with_val(wprec, &a0 / &xs[m]);
        block[m] *= r;
        let b = Float::with_val(wprec, (&block[m]).pow(spec.k_rep as u32));
        prod[m] *= b;
    }
    // tail series, swept from the largest split downward
    let kmax = tail_terms(wprec);
    // A² in MP: the tail zeros must be exactly the direct ones
    let a2 = Float::with_val(wprec, Float::with_val(wprec, spec.slope).square_ref());
    let batch: Vec<(usize, Float)> = (1..count)
        .rev()
        .map(|m| {
            let w = Float::with_val(wprec, &xs[m] * &a2).square();
            (stops[m] + 1, w)
        })
        .collect();
    let tails = lattice_tails(&batch, wprec, kmax);
    let mut out = vec![Float::with_val(prec, 1u32); count];
    for (i, t) in tails.into_iter().enumerate() {
        let m = count - 1 - i;
        out[m] = Float::with_val(prec, &prod[m] * t.exp());
    }
    out
}

/// prod[m] *= sin(x_m/a) for m ≥ first via the three-term sine recurrence.
fn sine_sweep(prod: &mut [Float], h: &Float, a: &Float, first: usize) {
    let prec = h.prec();
    let count = prod.len();
    let start = first.max(1);
    if start >= count {
        return;
    }
    let th = Float::with_val(prec, h / a);
    let two_c = Float::with_val(prec, th.clone().cos() * 2u32);
    let mut s_prev = Float::with_val(prec, &th * (start - 1) as u64).sin();
    let mut s_cur = Float::with_val(prec, &th * start as u64).sin();
    let mut tmp = Float::new(prec);
    for p in prod.iter_mut().skip(start) {
        *p *= &s_cur;
        tmp.assign(&two_c * &s_cur);
        tmp -= &s_prev;
        std::mem::swap(&mut s_prev, &mut s_cur);
        std::mem::swap(&mut s_cur, &mut tmp);
    }
}

/// M(iy) for real y ≥ 0 (real, ≥ 1).
pub fn mp_multiplier_imag(spec: &MultiplierSpec, ys: &[f64], prec: u32) -> Vec<Float> {
    let wprec = prec + 32;
    let mut order: Vec<usize> = (0..ys.len()).collect();
    order.sort_by(|&a, &b| ys[b].abs().partial_cmp(&ys[a].abs()).unwrap());
    let a2 = Float::with_val(wprec, Float::with_val(wprec, spec.slope).square_ref());
    let mut direct = vec![Float::with_val(wprec, 1u32); ys.len()];
    let mut batch = Vec::with_capacity(ys.len());
    for &i in &order {
        let y = Float::with_val(wprec, ys[i].abs());
        if y.is_zero() {
            batch.push((spec.m_first(), Float::new(wprec)));
            continue;
        }
        let sinhc = |a: &Float| {
            let t = Float::with_val(wprec, &y / a);
            Float::with_val(wprec, t.clone().sinh() / t)
        };
        let a0 = Float::with_val(wprec, spec.a0);
        let mut v = Float::with_val(wprec, sinhc(&a0).pow(spec.k_rep as u32));
        let stop = split_index(spec, ys[i].abs());
        for j in spec.m_first()..=stop {
            let a = Float::with_val(wprec, Float::with_val(wprec, j) / spec.slope).square();
            v *= sinhc(&a);
        }
        direct[i] = v;
        let w = -Float::with_val(wprec, &y * &a2).square();
        batch.push((stop + 1, w));
    }
    let tails = lattice_tails(&batch, wprec, tail_terms(wprec));
    let mut out = vec![Float::new(prec); ys.len()];
    for (t, &i) in tails.into_iter().zip(&order) {
        out[i] = Float::with_val(prec, &direct[i] * t.exp());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::logc::LogComplex;
    use super::super::multiplier::log_m;
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn grid_multiplier_matches_f64() {
        let spec = MultiplierSpec::new(std::f64::consts::PI + 0.6, 0.8).unwrap();
        let prec = 200;
        let h = Float::with_val(prec, 0.37);
        let vals = mp_multiplier_real_grid(&spec, &h, 3000, prec);
        for &m in &[0usize, 1, 7, 150, 999, 2999] {
            let x = 0.37 * m as f64;
            let f = log_m(&spec, Complex64::new(x, 0.0), 1e-15);
            let v = &vals[m];
            let lm = if v.is_zero() { f64::NEG_INFINITY } else { Float::with_val(prec, v.abs_ref()).ln().to_f64() };
            assert!((lm - f.logmag).abs() < 1e-9 * f.logmag.abs().max(1.0), "m={m}: {lm} vs {}", f.logmag);
            let sign = if v.is_sign_negative() { std::f64::consts::PI } else { 0.0 };
            assert!(((f.phase.abs() - sign).abs()) < 1e-6);
        }
    }

    #[test]
    fn imag_multiplier_matches_f64() {
        let spec = MultiplierSpec::new(std::f64::consts::PI + 0.6, 0.5).unwrap();
        let ys = [0.0, 1.0, 16.0, 400.0, 3.3];
        let vals = mp_multiplier_imag(&spec, &ys, 256);
        for (y, v) in ys.iter().zip(&vals) {
            let f = log_m(&spec, Complex64::new(0.0, *y), 1e-15);
            let lm = v.clone().ln().to_f64();
            assert!((lm - f.logmag).abs() < 1e-10 * f.logmag.max(1.0));
        }
    }

    #[test]
    fn f_and_own_value_agree_with_f64() {
        let p = ZeroProduct::squares(20, false);
        let prec = 200;
        let z = MpC::from_f64(prec, 0.0, -35.0);
        let v = mp_f(&p, &z);
        let f = p.ln_f(Complex64::new(0.0, -35.0));
        assert!((v.ln_abs() - f.logmag).abs() < 1e-12);
        let own = mp_f_n_own(&p, 3, prec).to_f64();
        let g = p.ln_f_n_own(3).to_c64().re;
        assert!((own - g).abs() < 1e-13);
        // numeric-model branch
        let mut q = ZeroProduct::squares(12, true);
        q.model.exact = false;
        let own_q = mp_f_n_own(&q, 4, prec).to_f64();
        let exact = ZeroProduct::squares(12, true).ln_f_n_own(4).to_c64().re;
        assert!((own_q - exact).abs() < 1e-12 * exact.abs());
        let _ = LogComplex::ONE;
    }
}
