use super::*;
use crate::heatsim::region_mass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dd(len: f64, count: usize) -> SpectralBasis {
    build_interval_basis(BasisKind::ExactDD, len, count).unwrap()
}

#[test]
fn ray_lengths() {
    let full = ObservationRegion::new(0.0, PI).unwrap();
    assert_eq!(longest_avoiding_ray(&full, PI).unwrap(), 0.0);
    let r = ObservationRegion::new(PI / 3.0, PI / 2.0).unwrap();
    assert!((longest_avoiding_ray(&r, PI).unwrap() - PI).abs() < 1e-15);
    let bad = ObservationRegion::new(1.0, 4.0).unwrap();
    assert!(longest_avoiding_ray(&bad, PI).is_err());
}

#[test]
fn kannai_matches_heat_flow() {
    let b = dd(PI, 8);
    let t = 0.5;
    assert!((kannai_mode(1.0, t) - (-t as f64).exp()).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let u = HeatState::random(&b, 8, &mut rng);
        assert!(kannai_residual(&b, &u, t).unwrap() <= 1e-8);
        // scale invariant
        let r1 = kannai_residual(&b, &u, t).unwrap();
        let r2 = kannai_residual(&b, &u.scaled(-4.0), t).unwrap();
        assert!((r1 - r2).abs() < 1e-14);
    }
    assert!(kannai_residual(&b, &HeatState::mode(&b, 1), 0.0).is_err());
}

#[test]
fn two_end_control_parity_and_bound() {
    let opts = FamilyOptions { moment_modes: 1, ..FamilyOptions::default() };
    let (t, l, m) = (1.0, 1.0, 4);
    // even data: both ends carry the same signal
    let e = two_end_control(&|s: f64| (PI * s / (2.0 * l)).cos(), t, l, m, &opts).unwrap();
    for (a, b) in e.g_minus.samples.iter().zip(&e.g_plus.samples) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    let o = two_end_control(&|s: f64| (PI * s / l).sin(), t, l, m, &opts).unwrap();
    for (a, b) in o.g_minus.samples.iter().zip(&o.g_plus.samples) {
        assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v0 = |s: f64| c[0] * (PI * s / (2.0 * l)).cos() + c[1] * (PI * s / l).sin() + c[2] * (3.0 * PI * s / (2.0 * l)).cos() + c[3] * (2.0 * PI * s / l).sin();
        let r = two_end_control(&v0, t, l, m, &opts).unwrap();
        let bound = std::f64::consts::SQRT_2 * r.d_norm.max(r.n_norm) * r.data_norm;
        assert!(r.cost <= bound * (1.0 + 1e-6), "{} > {}", r.cost, bound);
    }
}

#[test]
fn full_region_single_mode_gramian() {
    let b = dd(PI, 1);
    let full = ObservationRegion::new(0.0, PI).unwrap();
    let s = 2.0;
    let w = wave_hum_control(&b, &full, &HeatState::mode(&b, 1), s, 1).unwrap();
    // ω = 1, M = 1: Gram of (sin u, cos u) over [0, S]
    let ss = s / 2.0 - (2.0 * s).sin() / 4.0;
    let cc = s / 2.0 + (2.0 * s).sin() / 4.0;
    let sc = s.sin().powi(2) / 2.0;
    let det = ss * cc - sc * sc;
    assert!((w.gramian_cond - {
        let tr = ss + cc;
        let d = (tr * tr / 4.0 - det).sqrt();
        (tr / 2.0 + d) / (tr / 2.0 - d)
    })
    .abs()
        < 1e-9 * w.gramian_cond);
    assert!(w.steering_residual < 1e-12);
    // zero data, zero control
    let z = wave_hum_control(&b, &full, &HeatState::zero(&b), s, 1).unwrap();
    assert_eq!(z.f_norm, 0.0);
    assert!(z.adjoint(0.3).iter().all(|p| *p == 0.0));
}

#[test]
fn wave_steering_partial_region() {
    let b = dd(PI, 12);
    let r = ObservationRegion::new(1.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = HeatState::random(&b, 12, &mut rng);
    let w = wave_hum_control(&b, &r, &u0, PI + 0.5, 12).unwrap();
    assert!(w.steering_residual <= 1e-8 * u0.norm(), "{}", w.steering_residual);
    assert!(w.gramian_cond > 1.0);
    // control vanishes off the region
    let f = w.f_field(5, 31);
    for i in 0..5 {
        assert_eq!(f.get2(i, 0), 0.0);
        assert_eq!(f.get2(i, 30), 0.0);
    }
    // time too short for a ray to be seen: the Gramian degenerates
    assert!(matches!(wave_hum_control_with(&b, &r, &u0, 0.05, 12, 1e8), Err(Error::IllConditioned { .. })));
    assert!(wave_hum_control(&b, &r, &u0, 1.0, 13).is_err());
}

#[test]
fn wave_forcing_uses_region_mass() {
    let b = dd(PI, 4);
    let r = ObservationRegion::new(0.5, 2.5).unwrap();
    let w = wave_hum_control(&b, &r, &HeatState::mode(&b, 2), 3.0, 4).unwrap();
    let m = region_mass(&b, &r, 4);
    let p = w.adjoint(1.1);
    let f = w.forcing(1.1);
    for j in 0..4 {
        let want: f64 = (0..4).map(|k| m[j][k] * p[k]).sum();
        assert!((f[j] - want).abs() < 1e-14);
    }
}

#[test]
fn delta_expansion_and_pairing() {
    let opts = FundamentalOptions::default();
    let l = PI / 2.0;
    let v = fundamental_solution(1.0, l, &opts).unwrap();
    // only even functions pair with δ's cosine series: full-interval odd modes vanish
    assert!((v.pairing(&|s: f64| s.cos()) - 1.0).abs() < 1e-2);
    assert!(v.pairing(&|s: f64| s.sin()).abs() < 1e-14);
    assert!((v.pairing(&|s: f64| (s * s).exp().recip()) - 1.0).abs() < 1e-2);
    // ‖v(0)‖ would be infinite, but the space-time norm is finite
    assert!(v.norm.is_finite() && v.norm > 0.0);
    assert_eq!(v.eval(0.0, 0.3), v.eval(0.0, -0.3));
}

#[test]
fn fundamental_solution_is_null_controlled() {
    let v = fundamental_solution(1.0, PI / 2.0, &FundamentalOptions::default()).unwrap();
    assert!(v.terminal_norm <= 1e-3, "{}", v.terminal_norm);
    // boundary value matches the control
    let t = 0.5 * (v.t0 + v.t);
    let g = v.boundary_at(t);
    assert!((v.eval(t, v.l) - g).abs() <= 1e-2 * (1.0 + g.abs()), "{} vs {g}", v.eval(t, v.l));
    assert!((v.eval(t, -v.l) - g).abs() <= 1e-2 * (1.0 + g.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = v.weak_residual(&mut rng, 20);
    assert!(r <= 5e-3, "weak residual {r}");
}

#[test]
fn fundamental_config_errors() {
    let o = FundamentalOptions { eps: 1.2, ..FundamentalOptions::default() };
    assert!(matches!(fundamental_solution(1.0, 1.0, &o), Err(Error::Config(_))));
    let o = FundamentalOptions { eps: 1e-9, ..FundamentalOptions::default() };
    assert!(matches!(fundamental_solution(1.0, 1.0, &o), Err(Error::Config(_))));
    let o = FundamentalOptions { forced_modes: 2, ..FundamentalOptions::default() };
    assert!(matches!(fundamental_solution(0.1, 2.0, &o), Err(Error::Truncation { .. })));
}

#[test]
fn cost_record_fit() {
    let pts: Vec<CostPoint> = [(0.2, 1.0), (0.5, 1.0), (1.0, 1.0)].iter().map(|(t, l)| CostPoint { t: *t, l: *l, norm: 3.0 * (2.0 * l * l / t).exp() }).collect();
    let r = fit_cost_record(&pts).unwrap();
    assert!((r.alpha - 2.0).abs() < 1e-10);
    assert!((r.a - 3.0).abs() < 1e-8);
    assert!(fit_cost_record(&pts[..1]).is_err());
}

#[test]
fn transmutation_of_one_mode() {
    let l = 2.2;
    let b = dd(PI, 12);
    let r = ObservationRegion::new(1.0, 2.2).unwrap();
    let u0 = HeatState::mode(&b, 1);
    let wave = wave_hum_control(&b, &r, &u0, l, 12).unwrap();
    let v = fundamental_solution(0.5, l, &FundamentalOptions::default()).unwrap();
    let tr = transmute_control(&v, &wave).unwrap();
    for e in tr.initial_error.iter().take(8) {
        assert!(e.abs() <= 1e-2);
    }
    assert!(tr.terminal_transmuted.iter().all(|x| x.abs() <= 1e-6));
    assert!(tr.initial_residual() <= 1e-2);
    assert!(tr.terminal_residual() <= 1e-3);
    assert!(tr.cost_consistent(1e-6));
    let w2 = wave_hum_control(&b, &r, &u0, 2.0, 12).unwrap();
    assert!(matches!(transmute_control(&v, &w2), Err(Error::Config(_))));
}

#[test]
fn gaussian_kernel_transmutes_cosine_mode() {
    // uncontrolled v = heat kernel on the line, w(s) = cos(ωs)·e_j: u(t) = e^{−ω²t}e_j
    for (omega, t) in [(1.0, 0.5), (3.0, 0.1), (5.0, 0.05)] {
        let smax = (4.0 * t * 40.0f64).sqrt();
        let n = 4000;
        let h = 2.0 * smax / n as f64;
        let mut u = 0.0;
        for i in 0..=n {
            let s = -smax + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            u += w * (-s * s / (4.0 * t)).exp() / (4.0 * PI * t).sqrt() * (omega * s).cos();
        }
        u *= h;
        assert!((u - (-omega * omega * t).exp()).abs() < 1e-10, "ω={omega} t={t}");
    }
}
