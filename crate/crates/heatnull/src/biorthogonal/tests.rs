use super::*;
use crate::spectral::{build_interval_basis, BasisKind};

fn dd_pi(count: usize) -> SpectralBasis {
    build_interval_basis(BasisKind::ExactDD, PI, count).unwrap()
}

fn max_off_identity(b: &[Vec<f64>]) -> f64 {
    let mut e: f64 = 0.0;
    for (n, row) in b.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            e = e.max((v - if n == k { 1.0 } else { 0.0 }).abs());
        }
    }
    e
}

fn multiplier(t: f64, count: usize) -> (SpectralBasis, BiorthogonalFamily) {
    let b = dd_pi(40);
    let (red, sched) = reduce_to_canonical(&b, t);
    let fam = multiplier_family(&red, sched, count, &FamilyOptions::default()).unwrap();
    (b, fam)
}

#[test]
fn gram_single_exponential() {
    let fam = gram_minimal_family(&[1.0], 1, 2.0).unwrap();
    assert!((fam.norms[0] - 1.0 / 2f64.sinh().sqrt()).abs() < 1e-14);
    assert!((fam.norms[0] - 0.52510).abs() < 2e-5);
    let b = biorthogonality_matrix(&fam, 1);
    assert!((b[0][0] - 1.0).abs() < 1e-15);
    let s = fam.signal(1, 4001);
    assert!((control_cost(&s) - 0.52510).abs() < 2e-5);
    // any single exponent: B = [1]
    for l in [0.3, 9.0, 150.0] {
        let f = gram_minimal_family(&[l], 1, 0.7).unwrap();
        assert!((biorthogonality_matrix(&f, 1)[0][0] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn gram_two_exponentials() {
    let fam = gram_minimal_family(&[1.0, 4.0], 2, 2.0).unwrap();
    assert!(max_off_identity(&biorthogonality_matrix(&fam, 2)) < 1e-10);
    // explicit 2×2 inverse
    let g = |s: f64| 2.0 * s.sinh() / s;
    let (a, b, c) = (g(2.0), g(5.0), g(8.0));
    let det = a * c - b * b;
    assert!((fam.norms[0] - (c / det).sqrt()).abs() < 1e-12 * fam.norms[0]);
    assert!((fam.norms[1] - (a / det).sqrt()).abs() < 1e-12 * fam.norms[1]);
    let one = gram_minimal_family(&[1.0], 1, 2.0).unwrap();
    let four = gram_minimal_family(&[4.0], 1, 2.0).unwrap();
    assert!(fam.norms[0] > one.norms[0]);
    assert!(fam.norms[1] > four.norms[0]);
}

#[test]
fn gram_rejects_bad_input() {
    assert!(matches!(gram_minimal_family(&[1.0, 1.0], 2, 1.0), Err(Error::Precondition(_))));
    let lam: Vec<f64> = (1..=10).map(|k| (k * k) as f64).collect();
    let r = gram_family_with(&lam, 10, ReductionSchedule::identity(1.0), 5.0);
    match r {
        Err(Error::IllConditioned { log10_cond }) => assert!(log10_cond > 5.0),
        other => panic!("expected ill-conditioning, got {other:?}"),
    }
}

#[test]
fn multiplier_family_is_biorthogonal() {
    let (_, fam) = multiplier(1.0, 6);
    let b = biorthogonality_matrix(&fam, 6);
    assert!(max_off_identity(&b) < 1e-12, "{b:?}");
    assert!(fam.is_multiplier());
    assert_eq!(fam.window, (-0.5, 0.5));
}

#[test]
fn plancherel_time_against_frequency() {
    let (_, fam) = multiplier(1.0, 3);
    for n in 1..=3 {
        let s = fam.signal(n, 0);
        let q = s.quadrature_norm();
        assert!((q - fam.norms[n - 1]).abs() < 1e-3 * fam.norms[n - 1], "n={n}: {q} vs {}", fam.norms[n - 1]);
    }
}

#[test]
fn forward_transform_reproduces_g() {
    let (b, fam) = multiplier(2.0, 2);
    let (red, _) = reduce_to_canonical(&b, 2.0);
    let spec = fam.diagnostics.multiplier.unwrap();
    for n in 1..=2 {
        let ev = GnEvaluator::new(&red, spec, n, 1e-12).unwrap();
        for i in 0..50 {
            let x = 0.37 + 4.1 * i as f64;
            let (re, im) = fam.forward(n, x);
            let want = ev.log_g(x).to_c64();
            let d = (Complex64::new(re, im) - want).norm();
            assert!(d <= 1e-3 * want.norm(), "n={n} x={x}: {re},{im} vs {want}");
        }
    }
}

#[test]
fn gram_norms_below_multiplier_norms() {
    let (b, fam) = multiplier(1.0, 6);
    let (red, sched) = reduce_to_canonical(&b, 1.0);
    for big_n in 1..=6 {
        let g = gram_family_with(&red.lambdas, big_n, sched, 2400.0).unwrap();
        for n in 0..big_n {
            assert!(g.norms[n] <= fam.norms[n] * (1.0 + 1e-9), "N={big_n} n={n}");
        }
    }
}

#[test]
fn zero_state_gives_zero_control() {
    let b = dd_pi(8);
    let (red, sched) = reduce_to_canonical(&b, 1.0);
    let fam = gram_family_with(&red.lambdas, 4, sched, 2400.0).unwrap();
    let out = assemble_control(&b, &HeatState::zero(&b), &fam, 1.0).unwrap();
    assert_eq!(out.terms, 0);
    assert_eq!(control_cost(&out.signal), 0.0);
    assert!(out.signal.samples.iter().all(|v| *v == 0.0));
}

#[test]
fn single_term_closed_form() {
    let b = dd_pi(8);
    let t = 2.0;
    let (red, sched) = reduce_to_canonical(&b, t);
    let fam = gram_family_with(&red.lambdas, 1, sched, 2400.0).unwrap();
    let out = assemble_control(&b, &HeatState::mode(&b, 1), &fam, t).unwrap();
    let want = (1.0 / red.traces[0]).abs() * (-red.lambdas[0] * t / 2.0).exp() * fam.norms[0];
    assert!((out.ln_cost - want.ln()).abs() < 1e-12);
    assert!((control_cost(&out.signal) - want).abs() < 1e-4 * want);
}

#[test]
fn assembled_control_solves_moments() {
    let b = dd_pi(12);
    let t = 1.0;
    let (red, sched) = reduce_to_canonical(&b, t);
    let fam = multiplier_family(&red, sched, 6, &FamilyOptions::default()).unwrap();
    let u0 = HeatState::new(vec![1.0, -0.5, 0.25, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &b);
    let out = assemble_control(&b, &u0, &fam, t).unwrap();
    assert_eq!(out.terms, 5);
    let ex = out.signal.exact.clone().unwrap();
    let w = ex.sum.window(-t / 2.0, t / 2.0);
    for n in 1..=5 {
        let l = red.lambdas[n - 1];
        // γ_n ∫ e^{−λ_n(T/2−t)} g(t) dt = −e^{−λ_n T} c_n
        let m = ex.sum.integral_exp(&w, &Float::with_val(fam.prec, l)).to_f64();
        let lhs = red.traces[n - 1] * (-l * t / 2.0).exp() * m;
        let rhs = -(-l * t).exp() * u0.coeffs[n - 1];
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "n={n}: {lhs} vs {rhs}");
    }
    // cost by Plancherel agrees with time quadrature
    assert!((control_cost(&out.signal).ln() - out.ln_cost).abs() < 1e-3);
}

#[test]
fn truncation_reported_for_unresolved_modes() {
    let b = dd_pi(8);
    let (red, sched) = reduce_to_canonical(&b, 1.0);
    let fam = gram_family_with(&red.lambdas, 2, sched, 2400.0).unwrap();
    let r = assemble_control(&b, &HeatState::mode(&b, 3), &fam, 1.0);
    assert!(matches!(r, Err(Error::Truncation { .. })));
}

#[test]
fn manifest_round_trip() {
    let fam = gram_minimal_family(&[1.0, 4.0], 2, 2.0).unwrap();
    let dir = std::env::temp_dir().join(format!("heatnull-manifest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("family.json");
    fam.write_manifest(&p).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["kind"], "gram");
    assert_eq!(v["lambdas"][1], 4.0);
    std::fs::remove_dir_all(&dir).ok();
}
