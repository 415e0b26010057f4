use super::*;
use crate::biorthogonal::{assemble_control, multiplier_family, FamilyOptions};
use crate::spectral::{build_interval_basis, BasisKind};
use proptest::prelude::*;
use std::f64::consts::PI;

fn dd(count: usize) -> SpectralBasis {
    build_interval_basis(BasisKind::ExactDD, PI, count).unwrap()
}

#[test]
fn free_evolution_is_diagonal_decay() {
    let b = dd(6);
    let u = HeatState::new(vec![1.0, -2.0, 0.5, 0.0, 0.0, 3.0], &b);
    assert_eq!(evolve_free(&b, &u, 0.0).unwrap(), u);
    let v = evolve_free(&b, &HeatState::mode(&b, 1), 0.7).unwrap();
    assert!((v.coeffs[0] - (-0.7f64).exp()).abs() < 1e-15);
    assert!(evolve_free(&b, &u, 0.3).unwrap().norm() <= u.norm());
    assert!(evolve_free(&b, &u, -0.1).is_err());
}

#[test]
fn constant_control_closed_form() {
    let b = dd(3);
    let t = 0.8;
    let g = ControlSignal::from_fn((0.0, t), 401, |_| 1.0);
    let u0 = HeatState::mode(&b, 1);
    let tr = simulate_boundary_control(&b, &u0, &g, t).unwrap();
    for j in 0..3 {
        let l = b.lambdas[j];
        let want = (-l * t).exp() * u0.coeffs[j] + b.traces[j] * (1.0 - (-l * t).exp()) / l;
        assert!((tr.terminal().coeffs[j] - want).abs() < 1e-13, "j={j}");
    }
    // g = 0: pure decay
    let z = ControlSignal::zero((0.0, t), 11);
    let tr = simulate_boundary_control(&b, &u0, &z, t).unwrap();
    assert!((tr.terminal().coeffs[0] - (-t as f64).exp()).abs() < 1e-15);
    // window mismatch
    let g = ControlSignal::from_fn((0.0, 0.5), 11, |_| 1.0);
    assert!(matches!(simulate_boundary_control(&b, &u0, &g, t), Err(Error::Config(_))));
}

#[test]
fn linear_control_integrates_exactly() {
    let b = dd(4);
    let t = 1.3;
    let g = ControlSignal::from_fn((0.0, t), 7, |s| 2.0 - s);
    let tr = simulate_boundary_control(&b, &HeatState::zero(&b), &g, t).unwrap();
    for j in 0..4 {
        let l = b.lambdas[j];
        // ∫ e^{−λ(T−s)}(2−s) ds
        let e = (-l * t).exp();
        let want = b.traces[j] * ((2.0 - t) / l + 1.0 / (l * l) - e * (2.0 / l + 1.0 / (l * l)));
        assert!((tr.terminal().coeffs[j] - want).abs() < 1e-13);
    }
}

#[test]
fn assembled_null_control_steers_to_zero() {
    let b = dd(16);
    let t = 1.0;
    let (red, sched) = reduce_to_canonical(&b, t);
    let fam = multiplier_family(&red, sched, 10, &FamilyOptions::default()).unwrap();
    for u0 in [HeatState::mode(&b, 1), HeatState::new((0..16).map(|j| if j < 10 { 1.0 / (j + 1) as f64 } else { 0.0 }).collect(), &b)] {
        let out = assemble_control(&b, &u0, &fam, t).unwrap();
        let tr = simulate_boundary_control(&b, &u0, &out.signal, t).unwrap();
        assert!(tr.terminal_exact);
        for j in 0..10 {
            assert!(tr.terminal().coeffs[j].abs() <= 1e-3 * u0.norm(), "j={j}: {}", tr.terminal().coeffs[j]);
        }
        assert!(tr.terminal().norm() <= 1e-3 * u0.norm());
    }
}

#[test]
fn interior_forcing_on_full_interval() {
    let b = dd(5);
    let t = 0.6;
    let f = Grid::from_fn2(crate::io::Axis::spanning(0.0, t, 61), crate::io::Axis::spanning(0.0, PI, 801), |_, x| b.eval(1, x));
    let tr = simulate_interior_control(&b, &HeatState::zero(&b), &f, t).unwrap();
    let want = (1.0 - (-t as f64).exp()) / 1.0;
    assert!((tr.terminal().coeffs[0] - want).abs() < 1e-5);
    for j in 1..5 {
        assert!(tr.terminal().coeffs[j].abs() < 1e-5);
    }
    let z = Grid::from_fn2(crate::io::Axis::spanning(0.0, t, 3), crate::io::Axis::spanning(1.0, 2.0, 5), |_, _| 0.0);
    let tr = simulate_interior_control(&b, &HeatState::mode(&b, 2), &z, t).unwrap();
    assert!((tr.terminal().coeffs[1] - (-4.0 * t).exp()).abs() < 1e-14);
}

#[test]
fn kernel_examples() {
    let b = dd(80);
    let k = heat_kernel_eval(&b, 6.0, PI / 2.0, PI / 2.0).unwrap();
    assert!((k.value / (2.0 / PI * (-6.0f64).exp()) - 1.0).abs() < 1e-6);
    let (x, y) = (0.4, 2.1);
    assert_eq!(heat_kernel_eval(&b, 0.1, x, y).unwrap().value, heat_kernel_eval(&b, 0.1, y, x).unwrap().value);
    // semigroup on e_1
    let t = 0.2;
    let rule = Rule::composite(0.0, PI, 40, 12);
    let v = rule.integrate(|s| heat_kernel_eval(&b, t, x, s).unwrap().value * b.eval(1, s));
    assert!((v - (-t as f64).exp() * b.eval(1, x)).abs() < 1e-9);
    assert!(matches!(heat_kernel_eval(&dd(5), 1e-3, x, y), Err(Error::Truncation { .. })));
    assert!(heat_kernel_eval(&b, 0.0, x, y).is_err());
}

#[test]
fn kernel_is_positive_inside() {
    let b = dd(80);
    for t in [0.05, 0.2, 1.0] {
        for i in 1..40 {
            for j in 1..40 {
                let (x, y) = (PI * i as f64 / 40.0, PI * j as f64 / 40.0);
                let k = heat_kernel_eval(&b, t, x, y).unwrap();
                // far apart the kernel drops below the rounding level of the sum
                assert!(k.value > -k.error_bound, "t={t} x={x} y={y}");
                if (x - y).abs() <= 1.0 {
                    assert!(k.value > k.error_bound);
                }
            }
        }
    }
}

#[test]
fn quotient_full_region_closed_form() {
    let b = dd(4);
    let t = 0.9;
    let full = ObservationRegion::new(0.0, PI).unwrap();
    let u0 = HeatState::mode(&b, 1);
    let tr = free_trajectory(&b, &u0, t, 5).unwrap();
    let q = observability_quotient(&b, &tr, &full, t).unwrap();
    let want = (-t as f64).exp() / ((1.0 - (-2.0 * t as f64).exp()) / 2.0).sqrt();
    assert!((q - want).abs() < 1e-13);
    let tr3 = free_trajectory(&b, &u0.scaled(-3.5), t, 5).unwrap();
    assert!((observability_quotient(&b, &tr3, &full, t).unwrap() - q).abs() < 1e-13);
    let z = free_trajectory(&b, &HeatState::zero(&b), t, 3).unwrap();
    assert!(matches!(observability_quotient(&b, &z, &full, t), Err(Error::Degenerate(_))));
}

#[test]
fn mass_matrix_matches_quadrature() {
    for kind in [BasisKind::ExactDD, BasisKind::ExactND] {
        let b = build_interval_basis(kind, 2.5, 6).unwrap();
        let r = ObservationRegion::new(0.3, 1.7).unwrap();
        let m = region_mass(&b, &r, 6);
        let rule = Rule::composite(0.3, 1.7, 20, 10);
        for j in 1..=6 {
            for k in 1..=6 {
                let q = rule.integrate(|x| b.eval(j, x) * b.eval(k, x));
                assert!((m[j - 1][k - 1] - q).abs() < 1e-13, "{kind:?} {j} {k}");
            }
        }
        let mp = region_mass_mp(&b, &r, 6, 128);
        assert!((mp[2][4].to_f64() - m[2][4]).abs() < 1e-14);
    }
}

#[test]
fn lower_bound_geometry_and_preconditions() {
    let b = dd(200);
    let r = ObservationRegion::new(PI / 2.0 - 0.3, PI / 2.0 + 0.3).unwrap();
    assert!((r.distance(0.0) - 1.2708).abs() < 1e-4);
    assert!((r.distance(0.0).powi(2) / 4.0 - 0.4037).abs() < 1e-4);
    assert!(matches!(lower_bound_experiment(&b, &r, PI / 2.0, 0.2, 0.1), Err(Error::Precondition(_))));
    assert!(matches!(lower_bound_experiment(&b, &r, r.a, 0.2, 0.1), Err(Error::Precondition(_))));
    assert!(matches!(lower_bound_experiment(&dd(10), &r, 0.05, 0.2, 0.01), Err(Error::Truncation { .. })));
    let rep = lower_bound_experiment(&b, &r, 0.05, default_lower_eps(r.distance(0.05)), 0.1).unwrap();
    assert!(rep.q > 0.0 && rep.q < 1.0);
    let v = serde_json::to_value(&rep).unwrap();
    for k in ["T", "q", "minus_T_ln_q", "d_squared_over_4"] {
        assert!(v.get(k).is_some(), "{k}");
    }
}

#[test]
fn lower_bound_sandwich_with_fitted_constant() {
    let b = dd(400);
    let r = ObservationRegion::new(PI / 2.0 - 0.3, PI / 2.0 + 0.3).unwrap();
    let y = 0.05;
    let d = r.distance(y);
    let eps = default_lower_eps(d);
    let alpha = 0.7 * d * d / 4.0;
    let ts = [0.2, 0.15, 0.1, 0.07, 0.05];
    let reps: Vec<_> = ts.iter().map(|t| lower_bound_experiment(&b, &r, y, eps, *t).unwrap()).collect();
    // A fitted once at the largest T
    let a = reps[0].q * (alpha / ts[0]).exp();
    for (t, rep) in ts.iter().zip(&reps) {
        assert!(rep.q <= a * (-alpha / t).exp() * (1.0 + 1e-9), "T={t}: q={}", rep.q);
    }
}

#[test]
fn trajectory_csv_layout() {
    let b = dd(3);
    let tr = free_trajectory(&b, &HeatState::mode(&b, 2), 1.0, 4).unwrap();
    let p = std::env::temp_dir().join(format!("heatnull-traj-{}.csv", std::process::id()));
    tr.write_csv(&p).unwrap();
    let s = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<_> = s.lines().collect();
    assert_eq!(lines[0], "t,mode1,mode2,mode3,norm");
    assert_eq!(lines.len(), 5);
    std::fs::remove_file(&p).ok();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_evolution_contracts(c in proptest::collection::vec(-5.0f64..5.0, 8), dt in 0.0f64..3.0) {
        let b = dd(8);
        let u = HeatState::new(c, &b);
        let v = evolve_free(&b, &u, dt).unwrap();
        prop_assert!(v.norm() <= u.norm() * (1.0 + 1e-15));
        // semigroup
        let w = evolve_free(&b, &evolve_free(&b, &u, dt / 2.0).unwrap(), dt / 2.0).unwrap();
        for (x, y) in v.coeffs.iter().zip(&w.coeffs) {
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn kernel_symmetric(t in 0.05f64..2.0, x in 0.0f64..PI, y in 0.0f64..PI) {
        let b = dd(80);
        prop_assert_eq!(heat_kernel_eval(&b, t, x, y).unwrap().value, heat_kernel_eval(&b, t, y, x).unwrap().value);
    }
}
