use super::*;

#[test]
fn config_validation() {
    assert!(matches!(ExperimentConfig::from_json_str("{ \"T_grid\": [0.5], \"bogus\": 1 }"), Err(Error::Usage(_))));
    match ExperimentConfig::from_json_str("{\n \"T_grid\": [0.5,\n }") {
        Err(Error::Usage(m)) => assert!(m.contains("line 3"), "{m}"),
        other => panic!("{other:?}"),
    }
    // outside the short-time hypothesis
    assert!(matches!(ExperimentConfig::from_json_str("{ \"T_grid\": [10.0] }"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_json_str("{ \"T_grid\": [0.0] }"), Err(Error::Config(_))));
    // below the overflow floor α₂π²/700 ≈ 0.0267
    let cfg = ExperimentConfig::new(vec![0.5]);
    assert!((cfg.t_floor() - ALPHA_2 * PI * PI / 700.0).abs() < 1e-12);
    assert!(matches!(ExperimentConfig::from_json_str("{ \"T_grid\": [0.02] }"), Err(Error::Config(_))));
    assert!(ExperimentConfig::from_json_str("{ \"T_grid\": [0.03, 1.0] }").is_ok());
    assert!(matches!(ExperimentConfig::load(Path::new("/nonexistent/heatnull.json")), Err(Error::Usage(_))));
}

#[test]
fn zero_data_sweep() {
    let mut cfg = ExperimentConfig::new(vec![1.0]);
    cfg.zero_data = true;
    cfg.family_modes = 2;
    cfg.modes = 8;
    let sw = cost_sweep(&cfg).unwrap();
    assert_eq!(sw.rows.len(), 1);
    let r = &sw.rows[0];
    assert_eq!(r.cost_log, f64::NEG_INFINITY);
    assert_eq!(r.terminal_residual, 0.0);
    assert!(r.is_ok());
    assert!(sw.to_csv().starts_with(COST_CSV_HEADER));
}

#[test]
fn sweep_rows_are_consistent_and_deterministic() {
    let mut cfg = ExperimentConfig::new(vec![1.0, 0.5]);
    cfg.family_modes = 4;
    cfg.modes = 16;
    cfg.random_states = 2;
    let a = cost_sweep(&cfg).unwrap();
    let b = cost_sweep(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for r in &a.rows {
        assert!(r.is_ok(), "{r:?}");
        assert!(r.terminal_residual <= cfg.tol);
        assert_eq!(r.alpha_eff, r.t * r.cost_log);
    }
    // parse the CSV back and recompute alpha_eff
    for line in a.to_csv().lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (t, c, ae): (f64, f64, f64) = (f[0].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!((ae - t * c).abs() <= 1e-12 * ae.abs());
    }
    assert!(a.slope.is_some());
}

#[test]
fn ls_slope_exact_on_lines() {
    assert!((ls_slope(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]) - 2.0).abs() < 1e-14);
}

#[test]
fn basis_selection() {
    assert_eq!(problem_basis(&ParabolicProblem::dirichlet(2.0), 4).unwrap().kind, BasisKind::ExactDD);
    let mut nd = ParabolicProblem::dirichlet(2.0);
    nd.bc0 = [0.0, 1.0];
    assert_eq!(problem_basis(&nd, 4).unwrap().kind, BasisKind::ExactND);
}

#[test]
fn run_writes_outputs() {
    let dir = std::env::temp_dir().join(format!("heatnull-run-{}", std::process::id()));
    let mut cfg = ExperimentConfig::new(vec![1.0]);
    cfg.family_modes = 3;
    cfg.modes = 12;
    cfg.random_states = 1;
    let files = run(Command::CostSweep, &cfg, &dir).unwrap();
    assert!(files.iter().any(|p| p.ends_with("cost_sweep.csv")));
    let files = run(Command::Simulate, &cfg, &dir).unwrap();
    for name in ["family.json", "control.csv", "debug_g1.csv", "trajectory.csv", "simulate.json"] {
        assert!(files.iter().any(|p| p.ends_with(name)), "{name}");
        assert!(dir.join(name).exists());
    }
    let ctl = crate::biorthogonal::ControlSignal::read_csv(&dir.join("control.csv")).unwrap();
    assert_eq!(ctl.window.1, 1.0);
    // interior subcommands need a region
    assert!(matches!(run(Command::Transmute, &cfg, &dir), Err(Error::Config(_))));
    std::fs::remove_dir_all(&dir).ok();
}
