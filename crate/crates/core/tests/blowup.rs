use hks_core::blowup::{
    check_blowup_data, classify_blowup, estimate_blowup_time, fit_reciprocal_root, riccati_bound_raw,
    riccati_envelope_time, CharTrace, Classification,
};
use hks_core::grid::{Boundary, Grid};
use hks_core::scenarios::{initial_fields, run_blowup_study, build_data, ScenarioConfig, ScenarioKind};
use hks_core::solver::run;

#[test]
fn riccati_bound_closed_form() {
    // y' = -(δ₀/M) y², y(0) = y₀ < 0 diverges at M / (δ₀ |y₀|)
    assert!((riccati_bound_raw(-2.0f64, 0.5, 3.0).unwrap() - 3.0).abs() < 1e-15);
    assert!(riccati_bound_raw(1.0, 0.5, 3.0).is_err());
    for (y0, d0, m) in [(-1.0, 1.0, 1.0), (-0.1, 0.02, 1.2), (-50.0, 3.0, 0.9)] {
        let t = riccati_envelope_time(y0, d0, m).unwrap();
        let exact = m / (d0 * f64::abs(y0)) * (1.0 - 1e-7);
        assert!((t - exact).abs() < 1e-8 * exact, "{t} {exact}");
    }
}

#[test]
fn reciprocal_fit_recovers_a_pole() {
    // P̃(t) = -1 / (k (T - t)) is exactly linear in 1/|P̃|
    let (big_t, k) = (0.73, 2.5);
    let times: Vec<f64> = (0..40).map(|i| 0.6 * i as f64 / 39.0).collect();
    let p: Vec<f64> = times.iter().map(|t| -1.0 / (k * (big_t - t))).collect();
    assert!((fit_reciprocal_root(&times, &p).unwrap() - big_t).abs() < 1e-12);
    let trace = CharTrace { times: times.clone(), p_tilde: p, ..CharTrace::default() };
    assert!((estimate_blowup_time(&trace).unwrap() - big_t).abs() < 1e-12);
    let flat: Vec<f64> = times.iter().map(|_| -1.0).collect();
    assert!(fit_reciprocal_root(&times, &flat).is_err());
}

#[test]
fn bump_data_is_admissible() {
    let mut c = ScenarioConfig::preset(ScenarioKind::Remark11);
    c.grid = Grid::new(1, 1024, 16.0, Boundary::Periodic).unwrap();
    let (rho, cc) = initial_fields(&c).unwrap();
    let r = check_blowup_data(&rho, &cc).unwrap();
    assert!(r.asm1_ok && r.asm2_ok && r.asm3_ok && r.asm4_ok);
    assert_eq!((r.beta1, r.beta2), (1.0, 1.0));
    // the sign conditions hold on the falling flank x ∈ (1, 2)
    let x0 = r.x0.unwrap();
    assert!(x0 > 1.0 && x0 < 2.0, "{x0}");
}

#[test]
fn constant_run_is_not_a_blowup() {
    let c = ScenarioConfig::preset(ScenarioKind::Constant);
    let s = build_data(&c).unwrap();
    let out = run(&s, &c.params, &c.solver, Some(0.5), &mut ()).unwrap();
    assert_eq!(classify_blowup(&out, 10.0).classification, Classification::None);
}

#[test]
fn study_on_a_coarse_grid() {
    let mut c = ScenarioConfig::preset(ScenarioKind::Remark11);
    c.grid = Grid::new(1, 1024, 16.0, Boundary::Periodic).unwrap();
    let s0 = build_data(&c).unwrap();
    let study = run_blowup_study(&s0, &c).unwrap();
    let b = &study.report;
    assert!(b.riccati_t_upper.unwrap() > b.t_abort);
    assert!(study.p_tilde0.unwrap() < 0.0);
    let trace = study.trace.as_ref().unwrap();
    assert!(trace.len() > 10 && trace.resolved_len() <= trace.len());
    let ib = study.image_bounds.as_ref().unwrap();
    assert!(ib.p_min > 0.0 && ib.q_max < 0.0 && ib.delta0 > 0.0);
    assert!(study.data_check.as_ref().unwrap().asm4_ok);
}
