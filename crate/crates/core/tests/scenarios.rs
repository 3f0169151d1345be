use hks_core::grid::{Boundary, Grid};
use hks_core::scenarios::{
    bump, config_hash, initial_fields, perturbation_norms, run_scenario, smoothstep, build_data, BumpSpec,
    ScenarioConfig, ScenarioKind,
};

#[test]
fn smoothstep_is_c1() {
    let h = 1e-6;
    for s in [0.0f64, 1.0] {
        // one-sided slopes vanish at both ends
        assert!((smoothstep(s + h) - smoothstep(s - h)).abs() / (2.0 * h) < 1e-5);
    }
    assert_eq!(smoothstep(0.5), 0.5);
    let spec = BumpSpec::default();
    assert_eq!(bump(0.0, &spec), 1.0);
    assert_eq!(bump(3.0, &spec), 0.0);
    let v = bump(1.5, &spec);
    assert!(v > 0.0 && v < 1.0 && v == bump(-1.5, &spec));
}

#[test]
fn corollary_amplitude_is_delta_to_the_n() {
    let c = ScenarioConfig::<f64>::preset(ScenarioKind::Corollary14);
    let (rho, cc) = initial_fields(&c).unwrap();
    let expect = 0.2f64.powi(4);
    let dev = rho.values().iter().map(|r| (r - c.rho_bar).abs()).fold(0.0, f64::max);
    assert!((dev - expect).abs() < 1e-15, "{dev}");
    let dev_c = cc.values().iter().map(|v| (v - c.c_bar).abs()).fold(0.0, f64::max);
    assert!((dev_c - expect).abs() < 1e-15);
}

#[test]
fn perturbation_norms_shrink_with_n() {
    let mut prev = f64::INFINITY;
    for n in [2, 4, 6] {
        let c = ScenarioConfig { n_power: n, ..ScenarioConfig::<f64>::preset(ScenarioKind::Corollary14) };
        let p = perturbation_norms(&build_data(&c).unwrap(), c.rho_bar, 2);
        // amplitude δ^N scales the ρ part linearly
        assert!(p.rho < prev && p.rho > 0.0);
        if prev.is_finite() {
            assert!((prev / p.rho - 25.0).abs() < 1e-9, "{}", prev / p.rho);
        }
        prev = p.rho;
    }
}

#[test]
fn tensor_data_is_flat_across_the_plateau() {
    let c = ScenarioConfig::<f64>::preset(ScenarioKind::Thm13Case2);
    let (rho, _) = initial_fields(&c).unwrap();
    let g = c.grid;
    // along x₂ on |x₂| ≤ 1/δ the profile equals the 1D bump in x₁
    let spec = c.bump;
    for (k, &v) in rho.values().iter().enumerate() {
        let x = g.position(k);
        if (c.delta * x[1]).abs() <= spec.inner_radius {
            assert!((v - c.rho_bar - bump(x[0], &spec)).abs() < 1e-15);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let mut c = ScenarioConfig::<f64>::preset(ScenarioKind::Remark11);
    c.grid = Grid::new(1, 512, 16.0, Boundary::Periodic).unwrap();
    c.t_end = Some(0.05);
    let h = config_hash(&c).unwrap();
    assert_eq!(h.len(), 64);
    assert_eq!(h, config_hash(&c.clone()).unwrap());
    let mut d = c.clone();
    d.solver.cfl = 0.3;
    assert_ne!(h, config_hash(&d).unwrap());
    let a = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
    let b = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scenario_names_roundtrip() {
    for name in ["constant", "remark11", "thm13_case1", "thm13_case2", "corollary14", "custom"] {
        assert_eq!(ScenarioKind::from_name(name).unwrap().name(), name);
    }
    assert!(ScenarioKind::from_name("nope").is_err());
}

#[test]
fn localized_run_stays_local() {
    let mut c = ScenarioConfig::<f64>::preset(ScenarioKind::Thm13Case1);
    c.grid = Grid::new(1, 1024, 16.0, Boundary::Periodic).unwrap();
    let r = run_scenario(&c).unwrap();
    let loc = r.localization.unwrap();
    assert!(loc.clean, "{loc:?}");
    let s = r.steering.unwrap();
    assert!(s.predicted_radius >= s.radius_floor);
    assert!(s.observed_location.abs() <= s.predicted_radius, "{s:?}");
}
