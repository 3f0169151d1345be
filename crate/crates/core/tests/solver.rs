use hks_core::field::{ScalarField, VectorField};
use hks_core::grid::{Boundary, Grid};
use hks_core::scenarios::{build_data, ScenarioConfig, ScenarioKind};
use hks_core::solver::{run, Reconstruction, Scheme, SolverConfig, Verdict};
use hks_core::state::{PhysParams, SimState};

fn acoustic_data(n: usize, rho_bar: f64, eps: f64) -> SimState<f64> {
    let g = Grid::new(1, n, 16.0, Boundary::Periodic).unwrap();
    let rho = ScalarField::from_fn(g, |x: &[f64]| rho_bar + eps * (-x[0] * x[0]).exp()).unwrap();
    SimState::new(rho, VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap()
}

fn minmod() -> SolverConfig<f64> {
    SolverConfig { reconstruction: Reconstruction::Minmod, ..SolverConfig::default() }
}

/// Relative max error against d'Alembert: a small bump on `(ρ̄, 0)` splits into two
/// halves travelling at `±sqrt(ρ̄)`.
fn acoustic_error(n: usize, config: &SolverConfig<f64>) -> f64 {
    let (rho_bar, eps, t) = (1.0, 1e-5, 3.0);
    let s0 = acoustic_data(n, rho_bar, eps);
    let out = run(&s0, &PhysParams::unit(), config, Some(t), &mut ()).unwrap();
    assert_eq!(out.verdict, Verdict::Completed);
    let c = rho_bar.sqrt();
    let g = |x: f64| (-x * x).exp();
    let grid = *s0.grid();
    (0..grid.len())
        .map(|i| {
            let x = grid.center(i);
            let exact = rho_bar + eps * 0.5 * (g(x - c * t) + g(x + c * t));
            (out.final_state.rho.values()[i] - exact).abs() / eps
        })
        .fold(0.0, f64::max)
}

#[test]
fn acoustic_limit_converges() {
    let errs: Vec<f64> = [256, 512, 1024].iter().map(|&n| acoustic_error(n, &minmod())).collect();
    assert!(errs[2] < 1e-2, "{errs:?}");
    for w in errs.windows(2) {
        assert!(w[0] / w[1] > 1.8, "{errs:?}");
    }
}

#[test]
fn first_order_scheme_converges_at_first_order() {
    let cfg = SolverConfig::default();
    let errs: Vec<f64> = [512, 1024, 2048].iter().map(|&n| acoustic_error(n, &cfg)).collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!(r > 1.6 && r < 2.6, "{errs:?}");
    }
}

#[test]
fn hll_and_rusanov_agree_on_smooth_data() {
    let hll = SolverConfig { scheme: Scheme::Hll, ..minmod() };
    let a = acoustic_error(1024, &minmod());
    let b = acoustic_error(1024, &hll);
    assert!(a < 1e-2 && b < 1e-2, "{a} {b}");
}

fn l1_distance(a: &SimState<f64>, b: &SimState<f64>) -> f64 {
    let h = a.grid().h();
    a.rho.values().iter().zip(b.rho.values()).map(|(x, y)| (x - y).abs()).sum::<f64>() * h
}

#[test]
fn vanishing_viscosity() {
    let mut c = ScenarioConfig::preset(ScenarioKind::Remark11);
    c.grid = Grid::new(1, 1024, 16.0, Boundary::Periodic).unwrap();
    let s0 = build_data(&c).unwrap();
    let solver = SolverConfig { resolution_abort: None, ..c.solver };
    let t = 0.2;
    let inviscid = run(&s0, &c.params, &solver, Some(t), &mut ()).unwrap().final_state;
    let dist: Vec<f64> = [4e-2, 2e-2, 1e-2]
        .iter()
        .map(|&eps| {
            let cfg = SolverConfig { epsilon: eps, ..solver };
            l1_distance(&run(&s0, &c.params, &cfg, Some(t), &mut ()).unwrap().final_state, &inviscid)
        })
        .collect();
    for w in dist.windows(2) {
        assert!(w[1] < w[0], "{dist:?}");
    }
    // first order in ε while the solution is smooth
    assert!(dist[0] / dist[2] > 3.0, "{dist:?}");
}

#[test]
fn mass_is_conserved_and_c_decays() {
    let mut c = ScenarioConfig::preset(ScenarioKind::Remark11);
    c.grid = Grid::new(1, 512, 16.0, Boundary::Periodic).unwrap();
    let s0 = build_data(&c).unwrap();
    let out = run(&s0, &c.params, &c.solver, Some(0.1), &mut ()).unwrap();
    let s = &out.final_state;
    let drift: f64 = (s.mass() - s0.mass()) / s0.mass();
    assert!(drift.abs() < 1e-12);
    for (a, b) in s.log_c.values().iter().zip(s0.log_c.values()) {
        assert!(a < b);
    }
}

#[test]
fn single_precision_constant_state() {
    let g = Grid::<f32>::new(1, 64, 4.0, Boundary::Periodic).unwrap();
    let s0 = SimState::new(ScalarField::constant(g, 1.0f32), VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap();
    let out = run(&s0, &PhysParams::unit(), &SolverConfig::default(), Some(1.0f32), &mut ()).unwrap();
    let c = out.final_state.c();
    for v in c.values() {
        assert!((v - (-1.0f32).exp()).abs() < 1e-5);
    }
    assert!(out.final_state.rho.values().iter().all(|&r| r == 1.0));
}
