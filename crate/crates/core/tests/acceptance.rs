//! End-to-end acceptance suite. Every criterion prints one `PASS`/`FAIL` line on
//! stderr (written directly, so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use hks_core::blowup::{estimate_blowup_time, riccati_envelope_time, Classification};
use hks_core::grid::Grid;
use hks_core::riemann::{det_grad_w, eigen, f_eval, invert_w, w_detail, w_eval, CharOdeConfig, Family, PhasePoint};
use hks_core::scenarios::{
    build_data, run_cone_experiment, run_scaling_check, run_scenario, ExperimentReport, ScenarioConfig, ScenarioKind,
};
use hks_core::solver::{run, FnObserver, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    let mark = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} [{mark}] {title}: {detail}");
}

fn fmt_pairs(v: &[(f64, f64)]) -> String {
    v.iter().map(|(a, b)| format!("({a:.2e}, {b:.2e})")).collect::<Vec<_>>().join(" ")
}

fn line(n: usize) -> Grid<f64> {
    Grid::new(1, n, 16.0, Default::default()).unwrap()
}

fn remark11(n: usize) -> ScenarioConfig<f64> {
    let mut c = ScenarioConfig::preset(ScenarioKind::Remark11);
    c.grid = line(n);
    c
}

fn scenario(c: &ScenarioConfig<f64>) -> (ExperimentReport<f64>, Duration) {
    let t = Instant::now();
    let r = run_scenario(c).unwrap();
    (r, t.elapsed())
}

#[test]
fn criterion_01_eigenstructure() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    let mut ordered = true;
    for _ in 0..1000 {
        let rho: f64 = 10f64.powf(rng.gen_range(-3.0..1.0));
        let q: f64 = rng.gen_range(-5.0..5.0);
        let e = eigen(PhasePoint::new(rho, q).unwrap()).unwrap();
        ordered &= e.lambda1 < 0.0 && 0.0 < e.lambda2;
        for (l, r) in [(e.lambda1, e.r1), (e.lambda2, e.r2)] {
            // [[q, ρ], [1, 0]] r = λ r, relative to the size of the terms
            let res = ((q * r[0] + rho * r[1] - l * r[0]).abs()).max((r[0] - l * r[1]).abs());
            let scale = (q.abs() * r[0].abs() + rho * r[1].abs()).max(1.0);
            worst = worst.max(res / scale);
        }
    }
    let el = t.elapsed();
    let pass = worst <= 1e-12 && ordered && el < Duration::from_secs(1);
    report(1, "eigenstructure", pass, format!("max residual {worst:.2e}, λ₁<0<λ₂ {ordered}, {el:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_02_riemann_invariants() {
    let t = Instant::now();
    let cfg = CharOdeConfig { abs_tol: 1e-13, rel_tol: 1e-13, ..CharOdeConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut orth, mut grad1, mut det_err, mut round) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut det_positive = true;
    for _ in 0..200 {
        let z1: f64 = rng.gen_range(0.2..3.0);
        let z2: f64 = rng.gen_range(-1.0..1.0);
        let p = PhasePoint::new(z1, z2).unwrap();
        let e = eigen(p).unwrap();
        let s = p.gap();
        let h = 1e-5;
        let w = |a: f64, b: f64| w_eval(PhasePoint::new(a, b).unwrap(), &cfg).unwrap();
        let (wp1, wm1, wp2, wm2) = (w(z1 + h, z2), w(z1 - h, z2), w(z1, z2 + h), w(z1, z2 - h));
        // finite-difference Jacobian, rows ∇w₁ and ∇w₂
        let j = [
            [(wp1.w1 - wm1.w1) / (2.0 * h), (wp2.w1 - wm2.w1) / (2.0 * h)],
            [(wp1.w2 - wm1.w2) / (2.0 * h), (wp2.w2 - wm2.w2) / (2.0 * h)],
        ];
        for (row, r) in [(j[0], e.r1), (j[1], e.r2)] {
            let dot = row[0] * r[0] + row[1] * r[1];
            let norm = row[0].hypot(row[1]) * r[0].hypot(r[1]);
            orth = orth.max(dot.abs() / norm);
        }
        let f1 = f_eval(p, Family::One, &cfg).unwrap();
        let closed = [f1, f1 * (-z2 + s) / 2.0];
        let mag = closed[0].hypot(closed[1]);
        grad1 = grad1.max((j[0][0] - closed[0]).abs().max((j[0][1] - closed[1]).abs()) / mag);
        let det = det_grad_w(p, &cfg).unwrap();
        let d = w_detail(p, &cfg).unwrap();
        det_positive &= det > 0.0 && (det + d.f1 * d.f2 * s).abs() <= 1e-12 * det.abs();
        let det_fd = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        det_err = det_err.max((det_fd - det).abs() / det.abs());
        let back = invert_w(w_eval(p, &cfg).unwrap(), &cfg).unwrap();
        round = round.max((back.z1 - z1).abs().max((back.z2 - z2).abs()));
    }
    let e = std::f64::consts::E;
    let spot = w_eval(PhasePoint::new(1.0, 0.0).unwrap(), &cfg).unwrap();
    let spot_ok = (spot.w1 - e).abs() < 1e-10 && (spot.w2 + e).abs() < 1e-10;
    let dl = hks_core::riemann::dlambda2_dw1(PhasePoint::new(1.0, 0.0).unwrap(), &cfg).unwrap();
    let dl_ok = (dl - 1.0 / (2.0 * e)).abs() <= 1e-6;
    let el = t.elapsed();
    let pass = orth <= 1e-5
        && grad1 <= 1e-6
        && det_positive
        && det_err <= 1e-5
        && round <= 1e-8
        && spot_ok
        && dl_ok
        && el < Duration::from_secs(30);
    report(
        2,
        "Riemann invariants",
        pass,
        format!(
            "∇w·r {orth:.1e}, ∇w₁ {grad1:.1e}, det {det_err:.1e} (>0 {det_positive}), roundtrip {round:.1e}, \
             w(1,0)=({:.6},{:.6}), ∂λ₂/∂w₁ {dl:.8}, {el:.2?}",
            spot.w1, spot.w2
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_constant_state() {
    let c = ScenarioConfig::preset(ScenarioKind::Constant);
    let (r, _) = scenario(&c);
    let k = r.constant_check.unwrap();
    let exp = (-1.0_f64).exp();
    let pass = r.verdict == Verdict::Completed
        && (r.t_final - 1.0).abs() < 1e-14
        && k.rho_deviation <= 1e-12
        && k.q_deviation <= 1e-12
        && (k.c_expected - exp).abs() < 1e-15
        && k.c_error <= 1e-8;
    report(
        3,
        "constant state",
        pass,
        format!("|Δρ| {:.1e}, |Δq| {:.1e}, |c(1) - e⁻¹| {:.1e}", k.rho_deviation, k.q_deviation, k.c_error),
    );
    assert!(pass);
}

#[test]
fn criterion_04_conservation_positivity() {
    let c = remark11(2048);
    let s0 = build_data(&c).unwrap();
    let m0 = s0.mass();
    let (mut drift, mut positive, mut monotone) = (0.0_f64, true, true);
    let mut sup_c = s0.c().max();
    let mut obs = FnObserver(|_: &hks_core::SimState, next: &hks_core::SimState, _: &hks_core::StepRecord| {
        drift = drift.max((next.mass() - m0).abs() / m0);
        let c = next.c();
        positive &= c.min() > 0.0;
        let s = c.max();
        monotone &= s <= sup_c;
        sup_c = s;
        true
    });
    let out = run(&s0, &c.params, &c.solver, c.t_end, &mut obs).unwrap();
    let pass = out.verdict == Verdict::GradientAbort && drift <= 1e-10 && positive && monotone;
    report(
        4,
        "conservation and positivity",
        pass,
        format!("{:?} at t={:.4}, mass drift {drift:.1e}, c>0 {positive}, sup c nonincreasing {monotone}", out.verdict, out.t_final()),
    );
    assert!(pass);
}

#[test]
fn criterion_05_gradient_blowup_1d() {
    let (r, el) = scenario(&remark11(2048));
    let b = r.blowup.clone().unwrap();
    let g = r.norm_series.iter().map(|s| s.norms.sup_grad_rho).fold(0.0, f64::max) / r.norm_series[0].norms.sup_grad_rho;
    let v = &b.bounded_norms_variation;
    let bounded = [v.sup_rho, v.sup_c, v.sup_grad_c, v.sup_grad_log_c].iter().all(|&x| x < 3.0);
    let pass = r.verdict == Verdict::GradientAbort
        && g >= 100.0
        && bounded
        && b.classification == Classification::GradientBlowup
        && el < Duration::from_secs(120);
    report(
        5,
        "1D gradient blow-up",
        pass,
        format!(
            "{:?} at t={:.4}, sup|∂ₓρ| amplified {g:.1}× (need 100×), variations ρ {:.2} c {:.2} ∂ₓc {:.2} ∂ₓlog c {:.2}, {:?}, {el:.2?}",
            r.verdict, r.t_final, v.sup_rho, v.sup_c, v.sup_grad_c, v.sup_grad_log_c, b.classification
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_range_preservation() {
    let (r, _) = scenario(&remark11(2048));
    let rg = r.ranges.unwrap();
    let tr = r.trace.as_ref().unwrap();
    let upto = tr.resolved_len();
    let drift = tr.p_drift(upto);
    let pass = r.verdict == Verdict::GradientAbort && rg.within && upto >= 2 && drift <= rg.tol;
    report(
        6,
        "range preservation",
        pass,
        format!(
            "P {:.4?} ⊂ {:.4?}, Q {:.4?} ⊂ {:.4?} ± {:.3}, P drift on trace {drift:.3} over {upto} samples",
            rg.p_observed, rg.p_initial, rg.q_observed, rg.q_initial, rg.tol
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_riccati_ordering() {
    let mut est = Vec::new();
    let mut bound = f64::NAN;
    for n in [512, 1024, 2048] {
        let (r, _) = scenario(&remark11(n));
        let tr = r.trace.as_ref().unwrap();
        est.push(estimate_blowup_time(tr).ok());
        bound = r.blowup.as_ref().and_then(|b| b.riccati_t_upper).unwrap_or(f64::NAN);
    }
    let nonincreasing = est.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= 1.05 * a));
    let finest = est[2].unwrap_or(f64::INFINITY);
    let (y0, d0, m) = (-3.0_f64, 0.25, 1.5);
    let closed = m / (d0 * 3.0);
    let env = riccati_envelope_time(y0, d0, m).unwrap();
    let env_ok = ((env - closed) / closed).abs() <= 1e-6;
    let pass = nonincreasing && finest <= 1.1 * bound && env_ok;
    report(
        7,
        "Riccati ordering",
        pass,
        format!("T_est(512,1024,2048) = {est:.4?}, T_upper {bound:.4}, envelope {env:.8} vs {closed:.8}"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_finite_speed() {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [1024, 2048, 4096] {
        let e = run_cone_experiment(&remark11(n), vec![16.0], 0.6).unwrap();
        let r = &e.report;
        let ok = !r.cone_violation
            && r.ball_mismatch == 0.0
            && r.empirical_front_speed <= 1.1 * r.lambda_max_observed
            && 1.1 * r.lambda_max_observed <= e.cone.speed;
        pass &= ok;
        lines.push(format!(
            "n={n}: interior {:.1e}/tol {:.2e}, front {:.3} ≤ 1.1λ {:.3} ≤ 6Ad {:.2}",
            r.max_interior_diff,
            r.tol,
            r.empirical_front_speed,
            1.1 * r.lambda_max_observed,
            e.cone.speed
        ));
    }
    report(8, "finite speed of propagation", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_09_scaling_symmetry() {
    let errs: Vec<f64> = [512, 1024, 2048].iter().map(|&n| run_scaling_check(&remark11(n), 2.0, 0.2).unwrap().l1_total()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|&r| r >= 1.7);
    report(9, "scaling symmetry", pass, format!("L¹ errors {errs:.3?}, ratios {ratios:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_10_multid_consistency() {
    let (r, el) = scenario(&ScenarioConfig::preset(ScenarioKind::Thm13Case2));
    let s = r.slice.unwrap();
    let pass = s.agree && s.max_diff <= s.tol && r.verdict == Verdict::GradientAbort && r.grid.dim() == 2;
    report(
        10,
        "multi-d consistency",
        pass,
        format!(
            "slice diff {:.1e} ≤ 10h {:.3} over {} steps, {:?} at t={:.4}, {el:.2?}",
            s.max_diff, s.tol, s.steps, r.verdict, r.t_final
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_small_data_blowup() {
    let mut norms = Vec::new();
    let mut verdicts = Vec::new();
    for n_power in [2, 4, 6] {
        let c = ScenarioConfig { n_power, ..ScenarioConfig::preset(ScenarioKind::Corollary14) };
        let (r, _) = scenario(&c);
        norms.push((r.perturbation.rho, r.perturbation.grad_log_c));
        verdicts.push((r.verdict, r.t_final));
    }
    let decreasing = norms.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    let small = norms[2].0 + norms[2].1 < 1e-2;
    let aborted = verdicts.iter().all(|v| v.0 == Verdict::GradientAbort);
    let pass = decreasing && small && aborted;
    report(
        11,
        "small-data blow-up",
        pass,
        format!("H² norms (ρ, ∇log c) {}, verdicts {verdicts:.1?}", fmt_pairs(&norms)),
    );
    assert!(pass);
}
