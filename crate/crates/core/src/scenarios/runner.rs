//! Experiment orchestration: one solver run (or a lockstep pair) plus the analyses each
//! scenario calls for, collected into an [`ExperimentReport`].

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{build_data, initial_fields, perturbation_norms, state_from_fields, PerturbationNorms, ScenarioConfig, ScenarioKind};
use crate::blowup::{
    check_blowup_data, classify_blowup, estimate_blowup_time, riccati_bound, trace::p_tilde_chain, BlowupReport,
    CharTrace, DataCheckReport, LambdaTracer,
};
use crate::calculus::diff_values;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::propagation::{
    compute_a, compute_a_symmetric, empirical_speed_bound, lipschitz, max_exterior_diff, verify_cone, ConeReport,
    ConeSpec, DifferenceMonitor,
};
use crate::real::Real;
use crate::riemann::{image_bounds, CharOdeConfig, ImageBounds, InvariantMap};
use crate::solver::{run, run_pair, Observer, PairObserver, RunOutcome, SolverConfig, StepRecord, Verdict};
use crate::state::SimState;
use crate::transform::{parabolic_rescale, RescaleParam};

/// Field ranges of the invariants `P = w₁`, `Q = w₂` over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeDrift<T> {
    pub p_initial: (T, T),
    pub q_initial: (T, T),
    pub p_observed: (T, T),
    pub q_observed: (T, T),
    /// `sup|∂ₓP₀|`.
    pub lip_p0: T,
    /// `5 h Lip(P₀)`.
    pub tol: T,
    pub within: bool,
    pub steps_checked: usize,
}

impl<T: Real> RangeDrift<T> {
    fn new(p: &[T], q: &[T], lip_p0: T, h: T) -> Self {
        let mm = |v: &[T]| v.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let (pr, qr) = (mm(p), mm(q));
        RangeDrift {
            p_initial: pr,
            q_initial: qr,
            p_observed: pr,
            q_observed: qr,
            lip_p0,
            tol: T::lit(5.0) * h * lip_p0,
            within: true,
            steps_checked: 0,
        }
    }

    fn update(&mut self, p: &[T], q: &[T]) {
        for &v in p {
            self.p_observed = (self.p_observed.0.min(v), self.p_observed.1.max(v));
        }
        for &v in q {
            self.q_observed = (self.q_observed.0.min(v), self.q_observed.1.max(v));
        }
        let t = self.tol;
        self.within = self.p_observed.0 >= self.p_initial.0 - t
            && self.p_observed.1 <= self.p_initial.1 + t
            && self.q_observed.0 >= self.q_initial.0 - t
            && self.q_observed.1 <= self.q_initial.1 + t;
        self.steps_checked += 1;
    }
}

struct RangeMonitor<'a, T> {
    map: &'a InvariantMap<T>,
    drift: RangeDrift<T>,
    error: Option<Error>,
}

impl<T: Real> Observer<T> for RangeMonitor<'_, T> {
    fn on_step(&mut self, _prev: &SimState<T>, next: &SimState<T>, _rec: &StepRecord<T>) -> bool {
        if self.error.is_some() {
            return true;
        }
        match self.map.fields(next.rho.values(), next.q.component(0)) {
            Ok((p, q)) => self.drift.update(&p, &q),
            Err(e) => self.error = Some(e),
        }
        true
    }
}

/// Keeps the first state at or after each requested time.
struct FieldCapture<T> {
    times: Vec<T>,
    states: Vec<SimState<T>>,
}

impl<T: Real> FieldCapture<T> {
    fn new(mut times: Vec<T>) -> Self {
        times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        FieldCapture { times, states: Vec::new() }
    }

    fn offer(&mut self, s: &SimState<T>) {
        while self.states.len() < self.times.len() && s.t_scaled >= self.times[self.states.len()] {
            self.states.push(s.clone());
        }
    }
}

impl<T: Real> Observer<T> for FieldCapture<T> {
    fn on_start(&mut self, state: &SimState<T>) {
        self.offer(state);
    }
    fn on_step(&mut self, _prev: &SimState<T>, next: &SimState<T>, _rec: &StepRecord<T>) -> bool {
        self.offer(next);
        true
    }
}

/// Everything learned from one 1D blow-up run.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupStudy<T> {
    pub outcome: RunOutcome<T>,
    pub report: BlowupReport<T>,
    pub data_check: Option<DataCheckReport<T>>,
    pub image_bounds: Option<ImageBounds<T>>,
    /// Start of the traced characteristic and `P̃` there.
    pub x0: Option<T>,
    pub p_tilde0: Option<T>,
    pub trace: Option<CharTrace<T>>,
    pub ranges: Option<RangeDrift<T>>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub captured: Vec<SimState<T>>,
}

fn invariant_config<T: Real>() -> CharOdeConfig<T> {
    CharOdeConfig::default()
}

/// `x₀`: the admissible cell with the most negative `P̃₀` (any cell if none is admissible).
fn steepest_cell<T: Real>(state: &SimState<T>, check: Option<&DataCheckReport<T>>, cfg: &CharOdeConfig<T>) -> Option<(usize, T)> {
    let g = state.grid();
    let candidates: Vec<usize> = match check {
        Some(c) if !c.asm4_cells.is_empty() => c.asm4_cells.clone(),
        _ => (0..g.len()).collect(),
    };
    let drho = diff_values(g, state.rho.values(), 0, 1);
    let dq = diff_values(g, state.q.component(0), 0, 1);
    candidates
        .into_iter()
        .filter(|&i| drho[i] != T::zero() || dq[i] != T::zero())
        .filter_map(|i| p_tilde_chain(state, g.center(i), cfg).ok().map(|p| (i, p)))
        .filter(|&(_, p)| p < T::zero())
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
}

/// Runs one 1D state with characteristic tracing, invariant-range tracking and the
/// blow-up classifier.
pub fn run_blowup_study<T: Real>(state0: &SimState<T>, config: &ScenarioConfig<T>) -> Result<BlowupStudy<T>> {
    let g = *state0.grid();
    if g.dim() != 1 {
        return Err(Error::InvalidParameter("blow-up studies are one-dimensional".into()));
    }
    let cfg = invariant_config::<T>();
    let mut notes = Vec::new();
    let c0 = state0.c();
    let data_check = check_blowup_data(&state0.rho, &c0).ok();
    if let Some(dc) = &data_check {
        if !(dc.asm1_ok && dc.asm2_ok && dc.asm4_ok) {
            notes.push("data check failed for at least one assumption".into());
        }
    }

    let quantum = T::lit(1e-9) * state0.rho.max();
    let map = InvariantMap::memoized(cfg, quantum);
    let (p0, q0) = map.fields(state0.rho.values(), state0.q.component(0))?;
    let lip_p0 = diff_values(&g, &p0, 0, 1).iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let p0f = ScalarField::new(g, p0.clone())?;
    let q0f = ScalarField::new(g, q0.clone())?;

    let start = steepest_cell(state0, data_check.as_ref(), &cfg);
    let (x0, p_tilde0) = match start {
        Some((i, p)) => (Some(g.center(i)), Some(p)),
        None => {
            notes.push("no cell with negative P~ at t = 0".into());
            (None, None)
        }
    };
    let anchor = start.map(|(i, _)| (p0[i], q0[i]));
    let bounds = match image_bounds(&p0f, &q0f, config.image_samples, &cfg, anchor) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("image bounds unavailable: {e}"));
            None
        }
    };
    let riccati = match (p_tilde0, &bounds) {
        (Some(p), Some(b)) => riccati_bound(p, b).ok(),
        _ => None,
    };

    let mut tracer = match (x0, &bounds) {
        (Some(x), Some(b)) => Some(LambdaTracer::new(x, &map, &b.psi)),
        _ => None,
    };
    let mut ranges = config
        .track_ranges
        .then(|| RangeMonitor { map: &map, drift: RangeDrift::new(&p0, &q0, lip_p0, g.h()), error: None });
    let mut capture = FieldCapture::new(config.output_times.clone());
    let outcome = run(state0, &config.params, &config.solver, config.t_end, &mut (&mut tracer, (&mut ranges, &mut capture)))?;

    let trace = tracer.map(|t| {
        if let Some(e) = &t.error {
            notes.push(format!("characteristic trace stopped: {e}"));
        }
        t.finish()
    });
    let ranges = ranges.and_then(|r| match r.error {
        Some(e) => {
            notes.push(format!("range tracking stopped: {e}"));
            None
        }
        None => Some(r.drift),
    });

    let mut report = classify_blowup(&outcome, required_growth(&outcome, config));
    report.riccati_t_upper = riccati;
    report.t_estimate = trace.as_ref().and_then(|t| estimate_blowup_time(t).ok());
    Ok(BlowupStudy {
        outcome,
        report,
        data_check,
        image_bounds: bounds,
        x0,
        p_tilde0,
        trace,
        ranges,
        notes,
        captured: capture.states,
    })
}

/// Growth demanded by the classifier: the configured value, else the amplification
/// reached when the run aborted (the factor itself when it did not).
fn required_growth<T: Real>(outcome: &RunOutcome<T>, config: &ScenarioConfig<T>) -> T {
    config.required_growth.unwrap_or_else(|| {
        if outcome.verdict == Verdict::GradientAbort {
            outcome.gradient_amplification()
        } else {
            config.solver.gradient_abort_factor
        }
    })
}

/// Constant-state exactness: deviations of `ρ`, `q` and of `c` from `c̄ e^{-μρ̄t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantCheck<T> {
    pub t_physical: T,
    pub rho_deviation: T,
    pub q_deviation: T,
    pub c_expected: T,
    pub c_error: T,
}

/// Blow-up radius steering of the rescaled data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaleSteering<T> {
    pub a: T,
    /// Blow-up time and `sup|∇log c|` of the unscaled run.
    pub t_star_base: T,
    pub grad_log_c_base: T,
    /// `2/a + 6 T* (1 + a²ρ̄ + aG) / a²`.
    pub predicted_radius: T,
    /// `6 ρ̄ T*`, the infimum over `a`.
    pub radius_floor: T,
    /// Position of the largest `|∂ₓρ|` when the rescaled run stopped.
    pub observed_location: T,
    pub t_abort: T,
}

/// Differences between the bump run and the constant-background run outside the
/// expanding interval `|x| ≤ r0 + 6At`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Localization<T> {
    #[serde(rename = "A")]
    pub a: T,
    pub r0: T,
    pub speed: T,
    pub max_exterior_diff: T,
    pub tol: T,
    pub clean: bool,
}

/// Slice comparison of a tensor-data run against the constantly extended 1D run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceReport<T> {
    pub slice_half_width: T,
    pub max_diff: T,
    pub tol: T,
    pub agree: bool,
    pub steps: usize,
    pub t_final: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<T> {
    pub scenario: ScenarioKind,
    pub config: ScenarioConfig<T>,
    pub config_hash: String,
    pub grid: Grid<T>,
    pub verdict: Verdict,
    pub steps: usize,
    pub t_final: T,
    pub norm_series: Vec<StepRecord<T>>,
    pub perturbation: PerturbationNorms<T>,
    pub blowup: Option<BlowupReport<T>>,
    pub cone: Option<ConeReport<T>>,
    pub data_check: Option<DataCheckReport<T>>,
    pub image_bounds: Option<ImageBounds<T>>,
    pub x0: Option<T>,
    pub trace: Option<CharTrace<T>>,
    pub ranges: Option<RangeDrift<T>>,
    pub constant_check: Option<ConstantCheck<T>>,
    pub slice: Option<SliceReport<T>>,
    pub localization: Option<Localization<T>>,
    pub steering: Option<RescaleSteering<T>>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub snapshots: Vec<SimState<T>>,
}

/// SHA-256 of the canonical JSON encoding of the configuration.
pub fn config_hash<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl<T: Real + Serialize> ExperimentReport<T> {
    fn skeleton(config: &ScenarioConfig<T>, state0: &SimState<T>, outcome: &RunOutcome<T>) -> Result<Self> {
        Ok(ExperimentReport {
            scenario: config.scenario,
            config: config.clone(),
            config_hash: config_hash(config)?,
            grid: config.grid,
            verdict: outcome.verdict,
            steps: outcome.steps,
            t_final: outcome.t_final(),
            norm_series: outcome.all_records().copied().collect(),
            perturbation: perturbation_norms(state0, config.rho_bar, config.solver.norm_m),
            blowup: None,
            cone: None,
            data_check: None,
            image_bounds: None,
            x0: None,
            trace: None,
            ranges: None,
            constant_check: None,
            slice: None,
            localization: None,
            steering: None,
            notes: Vec::new(),
            snapshots: Vec::new(),
        })
    }

    fn from_study(config: &ScenarioConfig<T>, state0: &SimState<T>, study: BlowupStudy<T>) -> Result<Self> {
        let mut r = Self::skeleton(config, state0, &study.outcome)?;
        r.blowup = Some(study.report);
        r.data_check = study.data_check;
        r.image_bounds = study.image_bounds;
        r.x0 = study.x0;
        r.trace = study.trace;
        r.ranges = study.ranges;
        r.notes = study.notes;
        r.snapshots = study.captured;
        Ok(r)
    }
}

/// Builds the data of `config`, runs it and assembles the report.
pub fn run_scenario<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<ExperimentReport<T>> {
    config.validate()?;
    match config.scenario {
        ScenarioKind::Constant => run_constant(config),
        ScenarioKind::Thm13Case1 => run_case1(config),
        ScenarioKind::Thm13Case2 => run_case2(config),
        ScenarioKind::Remark11 | ScenarioKind::Corollary14 | ScenarioKind::Custom => {
            let state0 = build_data(config)?;
            if config.grid.dim() == 1 {
                let study = run_blowup_study(&state0, config)?;
                ExperimentReport::from_study(config, &state0, study)
            } else {
                run_plain(config, &state0)
            }
        }
    }
}

/// Solver run of the scenario's initial data with norm tracking and field capture only.
pub fn run_simulation<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<ExperimentReport<T>> {
    config.validate()?;
    let state0 = build_data(config)?;
    run_plain(config, &state0)
}

fn run_plain<T: Real + Serialize>(config: &ScenarioConfig<T>, state0: &SimState<T>) -> Result<ExperimentReport<T>> {
    let mut capture = FieldCapture::new(config.output_times.clone());
    let outcome = run(state0, &config.params, &config.solver, config.t_end, &mut capture)?;
    let mut r = ExperimentReport::skeleton(config, state0, &outcome)?;
    r.blowup = Some(classify_blowup(&outcome, required_growth(&outcome, config)));
    r.snapshots = capture.states;
    Ok(r)
}

fn run_constant<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<ExperimentReport<T>> {
    let state0 = build_data(config)?;
    let mut capture = FieldCapture::new(config.output_times.clone());
    let outcome = run(&state0, &config.params, &config.solver, config.t_end, &mut capture)?;
    let s = &outcome.final_state;
    let t_phys = s.t_scaled / config.params.time_scale();
    let c_expected = config.c_bar * (-config.params.mu * config.rho_bar * t_phys).exp();
    let rho_deviation = s.rho.values().iter().fold(T::zero(), |m, &v| m.max((v - config.rho_bar).abs()));
    let q_deviation = s.q.sup_norm();
    let c_error = s.c().values().iter().fold(T::zero(), |m, &v| m.max((v - c_expected).abs()));
    let mut r = ExperimentReport::skeleton(config, &state0, &outcome)?;
    r.blowup = Some(classify_blowup(&outcome, required_growth(&outcome, config)));
    r.constant_check = Some(ConstantCheck { t_physical: t_phys, rho_deviation, q_deviation, c_expected, c_error });
    r.snapshots = capture.states;
    Ok(r)
}

/// `R(a) = 2/a + 6 T* (1 + a²ρ̄ + aG) / a²`.
fn predicted_radius<T: Real>(a: T, t_star: T, rho_bar: T, g: T, outer: T) -> T {
    outer / a + T::lit(6.0) * t_star * (T::one() + a * a * rho_bar + a * g) / (a * a)
}

/// Smallest-effort `a` (bisection in `log a`) putting `R(a)` at the middle of the target.
fn steer_a<T: Real>(target: (T, T), t_star: T, rho_bar: T, g: T, outer: T) -> Result<T> {
    let floor = T::lit(6.0) * rho_bar * t_star;
    let goal = T::lit(0.5) * (target.0 + target.1);
    if goal <= floor {
        return Err(Error::DomainConflict(format!(
            "target radius {goal} is below the reachable floor 6ρ̄T* = {floor}; lower rho_bar"
        )));
    }
    let r = |a: T| predicted_radius(a, t_star, rho_bar, g, outer);
    let (mut lo, mut hi) = (T::lit(-10.0), T::lit(20.0));
    if r(lo.exp()) < goal {
        return Ok(lo.exp());
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if r(mid.exp()) > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((T::lit(0.5) * (lo + hi)).exp())
}

fn argmax_grad_rho<T: Real>(s: &SimState<T>) -> T {
    let g = s.grid();
    let d = diff_values(g, s.rho.values(), 0, 1);
    let (i, _) = d.iter().enumerate().fold((0, T::zero()), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    g.center(i)
}

fn run_case1<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<ExperimentReport<T>> {
    if config.grid.dim() != 1 {
        return Err(Error::InvalidParameter("thm13_case1 is one-dimensional".into()));
    }
    let base_cfg = ScenarioConfig { scenario: ScenarioKind::Remark11, output_times: Vec::new(), ..config.clone() };
    let base0 = build_data(&base_cfg)?;
    let base = run_blowup_study(&base0, &ScenarioConfig { track_ranges: false, ..base_cfg.clone() })?;
    let t_star = base.outcome.t_final();
    let g_base = base.outcome.all_records().fold(T::zero(), |m, r| m.max(r.norms.sup_grad_log_c));
    let outer = config.bump.outer_radius;
    let a = match config.target_interval {
        Some(t) => steer_a(t, t_star, config.rho_bar, g_base, outer)?,
        None => config.a,
    };
    let state0 = parabolic_rescale(&base0, RescaleParam::new(a)?)?;
    let run_cfg = ScenarioConfig { a, ..config.clone() };
    let study = run_blowup_study(&state0, &run_cfg)?;
    let steering = RescaleSteering {
        a,
        t_star_base: t_star,
        grad_log_c_base: g_base,
        predicted_radius: predicted_radius(a, t_star, config.rho_bar, g_base, outer),
        radius_floor: T::lit(6.0) * config.rho_bar * t_star,
        observed_location: argmax_grad_rho(&study.outcome.final_state),
        t_abort: study.outcome.t_final(),
    };

    // localization against the constant background (a²ρ̄, c̄)
    let (rho_c, c_c) = initial_fields(&ScenarioConfig { scenario: ScenarioKind::Constant, ..config.clone() })?;
    let background = state_from_fields(rho_c.map(|v| v * a * a), &c_c, &config.params)?;
    let tol = T::lit(10.0) * lipschitz(&state0) * config.grid.h();
    let mut monitor = DifferenceMonitor::new(vec![T::zero()], tol);
    let pair = run_pair(&state0, &background, &config.params, &config.solver, config.t_end, &mut monitor)?;
    let a_const = compute_a(&pair.first, &pair.second);
    let r0 = outer / a + T::lit(2.0) * config.grid.h();
    let speed = T::lit(6.0) * a_const;
    let ext = max_exterior_diff(&monitor, r0, speed);

    let mut r = ExperimentReport::from_study(&run_cfg, &state0, study)?;
    r.config = config.clone();
    r.config_hash = config_hash(config)?;
    r.steering = Some(steering);
    r.localization = Some(Localization { a: a_const, r0, speed, max_exterior_diff: ext, tol, clean: ext <= tol });
    Ok(r)
}

/// Largest state difference on `|x_k| ≤ w` for every transverse axis `k ≥ 1`.
struct SliceMonitor<T> {
    half_width: T,
    cells: Vec<usize>,
    max_diff: T,
    steps: usize,
}

impl<T: Real> SliceMonitor<T> {
    fn observe(&mut self, a: &SimState<T>, b: &SimState<T>) {
        let g = a.grid();
        if self.cells.is_empty() {
            self.cells = (0..g.len())
                .filter(|&i| (1..g.dim()).all(|k| g.center(g.axis_index(i, k)).abs() <= self.half_width))
                .collect();
        }
        for &i in &self.cells {
            let mut d = (a.rho.values()[i] - b.rho.values()[i]).abs();
            d = d.max((a.log_c.values()[i] - b.log_c.values()[i]).abs());
            for k in 0..g.dim() {
                d = d.max((a.q.component(k)[i] - b.q.component(k)[i]).abs());
            }
            self.max_diff = self.max_diff.max(d);
        }
        self.steps += 1;
    }
}

impl<T: Real> PairObserver<T> for SliceMonitor<T> {
    fn on_start(&mut self, a: &SimState<T>, b: &SimState<T>) {
        self.observe(a, b);
    }
    fn on_step(&mut self, a: &SimState<T>, b: &SimState<T>, _ra: &StepRecord<T>, _rb: &StepRecord<T>) -> bool {
        self.observe(a, b);
        true
    }
}

fn run_case2<T: Real + Serialize>(config: &ScenarioConfig<T>) -> Result<ExperimentReport<T>> {
    let state0 = build_data(config)?;
    let extended = build_data(&ScenarioConfig { scenario: ScenarioKind::Remark11, ..config.clone() })?;
    let mut slice = SliceMonitor { half_width: T::lit(0.5), cells: Vec::new(), max_diff: T::zero(), steps: 0 };
    let pair = run_pair(&state0, &extended, &config.params, &config.solver, config.t_end, &mut slice)?;
    let tol = T::lit(10.0) * config.grid.h();
    let slice_report = SliceReport {
        slice_half_width: slice.half_width,
        max_diff: slice.max_diff,
        tol,
        agree: slice.max_diff <= tol,
        steps: pair.first.steps,
        t_final: pair.first.t_final(),
    };
    let mut r = if pair.first.verdict == Verdict::GradientAbort || config.grid.dim() == 1 {
        let mut r = ExperimentReport::skeleton(config, &state0, &pair.first)?;
        r.blowup = Some(classify_blowup(&pair.first, required_growth(&pair.first, config)));
        r
    } else {
        let mut r = run_plain(config, &state0)?;
        r.notes.push(format!("paired run stopped with {:?}; tensor run continued alone", pair.first.verdict));
        r
    };
    r.slice = Some(slice_report);
    Ok(r)
}

/// Bump-versus-constant pair checked against the cone of finite propagation speed.
#[derive(Debug, Clone, Serialize)]
pub struct ConeExperiment<T> {
    pub cone: ConeSpec<T>,
    pub report: ConeReport<T>,
    pub a_symmetric: T,
    pub lipschitz: T,
    pub bump_verdict: Verdict,
    pub t_final: T,
    pub steps: usize,
    #[serde(skip)]
    pub monitor: DifferenceMonitor<T>,
}

/// Runs the data of `config` against its constant background `(ρ̄, c̄)` up to `t_star`
/// and checks the cone centred at `center`. `A` is measured from the pair, with the
/// bump run supplying `∇log c` and the background supplying `ρ`.
pub fn run_cone_experiment<T: Real>(config: &ScenarioConfig<T>, center: Vec<T>, t_star: T) -> Result<ConeExperiment<T>> {
    if center.len() != config.grid.dim() {
        return Err(Error::InvalidParameter("cone centre dimension does not match the grid".into()));
    }
    let bumped = build_data(config)?;
    let background = build_data(&ScenarioConfig { scenario: ScenarioKind::Constant, ..config.clone() })?;
    let lip = lipschitz(&bumped);
    let tol = T::lit(10.0) * lip * config.grid.h();
    let mut monitor = DifferenceMonitor::new(center.clone(), tol);
    let pair = run_pair(&bumped, &background, &config.params, &config.solver, Some(t_star), &mut monitor)?;
    let a = compute_a(&pair.first, &pair.second);
    let cone = ConeSpec::new(center, a, t_star)?;
    let lambda = empirical_speed_bound(&pair.first).max(empirical_speed_bound(&pair.second));
    let report = verify_cone((&bumped, &background), &monitor, &cone, tol, lambda)?;
    Ok(ConeExperiment {
        cone,
        report,
        a_symmetric: compute_a_symmetric(&pair.first, &pair.second),
        lipschitz: lip,
        bump_verdict: pair.first.verdict,
        t_final: pair.first.t_final(),
        steps: pair.first.steps,
        monitor,
    })
}

/// Parabolic scaling: the run of the rescaled data against the rescaled run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck<T> {
    pub a: T,
    /// Time of the original run; the rescaled run is compared at `t / a²`.
    pub t: T,
    pub l1_rho: T,
    pub l1_q: T,
    pub l1_log_c: T,
}

impl<T: Real> ScalingCheck<T> {
    pub fn l1_total(&self) -> T {
        self.l1_rho + self.l1_q + self.l1_log_c
    }
}

/// Runs the data of `config` to `t`, and its rescaling by `a` to `t / a²`, then compares
/// `rescale(run(U₀))` with `run(rescale(U₀))` in `L¹`. The resolution cap is switched
/// off: `t` is meant to precede the blow-up.
pub fn run_scaling_check<T: Real>(config: &ScenarioConfig<T>, a: T, t: T) -> Result<ScalingCheck<T>> {
    let solver = SolverConfig { resolution_abort: None, ..config.solver };
    let state0 = build_data(config)?;
    let param = RescaleParam::new(a)?;
    let scaled0 = parabolic_rescale(&state0, param)?;
    let original = run(&state0, &config.params, &solver, Some(t), &mut ())?;
    let scaled = run(&scaled0, &config.params, &solver, Some(t / (a * a)), &mut ())?;
    for o in [&original, &scaled] {
        if o.verdict != Verdict::Completed {
            return Err(Error::InvalidParameter(format!("scaling run ended early: {:?}", o.verdict)));
        }
    }
    let expected = parabolic_rescale(&original.final_state, param)?;
    let got = &scaled.final_state;
    let cell = expected.grid().cell_volume();
    let l1 = |x: &[T], y: &[T]| x.iter().zip(y).fold(T::zero(), |s, (&u, &v)| s + (u - v).abs()) * cell;
    let mut l1_q = T::zero();
    for k in 0..expected.grid().dim() {
        l1_q = l1_q + l1(expected.q.component(k), got.q.component(k));
    }
    Ok(ScalingCheck {
        a,
        t,
        l1_rho: l1(expected.rho.values(), got.rho.values()),
        l1_q,
        l1_log_c: l1(expected.log_c.values(), got.log_c.values()),
    })
}
