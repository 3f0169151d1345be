//! Finite-volume evolution of `ρ_t + ∇·(ρq) = 0`, `q_t + ∇ρ = 0` in scaled time,
//! with the exact exponential update of `log c` and run-level blow-up guards.

pub mod flux;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use flux::{flux, max_speed, minmod, numerical_flux, numerical_flux_hll, numerical_flux_rusanov, speeds, Scheme};

use crate::calculus::{diff_values, gradient};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::norms::{norm_report, NormReport};
use crate::real::Real;
use crate::state::{PhysParams, SimState};
use flux::{face_flux, MAX_COMPONENTS};

const PAR_THRESHOLD: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegrator {
    #[default]
    SspRk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    /// Piecewise constant states (monotone baseline).
    #[default]
    FirstOrder,
    /// Minmod-limited piecewise linear states.
    Minmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig<T> {
    pub cfl: T,
    pub scheme: Scheme,
    pub time_integrator: TimeIntegrator,
    pub reconstruction: Reconstruction,
    /// Viscosity; the larger of this and `PhysParams::epsilon` is used.
    pub epsilon: T,
    pub max_steps: usize,
    /// Abort once `sup|∇ρ|` reaches this multiple of its initial value.
    pub gradient_abort_factor: T,
    /// Optional resolution cap: also abort once some front of `ρ` is carried by about
    /// two cells, i.e. a central jump `|ρ_{i+1} - ρ_{i-1}|` reaches this fraction of the
    /// oscillation of `ρ` over the surrounding window (see [`front_ratio`]).
    pub resolution_abort: Option<T>,
    /// Order `m` of the tracked energy `X_m`.
    pub norm_m: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            cfl: T::lit(0.45),
            scheme: Scheme::Rusanov,
            time_integrator: TimeIntegrator::SspRk2,
            reconstruction: Reconstruction::FirstOrder,
            epsilon: T::zero(),
            max_steps: 1_000_000,
            gradient_abort_factor: T::lit(1e6),
            resolution_abort: None,
            norm_m: 2,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.epsilon >= T::zero()) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.gradient_abort_factor > T::one()) {
            return Err(Error::InvalidParameter("gradient_abort_factor must exceed 1".into()));
        }
        if let Some(r) = self.resolution_abort {
            if !(r > T::zero()) {
                return Err(Error::InvalidParameter("resolution_abort must be positive".into()));
            }
        }
        if self.norm_m < 1 {
            return Err(Error::InvalidParameter("norm_m must be >= 1".into()));
        }
        Ok(())
    }

    fn effective_epsilon(&self, params: &PhysParams<T>) -> T {
        self.epsilon.max(params.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub t_scaled: T,
    pub dt: T,
    pub max_abs_lambda: T,
    pub norms: NormReport<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Completed,
    GradientAbort,
    PositivityFailure,
    StepLimit,
}

/// Largest `max(|λ₁|,|λ₂|)` over cells and axes.
pub fn max_abs_lambda<T: Real>(state: &SimState<T>) -> T {
    let rho = state.rho.values();
    let mut worst = T::zero();
    for k in 0..state.grid().dim() {
        let q = state.q.component(k);
        let m = if rho.len() >= PAR_THRESHOLD {
            rho.par_iter().zip(q.par_iter()).map(|(&r, &v)| max_speed(r, v)).reduce(T::zero, |a, b| a.max(b))
        } else {
            rho.iter().zip(q).fold(T::zero(), |a, (&r, &v)| a.max(max_speed(r, v)))
        };
        worst = worst.max(m);
    }
    worst
}

/// CFL time step; with viscosity also bounded by the explicit parabolic limit.
pub fn cfl_dt<T: Real>(state: &SimState<T>, params: &PhysParams<T>, config: &SolverConfig<T>) -> Result<T> {
    let g = state.grid();
    let d = T::from_usize_lossy(g.dim());
    let s = max_abs_lambda(state);
    if !s.is_finite() || !(s > T::zero()) {
        return Err(Error::NonFinite(format!("characteristic speed {s}")));
    }
    let mut dt = config.cfl * g.h() / (d * s);
    let eps = config.effective_epsilon(params);
    if eps > T::zero() {
        let par = config.cfl * g.h() * g.h() * params.time_scale() / (T::lit(2.0) * d * eps);
        dt = dt.min(par);
    }
    Ok(dt)
}

fn par_map<T: Real>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Semi-discrete right-hand side for `[ρ, q_0, …]`.
fn rhs<T: Real>(grid: &Grid<T>, u: &[Vec<T>], config: &SolverConfig<T>, visc: T) -> Vec<Vec<T>> {
    let n = grid.len();
    let ncomp = u.len();
    let inv_h = T::one() / grid.h();
    let half = T::lit(0.5);
    let mut du: Vec<Vec<T>> = vec![vec![T::zero(); n]; ncomp];

    for axis in 0..grid.dim() {
        let slopes: Option<Vec<Vec<T>>> = match config.reconstruction {
            Reconstruction::FirstOrder => None,
            Reconstruction::Minmod => Some(
                u.iter()
                    .map(|v| {
                        par_map(n, |i| {
                            let p = v[grid.shift(i, axis, 1)];
                            let m = v[grid.shift(i, axis, -1)];
                            minmod(v[i] - m, p - v[i])
                        })
                    })
                    .collect(),
            ),
        };
        // face i+1/2 between cell i and its +1 neighbour
        let faces: Vec<[T; MAX_COMPONENTS]> = {
            let f = |i: usize| {
                let j = grid.shift(i, axis, 1);
                let mut ul = [T::zero(); MAX_COMPONENTS];
                let mut ur = [T::zero(); MAX_COMPONENTS];
                for c in 0..ncomp {
                    ul[c] = u[c][i];
                    ur[c] = u[c][j];
                    if let Some(s) = &slopes {
                        ul[c] = ul[c] + half * s[c][i];
                        ur[c] = ur[c] - half * s[c][j];
                    }
                }
                face_flux(config.scheme, &ul, &ur, ncomp, axis)
            };
            if n >= PAR_THRESHOLD {
                (0..n).into_par_iter().map(f).collect()
            } else {
                (0..n).map(f).collect()
            }
        };
        for (c, d) in du.iter_mut().enumerate() {
            for (i, slot) in d.iter_mut().enumerate() {
                let left = faces[grid.shift(i, axis, -1)][c];
                *slot = *slot - (faces[i][c] - left) * inv_h;
            }
        }
    }

    if visc > T::zero() {
        for axis in 0..grid.dim() {
            let lap = diff_values(grid, &u[0], axis, 2);
            for (a, l) in du[0].iter_mut().zip(lap) {
                *a = *a + visc * l;
            }
        }
    }
    du
}

fn pack_state<T: Real>(state: &SimState<T>) -> Vec<Vec<T>> {
    let mut u = vec![state.rho.values().to_vec()];
    for k in 0..state.grid().dim() {
        u.push(state.q.component(k).to_vec());
    }
    u
}

fn axpy<T: Real>(u: &[Vec<T>], du: &[Vec<T>], dt: T) -> Vec<Vec<T>> {
    u.iter().zip(du).map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + dt * y).collect()).collect()
}

fn all_positive<T: Real>(v: &[T]) -> bool {
    v.iter().all(|&x| x > T::zero() && x.is_finite())
}

/// One SSP-RK2 step of fixed size `dt`. Returns `None` when a stage loses positivity.
pub fn step_with_dt<T: Real>(
    state: &SimState<T>,
    params: &PhysParams<T>,
    config: &SolverConfig<T>,
    dt: T,
) -> Result<Option<SimState<T>>> {
    let grid = *state.grid();
    let visc = config.effective_epsilon(params) / params.time_scale();
    let u0 = pack_state(state);
    let u1 = axpy(&u0, &rhs(&grid, &u0, config, visc), dt);
    if !all_positive(&u1[0]) {
        return Ok(None);
    }
    let u2 = axpy(&u1, &rhs(&grid, &u1, config, visc), dt);
    let half = T::lit(0.5);
    let mut u: Vec<Vec<T>> =
        u0.iter().zip(&u2).map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| half * (x + y)).collect()).collect();
    if !all_positive(&u[0]) || u.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Ok(None);
    }
    let kappa = params.consumption_rate();
    let log_c: Vec<T> = state
        .log_c
        .values()
        .iter()
        .zip(u0[0].iter().zip(&u1[0]))
        .map(|(&l, (&r0, &r1))| l - kappa * half * (r0 + r1) * dt)
        .collect();
    let rho = u.remove(0);
    Ok(Some(SimState {
        rho: ScalarField::from_raw(grid, rho),
        q: VectorField::from_raw(grid, u),
        log_c: ScalarField::from_raw(grid, log_c),
        t_scaled: state.t_scaled + dt,
    }))
}

fn step_retry<T: Real>(
    state: &SimState<T>,
    params: &PhysParams<T>,
    config: &SolverConfig<T>,
    dt: T,
) -> Result<(SimState<T>, T)> {
    if let Some(s) = step_with_dt(state, params, config, dt)? {
        return Ok((s, dt));
    }
    let half = dt * T::lit(0.5);
    if let Some(s) = step_with_dt(state, params, config, half)? {
        return Ok((s, half));
    }
    Err(Error::PositivityFailure {
        t: state.t_scaled.to_f64_lossy(),
        min_rho: state.rho.min().to_f64_lossy(),
    })
}

/// Single CFL-limited step, retried once with half the step on positivity loss.
pub fn step<T: Real>(
    state: &SimState<T>,
    params: &PhysParams<T>,
    config: &SolverConfig<T>,
) -> Result<(SimState<T>, StepRecord<T>)> {
    config.validate()?;
    params.validate()?;
    let dt = cfl_dt(state, params, config)?;
    let (next, dt) = step_retry(state, params, config, dt)?;
    let rec = StepRecord {
        t_scaled: next.t_scaled,
        dt,
        max_abs_lambda: max_abs_lambda(&next),
        norms: norm_report(&next, params, config.norm_m)?,
    };
    Ok((next, rec))
}

/// Hooks called while a run advances.
pub trait Observer<T: Real> {
    fn on_start(&mut self, _state: &SimState<T>) {}
    /// Return `false` to stop the run (verdict `completed`).
    fn on_step(&mut self, _prev: &SimState<T>, _next: &SimState<T>, _rec: &StepRecord<T>) -> bool {
        true
    }
}

impl<T: Real> Observer<T> for () {}

impl<T: Real, O: Observer<T> + ?Sized> Observer<T> for &mut O {
    fn on_start(&mut self, state: &SimState<T>) {
        (**self).on_start(state);
    }
    fn on_step(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: &StepRecord<T>) -> bool {
        (**self).on_step(prev, next, rec)
    }
}

impl<T: Real, O: Observer<T>> Observer<T> for Option<O> {
    fn on_start(&mut self, state: &SimState<T>) {
        if let Some(o) = self {
            o.on_start(state);
        }
    }
    fn on_step(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: &StepRecord<T>) -> bool {
        self.as_mut().is_none_or(|o| o.on_step(prev, next, rec))
    }
}

impl<T: Real, A: Observer<T>, B: Observer<T>> Observer<T> for (A, B) {
    fn on_start(&mut self, state: &SimState<T>) {
        self.0.on_start(state);
        self.1.on_start(state);
    }
    fn on_step(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: &StepRecord<T>) -> bool {
        let a = self.0.on_step(prev, next, rec);
        let b = self.1.on_step(prev, next, rec);
        a && b
    }
}

/// Adapter turning a closure into an [`Observer`].
pub struct FnObserver<F>(pub F);

impl<T: Real, F> Observer<T> for FnObserver<F>
where
    F: FnMut(&SimState<T>, &SimState<T>, &StepRecord<T>) -> bool,
{
    fn on_step(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: &StepRecord<T>) -> bool {
        (self.0)(prev, next, rec)
    }
}

/// Records every state; memory heavy, intended for small grids and tests.
#[derive(Debug, Default)]
pub struct Snapshots<T> {
    pub states: Vec<SimState<T>>,
}

impl<T: Real> Observer<T> for Snapshots<T> {
    fn on_start(&mut self, state: &SimState<T>) {
        self.states.push(state.clone());
    }
    fn on_step(&mut self, _prev: &SimState<T>, next: &SimState<T>, _rec: &StepRecord<T>) -> bool {
        self.states.push(next.clone());
        true
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome<T> {
    pub initial: StepRecord<T>,
    pub records: Vec<StepRecord<T>>,
    #[serde(skip)]
    pub final_state: SimState<T>,
    pub verdict: Verdict,
    /// `sup|∇ρ|` reached `0.5/h` at some step.
    pub under_resolved: bool,
    /// Gradient level that triggers `gradient_abort`.
    pub abort_threshold: T,
    pub steps: usize,
}

impl<T: Real> RunOutcome<T> {
    pub fn t_final(&self) -> T {
        self.final_state.t_scaled
    }

    /// Initial record followed by all step records.
    pub fn all_records(&self) -> impl Iterator<Item = &StepRecord<T>> {
        std::iter::once(&self.initial).chain(self.records.iter())
    }

    pub fn gradient_amplification(&self) -> T {
        let g0 = self.initial.norms.sup_grad_rho;
        let gmax = self.all_records().fold(T::zero(), |m, r| m.max(r.norms.sup_grad_rho));
        gmax / g0
    }
}

/// Half width of the window used by [`front_ratio`].
pub const FRONT_WINDOW: usize = 8;
/// Windows whose oscillation is below this fraction of `osc(ρ₀)` are ignored.
pub const FRONT_FLOOR: f64 = 0.05;

/// Largest ratio, over cells and axes, of the central jump `|ρ_{i+1} - ρ_{i-1}|` to the
/// oscillation of `ρ` over the `2·FRONT_WINDOW + 1` cells around `i`, skipping windows
/// whose oscillation is below `floor`. Smooth profiles give at most about
/// `2 / FRONT_WINDOW`; a front squeezed into two cells gives close to 1.
pub fn front_ratio<T: Real>(rho: &ScalarField<T>, floor: T) -> T {
    let g = rho.grid();
    let v = rho.values();
    let w = FRONT_WINDOW as isize;
    let cell = |i: usize| {
        let mut best = T::zero();
        for axis in 0..g.dim() {
            let jump = (v[g.shift(i, axis, 1)] - v[g.shift(i, axis, -1)]).abs();
            if jump == T::zero() {
                continue;
            }
            let (mut lo, mut hi) = (v[i], v[i]);
            for k in 1..=w {
                for j in [g.shift(i, axis, k), g.shift(i, axis, -k)] {
                    lo = lo.min(v[j]);
                    hi = hi.max(v[j]);
                }
            }
            let osc = hi - lo;
            if osc >= floor && osc > T::zero() {
                best = best.max(jump / osc);
            }
        }
        best
    };
    if g.len() >= PAR_THRESHOLD {
        (0..g.len()).into_par_iter().map(cell).reduce(T::zero, |a, b| a.max(b))
    } else {
        (0..g.len()).map(cell).fold(T::zero(), |a, b| a.max(b))
    }
}

struct Tracker<T> {
    initial: StepRecord<T>,
    records: Vec<StepRecord<T>>,
    threshold: T,
    flag_level: T,
    under_resolved: bool,
    /// `(θ, floor)` of the resolution cap.
    front: Option<(T, T)>,
    front_hit: bool,
}

impl<T: Real> Tracker<T> {
    fn new(state: &SimState<T>, params: &PhysParams<T>, config: &SolverConfig<T>) -> Result<Self> {
        let norms = norm_report(state, params, config.norm_m)?;
        let h = state.grid().h();
        let threshold = if norms.sup_grad_rho > T::zero() {
            config.gradient_abort_factor * norms.sup_grad_rho
        } else {
            T::infinity()
        };
        let osc0 = state.rho.max() - state.rho.min();
        let front = config
            .resolution_abort
            .filter(|_| osc0 > T::zero())
            .map(|theta| (theta, T::lit(FRONT_FLOOR) * osc0));
        let flag_level = T::lit(0.5) / h;
        Ok(Tracker {
            initial: StepRecord {
                t_scaled: state.t_scaled,
                dt: T::zero(),
                max_abs_lambda: max_abs_lambda(state),
                norms,
            },
            records: Vec::new(),
            threshold,
            flag_level,
            under_resolved: norms.sup_grad_rho >= flag_level,
            front,
            front_hit: false,
        })
    }

    fn record(&mut self, next: &SimState<T>, dt: T, params: &PhysParams<T>, config: &SolverConfig<T>) -> Result<StepRecord<T>> {
        let rec = StepRecord {
            t_scaled: next.t_scaled,
            dt,
            max_abs_lambda: max_abs_lambda(next),
            norms: norm_report(next, params, config.norm_m)?,
        };
        if rec.norms.sup_grad_rho >= self.flag_level {
            self.under_resolved = true;
        }
        if let Some((theta, floor)) = self.front {
            self.front_hit = front_ratio(&next.rho, floor) >= theta;
        }
        self.records.push(rec);
        Ok(rec)
    }

    fn aborted(&self) -> bool {
        self.front_hit || self.records.last().is_some_and(|r| r.norms.sup_grad_rho >= self.threshold)
    }

    fn finish(self, final_state: SimState<T>, verdict: Verdict) -> RunOutcome<T> {
        let steps = self.records.len();
        RunOutcome {
            initial: self.initial,
            records: self.records,
            final_state,
            verdict,
            under_resolved: self.under_resolved,
            abort_threshold: self.threshold,
            steps,
        }
    }
}

fn clip_dt<T: Real>(dt: T, t: T, t_end: Option<T>) -> (T, bool) {
    match t_end {
        Some(te) if t + dt >= te => (te - t, true),
        _ => (dt, false),
    }
}

/// Steps until `t_end`, the step limit, a gradient abort, positivity loss, or the
/// observer asks to stop.
pub fn run<T: Real>(
    state0: &SimState<T>,
    params: &PhysParams<T>,
    config: &SolverConfig<T>,
    t_end: Option<T>,
    observer: &mut impl Observer<T>,
) -> Result<RunOutcome<T>> {
    config.validate()?;
    params.validate()?;
    state0.validate()?;
    let mut tracker = Tracker::new(state0, params, config)?;
    observer.on_start(state0);
    let mut state = state0.clone();
    if t_end.is_some_and(|te| state.t_scaled >= te) {
        return Ok(tracker.finish(state, Verdict::Completed));
    }
    loop {
        if tracker.records.len() >= config.max_steps {
            return Ok(tracker.finish(state, Verdict::StepLimit));
        }
        let (dt, last) = clip_dt(cfl_dt(&state, params, config)?, state.t_scaled, t_end);
        let (mut next, used) = match step_retry(&state, params, config, dt) {
            Ok(v) => v,
            Err(Error::PositivityFailure { .. }) => return Ok(tracker.finish(state, Verdict::PositivityFailure)),
            Err(e) => return Err(e),
        };
        let reached_end = last && used == dt;
        if reached_end {
            if let Some(te) = t_end {
                next.t_scaled = te;
            }
        }
        let rec = tracker.record(&next, used, params, config)?;
        let keep_going = observer.on_step(&state, &next, &rec);
        state = next;
        if tracker.aborted() {
            return Ok(tracker.finish(state, Verdict::GradientAbort));
        }
        if reached_end || !keep_going {
            return Ok(tracker.finish(state, Verdict::Completed));
        }
    }
}

/// Hooks for lockstep paired runs.
pub trait PairObserver<T: Real> {
    fn on_start(&mut self, _a: &SimState<T>, _b: &SimState<T>) {}
    fn on_step(&mut self, _a: &SimState<T>, _b: &SimState<T>, _ra: &StepRecord<T>, _rb: &StepRecord<T>) -> bool {
        true
    }
}

impl<T: Real> PairObserver<T> for () {}

#[derive(Debug, Clone, Serialize)]
pub struct PairOutcome<T> {
    pub first: RunOutcome<T>,
    pub second: RunOutcome<T>,
}

/// Advances two runs with a shared step (the smaller CFL step of the two). Stops as soon
/// as either run ends; the partner then reports `completed`.
pub fn run_pair<T: Real>(
    a0: &SimState<T>,
    b0: &SimState<T>,
    params: &PhysParams<T>,
    config: &SolverConfig<T>,
    t_end: Option<T>,
    observer: &mut impl PairObserver<T>,
) -> Result<PairOutcome<T>> {
    config.validate()?;
    params.validate()?;
    a0.validate()?;
    b0.validate()?;
    let mut ta = Tracker::new(a0, params, config)?;
    let mut tb = Tracker::new(b0, params, config)?;
    observer.on_start(a0, b0);
    let mut a = a0.clone();
    let mut b = b0.clone();
    let done = |ta: Tracker<T>, tb: Tracker<T>, a, b, va, vb| PairOutcome { first: ta.finish(a, va), second: tb.finish(b, vb) };
    loop {
        if ta.records.len() >= config.max_steps {
            return Ok(done(ta, tb, a, b, Verdict::StepLimit, Verdict::StepLimit));
        }
        let dt = cfl_dt(&a, params, config)?.min(cfl_dt(&b, params, config)?);
        let (dt, last) = clip_dt(dt, a.t_scaled, t_end);
        let mut attempt = dt;
        let mut pair = None;
        for _ in 0..2 {
            let na = step_with_dt(&a, params, config, attempt)?;
            let nb = step_with_dt(&b, params, config, attempt)?;
            match (na, nb) {
                (Some(x), Some(y)) => {
                    pair = Some((x, y));
                    break;
                }
                (x, y) => {
                    if attempt < dt {
                        let va = if x.is_none() { Verdict::PositivityFailure } else { Verdict::Completed };
                        let vb = if y.is_none() { Verdict::PositivityFailure } else { Verdict::Completed };
                        return Ok(done(ta, tb, a, b, va, vb));
                    }
                    attempt = attempt * T::lit(0.5);
                }
            }
        }
        let Some((mut na, mut nb)) = pair else {
            return Ok(done(ta, tb, a, b, Verdict::PositivityFailure, Verdict::PositivityFailure));
        };
        let reached_end = last && attempt == dt;
        if reached_end {
            if let Some(te) = t_end {
                na.t_scaled = te;
                nb.t_scaled = te;
            }
        }
        let ra = ta.record(&na, attempt, params, config)?;
        let rb = tb.record(&nb, attempt, params, config)?;
        let keep = observer.on_step(&na, &nb, &ra, &rb);
        a = na;
        b = nb;
        let (aa, ab) = (ta.aborted(), tb.aborted());
        if aa || ab {
            let va = if aa { Verdict::GradientAbort } else { Verdict::Completed };
            let vb = if ab { Verdict::GradientAbort } else { Verdict::Completed };
            return Ok(done(ta, tb, a, b, va, vb));
        }
        if reached_end || !keep {
            return Ok(done(ta, tb, a, b, Verdict::Completed, Verdict::Completed));
        }
    }
}

/// `sup|∇ρ|` of a state (central differences).
pub fn sup_grad_rho<T: Real>(state: &SimState<T>) -> T {
    gradient(&state.rho).sup_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};

    fn constant(n: usize, l: f64, rho: f64) -> SimState<f64> {
        let g = make_grid(1, n, l, Boundary::Periodic).unwrap();
        SimState::new(ScalarField::constant(g, rho), VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap()
    }

    #[test]
    fn cfl_example() {
        let s = constant(80, 4.0, 1.0); // h = 0.1
        let dt = cfl_dt(&s, &PhysParams::unit(), &SolverConfig::default()).unwrap();
        assert!((dt - 0.045).abs() < 1e-15);
        let s2 = constant(80, 4.0, 2.0);
        let dt2 = cfl_dt(&s2, &PhysParams::unit(), &SolverConfig::default()).unwrap();
        assert!((dt / dt2 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parabolic_limit_dominates() {
        let s = constant(80, 4.0, 1.0);
        let cfg = SolverConfig { epsilon: 10.0, ..SolverConfig::default() };
        let dt = cfl_dt(&s, &PhysParams::unit(), &cfg).unwrap();
        assert!((dt - 0.45 * 0.01 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn constant_state_is_stationary() {
        let s = constant(16, 4.0, 1.0);
        let out = run(&s, &PhysParams::unit(), &SolverConfig::default(), Some(1.0), &mut ()).unwrap();
        assert_eq!(out.verdict, Verdict::Completed);
        assert_eq!(out.final_state.t_scaled, 1.0);
        assert!(out.final_state.rho.values().iter().all(|&r| r == 1.0));
        let c = out.final_state.log_c.at(3).exp();
        assert!((c - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig { cfl: 1.5, ..SolverConfig::<f64>::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { gradient_abort_factor: 0.5, ..SolverConfig::<f64>::default() };
        assert!(bad.validate().is_err());
    }
}
