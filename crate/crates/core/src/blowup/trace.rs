//! Tracing `dx/dt = λ₂(ρ, q)` through a 1D run and sampling `P`, `Q`, `P̃ = ∂ₓP`, `Φ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{cubic_weights, interpolate_1d, locate};
use crate::real::Real;
use crate::riemann::{eigen, w_detail, CharOdeConfig, InvariantMap, PhasePoint, PsiTable};
use crate::solver::{speeds, Observer, StepRecord};
use crate::state::SimState;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CharTrace<T> {
    pub times: Vec<T>,
    pub positions: Vec<T>,
    #[serde(rename = "P")]
    pub p: Vec<T>,
    #[serde(rename = "Q")]
    pub q: Vec<T>,
    #[serde(rename = "P_tilde")]
    pub p_tilde: Vec<T>,
    #[serde(rename = "Phi")]
    pub phi: Vec<T>,
    /// The characteristic left the resolved region or could not be sampled.
    pub truncated: bool,
    /// First sample at which the run was flagged under-resolved.
    pub under_resolved_index: Option<usize>,
}

impl<T: Real> CharTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples before the under-resolved flag (all samples when never flagged).
    pub fn resolved_len(&self) -> usize {
        self.under_resolved_index.unwrap_or(self.len())
    }

    /// `max |P(x(t),t) - P(x₀,0)|` over the first `upto` samples.
    pub fn p_drift(&self, upto: usize) -> T {
        let p0 = self.p.first().copied().unwrap_or(T::zero());
        self.p[..upto.min(self.p.len())].iter().fold(T::zero(), |m, &p| m.max((p - p0).abs()))
    }
}

fn sample_invariants<T: Real>(
    state: &SimState<T>,
    x: T,
    map: &InvariantMap<T>,
) -> Result<(T, T, T)> {
    let g = state.grid();
    let rho = state.rho.values();
    let q = state.q.component(0);
    let r = interpolate_1d(g, rho, x);
    let v = interpolate_1d(g, q, x);
    let w = map.w(PhasePoint::new(r, v)?)?;
    // P on the six cells around the stencil, central differences on the inner four
    let n = g.n() as isize;
    let (base, t) = locate(g, x);
    let cell = |o: isize| (base + o).rem_euclid(n) as usize;
    let mut pv = [T::zero(); 6];
    for (k, slot) in pv.iter_mut().enumerate() {
        let i = cell(k as isize - 2);
        *slot = map.w(PhasePoint::new(rho[i], q[i])?)?.w1;
    }
    let inv_2h = T::one() / (T::lit(2.0) * g.h());
    let wts = cubic_weights(t);
    let mut p_tilde = T::zero();
    for k in 0..4 {
        p_tilde = p_tilde + wts[k] * (pv[k + 2] - pv[k]) * inv_2h;
    }
    Ok((w.w1, w.w2, p_tilde))
}

/// `∂ₓP` by the chain rule `f₁ (∂ₓρ + ((S - q)/2) ∂ₓq)` with interpolated
/// central differences of `ρ` and `q`.
pub fn p_tilde_chain<T: Real>(state: &SimState<T>, x: T, config: &CharOdeConfig<T>) -> Result<T> {
    let g = state.grid();
    let rho = state.rho.values();
    let q = state.q.component(0);
    let z = PhasePoint::new(interpolate_1d(g, rho, x), interpolate_1d(g, q, x))?;
    let drho = crate::calculus::diff_values(g, rho, 0, 1);
    let dq = crate::calculus::diff_values(g, q, 0, 1);
    let d = w_detail(z, config)?;
    let e = eigen(z)?;
    Ok(d.f1 * (interpolate_1d(g, &drho, x) - e.lambda1 * interpolate_1d(g, &dq, x)))
}

fn lambda2_at<T: Real>(state: &SimState<T>, x: T) -> T {
    let g = state.grid();
    let r = interpolate_1d(g, state.rho.values(), x).max(T::min_positive_value());
    let v = interpolate_1d(g, state.q.component(0), x);
    speeds(r, v).1
}

/// Run observer that integrates the `λ₂` characteristic from `x0` with Heun's method
/// on the solver's own steps.
pub struct LambdaTracer<'a, T> {
    map: &'a InvariantMap<T>,
    psi: &'a PsiTable<T>,
    x: T,
    pub trace: CharTrace<T>,
    pub error: Option<Error>,
}

impl<'a, T: Real> LambdaTracer<'a, T> {
    pub fn new(x0: T, map: &'a InvariantMap<T>, psi: &'a PsiTable<T>) -> Self {
        LambdaTracer { map, psi, x: x0, trace: CharTrace::default(), error: None }
    }

    fn push(&mut self, state: &SimState<T>) -> Result<()> {
        let g = state.grid();
        if self.x.abs() > g.half_width() - T::lit(4.0) * g.h() {
            return Err(Error::DomainConflict(format!("characteristic reached x = {}", self.x)));
        }
        let (p, q, pt) = sample_invariants(state, self.x, self.map)?;
        // Φ is only tabulated near the initial Q range; outside it the sample is NaN
        let phi = self.psi.phi(q).unwrap_or(T::nan());
        self.trace.times.push(state.t_scaled);
        self.trace.positions.push(self.x);
        self.trace.p.push(p);
        self.trace.q.push(q);
        self.trace.p_tilde.push(pt);
        self.trace.phi.push(phi);
        Ok(())
    }

    pub fn finish(self) -> CharTrace<T> {
        self.trace
    }

    fn advance(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: Option<&StepRecord<T>>) -> bool {
        if self.trace.truncated {
            return true;
        }
        let dt = next.t_scaled - prev.t_scaled;
        let k1 = lambda2_at(prev, self.x);
        let k2 = lambda2_at(next, self.x + dt * k1);
        self.x = self.x + T::lit(0.5) * dt * (k1 + k2);
        if let Err(e) = self.push(next) {
            self.trace.truncated = true;
            self.error = Some(e);
            return true;
        }
        if let Some(r) = rec {
            let level = T::lit(0.5) / next.grid().h();
            if self.trace.under_resolved_index.is_none() && r.norms.sup_grad_rho >= level {
                self.trace.under_resolved_index = Some(self.trace.len() - 1);
            }
        }
        true
    }
}

impl<T: Real> Observer<T> for LambdaTracer<'_, T> {
    fn on_start(&mut self, state: &SimState<T>) {
        if let Err(e) = self.push(state) {
            self.trace.truncated = true;
            self.error = Some(e);
        }
    }

    fn on_step(&mut self, prev: &SimState<T>, next: &SimState<T>, rec: &StepRecord<T>) -> bool {
        self.advance(prev, next, Some(rec))
    }
}

/// Traces through stored snapshots (first entry is the initial state).
pub fn trace_lambda2<T: Real>(
    snapshots: &[SimState<T>],
    x0: T,
    map: &InvariantMap<T>,
    psi: &PsiTable<T>,
) -> Result<CharTrace<T>> {
    let first = snapshots.first().ok_or_else(|| Error::InvalidParameter("no snapshots".into()))?;
    if first.grid().dim() != 1 {
        return Err(Error::InvalidParameter("characteristic tracing is one-dimensional".into()));
    }
    let mut tr = LambdaTracer::new(x0, map, psi);
    tr.on_start(first);
    if let Some(e) = tr.error.take() {
        return Err(e);
    }
    for w in snapshots.windows(2) {
        let level = T::lit(0.5) / w[1].grid().h();
        let flagged = crate::solver::sup_grad_rho(&w[1]) >= level;
        tr.advance(&w[0], &w[1], None);
        if flagged && tr.trace.under_resolved_index.is_none() && !tr.trace.truncated {
            tr.trace.under_resolved_index = Some(tr.trace.len() - 1);
        }
    }
    Ok(tr.finish())
}
