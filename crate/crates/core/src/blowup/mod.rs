//! Gradient blow-up machinery for 1D data: admissibility checks, the Riccati bound on
//! the blow-up time, time estimates from a traced characteristic, and the classifier
//! separating gradient blow-up from growth of the bounded quantities.

pub mod trace;

use serde::{Deserialize, Serialize};

pub use trace::{trace_lambda2, CharTrace, LambdaTracer};

use crate::calculus::{derivative_tensor, diff_values};
use crate::error::{Error, Result};
use crate::field::{check_same, ScalarField};
use crate::real::Real;
use crate::riemann::{AdaptiveRk4, ImageBounds, OdeEnd};
use crate::solver::{RunOutcome, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataCheckReport<T> {
    pub asm1_ok: bool,
    pub asm2_ok: bool,
    pub asm3_ok: bool,
    pub asm4_ok: bool,
    /// First cell centre satisfying the sign conditions.
    pub x0: Option<T>,
    pub x0_index: Option<usize>,
    /// Every cell satisfying the sign conditions.
    pub asm4_cells: Vec<usize>,
    pub beta1: T,
    pub beta2: T,
}

/// Checks positivity (`β₁ = min ρ₀`, `β₂ = min c₀`), finiteness of difference
/// quotients up to order 4, and searches for `x₀` with `∂ₓρ₀ ≤ 0` and
/// `c₀ ∂ₓₓc₀ < (∂ₓc₀)² - 10h²`.
pub fn check_blowup_data<T: Real>(rho0: &ScalarField<T>, c0: &ScalarField<T>) -> Result<DataCheckReport<T>> {
    check_same(rho0.grid(), c0.grid())?;
    let g = *rho0.grid();
    if g.dim() != 1 {
        return Err(Error::InvalidParameter("blow-up data check is one-dimensional".into()));
    }
    let beta1 = rho0.min();
    let beta2 = c0.min();
    let asm1_ok = beta1 > T::zero() && beta2 > T::zero();
    let asm2_ok = (1..=4).all(|k| {
        derivative_tensor(&g, rho0.values(), k)
            .iter()
            .chain(derivative_tensor(&g, c0.values(), k).iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    });
    let drho = diff_values(&g, rho0.values(), 0, 1);
    let dc = diff_values(&g, c0.values(), 0, 1);
    let dcc = diff_values(&g, c0.values(), 0, 2);
    let margin = T::lit(10.0) * g.h() * g.h();
    let c = c0.values();
    let asm4_cells: Vec<usize> = (0..g.len())
        .filter(|&i| drho[i] <= T::zero() && c[i] * dcc[i] < dc[i] * dc[i] - margin)
        .collect();
    let x0_index = asm4_cells.first().copied();
    Ok(DataCheckReport {
        asm1_ok,
        asm2_ok,
        asm3_ok: true,
        asm4_ok: x0_index.is_some(),
        x0: x0_index.map(|i| g.center(i)),
        x0_index,
        asm4_cells,
        beta1,
        beta2,
    })
}

/// `T_upper = M_Φ / (δ₀ |P̃(0)|)`: divergence time of the upper envelope
/// `M_Φ P̃(0) / (M_Φ + P̃(0) δ₀ t)`.
pub fn riccati_bound<T: Real>(p_tilde0: T, bounds: &ImageBounds<T>) -> Result<T> {
    riccati_bound_raw(p_tilde0, bounds.delta0, bounds.big_m_phi)
}

pub fn riccati_bound_raw<T: Real>(p_tilde0: T, delta0: T, big_m_phi: T) -> Result<T> {
    if !(p_tilde0 < T::zero()) {
        return Err(Error::InvalidParameter(format!("Riccati bound needs P~(0) < 0, got {p_tilde0}")));
    }
    if !(delta0 > T::zero()) || !(big_m_phi > T::zero()) {
        return Err(Error::InvalidParameter("delta0 and M_phi must be positive".into()));
    }
    Ok(big_m_phi / (delta0 * p_tilde0.abs()))
}

/// Integrates `y' = -(δ₀/M_Φ) y²` from `y(0) = y0 < 0` with adaptive RK4 until
/// `|y| ≥ |y0| · 10⁷`; returns that time.
pub fn riccati_envelope_time<T: Real>(y0: T, delta0: T, big_m_phi: T) -> Result<T> {
    if !(y0 < T::zero()) {
        return Err(Error::InvalidParameter("envelope needs y0 < 0".into()));
    }
    let k = delta0 / big_m_phi;
    let cap = y0.abs() * T::lit(1e7);
    let ode = AdaptiveRk4 { abs_tol: T::lit(1e-300).max(T::min_positive_value()), rel_tol: T::lit(1e-12), max_steps: 1_000_000 };
    let horizon = T::lit(10.0) / (k * y0.abs());
    let ev = |y: &[T; 1]| cap - y[0].abs();
    match ode.integrate(|_, y: &[T; 1]| [-k * y[0] * y[0]], T::zero(), [y0], horizon, Some(&ev))? {
        OdeEnd::Event { s, .. } => Ok(s),
        OdeEnd::Reached(_) => Err(Error::NoEstimate("envelope did not diverge within the horizon".into())),
    }
}

/// Least-squares fit of `1/|P̃|` against `t` over `[times, p_tilde]`; returns the root.
pub fn fit_reciprocal_root<T: Real>(times: &[T], p_tilde: &[T]) -> Result<T> {
    if times.len() != p_tilde.len() || times.len() < 3 {
        return Err(Error::NoEstimate("need at least three samples".into()));
    }
    if p_tilde.iter().any(|&p| !(p < T::zero())) {
        return Err(Error::NoEstimate("P~ is not negative on the fit window".into()));
    }
    let n = T::from_usize_lossy(times.len());
    let ys: Vec<T> = p_tilde.iter().map(|p| T::one() / p.abs()).collect();
    let mt = times.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&t, &y) in times.iter().zip(&ys) {
        sxy = sxy + (t - mt) * (y - my);
        sxx = sxx + (t - mt) * (t - mt);
    }
    if !(sxx > T::zero()) {
        return Err(Error::NoEstimate("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    if !(slope < T::zero()) {
        return Err(Error::NoEstimate(format!("|P~| is not growing on the tail (slope {slope})")));
    }
    let intercept = my - slope * mt;
    Ok(-intercept / slope)
}

/// Blow-up time from the Riccati structure: `1/|P̃|` is fitted by a line on the last
/// third of the trace and extrapolated to zero.
pub fn estimate_blowup_time<T: Real>(trace: &CharTrace<T>) -> Result<T> {
    let n = trace.times.len();
    if n < 3 {
        return Err(Error::NoEstimate("trace too short".into()));
    }
    let start = n - n / 3;
    fit_reciprocal_root(&trace.times[start.min(n - 3)..], &trace.p_tilde[start.min(n - 3)..])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    GradientBlowup,
    SupNormBlowup,
    LogCBlowup,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedNorms<T> {
    pub sup_rho: T,
    pub sup_c: T,
    pub sup_grad_c: T,
    pub sup_grad_log_c: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergingNorms<T> {
    pub sup_grad_rho: T,
    pub sup_hess_c: T,
    /// `sup|∂ₓρ| + sup|∂ₓₓc|`, the quantity whose divergence defines the blow-up.
    pub combined: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport<T> {
    pub t_abort: T,
    pub riccati_t_upper: Option<T>,
    pub t_estimate: Option<T>,
    pub bounded_norms_max: BoundedNorms<T>,
    /// Largest over-the-run factor by which each bounded quantity moved away from its
    /// initial value, up or down.
    pub bounded_norms_variation: BoundedNorms<T>,
    /// Largest over-the-run ratio `value / initial` of each bounded quantity.
    pub bounded_norms_growth: BoundedNorms<T>,
    pub diverging_norms_final: DivergingNorms<T>,
    /// Growth `final / initial` of the diverging quantities.
    pub diverging_growth: DivergingNorms<T>,
    pub required_growth: T,
    pub classification: Classification,
    pub resolution_limited: bool,
}

const BOUNDED_VARIATION: f64 = 3.0;

/// `(max, two-sided variation from the first value, growth over the first value)`.
fn variation<T: Real>(series: impl Iterator<Item = T> + Clone) -> (T, T, T) {
    let v0 = series.clone().next().unwrap_or(T::zero());
    let mx = series.clone().fold(T::zero(), |m, v| m.max(v));
    let mn = series.fold(T::infinity(), |m, v| m.min(v));
    let ratio = |a: T, b: T| if b > T::zero() { a / b } else if a > T::zero() { T::infinity() } else { T::one() };
    let up = ratio(mx, v0);
    (mx, up.max(ratio(v0, mn)), up)
}

/// Classifies a run: gradient blow-up iff `sup|∂ₓρ|` grew by at least `required_growth`,
/// the sum `sup|∂ₓρ| + sup|∂ₓₓc|` left the 3× band (or grew by `required_growth` if
/// that is smaller), and `sup ρ`, `sup c`, `sup|∂ₓc|`, `sup|∂ₓ log c|` each varied by
/// less than 3× (up or down). Growth of `sup ρ`/`sup c` beyond 3× is a sup-norm blow-up,
/// of `sup|∂ₓ log c|` a log-c blow-up. Runs that did not end in a gradient abort are
/// classified `none`.
pub fn classify_blowup<T: Real>(outcome: &RunOutcome<T>, required_growth: T) -> BlowupReport<T> {
    let recs: Vec<_> = outcome.all_records().collect();
    let (max_rho, var_rho, up_rho) = variation(recs.iter().map(|r| r.norms.sup_rho));
    let (max_c, var_c, up_c) = variation(recs.iter().map(|r| r.norms.sup_c));
    let (max_gc, var_gc, up_gc) = variation(recs.iter().map(|r| r.norms.sup_grad_c));
    let (max_glc, var_glc, up_glc) = variation(recs.iter().map(|r| r.norms.sup_grad_log_c));
    let first = outcome.initial.norms;
    let last = recs.last().map(|r| r.norms).unwrap_or(first);
    let growth = |a: T, b: T| if a > T::zero() { b / a } else { T::zero() };
    let g_rho = growth(first.sup_grad_rho, last.sup_grad_rho);
    let g_hess = growth(first.sup_hess_c, last.sup_hess_c);
    let g_sum = growth(first.sup_grad_rho + first.sup_hess_c, last.sup_grad_rho + last.sup_hess_c);
    let three = T::lit(BOUNDED_VARIATION);
    let classification = if outcome.verdict != Verdict::GradientAbort {
        Classification::None
    } else if up_rho >= three || up_c >= three {
        Classification::SupNormBlowup
    } else if up_glc >= three {
        Classification::LogCBlowup
    } else if g_rho >= required_growth
        && g_sum >= required_growth.min(three)
        && [var_rho, var_c, var_gc, var_glc].iter().all(|&v| v < three)
    {
        Classification::GradientBlowup
    } else {
        Classification::None
    };
    BlowupReport {
        t_abort: outcome.t_final(),
        riccati_t_upper: None,
        t_estimate: None,
        bounded_norms_max: BoundedNorms { sup_rho: max_rho, sup_c: max_c, sup_grad_c: max_gc, sup_grad_log_c: max_glc },
        bounded_norms_variation: BoundedNorms { sup_rho: var_rho, sup_c: var_c, sup_grad_c: var_gc, sup_grad_log_c: var_glc },
        bounded_norms_growth: BoundedNorms { sup_rho: up_rho, sup_c: up_c, sup_grad_c: up_gc, sup_grad_log_c: up_glc },
        diverging_norms_final: DivergingNorms {
            sup_grad_rho: last.sup_grad_rho,
            sup_hess_c: last.sup_hess_c,
            combined: last.sup_grad_rho + last.sup_hess_c,
        },
        diverging_growth: DivergingNorms { sup_grad_rho: g_rho, sup_hess_c: g_hess, combined: g_sum },
        required_growth,
        classification,
        resolution_limited: outcome.under_resolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_formula() {
        assert_eq!(riccati_bound_raw(-2.0f64, 1.0, 1.0).unwrap(), 0.5);
        let a = riccati_bound_raw(-3.0f64, 0.2, 1.1).unwrap();
        let b = riccati_bound_raw(-6.0, 0.2, 1.1).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
        assert!(riccati_bound_raw(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn envelope_matches_closed_form() {
        let t = riccati_envelope_time(-2.0f64, 1.0, 1.0).unwrap();
        assert!((t - 0.5).abs() / 0.5 < 1e-6);
    }

    #[test]
    fn reciprocal_fit_exact() {
        let (y0, k) = (-1.5_f64, 0.7);
        let tb = 1.0 / (k * y0.abs());
        let times: Vec<f64> = (0..60).map(|i| tb * 0.9 * i as f64 / 59.0).collect();
        let p: Vec<f64> = times.iter().map(|t| y0 / (1.0 + y0 * k * t)).collect();
        let te = fit_reciprocal_root(&times, &p).unwrap();
        assert!((te - tb).abs() / tb < 1e-6);
    }

    #[test]
    fn reciprocal_fit_rejects_decay() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let p = [-4.0, -3.0, -2.0, -1.0];
        assert!(matches!(fit_reciprocal_root(&times, &p), Err(Error::NoEstimate(_))));
    }
}
