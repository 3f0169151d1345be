//! Sup-norm diagnostics and the energy functional `X_m`.

use serde::Serialize;

use crate::calculus::{derivative_tensor, gradient, seminorm_sq, sup_hessian};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::state::{PhysParams, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub sup_rho: T,
    pub sup_c: T,
    pub sup_inv_rho: T,
    pub sup_inv_c: T,
    pub sup_grad_rho: T,
    pub sup_grad_c: T,
    pub sup_hess_c: T,
    pub sup_grad_log_c: T,
    #[serde(rename = "X_m")]
    pub x_m: T,
    pub m: usize,
}

impl<T: Real> NormReport<T> {
    pub fn entries(&self) -> [(&'static str, T); 9] {
        [
            ("sup_rho", self.sup_rho),
            ("sup_c", self.sup_c),
            ("sup_inv_rho", self.sup_inv_rho),
            ("sup_inv_c", self.sup_inv_c),
            ("sup_grad_rho", self.sup_grad_rho),
            ("sup_grad_c", self.sup_grad_c),
            ("sup_hess_c", self.sup_hess_c),
            ("sup_grad_log_c", self.sup_grad_log_c),
            ("X_m", self.x_m),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|(_, v)| v.is_finite())
    }
}

/// Evaluates every tracked norm on `state`. `params` is accepted for symmetry with the
/// other diagnostics; the norms themselves are parameter free.
pub fn norm_report<T: Real>(state: &SimState<T>, _params: &PhysParams<T>, m: usize) -> Result<NormReport<T>> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let grid = *state.grid();
    let c = state.c();
    let rho = state.rho.values();

    let sup_rho = state.rho.sup_abs();
    let sup_c = c.sup_abs();
    let sup_inv_rho = rho.iter().fold(T::zero(), |a, &r| a.max(T::one() / r));
    let sup_inv_c = state.log_c.values().iter().fold(T::zero(), |a, &l| a.max((-l).exp()));
    let sup_grad_rho = gradient(&state.rho).sup_norm();
    let sup_grad_c = gradient(&c).sup_norm();
    let sup_hess_c = sup_hessian(&c);
    let sup_grad_log_c = gradient(&state.log_c).sup_norm();

    let mut x_m = T::one() + sup_rho + sup_c + sup_inv_rho + sup_inv_c + state.q.l2_norm();
    let vol = grid.cell_volume();
    for k in 1..=m {
        x_m = x_m + seminorm_sq(&grid, rho, k);
        for comp in state.q.components() {
            let weighted: T = derivative_tensor(&grid, comp, k)
                .iter()
                .map(|d| d.iter().zip(rho).map(|(&v, &r)| r * v * v).sum::<T>())
                .sum();
            x_m = x_m + weighted * vol;
        }
    }

    let report = NormReport {
        sup_rho,
        sup_c,
        sup_inv_rho,
        sup_inv_c,
        sup_grad_rho,
        sup_grad_c,
        sup_hess_c,
        sup_grad_log_c,
        x_m,
        m,
    };
    if let Some((name, _)) = report.entries().iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("norm entry {name}")));
    }
    Ok(report)
}
