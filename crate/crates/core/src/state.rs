//! Physical parameters and the evolving solver state.

use serde::{Deserialize, Serialize};

use crate::calculus::curl_residual;
use crate::error::{Error, Result};
use crate::field::{check_same, ScalarField, VectorField};
use crate::grid::Grid;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams<T> {
    pub chi: T,
    pub mu: T,
    #[serde(default)]
    pub epsilon: T,
}

impl<T: Real> PhysParams<T> {
    pub fn new(chi: T, mu: T, epsilon: T) -> Result<Self> {
        let p = PhysParams { chi, mu, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn unit() -> Self {
        PhysParams { chi: T::one(), mu: T::one(), epsilon: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > T::zero()) || !(self.mu > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "chi and mu must be positive (chi = {}, mu = {})",
                self.chi, self.mu
            )));
        }
        if !(self.epsilon >= T::zero()) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// `sqrt(chi * mu)`: physical-to-scaled time factor.
    pub fn time_scale(&self) -> T {
        (self.chi * self.mu).sqrt()
    }

    /// `sqrt(mu / chi)`: rate of `log c` decay per unit `rho` in scaled time.
    pub fn consumption_rate(&self) -> T {
        (self.mu / self.chi).sqrt()
    }
}

/// `(rho, q, log c)` at scaled time `t_scaled`, with `q = sqrt(chi/mu) ∇log c`
/// and the conservation form `ρ_t + ∇·(ρq) = 0`, `q_t + ∇ρ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState<T> {
    pub rho: ScalarField<T>,
    pub q: VectorField<T>,
    pub log_c: ScalarField<T>,
    pub t_scaled: T,
}

impl<T: Real> SimState<T> {
    pub fn new(rho: ScalarField<T>, q: VectorField<T>, log_c: ScalarField<T>, t_scaled: T) -> Result<Self> {
        let s = SimState { rho, q, log_c, t_scaled };
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid<T> {
        self.rho.grid()
    }

    pub fn validate(&self) -> Result<()> {
        check_same(self.rho.grid(), self.q.grid())?;
        check_same(self.rho.grid(), self.log_c.grid())?;
        if !self.rho.is_finite() || !self.q.is_finite() || !self.log_c.is_finite() {
            return Err(Error::NonFinite("state".into()));
        }
        if !(self.t_scaled >= T::zero()) {
            return Err(Error::InvalidParameter(format!("negative time {}", self.t_scaled)));
        }
        let m = self.rho.min();
        if !(m > T::zero()) {
            return Err(Error::PositivityFailure { t: self.t_scaled.to_f64_lossy(), min_rho: m.to_f64_lossy() });
        }
        Ok(())
    }

    /// `c = exp(log c)`.
    pub fn c(&self) -> ScalarField<T> {
        self.log_c.map(|v| v.exp())
    }

    pub fn mass(&self) -> T {
        self.rho.integral()
    }

    pub fn curl_residual(&self) -> T {
        curl_residual(&self.q)
    }
}
