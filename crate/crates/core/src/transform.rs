//! Cole-Hopf substitution, time/flux scalings and the parabolic rescaling family.

use serde::{Deserialize, Serialize};

use crate::calculus::gradient;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::interp::interpolate;
use crate::real::Real;
use crate::state::SimState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap<T> {
    pub chi: T,
    pub mu: T,
}

impl<T: Real> ScalingMap<T> {
    pub fn new(chi: T, mu: T) -> Result<Self> {
        if !(chi > T::zero()) || !(mu > T::zero()) {
            return Err(Error::InvalidParameter(format!("scaling needs chi, mu > 0 (got {chi}, {mu})")));
        }
        Ok(ScalingMap { chi, mu })
    }

    #[inline]
    fn time_factor(&self) -> T {
        (self.chi * self.mu).sqrt()
    }

    #[inline]
    fn q_factor(&self) -> T {
        (self.chi / self.mu).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParam<T> {
    pub a: T,
}

impl<T: Real> RescaleParam<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("rescale factor must be positive, got {a}")));
        }
        Ok(RescaleParam { a })
    }
}

/// `q = ∇ log c` by central differences.
pub fn cole_hopf<T: Real>(log_c: &ScalarField<T>) -> VectorField<T> {
    gradient(log_c)
}

/// Solver-convention flux variable `q = sqrt(chi/mu) ∇ log c`.
pub fn cole_hopf_scaled<T: Real>(log_c: &ScalarField<T>, map: &ScalingMap<T>) -> VectorField<T> {
    let mut q = gradient(log_c);
    let f = map.q_factor();
    if f != T::one() {
        for k in 0..q.grid().dim() {
            for v in q.component_mut(k) {
                *v = *v * f;
            }
        }
    }
    q
}

pub fn to_scaled<T: Real>(t_phys: T, q_phys: T, map: &ScalingMap<T>) -> (T, T) {
    (t_phys * map.time_factor(), q_phys * map.q_factor())
}

pub fn from_scaled<T: Real>(t_scaled: T, q_scaled: T, map: &ScalingMap<T>) -> (T, T) {
    (t_scaled / map.time_factor(), q_scaled / map.q_factor())
}

/// Radius (max-norm) of the region where `values` differ from the corner value by more
/// than `tol`. `None` when the field is constant.
pub fn support_radius<T: Real>(grid: &Grid<T>, values: &[T], tol: T) -> Option<T> {
    let far = values[0];
    let mut r: Option<T> = None;
    for (i, &v) in values.iter().enumerate() {
        if (v - far).abs() > tol {
            let pos = grid.position(i);
            let m = pos.iter().fold(T::zero(), |a, x| a.max(x.abs())) + grid.h() * T::lit(0.5);
            r = Some(r.map_or(m, |old: T| old.max(m)));
        }
    }
    r
}

/// `ρ_a(x) = a²ρ(ax)`, `log c_a(x) = log c(ax)`, `q_a(x) = a q(ax)`, `t_a = t / a²`.
///
/// Values are resampled with periodic cubic interpolation; sample points that fall
/// outside the domain take the (required constant) far-field value.
pub fn parabolic_rescale<T: Real>(state: &SimState<T>, a: RescaleParam<T>) -> Result<SimState<T>> {
    let a = a.a;
    if a == T::one() {
        return Ok(state.clone());
    }
    let grid = *state.grid();
    let h = grid.h();
    let l = grid.half_width();
    let tol = T::lit(1e-12);
    let margin = T::lit(3.0) * h;
    let limit = l.min(a * l) - margin;

    let mut fields: Vec<&[T]> = vec![state.rho.values(), state.log_c.values()];
    for k in 0..grid.dim() {
        fields.push(state.q.component(k));
    }
    for f in &fields {
        let scale = f.iter().fold(T::one(), |m, v| m.max(v.abs()));
        if let Some(r) = support_radius(&grid, f, tol * scale) {
            if r > limit {
                return Err(Error::DomainConflict(format!(
                    "rescaling by a = {a} needs the data constant outside radius {limit}, support reaches {r}"
                )));
            }
        }
    }

    let inside = l - T::lit(1.5) * h;
    let resample = |values: &[T], amp: T| -> Vec<T> {
        let far = values[0];
        (0..grid.len())
            .map(|i| {
                let p: Vec<T> = grid.position(i).into_iter().map(|x| a * x).collect();
                let v = if p.iter().any(|x| x.abs() >= inside) { far } else { interpolate(&grid, values, &p) };
                amp * v
            })
            .collect()
    };

    let rho = ScalarField::new(grid, resample(state.rho.values(), a * a))?;
    let log_c = ScalarField::new(grid, resample(state.log_c.values(), T::one()))?;
    let comps = (0..grid.dim()).map(|k| resample(state.q.component(k), a)).collect();
    let q = VectorField::new(grid, comps)?;
    SimState::new(rho, q, log_c, state.t_scaled / (a * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};

    #[test]
    fn unit_map_is_identity() {
        let m = ScalingMap::new(1.0_f64, 1.0).unwrap();
        assert_eq!(to_scaled(0.7, -1.3, &m), (0.7, -1.3));
    }

    #[test]
    fn chi4_mu1() {
        let m = ScalingMap::new(4.0_f64, 1.0).unwrap();
        assert_eq!(to_scaled(1.0, 1.0, &m), (2.0, 2.0));
    }

    #[test]
    fn roundtrip() {
        for (chi, mu) in [(0.3, 7.0), (2.0, 0.01), (1e3, 1e-2)] {
            let m = ScalingMap::new(chi, mu).unwrap();
            let (t, q) = to_scaled(1.234_f64, -0.567, &m);
            let (t2, q2) = from_scaled(t, q, &m);
            assert!((t2 - 1.234).abs() < 1e-15 * 4.0);
            assert!((q2 + 0.567).abs() < 1e-15 * 4.0);
        }
    }

    #[test]
    fn log_shift_invariance() {
        let g = make_grid(1, 32, 4.0_f64, Boundary::Periodic).unwrap();
        let lc = ScalarField::from_fn(g, |x| (1.0 + (-x[0] * x[0]).exp()).ln()).unwrap();
        let shifted = lc.map(|v| v + 3.0_f64.ln());
        let a = cole_hopf(&lc);
        let b = cole_hopf(&shifted);
        // differences of shifted values can round differently; compare to a few ulps
        for (x, y) in a.component(0).iter().zip(b.component(0)) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_amplitude_law() {
        let g = make_grid(1, 32, 4.0_f64, Boundary::Periodic).unwrap();
        let s = SimState::new(ScalarField::constant(g, 1.5), VectorField::zeros(g), ScalarField::zeros(g), 0.8).unwrap();
        let r = parabolic_rescale(&s, RescaleParam::new(2.0).unwrap()).unwrap();
        assert!(r.rho.values().iter().all(|&v| v == 6.0));
        assert_eq!(r.t_scaled, 0.2);
        let id = parabolic_rescale(&s, RescaleParam::new(1.0).unwrap()).unwrap();
        assert_eq!(id, s);
    }

    #[test]
    fn rejects_support_leaving_domain() {
        let g = make_grid(1, 64, 4.0_f64, Boundary::Periodic).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + (-(x[0] * x[0])).exp() * if x[0].abs() < 2.0 { 1.0 } else { 0.0 }).unwrap();
        let s = SimState::new(rho, VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap();
        assert!(parabolic_rescale(&s, RescaleParam::new(0.5).unwrap()).is_err());
        assert!(parabolic_rescale(&s, RescaleParam::new(2.0).unwrap()).is_ok());
    }
}
