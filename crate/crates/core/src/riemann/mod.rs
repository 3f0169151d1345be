//! Riemann invariants `w = (w₁, w₂)` of the 2×2 system, built by backtracing the
//! characteristic ODEs
//!
//! ```text
//! dφ/dz₂ = λᵢ(φ, z₂) = (z₂ ∓ sqrt(z₂² + 4φ)) / 2
//! ```
//!
//! to the axis `z₂ = 0`, where the gauge `w₁ = e^{z₁}`, `w₂ = -e^{z₁}` is imposed.
//!
//! Family-1 characteristics with `z₂ < 0` (family 2: `z₂ > 0`) that start below the
//! curve `z₁ = ¾ z₂²` leave `z₁ > 0` before reaching the axis. For those points the
//! foot is continued from the exit height `z_e` as `-z_e² / 2^{4/3}`, which keeps the
//! invariant constant along characteristics and continuous across the limiting curve;
//! such evaluations are marked [`Foot::continued`].

pub mod bounds;
pub mod cache;
pub mod ode;

use serde::{Deserialize, Serialize};

pub use bounds::{adaptive_simpson, image_bounds, psi_table, ImageBounds, PsiTable};
pub use cache::InvariantMap;
pub use ode::{AdaptiveRk4, OdeEnd};

use crate::error::{Error, Result};
use crate::real::Real;

/// State-space point: `z1` in the `ρ` slot, `z2` in the `q` slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    pub z1: T,
    pub z2: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(z1: T, z2: T) -> Result<Self> {
        if !(z1 > T::zero()) || !z2.is_finite() || !z1.is_finite() {
            return Err(Error::OutsideOmega(z1.to_f64_lossy()));
        }
        Ok(PhasePoint { z1, z2 })
    }

    /// `sqrt(z₂² + 4z₁) = λ₂ - λ₁`.
    #[inline]
    pub fn gap(&self) -> T {
        (self.z2 * self.z2 + T::lit(4.0) * self.z1).sqrt()
    }

    /// Inside the region reached by characteristics from the axis (`z₁ > ¾ z₂²`).
    pub fn in_characteristic_domain(&self) -> bool {
        self.z1 > T::lit(0.75) * self.z2 * self.z2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoint<T> {
    pub w1: T,
    pub w2: T,
}

impl<T: Real> InvariantPoint<T> {
    pub fn new(w1: T, w2: T) -> Result<Self> {
        if !(w1 > T::zero()) || !(w2 < T::zero()) || !w1.is_finite() || !w2.is_finite() {
            return Err(Error::OutsideImage(format!("need w1 > 0 > w2, got ({w1}, {w2})")));
        }
        Ok(InvariantPoint { w1, w2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CharIntegrator {
    #[default]
    Rk4Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharOdeConfig<T> {
    pub integrator: CharIntegrator,
    pub abs_tol: T,
    pub rel_tol: T,
    /// Largest `|z₂|` accepted.
    pub max_z2_span: T,
}

impl<T: Real> Default for CharOdeConfig<T> {
    fn default() -> Self {
        CharOdeConfig {
            integrator: CharIntegrator::Rk4Adaptive,
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_z2_span: T::lit(1e3),
        }
    }
}

impl<T: Real> CharOdeConfig<T> {
    fn integrator(&self) -> AdaptiveRk4<T> {
        AdaptiveRk4::new(self.abs_tol, self.rel_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Family::One),
            2 => Ok(Family::Two),
            _ => Err(Error::InvalidParameter(format!("characteristic family must be 1 or 2, got {i}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub r1: [T; 2],
    pub r2: [T; 2],
}

pub fn eigen<T: Real>(p: PhasePoint<T>) -> Result<Eigen<T>> {
    let p = PhasePoint::new(p.z1, p.z2)?;
    let s = p.gap();
    let half = T::lit(0.5);
    let l1 = (p.z2 - s) * half;
    let l2 = (p.z2 + s) * half;
    Ok(Eigen { lambda1: l1, lambda2: l2, r1: [l1, T::one()], r2: [l2, T::one()] })
}

/// Result of one characteristic backtrace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Foot<T> {
    /// Value on the axis (or its continuation).
    pub value: T,
    /// `log(∂foot/∂z₁)`, so that `fᵢ = ±exp(value + log_sensitivity)`.
    pub log_sensitivity: T,
    pub continued: bool,
    /// Height at which the characteristic left `z₁ > 0`, when it did.
    pub exit_z2: Option<T>,
}

/// Integrates the family characteristic through `p` back to `z₂ = 0`.
pub fn trace_foot<T: Real>(p: PhasePoint<T>, family: Family, config: &CharOdeConfig<T>) -> Result<Foot<T>> {
    let p = PhasePoint::new(p.z1, p.z2)?;
    if p.z2.abs() > config.max_z2_span {
        return Err(Error::InvalidParameter(format!("|z2| = {} exceeds max_z2_span", p.z2)));
    }
    if p.z2 == T::zero() {
        return Ok(Foot { value: p.z1, log_sensitivity: T::zero(), continued: false, exit_z2: None });
    }
    let sign = match family {
        Family::One => -T::one(),
        Family::Two => T::one(),
    };
    let half = T::lit(0.5);
    let four = T::lit(4.0);
    let rhs = move |s: T, y: &[T; 2]| -> [T; 2] {
        let gap = (s * s + four * y[0]).max(T::zero()).sqrt();
        [(s + sign * gap) * half, sign / gap]
    };
    let exits = match family {
        Family::One => p.z2 < T::zero(),
        Family::Two => p.z2 > T::zero(),
    };
    let event = |y: &[T; 2]| y[0];
    let ev: Option<&dyn Fn(&[T; 2]) -> T> = if exits { Some(&event) } else { None };
    match config.integrator().integrate(rhs, p.z2, [p.z1, T::zero()], T::zero(), ev)? {
        OdeEnd::Reached(y) => Ok(Foot { value: y[0], log_sensitivity: y[1], continued: false, exit_z2: None }),
        OdeEnd::Event { s, y } => {
            let two = T::lit(2.0);
            let value = -(s * s) / two.powf(T::lit(4.0 / 3.0));
            Ok(Foot {
                value,
                log_sensitivity: y[1] - two.ln() / T::lit(3.0),
                continued: true,
                exit_z2: Some(s),
            })
        }
    }
}

/// Foot of the family-`i` characteristic through `p` (its `z₁` on the axis).
pub fn backtrace_foot<T: Real>(p: PhasePoint<T>, family: Family, config: &CharOdeConfig<T>) -> Result<T> {
    trace_foot(p, family, config).map(|f| f.value)
}

/// `fᵢ = ∂wᵢ/∂z₁`.
pub fn f_eval<T: Real>(p: PhasePoint<T>, family: Family, config: &CharOdeConfig<T>) -> Result<T> {
    let foot = trace_foot(p, family, config)?;
    let mag = (foot.value + foot.log_sensitivity).exp();
    Ok(match family {
        Family::One => mag,
        Family::Two => -mag,
    })
}

/// Invariants together with `f₁, f₂` from a single pair of backtraces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WDetail<T> {
    pub w: InvariantPoint<T>,
    pub f1: T,
    pub f2: T,
    pub continued: bool,
}

pub fn w_detail<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<WDetail<T>> {
    let a = trace_foot(p, Family::One, config)?;
    let b = trace_foot(p, Family::Two, config)?;
    Ok(WDetail {
        w: InvariantPoint { w1: a.value.exp(), w2: -b.value.exp() },
        f1: (a.value + a.log_sensitivity).exp(),
        f2: -(b.value + b.log_sensitivity).exp(),
        continued: a.continued || b.continued,
    })
}

pub fn w_eval<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<InvariantPoint<T>> {
    w_detail(p, config).map(|d| d.w)
}

/// `∇w` from the characteristic relations `∇wᵢ · rᵢ = 0`, `∂wᵢ/∂z₁ = fᵢ`:
/// rows `(f₁, -λ₁f₁)` and `(f₂, -λ₂f₂)`.
pub fn grad_w<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<[[T; 2]; 2]> {
    let d = w_detail(p, config)?;
    let e = eigen(p)?;
    Ok([[d.f1, -e.lambda1 * d.f1], [d.f2, -e.lambda2 * d.f2]])
}

/// `det ∇w = -f₁ f₂ sqrt(z₂² + 4z₁)`.
pub fn det_grad_w<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<T> {
    let d = w_detail(p, config)?;
    Ok(-d.f1 * d.f2 * p.gap())
}

/// `∂λ₂/∂w₁ = (z₂ + S) / (f₁ S²)`, `S² = z₂² + 4z₁`.
pub fn dlambda2_dw1<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<T> {
    let f1 = f_eval(p, Family::One, config)?;
    Ok(dl2dw1_from(p, f1))
}

/// `∂λ₂/∂w₂ = -z₂ / (f₂ S²)`.
pub fn dlambda2_dw2<T: Real>(p: PhasePoint<T>, config: &CharOdeConfig<T>) -> Result<T> {
    let f2 = f_eval(p, Family::Two, config)?;
    Ok(dl2dw2_from(p, f2))
}

#[inline]
pub(crate) fn dl2dw1_from<T: Real>(p: PhasePoint<T>, f1: T) -> T {
    let s = p.gap();
    (p.z2 + s) / (f1 * s * s)
}

#[inline]
pub(crate) fn dl2dw2_from<T: Real>(p: PhasePoint<T>, f2: T) -> T {
    let s = p.gap();
    -p.z2 / (f2 * s * s)
}

/// Newton settings for [`invert_w`].
const NEWTON_MAX_ITER: usize = 80;
const NEWTON_TOL: f64 = 1e-9;

/// Solves `w(z) = target` by damped Newton on the logarithms of the feet.
pub fn invert_w<T: Real>(target: InvariantPoint<T>, config: &CharOdeConfig<T>) -> Result<PhasePoint<T>> {
    let target = InvariantPoint::new(target.w1, target.w2)?;
    let f1t = target.w1.ln();
    let f2t = (-target.w2).ln();
    let mut z1 = T::lit(0.5) * (f1t + f2t);
    if !(z1 > T::lit(0.05)) {
        z1 = T::lit(0.05);
    }
    let mut z2 = (f1t - f2t) / (T::lit(2.0) * z1.sqrt());
    let residual = |z1: T, z2: T| -> Result<([T; 2], WDetail<T>)> {
        let d = w_detail(PhasePoint::new(z1, z2)?, config)?;
        Ok(([d.w.w1.ln() - f1t, (-d.w.w2).ln() - f2t], d))
    };
    let norm = |r: &[T; 2]| r[0].abs().max(r[1].abs());
    let (mut r, mut det) = residual(z1, z2)?;
    let tol = T::lit(NEWTON_TOL).max(T::epsilon() * T::lit(64.0));
    let fine = T::lit(NEWTON_TOL * 1e-3).max(T::epsilon() * T::lit(16.0));
    for _ in 0..NEWTON_MAX_ITER {
        if norm(&r) <= fine {
            break;
        }
        let p = PhasePoint { z1, z2 };
        let e = eigen(p)?;
        // Jacobian of (log w1, log(-w2))
        let a11 = det.f1 / det.w.w1;
        let a12 = -e.lambda1 * a11;
        let a21 = det.f2 / det.w.w2;
        let a22 = -e.lambda2 * a21;
        let dj = a11 * a22 - a12 * a21;
        if !(dj.abs() > T::zero()) || !dj.is_finite() {
            return Err(Error::InversionFailed(format!("singular Jacobian at ({z1}, {z2})")));
        }
        let dz1 = -(a22 * r[0] - a12 * r[1]) / dj;
        let dz2 = -(-a21 * r[0] + a11 * r[1]) / dj;
        let mut lam = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let n1 = z1 + lam * dz1;
            let n2 = z2 + lam * dz2;
            if n1 > T::zero() {
                if let Ok((nr, nd)) = residual(n1, n2) {
                    if norm(&nr) < norm(&r) {
                        z1 = n1;
                        z2 = n2;
                        r = nr;
                        det = nd;
                        accepted = true;
                        break;
                    }
                }
            }
            lam = lam * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    if norm(&r) <= tol {
        Ok(PhasePoint { z1, z2 })
    } else {
        Err(Error::InversionFailed(format!(
            "target ({}, {}): residual {} at ({z1}, {z2})",
            target.w1,
            target.w2,
            norm(&r)
        )))
    }
}
