//! Physical and numerical fluxes for `(ρ, q)`.
//!
//! Conserved vectors are laid out as `[ρ, q_0, …, q_{d-1}]`. Along axis `k` the
//! physical flux is `ρ q_k` for `ρ`, `ρ` for `q_k` and zero for the other `q_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub(crate) const MAX_COMPONENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rusanov,
    Hll,
}

/// `(ρ q, ρ)` for the axis-normal pair.
#[inline]
pub fn flux<T: Real>(rho: T, q_axis: T) -> (T, T) {
    (rho * q_axis, rho)
}

/// Characteristic speeds `λ_{1,2} = (q ∓ sqrt(q² + 4ρ)) / 2`.
#[inline]
pub fn speeds<T: Real>(rho: T, q_axis: T) -> (T, T) {
    let s = (q_axis * q_axis + T::lit(4.0) * rho).sqrt();
    let half = T::lit(0.5);
    ((q_axis - s) * half, (q_axis + s) * half)
}

/// `max(|λ₁|, |λ₂|) = (|q| + sqrt(q² + 4ρ)) / 2`.
#[inline]
pub fn max_speed<T: Real>(rho: T, q_axis: T) -> T {
    (q_axis.abs() + (q_axis * q_axis + T::lit(4.0) * rho).sqrt()) * T::lit(0.5)
}

#[inline]
pub fn minmod<T: Real>(a: T, b: T) -> T {
    if a * b <= T::zero() {
        T::zero()
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

#[inline]
pub(crate) fn face_flux<T: Real>(
    scheme: Scheme,
    ul: &[T; MAX_COMPONENTS],
    ur: &[T; MAX_COMPONENTS],
    ncomp: usize,
    axis: usize,
) -> [T; MAX_COMPONENTS] {
    let k = axis + 1;
    let mut fl = [T::zero(); MAX_COMPONENTS];
    let mut fr = [T::zero(); MAX_COMPONENTS];
    fl[0] = ul[0] * ul[k];
    fl[k] = ul[0];
    fr[0] = ur[0] * ur[k];
    fr[k] = ur[0];
    let mut out = [T::zero(); MAX_COMPONENTS];
    let half = T::lit(0.5);
    match scheme {
        Scheme::Rusanov => {
            let s = max_speed(ul[0], ul[k]).max(max_speed(ur[0], ur[k]));
            for c in 0..ncomp {
                out[c] = half * (fl[c] + fr[c]) - half * s * (ur[c] - ul[c]);
            }
        }
        Scheme::Hll => {
            let (l1l, l2l) = speeds(ul[0], ul[k]);
            let (l1r, l2r) = speeds(ur[0], ur[k]);
            // λ₁ < 0 < λ₂ always, so the HLL fan straddles the face
            let sl = l1l.min(l1r);
            let sr = l2l.max(l2r);
            let inv = T::one() / (sr - sl);
            for c in 0..ncomp {
                out[c] = (sr * fl[c] - sl * fr[c] + sl * sr * (ur[c] - ul[c])) * inv;
            }
        }
    }
    out
}

fn check_states<T: Real>(ul: &[T], ur: &[T], axis: usize) -> Result<usize> {
    let n = ul.len();
    if n != ur.len() || n < 2 || n > MAX_COMPONENTS || axis + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "states must be [rho, q_0..q_(d-1)] with 1 <= d <= 3 and axis < d (len {n}, axis {axis})"
        )));
    }
    if !(ul[0] > T::zero()) || !(ur[0] > T::zero()) {
        return Err(Error::PositivityFailure { t: f64::NAN, min_rho: ul[0].min(ur[0]).to_f64_lossy() });
    }
    Ok(n)
}

fn pack<T: Real>(u: &[T]) -> [T; MAX_COMPONENTS] {
    let mut a = [T::zero(); MAX_COMPONENTS];
    a[..u.len()].copy_from_slice(u);
    a
}

/// Local Lax-Friedrichs interface flux between `[ρ, q…]` states.
pub fn numerical_flux_rusanov<T: Real>(ul: &[T], ur: &[T], axis: usize) -> Result<Vec<T>> {
    numerical_flux(Scheme::Rusanov, ul, ur, axis)
}

pub fn numerical_flux_hll<T: Real>(ul: &[T], ur: &[T], axis: usize) -> Result<Vec<T>> {
    numerical_flux(Scheme::Hll, ul, ur, axis)
}

pub fn numerical_flux<T: Real>(scheme: Scheme, ul: &[T], ur: &[T], axis: usize) -> Result<Vec<T>> {
    let n = check_states(ul, ur, axis)?;
    Ok(face_flux(scheme, &pack(ul), &pack(ur), n, axis)[..n].to_vec())
}
