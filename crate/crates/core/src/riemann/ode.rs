//! Adaptive classical RK4 with step-doubling error control and sign-change events.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveRk4<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeEnd<T, const N: usize> {
    /// Integration reached the requested end point.
    Reached([T; N]),
    /// The event function crossed zero at `s`.
    Event { s: T, y: [T; N] },
}

#[inline]
fn rk4<T: Real, const N: usize>(f: &impl Fn(T, &[T; N]) -> [T; N], s: T, y: &[T; N], h: T) -> [T; N] {
    let half = T::lit(0.5);
    let k1 = f(s, y);
    let mut t = *y;
    for i in 0..N {
        t[i] = y[i] + half * h * k1[i];
    }
    let k2 = f(s + half * h, &t);
    for i in 0..N {
        t[i] = y[i] + half * h * k2[i];
    }
    let k3 = f(s + half * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * k3[i];
    }
    let k4 = f(s + h, &t);
    let sixth = T::one() / T::lit(6.0);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + h * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

#[inline]
fn doubled<T: Real, const N: usize>(f: &impl Fn(T, &[T; N]) -> [T; N], s: T, y: &[T; N], h: T) -> ([T; N], [T; N]) {
    let big = rk4(f, s, y, h);
    let half = h * T::lit(0.5);
    let mid = rk4(f, s, y, half);
    let small = rk4(f, s + half, &mid, half);
    (big, small)
}

impl<T: Real> AdaptiveRk4<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        AdaptiveRk4 { abs_tol, rel_tol, max_steps: 100_000 }
    }

    /// Integrates `y' = f(s, y)` from `s0` to `s1` (either direction). When `event` is
    /// given, stops at the first point where it turns from positive to non-positive.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(T, &[T; N]) -> [T; N],
        s0: T,
        y0: [T; N],
        s1: T,
        event: Option<&dyn Fn(&[T; N]) -> T>,
    ) -> Result<OdeEnd<T, N>> {
        let span = s1 - s0;
        if span == T::zero() {
            return Ok(OdeEnd::Reached(y0));
        }
        let dir = span.signum();
        let fifteenth = T::one() / T::lit(15.0);
        let tiny = T::epsilon() * T::lit(64.0);
        let mut s = s0;
        let mut y = y0;
        let mut h = dir * span.abs().min(T::lit(0.25));
        for _ in 0..self.max_steps {
            let remaining = s1 - s;
            if remaining.abs() <= tiny * (T::one() + s1.abs()) {
                return Ok(OdeEnd::Reached(y));
            }
            if h.abs() > remaining.abs() {
                h = remaining;
            }
            let (big, small) = doubled(&f, s, &y, h);
            let mut err = T::zero();
            for i in 0..N {
                let scale = self.abs_tol + self.rel_tol * small[i].abs().max(y[i].abs());
                err = err.max((small[i] - big[i]).abs() * fifteenth / scale);
            }
            if !err.is_finite() {
                h = h * T::lit(0.25);
                if h.abs() <= tiny * (T::one() + s.abs()) {
                    return Err(Error::StepUnderflow(s.to_f64_lossy()));
                }
                continue;
            }
            if err <= T::one() {
                let mut next = small;
                for i in 0..N {
                    next[i] = small[i] + (small[i] - big[i]) * fifteenth;
                }
                if let Some(ev) = event {
                    if ev(&next) <= T::zero() && ev(&y) > T::zero() {
                        return self.locate_event(&f, s, &y, h, ev);
                    }
                }
                s = s + h;
                y = next;
                let grow = if err == T::zero() { T::lit(4.0) } else { (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(4.0)) };
                h = h * grow.max(T::lit(0.2));
            } else {
                h = h * (T::lit(0.9) * err.powf(T::lit(-0.25))).max(T::lit(0.1));
                if h.abs() <= tiny * (T::one() + s.abs()) {
                    return Err(Error::StepUnderflow(s.to_f64_lossy()));
                }
            }
        }
        Err(Error::StepUnderflow(s.to_f64_lossy()))
    }

    fn locate_event<const N: usize>(
        &self,
        f: &impl Fn(T, &[T; N]) -> [T; N],
        s: T,
        y: &[T; N],
        h: T,
        ev: &dyn Fn(&[T; N]) -> T,
    ) -> Result<OdeEnd<T, N>> {
        let mut lo = T::zero();
        let mut hi = T::one();
        let mut y_hi = doubled(f, s, y, h).1;
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            let ym = doubled(f, s, y, h * mid).1;
            if ev(&ym) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
                y_hi = ym;
            }
            if (hi - lo) * h.abs() <= T::epsilon() * T::lit(4.0) * (T::one() + s.abs()) {
                break;
            }
        }
        Ok(OdeEnd::Event { s: s + h * hi, y: y_hi })
    }
}
