//! Finite speed of propagation: paired runs whose data agree on a ball must agree on
//! the cone `|x - x̄| ≤ 6Ad(T* - t)`, with `A = 1 + sup(‖ρ₂‖∞ + ‖∇log c₁‖∞)`.

use serde::Serialize;

use crate::calculus::gradient;
use crate::error::{Error, Result};
use crate::field::check_same;
use crate::grid::Grid;
use crate::real::Real;
use crate::solver::{PairObserver, RunOutcome, StepRecord};
use crate::state::SimState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeSpec<T> {
    pub center: Vec<T>,
    #[serde(rename = "A")]
    pub a: T,
    pub t_star: T,
    pub speed: T,
}

impl<T: Real> ConeSpec<T> {
    pub fn new(center: Vec<T>, a: T, t_star: T) -> Result<Self> {
        if !(a >= T::one()) {
            return Err(Error::InvalidParameter(format!("A must be >= 1, got {a}")));
        }
        if !(t_star > T::zero()) {
            return Err(Error::InvalidParameter(format!("T* must be positive, got {t_star}")));
        }
        let d = T::from_usize_lossy(center.len());
        Ok(ConeSpec { center, a, t_star, speed: T::lit(6.0) * a * d })
    }

    /// Radius of the initial ball `6AdT*`.
    pub fn ball_radius(&self) -> T {
        self.speed * self.t_star
    }

    /// Cross-section radius at time `t` (negative once the cone has closed).
    pub fn radius_at(&self, t: T) -> T {
        self.speed * (self.t_star - t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport<T> {
    pub cone_violation: bool,
    pub max_interior_diff: T,
    pub empirical_front_speed: T,
    pub lambda_max_observed: T,
    pub tol: T,
    /// Largest difference of the initial data on the ball (should be at round-off).
    pub ball_mismatch: T,
}

/// `A = 1 + max over recorded steps of (sup ρ₂ + sup|∇log c₁|)`.
pub fn compute_a<T: Real>(run1: &RunOutcome<T>, run2: &RunOutcome<T>) -> T {
    let a = run1.all_records().zip(run2.all_records());
    T::one() + a.fold(T::zero(), |m, (r1, r2)| m.max(r2.norms.sup_rho + r1.norms.sup_grad_log_c))
}

/// Symmetrized diagnostic `max(A(1,2), A(2,1))`.
pub fn compute_a_symmetric<T: Real>(run1: &RunOutcome<T>, run2: &RunOutcome<T>) -> T {
    compute_a(run1, run2).max(compute_a(run2, run1))
}

/// `max over steps of max cell speed`.
pub fn empirical_speed_bound<T: Real>(run: &RunOutcome<T>) -> T {
    run.all_records().fold(T::zero(), |m, r| m.max(r.max_abs_lambda))
}

/// Lipschitz constant of the data `(ρ, c)`: the larger of `sup|∇ρ|` and `sup|∇c|`.
pub fn lipschitz<T: Real>(state: &SimState<T>) -> T {
    gradient(&state.rho).sup_norm().max(gradient(&state.c()).sup_norm())
}

fn cell_diff<T: Real>(a: &SimState<T>, b: &SimState<T>, i: usize) -> T {
    let mut d = (a.rho.values()[i] - b.rho.values()[i]).abs().max((a.log_c.values()[i] - b.log_c.values()[i]).abs());
    for k in 0..a.grid().dim() {
        d = d.max((a.q.component(k)[i] - b.q.component(k)[i]).abs());
    }
    d
}

fn distance<T: Real>(g: &Grid<T>, pos: &[T], center: &[T]) -> T {
    pos.iter().zip(center).map(|(&x, &c)| g.periodic_distance(x, c).powi(2)).sum::<T>().sqrt()
}

/// Records, per step, the largest state difference in each radial bin around a
/// centre (periodic distance) and the outermost positions (axis 0) where
/// `|ρ₁ - ρ₂|` exceeds a threshold.
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceMonitor<T> {
    pub center: Vec<T>,
    pub bin_width: T,
    pub front_threshold: T,
    pub times: Vec<T>,
    #[serde(skip)]
    pub profiles: Vec<Vec<T>>,
    pub left_front: Vec<Option<T>>,
    pub right_front: Vec<Option<T>>,
    bins: Vec<usize>,
}

impl<T: Real> DifferenceMonitor<T> {
    pub fn new(center: Vec<T>, front_threshold: T) -> Self {
        DifferenceMonitor {
            center,
            bin_width: T::zero(),
            front_threshold,
            times: Vec::new(),
            profiles: Vec::new(),
            left_front: Vec::new(),
            right_front: Vec::new(),
            bins: Vec::new(),
        }
    }

    fn observe(&mut self, a: &SimState<T>, b: &SimState<T>) {
        let g = a.grid();
        if self.bins.is_empty() {
            self.bin_width = g.h() * T::lit(0.5);
            self.bins = (0..g.len())
                .map(|i| (distance(g, &g.position(i), &self.center) / self.bin_width).floor().to_f64_lossy() as usize)
                .collect();
        }
        let nb = self.bins.iter().max().map_or(0, |m| m + 1);
        let mut prof = vec![T::zero(); nb];
        let mut left: Option<T> = None;
        let mut right: Option<T> = None;
        for i in 0..g.len() {
            let d = cell_diff(a, b, i);
            let slot = &mut prof[self.bins[i]];
            *slot = slot.max(d);
            if (a.rho.values()[i] - b.rho.values()[i]).abs() > self.front_threshold {
                let x = g.center(g.axis_index(i, 0));
                left = Some(left.map_or(x, |l: T| l.min(x)));
                right = Some(right.map_or(x, |r: T| r.max(x)));
            }
        }
        self.times.push(a.t_scaled);
        self.profiles.push(prof);
        self.left_front.push(left);
        self.right_front.push(right);
    }

    /// Largest recorded difference within distance `r` at sample `k`.
    pub fn max_within(&self, k: usize, r: T) -> T {
        if r < T::zero() {
            return T::zero();
        }
        let last = (r / self.bin_width).floor().to_f64_lossy() as usize;
        self.profiles[k].iter().take(last + 1).fold(T::zero(), |m, &v| m.max(v))
    }

    /// Largest recorded difference beyond distance `r` at sample `k`.
    pub fn max_beyond(&self, k: usize, r: T) -> T {
        let first = if r < T::zero() { 0 } else { (r / self.bin_width).ceil().to_f64_lossy() as usize + 1 };
        self.profiles[k].iter().skip(first).fold(T::zero(), |m, &v| m.max(v))
    }
}

impl<T: Real> PairObserver<T> for DifferenceMonitor<T> {
    fn on_start(&mut self, a: &SimState<T>, b: &SimState<T>) {
        self.observe(a, b);
    }
    fn on_step(&mut self, a: &SimState<T>, b: &SimState<T>, _ra: &StepRecord<T>, _rb: &StepRecord<T>) -> bool {
        self.observe(a, b);
        true
    }
}

/// Theil–Sen slope of `(t, x)` pairs.
fn robust_slope<T: Real>(pts: &[(T, T)]) -> Option<T> {
    if pts.len() < 3 {
        return None;
    }
    let stride = (pts.len() / 200).max(1);
    let sub: Vec<(T, T)> = pts.iter().step_by(stride).copied().collect();
    let mut slopes = Vec::new();
    for i in 0..sub.len() {
        for j in (i + 1)..sub.len() {
            let dt = sub[j].0 - sub[i].0;
            if dt > T::zero() {
                slopes.push((sub[j].1 - sub[i].1) / dt);
            }
        }
    }
    if slopes.is_empty() {
        return None;
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(slopes[slopes.len() / 2])
}

/// Outward speed of the `|ρ₁ - ρ₂| > threshold` front (largest of both sides, ≥ 0).
pub fn empirical_front_speed<T: Real>(m: &DifferenceMonitor<T>) -> T {
    let right: Vec<(T, T)> = m.times.iter().zip(&m.right_front).filter_map(|(&t, x)| x.map(|x| (t, x))).collect();
    let left: Vec<(T, T)> = m.times.iter().zip(&m.left_front).filter_map(|(&t, x)| x.map(|x| (t, -x))).collect();
    let r = robust_slope(&right).unwrap_or(T::zero());
    let l = robust_slope(&left).unwrap_or(T::zero());
    r.max(l).max(T::zero())
}

/// Checks the cone of `cone` against a recorded pair. A violation is any recorded
/// difference above `tol` inside the cross-section `|x - x̄| ≤ 6Ad(T* - t)`.
pub fn verify_cone<T: Real>(
    initial: (&SimState<T>, &SimState<T>),
    monitor: &DifferenceMonitor<T>,
    cone: &ConeSpec<T>,
    tol: T,
    lambda_max_observed: T,
) -> Result<ConeReport<T>> {
    check_same(initial.0.grid(), initial.1.grid())?;
    if monitor.profiles.is_empty() {
        return Err(Error::InvalidParameter("difference monitor is empty".into()));
    }
    if monitor.center != cone.center {
        return Err(Error::InvalidParameter("monitor and cone centres differ".into()));
    }
    let t0 = monitor.times[0];
    let mut worst = T::zero();
    for k in 0..monitor.times.len() {
        let t = monitor.times[k] - t0;
        if t >= cone.t_star {
            break;
        }
        worst = worst.max(monitor.max_within(k, cone.radius_at(t)));
    }
    let ball_mismatch = monitor.max_within(0, cone.ball_radius());
    Ok(ConeReport {
        cone_violation: worst > tol,
        max_interior_diff: worst,
        empirical_front_speed: empirical_front_speed(monitor),
        lambda_max_observed,
        tol,
        ball_mismatch,
    })
}

/// Largest difference recorded outside `|x - centre| ≤ r0 + speed·t`.
pub fn max_exterior_diff<T: Real>(monitor: &DifferenceMonitor<T>, r0: T, speed: T) -> T {
    let t0 = monitor.times.first().copied().unwrap_or(T::zero());
    (0..monitor.times.len())
        .map(|k| monitor.max_beyond(k, r0 + speed * (monitor.times[k] - t0)))
        .fold(T::zero(), |m, v| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_geometry() {
        let c = ConeSpec::new(vec![0.0], 2.0, 0.5).unwrap();
        assert_eq!(c.speed, 12.0);
        assert_eq!(c.ball_radius(), 6.0);
        assert_eq!(c.radius_at(0.25), 3.0);
        assert!(ConeSpec::new(vec![0.0], 0.5, 1.0).is_err());
    }

    #[test]
    fn theil_sen_ignores_outlier() {
        let mut pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 2.0 + 0.5 * i as f64)).collect();
        pts[7].1 = 100.0;
        assert!((robust_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
    }
}
