//! Periodic central differences.
//!
//! First derivatives use `(f[i+1] - f[i-1]) / 2h`, second derivatives
//! `(f[i+1] - 2 f[i] + f[i-1]) / h²`. Both are exact on quadratics away from the seam.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::real::Real;

const PAR_THRESHOLD: usize = 1 << 14;

pub(crate) fn diff_values<T: Real>(grid: &Grid<T>, values: &[T], axis: usize, order: u8) -> Vec<T> {
    let h = grid.h();
    let inv_2h = T::one() / (T::lit(2.0) * h);
    let inv_h2 = T::one() / (h * h);
    let two = T::lit(2.0);
    let cell = |i: usize| -> T {
        let p = values[grid.shift(i, axis, 1)];
        let m = values[grid.shift(i, axis, -1)];
        if order == 1 {
            (p - m) * inv_2h
        } else {
            (p - two * values[i] + m) * inv_h2
        }
    };
    if values.len() >= PAR_THRESHOLD {
        (0..values.len()).into_par_iter().map(cell).collect()
    } else {
        (0..values.len()).map(cell).collect()
    }
}

/// Central difference of `field` along `axis`; `order` is 1 or 2.
pub fn discrete_derivative<T: Real>(field: &ScalarField<T>, axis: usize, order: u8) -> Result<ScalarField<T>> {
    let g = *field.grid();
    if axis >= g.dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for {}D grid", g.dim())));
    }
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!("derivative order must be 1 or 2, got {order}")));
    }
    Ok(ScalarField::from_raw(g, diff_values(&g, field.values(), axis, order)))
}

pub fn gradient<T: Real>(field: &ScalarField<T>) -> VectorField<T> {
    let g = *field.grid();
    let comps = (0..g.dim()).map(|k| diff_values(&g, field.values(), k, 1)).collect();
    VectorField::from_raw(g, comps)
}

pub fn laplacian<T: Real>(field: &ScalarField<T>) -> ScalarField<T> {
    let g = *field.grid();
    let mut acc = vec![T::zero(); g.len()];
    for k in 0..g.dim() {
        for (a, d) in acc.iter_mut().zip(diff_values(&g, field.values(), k, 2)) {
            *a = *a + d;
        }
    }
    ScalarField::from_raw(g, acc)
}

pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let g = *v.grid();
    let mut acc = vec![T::zero(); g.len()];
    for k in 0..g.dim() {
        for (a, d) in acc.iter_mut().zip(diff_values(&g, v.component(k), k, 1)) {
            *a = *a + d;
        }
    }
    ScalarField::from_raw(g, acc)
}

/// Largest `|D_i v_j - D_j v_i|` over cells and axis pairs. Zero in 1D.
pub fn curl_residual<T: Real>(v: &VectorField<T>) -> T {
    let g = *v.grid();
    let mut worst = T::zero();
    for i in 0..g.dim() {
        for j in (i + 1)..g.dim() {
            let a = diff_values(&g, v.component(j), i, 1);
            let b = diff_values(&g, v.component(i), j, 1);
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((*x - *y).abs());
            }
        }
    }
    worst
}

/// Largest Hessian entry in magnitude. Diagonal entries use the compact
/// second difference, off-diagonal ones compose central first differences.
pub fn sup_hessian<T: Real>(field: &ScalarField<T>) -> T {
    let g = *field.grid();
    let mut worst = T::zero();
    for i in 0..g.dim() {
        let dii = diff_values(&g, field.values(), i, 2);
        worst = dii.iter().fold(worst, |m, v| m.max(v.abs()));
        if i + 1 < g.dim() {
            let di = diff_values(&g, field.values(), i, 1);
            for j in (i + 1)..g.dim() {
                let dij = diff_values(&g, &di, j, 1);
                worst = dij.iter().fold(worst, |m, v| m.max(v.abs()));
            }
        }
    }
    worst
}

/// All `k`-th order composed central differences `D_{a1}…D_{ak} f`, one per ordered
/// multi-index (so `d^k` arrays).
pub fn derivative_tensor<T: Real>(grid: &Grid<T>, values: &[T], k: usize) -> Vec<Vec<T>> {
    let mut level = vec![values.to_vec()];
    for _ in 0..k {
        level = level
            .iter()
            .flat_map(|v| (0..grid.dim()).map(move |axis| diff_values(grid, v, axis, 1)))
            .collect();
    }
    level
}

/// `‖∇^k f‖₂²` with cell volume `h^d`, `f` given by raw values.
pub fn seminorm_sq<T: Real>(grid: &Grid<T>, values: &[T], k: usize) -> T {
    let vol = grid.cell_volume();
    derivative_tensor(grid, values, k)
        .iter()
        .map(|v| v.iter().map(|&x| x * x).sum::<T>())
        .sum::<T>()
        * vol
}

/// Discrete `H^m` norm `sqrt(Σ_{k≤m} ‖∇^k f‖₂²)`.
pub fn sobolev_norm<T: Real>(field: &ScalarField<T>, m: usize) -> T {
    (0..=m).map(|k| seminorm_sq(field.grid(), field.values(), k)).sum::<T>().sqrt()
}

/// Discrete `H^m` norm of a vector field, summed over components.
pub fn sobolev_norm_vec<T: Real>(v: &VectorField<T>, m: usize) -> T {
    let g = *v.grid();
    (0..g.dim())
        .flat_map(|c| (0..=m).map(move |k| (c, k)))
        .map(|(c, k)| seminorm_sq(&g, v.component(c), k))
        .sum::<T>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};

    fn sine_err(n: usize, order: u8) -> f64 {
        let l = 2.0_f64;
        let g = make_grid(1, n, l, Boundary::Periodic).unwrap();
        let k = std::f64::consts::PI / l;
        let f = ScalarField::from_fn(g, |x| (k * x[0]).sin()).unwrap();
        let d = discrete_derivative(&f, 0, order).unwrap();
        (0..n)
            .map(|i| {
                let x = g.center(i);
                let exact = if order == 1 { k * (k * x).cos() } else { -k * k * (k * x).sin() };
                (d.at(i) - exact).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn second_order_convergence() {
        for order in [1, 2] {
            let r = sine_err(64, order) / sine_err(128, order);
            assert!((r - 4.0).abs() < 0.8, "order {order}: ratio {r}");
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = make_grid(2, 8, 1.0_f64, Boundary::Periodic).unwrap();
        let f = ScalarField::constant(g, 2.5);
        for axis in 0..2 {
            for order in [1, 2] {
                assert_eq!(discrete_derivative(&f, axis, order).unwrap().sup_abs(), 0.0);
            }
        }
    }

    #[test]
    fn bad_axis_or_order() {
        let g = make_grid(1, 8, 1.0_f64, Boundary::Periodic).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!(discrete_derivative(&f, 1, 1).is_err());
        assert!(discrete_derivative(&f, 0, 3).is_err());
    }

    #[test]
    fn gradient_is_curl_free() {
        let g = make_grid(2, 32, 3.0_f64, Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 1.3).sin() * (x[1] * 0.7).cos() + x[0] * x[1] * 0.01).unwrap();
        assert!(curl_residual(&gradient(&f)) < 1e-12);
    }

    #[test]
    fn quadratic_is_exact_in_interior() {
        let g = make_grid(1, 32, 4.0_f64, Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |x| 1.0 + 2.0 * x[0] + 3.0 * x[0] * x[0]).unwrap();
        let d1 = discrete_derivative(&f, 0, 1).unwrap();
        let d2 = discrete_derivative(&f, 0, 2).unwrap();
        for i in 1..31 {
            let x = g.center(i);
            assert!((d1.at(i) - (2.0 + 6.0 * x)).abs() < 1e-11);
            assert!((d2.at(i) - 6.0).abs() < 1e-10);
        }
    }
}
