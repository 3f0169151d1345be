//! Periodic cubic (4-point Lagrange) interpolation on cell centres.

use crate::grid::Grid;
use crate::real::Real;

/// Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position `t ∈ [0,1)`.
#[inline]
pub fn cubic_weights<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    [
        -t * (t - one) * (t - two) / six,
        (t + one) * (t - one) * (t - two) / two,
        -(t + one) * t * (t - two) / two,
        (t + one) * t * (t - one) / six,
    ]
}

/// Base cell index (wrapped) and fractional offset of coordinate `x` along one axis.
#[inline]
pub fn locate<T: Real>(grid: &Grid<T>, x: T) -> (isize, T) {
    let s = grid.fractional_index(grid.wrap(x));
    let i = s.floor();
    (i.to_f64_lossy() as isize, s - i)
}

/// Interpolates raw `values` at an arbitrary point (periodic wrap on every axis).
pub fn interpolate<T: Real>(grid: &Grid<T>, values: &[T], point: &[T]) -> T {
    let d = grid.dim();
    debug_assert_eq!(point.len(), d);
    let n = grid.n() as isize;
    let mut bases = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    for &x in point {
        let (i, t) = locate(grid, x);
        bases.push(i);
        weights.push(cubic_weights(t));
    }
    let mut acc = T::zero();
    let total = 4usize.pow(d as u32);
    for flat in 0..total {
        let mut idx = 0usize;
        let mut w = T::one();
        let mut rem = flat;
        for k in 0..d {
            let o = rem % 4;
            rem /= 4;
            let cell = (bases[k] + o as isize - 1).rem_euclid(n) as usize;
            idx += cell * grid.stride(k);
            w = w * weights[k][o];
        }
        acc = acc + w * values[idx];
    }
    acc
}

/// 1D convenience wrapper.
#[inline]
pub fn interpolate_1d<T: Real>(grid: &Grid<T>, values: &[T], x: T) -> T {
    interpolate(grid, values, &[x])
}

/// Cells (wrapped) whose values enter the 1D stencil at `x`.
pub fn stencil_cells_1d<T: Real>(grid: &Grid<T>, x: T) -> [usize; 4] {
    let n = grid.n() as isize;
    let (i, _) = locate(grid, x);
    [0, 1, 2, 3].map(|o| (i + o - 1).rem_euclid(n) as usize)
}
