//! Uniform periodic lattices on `[-L, L]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Isotropic cell-centred lattice. Every axis has `cells_per_axis` cells of width
/// `spacing = 2L / n`, centres at `-L + (i + 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Grid<T> {
    dim: usize,
    cells_per_axis: usize,
    domain_half_width: T,
    spacing: T,
    boundary: Boundary,
}

/// Serialized form of a grid; `spacing` is derived and ignored on input.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec<T> {
    dim: usize,
    cells_per_axis: usize,
    domain_half_width: T,
    #[serde(default)]
    #[allow(dead_code)]
    spacing: Option<T>,
    #[serde(default)]
    boundary: Boundary,
}

impl<T: Real> TryFrom<GridSpec<T>> for Grid<T> {
    type Error = Error;
    fn try_from(s: GridSpec<T>) -> Result<Self> {
        Grid::new(s.dim, s.cells_per_axis, s.domain_half_width, s.boundary)
    }
}

pub fn make_grid<T: Real>(dim: usize, n: usize, half_width: T, boundary: Boundary) -> Result<Grid<T>> {
    Grid::new(dim, n, half_width, boundary)
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, n: usize, half_width: T, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 cells per axis, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("cells per axis must be even, got {n}")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if n.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("cell count overflows".into()));
        }
        let spacing = T::lit(2.0) * half_width / T::from_usize_lossy(n);
        Ok(Grid { dim, cells_per_axis: n, domain_half_width: half_width, spacing, boundary })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.cells_per_axis
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.domain_half_width
    }

    #[inline]
    pub fn h(&self) -> T {
        self.spacing
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinate of cell centre `i` along any axis.
    #[inline]
    pub fn center(&self, i: usize) -> T {
        -self.domain_half_width + (T::from_usize_lossy(i) + T::lit(0.5)) * self.spacing
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.cells_per_axis).map(|i| self.center(i)).collect()
    }

    /// Stride of `axis` in the row-major linear index (axis 0 slowest).
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.cells_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    /// Index of the cell along `axis` for linear index `idx`.
    #[inline]
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.cells_per_axis
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dim).map(|k| self.axis_index(idx, k)).collect()
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        multi.iter().enumerate().map(|(k, &i)| (i % self.cells_per_axis) * self.stride(k)).sum()
    }

    /// Periodic neighbour of `idx` shifted by `offset` cells along `axis`.
    #[inline]
    pub fn shift(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let n = self.cells_per_axis as isize;
        let s = self.stride(axis);
        let i = ((idx / s) % self.cells_per_axis) as isize;
        let j = (i + offset).rem_euclid(n) as usize;
        idx - (i as usize) * s + j * s
    }

    /// Position of the cell centre of `idx`.
    pub fn position(&self, idx: usize) -> Vec<T> {
        (0..self.dim).map(|k| self.center(self.axis_index(idx, k))).collect()
    }

    /// Wraps a coordinate into `[-L, L)`.
    pub fn wrap(&self, x: T) -> T {
        let two_l = T::lit(2.0) * self.domain_half_width;
        let shifted = x + self.domain_half_width;
        let m = shifted - (shifted / two_l).floor() * two_l;
        m - self.domain_half_width
    }

    /// Fractional cell coordinate of `x` (cell `i` centre maps to `i`).
    pub fn fractional_index(&self, x: T) -> T {
        (x + self.domain_half_width) / self.spacing - T::lit(0.5)
    }

    pub fn same_shape(&self, other: &Grid<T>) -> bool {
        self.dim == other.dim
            && self.cells_per_axis == other.cells_per_axis
            && self.domain_half_width == other.domain_half_width
    }

    /// Periodic distance between two coordinates along one axis.
    pub fn periodic_distance(&self, a: T, b: T) -> T {
        self.wrap(a - b).abs()
    }

    pub fn cast<U: Real>(&self) -> Grid<U> {
        Grid {
            dim: self.dim,
            cells_per_axis: self.cells_per_axis,
            domain_half_width: U::lit(self.domain_half_width.to_f64_lossy()),
            spacing: U::lit(self.spacing.to_f64_lossy()),
            boundary: self.boundary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_centres() {
        let g = make_grid(1, 8, 4.0_f64, Boundary::Periodic).unwrap();
        assert_eq!(g.h(), 1.0);
        let c = g.centers();
        assert_eq!(c.first().copied(), Some(-3.5));
        assert_eq!(c.last().copied(), Some(3.5));
        assert_eq!(c.len(), 8);
    }

    #[test]
    fn two_dimensional_counts() {
        let g = make_grid(2, 16, 8.0_f64, Boundary::Periodic).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.h(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_grid(1, 7, 4.0_f64, Boundary::Periodic).is_err());
        assert!(make_grid(1, 8, 0.0_f64, Boundary::Periodic).is_err());
        assert!(make_grid(1, 8, -1.0_f64, Boundary::Periodic).is_err());
        assert!(make_grid(1, 6, 1.0_f64, Boundary::Periodic).is_err());
    }

    #[test]
    fn shifts_wrap() {
        let g = make_grid(2, 8, 1.0_f64, Boundary::Periodic).unwrap();
        let idx = g.linear_index(&[0, 7]);
        assert_eq!(g.multi_index(g.shift(idx, 1, 1)), vec![0, 0]);
        assert_eq!(g.multi_index(g.shift(idx, 0, -1)), vec![7, 7]);
        assert_eq!(g.shift(g.shift(idx, 0, 3), 0, -3), idx);
    }

    #[test]
    fn wrap_into_domain() {
        let g = make_grid(1, 8, 4.0_f64, Boundary::Periodic).unwrap();
        assert!((g.wrap(5.0) - (-3.0)).abs() < 1e-14);
        assert!((g.wrap(-4.5) - 3.5).abs() < 1e-14);
        assert!((g.wrap(1.25) - 1.25).abs() < 1e-14);
    }
}
