//! Cell-averaged scalar and vector fields on a [`Grid`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("scalar field cell {i}")));
        }
        Ok(ScalarField { grid, values })
    }

    /// Builds a field without the finiteness scan. Length is still checked in debug builds.
    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn sup_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// `sum(v) * h^d`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// 1D convenience: value in cell `i`.
    #[inline]
    pub fn at(&self, i: usize) -> T {
        self.values[i]
    }
}

/// `d` components per cell, stored component-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorField<T> {
    grid: Grid<T>,
    components: Vec<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: Grid<T>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for (k, c) in components.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!("component {k} has {} values", c.len())));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("vector field component {k} cell {i}")));
            }
        }
        Ok(VectorField { grid, components })
    }

    pub(crate) fn from_raw(grid: Grid<T>, components: Vec<Vec<T>>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        VectorField { grid, components }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        VectorField { grid, components: vec![vec![T::zero(); grid.len()]; grid.dim()] }
    }

    pub fn from_scalars(fields: Vec<ScalarField<T>>) -> Result<Self> {
        let grid = *fields
            .first()
            .ok_or_else(|| Error::GridMismatch("no components".into()))?
            .grid();
        for f in &fields {
            check_same(&grid, f.grid())?;
        }
        Self::new(grid, fields.into_iter().map(ScalarField::into_values).collect())
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn component(&self, k: usize) -> &[T] {
        &self.components[k]
    }

    #[inline]
    pub fn component_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.components[k]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn component_field(&self, k: usize) -> ScalarField<T> {
        ScalarField::from_raw(self.grid, self.components[k].clone())
    }

    /// Euclidean magnitude per cell.
    pub fn magnitude(&self) -> ScalarField<T> {
        let values = (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<T>().sqrt())
            .collect();
        ScalarField::from_raw(self.grid, values)
    }

    pub fn sup_norm(&self) -> T {
        self.magnitude().max()
    }

    /// Discrete `L²` norm: `sqrt(h^d Σ |v|²)`.
    pub fn l2_norm(&self) -> T {
        let s: T = self.components.iter().flat_map(|c| c.iter()).map(|&v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn check_same<T: Real>(a: &Grid<T>, b: &Grid<T>) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "({}D, n={}, L={}) vs ({}D, n={}, L={})",
            a.dim(),
            a.n(),
            a.half_width(),
            b.dim(),
            b.n(),
            b.half_width()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = make_grid(1, 8, 1.0_f64, Boundary::Periodic).unwrap();
        assert!(ScalarField::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(g, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn integral_of_constant() {
        let g = make_grid(2, 8, 2.0_f64, Boundary::Periodic).unwrap();
        let f = ScalarField::constant(g, 3.0);
        assert!((f.integral() - 3.0 * 16.0).abs() < 1e-12);
    }

    #[test]
    fn vector_magnitude() {
        let g = make_grid(2, 8, 1.0_f64, Boundary::Periodic).unwrap();
        let v = VectorField::new(g, vec![vec![3.0; 64], vec![4.0; 64]]).unwrap();
        assert_eq!(v.sup_norm(), 5.0);
    }
}
