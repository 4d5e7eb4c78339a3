use nalgebra::DMatrix;

use crate::error::{EfkError, Result};
use crate::grid::PeriodicGrid;

/// Dense grid function stored as an `n_x x n_y` matrix.
///
/// Row index is the x index and column index the y index. Column-major
/// storage makes the flattened buffer the lexicographic vector with x
/// running fastest, so `(A_y ⊗ I_x) vec(W) = vec(W A_yᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: DMatrix<f64>,
    grid: PeriodicGrid,
}

impl Field {
    pub fn new(values: DMatrix<f64>, grid: PeriodicGrid) -> Result<Self> {
        if values.shape() != grid.shape() {
            return Err(EfkError::ShapeMismatch {
                expected: grid.shape(),
                got: values.shape(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EfkError::NonFinite);
        }
        Ok(Self { values, grid })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            values: DMatrix::zeros(grid.n_x, grid.n_y),
            grid,
        }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self {
            values: DMatrix::from_element(grid.n_x, grid.n_y, c),
            grid,
        }
    }

    /// Samples `f(x_i, y_j)` at every node.
    pub fn from_fn(grid: PeriodicGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = DMatrix::from_fn(grid.n_x, grid.n_y, |i, j| f(grid.x(i), grid.y(j)));
        Self { values, grid }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: self.values.map(f),
            grid: self.grid,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.amax()
    }

    /// Wraps a matrix produced internally from a field on the same grid.
    pub(crate) fn from_parts(values: DMatrix<f64>, grid: PeriodicGrid) -> Self {
        debug_assert_eq!(values.shape(), grid.shape());
        Self { values, grid }
    }
}
