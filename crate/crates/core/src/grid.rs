use crate::error::{EfkError, Result};

/// Uniform periodic mesh on `[x_lo, x_hi) x [y_lo, y_hi)`.
///
/// The node at the upper bound is identified with the lower bound, so a grid
/// with `n_x` nodes has spacing `(x_hi - x_lo) / n_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub h_x: f64,
    pub h_y: f64,
}

impl PeriodicGrid {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, n_x: usize, n_y: usize) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite() && y_lo.is_finite() && y_hi.is_finite()) {
            return Err(EfkError::InvalidGrid("domain bounds must be finite".into()));
        }
        if x_hi <= x_lo || y_hi <= y_lo {
            return Err(EfkError::InvalidGrid(format!(
                "empty domain [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"
            )));
        }
        if n_x < 2 || n_y < 2 {
            return Err(EfkError::InvalidGrid(format!(
                "need at least 2 nodes per direction, got {n_x} x {n_y}"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            n_x,
            n_y,
            h_x: (x_hi - x_lo) / n_x as f64,
            h_y: (y_hi - y_lo) / n_y as f64,
        })
    }

    /// Square grid with the same node count in both directions.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, lo, hi, n, n)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h_x
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_lo + j as f64 * self.h_y
    }

    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)
    }

    /// Same domain with a different node count.
    pub fn with_nodes(&self, n_x: usize, n_y: usize) -> Result<Self> {
        Self::new(self.x_lo, self.x_hi, self.y_lo, self.y_hi, n_x, n_y)
    }
}

/// Builds a periodic grid, rejecting empty domains and fewer than two nodes.
pub fn build_grid(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, n_x: usize, n_y: usize) -> Result<PeriodicGrid> {
    PeriodicGrid::new(x_lo, x_hi, y_lo, y_hi, n_x, n_y)
}
