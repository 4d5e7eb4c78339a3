//! Periodic finite-difference operators and their exponentials.
//!
//! The 1D periodic second-difference matrices `A_x`, `A_y` are circulant, so
//! they are diagonalised by the discrete Fourier transform with eigenvalues
//! `-(4/h²) sin²(kπ/n)`. The 2D Laplacian is the Kronecker sum of the two and
//! the biharmonic term is `-κ A²`; every operator here is therefore a diagonal
//! multiplier in 2D Fourier space. Forward transform, multiply, inverse
//! transform, keep the real part.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{EfkError, Result};
use crate::field::Field;
use crate::grid::PeriodicGrid;

/// Eigenvalue tables of the periodic Laplacian and biharmonic operators,
/// together with the FFT plans that apply them.
#[derive(Clone)]
pub struct SpectrumTables {
    grid: PeriodicGrid,
    kappa: f64,
    lambda_x: Vec<f64>,
    lambda_y: Vec<f64>,
    lambda_biharmonic: DMatrix<f64>,
    plans: Plans,
}

#[derive(Clone)]
struct Plans {
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectrumTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectrumTables")
            .field("grid", &self.grid)
            .field("kappa", &self.kappa)
            .field("lambda_x", &self.lambda_x)
            .field("lambda_y", &self.lambda_y)
            .finish_non_exhaustive()
    }
}

/// Eigenvalues of the periodic 1D second-difference matrix with spacing `h`.
pub fn circulant_laplacian_eigenvalues(n: usize, h: f64) -> Vec<f64> {
    let scale = -4.0 / (h * h);
    (0..n)
        .map(|k| {
            let s = (k as f64 * PI / n as f64).sin();
            scale * s * s
        })
        .collect()
}

/// Builds the spectral tables for `grid` and biharmonic coefficient `kappa`.
pub fn build_spectrum(grid: &PeriodicGrid, kappa: f64) -> Result<SpectrumTables> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(EfkError::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let lambda_x = circulant_laplacian_eigenvalues(grid.n_x, grid.h_x);
    let lambda_y = circulant_laplacian_eigenvalues(grid.n_y, grid.h_y);
    let lambda_biharmonic = DMatrix::from_fn(grid.n_x, grid.n_y, |i, j| {
        let l = lambda_x[i] + lambda_y[j];
        -kappa * l * l
    });
    let mut planner = FftPlanner::new();
    let plans = Plans {
        fwd_x: planner.plan_fft_forward(grid.n_x),
        inv_x: planner.plan_fft_inverse(grid.n_x),
        fwd_y: planner.plan_fft_forward(grid.n_y),
        inv_y: planner.plan_fft_inverse(grid.n_y),
    };
    Ok(SpectrumTables {
        grid: *grid,
        kappa,
        lambda_x,
        lambda_y,
        lambda_biharmonic,
        plans,
    })
}

impl SpectrumTables {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda_x(&self) -> &[f64] {
        &self.lambda_x
    }

    pub fn lambda_y(&self) -> &[f64] {
        &self.lambda_y
    }

    pub fn lambda_biharmonic(&self) -> &DMatrix<f64> {
        &self.lambda_biharmonic
    }

    fn check_field(&self, h: &Field) -> Result<()> {
        if h.shape() != self.grid.shape() {
            return Err(EfkError::ShapeMismatch {
                expected: self.grid.shape(),
                got: h.shape(),
            });
        }
        Ok(())
    }

    /// Applies the diagonal Fourier multiplier `mult(i, j)` to `h`.
    ///
    /// Steps: 2D forward FFT, Hadamard product with the multiplier, 2D
    /// inverse FFT, real part.
    fn apply_multiplier_2d(&self, h: &DMatrix<f64>, mult: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
        let (nx, ny) = h.shape();
        // Column-major: each column (fixed j) is contiguous along x.
        let mut buf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plans.fwd_x.process(&mut buf);

        let mut tr = vec![Complex64::new(0.0, 0.0); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                tr[i * ny + j] = buf[j * nx + i];
            }
        }
        self.plans.fwd_y.process(&mut tr);
        for i in 0..nx {
            for j in 0..ny {
                tr[i * ny + j] *= mult(i, j);
            }
        }
        self.plans.inv_y.process(&mut tr);
        for j in 0..ny {
            for i in 0..nx {
                buf[j * nx + i] = tr[i * ny + j];
            }
        }
        self.plans.inv_x.process(&mut buf);

        let scale = 1.0 / (nx * ny) as f64;
        debug_assert!({
            let imag = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs())) * scale;
            imag <= 1e-9 * (1.0 + h.norm())
        });
        DMatrix::from_iterator(nx, ny, buf.iter().map(|c| c.re * scale))
    }

    /// Applies the 1D multiplier `mult(k)` columnwise to `m` using the given plans.
    fn apply_multiplier_1d(
        m: &DMatrix<f64>,
        fwd: &Arc<dyn Fft<f64>>,
        inv: &Arc<dyn Fft<f64>>,
        mult: impl Fn(usize) -> f64,
    ) -> DMatrix<f64> {
        let (n, r) = m.shape();
        if r == 0 {
            return m.clone();
        }
        let mut buf: Vec<Complex64> = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut buf);
        for col in buf.chunks_exact_mut(n) {
            for (k, c) in col.iter_mut().enumerate() {
                *c *= mult(k);
            }
        }
        inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        debug_assert!({
            let imag = buf.iter().fold(0.0f64, |a, c| a.max(c.im.abs())) * scale;
            imag <= 1e-9 * (1.0 + m.norm())
        });
        DMatrix::from_iterator(n, r, buf.iter().map(|c| c.re * scale))
    }

    /// Raw-matrix version of [`apply_biharmonic_exp`] used by the low-rank flows.
    pub(crate) fn biharmonic_exp_matrix(&self, h: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
        let lb = &self.lambda_biharmonic;
        self.apply_multiplier_2d(h, |i, j| (tau * lb[(i, j)]).exp())
    }

    pub(crate) fn laplacian_exp_matrix(&self, h: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
        let (lx, ly) = (&self.lambda_x, &self.lambda_y);
        self.apply_multiplier_2d(h, |i, j| (tau * (lx[i] + ly[j])).exp())
    }
}

/// Five-point periodic Laplacian `δ_s H`, evaluated directly from the stencil.
pub fn apply_laplacian(h: &Field, spec: &SpectrumTables) -> Result<Field> {
    spec.check_field(h)?;
    let g = spec.grid;
    let (nx, ny) = (g.n_x, g.n_y);
    let (cx, cy) = (1.0 / (g.h_x * g.h_x), 1.0 / (g.h_y * g.h_y));
    let w = h.values();
    let out = DMatrix::from_fn(nx, ny, |i, j| {
        let c = w[(i, j)];
        let xm = w[((i + nx - 1) % nx, j)];
        let xp = w[((i + 1) % nx, j)];
        let ym = w[(i, (j + ny - 1) % ny)];
        let yp = w[(i, (j + 1) % ny)];
        cx * (xm - 2.0 * c + xp) + cy * (ym - 2.0 * c + yp)
    });
    Ok(Field::from_parts(out, g))
}

/// `Z = Ã ⊛ H` with `Ã = -κ A²`, computed through the 2D FFT.
pub fn apply_biharmonic(h: &Field, spec: &SpectrumTables) -> Result<Field> {
    spec.check_field(h)?;
    let lb = &spec.lambda_biharmonic;
    let out = spec.apply_multiplier_2d(h.values(), |i, j| lb[(i, j)]);
    Ok(Field::from_parts(out, spec.grid))
}

/// `e^{τÃ} ⊛ H`: exact flow of the biharmonic subproblem over time `tau`.
pub fn apply_biharmonic_exp(h: &Field, tau: f64, spec: &SpectrumTables) -> Result<Field> {
    spec.check_field(h)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(EfkError::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    Ok(Field::from_parts(spec.biharmonic_exp_matrix(h.values(), tau), spec.grid))
}

/// `e^{τ A_x} M` for an `n_x x r` matrix, applied column by column.
pub fn apply_exp_x(m: &DMatrix<f64>, tau: f64, spec: &SpectrumTables) -> Result<DMatrix<f64>> {
    if m.nrows() != spec.grid.n_x {
        return Err(EfkError::ShapeMismatch {
            expected: (spec.grid.n_x, m.ncols()),
            got: m.shape(),
        });
    }
    let lx = &spec.lambda_x;
    Ok(SpectrumTables::apply_multiplier_1d(m, &spec.plans.fwd_x, &spec.plans.inv_x, |k| {
        (tau * lx[k]).exp()
    }))
}

/// `e^{τ A_y} M` for an `n_y x r` matrix, applied column by column.
pub fn apply_exp_y(m: &DMatrix<f64>, tau: f64, spec: &SpectrumTables) -> Result<DMatrix<f64>> {
    if m.nrows() != spec.grid.n_y {
        return Err(EfkError::ShapeMismatch {
            expected: (spec.grid.n_y, m.ncols()),
            got: m.shape(),
        });
    }
    let ly = &spec.lambda_y;
    Ok(SpectrumTables::apply_multiplier_1d(m, &spec.plans.fwd_y, &spec.plans.inv_y, |k| {
        (tau * ly[k]).exp()
    }))
}
