//! Dense brute-force references for testing.
//!
//! Everything here is built by direct indexing (explicit circulant matrices,
//! Kronecker sums, symmetric eigendecompositions, fixed-step RK4) and shares
//! no code with the FFT and closed-form paths of the solver. Quadratic memory
//! in the number of grid nodes, so keep grids small.

use nalgebra::{DMatrix, DVector};

use crate::grid::PeriodicGrid;

/// Periodic `(1, -2, 1) / h²` circulant matrix of order `n`.
pub fn circulant_laplacian(n: usize, h: f64) -> DMatrix<f64> {
    let c = 1.0 / (h * h);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] -= 2.0 * c;
        a[(i, (i + 1) % n)] += c;
        a[(i, (i + n - 1) % n)] += c;
    }
    a
}

/// `A = I_y ⊗ A_x + A_y ⊗ I_x` acting on column-major vectorised fields.
pub fn kron_laplacian(grid: &PeriodicGrid) -> DMatrix<f64> {
    let ax = circulant_laplacian(grid.n_x, grid.h_x);
    let ay = circulant_laplacian(grid.n_y, grid.h_y);
    let ix = DMatrix::<f64>::identity(grid.n_x, grid.n_x);
    let iy = DMatrix::<f64>::identity(grid.n_y, grid.n_y);
    iy.kronecker(&ax) + ay.kronecker(&ix)
}

/// `-κ A²` with `A` the dense Kronecker-sum Laplacian.
pub fn dense_biharmonic(grid: &PeriodicGrid, kappa: f64) -> DMatrix<f64> {
    let a = kron_laplacian(grid);
    -(&a * &a) * kappa
}

/// `e^{tS}` for symmetric `S` through its eigendecomposition.
pub fn expm_symmetric(s: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (t * l).exp()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<f64>, n_x: usize, n_y: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n_x, n_y, v.as_slice())
}

/// Fixed-step classical RK4 for `du/dt = u - u³` up to time `tau`.
pub fn rk4_logistic(u0: f64, tau: f64, dt: f64) -> f64 {
    let f = |u: f64| u - u * u * u;
    let steps = (tau / dt).round().max(1.0) as usize;
    let h = tau / steps as f64;
    let mut u = u0;
    for _ in 0..steps {
        let k1 = f(u);
        let k2 = f(u + 0.5 * h * k1);
        let k3 = f(u + 0.5 * h * k2);
        let k4 = f(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u
}

/// One splitting step assembled from dense pieces: RK4 reaction, then the
/// dense biharmonic exponential, then the dense Laplacian exponential.
pub fn dense_frs_step(u: &DMatrix<f64>, tau: f64, grid: &PeriodicGrid, kappa: f64) -> DMatrix<f64> {
    let reacted = u.map(|v| rk4_logistic(v, tau, 1e-4));
    let eb = expm_symmetric(&dense_biharmonic(grid, kappa), tau);
    let ea = expm_symmetric(&kron_laplacian(grid), tau);
    unvec(&(ea * (eb * vec(&reacted))), grid.n_x, grid.n_y)
}

/// Discrete energy by explicit quadrature with the dense stencil matrix.
pub fn dense_energy(u: &DMatrix<f64>, grid: &PeriodicGrid, kappa: f64) -> f64 {
    let v = vec(u);
    let lap = kron_laplacian(grid) * &v;
    let mut e = 0.0;
    for k in 0..v.len() {
        let w = v[k];
        let potential = 0.25 * (w * w - 1.0) * (w * w - 1.0);
        e += 0.5 * kappa * lap[k] * lap[k] - 0.5 * w * lap[k] + potential;
    }
    e * grid.h_x * grid.h_y
}

/// Frobenius tail `sqrt(Σ_{i>r} σ_i²)`, with `σ_i²` taken as the
/// eigenvalues of the Gram matrix `MᵀM`.
pub fn svd_tail(m: &DMatrix<f64>, r: usize) -> f64 {
    let gram = m.transpose() * m;
    let mut ev = gram.symmetric_eigenvalues().as_slice().to_vec();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.iter().skip(r).map(|&x| x.max(0.0)).sum::<f64>().sqrt()
}
