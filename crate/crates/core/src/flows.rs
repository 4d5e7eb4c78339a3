//! Exact subflows of the split semi-discrete system and their Lie composition.

use crate::error::{EfkError, Result};
use crate::field::Field;
use crate::spectral::{apply_biharmonic_exp, SpectrumTables};

/// Reaction term `f(u) = u - u³`.
#[inline]
pub fn reaction(u: f64) -> f64 {
    u - u * u * u
}

/// Double-well potential `F(u) = (u² - 1)² / 4`.
#[inline]
pub fn potential(u: f64) -> f64 {
    let s = u * u - 1.0;
    0.25 * s * s
}

/// Exact solution at time `tau >= 0` of `du/dt = u - u³` started from `u0`.
///
/// `u(τ) = u0 / sqrt(u0² + (1 - u0²) e^{-2τ})`, which is the usual
/// `u0 e^τ / sqrt(1 + u0²(e^{2τ} - 1))` rescaled to avoid overflow.
pub fn nonlinear_flow_scalar(u0: f64, tau: f64) -> f64 {
    if u0 == 0.0 {
        return 0.0;
    }
    let u2 = u0 * u0;
    let decay = (-2.0 * tau).exp();
    // For |u0| > 1 the denominator stays positive for tau >= 0.
    u0 / (u2 + (1.0 - u2) * decay).sqrt()
}

/// Elementwise reaction flow on a field.
pub fn nonlinear_flow_field(w: &Field, tau: f64) -> Field {
    w.map(|u| nonlinear_flow_scalar(u, tau))
}

/// Exact flow of `Ψ' = A_x Ψ + Ψ A_y`, i.e. `e^{τA_x} Ψ e^{τA_y}`.
pub fn laplacian_flow_full(phi: &Field, tau: f64, spec: &SpectrumTables) -> Result<Field> {
    if phi.shape() != spec.grid().shape() {
        return Err(EfkError::ShapeMismatch {
            expected: spec.grid().shape(),
            got: phi.shape(),
        });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(EfkError::InvalidParameter(format!("tau must be nonnegative, got {tau}")));
    }
    Ok(Field::from_parts(spec.laplacian_exp_matrix(phi.values(), tau), *spec.grid()))
}

/// One full-rank splitting step: reaction, then biharmonic, then Laplacian.
pub fn frs_step(u: &Field, tau: f64, spec: &SpectrumTables) -> Result<Field> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(EfkError::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let w = nonlinear_flow_field(u, tau);
    let k = apply_biharmonic_exp(&w, tau, spec)?;
    laplacian_flow_full(&k, tau, spec)
}

/// Runs `steps` splitting steps, calling `observer(k, &u^k)` after each one.
pub fn frs_run<F>(u0: &Field, tau: f64, steps: usize, spec: &SpectrumTables, mut observer: F) -> Result<Field>
where
    F: FnMut(usize, &Field),
{
    let mut u = u0.clone();
    for k in 1..=steps {
        u = frs_step(&u, tau, spec)?;
        observer(k, &u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use crate::oracle;
    use crate::spectral::build_spectrum;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: PeriodicGrid, seed: u64, amp: f64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(grid, |_, _| rng.gen_range(-amp..amp))
    }

    #[test]
    fn scalar_fixed_points() {
        for tau in [0.0, 0.1, 3.0, 50.0] {
            assert_eq!(nonlinear_flow_scalar(0.0, tau), 0.0);
            assert!((nonlinear_flow_scalar(1.0, tau) - 1.0).abs() < 1e-15);
            assert!((nonlinear_flow_scalar(-1.0, tau) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_matches_rk4_value() {
        // 0.843348 from RK4 with step 1e-4
        let rk = oracle::rk4_logistic(0.5, 1.0, 1e-4);
        assert!((rk - 0.843348).abs() < 1e-6);
        assert!((nonlinear_flow_scalar(0.5, 1.0) - 0.843348).abs() < 1e-6);
    }

    #[test]
    fn scalar_large_time_and_outside_unit_interval() {
        assert!((nonlinear_flow_scalar(0.3, 800.0) - 1.0).abs() < 1e-15);
        assert!((nonlinear_flow_scalar(-0.3, 800.0) + 1.0).abs() < 1e-15);
        let rk = oracle::rk4_logistic(1.5, 0.5, 1e-4);
        assert!((nonlinear_flow_scalar(1.5, 0.5) - rk).abs() < 1e-10);
    }

    #[test]
    fn field_flow() {
        let g = PeriodicGrid::square(0.0, 1.0, 8).unwrap();
        assert_eq!(nonlinear_flow_field(&Field::zeros(g), 1.0).max_abs(), 0.0);
        let half = nonlinear_flow_field(&Field::constant(g, 0.5), 1.0);
        assert!(half.values().iter().all(|v| (v - 0.843348).abs() < 1e-6));
        let r = random_field(g, 11, 1.0);
        assert!(nonlinear_flow_field(&r, 2.0).max_abs() <= 1.0);
    }

    #[test]
    fn laplacian_flow_matches_dense() {
        let g = PeriodicGrid::square(0.0, 8.0, 8).unwrap();
        let spec = build_spectrum(&g, 0.01).unwrap();
        let c = Field::constant(g, 0.7);
        assert!((laplacian_flow_full(&c, 0.2, &spec).unwrap().values() - c.values()).amax() < 1e-15);
        let h = random_field(g, 5, 1.0);
        let id = laplacian_flow_full(&h, 0.0, &spec).unwrap();
        assert!((id.values() - h.values()).amax() < 1e-13);
        let z = laplacian_flow_full(&h, 0.1, &spec).unwrap();
        let dense = oracle::unvec(
            &(oracle::expm_symmetric(&oracle::kron_laplacian(&g), 0.1) * oracle::vec(h.values())),
            8,
            8,
        );
        assert!((z.values() - dense).amax() < 1e-10);
    }

    #[test]
    fn step_preserves_steady_states() {
        let g = PeriodicGrid::square(0.0, 32.0, 16).unwrap();
        let spec = build_spectrum(&g, 0.01).unwrap();
        for c in [-1.0, 0.0, 1.0] {
            let u0 = Field::constant(g, c);
            let u = frs_run(&u0, 0.05, 100, &spec, |_, _| {}).unwrap();
            assert!((u.values() - u0.values()).amax() < 1e-13, "state {c}");
        }
    }

    #[test]
    fn step_matches_dense_composition() {
        let g = PeriodicGrid::square(0.0, 8.0, 8).unwrap();
        let spec = build_spectrum(&g, 0.01).unwrap();
        for seed in 0..3 {
            let u = random_field(g, seed, 1.0);
            let ours = frs_step(&u, 0.01, &spec).unwrap();
            let dense = oracle::dense_frs_step(u.values(), 0.01, &g, 0.01);
            assert!((ours.values() - dense).norm() < 1e-8);
        }
    }

    #[test]
    fn linear_subflows_commute() {
        let g = PeriodicGrid::new(0.0, 4.0, 0.0, 3.0, 8, 6).unwrap();
        let spec = build_spectrum(&g, 0.03).unwrap();
        let h = random_field(g, 9, 1.0);
        let ab = laplacian_flow_full(&apply_biharmonic_exp(&h, 0.05, &spec).unwrap(), 0.05, &spec).unwrap();
        let ba = apply_biharmonic_exp(&laplacian_flow_full(&h, 0.05, &spec).unwrap(), 0.05, &spec).unwrap();
        assert!((ab.values() - ba.values()).amax() < 1e-13);
    }

    #[test]
    fn run_counts_and_composes() {
        let g = PeriodicGrid::square(0.0, 8.0, 8).unwrap();
        let spec = build_spectrum(&g, 0.01).unwrap();
        let u0 = random_field(g, 3, 0.9);
        let same = frs_run(&u0, 0.1, 0, &spec, |_, _| panic!("no steps")).unwrap();
        assert_eq!(same, u0);
        let mut seen = Vec::new();
        let two = frs_run(&u0, 0.1, 2, &spec, |k, _| seen.push(k)).unwrap();
        assert_eq!(seen, vec![1, 2]);
        let manual = frs_step(&frs_step(&u0, 0.1, &spec).unwrap(), 0.1, &spec).unwrap();
        assert_eq!(two, manual);
        assert!(frs_step(&u0, 0.0, &spec).is_err());
    }

    #[test]
    fn first_order_in_time() {
        let g = PeriodicGrid::square(0.0, 32.0, 32).unwrap();
        let spec = build_spectrum(&g, 0.01).unwrap();
        let u0 = Field::from_fn(g, |x, y| {
            0.3 * (2.0 * std::f64::consts::PI * x / 32.0).cos() * (2.0 * std::f64::consts::PI * y / 32.0).sin() + 0.1
        });
        let solve = |m: usize| frs_run(&u0, 1.0 / m as f64, m, &spec, |_, _| {}).unwrap().into_values();
        let reference = solve(2048);
        let errs: Vec<f64> = [32, 64, 128].iter().map(|&m| (solve(m) - &reference).norm()).collect::<Vec<_>>();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn reaction_flow_keeps_unit_interval(u0 in -1.0f64..=1.0, tau in 0.0f64..20.0) {
                let u = nonlinear_flow_scalar(u0, tau);
                prop_assert!(u.abs() <= 1.0);
                prop_assert!(u * u0 >= 0.0);
            }

            #[test]
            fn linear_part_contracts_frobenius(seed in 0u64..500, tau in 1e-3f64..2.0) {
                let g = PeriodicGrid::square(0.0, 8.0, 8).unwrap();
                let spec = build_spectrum(&g, 0.05).unwrap();
                let h = random_field(g, seed, 1.0);
                let out = laplacian_flow_full(&apply_biharmonic_exp(&h, tau, &spec).unwrap(), tau, &spec).unwrap();
                prop_assert!(out.frobenius_norm() <= h.frobenius_norm() * (1.0 + 1e-14));
            }

            // Smooth low-mode data: the regime where the maximum principle is
            // observed for the composed scheme.
            #[test]
            fn max_principle_on_smooth_data(
                a in -0.5f64..0.5, b in -0.3f64..0.3, c in -0.2f64..0.2, tau in 1e-3f64..1.0,
            ) {
                let g = PeriodicGrid::square(0.0, 32.0, 32).unwrap();
                let spec = build_spectrum(&g, 0.01).unwrap();
                let w = 2.0 * std::f64::consts::PI / 32.0;
                let u0 = Field::from_fn(g, |x, y| a + b * (w * x).cos() * (w * y).sin() + c * (2.0 * w * y).cos());
                prop_assume!(u0.max_abs() <= 1.0);
                let u1 = frs_step(&u0, tau, &spec).unwrap();
                prop_assert!(u1.max_abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn biharmonic_flow_is_not_pointwise_contractive() {
        // Sharp data can overshoot in max norm under e^{τÃ}; the max-norm
        // bound is only observed for smooth, well-resolved data.
        let g = PeriodicGrid::square(0.0, 1.0, 32).unwrap();
        let spec = build_spectrum(&g, 1e-4).unwrap();
        let sq = Field::from_parts(DMatrix::from_fn(32, 32, |i, j| if i < 16 && j < 16 { 1.0 } else { -1.0 }), g);
        let out = apply_biharmonic_exp(&sq, 1e-6, &spec).unwrap();
        assert!(out.max_abs() > 1.0);
    }
}
