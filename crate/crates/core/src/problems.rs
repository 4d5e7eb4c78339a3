//! Problem presets: the trigonometric convergence test on `[0, 32]²` and the
//! star, dumbbell and torus shape-evolution runs.

use std::f64::consts::PI;

use crate::error::{EfkError, Result};
use crate::field::Field;
use crate::grid::PeriodicGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Star,
    Dumbbell,
    Torus,
    Custom,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::Star => "star",
            ProblemKind::Dumbbell => "dumbbell",
            ProblemKind::Torus => "torus",
            ProblemKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "example1" => ProblemKind::Example1,
            "star" => ProblemKind::Star,
            "dumbbell" => ProblemKind::Dumbbell,
            "torus" => ProblemKind::Torus,
            "custom" => ProblemKind::Custom,
            _ => return None,
        })
    }
}

/// Equation parameters and domain for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub kappa: f64,
    pub final_time: f64,
    /// Interface width for the shape problems; `None` derives it from the grid.
    pub epsilon: Option<f64>,
}

impl ProblemSpec {
    pub fn example1() -> Self {
        Self {
            kind: ProblemKind::Example1,
            x_lo: 0.0,
            x_hi: 32.0,
            y_lo: 0.0,
            y_hi: 32.0,
            kappa: 0.01,
            final_time: 1.0,
            epsilon: None,
        }
    }

    pub fn star() -> Self {
        Self {
            kind: ProblemKind::Star,
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo: 0.0,
            y_hi: 1.0,
            kappa: 1e-4,
            final_time: 0.01,
            epsilon: None,
        }
    }

    pub fn dumbbell() -> Self {
        Self {
            kind: ProblemKind::Dumbbell,
            x_lo: 0.0,
            x_hi: 2.0,
            y_lo: 0.0,
            y_hi: 1.0,
            kappa: 1e-4,
            final_time: 0.02,
            epsilon: None,
        }
    }

    pub fn torus() -> Self {
        Self {
            kind: ProblemKind::Torus,
            x_lo: -1.0,
            x_hi: 1.0,
            y_lo: -1.0,
            y_hi: 1.0,
            kappa: 1e-4,
            final_time: 0.04,
            epsilon: None,
        }
    }

    /// Preset for a named problem. `Custom` starts from the example 1 domain
    /// and expects its initial data from elsewhere.
    pub fn preset(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Example1 => Self::example1(),
            ProblemKind::Star => Self::star(),
            ProblemKind::Dumbbell => Self::dumbbell(),
            ProblemKind::Torus => Self::torus(),
            ProblemKind::Custom => Self { kind, ..Self::example1() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_nan() || self.kappa <= 0.0 {
            return Err(EfkError::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.final_time.is_nan() || self.final_time <= 0.0 {
            return Err(EfkError::InvalidParameter(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        if let Some(eps) = self.epsilon {
            if eps.is_nan() || eps <= 0.0 {
                return Err(EfkError::InvalidParameter(format!("epsilon must be positive, got {eps}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self, n_x: usize, n_y: usize) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.x_lo, self.x_hi, self.y_lo, self.y_hi, n_x, n_y)
    }

    /// Interface width used on `grid`: the configured one or the grid default.
    pub fn epsilon_for(&self, grid: &PeriodicGrid) -> Result<f64> {
        match self.epsilon {
            Some(e) => Ok(e),
            None => interface_width(grid),
        }
    }

    /// Initial field for the preset problems; `Custom` has none.
    pub fn initial(&self, grid: &PeriodicGrid) -> Result<Field> {
        self.validate()?;
        match self.kind {
            ProblemKind::Example1 => Ok(example1_initial(grid)),
            ProblemKind::Star => Ok(star_initial(grid, self.epsilon_for(grid)?)),
            ProblemKind::Dumbbell => Ok(dumbbell_initial(grid, self.epsilon_for(grid)?)),
            ProblemKind::Torus => Ok(torus_initial(grid, self.epsilon_for(grid)?)),
            ProblemKind::Custom => Err(EfkError::InvalidParameter(
                "custom problems need explicit initial data".into(),
            )),
        }
    }
}

pub fn example1_value(x: f64, y: f64) -> f64 {
    let c = |a: f64| a.cos();
    let s = |a: f64| a.sin();
    let cos2 = c(PI * (x + 10.0) / 32.0).powi(2);
    let sin2 = s(PI * (y + 3.0) / 32.0).powi(2);
    0.1 - 0.2 * c(2.0 * PI * (x - 12.0) / 32.0) * s(2.0 * PI * (y - 1.0) / 32.0) + 0.1 * cos2 * sin2
        - 0.2 * s(4.0 * PI * x / 32.0).powi(2) * c(4.0 * PI * (y - 6.0) / 32.0)
}

/// Trigonometric initial data of the convergence test.
pub fn example1_initial(grid: &PeriodicGrid) -> Field {
    Field::from_fn(*grid, example1_value)
}

/// `ε = 5 h_x / (√2 atanh(0.9))`.
pub fn interface_width(grid: &PeriodicGrid) -> Result<f64> {
    if grid.h_x.is_nan() || grid.h_x <= 0.0 {
        return Err(EfkError::InvalidGrid("h_x must be positive".into()));
    }
    Ok(5.0 * grid.h_x / (2f64.sqrt() * 0.9f64.atanh()))
}

fn profile(d: f64, epsilon: f64) -> f64 {
    (d / (epsilon * 2f64.sqrt())).tanh()
}

pub fn star_value(x: f64, y: f64, epsilon: f64) -> f64 {
    let (dx, dy) = (x - 0.5, y - 0.5);
    let theta = if dx == 0.0 && dy == 0.0 {
        0.0
    } else if dx > 0.0 {
        (dy / dx).atan()
    } else {
        // dx == 0 off-center: atan(±inf) = ±π/2.
        PI + (dy / dx).atan()
    };
    let radius = 0.25 + 0.1 * (6.0 * theta).cos();
    profile(radius - (dx * dx + dy * dy).sqrt(), epsilon)
}

/// Six-pointed star centred at `(0.5, 0.5)` on the unit square.
pub fn star_initial(grid: &PeriodicGrid, epsilon: f64) -> Field {
    Field::from_fn(*grid, |x, y| star_value(x, y, epsilon))
}

pub fn dumbbell_value(x: f64, y: f64, epsilon: f64) -> f64 {
    if x > 0.4 && x < 1.6 && y > 0.4 && y < 0.6 {
        return 1.0;
    }
    let r1 = ((x - 0.3).powi(2) + (y - 0.5).powi(2)).sqrt();
    let r2 = ((x - 1.7).powi(2) + (y - 0.5).powi(2)).sqrt();
    1.0 + profile(0.2 - r1, epsilon) + profile(0.2 - r2, epsilon)
}

/// Two discs joined by a bar on `[0, 2] x [0, 1]`.
pub fn dumbbell_initial(grid: &PeriodicGrid, epsilon: f64) -> Field {
    Field::from_fn(*grid, |x, y| dumbbell_value(x, y, epsilon))
}

pub fn torus_value(x: f64, y: f64, epsilon: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    -1.0 + profile(0.4 - r, epsilon) - profile(0.3 - r, epsilon)
}

/// Annulus `0.3 < r < 0.4` on `[-1, 1]²`.
pub fn torus_initial(grid: &PeriodicGrid, epsilon: f64) -> Field {
    Field::from_fn(*grid, |x, y| torus_value(x, y, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_origin_value() {
        // term by term: 0.1 - 0.2 cos(-3π/4) sin(-π/16) + 0.1 cos²(5π/16) sin²(3π/32) - 0
        let t1 = 0.1;
        let t2 = -0.2 * (-0.75 * PI).cos() * (-PI / 16.0).sin();
        let t3 = 0.1 * (5.0 * PI / 16.0).cos().powi(2) * (3.0 * PI / 32.0).sin().powi(2);
        assert!((t1 + t2 + t3 - 0.075012).abs() < 1e-5);
        assert!((example1_value(0.0, 0.0) - 0.075012).abs() < 1e-5);
    }

    #[test]
    fn example1_bounded_and_periodic() {
        let g = PeriodicGrid::square(0.0, 32.0, 64).unwrap();
        assert!(example1_initial(&g).max_abs() <= 0.6);
        for k in 0..20 {
            let y = k as f64 * 1.7;
            assert!((example1_value(32.0, y) - example1_value(0.0, y)).abs() < 1e-12);
            assert!((example1_value(y, 32.0) - example1_value(y, 0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn interface_width_value() {
        let g = PeriodicGrid::square(0.0, 1.0, 128).unwrap();
        let eps = interface_width(&g).unwrap();
        // atanh(0.9) = 0.5 ln(19) = 1.4722194895832204
        let expected = 5.0 / (128.0 * 2f64.sqrt() * (0.5 * 19f64.ln()));
        assert!((eps - expected).abs() < 1e-15);
        assert!((eps - 0.0187617).abs() < 1e-6);
        let coarse = PeriodicGrid::square(0.0, 1.0, 64).unwrap();
        assert!((interface_width(&coarse).unwrap() - 2.0 * eps).abs() < 1e-15);
    }

    #[test]
    fn star_values() {
        let eps = 5.0 / (128.0 * 2f64.sqrt() * 0.9f64.atanh());
        let far = star_value(0.99, 0.99, eps);
        assert!(far > -1.0 && far < -0.9);
        assert!(star_value(0.5 + 1e-3, 0.5, eps) > 0.99);
        assert!(star_value(0.5, 0.5, eps) > 0.99);
        let g = PeriodicGrid::square(0.0, 1.0, 128).unwrap();
        assert!(star_initial(&g, eps).max_abs() < 1.0);
    }

    #[test]
    fn star_tips_and_gaps() {
        let eps = 0.01;
        // tip along θ = 0 at radius 0.35, gap along θ = π/6 at radius 0.15
        assert!(star_value(0.5 + 0.3, 0.5, eps) > 0.9);
        let (c, s) = ((PI / 6.0).cos(), (PI / 6.0).sin());
        assert!(star_value(0.5 + 0.2 * c, 0.5 + 0.2 * s, eps) < -0.9);
    }

    #[test]
    fn dumbbell_values() {
        let eps = 5.0 / (64.0 * 2f64.sqrt() * 0.9f64.atanh());
        assert_eq!(dumbbell_value(1.0, 0.5, eps), 1.0);
        assert!((dumbbell_value(0.3, 0.5, eps) - 1.0).abs() < 2e-3);
        assert!((dumbbell_value(0.05, 0.05, eps) + 1.0).abs() < 1e-3);
    }

    #[test]
    fn torus_values() {
        let eps = 5.0 / (64.0 * 2f64.sqrt() * 0.9f64.atanh());
        assert!(torus_value(0.35, 0.0, 0.005) > 0.9);
        assert!(torus_value(0.0, 0.0, eps) < -0.99);
        assert!(torus_value(0.9, 0.9, eps) < -0.99);
    }

    #[test]
    fn shape_data_within_unit_bound() {
        for p in [ProblemSpec::star(), ProblemSpec::dumbbell(), ProblemSpec::torus()] {
            let g = p.grid(128, 128).unwrap();
            let u0 = p.initial(&g).unwrap();
            assert!(u0.max_abs() <= 1.0 + 1e-12, "{:?}", p.kind);
        }
    }

    #[test]
    fn presets() {
        let p = ProblemSpec::example1();
        assert_eq!((p.kappa, p.final_time, p.x_hi), (0.01, 1.0, 32.0));
        assert_eq!(ProblemSpec::star().kappa, 1e-4);
        assert!(ProblemSpec::preset(ProblemKind::Custom).initial(&p.grid(8, 8).unwrap()).is_err());
        let bad = ProblemSpec { kappa: 0.0, ..ProblemSpec::example1() };
        assert!(bad.validate().is_err());
        for k in ["example1", "star", "dumbbell", "torus", "custom"] {
            assert_eq!(ProblemKind::parse(k).unwrap().name(), k);
        }
    }
}
