//! Quadrature and finite-difference kernels shared by the model and solver.

use std::f64::consts::TAU;

use crate::error::{invalid, Result};

/// Default number of nodes for periodic quadrature over `[0, 2π)`.
pub const DEFAULT_GRID: usize = 512;

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Composite trapezoid rule for a `period`-periodic integrand on `points`
/// equispaced nodes `k·period/points`, `k = 0..points`.
///
/// For smooth periodic integrands this converges spectrally; trigonometric
/// polynomials of degree below `points` are integrated exactly.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, period: f64, points: usize) -> f64 {
    let h = period / points as f64;
    let sum: f64 = (0..points).map(|k| f(k as f64 * h)).sum();
    sum * h
}

/// Periodic trapezoid over one full turn `[0, 2π)`.
pub fn integrate_turn<F: Fn(f64) -> f64>(f: F, points: usize) -> f64 {
    periodic_trapezoid(f, TAU, points)
}

/// Equispaced nodes `k·2π/points` covering `[0, 2π)`.
pub fn turn_grid(points: usize) -> impl Iterator<Item = f64> {
    let h = TAU / points as f64;
    (0..points).map(move |k| k as f64 * h)
}

/// Composite Simpson rule on `[a, b]` with an even number of `intervals`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> Result<f64> {
    if intervals < 2 || intervals % 2 != 0 {
        return Err(invalid(format!("simpson rule needs an even number of intervals >= 2, got {intervals}")));
    }
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    Ok(acc * h / 3.0)
}

/// Central first difference `(f(x+h) − f(x−h)) / 2h`.
#[inline]
pub fn central_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference `(f(x+h) − 2f(x) + f(x−h)) / h²`.
#[inline]
pub fn central_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

pub(crate) fn check_grid(points: usize, min: usize, what: &str) -> Result<()> {
    if points < min || points % 2 != 0 {
        return Err(invalid(format!("{what} needs an even grid of at least {min} points, got {points}")));
    }
    Ok(())
}

pub(crate) fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(invalid(format!("finite-difference step must lie in (0, 1e-3], got {h}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trapezoid_is_exact_on_trig_polynomials() {
        let v = integrate_turn(|t| (3.0 * t).sin().powi(2) + (t).cos(), 16);
        assert_abs_diff_eq!(v, std::f64::consts::PI, epsilon = 1e-13);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 2).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-14);
        assert!(simpson(|x| x, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn central_differences_of_sine() {
        assert_abs_diff_eq!(central_first(f64::sin, 0.4, 1e-4), 0.4f64.cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(central_second(f64::sin, 0.4, 1e-4), -(0.4f64.sin()), epsilon = 1e-6);
    }

    #[test]
    fn grid_and_step_validation() {
        assert!(check_grid(15, 16, "x").is_err());
        assert!(check_grid(17, 16, "x").is_err());
        assert!(check_grid(16, 16, "x").is_ok());
        assert!(check_step(0.0).is_err());
        assert!(check_step(2e-3).is_err());
        assert!(check_step(1e-4).is_ok());
    }
}
