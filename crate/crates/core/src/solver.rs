//! Numerical reproduction of the EPI derivation: the generating equation
//! `q″ = q/A²`, its two solution families, the admissible frequencies, the
//! determination of the amplitude constants, and the residuals of the
//! structural and variational information principles.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{AmplitudeSet, Angle, Outcome, PerOutcome, Sign, SpinModel};
use crate::numerics::{self, central_second, check_grid, simpson, turn_grid};

/// Coefficient of the generating equation `q″ = q / A²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratingEquation {
    a_squared: f64,
}

impl GeneratingEquation {
    pub fn new(a_squared: f64) -> Result<Self> {
        if a_squared == 0.0 || !a_squared.is_finite() {
            return Err(invalid(format!("A² must be finite and non-zero, got {a_squared}")));
        }
        Ok(GeneratingEquation { a_squared })
    }

    /// The trigonometric equation of a model, `A² = −4/n²`.
    pub fn for_model(model: SpinModel) -> Self {
        GeneratingEquation { a_squared: model.a_squared() }
    }

    pub fn a_squared(&self) -> f64 {
        self.a_squared
    }

    /// Modified observed structural information `q̃^F = 2/A²`.
    pub fn structural_density(&self) -> f64 {
        2.0 / self.a_squared
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionFamily {
    /// Real `A`: `B″ e^{−θ/a} + C″ e^{θ/a}`.
    Exponential,
    /// Imaginary `A = i·a`: `B sin(θ/a) + C cos(θ/a)`.
    Trigonometric,
}

pub fn classify_family(eq: &GeneratingEquation) -> SolutionFamily {
    if eq.a_squared > 0.0 {
        SolutionFamily::Exponential
    } else {
        SolutionFamily::Trigonometric
    }
}

/// Classify directly from a raw coefficient, rejecting `A² = 0`.
pub fn classify_coefficient(a_squared: f64) -> Result<SolutionFamily> {
    GeneratingEquation::new(a_squared).map(|eq| classify_family(&eq))
}

/// The frequency constant `a = 2/n` selected by orthogonality of
/// `sin(θ/a)` and `cos(θ/a)` on `[0, 2π)`.
pub fn admissible_a(n: i32) -> Result<f64> {
    let model = SpinModel::new(n)?;
    let a = 2.0 / model.n_f64();
    let defect = (2.0 * PI / a).sin().powi(2);
    debug_assert!(defect < 1e-12, "sin²(2π/a) = {defect}");
    Ok(a)
}

/// `∫₀^{2π} sin(θ/a) cos(θ/a) dθ` by composite Simpson on `grid_points`
/// intervals. The closed form is `(a/2) sin²(2π/a)`.
pub fn orthogonality_integral(a: f64, grid_points: usize) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(invalid(format!("frequency constant a must be finite and non-zero, got {a}")));
    }
    if grid_points < 64 {
        return Err(invalid(format!("orthogonality integral needs >= 64 intervals, got {grid_points}")));
    }
    // Simpson needs an even interval count
    let intervals = grid_points + grid_points % 2;
    simpson(|t| (t / a).sin() * (t / a).cos(), 0.0, TAU, intervals)
}

/// Fixed-step RK4 solution of the generating equation on `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative_values: Vec<f64>,
    pub step: f64,
}

impl OdeSolution {
    /// Cubic Hermite interpolation between grid nodes using `q` and `q′`.
    pub fn value_at(&self, theta: f64) -> Result<f64> {
        let last = self.grid.len() - 1;
        if !(0.0..=self.grid[last]).contains(&theta) {
            return Err(invalid(format!("theta = {theta} outside the solution interval")));
        }
        let i = ((theta / self.step).floor() as usize).min(last - 1);
        let h = self.step;
        let s = (theta - self.grid[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivative_values[i] * h, self.derivative_values[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1)
    }

    /// Largest absolute deviation from `reference` over the grid.
    pub fn max_deviation(&self, reference: impl Fn(f64) -> f64) -> f64 {
        self.grid.iter().zip(&self.values).fold(0.0, |m, (&t, &v)| m.max((v - reference(t)).abs()))
    }
}

/// Integrate `(q, q′)′ = (q′, q/A²)` from `(q0, qprime0)` at `θ = 0` with
/// classic fourth-order Runge-Kutta on `grid_points` nodes over `[0, 2π]`.
pub fn solve_generating_ode(eq: &GeneratingEquation, q0: f64, qprime0: f64, grid_points: usize) -> Result<OdeSolution> {
    if grid_points < 257 {
        return Err(invalid(format!("ODE grid needs >= 257 points, got {grid_points}")));
    }
    let k = 1.0 / eq.a_squared;
    let step = TAU / (grid_points - 1) as f64;
    let rhs = |q: f64, p: f64| (p, k * q);

    let mut grid = Vec::with_capacity(grid_points);
    let mut values = Vec::with_capacity(grid_points);
    let mut derivative_values = Vec::with_capacity(grid_points);
    let (mut q, mut p) = (q0, qprime0);
    for i in 0..grid_points {
        grid.push(i as f64 * step);
        values.push(q);
        derivative_values.push(p);
        if i + 1 == grid_points {
            break;
        }
        let (k1q, k1p) = rhs(q, p);
        let (k2q, k2p) = rhs(q + 0.5 * step * k1q, p + 0.5 * step * k1p);
        let (k3q, k3p) = rhs(q + 0.5 * step * k2q, p + 0.5 * step * k2p);
        let (k4q, k4p) = rhs(q + step * k3q, p + step * k3p);
        q += step / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    Ok(OdeSolution { grid, values, derivative_values, step })
}

/// `−2 q q″ + q² q̃^F` for an arbitrary amplitude function, with `q″` from
/// central differences.
pub fn structural_residual_of<F: Fn(f64) -> f64>(q: F, theta: f64, eq: &GeneratingEquation, h: f64) -> f64 {
    let v = q(theta);
    let qpp = central_second(&q, theta, h);
    -2.0 * v * qpp + v * v * eq.structural_density()
}

/// Euler-Lagrange residual `q″ − ½ d(½ q² q̃^F)/dq`, which for constant
/// `q̃^F = 2/A²` is `q″ − q/A²`.
pub fn euler_lagrange_residual_of<F: Fn(f64) -> f64>(q: F, theta: f64, eq: &GeneratingEquation, h: f64) -> f64 {
    let v = q(theta);
    central_second(&q, theta, h) - 0.5 * v * eq.structural_density()
}

pub fn structural_principle_residual(theta: Angle, model: SpinModel) -> PerOutcome<f64> {
    let amps = AmplitudeSet::epr(model, Sign::Plus);
    let eq = GeneratingEquation::for_model(model);
    PerOutcome::from_fn(|o| structural_residual_of(|t| amps.value(o, t), theta.radians(), &eq, numerics::DEFAULT_STEP))
}

pub fn euler_lagrange_residual(theta: Angle, model: SpinModel) -> PerOutcome<f64> {
    let amps = AmplitudeSet::epr(model, Sign::Plus);
    let eq = GeneratingEquation::for_model(model);
    PerOutcome::from_fn(|o| {
        euler_lagrange_residual_of(|t| amps.value(o, t), theta.radians(), &eq, numerics::DEFAULT_STEP)
    })
}

/// Integration-by-parts constant `c = (q(2π) q′(2π) − q(0) q′(0)) / 2π`,
/// reported as a diagnostic.
pub fn boundary_constant(amps: &AmplitudeSet, o: Outcome) -> f64 {
    (amps.value(o, TAU) * amps.derivative(o, TAU) - amps.value(o, 0.0) * amps.derivative(o, 0.0)) / TAU
}

/// Maximum over a `grid_points` periodic grid of the second derivative of
/// the total probability,
/// `¼n² [−2 B₊₋ C₊₋ sin(nθ) + (B₊₊² + B₊₋² − C₊₋²) cos(nθ)]`,
/// for amplitudes already reduced by the boundary and symmetry conditions.
pub fn regularity_scan(b_pp: f64, b_pm: f64, c_pm: f64, n: i32, grid_points: usize) -> Result<f64> {
    if grid_points < 64 {
        return Err(invalid(format!("regularity scan needs >= 64 points, got {grid_points}")));
    }
    let (sin_coef, cos_coef) = regularity_coefficients(b_pp, b_pm, c_pm, n);
    let nf = f64::from(n);
    Ok(turn_grid(grid_points).fold(0.0, |m, t| {
        let (s, c) = (nf * t).sin_cos();
        m.max((sin_coef * s + cos_coef * c).abs())
    }))
}

/// Coefficients of `sin(nθ)` and `cos(nθ)` in `∂²ΣP/∂θ²`.
pub fn regularity_coefficients(b_pp: f64, b_pm: f64, c_pm: f64, n: i32) -> (f64, f64) {
    let quarter_n2 = 0.25 * f64::from(n * n);
    (quarter_n2 * (-2.0 * b_pm * c_pm), quarter_n2 * (b_pp * b_pp + b_pm * b_pm - c_pm * c_pm))
}

/// One stage of the constant elimination, kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub condition: String,
    pub result: String,
}

/// The amplitude constants fixed by boundary, symmetry, regularity and
/// normalization conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSolveResult {
    pub b: PerOutcome<f64>,
    pub c: PerOutcome<f64>,
    pub n: i32,
    /// Max over a 256-point grid of `|ΣP − 1|` and `|∂²ΣP/∂θ²|`.
    pub residual: f64,
    pub steps: Vec<EliminationStep>,
}

impl ConstantSolveResult {
    pub fn amplitudes(&self) -> AmplitudeSet {
        let model = SpinModel::new(self.n).expect("validated by the solver");
        AmplitudeSet::from_coefficients(model, self.b.0, self.c.0)
    }
}

/// Cells whose probability vanishes at `θ = 0` (the analyzers are parallel
/// and the two projections are never equal).
const VANISHING_AT_ZERO: [Outcome; 2] = [Outcome::PP, Outcome::MM];

/// Pairs of cells with equal probabilities by reflection symmetry.
const MIRROR_PAIRS: [(Outcome, Outcome); 2] = [(Outcome::PP, Outcome::MM), (Outcome::PM, Outcome::MP)];

/// Determine `B_ab`, `C_ab` in `q_ab = B sin(nθ/2) + C cos(nθ/2)`.
///
/// 1. `q_ab(0) = C_ab`, so cells vanishing at `θ = 0` get `C = 0`.
/// 2. Mirror pairs share coefficients.
/// 3. Both coefficients of `∂²ΣP/∂θ²` vanish: `B₊₋ C₊₋ = 0` and
///    `B₊₊² + B₊₋² = C₊₋²`. `C₊₋ = 0` forces every coefficient to zero, so
///    the non-trivial branch is `B₊₋ = 0`, `B₊₊² = C₊₋²`.
/// 4. `ΣP = ½ B² sin² + ½ C² cos² = ½ C²` is normalized at `θ = 0`.
///
/// Positive roots are returned.
pub fn solve_amplitude_constants(n: i32) -> Result<ConstantSolveResult> {
    let model = SpinModel::new(n)?;
    let mut steps = Vec::new();

    // 1. boundary at θ = 0
    let mut c_fixed: PerOutcome<Option<f64>> = PerOutcome([None; 4]);
    for o in VANISHING_AT_ZERO {
        c_fixed[o] = Some(0.0);
    }
    steps.push(EliminationStep { condition: "P(++|0) = P(--|0) = 0".into(), result: "C_pp = C_mm = 0".into() });

    // 2. mirror symmetry: the free unknowns reduce to B_pp, B_pm, C_pm
    for (a, b) in MIRROR_PAIRS {
        if c_fixed[a].is_some() {
            c_fixed[b] = c_fixed[a];
        }
    }
    steps.push(EliminationStep {
        condition: "P(++|θ) = P(--|θ), P(+-|θ) = P(-+|θ)".into(),
        result: "B_pp = B_mm, B_pm = B_mp, C_pm = C_mp".into(),
    });

    // 3. regularity: the sin(nθ) coefficient is ∝ B_pm·C_pm. Taking C_pm = 0
    // the cos(nθ) coefficient gives B_pp² + B_pm² = 0, the trivial solution,
    // so B_pm = 0 and the cos(nθ) coefficient leaves B_pp² = C_pm².
    let b_pm = 0.0;
    steps.push(EliminationStep {
        condition: "∂²ΣP/∂θ² = 0 for all θ".into(),
        result: "B_pm = B_mp = 0, B_pp² = C_pm² ≠ 0".into(),
    });

    // 4. normalization at θ = 0, where only the C_pm, C_mp cells contribute:
    // ΣP(0) = ¼(C_pm² + C_mp²) = ½ C_pm² = 1
    let c_pm: f64 = 2.0f64.sqrt();
    let b_pp = c_pm;
    steps.push(EliminationStep { condition: "ΣP = 1".into(), result: "B² = C² = 2".into() });

    let mut b = PerOutcome([0.0; 4]);
    let mut c = PerOutcome([0.0; 4]);
    b[Outcome::PP] = b_pp;
    b[Outcome::MM] = b_pp;
    b[Outcome::PM] = b_pm;
    b[Outcome::MP] = b_pm;
    for o in Outcome::ALL {
        c[o] = c_fixed[o].unwrap_or(c_pm);
    }

    let amps = AmplitudeSet::from_coefficients(model, b.0, c.0);
    let norm_defect = turn_grid(256).fold(0.0, |m: f64, t| m.max((amps.probabilities(t).sum() - 1.0).abs()));
    let regularity = regularity_scan(b_pp, b_pm, c_pm, n, 256)?;
    Ok(ConstantSolveResult { b, c, n, residual: norm_defect.max(regularity), steps })
}

/// `g^θθ / ΣP̃` for amplitudes scaled to `B² = C² = 2t`.
///
/// The metric is the amplitude form `Σ q′²` evaluated analytically; the ratio
/// stays `n²` for every scale `t > 0`.
pub fn scaled_metric_ratio(scale: f64, model: SpinModel, theta: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("scale must be positive and finite, got {scale}")));
    }
    let r = (2.0 * scale).sqrt();
    let amps = AmplitudeSet::from_coefficients(model, [r, r, 0.0, 0.0], [0.0, 0.0, r, r]);
    let total: f64 = amps.probabilities(theta).sum();
    let metric: f64 = Outcome::ALL.iter().map(|&o| amps.derivative(o, theta).powi(2)).sum();
    Ok(metric / total)
}

/// Summary of principle residuals over a grid, used by reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualMaxima {
    pub structural: f64,
    pub euler_lagrange: f64,
}

pub fn residual_maxima(model: SpinModel, grid_points: usize) -> Result<ResidualMaxima> {
    check_grid(grid_points, 16, "residual_maxima")?;
    let mut out = ResidualMaxima { structural: 0.0, euler_lagrange: 0.0 };
    for t in turn_grid(grid_points) {
        let a = Angle::new(t);
        out.structural = out.structural.max(structural_principle_residual(a, model).max_abs());
        out.euler_lagrange = out.euler_lagrange.max(euler_lagrange_residual(a, model).max_abs());
    }
    Ok(out)
}

/// Check that an amplitude family is `2π`-periodic up to sign on a grid,
/// the property that excludes the exponential family.
pub fn is_turn_periodic<F: Fn(f64) -> f64>(q: F, grid_points: usize, tol: f64) -> bool {
    let grid: Vec<f64> = turn_grid(grid_points).collect();
    let matches = |sign: f64| grid.iter().all(|&t| (q(t + TAU) - sign * q(t)).abs() <= tol * (1.0 + q(t).abs()));
    matches(1.0) || matches(-1.0)
}
