//! Rao-Fisher geometry of the probability simplex.
//!
//! On the `(ℵ−1)`-simplex the metric is `diag(1/p_j)`. Under `4 p_j = q_j²`
//! the simplex maps onto the sphere `Σ q_j² = 4`, and for a curve `θ ↦ p(θ)`
//! the induced metric has three equal expressions:
//!
//! ```text
//! g_θθ = Σ p (∂ ln p/∂θ)²  =  Σ (∂p/∂θ)² / p  =  Σ (∂q/∂θ)²
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, EpiError, Result};
use crate::model::{AmplitudeSet, Outcome, Sign, SpinModel};
use crate::numerics::{check_step, turn_grid};

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector with at least two components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    p: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(invalid(format!("simplex point needs >= 2 components, got {}", p.len())));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(invalid(format!("component {i} = {v} is not a probability")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid(format!("components sum to {total}, not 1")));
        }
        Ok(SimplexPoint { p })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn dimension(&self) -> usize {
        self.p.len()
    }

    pub fn is_interior(&self) -> bool {
        self.p.iter().all(|&v| v > 0.0)
    }

    fn first_zero(&self) -> Option<usize> {
        self.p.iter().position(|&v| v <= 0.0)
    }
}

/// A point on the amplitude sphere of radius 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePoint {
    q: Vec<f64>,
}

impl AmplitudePoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn squared_radius(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum()
    }

    /// Back to probabilities `p_j = q_j²/4`.
    pub fn to_probabilities(&self) -> Vec<f64> {
        self.q.iter().map(|v| 0.25 * v * v).collect()
    }
}

/// A diagonal metric tensor, stored by its diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMetric {
    pub diagonal: Vec<f64>,
}

impl DiagonalMetric {
    /// `Σ_j g_jj v_j²`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.diagonal.iter().zip(v).map(|(g, x)| g * x * x).sum()
    }
}

/// `diag(1/p_j)` at an interior point.
pub fn simplex_metric(point: &SimplexPoint) -> Result<DiagonalMetric> {
    if let Some(index) = point.first_zero() {
        return Err(EpiError::SimplexBoundary { index });
    }
    Ok(DiagonalMetric { diagonal: point.p.iter().map(|v| 1.0 / v).collect() })
}

/// The metric in the frequency coordinates `λ_k = p_k`:
/// `g_Λ^{kl} = Σ_ij g^{ij} (∂p_i/∂λ_k)(∂p_j/∂λ_l)` with the identity Jacobian.
pub fn metric_on_lambda_space(point: &SimplexPoint) -> Result<DiagonalMetric> {
    let g = simplex_metric(point)?;
    let d = point.dimension();
    let jacobian = |i: usize, k: usize| if i == k { 1.0 } else { 0.0 };
    let mut full = vec![vec![0.0; d]; d];
    for (k, row) in full.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            *entry = (0..d).map(|i| g.diagonal[i] * jacobian(i, k) * jacobian(i, l)).sum();
        }
    }
    debug_assert!(full.iter().enumerate().all(|(k, row)| row.iter().enumerate().all(|(l, v)| k == l || *v == 0.0)));
    Ok(DiagonalMetric { diagonal: (0..d).map(|k| full[k][k]).collect() })
}

/// `q_j = sign_j · 2√p_j`.
pub fn to_amplitudes(point: &SimplexPoint, signs: &[Sign]) -> Result<AmplitudePoint> {
    if signs.len() != point.dimension() {
        return Err(invalid(format!("{} signs supplied for a {}-component point", signs.len(), point.dimension())));
    }
    Ok(AmplitudePoint { q: point.p.iter().zip(signs).map(|(p, s)| s.value() * 2.0 * p.sqrt()).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    ClosedForm,
    FiniteDifference(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricForm {
    /// `Σ p (∂ ln p/∂θ)²`.
    LogForm,
    /// `Σ (∂p/∂θ)² / p`.
    RatioForm,
    /// `Σ (∂q/∂θ)²`.
    AmplitudeForm,
}

impl MetricForm {
    pub const ALL: [MetricForm; 3] = [MetricForm::LogForm, MetricForm::RatioForm, MetricForm::AmplitudeForm];
}

type VectorFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A θ-parametrized curve on the simplex.
///
/// The curve is given by its probabilities, optionally a smooth signed
/// amplitude branch (otherwise `q = 2√p`), and optionally closed-form
/// derivatives of both.
#[derive(Clone)]
pub struct CurveOnSimplex {
    probabilities: VectorFn,
    amplitudes: Option<VectorFn>,
    probability_tangent: Option<VectorFn>,
    amplitude_tangent: Option<VectorFn>,
    pub mode: DerivativeMode,
}

impl std::fmt::Debug for CurveOnSimplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveOnSimplex")
            .field("signed_amplitudes", &self.amplitudes.is_some())
            .field("closed_form", &self.probability_tangent.is_some())
            .field("mode", &self.mode)
            .finish()
    }
}

impl CurveOnSimplex {
    /// A curve known only through its probabilities.
    pub fn from_fn<F>(probabilities: F, mode: DerivativeMode) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        CurveOnSimplex {
            probabilities: Arc::new(probabilities),
            amplitudes: None,
            probability_tangent: None,
            amplitude_tangent: None,
            mode,
        }
    }

    /// Attach closed-form `dp/dθ`.
    pub fn with_tangent<F>(mut self, tangent: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.probability_tangent = Some(Arc::new(tangent));
        self
    }

    /// Attach a smooth signed amplitude branch and, optionally, its derivative.
    pub fn with_amplitudes<F>(mut self, amplitudes: F, tangent: Option<VectorFn>) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.amplitudes = Some(Arc::new(amplitudes));
        self.amplitude_tangent = tangent;
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    /// The EPR-Bohm curve `θ ↦ P(·|θ)` with closed-form derivatives.
    pub fn epr(model: SpinModel, mode: DerivativeMode) -> Self {
        let amps = AmplitudeSet::epr(model, Sign::Plus);
        let cells = move |f: &dyn Fn(Outcome) -> f64| Outcome::ALL.iter().map(|&o| f(o)).collect::<Vec<f64>>();
        CurveOnSimplex::from_fn(move |t| cells(&|o| 0.25 * amps.value(o, t).powi(2)), mode)
            .with_tangent(move |t| cells(&|o| 0.5 * amps.value(o, t) * amps.derivative(o, t)))
            .with_amplitudes(
                move |t| cells(&|o| amps.value(o, t)),
                Some(Arc::new(move |t| cells(&|o| amps.derivative(o, t)))),
            )
    }

    pub fn point(&self, theta: f64) -> Result<SimplexPoint> {
        SimplexPoint::new((self.probabilities)(theta))
    }

    fn amplitudes_at(&self, theta: f64) -> Vec<f64> {
        match &self.amplitudes {
            Some(f) => f(theta),
            None => (self.probabilities)(theta).iter().map(|p| 2.0 * p.max(0.0).sqrt()).collect(),
        }
    }

    fn fd_vector(f: impl Fn(f64) -> Vec<f64>, theta: f64, h: f64) -> Vec<f64> {
        let (up, down) = (f(theta + h), f(theta - h));
        up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }
}

/// The metric induced on the curve at `theta`.
pub fn induced_metric(curve: &CurveOnSimplex, theta: f64, form: MetricForm) -> Result<f64> {
    let p = (curve.probabilities)(theta);
    if form != MetricForm::AmplitudeForm {
        if let Some(index) = p.iter().position(|&v| v <= 0.0) {
            return Err(EpiError::SimplexBoundary { index });
        }
    }
    match (curve.mode, form) {
        (DerivativeMode::FiniteDifference(h), MetricForm::LogForm) => {
            check_step(h)?;
            let log_p = |t: f64| (curve.probabilities)(t).iter().map(|v| v.ln()).collect::<Vec<_>>();
            let score = CurveOnSimplex::fd_vector(log_p, theta, h);
            Ok(p.iter().zip(&score).map(|(p, s)| p * s * s).sum())
        }
        (DerivativeMode::FiniteDifference(h), MetricForm::RatioForm) => {
            check_step(h)?;
            let dp = CurveOnSimplex::fd_vector(|t| (curve.probabilities)(t), theta, h);
            Ok(p.iter().zip(&dp).map(|(p, d)| d * d / p).sum())
        }
        (DerivativeMode::FiniteDifference(h), MetricForm::AmplitudeForm) => {
            check_step(h)?;
            let dq = CurveOnSimplex::fd_vector(|t| curve.amplitudes_at(t), theta, h);
            Ok(dq.iter().map(|d| d * d).sum())
        }
        (DerivativeMode::ClosedForm, MetricForm::LogForm) => {
            let dp = curve.probability_tangent.as_ref().ok_or(EpiError::MissingDerivative)?(theta);
            Ok(p.iter().zip(&dp).map(|(p, d)| p * (d / p).powi(2)).sum())
        }
        (DerivativeMode::ClosedForm, MetricForm::RatioForm) => {
            let dp = curve.probability_tangent.as_ref().ok_or(EpiError::MissingDerivative)?(theta);
            Ok(p.iter().zip(&dp).map(|(p, d)| d * d / p).sum())
        }
        (DerivativeMode::ClosedForm, MetricForm::AmplitudeForm) => {
            let dq = curve.amplitude_tangent.as_ref().ok_or(EpiError::MissingDerivative)?(theta);
            Ok(dq.iter().map(|d| d * d).sum())
        }
    }
}

/// Range of the induced metric over the cell midpoints `(k + ½)·2π/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstancyScan {
    pub min: f64,
    pub max: f64,
}

impl ConstancyScan {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Midpoint grid used by [`metric_constancy_scan`]; it avoids `θ = 0` and
/// every multiple of `π/2` for even `grid_points`.
pub fn scan_grid(grid_points: usize) -> impl Iterator<Item = f64> {
    let half = std::f64::consts::PI / grid_points as f64;
    turn_grid(grid_points).map(move |t| t + half)
}

pub fn metric_constancy_scan(curve: &CurveOnSimplex, grid_points: usize, form: MetricForm) -> Result<ConstancyScan> {
    if grid_points < 2 {
        return Err(invalid("constancy scan needs at least 2 points"));
    }
    let mut scan = ConstancyScan { min: f64::INFINITY, max: f64::NEG_INFINITY };
    for t in scan_grid(grid_points) {
        let g = induced_metric(curve, t, form)?;
        scan.min = scan.min.min(g);
        scan.max = scan.max.max(g);
    }
    Ok(scan)
}

/// `g_Λ^θθ = Σ_kl g_Λ^{kl} (∂p_k/∂θ)(∂p_l/∂θ)` using the curve's closed-form
/// tangent, or central differences when the curve is in finite-difference mode.
pub fn lambda_metric_on_curve(curve: &CurveOnSimplex, theta: f64) -> Result<f64> {
    let point = curve.point(theta)?;
    let g = metric_on_lambda_space(&point)?;
    let dp = match curve.mode {
        DerivativeMode::ClosedForm => curve.probability_tangent.as_ref().ok_or(EpiError::MissingDerivative)?(theta),
        DerivativeMode::FiniteDifference(h) => {
            check_step(h)?;
            CurveOnSimplex::fd_vector(|t| (curve.probabilities)(t), theta, h)
        }
    };
    Ok(g.quadratic_form(&dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn binomial() -> CurveOnSimplex {
        CurveOnSimplex::from_fn(|t: f64| vec![t.sin().powi(2), t.cos().powi(2)], DerivativeMode::FiniteDifference(1e-4))
    }

    #[test]
    fn simplex_point_validation() {
        assert!(SimplexPoint::new(vec![1.0]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.5]).unwrap().is_interior());
    }

    #[test]
    fn metric_examples() {
        let u = SimplexPoint::new(vec![0.25; 4]).unwrap();
        assert_eq!(simplex_metric(&u).unwrap().diagonal, vec![4.0; 4]);
        let h = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(simplex_metric(&h).unwrap().diagonal, vec![2.0, 2.0]);
        let b = SimplexPoint::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(simplex_metric(&b), Err(EpiError::SimplexBoundary { index: 0 }));
        assert_eq!(metric_on_lambda_space(&u).unwrap().diagonal, vec![4.0; 4]);
        assert!(metric_on_lambda_space(&b).is_err());
    }

    #[test]
    fn amplitude_examples() {
        let u = SimplexPoint::new(vec![0.25; 4]).unwrap();
        assert_eq!(to_amplitudes(&u, &[Sign::Plus; 4]).unwrap().as_slice(), &[1.0; 4]);
        let p = SimplexPoint::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let q = to_amplitudes(&p, &[Sign::Plus; 4]).unwrap();
        assert_abs_diff_eq!(q.as_slice()[0], SQRT_2, epsilon = 1e-15);
        assert_eq!(q.as_slice()[1], 0.0);
        assert!(to_amplitudes(&p, &[Sign::Plus; 3]).is_err());
    }

    #[test]
    fn induced_metric_examples() {
        let c1 = CurveOnSimplex::epr(SpinModel::new(1).unwrap(), DerivativeMode::ClosedForm);
        assert_abs_diff_eq!(induced_metric(&c1, 1.0, MetricForm::AmplitudeForm).unwrap(), 1.0, epsilon = 1e-12);
        let c2 = CurveOnSimplex::epr(SpinModel::new(2).unwrap(), DerivativeMode::FiniteDifference(1e-4));
        assert_abs_diff_eq!(induced_metric(&c2, 0.6, MetricForm::RatioForm).unwrap(), 4.0, epsilon = 1e-6);
        // q = (2 sin θ, 2 cos θ) ⇒ Σ q′² = 4
        for form in MetricForm::ALL {
            assert_abs_diff_eq!(induced_metric(&binomial(), FRAC_PI_4, form).unwrap(), 4.0, epsilon = 1e-6);
        }
        assert_eq!(induced_metric(&c1, 0.0, MetricForm::LogForm), Err(EpiError::SimplexBoundary { index: 0 }));
        let bare = binomial().with_mode(DerivativeMode::ClosedForm);
        assert_eq!(induced_metric(&bare, 0.3, MetricForm::RatioForm), Err(EpiError::MissingDerivative));
    }

    #[test]
    fn constancy_scan_examples() {
        for (n, want) in [(1, 1.0), (2, 4.0), (-2, 4.0)] {
            let c = CurveOnSimplex::epr(SpinModel::new(n).unwrap(), DerivativeMode::ClosedForm);
            for form in MetricForm::ALL {
                let s = metric_constancy_scan(&c, 512, form).unwrap();
                assert!(s.spread() < 1e-8, "{form:?}: {s:?}");
                assert_abs_diff_eq!(s.min, want, epsilon = 1e-8);
            }
        }
        let s = metric_constancy_scan(&binomial(), 64, MetricForm::RatioForm).unwrap();
        assert_abs_diff_eq!(s.min, 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.max, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn lambda_metric_matches_curve_metric() {
        for model in SpinModel::ALL {
            let c = CurveOnSimplex::epr(model, DerivativeMode::ClosedForm);
            for t in [0.3, 1.1, 2.9] {
                let g = lambda_metric_on_curve(&c, t).unwrap();
                let direct = induced_metric(&c, t, MetricForm::RatioForm).unwrap();
                assert_abs_diff_eq!(g, direct, epsilon = 1e-10);
                assert_abs_diff_eq!(g, model.n_squared(), epsilon = 1e-10);
            }
        }
    }

    fn interior_point(len: usize) -> impl Strategy<Value = SimplexPoint> {
        prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
            let total: f64 = w.iter().sum();
            let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
            let last = 1.0 - p[..p.len() - 1].iter().sum::<f64>();
            *p.last_mut().unwrap() = last;
            SimplexPoint::new(p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn amplitudes_land_on_radius_two_sphere(point in (2usize..8).prop_flat_map(interior_point), flip in any::<u8>()) {
            let signs: Vec<Sign> = (0..point.dimension())
                .map(|i| if flip >> (i % 8) & 1 == 1 { Sign::Minus } else { Sign::Plus })
                .collect();
            let q = to_amplitudes(&point, &signs).unwrap();
            prop_assert!((q.squared_radius() - 4.0).abs() < 1e-12);
            for (a, b) in q.to_probabilities().iter().zip(point.as_slice()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }

        #[test]
        fn lambda_metric_is_simplex_metric(point in (2usize..8).prop_flat_map(interior_point)) {
            prop_assert_eq!(metric_on_lambda_space(&point).unwrap(), simplex_metric(&point).unwrap());
        }

        #[test]
        fn three_forms_agree_on_interior_curves(theta in 0.2f64..1.3, w in 0.5f64..2.0) {
            // a three-outcome curve bounded away from the boundary
            let curve = CurveOnSimplex::from_fn(
                move |t: f64| {
                    let a = 0.2 + 0.1 * (w * t).sin();
                    let b = 0.3 + 0.1 * (t).cos();
                    vec![a, b, 1.0 - a - b]
                },
                DerivativeMode::FiniteDifference(1e-4),
            );
            let v: Vec<f64> = MetricForm::ALL.iter().map(|&f| induced_metric(&curve, theta, f).unwrap()).collect();
            prop_assert!((v[0] - v[1]).abs() < 1e-6 && (v[1] - v[2]).abs() < 1e-6, "{v:?}");
        }
    }
}
