//! Closed-form EPR-Bohm model: joint spin-projection probabilities, their
//! real amplitudes, the three forms of the Fisher information, channel
//! capacities and the averaged (marginal) quantities.
//!
//! With a common quantum number `n` for all four cells,
//!
//! | cell   | amplitude `q(θ)`      | probability `P(θ) = q²/4` |
//! |--------|-----------------------|---------------------------|
//! | `++`   | `√2 sin(nθ/2)`        | `½ sin²(nθ/2)`            |
//! | `−−`   | `√2 sin(nθ/2)`        | `½ sin²(nθ/2)`            |
//! | `+−`   | `√2 cos(nθ/2)`        | `½ cos²(nθ/2)`            |
//! | `−+`   | `√2 cos(nθ/2)`        | `½ cos²(nθ/2)`            |
//!
//! The Fisher information of this family is the constant `n²`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};
use crate::numerics::{self, central_first, central_second, check_grid, check_step};

/// Spin of each particle of the bipartite pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinLabel {
    Half,
    One,
}

/// Polarization handedness, carried by the sign of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Right,
    Left,
}

/// The discrete model selector: the quantum number `n ∈ {±1, ±2}`.
///
/// `|n| = 1` describes spin-½ pairs (two-dimensional representation of the
/// rotation group), `|n| = 2` spin-1 photon pairs. Positive `n` is
/// right-handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct SpinModel {
    n: i32,
}

impl SpinModel {
    pub const ALL: [SpinModel; 4] = [SpinModel { n: 1 }, SpinModel { n: -1 }, SpinModel { n: 2 }, SpinModel { n: -2 }];

    pub fn new(n: i32) -> Result<Self> {
        match n {
            1 | -1 | 2 | -2 => Ok(SpinModel { n }),
            other => Err(EpiError::UnsupportedModel(other)),
        }
    }

    pub fn n(self) -> i32 {
        self.n
    }

    pub fn n_f64(self) -> f64 {
        f64::from(self.n)
    }

    /// `n²`, the Fisher information of the model.
    pub fn n_squared(self) -> f64 {
        f64::from(self.n * self.n)
    }

    pub fn spin(self) -> SpinLabel {
        if self.n.abs() == 1 {
            SpinLabel::Half
        } else {
            SpinLabel::One
        }
    }

    pub fn handedness(self) -> Handedness {
        if self.n > 0 {
            Handedness::Right
        } else {
            Handedness::Left
        }
    }

    /// Half-angle argument `nθ/2` of the trigonometric amplitudes.
    #[inline]
    pub fn half_angle(self, theta: f64) -> f64 {
        0.5 * self.n_f64() * theta
    }

    /// The constant `A² = −4/n²` of the trigonometric generating equation.
    pub fn a_squared(self) -> f64 {
        -4.0 / self.n_squared()
    }

    /// Shift `Δ` with `P(++|θ) = P(+−|θ+Δ)`: `π` for spin ½, `π/2` for spin 1.
    pub fn symmetry_shift(self) -> f64 {
        PI / f64::from(self.n.abs())
    }

    /// Upper end of the principal branch `[0, π/|n|]` on which `θ` is
    /// identifiable from `sin²(nθ/2)`.
    pub fn branch_upper(self) -> f64 {
        PI / f64::from(self.n.abs())
    }
}

impl TryFrom<i32> for SpinModel {
    type Error = EpiError;

    fn try_from(n: i32) -> Result<Self> {
        SpinModel::new(n)
    }
}

impl From<SpinModel> for i32 {
    fn from(m: SpinModel) -> i32 {
        m.n
    }
}

/// One of the four joint spin-projection events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "pp")]
    PP,
    #[serde(rename = "mm")]
    MM,
    #[serde(rename = "pm")]
    PM,
    #[serde(rename = "mp")]
    MP,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::PP, Outcome::MM, Outcome::PM, Outcome::MP];

    /// Compact index: `++ → 0`, `−− → 1`, `+− → 2`, `−+ → 3`.
    pub const fn index(self) -> usize {
        match self {
            Outcome::PP => 0,
            Outcome::MM => 1,
            Outcome::PM => 2,
            Outcome::MP => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Outcome> {
        Outcome::ALL.get(i).copied()
    }

    /// Equal projections (`++`, `−−`) carry the `sin` amplitudes.
    pub const fn is_aligned(self) -> bool {
        matches!(self, Outcome::PP | Outcome::MM)
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Outcome::PP => "++",
            Outcome::MM => "--",
            Outcome::PM => "+-",
            Outcome::MP => "-+",
        }
    }

    /// Lower-case ASCII key used in reports (`pp`, `mm`, `pm`, `mp`).
    pub const fn key(self) -> &'static str {
        match self {
            Outcome::PP => "pp",
            Outcome::MM => "mm",
            Outcome::PM => "pm",
            Outcome::MP => "mp",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A value per outcome, indexed by [`Outcome`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerOutcome<T>(pub [T; 4]);

impl<T: Copy> PerOutcome<T> {
    pub fn from_fn(mut f: impl FnMut(Outcome) -> T) -> Self {
        PerOutcome(Outcome::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, T)> + '_ {
        Outcome::ALL.iter().map(move |&o| (o, self.0[o.index()]))
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> PerOutcome<U> {
        PerOutcome(self.0.map(&mut f))
    }
}

impl PerOutcome<f64> {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl<T> Index<Outcome> for PerOutcome<T> {
    type Output = T;

    fn index(&self, o: Outcome) -> &T {
        &self.0[o.index()]
    }
}

impl<T> IndexMut<Outcome> for PerOutcome<T> {
    fn index_mut(&mut self, o: Outcome) -> &mut T {
        &mut self.0[o.index()]
    }
}

/// Angle between the two analyzers, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(theta: f64) -> Self {
        let r = theta.rem_euclid(TAU);
        // rem_euclid can round up to TAU for tiny negative inputs
        Angle(if r >= TAU { 0.0 } else { r })
    }

    pub fn from_degrees(deg: f64) -> Self {
        Angle::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl From<f64> for Angle {
    fn from(theta: f64) -> Self {
        Angle::new(theta)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// The four probabilities `P(S_ab|θ)` on `{++, −−, +−, −+}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p: PerOutcome<f64>,
}

impl JointDistribution {
    pub fn get(&self, o: Outcome) -> f64 {
        self.p[o]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.p.0
    }

    pub fn total(&self) -> f64 {
        self.p.sum()
    }

    /// Marginal of the first particle: `P(S_a = +|θ)` and `P(S_a = −|θ)`.
    pub fn marginal_first(&self) -> [f64; 2] {
        [self.p[Outcome::PP] + self.p[Outcome::PM], self.p[Outcome::MM] + self.p[Outcome::MP]]
    }

    /// Marginal of the second particle: `P(S_b = +|θ)` and `P(S_b = −|θ)`.
    pub fn marginal_second(&self) -> [f64; 2] {
        [self.p[Outcome::PP] + self.p[Outcome::MP], self.p[Outcome::MM] + self.p[Outcome::PM]]
    }
}

/// Overall sign of the amplitudes; probabilities do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Trigonometric amplitudes `q(θ) = B sin(nθ/2) + C cos(nθ/2)` per cell.
///
/// Evaluation takes raw radians (not [`Angle`]) so that the 4π period of the
/// spin-½ amplitudes stays visible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub b: PerOutcome<f64>,
    pub c: PerOutcome<f64>,
    pub model: SpinModel,
}

impl AmplitudeSet {
    /// The EPI solution: `B = ±√2` on `++`/`−−`, `C = ±√2` on `+−`/`−+`.
    pub fn epr(model: SpinModel, sign: Sign) -> Self {
        let s = sign.value() * SQRT_2;
        Self::from_coefficients(model, [s, s, 0.0, 0.0], [0.0, 0.0, s, s])
    }

    pub fn from_coefficients(model: SpinModel, b: [f64; 4], c: [f64; 4]) -> Self {
        AmplitudeSet { b: PerOutcome(b), c: PerOutcome(c), model }
    }

    /// `A² = −4/n²`.
    pub fn a_squared(&self) -> f64 {
        self.model.a_squared()
    }

    pub fn value(&self, o: Outcome, theta: f64) -> f64 {
        let (s, c) = self.model.half_angle(theta).sin_cos();
        self.b[o] * s + self.c[o] * c
    }

    pub fn derivative(&self, o: Outcome, theta: f64) -> f64 {
        let k = 0.5 * self.model.n_f64();
        let (s, c) = self.model.half_angle(theta).sin_cos();
        k * (self.b[o] * c - self.c[o] * s)
    }

    pub fn second_derivative(&self, o: Outcome, theta: f64) -> f64 {
        let k = 0.5 * self.model.n_f64();
        -k * k * self.value(o, theta)
    }

    pub fn values(&self, theta: f64) -> PerOutcome<f64> {
        PerOutcome::from_fn(|o| self.value(o, theta))
    }

    /// `P = q²/4` per cell; sums to one only for normalized coefficients.
    pub fn probabilities(&self, theta: f64) -> PerOutcome<f64> {
        PerOutcome::from_fn(|o| 0.25 * self.value(o, theta).powi(2))
    }
}

/// The information triple `K = I + Q` together with `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationBudget {
    /// Channel capacity.
    pub i: f64,
    /// Structural information.
    pub q: f64,
    /// Physical information.
    pub k: f64,
    pub kappa: f64,
}

/// Which expression of the Fisher information to evaluate numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherForm {
    /// `Σ P · (−∂² ln P/∂θ²)`.
    Analytical,
    /// `Σ (∂P/∂θ)² / P`.
    Metric,
    /// `−Σ q q″`.
    Epi,
}

impl FisherForm {
    pub const ALL: [FisherForm; 3] = [FisherForm::Analytical, FisherForm::Metric, FisherForm::Epi];
}

/// Joint and marginal Fisher information at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Superadditivity {
    pub joint: f64,
    pub marginal_sum: f64,
    pub holds: bool,
}

#[inline]
fn probability_raw(o: Outcome, theta: f64, model: SpinModel) -> f64 {
    // ½sin²(x) = ¼(1 − cos 2x). The double-angle form is exactly zero at the
    // rounded nodes, since cos(fl(π)) rounds to −1.
    let c = (model.n_f64() * theta).cos();
    if o.is_aligned() {
        0.25 * (1.0 - c)
    } else {
        0.25 * (1.0 + c)
    }
}

#[inline]
fn amplitude_raw(o: Outcome, theta: f64, model: SpinModel) -> f64 {
    let x = model.half_angle(theta);
    if o.is_aligned() {
        SQRT_2 * x.sin()
    } else {
        SQRT_2 * x.cos()
    }
}

/// `P(S_ab|θ)`: `½ sin²(nθ/2)` for `++`/`−−`, `½ cos²(nθ/2)` for `+−`/`−+`.
pub fn probability(o: Outcome, theta: Angle, model: SpinModel) -> f64 {
    probability_raw(o, theta.radians(), model)
}

pub fn joint_distribution(theta: Angle, model: SpinModel) -> JointDistribution {
    JointDistribution { p: PerOutcome::from_fn(|o| probability(o, theta, model)) }
}

/// EPI amplitude `±√2 sin(nθ/2)` or `±√2 cos(nθ/2)`; `amplitude² = 4·probability`.
pub fn amplitude(o: Outcome, theta: Angle, model: SpinModel, sign: Sign) -> f64 {
    sign.value() * amplitude_raw(o, theta.radians(), model)
}

/// Single-particle marginal `P(S_b|θ)`, independent of the angle.
pub fn marginal_single(_theta: Angle) -> f64 {
    0.5
}

/// `P(S_ab) = ∫ P(S_ab|θ) dθ/2π` under the flat lack-of-knowledge density.
pub fn averaged_joint(o: Outcome, model: SpinModel, grid_points: usize) -> Result<f64> {
    check_grid(grid_points, 16, "averaged_joint")?;
    Ok(numerics::integrate_turn(|t| probability_raw(o, t, model), grid_points) / TAU)
}

/// Conditional `P(S_a|S_b) = P(S_ab) / P(S_b)` after averaging over θ.
pub fn conditional_given_other(model: SpinModel) -> Result<f64> {
    Ok(averaged_joint(Outcome::PP, model, numerics::DEFAULT_GRID)? / marginal_single(Angle::ZERO))
}

/// `P(S_ab|θ) − P(S_a|θ)·P(S_b|θ)` per cell; the reference product is `¼`.
pub fn dependence_gap(theta: Angle, model: SpinModel) -> PerOutcome<f64> {
    let d = joint_distribution(theta, model);
    let (first, second) = (d.marginal_first(), d.marginal_second());
    PerOutcome::from_fn(|o| {
        let (a, b) = match o {
            Outcome::PP => (0, 0),
            Outcome::MM => (1, 1),
            Outcome::PM => (0, 1),
            Outcome::MP => (1, 0),
        };
        d.get(o) - first[a] * second[b]
    })
}

/// Closed-form Fisher information `n²`.
pub fn fisher_information_closed(model: SpinModel) -> f64 {
    model.n_squared()
}

/// Finite-difference Fisher information at `θ` in the requested form.
///
/// The analytical and metric forms need every cell positive at `θ`.
pub fn fisher_information_numeric(theta: Angle, model: SpinModel, form: FisherForm, h: f64) -> Result<f64> {
    check_step(h)?;
    let t = theta.radians();
    if matches!(form, FisherForm::Analytical | FisherForm::Metric) {
        if let Some(o) = Outcome::ALL.into_iter().find(|&o| probability_raw(o, t, model) <= 0.0) {
            return Err(EpiError::SingularCell { cell: o, theta: t });
        }
    }
    let total = Outcome::ALL
        .into_iter()
        .map(|o| {
            let p = |x: f64| probability_raw(o, x, model);
            match form {
                FisherForm::Analytical => -p(t) * central_second(|x| p(x).ln(), t, h),
                FisherForm::Metric => central_first(p, t, h).powi(2) / p(t),
                FisherForm::Epi => {
                    let q = |x: f64| amplitude_raw(o, x, model);
                    -q(t) * central_second(q, t, h)
                }
            }
        })
        .sum();
    Ok(total)
}

/// Total channel capacity `I = ∫₀^{2π} −Σ q q″ dθ`: `2π` for spin ½, `8π` for spin 1.
pub fn channel_capacity(model: SpinModel, grid_points: usize) -> Result<f64> {
    check_grid(grid_points, 64, "channel_capacity")?;
    let amps = AmplitudeSet::epr(model, Sign::Plus);
    Ok(numerics::integrate_turn(
        |t| -Outcome::ALL.into_iter().map(|o| amps.value(o, t) * amps.second_derivative(o, t)).sum::<f64>(),
        grid_points,
    ))
}

/// `∫₀^{2π} q_ab² dθ`, equal to `2π` for each cell.
pub fn amplitude_norm_integral(o: Outcome, model: SpinModel, grid_points: usize) -> Result<f64> {
    check_grid(grid_points, 64, "amplitude_norm_integral")?;
    Ok(numerics::integrate_turn(|t| amplitude_raw(o, t, model).powi(2), grid_points))
}

/// `I` from the capacity quadrature, `Q = −I`, `K = I + Q`, `κ = 1`.
pub fn information_budget(model: SpinModel) -> InformationBudget {
    let i = channel_capacity(model, numerics::DEFAULT_GRID).expect("default grid satisfies the capacity precondition");
    let q = -i;
    InformationBudget { i, q, k: i + q, kappa: 1.0 }
}

/// `|P(++|θ) − P(+−|θ+Δ)|` with `Δ = π/|n|`.
pub fn shift_symmetry_residual(theta: Angle, model: SpinModel) -> f64 {
    let shifted = Angle::new(theta.radians() + model.symmetry_shift());
    (probability(Outcome::PP, theta, model) - probability(Outcome::PM, shifted, model)).abs()
}

/// Superadditivity `I_F(joint) ≥ I_F(first) + I_F(second)`.
///
/// The marginals are evaluated by central differences of the summed joint
/// cells, so a θ-dependent marginal would show up here.
pub fn superadditivity_check(theta: Angle, model: SpinModel) -> Superadditivity {
    let t = theta.radians();
    let h = numerics::DEFAULT_STEP;
    let dist = |x: f64| JointDistribution { p: PerOutcome::from_fn(|o| probability_raw(o, x, model)) };
    let marginal_fisher = |pick: fn(&JointDistribution) -> [f64; 2]| -> f64 {
        (0..2)
            .map(|k| {
                let m = |x: f64| pick(&dist(x))[k];
                central_first(m, t, h).powi(2) / m(t)
            })
            .sum()
    };
    let joint = fisher_information_closed(model);
    let marginal_sum =
        marginal_fisher(JointDistribution::marginal_first) + marginal_fisher(JointDistribution::marginal_second);
    Superadditivity { joint, marginal_sum, holds: joint >= marginal_sum }
}

/// True when `sin²(nθ/2)` is `0` or `1`, where a cell reaches `½`.
pub fn is_extremal_angle(theta: Angle, model: SpinModel) -> bool {
    let s2 = model.half_angle(theta.radians()).sin().powi(2);
    s2 < 1e-24 || (1.0 - s2).abs() < 1e-15
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn m(n: i32) -> SpinModel {
        SpinModel::new(n).unwrap()
    }

    #[test]
    fn spin_model_labels() {
        assert_eq!(m(1).spin(), SpinLabel::Half);
        assert_eq!(m(-1).handedness(), Handedness::Left);
        assert_eq!(m(-2).spin(), SpinLabel::One);
        assert_eq!(m(2).handedness(), Handedness::Right);
        assert_eq!(SpinModel::new(3), Err(EpiError::UnsupportedModel(3)));
        assert_eq!(SpinModel::new(0), Err(EpiError::UnsupportedModel(0)));
    }

    #[test]
    fn outcome_indices() {
        for (i, o) in Outcome::ALL.iter().enumerate() {
            assert_eq!(o.index(), i);
            assert_eq!(Outcome::from_index(i), Some(*o));
        }
        assert_eq!(Outcome::from_index(4), None);
    }

    #[test]
    fn angle_reduces_mod_turn() {
        assert_abs_diff_eq!(Angle::new(TAU + 0.5).radians(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(Angle::new(-0.5).radians(), TAU - 0.5, epsilon = 1e-15);
        assert_eq!(Angle::new(-1e-300).radians(), 0.0);
        assert!(Angle::new(-1e-17).radians() < TAU);
        assert_abs_diff_eq!(Angle::from_degrees(90.0).radians(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn probability_examples() {
        assert_eq!(probability(Outcome::PP, Angle::ZERO, m(1)), 0.0);
        assert_eq!(probability(Outcome::PM, Angle::ZERO, m(1)), 0.5);
        assert_abs_diff_eq!(probability(Outcome::PP, Angle::new(PI), m(1)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(probability(Outcome::PP, Angle::new(FRAC_PI_2), m(2)), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn boundary_values_are_exact() {
        for n in [1, -1, 2, -2] {
            assert_eq!(probability(Outcome::PP, Angle::ZERO, m(n)), 0.0);
            assert_eq!(probability(Outcome::MM, Angle::ZERO, m(n)), 0.0);
        }
        for n in [1, -1] {
            assert_eq!(probability(Outcome::PM, Angle::new(PI), m(n)), 0.0);
            assert_eq!(probability(Outcome::MP, Angle::new(PI), m(n)), 0.0);
        }
        for n in [2, -2] {
            assert_eq!(probability(Outcome::PM, Angle::new(FRAC_PI_2), m(n)), 0.0);
        }
    }

    #[test]
    fn joint_distribution_examples() {
        assert_eq!(joint_distribution(Angle::ZERO, m(1)).as_array(), [0.0, 0.0, 0.5, 0.5]);
        for (t, n) in [(FRAC_PI_2, 1), (PI / 4.0, 2)] {
            for p in joint_distribution(Angle::new(t), m(n)).as_array() {
                assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn amplitude_examples() {
        assert_abs_diff_eq!(amplitude(Outcome::PP, Angle::new(PI), m(1), Sign::Plus), SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(amplitude(Outcome::PM, Angle::ZERO, m(2), Sign::Plus), SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(amplitude(Outcome::PM, Angle::ZERO, m(2), Sign::Minus), -SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn marginal_and_conditional() {
        assert_eq!(marginal_single(Angle::ZERO), 0.5);
        assert_eq!(marginal_single(Angle::new(1.234)), 0.5);
        for n in [1, 2] {
            assert_abs_diff_eq!(conditional_given_other(m(n)).unwrap(), 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn averaged_joint_examples() {
        assert_abs_diff_eq!(averaged_joint(Outcome::PP, m(1), 256).unwrap(), 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(averaged_joint(Outcome::MP, m(2), 256).unwrap(), 0.25, epsilon = 1e-10);
        let total: f64 = Outcome::ALL.iter().map(|&o| averaged_joint(o, m(-1), 64).unwrap()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(averaged_joint(Outcome::PP, m(1), 8).is_err());
        assert!(averaged_joint(Outcome::PP, m(1), 17).is_err());
    }

    #[test]
    fn dependence_gap_examples() {
        let g = dependence_gap(Angle::ZERO, m(1));
        assert_eq!(g.0, [-0.25, -0.25, 0.25, 0.25]);
        assert!(dependence_gap(Angle::new(FRAC_PI_2), m(1)).max_abs() < 1e-15);
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_information_closed(m(1)), 1.0);
        assert_eq!(fisher_information_closed(m(-2)), 4.0);
        let v = fisher_information_numeric(Angle::new(1.0), m(1), FisherForm::Metric, 1e-4).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
        let v = fisher_information_numeric(Angle::new(0.3), m(2), FisherForm::Epi, 1e-4).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-6);
        let err = fisher_information_numeric(Angle::ZERO, m(1), FisherForm::Metric, 1e-4).unwrap_err();
        assert_eq!(err, EpiError::SingularCell { cell: Outcome::PP, theta: 0.0 });
        // EPI form has no logarithm and stays finite on the boundary
        let v = fisher_information_numeric(Angle::ZERO, m(1), FisherForm::Epi, 1e-4).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
        assert!(fisher_information_numeric(Angle::new(1.0), m(1), FisherForm::Epi, 0.01).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert_abs_diff_eq!(channel_capacity(m(1), 1024).unwrap(), TAU, epsilon = 1e-8);
        assert_abs_diff_eq!(channel_capacity(m(2), 1024).unwrap(), 4.0 * TAU, epsilon = 1e-8);
        assert_abs_diff_eq!(channel_capacity(m(-2), 64).unwrap(), 0.5 * PI * 4.0 * 4.0, epsilon = 1e-8);
        assert!(channel_capacity(m(1), 32).is_err());
        let total: f64 = Outcome::ALL.iter().map(|&o| amplitude_norm_integral(o, m(2), 512).unwrap()).sum();
        assert_abs_diff_eq!(total, 4.0 * TAU, epsilon = 1e-10);
    }

    #[test]
    fn budget_examples() {
        let b = information_budget(m(1));
        assert_abs_diff_eq!(b.i, TAU, epsilon = 1e-8);
        assert_abs_diff_eq!(b.q, -TAU, epsilon = 1e-8);
        assert_abs_diff_eq!(b.k, 0.0, epsilon = 1e-8);
        assert_eq!(b.kappa, 1.0);
        let b = information_budget(m(-2));
        assert_abs_diff_eq!(b.i, 4.0 * TAU, epsilon = 1e-8);
    }

    #[test]
    fn shift_symmetry_examples() {
        assert!(shift_symmetry_residual(Angle::new(0.7), m(1)) < 1e-12);
        assert!(shift_symmetry_residual(Angle::new(2.1), m(2)) < 1e-12);
        for n in [1, -1, 2, -2] {
            assert!(shift_symmetry_residual(Angle::ZERO, m(n)) < 1e-12);
        }
    }

    #[test]
    fn superadditivity_examples() {
        let s = superadditivity_check(Angle::new(1.0), m(1));
        assert_eq!(s.joint, 1.0);
        assert!(s.marginal_sum.abs() < 1e-12);
        assert!(s.holds);
        let s = superadditivity_check(Angle::new(0.2), m(2));
        assert_eq!(s.joint, 4.0);
        assert!(s.marginal_sum.abs() < 1e-12 && s.joint > s.marginal_sum);
    }

    #[test]
    fn amplitude_set_periodicity() {
        for model in SpinModel::ALL {
            let a = AmplitudeSet::epr(model, Sign::Plus);
            let sign = if model.n().abs() == 1 { -1.0 } else { 1.0 };
            for k in 0..64 {
                let t = 0.1 * k as f64;
                for o in Outcome::ALL {
                    assert!((a.value(o, t + TAU) - sign * a.value(o, t)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn extremal_angles() {
        assert!(is_extremal_angle(Angle::ZERO, m(1)));
        assert!(is_extremal_angle(Angle::new(PI), m(1)));
        assert!(!is_extremal_angle(Angle::new(1.0), m(2)));
    }

    proptest! {
        #[test]
        fn normalization_and_range(theta in 0.0..TAU, idx in 0usize..4) {
            let model = SpinModel::ALL[idx];
            let d = joint_distribution(Angle::new(theta), model);
            prop_assert!((d.total() - 1.0).abs() < 1e-12);
            for p in d.as_array() {
                prop_assert!((0.0..=0.5).contains(&p));
            }
        }

        #[test]
        fn amplitude_squares_to_four_probabilities(theta in -20.0..20.0f64, idx in 0usize..4, o in 0usize..4, minus: bool) {
            let model = SpinModel::ALL[idx];
            let o = Outcome::ALL[o];
            let a = Angle::new(theta);
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            let q = amplitude(o, a, model, sign);
            prop_assert!((q * q - 4.0 * probability(o, a, model)).abs() < 1e-14);
        }

        #[test]
        fn three_fisher_forms_agree(theta in 0.0..TAU, idx in 0usize..4) {
            let model = SpinModel::ALL[idx];
            let a = Angle::new(theta);
            let d = joint_distribution(a, model);
            prop_assume!(d.as_array().iter().all(|&p| p > 1e-2));
            let vals: Vec<f64> = FisherForm::ALL
                .iter()
                .map(|&f| fisher_information_numeric(a, model, f, 1e-4).unwrap())
                .collect();
            for v in &vals {
                prop_assert!((v - model.n_squared()).abs() < 1e-6, "{vals:?}");
            }
        }
    }
}
