//! Estimating the analyzer angle from an outer sample of `M` joint
//! spin-projection draws.
//!
//! Each cell probability inverts to an angle on the principal branch
//! `[0, π/|n|]`:
//!
//! ```text
//! θ̂_±± = (2/|n|) arcsin √(2 λ̂)        θ̂_±∓ = (2/|n|) arccos √(2 λ̂)
//! ```
//!
//! The pooled maximum-likelihood estimator uses both sine cells at once,
//! `θ̂ = (2/|n|) arcsin √((k₊₊ + k₋₋)/M)`, and attains the lower Rao-Cramér
//! bound `1/(M n²)` asymptotically. The reflection `θ ↔ 2π/|n| − θ` leaves
//! every cell probability unchanged, so angles beyond the branch are not
//! identifiable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, EpiError, Result};
use crate::model::{joint_distribution, Angle, Outcome, PerOutcome, SpinModel};
use crate::rng::{derive_seed, CounterRng};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Counts of the four outcomes in `M` independent draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterSample {
    pub counts: PerOutcome<u64>,
    pub m: u64,
    pub seed: u64,
    pub theta_true: Angle,
    pub model: SpinModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub lambda_hat: PerOutcome<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    CellPp,
    CellMm,
    CellPm,
    CellMp,
    PooledMle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::CellPp,
        EstimatorKind::CellMm,
        EstimatorKind::CellPm,
        EstimatorKind::CellMp,
        EstimatorKind::PooledMle,
    ];

    pub fn cell(self) -> Option<Outcome> {
        match self {
            EstimatorKind::CellPp => Some(Outcome::PP),
            EstimatorKind::CellMm => Some(Outcome::MM),
            EstimatorKind::CellPm => Some(Outcome::PM),
            EstimatorKind::CellMp => Some(Outcome::MP),
            EstimatorKind::PooledMle => None,
        }
    }

    pub fn for_cell(o: Outcome) -> Self {
        match o {
            Outcome::PP => EstimatorKind::CellPp,
            Outcome::MM => EstimatorKind::CellMm,
            Outcome::PM => EstimatorKind::CellPm,
            Outcome::MP => EstimatorKind::CellMp,
        }
    }
}

/// Point estimate with a normal-approximation interval.
///
/// `std_error` and the interval are `None` when the estimate sits on a branch
/// endpoint, where the delta-method variance of a single-cell estimator
/// diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub theta_hat: f64,
    pub estimator_kind: EstimatorKind,
    pub std_error: Option<f64>,
    pub lrcb: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Draw `m` categorical outcomes from `P(·|θ)`.
///
/// Draw `i` uses the uniform `block(seed, i)` and picks the first cell whose
/// cumulative probability (in `++, −−, +−, −+` order) exceeds it.
pub fn sample(theta: Angle, model: SpinModel, m: u64, seed: u64) -> Result<OuterSample> {
    if m < 1 {
        return Err(invalid("sample size M must be at least 1"));
    }
    Ok(OuterSample { counts: draw_counts(theta, model, m, seed), m, seed, theta_true: theta, model })
}

fn draw_counts(theta: Angle, model: SpinModel, m: u64, seed: u64) -> PerOutcome<u64> {
    let p = joint_distribution(theta, model).as_array();
    let c0 = p[0];
    let c1 = c0 + p[1];
    let c2 = c1 + p[2];
    let mut rng = CounterRng::new(seed);
    let mut counts = [0u64; 4];
    for _ in 0..m {
        let u = rng.next_f64();
        let cell = if u < c0 {
            0
        } else if u < c1 {
            1
        } else if u < c2 {
            2
        } else {
            3
        };
        counts[cell] += 1;
    }
    PerOutcome(counts)
}

pub fn frequencies(sample: &OuterSample) -> FrequencyVector {
    let m = sample.m as f64;
    FrequencyVector { lambda_hat: sample.counts.map(|k| k as f64 / m) }
}

fn branch_scale(model: SpinModel) -> f64 {
    2.0 / f64::from(model.n().abs())
}

/// Single-cell estimator on the principal branch; `2λ̂` is clamped to `[0, 1]`.
pub fn estimate_cell(freq: &FrequencyVector, cell: Outcome, model: SpinModel) -> f64 {
    invert_cell(freq.lambda_hat[cell], cell, model)
}

fn invert_cell(lambda: f64, cell: Outcome, model: SpinModel) -> f64 {
    let root = (2.0 * lambda).clamp(0.0, 1.0).sqrt();
    let angle = if cell.is_aligned() { root.asin() } else { root.acos() };
    branch_scale(model) * angle
}

fn mle_from_counts(counts: &PerOutcome<u64>, m: u64, model: SpinModel) -> f64 {
    let aligned = counts[Outcome::PP] + counts[Outcome::MM];
    let frac = (aligned as f64 / m as f64).clamp(0.0, 1.0);
    branch_scale(model) * frac.sqrt().asin()
}

/// Pooled maximum-likelihood estimate. The log-likelihood
/// `u ln sin²(nθ/2) + v ln cos²(nθ/2)` with `u = k₊₊ + k₋₋`, `v = M − u`
/// peaks at `sin²(nθ/2) = u/M`.
pub fn estimate_mle(sample: &OuterSample) -> f64 {
    mle_from_counts(&sample.counts, sample.m, sample.model)
}

fn estimate_from_counts(counts: &PerOutcome<u64>, m: u64, model: SpinModel, kind: EstimatorKind) -> f64 {
    match kind.cell() {
        Some(cell) => invert_cell(counts[cell] as f64 / m as f64, cell, model),
        None => mle_from_counts(counts, m, model),
    }
}

/// Lower Rao-Cramér bound `1/(M n²)` in rad².
pub fn lrcb(m: u64, model: SpinModel) -> f64 {
    1.0 / (m as f64 * model.n_squared())
}

fn check_open_branch(theta: Angle, model: SpinModel) -> Result<()> {
    let t = theta.radians();
    let upper = model.branch_upper();
    if t > 0.0 && t < upper {
        Ok(())
    } else {
        Err(EpiError::SingularBranch { theta: t, upper })
    }
}

/// Delta-method variance of a single-cell estimator:
/// `(1 + c²)/(M n² c²)` with `c = cos(nθ/2)` for `++`/`−−`, and the mirror
/// `(1 + s²)/(M n² s²)` with `s = sin(nθ/2)` for `+−`/`−+`.
pub fn delta_variance_cell(theta: Angle, model: SpinModel, m: u64, cell: Outcome) -> Result<f64> {
    check_open_branch(theta, model)?;
    if m < 1 {
        return Err(invalid("sample size M must be at least 1"));
    }
    let (s, c) = model.half_angle(theta.radians()).sin_cos();
    let w = if cell.is_aligned() { c * c } else { s * s };
    Ok((1.0 + w) / (m as f64 * model.n_squared() * w))
}

/// Assemble the report for one estimator on one sample.
pub fn estimation_report(sample: &OuterSample, kind: EstimatorKind) -> EstimationReport {
    let model = sample.model;
    let theta_hat = estimate_from_counts(&sample.counts, sample.m, model, kind);
    let bound = lrcb(sample.m, model);
    let variance = match kind.cell() {
        None => Some(bound),
        Some(cell) => delta_variance_cell(Angle::new(theta_hat), model, sample.m, cell).ok(),
    };
    let std_error = variance.map(f64::sqrt);
    EstimationReport {
        theta_hat,
        estimator_kind: kind,
        std_error,
        lrcb: bound,
        ci_low: std_error.map(|se| theta_hat - Z_95 * se),
        ci_high: std_error.map(|se| theta_hat + Z_95 * se),
    }
}

/// Empirical behaviour of an estimator over replicated outer samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub estimator: EstimatorKind,
    pub mean: f64,
    pub bias: f64,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    pub lrcb: f64,
    pub replications: u64,
}

impl ExperimentSummary {
    /// Monte Carlo standard error of the bias, `√(Var/R)`.
    pub fn bias_std_error(&self) -> f64 {
        (self.variance / self.replications as f64).sqrt()
    }

    /// Relative slack `3/√R` applied to variance lower bounds.
    pub fn variance_slack(&self) -> f64 {
        3.0 / (self.replications as f64).sqrt()
    }

    pub fn respects_lrcb(&self) -> bool {
        self.variance >= self.lrcb * (1.0 - self.variance_slack())
    }
}

/// Counts of `replications` outer samples; replication `r` is drawn with
/// `derive_seed(seed, r)`, so the result does not depend on scheduling.
pub fn replicate_counts(
    theta: Angle,
    model: SpinModel,
    m: u64,
    replications: u64,
    seed: u64,
) -> Result<Vec<PerOutcome<u64>>> {
    if m < 1 {
        return Err(invalid("sample size M must be at least 1"));
    }
    Ok((0..replications).into_par_iter().map(|r| draw_counts(theta, model, m, derive_seed(seed, r))).collect())
}

fn summarize(
    counts: &[PerOutcome<u64>],
    theta: Angle,
    model: SpinModel,
    m: u64,
    kind: EstimatorKind,
) -> ExperimentSummary {
    let estimates: Vec<f64> = counts.iter().map(|c| estimate_from_counts(c, m, model, kind)).collect();
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (r - 1.0);
    ExperimentSummary {
        estimator: kind,
        mean,
        bias: mean - theta.radians(),
        variance,
        lrcb: lrcb(m, model),
        replications: counts.len() as u64,
    }
}

fn check_experiment(theta: Angle, model: SpinModel, replications: u64) -> Result<()> {
    if replications < 100 {
        return Err(invalid(format!("need at least 100 replications, got {replications}")));
    }
    check_open_branch(theta, model)
}

/// Bias, variance and LRCB of one estimator over replicated samples.
pub fn unbiasedness_experiment(
    theta: Angle,
    model: SpinModel,
    m: u64,
    replications: u64,
    seed: u64,
    estimator: EstimatorKind,
) -> Result<ExperimentSummary> {
    check_experiment(theta, model, replications)?;
    let counts = replicate_counts(theta, model, m, replications, seed)?;
    Ok(summarize(&counts, theta, model, m, estimator))
}

/// Like [`unbiasedness_experiment`] for every estimator, sharing one set of
/// replicated samples.
pub fn unbiasedness_experiment_all(
    theta: Angle,
    model: SpinModel,
    m: u64,
    replications: u64,
    seed: u64,
) -> Result<Vec<ExperimentSummary>> {
    check_experiment(theta, model, replications)?;
    let counts = replicate_counts(theta, model, m, replications, seed)?;
    Ok(EstimatorKind::ALL.iter().map(|&k| summarize(&counts, theta, model, m, k)).collect())
}

/// Empirical check of `σ²(θ̂) · I_F(θ) ≥ 1/M` for the pooled estimator;
/// for `M = 1` this is the single-draw form `σ² I_F ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcfReport {
    pub sigma2_if: f64,
    pub bound: f64,
    pub holds: bool,
    pub variance: f64,
    pub fisher: f64,
    pub slack: f64,
}

pub fn rcf_inequality_report(
    theta: Angle,
    model: SpinModel,
    m: u64,
    replications: u64,
    seed: u64,
) -> Result<RcfReport> {
    let s = unbiasedness_experiment(theta, model, m, replications, seed, EstimatorKind::PooledMle)?;
    let fisher = model.n_squared();
    let sigma2_if = s.variance * fisher;
    let bound = 1.0 / m as f64;
    let slack = s.variance_slack();
    Ok(RcfReport { sigma2_if, bound, holds: sigma2_if >= bound * (1.0 - slack), variance: s.variance, fisher, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::probability;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn m(n: i32) -> SpinModel {
        SpinModel::new(n).unwrap()
    }

    fn sample_with(counts: [u64; 4], model: SpinModel) -> OuterSample {
        OuterSample { counts: PerOutcome(counts), m: counts.iter().sum(), seed: 0, theta_true: Angle::ZERO, model }
    }

    #[test]
    fn zero_cells_are_never_drawn() {
        for seed in [0, 1, 99] {
            let s = sample(Angle::ZERO, m(1), 1000, seed).unwrap();
            assert_eq!(s.counts[Outcome::PP], 0);
            assert_eq!(s.counts[Outcome::MM], 0);
            assert_eq!(s.counts.0.iter().sum::<u64>(), 1000);
        }
        assert!(sample(Angle::ZERO, m(1), 0, 1).is_err());
    }

    #[test]
    fn uniform_point_frequencies() {
        let s = sample(Angle::new(FRAC_PI_2), m(1), 1_000_000, 42).unwrap();
        for f in frequencies(&s).lambda_hat.0 {
            // binomial sd ≈ 4.3e-4; 0.002 is ≈ 4.6 sigma
            assert!((f - 0.25).abs() < 0.002, "{f}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample(Angle::new(1.0), m(2), 5000, 7).unwrap();
        let b = sample(Angle::new(1.0), m(2), 5000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(Angle::new(1.0), m(2), 5000, 8).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn frequency_examples() {
        let f = frequencies(&sample_with([0, 0, 500, 500], m(1)));
        assert_eq!(f.lambda_hat.0, [0.0, 0.0, 0.5, 0.5]);
        let f = frequencies(&sample_with([250; 4], m(1)));
        assert_eq!(f.lambda_hat.0, [0.25; 4]);
        assert_eq!(f.lambda_hat.sum(), 1.0);
    }

    #[test]
    fn cell_estimator_examples() {
        let f = |pp: f64, pm: f64| FrequencyVector { lambda_hat: PerOutcome([pp, pp, pm, pm]) };
        assert_abs_diff_eq!(estimate_cell(&f(0.5, 0.0), Outcome::PP, m(1)), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(estimate_cell(&f(0.25, 0.25), Outcome::PP, m(1)), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(estimate_cell(&f(0.25, 0.25), Outcome::PM, m(2)), FRAC_PI_4, epsilon = 1e-15);
        // clamping: λ̂ > ½ saturates at the branch endpoint
        assert_eq!(estimate_cell(&f(0.7, 0.0), Outcome::PP, m(1)), PI);
        assert_eq!(estimate_cell(&f(0.0, 0.7), Outcome::PM, m(1)), 0.0);
    }

    #[test]
    fn mle_examples() {
        assert_eq!(estimate_mle(&sample_with([0, 0, 500, 500], m(1))), 0.0);
        assert_abs_diff_eq!(estimate_mle(&sample_with([500, 500, 0, 0], m(1))), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(estimate_mle(&sample_with([250; 4], m(2))), FRAC_PI_4, epsilon = 1e-15);
    }

    // Brute-force maximization of the four-cell log-likelihood on a fine grid.
    fn grid_mle(counts: [u64; 4], model: SpinModel) -> f64 {
        let upper = model.branch_upper();
        let steps = 200_000;
        (1..steps)
            .map(|i| upper * i as f64 / steps as f64)
            .map(|t| {
                let ll: f64 = Outcome::ALL
                    .iter()
                    .map(|&o| counts[o.index()] as f64 * probability(o, Angle::new(t), model).ln())
                    .sum();
                (t, ll)
            })
            .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
            .0
    }

    #[test]
    fn mle_matches_brute_force_likelihood() {
        for (counts, n) in [([250, 250, 250, 250], 2), ([120, 95, 400, 385], 1), ([300, 310, 190, 200], -2)] {
            let model = m(n);
            let closed = estimate_mle(&sample_with(counts, model));
            let brute = grid_mle(counts, model);
            assert!((closed - brute).abs() < 2.0 * model.branch_upper() / 200_000.0, "{closed} vs {brute}");
        }
    }

    #[test]
    fn lrcb_examples() {
        assert_eq!(lrcb(1, m(1)), 1.0);
        assert_eq!(lrcb(100, m(2)), 0.0025);
        assert_eq!(lrcb(4, m(2)), lrcb(16, m(1)));
    }

    #[test]
    fn delta_variance_examples() {
        let mm = 10_000;
        let v = delta_variance_cell(Angle::new(FRAC_PI_2), m(1), mm, Outcome::PP).unwrap();
        assert_abs_diff_eq!(v, 3.0 / mm as f64, epsilon = 1e-15);
        let v = delta_variance_cell(Angle::new(FRAC_PI_2), m(1), mm, Outcome::PM).unwrap();
        assert_abs_diff_eq!(v, 3.0 / mm as f64, epsilon = 1e-15);
        assert!(matches!(
            delta_variance_cell(Angle::ZERO, m(1), mm, Outcome::PP),
            Err(EpiError::SingularBranch { .. })
        ));
        assert!(delta_variance_cell(Angle::new(PI), m(1), mm, Outcome::PP).is_err());
        assert!(delta_variance_cell(Angle::new(2.0), m(2), mm, Outcome::PP).is_err());
    }

    #[test]
    fn estimation_report_interval_contains_estimate() {
        let s = sample(Angle::new(1.0), m(1), 10_000, 7).unwrap();
        for kind in EstimatorKind::ALL {
            let r = estimation_report(&s, kind);
            assert_eq!(r.lrcb, 1e-4);
            let (lo, hi) = (r.ci_low.unwrap(), r.ci_high.unwrap());
            assert!(lo <= r.theta_hat && r.theta_hat <= hi);
            assert!(r.theta_hat >= 0.0 && r.theta_hat <= PI);
        }
        let edge = estimation_report(&sample_with([0, 0, 500, 500], m(1)), EstimatorKind::CellPp);
        assert_eq!(edge.theta_hat, 0.0);
        assert_eq!(edge.std_error, None);
    }

    #[test]
    fn replication_is_schedule_independent() {
        let par = replicate_counts(Angle::new(0.8), m(1), 200, 64, 11).unwrap();
        let seq: Vec<_> = (0..64).map(|r| draw_counts(Angle::new(0.8), m(1), 200, derive_seed(11, r))).collect();
        assert_eq!(par, seq);
        let rev: Vec<_> = (0..64).rev().map(|r| draw_counts(Angle::new(0.8), m(1), 200, derive_seed(11, r))).collect();
        assert!(rev.iter().rev().eq(par.iter()));
    }

    #[test]
    fn frequencies_are_unbiased() {
        let (theta, model, mm, reps) = (Angle::new(1.0), m(1), 500u64, 2000u64);
        let counts = replicate_counts(theta, model, mm, reps, 3).unwrap();
        for o in Outcome::ALL {
            let lambda = probability(o, theta, model);
            let mean = counts.iter().map(|c| c[o] as f64 / mm as f64).sum::<f64>() / reps as f64;
            let tol = 4.0 * (lambda * (1.0 - lambda) / (mm * reps) as f64).sqrt();
            assert!((mean - lambda).abs() < tol, "{o}: {mean} vs {lambda}");
        }
    }

    #[test]
    fn experiment_preconditions() {
        assert!(unbiasedness_experiment(Angle::new(1.0), m(1), 100, 50, 1, EstimatorKind::PooledMle).is_err());
        assert!(matches!(rcf_inequality_report(Angle::ZERO, m(1), 100, 1000, 1), Err(EpiError::SingularBranch { .. })));
    }

    #[test]
    fn ordering_of_variances() {
        let all = unbiasedness_experiment_all(Angle::new(1.0), m(1), 2000, 2000, 5).unwrap();
        let mle = all.iter().find(|s| s.estimator == EstimatorKind::PooledMle).unwrap();
        assert!(mle.respects_lrcb());
        for s in all.iter().filter(|s| s.estimator != EstimatorKind::PooledMle) {
            assert!(s.variance >= mle.variance, "{s:?}");
        }
    }

    #[test]
    fn rcf_at_moderate_sample() {
        let r = rcf_inequality_report(Angle::new(1.0), m(1), 100, 10_000, 9).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.bound, 0.01);
    }

    proptest! {
        #[test]
        fn exact_probabilities_invert_on_branch(frac in 0.01f64..0.99, idx in 0usize..4) {
            let model = SpinModel::ALL[idx];
            let theta = frac * model.branch_upper();
            let d = joint_distribution(Angle::new(theta), model);
            let freq = FrequencyVector { lambda_hat: d.p };
            for o in Outcome::ALL {
                let got = estimate_cell(&freq, o, model);
                prop_assert!((got - theta).abs() < 1e-12, "{o}: {got} vs {theta}");
            }
        }

        #[test]
        fn clamped_estimates_are_finite(lambda in 0.0f64..1.0, idx in 0usize..4, o in 0usize..4) {
            let model = SpinModel::ALL[idx];
            let o = Outcome::ALL[o];
            let freq = FrequencyVector { lambda_hat: PerOutcome([lambda; 4]) };
            let v = estimate_cell(&freq, o, model);
            prop_assert!(v.is_finite() && v >= 0.0 && v <= model.branch_upper() + 1e-15);
        }

        #[test]
        fn delta_variance_dominates_lrcb(frac in 0.01f64..0.99, idx in 0usize..4, o in 0usize..4, mm in 1u64..100_000) {
            let model = SpinModel::ALL[idx];
            let theta = Angle::new(frac * model.branch_upper());
            let v = delta_variance_cell(theta, model, mm, Outcome::ALL[o]).unwrap();
            prop_assert!(v >= lrcb(mm, model));
        }
    }
}
