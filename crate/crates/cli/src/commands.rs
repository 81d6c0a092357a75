use std::fmt;
use std::io;

use epi_core::{
    admissible_a, boundary_constant, classify_family, estimation_report, induced_metric, information_budget,
    joint_distribution, metric_constancy_scan, residual_maxima, sample, scan_grid, solve_amplitude_constants,
    unbiasedness_experiment_all, Angle, ConstantSolveResult, CurveOnSimplex, DerivativeMode, EpiError,
    EstimationReport, EstimatorKind, ExperimentSummary, GeneratingEquation, InformationBudget, MetricForm, Outcome,
    PerOutcome, ResidualMaxima, SolutionFamily, SpinModel,
};
use serde::{Deserialize, Serialize};

use crate::acceptance::{self, CriterionResult};
use crate::args::{
    Cli, Command, EstimateArgs, Format, MetricArgs, ProbabilitiesArgs, SimulateArgs, SolveArgs, VerifyArgs,
};
use crate::report::{format_f64, opt_f64, to_json, Inputs, Report, Table};

const DEFAULT_THETA: f64 = 1.0;

#[derive(Debug)]
pub enum CliError {
    Domain(EpiError),
    Io(io::Error),
    Csv(csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.kind(),
            CliError::Io(_) | CliError::Csv(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<EpiError> for CliError {
    fn from(e: EpiError) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

/// Rendered report bytes; `success` is false only for a failing `verify`.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub success: bool,
}

impl Rendered {
    fn ok(bytes: Vec<u8>) -> Self {
        Rendered { bytes, success: true }
    }
}

/// Per-outcome values keyed by cell name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cells<T> {
    pub pp: T,
    pub mm: T,
    pub pm: T,
    pub mp: T,
}

impl<T: Copy> From<PerOutcome<T>> for Cells<T> {
    fn from(v: PerOutcome<T>) -> Self {
        Cells { pp: v[Outcome::PP], mm: v[Outcome::MM], pm: v[Outcome::PM], mp: v[Outcome::MP] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub theta: f64,
    pub p_pp: f64,
    pub p_mm: f64,
    pub p_pm: f64,
    pub p_mp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitiesOutput {
    pub rows: Vec<ProbabilityRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub constants: ConstantSolveResult,
    pub residual_maxima: ResidualMaxima,
    pub a_squared: f64,
    pub family: SolutionFamily,
    pub admissible_a: f64,
    /// `(q q′|₀^{2π}) / 2π` per cell.
    pub boundary_constants: Cells<f64>,
    pub budget: InformationBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub form: MetricForm,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOutput {
    /// `n²`, the value the metric should take everywhere.
    pub expected: f64,
    pub scans: Vec<ScanSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub counts: Cells<u64>,
    pub frequencies: Cells<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub counts: Cells<u64>,
    pub reports: Vec<EstimationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiments: Option<Vec<ExperimentSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

pub fn estimator_name(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::CellPp => "cell_pp",
        EstimatorKind::CellMm => "cell_mm",
        EstimatorKind::CellPm => "cell_pm",
        EstimatorKind::CellMp => "cell_mp",
        EstimatorKind::PooledMle => "pooled_mle",
    }
}

fn form_name(form: MetricForm) -> &'static str {
    match form {
        MetricForm::LogForm => "log_form",
        MetricForm::RatioForm => "ratio_form",
        MetricForm::AmplitudeForm => "amplitude_form",
    }
}

pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    match &cli.command {
        Command::Probabilities(a) => probabilities(a),
        Command::Solve(a) => solve(a),
        Command::Metric(a) => metric(a),
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Verify(a) => verify(a),
    }
}

fn probability_row(theta: Angle, model: SpinModel) -> ProbabilityRow {
    let p = joint_distribution(theta, model);
    ProbabilityRow {
        theta: theta.radians(),
        p_pp: p.get(Outcome::PP),
        p_mm: p.get(Outcome::MM),
        p_pm: p.get(Outcome::PM),
        p_mp: p.get(Outcome::MP),
    }
}

pub fn probabilities(a: &ProbabilitiesArgs) -> Result<Rendered, CliError> {
    let model = SpinModel::new(a.model.n)?;
    let theta = a.theta.angle();
    let rows = match theta {
        Some(t) => vec![probability_row(t, model)],
        None => {
            let n = a.grid_points;
            if n < 1 {
                return Err(EpiError::InvalidArgument("grid needs at least 1 interval".into()).into());
            }
            // the endpoint 2π is kept as a raw angle so the table closes the turn
            (0..=n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    ProbabilityRow { theta: t, ..probability_row(Angle::new(t), model) }
                })
                .collect()
        }
    };
    let inputs = Inputs {
        n: Some(model.n()),
        theta: theta.map(Angle::radians),
        grid_points: theta.is_none().then_some(a.grid_points),
        ..Inputs::default()
    };
    match a.out.format {
        Format::Json => {
            Ok(Rendered::ok(to_json(&Report::new("probabilities", inputs, ProbabilitiesOutput { rows }, None))))
        }
        Format::Csv => {
            let mut t = Table::new(&["theta", "p_pp", "p_mm", "p_pm", "p_mp"]);
            for r in rows {
                t.push([r.theta, r.p_pp, r.p_mm, r.p_pm, r.p_mp].into_iter().map(format_f64).collect());
            }
            Ok(Rendered::ok(t.to_csv()?))
        }
    }
}

pub fn solve(a: &SolveArgs) -> Result<Rendered, CliError> {
    let model = SpinModel::new(a.model.n)?;
    let constants = solve_amplitude_constants(model.n())?;
    let eq = GeneratingEquation::for_model(model);
    let amps = constants.amplitudes();
    let out = SolveOutput {
        residual_maxima: residual_maxima(model, a.grid_points)?,
        a_squared: eq.a_squared(),
        family: classify_family(&eq),
        admissible_a: admissible_a(model.n())?,
        boundary_constants: PerOutcome::from_fn(|o| boundary_constant(&amps, o)).into(),
        budget: information_budget(model),
        constants,
    };
    let inputs = Inputs { n: Some(model.n()), grid_points: Some(a.grid_points), ..Inputs::default() };
    match a.out.format {
        Format::Json => Ok(Rendered::ok(to_json(&Report::new("solve", inputs, out, None)))),
        Format::Csv => {
            let mut t = Table::new(&["outcome", "b", "c", "boundary_constant"]);
            for o in Outcome::ALL {
                t.push(vec![
                    o.key().to_string(),
                    format_f64(out.constants.b[o]),
                    format_f64(out.constants.c[o]),
                    format_f64(boundary_constant(&amps, o)),
                ]);
            }
            Ok(Rendered::ok(t.to_csv()?))
        }
    }
}

pub fn metric(a: &MetricArgs) -> Result<Rendered, CliError> {
    let model = SpinModel::new(a.model.n)?;
    let curve = CurveOnSimplex::epr(model, DerivativeMode::ClosedForm);
    let inputs = Inputs { n: Some(model.n()), grid_points: Some(a.grid_points), ..Inputs::default() };
    match a.out.format {
        Format::Json => {
            let mut scans = Vec::new();
            for form in MetricForm::ALL {
                let s = metric_constancy_scan(&curve, a.grid_points, form)?;
                scans.push(ScanSummary { form, min: s.min, max: s.max, spread: s.spread() });
            }
            let out = MetricOutput { expected: model.n_squared(), scans };
            Ok(Rendered::ok(to_json(&Report::new("metric", inputs, out, None))))
        }
        Format::Csv => {
            // validate the grid the same way the scan does
            metric_constancy_scan(&curve, a.grid_points, MetricForm::AmplitudeForm)?;
            let mut header = vec!["theta"];
            header.extend(MetricForm::ALL.map(form_name));
            let mut t = Table::new(&header);
            for theta in scan_grid(a.grid_points) {
                let mut row = vec![format_f64(theta)];
                for form in MetricForm::ALL {
                    row.push(format_f64(induced_metric(&curve, theta, form)?));
                }
                t.push(row);
            }
            Ok(Rendered::ok(t.to_csv()?))
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<Rendered, CliError> {
    let model = SpinModel::new(a.model.n)?;
    let theta = a.theta.angle_or(DEFAULT_THETA);
    let s = sample(theta, model, a.samples, a.seed)?;
    let freq = epi_core::frequencies(&s);
    let out = SimulateOutput { counts: s.counts.into(), frequencies: freq.lambda_hat.into() };
    let inputs =
        Inputs { n: Some(model.n()), theta: Some(theta.radians()), samples: Some(a.samples), ..Inputs::default() };
    match a.out.format {
        Format::Json => Ok(Rendered::ok(to_json(&Report::new("simulate", inputs, out, Some(a.seed))))),
        Format::Csv => {
            let mut t = Table::new(&["outcome", "count", "frequency"]);
            for o in Outcome::ALL {
                t.push(vec![o.key().to_string(), s.counts[o].to_string(), format_f64(freq.lambda_hat[o])]);
            }
            Ok(Rendered::ok(t.to_csv()?))
        }
    }
}

pub fn estimate(a: &EstimateArgs) -> Result<Rendered, CliError> {
    let model = SpinModel::new(a.model.n)?;
    let theta = a.theta.angle_or(DEFAULT_THETA);
    let s = sample(theta, model, a.samples, a.seed)?;
    let kinds = a.estimator.kinds();
    let reports: Vec<EstimationReport> = kinds.iter().map(|&k| estimation_report(&s, k)).collect();
    let experiments = match a.replications {
        None => None,
        Some(r) => {
            let all = unbiasedness_experiment_all(theta, model, a.samples, r, a.seed)?;
            Some(all.into_iter().filter(|e| kinds.contains(&e.estimator)).collect::<Vec<_>>())
        }
    };
    let inputs = Inputs {
        n: Some(model.n()),
        theta: Some(theta.radians()),
        samples: Some(a.samples),
        replications: a.replications,
        estimator: Some(a.estimator.name().to_string()),
        ..Inputs::default()
    };
    match a.out.format {
        Format::Json => {
            let out = EstimateOutput { counts: s.counts.into(), reports, experiments };
            Ok(Rendered::ok(to_json(&Report::new("estimate", inputs, out, Some(a.seed)))))
        }
        Format::Csv => {
            let mut t = Table::new(&[
                "estimator",
                "theta_hat",
                "std_error",
                "lrcb",
                "ci_low",
                "ci_high",
                "mean",
                "bias",
                "variance",
                "replications",
            ]);
            for r in &reports {
                let e = experiments.as_ref().and_then(|v| v.iter().find(|e| e.estimator == r.estimator_kind));
                t.push(vec![
                    estimator_name(r.estimator_kind).to_string(),
                    format_f64(r.theta_hat),
                    opt_f64(r.std_error),
                    format_f64(r.lrcb),
                    opt_f64(r.ci_low),
                    opt_f64(r.ci_high),
                    opt_f64(e.map(|e| e.mean)),
                    opt_f64(e.map(|e| e.bias)),
                    opt_f64(e.map(|e| e.variance)),
                    e.map(|e| e.replications.to_string()).unwrap_or_default(),
                ]);
            }
            Ok(Rendered::ok(t.to_csv()?))
        }
    }
}

pub fn verify(a: &VerifyArgs) -> Result<Rendered, CliError> {
    let results = acceptance::run_selected(&a.criteria);
    let passed = results.iter().all(|r| r.passed);
    let bytes = match a.format {
        None => results.iter().map(|r| r.line() + "\n").collect::<String>().into_bytes(),
        Some(Format::Json) => {
            let inputs = Inputs { criteria: (!a.criteria.is_empty()).then(|| a.criteria.clone()), ..Inputs::default() };
            to_json(&Report::new("verify", inputs, VerifyOutput { passed, criteria: results }, None))
        }
        Some(Format::Csv) => {
            let mut t = Table::new(&["id", "title", "passed", "elapsed_seconds", "budget_seconds", "detail"]);
            for r in &results {
                t.push(vec![
                    r.id.to_string(),
                    r.title.clone(),
                    r.passed.to_string(),
                    format_f64(r.elapsed_seconds),
                    opt_f64(r.budget_seconds),
                    r.detail.clone(),
                ]);
            }
            t.to_csv()?
        }
    };
    Ok(Rendered { bytes, success: passed })
}
