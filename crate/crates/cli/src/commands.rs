use std::path::PathBuf;

use phavail_core::availability::{
    availability_closed, availability_exponential_closed, component_chain, steady_state_dlambda,
    steady_state_dmu, ComponentParams,
};
use phavail_core::ctmc::{stationary_distribution, transient_distribution};
use phavail_core::sim::{simulate, SimulationPlan};
use phavail_core::system::{
    product_space_generator, steady_state_parallel, steady_state_series, system_availability_curve,
    Component, SystemModel, MAX_PRODUCT_COMPONENTS,
};
use phavail_core::{Law, Structure};

use crate::report::{csv_number, Cell, ReportTable};
use crate::svg::{LineChart, Series};
use crate::CliError;

/// What a command produced; the caller writes it out.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub verification_failed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 500.0,
            points: 501,
            log: false,
        }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start >= 0.0) {
            return Err(format!("time range must be finite and non-negative, got [{}, {}]", self.start, self.stop));
        }
        if self.stop <= self.start {
            return Err(format!("t-stop ({}) must exceed t-start ({})", self.stop, self.start));
        }
        if self.points < 2 {
            return Err(format!("need at least 2 points, got {}", self.points));
        }
        if self.log && self.start <= 0.0 {
            return Err("log spacing needs a positive t-start".into());
        }
        Ok(())
    }

    /// Grid values with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut out: Vec<f64> = if self.log {
            let (a, b) = (self.start.log10(), self.stop.log10());
            (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / last)).collect()
        } else {
            (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / last)
                .collect()
        };
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }
}

fn analysis(e: impl std::fmt::Display) -> CliError {
    CliError::Analysis(e.to_string())
}

fn csv_rows(header: &[String], x: &[f64], columns: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (k, t) in x.iter().enumerate() {
        out.push_str(&csv_number(*t));
        for col in columns {
            out.push(',');
            out.push_str(&csv_number(col[k]));
        }
        out.push('\n');
    }
    out
}

fn emit_curves(
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
    chart: LineChart,
) -> CommandOutput {
    let mut header = vec!["t".to_owned()];
    header.extend(chart.series.iter().map(|s| s.name.clone()));
    let columns: Vec<Vec<f64>> = chart.series.iter().map(|s| s.values.clone()).collect();
    let text = csv_rows(&header, &chart.x, &columns);
    let mut out = CommandOutput::default();
    match csv {
        Some(path) => out.files.push((path, text)),
        None => out.stdout = text,
    }
    if let Some(path) = svg {
        out.files.push((path, chart.render()));
    }
    out
}

pub fn availability(
    model: &SystemModel<f64>,
    grid: &TimeGrid,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<CommandOutput, CliError> {
    let t = grid.values();
    let mut series = Vec::new();
    for c in &model.components {
        let p = c.params;
        let lindley = t
            .iter()
            .map(|&t| availability_closed(p.lambda, p.mu, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(analysis)?;
        let exponential = t
            .iter()
            .map(|&t| availability_exponential_closed(p.lambda, p.mu, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(analysis)?;
        series.push(Series { name: format!("{}_lindley", c.label), values: lindley, dashed: false });
        series.push(Series { name: format!("{}_exponential", c.label), values: exponential, dashed: true });
    }
    if model.components.len() > 1 {
        let system = system_availability_curve(model, &t).map_err(analysis)?;
        series.push(Series { name: "system".into(), values: system.values, dashed: false });
    }
    let chart = LineChart {
        title: format!("Availability: {}", model.name),
        x_label: "t (days)".into(),
        y_label: "A(t)".into(),
        x: t,
        series,
        log_x: grid.log,
    };
    Ok(emit_curves(csv, svg, chart))
}

pub fn reliability(
    model: &SystemModel<f64>,
    grid: &TimeGrid,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<CommandOutput, CliError> {
    let t = grid.values();
    let mut series = Vec::new();
    for c in &model.components {
        let p = c.params;
        let with_repair = t.iter().map(|&t| p.availability(t)).collect::<Result<Vec<_>, _>>().map_err(analysis)?;
        let no_repair = t.iter().map(|&t| p.reliability(t)).collect::<Result<Vec<_>, _>>().map_err(analysis)?;
        series.push(Series { name: format!("{}_with_repair", c.label), values: with_repair, dashed: false });
        series.push(Series { name: format!("{}_no_repair", c.label), values: no_repair, dashed: true });
    }
    let chart = LineChart {
        title: format!("Reliability with and without repair: {}", model.name),
        x_label: "t (days)".into(),
        y_label: "probability up".into(),
        x: t,
        series,
        log_x: grid.log,
    };
    Ok(emit_curves(csv, svg, chart))
}

fn comparison_row(name: &str, rates: Option<(f64, f64)>, exponential: f64, lindley: f64) -> Vec<Cell> {
    let rate = |v: Option<f64>| v.map_or_else(|| Cell::text("-"), Cell::Exact);
    vec![
        Cell::text(name),
        rate(rates.map(|r| r.0)),
        rate(rates.map(|r| r.1)),
        Cell::number(exponential, 4),
        Cell::number(lindley, 4),
        Cell::number(100.0 * (lindley - exponential), 2),
        Cell::number(100.0 * (lindley / exponential - 1.0), 2),
    ]
}

pub fn steady_state_table(model: &SystemModel<f64>) -> Result<ReportTable, CliError> {
    let mut table = ReportTable::new(
        format!("Steady-state availability: {} ({})", model.name, model.structure),
        &["component", "lambda", "mu", "exponential", "lindley", "difference_pp", "increase_pct"],
        "closed form",
    );
    let with = |law: Law| -> Vec<ComponentParams<f64>> { model.params().into_iter().map(|p| p.with_law(law)).collect() };
    let system = |params: &[ComponentParams<f64>]| match model.structure {
        Structure::Single | Structure::Series => steady_state_series(params),
        Structure::Parallel => steady_state_parallel(params),
    };
    let exp_params = with(Law::Exponential);
    let lin_params = with(Law::Lindley);
    for (i, c) in model.components.iter().enumerate() {
        let e = exp_params[i].steady_state().map_err(analysis)?;
        let l = lin_params[i].steady_state().map_err(analysis)?;
        table.push(comparison_row(&c.label, Some((c.params.lambda, c.params.mu)), e, l));
    }
    let e = system(&exp_params).map_err(analysis)?;
    let l = system(&lin_params).map_err(analysis)?;
    table.push(comparison_row("system", None, e, l));
    table.notes.push("difference_pp: lindley - exponential, in percentage points".into());
    table.notes.push("increase_pct: lindley / exponential - 1, in percent".into());
    Ok(table)
}

pub fn steady_state(model: &SystemModel<f64>, csv: Option<PathBuf>) -> Result<CommandOutput, CliError> {
    let table = steady_state_table(model)?;
    let mut out = CommandOutput { stdout: table.render(), ..Default::default() };
    if let Some(path) = csv {
        out.files.push((path, table.to_csv()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Lambda,
    Mu,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Lambda => "lambda",
            Param::Mu => "mu",
        }
    }
}

/// Components sharing identical rates, reported once under a joined label.
fn rate_groups(components: &[&Component<f64>]) -> Vec<(String, ComponentParams<f64>)> {
    let mut groups: Vec<(Vec<&str>, ComponentParams<f64>)> = Vec::new();
    for c in components {
        let key = (c.params.lambda, c.params.mu);
        match groups.iter_mut().find(|(_, p)| (p.lambda, p.mu) == key) {
            Some((labels, _)) => labels.push(&c.label),
            None => groups.push((vec![&c.label], c.params)),
        }
    }
    groups.into_iter().map(|(labels, p)| (labels.join("/"), p)).collect()
}

/// Printed precision: one decimal at magnitude 10 and above, two below.
fn derivative_decimals(d: f64) -> usize {
    if d.abs() >= 10.0 {
        1
    } else {
        2
    }
}

pub const DEFAULT_SWEEP: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

pub struct SensitivityRequest<'a> {
    pub params: Vec<Param>,
    pub values: Option<Vec<f64>>,
    pub component: Option<&'a str>,
}

pub fn sensitivity_tables(
    model: &SystemModel<f64>,
    request: &SensitivityRequest<'_>,
) -> Result<(Vec<ReportTable>, String), CliError> {
    let selected: Vec<&Component<f64>> = match request.component {
        Some(label) => {
            let found: Vec<_> = model.components.iter().filter(|c| c.label == label).collect();
            if found.is_empty() {
                return Err(CliError::Usage(format!("no component labelled `{label}`")));
            }
            found
        }
        None => model.components.iter().collect(),
    };
    let groups = rate_groups(&selected);

    let mut tables = Vec::new();
    let mut csv = String::from("component,parameter,value,availability,derivative\n");
    for &param in &request.params {
        for (label, p) in &groups {
            let (nominal, held, held_name) = match param {
                Param::Lambda => (p.lambda, p.mu, "mu"),
                Param::Mu => (p.mu, p.lambda, "lambda"),
            };
            let values = match &request.values {
                Some(v) => v.clone(),
                None => DEFAULT_SWEEP.iter().map(|m| m * nominal).collect(),
            };
            let name = param.name();
            let mut table = ReportTable::new(
                format!("Sensitivity of Lindley steady-state availability to {name}: {label} ({held_name} = {held})"),
                &[name, "availability", &format!("d_availability_d_{name}")],
                "closed form",
            );
            for v in values {
                let (lambda, mu) = match param {
                    Param::Lambda => (v, p.mu),
                    Param::Mu => (p.lambda, v),
                };
                let a = ComponentParams::lindley(lambda, mu)
                    .and_then(|q| q.steady_state())
                    .map_err(analysis)?;
                let d = match param {
                    Param::Lambda => steady_state_dlambda(lambda, mu),
                    Param::Mu => steady_state_dmu(lambda, mu),
                }
                .map_err(analysis)?;
                let first = if v == nominal {
                    Cell::text(format!("{v} (nominal)"))
                } else {
                    Cell::Exact(v)
                };
                table.push(vec![first, Cell::number(a, 4), Cell::number(d, derivative_decimals(d))]);
                csv.push_str(&format!("{label},{name},{},{},{}\n", csv_number(v), csv_number(a), csv_number(d)));
            }
            tables.push(table);
        }
    }
    Ok((tables, csv))
}

pub fn sensitivity(
    model: &SystemModel<f64>,
    request: &SensitivityRequest<'_>,
    csv: Option<PathBuf>,
) -> Result<CommandOutput, CliError> {
    let (tables, text) = sensitivity_tables(model, request)?;
    let rendered: Vec<String> = tables.iter().map(ReportTable::render).collect();
    let mut out = CommandOutput { stdout: rendered.join("\n"), ..Default::default() };
    if let Some(path) = csv {
        out.files.push((path, text));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub grid: TimeGrid,
    /// Deterministic checks pass when the deviation is at most this.
    pub tol: f64,
    pub seed: u64,
    pub replications: usize,
    pub horizon: f64,
    /// Added to every closed-form value before comparison; tests use it to
    /// confirm the check can fail.
    #[doc(hidden)]
    pub closed_form_bias: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: TimeGrid::default(),
            tol: 1e-8,
            seed: 42,
            replications: 200,
            horizon: 1e5,
            closed_form_bias: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: &'static str,
    pub subject: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckResult {
    fn new(check: &'static str, subject: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        let verdict = if deviation <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Self { check, subject: subject.into(), deviation, tolerance, verdict }
    }

    fn skipped(check: &'static str, subject: impl Into<String>) -> Self {
        Self { check, subject: subject.into(), deviation: f64::NAN, tolerance: f64::NAN, verdict: Verdict::Skip }
    }
}

const TRANSIENT: &str = "closed form vs CTMC transient";
const STATIONARY: &str = "steady state vs stationary solve";
const PRODUCT: &str = "system formula vs product space";
const MONTE_CARLO: &str = "Monte Carlo within 3 SE";

pub fn run_checks(model: &SystemModel<f64>, opts: &VerifyOptions) -> Result<Vec<CheckResult>, CliError> {
    let grid = opts.grid.values();
    let repairable = model.components.iter().all(|c| c.params.mu > 0.0);
    let mut results = Vec::new();

    for c in &model.components {
        let p = c.params;
        let (q, p0) = component_chain(&p).map_err(analysis)?;
        let failed = q.order() - 1;
        let mut worst: f64 = 0.0;
        for &t in &grid {
            let closed = p.availability(t).map_err(analysis)? + opts.closed_form_bias;
            let numeric = 1.0 - transient_distribution(&q, &p0, t).map_err(analysis)?.probs()[failed];
            worst = worst.max((closed - numeric).abs());
        }
        results.push(CheckResult::new(TRANSIENT, format!("{} ({})", c.label, p.law.name()), worst, opts.tol));
    }

    for c in &model.components {
        let subject = format!("{} ({})", c.label, c.params.law.name());
        if c.params.mu <= 0.0 {
            results.push(CheckResult::skipped(STATIONARY, subject));
            continue;
        }
        let (q, _) = component_chain(&c.params).map_err(analysis)?;
        let pi = stationary_distribution(&q).map_err(analysis)?;
        let closed = c.params.steady_state().map_err(analysis)? + opts.closed_form_bias;
        let numeric = 1.0 - pi.probs()[q.order() - 1];
        results.push(CheckResult::new(STATIONARY, subject, (closed - numeric).abs(), opts.tol));
    }

    let system_subject = format!("system ({})", model.structure);
    if repairable && model.components.len() <= MAX_PRODUCT_COMPONENTS {
        let ps = product_space_generator(&model.params()).map_err(analysis)?;
        let pi = stationary_distribution(&ps.generator).map_err(analysis)?;
        let numeric = pi.mass_of(&ps.classify(model.structure).up);
        let closed = model.steady_state().map_err(analysis)? + opts.closed_form_bias;
        results.push(CheckResult::new(PRODUCT, system_subject.clone(), (closed - numeric).abs(), opts.tol));
    } else {
        results.push(CheckResult::skipped(PRODUCT, system_subject.clone()));
    }

    if repairable {
        let plan = SimulationPlan::new(model.clone(), opts.horizon, opts.replications, opts.seed);
        let est = simulate(&plan).map_err(analysis)?;
        for (c, e) in model.components.iter().zip(&est.components) {
            let target = c.params.steady_state().map_err(analysis)?;
            results.push(CheckResult::new(MONTE_CARLO, c.label.clone(), (e.mean - target).abs(), 3.0 * e.std_error));
        }
        let target = model.steady_state().map_err(analysis)?;
        results.push(CheckResult::new(
            MONTE_CARLO,
            system_subject,
            (est.long_run.mean - target).abs(),
            3.0 * est.long_run.std_error,
        ));
    } else {
        results.push(CheckResult::skipped(MONTE_CARLO, system_subject));
    }
    Ok(results)
}

pub fn verify(model: &SystemModel<f64>, opts: &VerifyOptions, csv: Option<PathBuf>) -> Result<CommandOutput, CliError> {
    let results = run_checks(model, opts)?;
    let mut table = ReportTable::new(
        format!("Verification: {} ({})", model.name, model.structure),
        &["check", "subject", "max_deviation", "tolerance", "verdict"],
        "closed form against CTMC solves and simulation",
    );
    let sci = |x: f64| if x.is_nan() { Cell::text("-") } else { Cell::text(format!("{x:.2e}")) };
    for r in &results {
        table.push(vec![Cell::text(r.check), Cell::text(r.subject.clone()), sci(r.deviation), sci(r.tolerance), Cell::text(r.verdict.name())]);
    }
    let failed = results.iter().filter(|r| r.verdict == Verdict::Fail).count();
    table.notes.push(format!(
        "{} checks, {failed} failed (seed {}, {} replications, horizon {} days)",
        results.len(),
        opts.seed,
        opts.replications,
        opts.horizon
    ));

    let mut out = CommandOutput { stdout: table.render(), verification_failed: failed > 0, ..Default::default() };
    if let Some(path) = csv {
        let mut text = String::from("check,subject,max_deviation,tolerance,verdict\n");
        for r in &results {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                r.check,
                r.subject,
                csv_number(r.deviation),
                csv_number(r.tolerance),
                r.verdict.name()
            ));
        }
        out.files.push((path, text));
    }
    Ok(out)
}
