//! Subcommand bodies. Each returns tables; rendering happens in the caller.

use std::path::Path;

use serde_json::Value;

use sepscope::estimator::{
    closed_form_for, compare_curves, estimate_desf_with, estimate_event, estimate_minor_desf, uniform_edges,
    BinCount, DesfHistogram, EstimateOptions,
};
use sepscope::quadrature::{
    complex_speculation_probability, exact_probability, exact_twofold, separability_probability,
    separability_probability_full_line, twofold_ratio, QuadratureResult, COMPLEX_SPECULATION,
    PRODUCT_INT_REFERENCE,
};
use sepscope::sepfun::{DesfCurve, JacobianSpec};

use crate::output::{Cell, Table};
use crate::verify::{library_partial_transpose, run_suite};
use crate::{CliError, Command, EventArg, StreamArgs};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    NumericFailure(String),
    VerificationFailure(String),
}

#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<Table>,
    pub status: Status,
}

impl Report {
    fn ok(tables: Vec<Table>) -> Self {
        Self {
            tables,
            status: Status::Ok,
        }
    }
}

pub fn run(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Bounds { tol } => bounds(*tol),
        Command::Estimate { stream, event, ci_sigmas } => estimate(stream, *event, *ci_sigmas),
        Command::Histogram { stream, bins, ximax, compare } => histogram(stream, *bins, *ximax, compare),
        Command::Minor { stream, minor, grid } => {
            let m = estimate_minor_desf(&stream.spec(), stream.n, *minor, grid)?;
            let curve = closed_form_for(*minor);
            let mut t = Table::new(
                "minor",
                &["minor", "xi", "d1", "d2", "d3", "d4", "n_psd", "n_hold", "ratio", "stderr", "closed_form", "closed_value", "z"],
            );
            for (k, &xi) in m.grid.iter().enumerate() {
                let d = m.diagonals[k];
                let model = curve.eval(xi);
                t.push(vec![
                    minor.to_string().into(),
                    xi.into(),
                    d[0].into(),
                    d[1].into(),
                    d[2].into(),
                    d[3].into(),
                    m.n_psd.into(),
                    m.n_hold[k].into(),
                    m.ratio(k).into(),
                    m.stderr(k).into(),
                    curve.name().into(),
                    model.into(),
                    ((m.ratio(k) - model) / m.sigma_for_tests(k)).into(),
                ]);
            }
            Ok(Report::ok(vec![t]))
        }
        Command::Curves { tags, xi_min, xi_max, points, beta, tol, residual } => {
            curves(tags, *xi_min, *xi_max, *points, *beta, *tol, residual.as_deref())
        }
        Command::Verify { level, seed } => {
            let checks = run_suite(*level, *seed, library_partial_transpose);
            let mut t = Table::new("checks", &["check", "passed", "detail"]);
            for c in &checks {
                t.push(vec![c.name.clone().into(), c.passed.into(), c.detail.clone().into()]);
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            Ok(Report {
                tables: vec![t],
                status: if failed.is_empty() {
                    Status::Ok
                } else {
                    Status::VerificationFailure(format!("failed checks: {}", failed.join(", ")))
                },
            })
        }
    }
}

const BOUND_ROWS: [DesfCurve; 10] = [
    DesfCurve::Unity,
    DesfCurve::Dom,
    DesfCurve::Int,
    DesfCurve::ThreeRight,
    DesfCurve::ThreeLeft,
    DesfCurve::TwoRight,
    DesfCurve::TwoLeft,
    DesfCurve::Conjecture,
    DesfCurve::Previous,
    DesfCurve::ProductInt,
];

fn bounds(tol: f64) -> Result<Report, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    let mut t = Table::new(
        "bounds",
        &[
            "tag",
            "exact_expression",
            "exact",
            "quadrature",
            "abs_diff",
            "err_est",
            "evals",
            "twofold_expression",
            "twofold_exact",
            "twofold",
            "status",
        ],
    );
    let mut failures = Vec::new();
    let mut row = |tag: &str, exact: Option<(&str, f64)>, half: Option<(&str, f64)>, q: sepscope::Result<QuadratureResult>| {
        let (value, err, evals, status) = match &q {
            Ok(q) => (Some(q.value), Some(q.abs_err_est), Some(q.evals), "ok".to_string()),
            Err(e) => {
                failures.push(tag.to_owned());
                (None, None, None, e.to_string())
            }
        };
        t.push(vec![
            tag.into(),
            exact.map(|e| e.0).into(),
            exact.map(|e| e.1).into(),
            value.into(),
            value.zip(exact).map(|(v, e)| (v - e.1).abs()).into(),
            err.into(),
            evals.into(),
            half.map(|h| h.0).into(),
            half.map(|h| h.1).into(),
            value.and_then(|v| twofold_ratio(v).ok()).into(),
            status.into(),
        ]);
    };
    for c in BOUND_ROWS {
        let q = if c.is_even() {
            separability_probability(&c, tol)
        } else {
            separability_probability_full_line(&c, tol)
        };
        let exact = match c {
            DesfCurve::ProductInt => Some(("0.576219 (six digits)", PRODUCT_INT_REFERENCE)),
            _ => exact_probability(&c).map(|e| (e.expression, e.value)),
        };
        row(c.name(), exact, exact_twofold(&c).map(|e| (e.expression, e.value)), q);
    }
    row(
        "conjecture-squared-beta-2",
        Some((COMPLEX_SPECULATION.expression, COMPLEX_SPECULATION.value)),
        None,
        complex_speculation_probability(tol.max(1e-8)),
    );
    Ok(Report {
        tables: vec![t],
        status: if failures.is_empty() {
            Status::Ok
        } else {
            Status::NumericFailure(format!("quadrature failed for {}", failures.join(", ")))
        },
    })
}

fn options(stream: &StreamArgs, ci_sigmas: f64) -> EstimateOptions {
    EstimateOptions {
        replicates: stream.replicates,
        ci_sigmas,
    }
}

fn estimate(stream: &StreamArgs, event: EventArg, ci_sigmas: f64) -> Result<Report, CliError> {
    let spec = stream.spec();
    let r = match event {
        EventArg::Sep => estimate_event(&spec, stream.n, &options(stream, ci_sigmas), &|a| a.is_separable()),
        EventArg::AbsSep => estimate_event(&spec, stream.n, &options(stream, ci_sigmas), &|a| a.is_absolutely_separable()),
    }?;
    let name = match event {
        EventArg::Sep => "sep",
        EventArg::AbsSep => "abs-sep",
    };
    let mut t = Table::new(
        "estimate",
        &["event", "engine", "mean", "stderr", "n_effective", "n_total", "n_hits", "ci_lo", "ci_hi", "error_model", "twofold"],
    );
    t.push(vec![
        name.into(),
        spec.engine().name().into(),
        r.mean.into(),
        r.stderr.into(),
        r.n_effective.into(),
        r.n_total.into(),
        r.n_hits.into(),
        r.ci95.0.into(),
        r.ci95.1.into(),
        serde_json::to_value(r.error_model).ok().and_then(|v| v.as_str().map(str::to_owned)).into(),
        twofold_ratio(r.mean).ok().into(),
    ]);
    let mut reps = Table::new("replicates", &["replicate", "mean"]);
    for (k, m) in r.replicate_means.iter().enumerate() {
        reps.push(vec![k.into(), (*m).into()]);
    }
    Ok(Report::ok(vec![t, reps]))
}

fn parse_curve(tag: &str) -> Result<DesfCurve, CliError> {
    tag.parse::<DesfCurve>()
        .map_err(|e| CliError::Usage(format!("{e}; curves also accept 'jacobian'")))
}

fn histogram_tables(h: &DesfHistogram) -> Vec<Table> {
    let mut t = Table::new("histogram", &["lo", "hi", "mid", "n_psd", "n_sep", "ratio", "stderr"]);
    for r in h.rows() {
        t.push(vec![r.lo.into(), r.hi.into(), r.mid.into(), r.n_psd.into(), r.n_sep.into(), r.ratio.into(), r.stderr.into()]);
    }
    let mut tails = Table::new("tails", &["side", "n_psd", "n_sep"]);
    tails.push(vec!["below".into(), h.underflow().n_psd.into(), h.underflow().n_sep.into()]);
    tails.push(vec!["above".into(), h.overflow().n_psd.into(), h.overflow().n_sep.into()]);
    let mut s = Table::new("summary", &["n_total", "total_psd", "total_sep", "pooled_ratio"]);
    s.push(vec![h.n_total().into(), h.total_psd().into(), h.total_sep().into(), h.pooled_ratio().into()]);
    vec![t, tails, s]
}

fn comparison_tables(h: &DesfHistogram, curves: &[DesfCurve]) -> Vec<Table> {
    let mut summary = Table::new("comparison", &["curve", "bins", "max_abs_z", "mean_signed_residual", "rms_residual"]);
    let mut rows = Table::new("residuals", &["curve", "mid", "n_psd", "ratio", "model", "residual", "sigma"]);
    for c in curves {
        let cmp = compare_curves(h, c);
        summary.push(vec![
            cmp.curve.clone().into(),
            cmp.rows.len().into(),
            cmp.max_abs_z.into(),
            cmp.mean_signed_residual.into(),
            cmp.rms_residual.into(),
        ]);
        for r in &cmp.rows {
            rows.push(vec![cmp.curve.clone().into(), r.mid.into(), r.n_psd.into(), r.ratio.into(), r.model.into(), r.residual.into(), r.sigma.into()]);
        }
    }
    vec![summary, rows]
}

fn histogram(stream: &StreamArgs, bins: usize, ximax: f64, compare: &[String]) -> Result<Report, CliError> {
    let curves = compare.iter().map(|t| parse_curve(t)).collect::<Result<Vec<_>, _>>()?;
    let edges = uniform_edges(bins, ximax)?;
    let h = estimate_desf_with(&stream.spec(), stream.n, &edges, &options(stream, 2.0), &|a| a.is_separable())?;
    let mut tables = histogram_tables(&h);
    if !curves.is_empty() {
        tables.extend(comparison_tables(&h, &curves));
    }
    Ok(Report::ok(tables))
}

fn curves(
    tags: &[String],
    xi_min: f64,
    xi_max: f64,
    points: usize,
    beta: Option<f64>,
    tol: f64,
    residual: Option<&Path>,
) -> Result<Report, CliError> {
    let mut named: Vec<(String, Option<DesfCurve>)> = Vec::new();
    for tag in tags {
        if tag == "jacobian" {
            named.push((tag.clone(), None));
        } else {
            named.push((tag.clone(), Some(parse_curve(tag)?)));
        }
    }
    if let Some(path) = residual {
        let h = load_histogram(path)?;
        let curves: Vec<DesfCurve> = named.into_iter().filter_map(|(_, c)| c).collect();
        if curves.is_empty() {
            return Err(CliError::Usage("residual mode needs at least one curve tag".into()));
        }
        return Ok(Report::ok(comparison_tables(&h, &curves)));
    }
    if points < 2 || !(xi_min < xi_max) {
        return Err(CliError::Usage("need at least two points and xi-min < xi-max".into()));
    }
    let beta_spec = beta
        .map(|b| JacobianSpec::new(b, JacobianSpec::default().series_cutoff))
        .transpose()?;
    let mut columns: Vec<String> = vec!["xi".into()];
    columns.extend(named.iter().map(|(t, _)| t.clone()));
    if let Some(b) = beta {
        columns.push(format!("jacobian-beta-{b}"));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("curves", &cols);
    for k in 0..points {
        let xi = xi_min + (xi_max - xi_min) * k as f64 / (points - 1) as f64;
        let mut row: Vec<Cell> = vec![xi.into()];
        for (_, c) in &named {
            row.push(match c {
                Some(c) => c.eval(xi).into(),
                None => sepscope::sepfun::jacobian(xi).into(),
            });
        }
        if let Some(spec) = &beta_spec {
            row.push(spec.eval_with_tol(xi, tol)?.into());
        }
        t.push(row);
    }
    Ok(Report::ok(vec![t]))
}

/// Reads the `histogram` and `tails` tables of a document written by the
/// `histogram` subcommand.
pub fn load_histogram(path: &Path) -> Result<DesfHistogram, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let bad = |what: &str| CliError::Usage(format!("{}: {what}", path.display()));
    let (hist, tails): (Vec<Vec<String>>, Vec<Vec<String>>) = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        let rows = |name: &str| -> Option<Vec<Vec<String>>> {
            v.pointer(&format!("/data/{name}/rows"))?
                .as_array()?
                .iter()
                .map(|r| r.as_array().map(|c| c.iter().map(json_cell).collect()))
                .collect()
        };
        (rows("histogram").ok_or_else(|| bad("no histogram table"))?, rows("tails").unwrap_or_default())
    } else {
        (csv_table(&text, "histogram").ok_or_else(|| bad("no histogram table"))?, csv_table(&text, "tails").unwrap_or_default())
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")));
    let count = |s: &str| s.parse::<u64>().map_err(|_| bad(&format!("bad count {s:?}")));
    let mut edges = Vec::new();
    let (mut n_psd, mut n_sep) = (Vec::new(), Vec::new());
    for r in &hist {
        if r.len() < 5 {
            return Err(bad("short histogram row"));
        }
        if edges.is_empty() {
            edges.push(num(&r[0])?);
        }
        edges.push(num(&r[1])?);
        n_psd.push(count(&r[3])?);
        n_sep.push(count(&r[4])?);
    }
    let mut under = BinCount::default();
    let mut over = BinCount::default();
    for r in &tails {
        let c = BinCount {
            n_psd: count(&r[1])?,
            n_sep: count(&r[2])?,
        };
        match r[0].as_str() {
            "below" => under = c,
            "above" => over = c,
            _ => return Err(bad("unknown tail row")),
        }
    }
    let total = n_psd.iter().sum::<u64>() + under.n_psd + over.n_psd;
    Ok(DesfHistogram::from_counts(edges, n_psd, n_sep, under, over, total)?)
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_table(text: &str, name: &str) -> Option<Vec<Vec<String>>> {
    let marker = format!("# table: {name}\n");
    let start = text.find(&marker)? + marker.len();
    let body = &text[start..];
    let end = body.find("\n\n").map_or(body.len(), |i| i + 1);
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(&body.as_bytes()[..end]);
    r.records().map(|rec| rec.ok().map(|x| x.iter().map(str::to_owned).collect())).collect()
}
