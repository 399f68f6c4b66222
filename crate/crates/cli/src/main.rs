//! `cltcert`: normal-approximation certificates from the command line.
//!
//! Every subcommand writes one report file (`--out`, JSON or CSV) embedding
//! the resolved configuration, the generator name and the seed, and prints a
//! one-line summary. Reports carry no timestamps: running the same command
//! twice, or re-running the configuration recorded inside a report, writes
//! byte-identical files. `--plot` adds an SVG chart next to the report.
//!
//! Exit codes: 0 success, 1 computation failure, 2 argument or validation
//! error. The `CLTCERT_WORKERS` environment variable sizes the worker pool;
//! an unreadable value is ignored with a warning.

mod grid;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cltcert::certify::{certify_bounds, optimality_scan, CertifyConfig, ConstantsChoice};
use cltcert::constants::{constants_pipeline, identity_checks, sigma_scan, IdentityConfig, SIGMA_WINDOW};
use cltcert::distributions::GENERATOR_NAME;
use cltcert::kolmogorov::{k_curve, MethodPolicy};
use cltcert::numerics::uniform_grid;
use cltcert::report;
use cltcert::stein::{
    bound_suite, identity_residual, indicator_f1_oscillation, indicator_solution, SteinSolution,
    TestFunction,
};
use cltcert::triangular_array::{lin_index, relaxed_index, ArraySpec, IndexReport, WeightFunction};

use output::{cell, format_name, CsvTable, Format};
use plot::Series;

pub enum Failure {
    Usage(String),
    Run(String),
}

fn run_err(e: cltcert::Error) -> Failure {
    Failure::Run(e.to_string())
}

/// Canonical plain rendering for argv strings and summaries.
fn plain(v: f64) -> String {
    format!("{}", report::round_sig(v, 12))
}

fn brief(v: f64) -> String {
    format!("{}", report::round_sig(v, 6))
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|&x| plain(x)).collect::<Vec<_>>().join(",")
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Parser)]
#[command(
    name = "cltcert",
    version,
    about = "Normal-approximation certificates for triangular arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated and weighted second-moment indices of the example family.
    Indices(IndicesArgs),
    /// Kolmogorov distance of row sums from the standard normal law.
    Distance(DistanceArgs),
    /// Residual and bound checks for solutions of the Stein equation.
    SteinCheck(SteinCheckArgs),
    /// The lower-bound constant pipeline, with optional scan and identities.
    Constants(ConstantsArgs),
    /// Two-sided certificate bracketing the limiting distance.
    Certify(CertifyArgs),
    /// Growth of the lower bound against a polynomial decay target.
    Optimality(OptimalityArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Report destination.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Optional SVG chart destination.
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// Base seed for every pseudo-random stream of this run.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct IndicesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Family parameter in (0, 1/2].
    #[arg(long)]
    alpha: f64,
    /// Row sizes: comma list or `lo:hi` geometric grid (4 points/decade).
    #[arg(long, visible_alias = "n-grid", default_value = "100:100000")]
    n: String,
    /// Decreasing truncation thresholds.
    #[arg(long, default_value = "0.2,0.1,0.05,0.02,0.01")]
    epsilon: String,
    /// Weight of the relaxed index: `phi:<gamma>`, `psi`, or `none`.
    #[arg(long, default_value = "phi:0.5")]
    weight: String,
    /// Shorthand for `--weight phi:<gamma>`.
    #[arg(long, conflicts_with = "weight")]
    gamma: Option<f64>,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Family parameter in (0, 1/2].
    #[arg(long)]
    alpha: f64,
    /// Row sizes: comma list or `lo:hi` geometric grid (4 points/decade).
    #[arg(long, visible_alias = "n-grid", default_value = "10:10000")]
    n: String,
    /// `auto` folds exactly and samples only past the atom cap.
    #[arg(long, default_value = "auto", value_parser = ["auto", "exact", "mc"])]
    method: String,
    /// Sample count per row size when sampling.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Confidence level of the sampling band.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
}

#[derive(Args)]
struct SteinCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Threshold locations, one smoothstep per (z, delta) pair and one
    /// indicator per z.
    #[arg(long, default_value = "0,1,-1", allow_hyphen_values = true)]
    z: String,
    /// Smoothing widths.
    #[arg(long, default_value = "1,0.5")]
    delta: String,
    /// Evaluation grid `lo:hi:step`.
    #[arg(long, default_value = "-6:6:0.1", allow_hyphen_values = true)]
    grid: String,
    /// Step of the difference quotient in the residual check.
    #[arg(long, default_value_t = 0.004)]
    fd_step: f64,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Family parameter of the discrepancy construction.
    #[arg(long, default_value_t = 1.7)]
    sigma: f64,
    /// Also scan `lo:hi:step` for the best sigma.
    #[arg(long, value_name = "LO:HI:STEP")]
    scan: Option<String>,
    /// Also run the integral identity battery.
    #[arg(long, default_value_t = false)]
    identities: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Family parameter in (0, 1/2].
    #[arg(long)]
    alpha: f64,
    /// Row sizes to measure.
    #[arg(long, visible_alias = "n-grid", default_value = "2000")]
    n: String,
    /// Sample count per row size when the exact fold is infeasible.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Confidence level of the sampling band.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// `pipeline:<sigma>` or `fixed:<c_tilde>`.
    #[arg(long, default_value = "pipeline:1.7")]
    constants: String,
    /// Decreasing thresholds for the upper proxy of explicit arrays.
    #[arg(long, default_value = "0.2,0.1,0.05,0.02,0.01")]
    epsilon: String,
}

#[derive(Args)]
struct OptimalityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Decay exponent of the comparison target.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Decreasing family parameters to scan.
    #[arg(long, default_value = "0.1,0.01,0.001")]
    alpha: String,
    /// `pipeline:<sigma>` or `fixed:<c_tilde>`.
    #[arg(long, default_value = "pipeline:1.7")]
    constants: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_workers();
    let outcome = match cli.command {
        Command::Indices(a) => run_indices(a),
        Command::Distance(a) => run_distance(a),
        Command::SteinCheck(a) => run_stein_check(a),
        Command::Constants(a) => run_constants(a),
        Command::Certify(a) => run_certify(a),
        Command::Optimality(a) => run_optimality(a),
    };
    match outcome {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_workers() {
    let Ok(raw) = std::env::var("CLTCERT_WORKERS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size the worker pool: {e}");
            }
        }
        _ => eprintln!("warning: ignoring CLTCERT_WORKERS={raw}: not a positive integer"),
    }
}

fn check_alpha(alpha: f64) -> Result<f64, Failure> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 0.5 {
        Ok(alpha)
    } else {
        Err(Failure::Usage(format!("alpha must lie in (0, 1/2], got {alpha}")))
    }
}

fn parse_weight(s: &str) -> Result<Option<WeightFunction<f64>>, Failure> {
    if s == "none" {
        return Ok(None);
    }
    if s == "psi" {
        return Ok(Some(WeightFunction::PsiHalf));
    }
    if let Some(g) = s.strip_prefix("phi:") {
        let gamma: f64 = g
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read weight parameter '{g}'")))?;
        return WeightFunction::phi_gamma(gamma)
            .map(Some)
            .map_err(|e| Failure::Usage(e.to_string()));
    }
    Err(Failure::Usage(format!(
        "weight must be `phi:<gamma>`, `psi` or `none`, got '{s}'"
    )))
}

fn parse_constants(s: &str) -> Result<ConstantsChoice<f64>, Failure> {
    if let Some(v) = s.strip_prefix("pipeline:") {
        let sigma: f64 = v
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read sigma '{v}'")))?;
        if !(SIGMA_WINDOW.0..=SIGMA_WINDOW.1).contains(&sigma) {
            return Err(Failure::Usage(format!(
                "sigma must lie in [{}, {}], got {sigma}",
                SIGMA_WINDOW.0, SIGMA_WINDOW.1
            )));
        }
        return Ok(ConstantsChoice::Pipeline { sigma });
    }
    if let Some(v) = s.strip_prefix("fixed:") {
        let c: f64 = v
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read c_tilde '{v}'")))?;
        if !(c > 0.0 && c <= 1.0) {
            return Err(Failure::Usage(format!("c_tilde must lie in (0, 1], got {c}")));
        }
        return Ok(ConstantsChoice::Fixed { c_tilde: c });
    }
    Err(Failure::Usage(format!(
        "constants must be `pipeline:<sigma>` or `fixed:<c_tilde>`, got '{s}'"
    )))
}

fn report_skeleton(command: &str, seed: u64, config: &Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "generator": GENERATOR_NAME,
        "seed": seed,
        "config": config,
    })
}

fn index_csv_rows(kind: &str, r: &IndexReport<f64>, rows: &mut Vec<Vec<String>>) {
    for s in &r.finite_values {
        rows.push(vec![
            kind.into(),
            s.n.to_string(),
            s.parameter.map(cell).unwrap_or_default(),
            cell(s.value),
        ]);
    }
    rows.push(vec![format!("{kind}_limit"), String::new(), String::new(), cell(r.limit_estimate)]);
    if let Some(c) = r.closed_form {
        rows.push(vec![format!("{kind}_closed"), String::new(), String::new(), cell(c)]);
    }
}

fn run_indices(a: IndicesArgs) -> Result<String, Failure> {
    let alpha = check_alpha(a.alpha)?;
    let n_grid = grid::parse_n_grid(&a.n).map_err(Failure::Usage)?;
    let eps = grid::parse_f64_list(&a.epsilon).map_err(Failure::Usage)?;
    let weight_name = match a.gamma {
        Some(g) => format!("phi:{}", plain(g)),
        None => a.weight.clone(),
    };
    let weight = parse_weight(&weight_name)?;
    let spec = ArraySpec::example_alpha(alpha).map_err(run_err)?;
    let lin = lin_index(&spec, &eps, &n_grid).map_err(run_err)?;
    let relaxed = weight
        .as_ref()
        .map(|w| relaxed_index(&spec, w, &n_grid))
        .transpose()
        .map_err(run_err)?;

    let config = json!({
        "alpha": report::number(alpha),
        "n_grid": n_grid,
        "epsilon_grid": eps.iter().map(|&e| report::number(e)).collect::<Vec<_>>(),
        "weight": weight_name.as_str(),
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("indices", a.common.seed, &config);
    body["lindeberg"] = report::index_report_json(&lin);
    body["relaxed"] = relaxed
        .as_ref()
        .map(report::index_report_json)
        .unwrap_or(Value::Null);

    let mut rows = Vec::new();
    index_csv_rows("lindeberg", &lin, &mut rows);
    if let Some(r) = &relaxed {
        index_csv_rows("relaxed", r, &mut rows);
    }
    let command_line = format!(
        "cltcert indices --alpha {} --n {} --epsilon {} --weight {} --seed {} --format {}",
        plain(alpha),
        join_usize(&n_grid),
        join_f64(&eps),
        weight_name,
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable { header: &["kind", "n", "parameter", "value"], rows },
    )?;

    if let Some(path) = &a.common.plot {
        let mut series: Vec<Series> = eps
            .iter()
            .enumerate()
            .map(|(j, &e)| Series {
                label: format!("threshold {}", brief(e)),
                points: lin
                    .finite_values
                    .iter()
                    .skip(j)
                    .step_by(eps.len())
                    .map(|s| ((s.n as f64).log10(), s.value))
                    .collect(),
            })
            .collect();
        if let Some(r) = &relaxed {
            series.push(Series {
                label: "weighted".into(),
                points: r
                    .finite_values
                    .iter()
                    .map(|s| ((s.n as f64).log10(), s.value))
                    .collect(),
            });
        }
        plot::write(path, "second-moment indices", "log10 n", "index", &series);
    }
    Ok(format!(
        "indices: alpha {}, truncated limit {} (closed {}), wrote {}",
        plain(alpha),
        brief(lin.limit_estimate),
        lin.closed_form.map(brief).unwrap_or_else(|| "-".into()),
        a.common.out.display()
    ))
}

fn run_distance(a: DistanceArgs) -> Result<String, Failure> {
    let alpha = check_alpha(a.alpha)?;
    let n_grid = grid::parse_n_grid(&a.n).map_err(Failure::Usage)?;
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(Failure::Usage(format!(
            "confidence must lie in (0, 1), got {}",
            a.confidence
        )));
    }
    let policy = match a.method.as_str() {
        "auto" => MethodPolicy::Auto { samples: a.samples, seed: a.common.seed },
        "exact" => MethodPolicy::ExactOnly,
        _ => MethodPolicy::MonteCarlo { samples: a.samples, seed: a.common.seed },
    };
    let spec = ArraySpec::example_alpha(alpha).map_err(run_err)?;
    let curve = k_curve(&spec, &n_grid, policy, a.confidence).map_err(run_err)?;

    let config = json!({
        "alpha": report::number(alpha),
        "n_grid": n_grid,
        "method": a.method,
        "samples": a.samples,
        "confidence": report::number(a.confidence),
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("distance", a.common.seed, &config);
    body["curve"] = report::k_curve_json(&curve);

    let mut rows: Vec<Vec<String>> = curve
        .results
        .iter()
        .map(|r| {
            vec![
                "distance".into(),
                r.n.to_string(),
                cell(r.value),
                report::method_name(r.method).into(),
                r.samples.map(|s| s.to_string()).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.confidence.map(|b| cell(b.level)).unwrap_or_default(),
                r.confidence.map(|b| cell(b.half_width)).unwrap_or_default(),
            ]
        })
        .collect();
    rows.push(vec![
        "plateau".into(),
        String::new(),
        cell(curve.plateau),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let command_line = format!(
        "cltcert distance --alpha {} --n {} --method {} --samples {} --confidence {} --seed {} --format {}",
        plain(alpha),
        join_usize(&n_grid),
        a.method,
        a.samples,
        plain(a.confidence),
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable {
            header: &["item", "n", "value", "method", "samples", "seed", "level", "half_width"],
            rows,
        },
    )?;

    if let Some(path) = &a.common.plot {
        let pts: Vec<(f64, f64)> = curve
            .results
            .iter()
            .map(|r| ((r.n as f64).log10(), r.value))
            .collect();
        let span = (pts.first().map_or(0.0, |p| p.0), pts.last().map_or(1.0, |p| p.0));
        let series = [
            Series { label: "distance".into(), points: pts },
            Series {
                label: "plateau".into(),
                points: vec![(span.0, curve.plateau), (span.1, curve.plateau)],
            },
        ];
        plot::write(path, "Kolmogorov distance", "log10 n", "distance", &series);
    }
    Ok(format!(
        "distance: alpha {}, plateau {}, wrote {}",
        plain(alpha),
        brief(curve.plateau),
        a.common.out.display()
    ))
}

fn run_stein_check(a: SteinCheckArgs) -> Result<String, Failure> {
    let zs = grid::parse_f64_list(&a.z).map_err(Failure::Usage)?;
    let deltas = grid::parse_f64_list(&a.delta).map_err(Failure::Usage)?;
    let (lo, hi, step) = grid::parse_range_step(&a.grid).map_err(Failure::Usage)?;
    if !(a.fd_step > 0.0 && a.fd_step.is_finite()) {
        return Err(Failure::Usage(format!(
            "fd-step must be positive, got {}",
            a.fd_step
        )));
    }
    if deltas.iter().any(|&d| d <= 0.0) {
        return Err(Failure::Usage("every delta must be positive".into()));
    }
    let xs: Vec<f64> = uniform_grid(lo, hi, step);

    let mut smooth_json = Vec::new();
    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    let mut plot_series = Vec::new();
    for &z in &zs {
        for &delta in &deltas {
            let h = TestFunction::smoothstep(z, delta).map_err(run_err)?;
            let sol = SteinSolution::new(h.clone()).map_err(run_err)?;
            let mut worst = 0.0f64;
            for &x in &xs {
                worst = worst.max(identity_residual(&sol, x, a.fd_step).map_err(run_err)?);
            }
            max_residual = max_residual.max(worst);
            let suite = bound_suite(&h, &xs).map_err(run_err)?;
            rows.push(vec![
                "smoothstep".into(),
                suite.label.clone(),
                cell(worst),
                String::new(),
                cell(suite.sup_f2),
                cell(suite.bound_f2),
                cell(suite.osc_f1),
                cell(suite.osc_bound),
                suite.pass.to_string(),
            ]);
            smooth_json.push(json!({
                "z": report::number(z),
                "delta": report::number(delta),
                "max_identity_residual": report::number(worst),
                "suite": report::bound_suite_json(&suite),
            }));
            if a.common.plot.is_some() {
                let mut points = Vec::with_capacity(xs.len());
                for &x in &xs {
                    points.push((x, sol.f(x).map_err(run_err)?));
                }
                plot_series.push(Series {
                    label: format!("z {} d {}", brief(z), brief(delta)),
                    points,
                });
            }
        }
    }

    let mut indicator_json = Vec::new();
    let mut max_gap = 0.0f64;
    for &z in &zs {
        let sol = SteinSolution::with_tolerance(TestFunction::indicator(z).map_err(run_err)?, 1e-12)
            .map_err(run_err)?;
        let mut gap = 0.0f64;
        for &x in &xs {
            let (closed, _) = indicator_solution(z, x);
            gap = gap.max((closed - sol.f(x).map_err(run_err)?).abs());
        }
        max_gap = max_gap.max(gap);
        let osc = indicator_f1_oscillation(z, &xs);
        rows.push(vec![
            "indicator".into(),
            format!("indicator(z={})", plain(z)),
            String::new(),
            cell(gap),
            String::new(),
            String::new(),
            cell(osc),
            cell(1.0),
            String::new(),
        ]);
        indicator_json.push(json!({
            "z": report::number(z),
            "max_closed_vs_quadrature": report::number(gap),
            "osc_f1": report::number(osc),
        }));
    }

    let config = json!({
        "z": zs.iter().map(|&z| report::number(z)).collect::<Vec<_>>(),
        "delta": deltas.iter().map(|&d| report::number(d)).collect::<Vec<_>>(),
        "grid": [report::number(lo), report::number(hi), report::number(step)],
        "fd_step": report::number(a.fd_step),
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("stein-check", a.common.seed, &config);
    body["smoothsteps"] = Value::Array(smooth_json);
    body["indicators"] = Value::Array(indicator_json);

    let command_line = format!(
        "cltcert stein-check --z {} --delta {} --grid {}:{}:{} --fd-step {} --seed {} --format {}",
        join_f64(&zs),
        join_f64(&deltas),
        plain(lo),
        plain(hi),
        plain(step),
        plain(a.fd_step),
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable {
            header: &[
                "kind", "label", "max_residual", "max_gap", "sup_f2", "bound_f2", "osc_f1",
                "osc_bound", "pass",
            ],
            rows,
        },
    )?;
    if let Some(path) = &a.common.plot {
        plot::write(path, "Stein solutions", "x", "f(x)", &plot_series);
    }
    Ok(format!(
        "stein-check: {} smoothsteps (max residual {}), {} indicators (max gap {}), wrote {}",
        zs.len() * deltas.len(),
        brief(max_residual),
        zs.len(),
        brief(max_gap),
        a.common.out.display()
    ))
}

fn run_constants(a: ConstantsArgs) -> Result<String, Failure> {
    if !(SIGMA_WINDOW.0..=SIGMA_WINDOW.1).contains(&a.sigma) {
        return Err(Failure::Usage(format!(
            "sigma must lie in [{}, {}], got {}",
            SIGMA_WINDOW.0, SIGMA_WINDOW.1, a.sigma
        )));
    }
    let scan_range = a
        .scan
        .as_deref()
        .map(grid::parse_range_step)
        .transpose()
        .map_err(Failure::Usage)?;
    let record = constants_pipeline(a.sigma).map_err(run_err)?;
    let scan = scan_range
        .map(|(lo, hi, step)| sigma_scan(lo, hi, step))
        .transpose()
        .map_err(run_err)?;
    let identities = a
        .identities
        .then(|| identity_checks(&IdentityConfig::<f64>::default()))
        .transpose()
        .map_err(run_err)?;

    let config = json!({
        "sigma": report::number(a.sigma),
        "scan": scan_range.map(|(lo, hi, step)| {
            json!([report::number(lo), report::number(hi), report::number(step)])
        }),
        "identities": a.identities,
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("constants", a.common.seed, &config);
    body["record"] = report::constants_json(&record);
    body["scan"] = scan.as_ref().map(report::sigma_scan_json).unwrap_or(Value::Null);
    body["identities"] = identities
        .as_ref()
        .map(report::identity_checks_json)
        .unwrap_or(Value::Null);

    let mut rows = Vec::new();
    let sig = cell(record.sigma);
    for (name, v) in [
        ("R", record.r),
        ("integral_jump", record.integral_jump),
        ("tv_muhat", record.tv_muhat),
        ("integral_f2", record.integral_f2),
        ("c_psi", record.c_psi),
        ("c_half", record.c_half),
        ("c_tilde", record.c_tilde),
        ("residual_jump", record.residual_jump),
        ("residual_tv", record.residual_tv),
        ("residual_f2", record.residual_f2),
    ] {
        rows.push(vec![name.into(), sig.clone(), cell(v)]);
    }
    if let Some(s) = &scan {
        for &(sigma, c_psi) in &s.table {
            rows.push(vec!["scan_c_psi".into(), cell(sigma), cell(c_psi)]);
        }
    }
    if let Some(ch) = &identities {
        for line in &ch.relation {
            rows.push(vec![
                format!("relation_residual a={}", plain(line.a)),
                String::new(),
                cell(line.residual),
            ]);
        }
        for line in &ch.transform {
            rows.push(vec![
                format!("transform_residual a={}", plain(line.a)),
                cell(line.sigma),
                cell(line.residual),
            ]);
        }
        rows.push(vec!["sandwich_margin_low".into(), String::new(), cell(ch.sandwich_margin_low)]);
        rows.push(vec!["sandwich_margin_high".into(), String::new(), cell(ch.sandwich_margin_high)]);
        rows.push(vec!["tail_gap_psi".into(), String::new(), cell(ch.tail_gap_psi)]);
        rows.push(vec!["tail_gap_phi".into(), String::new(), cell(ch.tail_gap_phi)]);
        rows.push(vec!["identities_pass".into(), String::new(), ch.pass.to_string()]);
    }
    let command_line = format!(
        "cltcert constants --sigma {}{}{} --seed {} --format {}",
        plain(a.sigma),
        scan_range
            .map(|(lo, hi, step)| format!(" --scan {}:{}:{}", plain(lo), plain(hi), plain(step)))
            .unwrap_or_default(),
        if a.identities { " --identities" } else { "" },
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable { header: &["item", "sigma", "value"], rows },
    )?;

    if let Some(path) = &a.common.plot {
        let series = if let Some(s) = &scan {
            vec![Series {
                label: "c_psi".into(),
                points: s.table.iter().map(|&(x, y)| (x, y)).collect(),
            }]
        } else {
            vec![Series {
                label: "c_psi".into(),
                points: vec![(record.sigma, record.c_psi)],
            }]
        };
        plot::write(path, "constant pipeline", "sigma", "c_psi", &series);
    }
    Ok(format!(
        "constants: sigma {}, R {}, c_psi {}, c_tilde {}, wrote {}",
        plain(a.sigma),
        brief(record.r),
        brief(record.c_psi),
        brief(record.c_tilde),
        a.common.out.display()
    ))
}

fn run_certify(a: CertifyArgs) -> Result<String, Failure> {
    let alpha = check_alpha(a.alpha)?;
    let n_grid = grid::parse_n_grid(&a.n).map_err(Failure::Usage)?;
    let eps = grid::parse_f64_list(&a.epsilon).map_err(Failure::Usage)?;
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(Failure::Usage(format!(
            "confidence must lie in (0, 1), got {}",
            a.confidence
        )));
    }
    let constants = parse_constants(&a.constants)?;
    let spec = ArraySpec::example_alpha(alpha).map_err(run_err)?;
    let cfg = CertifyConfig {
        n_grid: n_grid.clone(),
        samples: a.samples,
        seed: a.common.seed,
        confidence: a.confidence,
        constants,
        epsilon_grid: eps.clone(),
    };
    let cert = certify_bounds(&spec, &cfg).map_err(run_err)?;

    let config = json!({
        "alpha": report::number(alpha),
        "n_grid": n_grid,
        "samples": a.samples,
        "confidence": report::number(a.confidence),
        "constants": a.constants,
        "epsilon_grid": eps.iter().map(|&e| report::number(e)).collect::<Vec<_>>(),
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("certify", a.common.seed, &config);
    body["certificate"] = report::certificate_json(&cert);

    let verdict = report::verdict_name(cert.verdict);
    let mut rows = vec![
        vec!["lower".into(), String::new(), cell(cert.lower), String::new(), String::new()],
        vec!["upper".into(), String::new(), cell(cert.upper), String::new(), String::new()],
        vec![
            "c_tilde".into(),
            String::new(),
            cell(cert.constants.c_tilde()),
            String::new(),
            String::new(),
        ],
        vec!["verdict".into(), String::new(), verdict.into(), String::new(), String::new()],
    ];
    for r in &cert.empirical {
        rows.push(vec![
            "distance".into(),
            r.n.to_string(),
            cell(r.value),
            report::method_name(r.method).into(),
            r.confidence.map(|b| cell(b.half_width)).unwrap_or_default(),
        ]);
    }
    let command_line = format!(
        "cltcert certify --alpha {} --n {} --samples {} --confidence {} --constants {} --epsilon {} --seed {} --format {}",
        plain(alpha),
        join_usize(&n_grid),
        a.samples,
        plain(a.confidence),
        a.constants,
        join_f64(&eps),
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable { header: &["item", "n", "value", "method", "half_width"], rows },
    )?;

    if let Some(path) = &a.common.plot {
        let pts: Vec<(f64, f64)> = cert
            .empirical
            .iter()
            .map(|r| ((r.n as f64).log10(), r.value))
            .collect();
        let span = (
            pts.first().map_or(0.0, |p| p.0) - 0.1,
            pts.last().map_or(1.0, |p| p.0) + 0.1,
        );
        let series = [
            Series { label: "measured".into(), points: pts },
            Series {
                label: "lower".into(),
                points: vec![(span.0, cert.lower), (span.1, cert.lower)],
            },
            Series {
                label: "upper".into(),
                points: vec![(span.0, cert.upper), (span.1, cert.upper)],
            },
        ];
        plot::write(path, "certificate bracket", "log10 n", "distance", &series);
    }
    Ok(format!(
        "certify: alpha {}, lower {}, upper {}, verdict {}, wrote {}",
        plain(alpha),
        brief(cert.lower),
        brief(cert.upper),
        verdict,
        a.common.out.display()
    ))
}

fn run_optimality(a: OptimalityArgs) -> Result<String, Failure> {
    if !(a.p > 0.0 && a.p.is_finite()) {
        return Err(Failure::Usage(format!("p must be positive, got {}", a.p)));
    }
    let alphas = grid::parse_f64_list(&a.alpha).map_err(Failure::Usage)?;
    for &al in &alphas {
        check_alpha(al)?;
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Usage("alpha list must decrease toward 0".into()));
    }
    let constants = parse_constants(&a.constants)?;
    let scan = optimality_scan(a.p, &alphas, constants).map_err(run_err)?;

    let config = json!({
        "p": report::number(a.p),
        "alpha_grid": alphas.iter().map(|&x| report::number(x)).collect::<Vec<_>>(),
        "constants": a.constants,
        "seed": a.common.seed,
        "format": format_name(a.common.format),
    });
    let mut body = report_skeleton("optimality", a.common.seed, &config);
    body["scan"] = report::optimality_json(&scan);

    let rows = scan
        .rows
        .iter()
        .map(|r| vec![cell(r.alpha), cell(r.lower), cell(r.ratio)])
        .collect();
    let command_line = format!(
        "cltcert optimality --p {} --alpha {} --constants {} --seed {} --format {}",
        plain(a.p),
        join_f64(&alphas),
        a.constants,
        a.common.seed,
        format_name(a.common.format),
    );
    output::write_report(
        &a.common.out,
        a.common.format,
        &command_line,
        &config,
        a.common.seed,
        &body,
        &CsvTable { header: &["alpha", "lower", "ratio"], rows },
    )?;

    if let Some(path) = &a.common.plot {
        let series = [Series {
            label: "log10 ratio".into(),
            points: scan
                .rows
                .iter()
                .map(|r| ((1.0 / r.alpha).log10(), r.ratio.log10()))
                .collect(),
        }];
        plot::write(path, "lower bound vs decay target", "log10 1/alpha", "log10 ratio", &series);
    }
    let ratios: Vec<String> = scan.rows.iter().map(|r| brief(r.ratio)).collect();
    Ok(format!(
        "optimality: p {}, ratios {}, wrote {}",
        plain(a.p),
        ratios.join(", "),
        a.common.out.display()
    ))
}
