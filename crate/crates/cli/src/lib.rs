//! Command-line front end: compute entropies, run checks and suites, run
//! estimation experiments and turn saved reports into CSV.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use wcre::empirical::{convergence_experiment, empirical_wce, empirical_wcre, read_sample};
use wcre::harness::{default_catalog, run_check, run_suite, CheckId, CheckInstance, CheckReport, SuiteEntry, Verdict};
use wcre::multivariate::{joint_wce, joint_wcre, log_ratio_integral, ProductWeight};
use wcre::univariate::{alpha_phi, finiteness_certificate, relative_wcre, shannon_entropy, wce, wcre, CertificateParams};
use wcre::{Error, MultivariateModel, QuadratureSpec, UnivariateModel, WeightFunction};

pub mod json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_DIVERGENT: u8 = 2;
pub const EXIT_QUADRATURE: u8 = 3;
/// A check or suite produced at least one FAIL verdict.
pub const EXIT_FAIL: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

/// Confidence level of the bootstrap interval reported by `estimate`.
const CI_LEVEL: f64 = 0.95;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Input(_) | Self::Io { .. } => EXIT_INPUT,
            Self::Numeric(e) => numeric_exit_code(e),
        }
    }
}

fn numeric_exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Input(_) => EXIT_INPUT,
        Error::Divergent(_) => EXIT_DIVERGENT,
        Error::Convergence { .. } | Error::Integrand { .. } => EXIT_QUADRATURE,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "wcre", version, about = "Weighted cumulative (residual) entropies and checks of their inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one quantity for a model and a weight.
    Compute(ComputeArgs),
    /// Run the instances of a catalog file and print their reports.
    Check(CheckArgs),
    /// Run a catalog (or the built-in one) and write the report array.
    Suite(SuiteArgs),
    /// Plug-in estimate from a sample, or the convergence experiment.
    Estimate(EstimateArgs),
    /// Tabulate a saved report array.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Wcre,
    Wce,
    Relative,
    Conditional,
    Mutual,
    #[value(name = "alpha_phi")]
    AlphaPhi,
    Shannon,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Self::Wcre => "wcre",
            Self::Wce => "wce",
            Self::Relative => "relative",
            Self::Conditional => "conditional",
            Self::Mutual => "mutual",
            Self::AlphaPhi => "alpha_phi",
            Self::Shannon => "shannon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Overrides of the default quadrature settings.
#[derive(Debug, Clone, Default, Args)]
pub struct QuadArgs {
    /// Survival mass left beyond the truncation point.
    #[arg(long)]
    pub tail_mass: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Gauss-Legendre points per axis for multivariate integrals.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl QuadArgs {
    fn is_set(&self) -> bool {
        self.tail_mass.is_some() || self.rel_tol.is_some() || self.grid.is_some()
    }

    fn apply(&self, mut spec: QuadratureSpec) -> CliResult<QuadratureSpec> {
        if let Some(t) = self.tail_mass {
            spec.tail_mass = t;
        }
        if let Some(r) = self.rel_tol {
            spec.rel_tol = r;
        }
        if let Some(g) = self.grid {
            spec.grid_points_per_dim = g;
        }
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Model as inline JSON or a path; `relative` takes two.
    #[arg(long, required = true)]
    pub model: Vec<String>,
    /// Weight as inline JSON or a path; an array gives per-axis factors.
    #[arg(long)]
    pub weight: Option<String>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// One check instance or an array of them, inline JSON or a path.
    #[arg(long)]
    pub catalog: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Array of check instances, inline JSON or a path.
    #[arg(long, conflicts_with = "default", required_unless_present = "default")]
    pub catalog: Option<String>,
    /// Run the built-in catalog.
    #[arg(long)]
    pub default: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Single-column CSV sample, or `-` for stdin.
    #[arg(long, required_unless_present = "experiment", conflicts_with = "experiment")]
    pub sample: Option<String>,
    /// Run the convergence experiment against --model instead.
    #[arg(long, requires = "model")]
    pub experiment: bool,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub weight: Option<String>,
    /// wcre or wce; the experiment supports wcre only.
    #[arg(long, value_enum, default_value = "wcre")]
    pub quantity: Quantity,
    /// Comma-separated increasing sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Defaults to csv for the experiment and json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report array written by `suite`.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Check(a) => cmd_check(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wcre: {e}");
            e.exit_code()
        }
    }
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file path.
fn load_text(arg: &str) -> CliResult<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_owned());
    }
    fs::read_to_string(arg).map_err(|source| CliError::Io { path: arg.to_owned(), source })
}

fn load_json<T: DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = load_text(arg)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

enum Model {
    Univariate(UnivariateModel),
    Multivariate(MultivariateModel),
}

fn load_model(arg: &str) -> CliResult<Model> {
    let v: Value = load_json(arg, "model")?;
    if let Ok(m) = serde_json::from_value::<UnivariateModel>(v.clone()) {
        m.validate()?;
        return Ok(Model::Univariate(m));
    }
    match serde_json::from_value::<MultivariateModel>(v) {
        Ok(m) => {
            m.validate()?;
            Ok(Model::Multivariate(m))
        }
        Err(e) => Err(CliError::Input(format!("model is neither a univariate nor a multivariate law: {e}"))),
    }
}

/// A single weight, or per-axis factors when given as an array.
fn load_weight(arg: Option<&str>) -> CliResult<(Value, Vec<WeightFunction>)> {
    let Some(arg) = arg else {
        let w = WeightFunction::unit();
        return Ok((serde_json::to_value(&w).expect("weight serialises"), vec![w]));
    };
    let v: Value = load_json(arg, "weight")?;
    let ws = if v.is_array() {
        serde_json::from_value::<Vec<WeightFunction>>(v.clone())
    } else {
        serde_json::from_value::<WeightFunction>(v.clone()).map(|w| vec![w])
    }
    .map_err(|e| CliError::Input(format!("weight: {e}")))?;
    for w in &ws {
        w.validate()?;
    }
    Ok((v, ws))
}

fn single_weight(ws: &[WeightFunction]) -> CliResult<&WeightFunction> {
    match ws {
        [w] => Ok(w),
        _ => Err(CliError::Input("a univariate quantity takes a single weight".into())),
    }
}

fn product_weight(ws: &[WeightFunction], dim: usize) -> CliResult<ProductWeight> {
    match ws {
        [w] => Ok(ProductWeight::broadcast(w, dim)),
        _ if ws.len() == dim => Ok(ProductWeight(ws.to_vec())),
        _ => Err(CliError::Input(format!("{} weight factors for a {dim}-dimensional model", ws.len()))),
    }
}

/// Write `body` to `out` with a timestamp sidecar, or to stdout.
fn emit(out: Option<&Path>, body: &str, command: &str) -> CliResult<()> {
    let Some(path) = out else {
        let mut stdout = io::stdout().lock();
        return stdout
            .write_all(body.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source });
    };
    let io_err = |p: &Path| {
        let p = p.display().to_string();
        move |source| CliError::Io { path: p, source }
    };
    fs::write(path, body).map_err(io_err(path))?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "command": command,
        "created_unix": created,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut meta_path = path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    let meta_path = PathBuf::from(meta_path);
    fs::write(&meta_path, json::to_string(&meta)).map_err(io_err(&meta_path))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Input(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: Option<f64>) -> String {
    v.map(json::format_f64).unwrap_or_default()
}

struct Computed {
    value: f64,
    error_estimate: Option<f64>,
    extra: BTreeMap<String, Value>,
}

impl Computed {
    fn plain(value: f64) -> Self {
        Self { value, error_estimate: None, extra: BTreeMap::new() }
    }
}

fn evaluate(q: Quantity, models: &[Model], ws: &[WeightFunction], spec: &QuadratureSpec) -> CliResult<Computed> {
    use Model::{Multivariate as Mv, Univariate as Uv};
    let arity = if q == Quantity::Relative { 2 } else { 1 };
    if models.len() != arity {
        return Err(CliError::Input(format!("{} takes {arity} model(s), got {}", q.name(), models.len())));
    }
    let out = match (q, &models[0]) {
        (Quantity::Wcre, Uv(m)) => {
            let phi = single_weight(ws)?;
            let cert = finiteness_certificate(m, phi, &CertificateParams::default(), spec)?;
            let mut extra = BTreeMap::new();
            extra.insert("certificate".to_owned(), serde_json::to_value(cert).expect("certificate serialises"));
            let v = wcre(m, phi, spec)?;
            Computed { value: v.value, error_estimate: Some(v.quadrature.abs_error_estimate), extra }
        }
        (Quantity::Wce, Uv(m)) => {
            let v = wce(m, single_weight(ws)?, spec)?;
            Computed { value: v.value, error_estimate: Some(v.quadrature.abs_error_estimate), extra: BTreeMap::new() }
        }
        (Quantity::Wcre | Quantity::Wce, Mv(m)) => {
            let w = product_weight(ws, m.dim())?;
            let v = if q == Quantity::Wcre { joint_wcre(m, &w, spec)? } else { joint_wce(m, &w, spec)? };
            Computed { value: v.value, error_estimate: Some(v.quadrature.abs_error_estimate), extra: BTreeMap::new() }
        }
        (Quantity::Relative, Uv(f)) => {
            let Uv(g) = &models[1] else {
                return Err(CliError::Input("relative takes two univariate models".into()));
            };
            Computed::plain(relative_wcre(f, g, single_weight(ws)?, spec)?)
        }
        (Quantity::AlphaPhi, Uv(m)) => {
            let a = alpha_phi(m, single_weight(ws)?, spec)?;
            let mut c = Computed::plain(a.value);
            c.extra.insert("degenerate".to_owned(), Value::Bool(a.degenerate));
            c
        }
        (Quantity::Shannon, Uv(m)) => Computed::plain(shannon_entropy(m, spec)?),
        (Quantity::Conditional, Mv(m)) => {
            if m.dim() != 2 {
                return Err(CliError::Input("conditional takes a bivariate model".into()));
            }
            let w = product_weight(ws, 2)?;
            let r = log_ratio_integral(m, &w, &[&[0, 1]], &[&[1]], spec)?;
            Computed { value: -r.value, error_estimate: Some(r.abs_error_estimate), extra: BTreeMap::new() }
        }
        (Quantity::Mutual, Mv(m)) => {
            let w = product_weight(ws, m.dim())?;
            let all: Vec<usize> = (0..m.dim()).collect();
            let singles: Vec<[usize; 1]> = (0..m.dim()).map(|i| [i]).collect();
            let den: Vec<&[usize]> = singles.iter().map(|s| s.as_slice()).collect();
            let r = log_ratio_integral(m, &w, &[&all], &den, spec)?;
            Computed { value: r.value, error_estimate: Some(r.abs_error_estimate), extra: BTreeMap::new() }
        }
        (q, Uv(_)) => return Err(CliError::Input(format!("{} needs a multivariate model", q.name()))),
        (q, Mv(_)) => return Err(CliError::Input(format!("{} needs a univariate model", q.name()))),
    };
    Ok(out)
}

pub fn cmd_compute(a: &ComputeArgs) -> CliResult<u8> {
    let spec = a.quad.apply(QuadratureSpec::default())?;
    let raw_models: Vec<Value> = a.model.iter().map(|m| load_json(m, "model")).collect::<CliResult<_>>()?;
    let models: Vec<Model> = a.model.iter().map(|m| load_model(m)).collect::<CliResult<_>>()?;
    let (raw_weight, ws) = load_weight(a.weight.as_deref())?;

    let mut obj = serde_json::Map::new();
    obj.insert("quantity".into(), Value::from(a.quantity.name()));
    obj.insert(
        "inputs".into(),
        json!({ "models": raw_models, "weight": raw_weight, "spec": serde_json::to_value(spec).expect("spec serialises") }),
    );
    let code = match evaluate(a.quantity, &models, &ws, &spec) {
        Ok(c) => {
            obj.insert("value".into(), json!(c.value));
            obj.insert("error_estimate".into(), json!(c.error_estimate));
            obj.insert("finite".into(), Value::Bool(c.value.is_finite()));
            obj.extend(c.extra);
            EXIT_OK
        }
        Err(CliError::Numeric(Error::Divergent(msg))) => {
            obj.insert("value".into(), Value::Null);
            obj.insert("error_estimate".into(), Value::Null);
            obj.insert("finite".into(), Value::Bool(false));
            obj.insert("message".into(), Value::from(msg));
            EXIT_DIVERGENT
        }
        Err(e) => return Err(e),
    };
    let body = match a.format {
        Format::Json => json::to_string(&Value::Object(obj)),
        Format::Csv => {
            let get = |k: &str| obj.get(k).and_then(Value::as_f64);
            let finite = obj.get("finite").and_then(Value::as_bool).unwrap_or(false);
            csv_text(
                &["quantity", "value", "error_estimate", "finite"],
                &[vec![a.quantity.name().to_owned(), num(get("value")), num(get("error_estimate")), finite.to_string()]],
            )?
        }
    };
    emit(a.out.as_deref(), &body, "compute")?;
    Ok(code)
}

fn load_instances(arg: &str) -> CliResult<Vec<CheckInstance>> {
    let v: Value = load_json(arg, "catalog")?;
    let parsed = if v.is_array() {
        serde_json::from_value(v)
    } else {
        serde_json::from_value(v).map(|i| vec![i])
    };
    parsed.map_err(|e| CliError::Input(format!("catalog: {e}")))
}

fn adjust(instances: &mut [CheckInstance], seed: Option<u64>, quad: &QuadArgs) -> CliResult<()> {
    for inst in instances {
        if let Some(s) = seed {
            inst.seed = s;
        }
        if quad.is_set() {
            inst.spec = quad.apply(inst.spec)?;
        }
    }
    Ok(())
}

const REPORT_COLUMNS: [&str; 9] = ["check_id", "label", "variant", "verdict", "hypothesis_met", "lhs", "rhs", "slack", "tolerance"];

fn report_rows(entries: &[SuiteEntry]) -> Vec<Vec<String>> {
    entries
        .iter()
        .map(|e| match e {
            SuiteEntry::Report(r) => vec![
                r.check_id.name(),
                r.label.clone().unwrap_or_default(),
                r.variant.clone().unwrap_or_default(),
                r.verdict.to_string(),
                r.hypothesis_met.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.slack),
                json::format_f64(r.tolerance),
            ],
            SuiteEntry::Failed { check_id, label, error_kind, .. } => {
                let mut row = vec![check_id.name(), label.clone().unwrap_or_default(), String::new(), format!("ERROR_{}", error_kind.to_uppercase())];
                row.resize(REPORT_COLUMNS.len(), String::new());
                row
            }
        })
        .collect()
}

fn render_entries(entries: &[SuiteEntry], format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(json::to_string(&entries)),
        Format::Csv => csv_text(&REPORT_COLUMNS, &report_rows(entries)),
    }
}

/// Exit code of a finished run: FAIL wins, then the first error, then divergence.
fn entries_exit_code(entries: &[SuiteEntry], divergence_is_error: bool) -> u8 {
    if entries.iter().any(|e| e.report().is_some_and(|r| r.verdict == Verdict::Fail)) {
        return EXIT_FAIL;
    }
    for e in entries {
        match e {
            SuiteEntry::Failed { error_kind, .. } => {
                return match error_kind.as_str() {
                    "convergence" | "integrand" => EXIT_QUADRATURE,
                    "divergent" => EXIT_DIVERGENT,
                    _ => EXIT_INPUT,
                }
            }
            SuiteEntry::Report(r) if divergence_is_error && r.verdict == Verdict::Divergent => return EXIT_DIVERGENT,
            _ => {}
        }
    }
    EXIT_OK
}

pub fn cmd_check(a: &CheckArgs) -> CliResult<u8> {
    let mut instances = load_instances(&a.catalog)?;
    adjust(&mut instances, a.seed, &a.quad)?;
    let entries: Vec<SuiteEntry> = instances
        .iter()
        .map(|inst| match run_check(inst) {
            Ok(r) => SuiteEntry::Report(r),
            Err(e) => SuiteEntry::Failed { check_id: inst.check_id, label: inst.label.clone(), error: e.to_string(), error_kind: e.kind().into() },
        })
        .collect();
    let body = match (a.format, entries.as_slice()) {
        (Format::Json, [one]) => json::to_string(one),
        (f, all) => render_entries(all, f)?,
    };
    emit(a.out.as_deref(), &body, "check")?;
    for e in &entries {
        if let SuiteEntry::Failed { check_id, label, error, .. } = e {
            eprintln!("wcre: {check_id} {}: {error}", label.as_deref().unwrap_or("-"));
        }
    }
    Ok(entries_exit_code(&entries, true))
}

/// One line per check id: instance count and verdict tallies.
pub fn summary_lines(entries: &[SuiteEntry]) -> Vec<String> {
    let mut tally: BTreeMap<CheckId, BTreeMap<String, usize>> = BTreeMap::new();
    for e in entries {
        let (id, key) = match e {
            SuiteEntry::Report(r) => (r.check_id, r.verdict.to_string()),
            SuiteEntry::Failed { check_id, .. } => (*check_id, "ERROR".to_owned()),
        };
        *tally.entry(id).or_default().entry(key).or_default() += 1;
    }
    let mut lines: Vec<String> = tally
        .iter()
        .map(|(id, counts)| {
            let n: usize = counts.values().sum();
            let parts: Vec<String> = counts.iter().map(|(k, c)| format!("{k} {c}")).collect();
            format!("{:<28} {n:>3}  {}", id.name(), parts.join(", "))
        })
        .collect();
    let fails = entries.iter().filter(|e| e.report().is_some_and(|r| r.verdict == Verdict::Fail)).count();
    lines.push(format!("{} instances, {fails} FAIL", entries.len()));
    lines
}

pub fn cmd_suite(a: &SuiteArgs) -> CliResult<u8> {
    let mut instances = match &a.catalog {
        Some(c) => load_instances(c)?,
        None => default_catalog(),
    };
    adjust(&mut instances, a.seed, &a.quad)?;
    let entries = run_suite(&instances, a.jobs)?;
    emit(a.out.as_deref(), &render_entries(&entries, a.format)?, "suite")?;
    let lines = summary_lines(&entries).join("\n") + "\n";
    // keep stdout machine-readable when it carries the report
    if a.out.is_some() {
        print!("{lines}");
    } else {
        eprint!("{lines}");
    }
    Ok(entries_exit_code(&entries, false))
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    quantity: &'a str,
    value: f64,
    n: usize,
    bootstrap_ci: Option<(f64, f64)>,
    level: Option<f64>,
    seed: u64,
}

pub fn cmd_estimate(a: &EstimateArgs) -> CliResult<u8> {
    let (_, ws) = load_weight(a.weight.as_deref())?;
    let phi = single_weight(&ws)?;
    if !matches!(a.quantity, Quantity::Wcre | Quantity::Wce) {
        return Err(CliError::Usage(format!("estimate supports wcre and wce, not {}", a.quantity.name())));
    }
    if a.experiment {
        if a.quantity != Quantity::Wcre {
            return Err(CliError::Usage("the convergence experiment supports wcre only".into()));
        }
        let model = match load_model(a.model.as_deref().expect("clap requires --model"))? {
            Model::Univariate(m) => m,
            Model::Multivariate(_) => return Err(CliError::Input("the experiment needs a univariate model".into())),
        };
        let spec = a.quad.apply(QuadratureSpec::default())?;
        let rows = convergence_experiment(&model, phi, &a.sizes, a.reps, a.seed, &spec)?;
        let body = match a.format.unwrap_or(Format::Csv) {
            Format::Csv => csv_text(
                &["n", "mean_abs_err", "sd"],
                &rows.iter().map(|r| vec![r.n.to_string(), json::format_f64(r.mean_abs_err), json::format_f64(r.sd)]).collect::<Vec<_>>(),
            )?,
            Format::Json => json::to_string(&rows),
        };
        emit(a.out.as_deref(), &body, "estimate")?;
        return Ok(EXIT_OK);
    }
    let path = a.sample.as_deref().expect("clap requires --sample");
    let sample = if path == "-" {
        read_sample(io::stdin().lock())?
    } else {
        let f = fs::File::open(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        read_sample(BufReader::new(f))?
    };
    let level = (sample.len() > 1).then_some(CI_LEVEL);
    let est = match a.quantity {
        Quantity::Wce => empirical_wce(&sample, phi, level, a.seed)?,
        _ => empirical_wcre(&sample, phi, level, a.seed)?,
    };
    let out = EstimateOutput { quantity: a.quantity.name(), value: est.value, n: est.n, bootstrap_ci: est.bootstrap_ci, level: est.level, seed: a.seed };
    let body = match a.format.unwrap_or(Format::Json) {
        Format::Json => json::to_string(&out),
        Format::Csv => {
            let (lo, hi) = est.bootstrap_ci.unzip();
            csv_text(
                &["quantity", "value", "n", "ci_low", "ci_high", "level"],
                &[vec![out.quantity.to_owned(), json::format_f64(est.value), est.n.to_string(), num(lo), num(hi), num(est.level)]],
            )?
        }
    };
    emit(a.out.as_deref(), &body, "estimate")?;
    Ok(EXIT_OK)
}

pub fn cmd_report(a: &ReportArgs) -> CliResult<u8> {
    let path = a.input.display().to_string();
    let entries: Vec<SuiteEntry> = load_json(&path, "report")?;
    let body = match a.format {
        Format::Csv => csv_text(&REPORT_COLUMNS, &report_rows(&entries))?,
        Format::Json => {
            let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
            for e in &entries {
                let (id, key) = match e {
                    SuiteEntry::Report(r) => (r.check_id.name(), r.verdict.to_string()),
                    SuiteEntry::Failed { check_id, .. } => (check_id.name(), "ERROR".to_owned()),
                };
                *counts.entry(id).or_default().entry(key).or_default() += 1;
            }
            json::to_string(&counts)
        }
    };
    emit(a.out.as_deref(), &body, "report")?;
    Ok(EXIT_OK)
}

/// Reports of a finished run, skipping entries that errored.
pub fn reports(entries: &[SuiteEntry]) -> impl Iterator<Item = &CheckReport> {
    entries.iter().filter_map(SuiteEntry::report)
}
