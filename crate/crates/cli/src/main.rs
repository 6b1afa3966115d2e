use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use orthowg::exec::{run_with, Workers};
use orthowg::expansion::{
    asymptotic_moment, combine_single_traces, evaluate_moment, expand_moment, moment_exact, moment_float,
    trace_cumulant, tr_to_tr_unnormalized, DeterministicOracle, Exact, Float, MatrixTraces, DEFAULT_TERM_CAP,
};
use orthowg::expr::{ExpressionFile, MatrixSet, TraceExpression};
use orthowg::matrix::mc_moment;
use orthowg::scalar::format_rational;
use orthowg::setpart::YoungDiagram;
use orthowg::verify::{run_suite, VerifyConfig, SUITES};
use orthowg::weingarten::{weingarten_table_capped, MAX_WG_N};
use orthowg::{Error, Result};

#[derive(Parser)]
#[command(name = "orthowg", version, about = "Exact moments and cumulants of traces of Haar orthogonal words")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Maximum number of expansion terms.
    #[arg(long = "cap-terms", global = true, default_value_t = DEFAULT_TERM_CAP)]
    cap_terms: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Weingarten table for `n` points, or one entry of it.
    Wg {
        #[arg(long)]
        n: usize,
        /// Young diagram such as `3,1`.
        #[arg(long)]
        lambda: Option<String>,
        /// Also evaluate at this `N`.
        #[arg(long)]
        eval: Option<i64>,
    },
    /// List every term of the genus expansion.
    Expand {
        #[arg(long)]
        expr: PathBuf,
    },
    /// `E[tr_φ]` for an expression file.
    Moment {
        #[arg(long)]
        expr: PathBuf,
        /// Matrix file overriding the matrices in `--expr`.
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Print the large-`N` limit functional instead.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Joint cumulant of the `Tr` of each trace in the file.
    Cumulant {
        #[arg(long)]
        exprs: PathBuf,
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
    },
    /// Run verification suites.
    Verify {
        /// Suite name, comma-separated list, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// With `--suite mc`: compare this expression instead of the built-in set.
        #[arg(long)]
        expr: Option<PathBuf>,
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of random expressions in the oracle battery.
        #[arg(long, default_value_t = 60)]
        battery: usize,
    },
}

enum Failure {
    Error(Error),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::CapExceeded { .. } => 3,
        Error::Pole { .. } => 4,
        _ => 2,
    }
}

fn metadata(cli: &Cli, extra: Value) -> Value {
    let mut m = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "caps": { "terms": cli.cap_terms, "wg_n": MAX_WG_N },
    });
    if let (Some(obj), Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    m
}

fn read_file(path: &Path) -> Result<ExpressionFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Expression file plus an optional separate matrix file.
fn load(expr: &Path, matrices: Option<&Path>) -> Result<ExpressionFile> {
    let mut f = read_file(expr)?;
    if let Some(m) = matrices {
        let text = std::fs::read_to_string(m)?;
        f.matrices = serde_json::from_str(&text)?;
    }
    Ok(f)
}

fn check_dim<T: orthowg::scalar::Scalar>(set: &MatrixSet<T>, n: Option<usize>) -> Result<()> {
    match n {
        Some(n) if n != set.dim => Err(Error::Dimension(format!(
            "--N {n} but the matrices are {d}×{d}",
            d = set.dim
        ))),
        _ => Ok(()),
    }
}

/// `tr(X1 X3^T X5)` for a vertex cycle.
fn vertex_word(expr: &TraceExpression, cycle: &[i32]) -> String {
    let factors: Vec<String> = cycle
        .iter()
        .filter_map(|&k| expr.resolve(k))
        .map(|(l, t)| if t { format!("X{l}^T") } else { format!("X{l}") })
        .collect();
    if factors.is_empty() {
        "tr(I)".into()
    } else {
        format!("tr({})", factors.join(" "))
    }
}

fn cmd_wg(cli: &Cli, n: usize, lambda: Option<&str>, eval: Option<i64>) -> Result<Value> {
    let table = weingarten_table_capped(n, MAX_WG_N)?;
    let only = lambda.map(YoungDiagram::parse).transpose()?;
    if let Some(l) = &only {
        if 2 * l.weight() != n {
            return Err(Error::Invalid(format!("{l} is not a partition of {}", n / 2)));
        }
    }
    let mut entries = Vec::new();
    for (l, w) in table.entries() {
        if only.as_ref().is_some_and(|o| o != l) {
            continue;
        }
        let normalized = table.wg(l).expect("entry present");
        let mut e = json!({
            "lambda": l.to_string(),
            "Wg": w.to_string(),
            "wg": normalized.to_string(),
            "wg_limit": normalized.limit().map(|v| format_rational(&v)),
        });
        if let Some(n0) = eval {
            e["Wg_at_N"] = json!(format_rational(&w.eval_i64(n0)?));
            e["wg_at_N"] = json!(format_rational(&normalized.eval_i64(n0)?));
        }
        entries.push(e);
    }
    Ok(json!({
        "metadata": metadata(cli, json!({ "command": "wg", "eval_N": eval })),
        "n": n,
        "entries": entries,
    }))
}

fn cmd_expand(cli: &Cli, path: &Path) -> Result<Value> {
    let e = read_file(path)?.expression()?;
    let terms = expand_moment(&e, cli.cap_terms)?;
    let rendered: Vec<Value> = terms
        .iter()
        .map(|t| {
            let mut v = serde_json::to_value(t)?;
            v["vertex_traces"] = json!(t.vertices.iter().map(|c| vertex_word(&e, c)).collect::<Vec<_>>());
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(json!({
        "metadata": metadata(cli, json!({ "command": "expand" })),
        "phi": e.phi().to_string(),
        "term_count": terms.len(),
        "terms": rendered,
    }))
}

fn cmd_moment(cli: &Cli, expr: &Path, matrices: Option<&Path>, n: Option<usize>, mode: Mode, asym: bool) -> Result<Value> {
    let f = load(expr, matrices)?;
    let e = f.expression()?;
    let meta = metadata(cli, json!({ "command": "moment", "mode": format!("{mode:?}").to_lowercase() }));
    if asym {
        let lim = asymptotic_moment(&e, cli.cap_terms)?;
        let terms: Vec<Value> = lim
            .terms
            .iter()
            .map(|t| {
                json!({
                    "coefficient": format_rational(&t.coefficient),
                    "vertices": t.vertices,
                    "traces": t.vertices.iter().map(|c| vertex_word(&e, c)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut out = json!({ "metadata": meta, "limit": terms });
        if !f.matrices.is_empty() {
            let set = f.exact_matrices()?;
            out["limit_value"] = json!(format_rational(&lim.evaluate(&MatrixTraces::new(&e, &set)?)?));
        }
        return Ok(out);
    }
    let (value, unnormalized, dim) = match mode {
        Mode::Exact => {
            let set = f.exact_matrices()?;
            check_dim(&set, n)?;
            let v = moment_exact(&e, &set, cli.cap_terms)?;
            let u = tr_to_tr_unnormalized(v.clone(), &e, &Exact(set.dim as i64));
            (json!(format_rational(&v)), json!(format_rational(&u)), set.dim)
        }
        Mode::Float => {
            let set = f.float_matrices()?;
            check_dim(&set, n)?;
            let v = moment_float(&e, &set, cli.cap_terms)?;
            let u = tr_to_tr_unnormalized(v, &e, &Float(set.dim as i64));
            (json!(v), json!(u), set.dim)
        }
    };
    Ok(json!({
        "metadata": meta,
        "N": dim,
        "moment_tr": value,
        "moment_Tr": unnormalized,
    }))
}

fn cmd_cumulant(cli: &Cli, path: &Path, matrices: Option<&Path>, n: Option<usize>, mode: Mode) -> Result<Value> {
    let f = load(path, matrices)?;
    let singles: Vec<TraceExpression> = f
        .traces
        .iter()
        .map(|t| TraceExpression::single(t.clone()))
        .collect::<Result<_>>()?;
    let both = combine_single_traces(&singles)?;
    let value = match mode {
        Mode::Exact => {
            let set = f.exact_matrices()?;
            check_dim(&set, n)?;
            let tr = MatrixTraces::new(&both, &set)?;
            let k = trace_cumulant(&both, &DeterministicOracle { traces: &tr }, &Exact(set.dim as i64), cli.cap_terms)?;
            json!(format_rational(&k))
        }
        Mode::Float => {
            let set = f.float_matrices()?;
            check_dim(&set, n)?;
            let tr = MatrixTraces::new(&both, &set)?;
            json!(trace_cumulant(&both, &DeterministicOracle { traces: &tr }, &Float(set.dim as i64), cli.cap_terms)?)
        }
    };
    Ok(json!({
        "metadata": metadata(cli, json!({ "command": "cumulant", "mode": format!("{mode:?}").to_lowercase() })),
        "order": singles.len(),
        "cumulant_Tr": value,
    }))
}

/// `{exact, mc_mean, mc_se, z_score}` for one expression.
fn mc_single(cli: &Cli, path: &Path, matrices: Option<&Path>, n: Option<usize>, samples: usize, seed: u64) -> Result<Value> {
    let f = load(path, matrices)?;
    let e = f.expression()?;
    let fset = f.float_matrices()?;
    check_dim(&fset, n)?;
    let exact = match f.exact_matrices() {
        Ok(set) => orthowg::scalar::Scalar::from_rational(&moment_exact(&e, &set, cli.cap_terms)?),
        Err(Error::Invalid(_)) => evaluate_moment(&e, &MatrixTraces::new(&e, &fset)?, &Float(fset.dim as i64), cli.cap_terms)?,
        Err(other) => return Err(other),
    };
    let exact: f64 = exact;
    let est = mc_moment(&e, &fset, samples, seed)?;
    let z = (est.mean - exact) / est.std_error;
    Ok(json!({
        "suite": "mc",
        "passed": (est.mean - exact).abs() <= 5.0 * est.std_error,
        "N": fset.dim,
        "exact": exact,
        "mc_mean": est.mean,
        "mc_se": est.std_error,
        "z_score": z,
        "samples": samples,
        "generator": est.generator,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cli: &Cli,
    suite: &str,
    expr: Option<&Path>,
    matrices: Option<&Path>,
    n: Option<usize>,
    samples: usize,
    seed: u64,
    battery: usize,
) -> std::result::Result<Value, Failure> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        suite.split(',').map(str::trim).collect()
    };
    let cfg = VerifyConfig {
        seed,
        samples,
        battery,
        cap_terms: cli.cap_terms,
        ..VerifyConfig::default()
    };
    let mut reports = Vec::new();
    for name in &names {
        if let (&"mc", Some(path)) = (name, expr) {
            reports.push(mc_single(cli, path, matrices, n, samples, seed)?);
        } else {
            reports.push(serde_json::to_value(run_suite(name, &cfg)?).map_err(Error::from)?);
        }
    }
    let passed = reports.iter().all(|r| r["passed"] == json!(true));
    let out = json!({
        "metadata": metadata(cli, json!({
            "command": "verify",
            "suites": names,
            "seed": seed,
            "samples": samples,
            "battery": battery,
        })),
        "passed": passed,
        "reports": reports,
    });
    if passed {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn dispatch(cli: &Cli) -> std::result::Result<Value, Failure> {
    match &cli.command {
        Command::Wg { n, lambda, eval } => Ok(cmd_wg(cli, *n, lambda.as_deref(), *eval)?),
        Command::Expand { expr } => Ok(cmd_expand(cli, expr)?),
        Command::Moment {
            expr,
            matrices,
            n,
            mode,
            asymptotic,
        } => Ok(cmd_moment(cli, expr, matrices.as_deref(), *n, *mode, *asymptotic)?),
        Command::Cumulant { exprs, matrices, n, mode } => Ok(cmd_cumulant(cli, exprs, matrices.as_deref(), *n, *mode)?),
        Command::Verify {
            suite,
            expr,
            matrices,
            n,
            samples,
            seed,
            battery,
        } => cmd_verify(cli, suite, expr.as_deref(), matrices.as_deref(), *n, *samples, *seed, *battery),
    }
}

fn emit(cli: &Cli, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run_with(Workers::new(cli.workers), || dispatch(&cli));
    let (value, code) = match result {
        Ok(v) => (v, 0),
        Err(Failure::Verification(v)) => (v, 5),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit(&cli, &value) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    ExitCode::from(code)
}
