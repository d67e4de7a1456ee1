//! `sot`: compute states over time from quantum processes, validate and
//! inspect them, and invert the construction back to a process.
//!
//! Every command reads one JSON document and produces one JSON artifact plus
//! one JSON report. With `--out` the artifact goes to the file and the report
//! to stdout; without it the artifact goes to stdout and the report to
//! stderr. Errors land on stderr as JSON with exit code 1 (malformed input),
//! 2 (mathematical precondition violated), or 3 (numerical failure).

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

use sot_core::algebra::{partial_trace, AlgebraElement, TensorFactorization};
use sot_core::bloom::BloomKind;
use sot_core::channel::verify;
use sot_core::classical::{classical_extract, q_embed, ProbDist};
use sot_core::extract::{extract_process, in_t_star_chain, is_pdo};
use sot_core::io::{
    from_json_str, paren_tree_from_value, to_json_string, DistJson, ElementJson, ExtractionJson,
    PdoJson, ProcessJson, StochasticJson,
};
use sot_core::nstep::{bloom_paren, yinyang_with_kind, ProcessChain};
use sot_core::qubit_pdo::negativity_witness;
use sot_core::{Complex64, Error, DEFAULT_TOL};

#[derive(Parser)]
#[command(
    name = "sot",
    version,
    about = "States over time: compute, validate, and invert quantum processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the state over time of a process (initial state + channels)
    Compute(ComputeArgs),
    /// Recover the process behind a state over time
    Extract(ExtractArgs),
    /// Check the pseudo-density and extractability conditions
    Validate(IoArgs),
    /// Eigenvalues and negativity of a self-adjoint element
    Spectrum(IoArgs),
    /// Convert classical processes to joint distributions and back
    Classical(IoArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input JSON path
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output path for the artifact; stdout when omitted
    #[arg(long = "out", value_name = "PATH")]
    output: Option<PathBuf>,
    /// Absolute tolerance (overrides SOT_TOL; default 1e-9)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Bloom kind; only symmetric guarantees self-adjoint output
    #[arg(long, value_enum, default_value_t = KindArg::Symmetric)]
    kind: KindArg,
    /// Weight on the right bloom for --kind lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Parenthesization tree as nested arrays, e.g. "[[0,1],2]"
    #[arg(long)]
    paren: Option<String>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Extract even when the membership check fails; the diagnostics then
    /// carry the per-step CPTP verdicts
    #[arg(long)]
    force: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Symmetric,
    Right,
    Left,
    Lambda,
}

struct CliError {
    code: u8,
    payload: Value,
}

impl CliError {
    fn parse(msg: impl std::fmt::Display) -> Self {
        Self { code: 1, payload: json!({ "error": msg.to_string(), "kind": "parse" }) }
    }

    fn with_detail(mut self, key: &str, detail: Value) -> Self {
        self.payload[key] = detail;
        self
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::Parse(_) => (1, "parse"),
            Error::SingularMarginal(_) | Error::Numerical(_) => (3, "numerical"),
            _ => (2, "precondition"),
        };
        Self { code, payload: json!({ "error": e.to_string(), "kind": kind }) }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::parse(e.to_string().trim());
            eprintln!("{}", err.payload);
            return ExitCode::from(err.code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.payload);
            ExitCode::from(err.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Classical(args) => cmd_classical(args),
    }
}

/// Tolerance precedence: --tol flag, then SOT_TOL, then the library default.
fn resolve_tol(io: &IoArgs) -> Result<f64, CliError> {
    let tol = match io.tol {
        Some(t) => t,
        None => match std::env::var("SOT_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::parse(format!("SOT_TOL {s:?}: {e}")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::parse(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn read_input(io: &IoArgs) -> Result<String, CliError> {
    std::fs::read_to_string(&io.input)
        .map_err(|e| CliError::parse(format!("{}: {e}", io.input.display())))
}

/// Writes the artifact and report to their destinations (see module docs).
fn emit(io: &IoArgs, artifact: &impl serde::Serialize, report: &Value) -> Result<(), CliError> {
    let artifact = to_json_string(artifact).map_err(CliError::from)?;
    let report = to_json_string(report).map_err(CliError::from)?;
    match &io.output {
        Some(path) => {
            std::fs::write(path, format!("{artifact}\n"))
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            println!("{report}");
        }
        None => {
            println!("{artifact}");
            eprintln!("{report}");
        }
    }
    Ok(())
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() { json!(v) } else { Value::Null }
}

fn cmd_compute(args: ComputeArgs) -> Result<(), CliError> {
    let tol = resolve_tol(&args.io)?;
    let kind = match (args.kind, args.lambda) {
        (KindArg::Symmetric, None) => BloomKind::Symmetric,
        (KindArg::Right, None) => BloomKind::Right,
        (KindArg::Left, None) => BloomKind::Left,
        (KindArg::Lambda, Some(l)) => BloomKind::lambda(Complex64::new(l, 0.0)),
        (KindArg::Lambda, None) => {
            return Err(CliError::parse("--kind lambda needs --lambda"));
        }
        (_, Some(_)) => {
            return Err(CliError::parse("--lambda is only valid with --kind lambda"));
        }
    };

    let process: ProcessJson = from_json_str(&read_input(&args.io)?).map_err(CliError::from)?;
    let chain = process.to_chain().map_err(CliError::from)?;

    let mut warnings = Vec::new();
    if kind != BloomKind::Symmetric {
        warnings.push(
            "only the symmetric bloom guarantees a self-adjoint state over time".to_string(),
        );
    }
    if !chain.rho().is_state(tol) {
        warnings.push("initial element is not a state at this tolerance".to_string());
    }
    for (i, e) in chain.channels().iter().enumerate() {
        if !verify(e, tol).cptp {
            warnings.push(format!("channel {} is not CPTP at this tolerance", i + 1));
        }
    }

    let t = match &args.paren {
        None => yinyang_with_kind(&chain, kind).map_err(CliError::from)?,
        Some(src) => {
            let v: Value = serde_json::from_str(src)
                .map_err(|e| CliError::parse(format!("--paren: {e}")))?;
            let tree = paren_tree_from_value(&v).map_err(CliError::from)?;
            let map = bloom_paren(kind, &tree, chain.channels()).map_err(CliError::from)?;
            map.apply(chain.rho()).map_err(CliError::from)?
        }
    };

    let fact = chain.factorization();
    let hermiticity_deviation = t.distance(&t.dagger());
    let marginal_deviations: Vec<f64> = (0..fact.num_factors())
        .map(|i| {
            partial_trace(&t, &fact, &[i])
                .map(|m| m.distance(chain.state(i)))
                .map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    let min_eigenvalue = if hermiticity_deviation <= tol {
        json!(t.min_eigenvalue())
    } else {
        Value::Null
    };

    let report = json!({
        "trace": complex_json(t.trace()),
        "hermiticity_deviation": hermiticity_deviation,
        "marginal_deviations": marginal_deviations,
        "min_eigenvalue": min_eigenvalue,
        "warnings": warnings,
    });
    emit(&args.io, &PdoJson::new(&t, &fact), &report)
}

fn pdo_report_json(t: &AlgebraElement, fact: &TensorFactorization, tol: f64) -> Value {
    match is_pdo(t, fact, tol) {
        Err(e) => json!({ "error": e.to_string() }),
        Ok(r) => json!({
            "verdict": r.verdict,
            "selfadjoint": r.selfadjoint,
            "selfadjoint_deviation": r.selfadjoint_deviation,
            "trace_deviation": r.trace_deviation,
            "marginals": r.marginals.iter().map(|m| json!({
                "index": m.index,
                "is_state": m.is_state,
                "min_eigenvalue": finite_or_null(m.min_eigenvalue),
                "trace_deviation": m.trace_deviation,
            })).collect::<Vec<_>>(),
        }),
    }
}

fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let tol = resolve_tol(&args.io)?;
    let pdo: PdoJson = from_json_str(&read_input(&args.io)?).map_err(CliError::from)?;
    let (t, fact) = pdo.to_parts().map_err(CliError::from)?;

    let ext = extract_process(&t, &fact, args.force, tol).map_err(|e| {
        // Membership failures carry the marginal witness report alongside.
        let witness = matches!(e, Error::NotInTStar(_));
        let err = CliError::from(e);
        if witness {
            err.with_detail("pdo", pdo_report_json(&t, &fact, tol))
        } else {
            err
        }
    })?;

    let mut warnings = Vec::new();
    for (i, ok) in ext.cptp.iter().enumerate() {
        if !ok {
            warnings.push(format!("extracted channel {} is not CPTP", i + 1));
        }
    }
    let report = json!({
        "cptp": ext.cptp,
        "choi_min_eig": ext.choi_min_eig,
        "residuals": ext.residuals,
        "warnings": warnings,
    });
    emit(&args.io, &ExtractionJson::from_extraction(&ext), &report)
}

fn cmd_validate(args: IoArgs) -> Result<(), CliError> {
    let tol = resolve_tol(&args)?;
    let pdo: PdoJson = from_json_str(&read_input(&args)?).map_err(CliError::from)?;
    let (t, fact) = pdo.to_parts().map_err(CliError::from)?;

    let r = is_pdo(&t, &fact, tol).map_err(CliError::from)?;
    let t_star = if fact.num_factors() >= 2 {
        let c = in_t_star_chain(&t, &fact, tol).map_err(CliError::from)?;
        json!({
            "verdict": c.verdict,
            "pairwise_ok": c.pairwise_ok,
            "jordan_ok": c.jordan_ok,
            "jordan_deviation": c.jordan_deviation.map(finite_or_null).unwrap_or(Value::Null),
            "conditions_disagree": c.conditions_disagree,
            "pairwise": c.pairwise.iter().map(|p| json!({
                "verdict": p.verdict,
                "cptp": p.cptp,
                "choi_min_eigenvalue": p.choi_min_eigenvalue.map(finite_or_null).unwrap_or(Value::Null),
                "solve_error": p.solve_error,
            })).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };

    let report = json!({
        "pdo": r.verdict,
        "state": t.is_state(tol),
        "selfadjoint": r.selfadjoint,
        "selfadjoint_deviation": r.selfadjoint_deviation,
        "trace_deviation": r.trace_deviation,
        "marginals": r.marginals.iter().map(|m| json!({
            "index": m.index,
            "is_state": m.is_state,
            "min_eigenvalue": finite_or_null(m.min_eigenvalue),
            "trace_deviation": m.trace_deviation,
        })).collect::<Vec<_>>(),
        "t_star": t_star,
    });
    emit(&args, &report, &report)
}

fn cmd_spectrum(args: IoArgs) -> Result<(), CliError> {
    let tol = resolve_tol(&args)?;
    let element: ElementJson = from_json_str(&read_input(&args)?).map_err(CliError::from)?;
    let t = element.to_element().map_err(CliError::from)?;
    let w = negativity_witness(&t, tol).map_err(CliError::from)?;
    let mut eigenvalues = t.eigenvalues();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("hermitian eigenvalues are finite"));
    let report = json!({
        "eigenvalues": eigenvalues,
        "trace": complex_json(t.trace()),
        "min_eigenvalue": w.min_eigenvalue,
        "negativity": w.negativity,
    });
    emit(&args, &report, &report)
}

#[derive(Deserialize)]
struct ClassicalForwardJson {
    dist: DistJson,
    maps: Vec<StochasticJson>,
}

#[derive(Deserialize)]
struct ClassicalBackwardJson {
    joint: DistJson,
    source: Vec<String>,
    target: Vec<String>,
}

fn cmd_classical(args: IoArgs) -> Result<(), CliError> {
    // Tolerance has no role below, but a malformed --tol or SOT_TOL should
    // fail uniformly across commands.
    let _tol = resolve_tol(&args)?;
    let raw = read_input(&args)?;
    if let Ok(fwd) = from_json_str::<ClassicalForwardJson>(&raw) {
        if fwd.maps.is_empty() {
            return Err(CliError::parse("classical: \"maps\" must not be empty"));
        }
        let rho = fwd.dist.to_dist().map_err(CliError::from)?.to_element();
        let channels = fwd
            .maps
            .iter()
            .map(|m| Ok(q_embed(&m.to_map()?)))
            .collect::<Result<Vec<_>, Error>>()
            .map_err(CliError::from)?;
        let chain = ProcessChain::new_raw(rho, channels).map_err(CliError::from)?;
        let t = yinyang_with_kind(&chain, BloomKind::Symmetric).map_err(CliError::from)?;
        let joint = ProbDist::from_element(&t).map_err(CliError::from)?;
        let report = json!({
            "joint": DistJson::from_dist(&joint),
            "quasi": joint.is_quasi(),
        });
        return emit(&args, &report, &report);
    }
    match from_json_str::<ClassicalBackwardJson>(&raw) {
        Ok(bwd) => {
            let joint = bwd.joint.to_quasi_dist().map_err(CliError::from)?;
            let (dist, map) =
                classical_extract(&joint, &bwd.source, &bwd.target).map_err(CliError::from)?;
            let report = json!({
                "dist": DistJson::from_dist(&dist),
                "map": StochasticJson::from_map(&map),
            });
            emit(&args, &report, &report)
        }
        Err(_) => Err(CliError::parse(
            "classical input must be {\"dist\", \"maps\"} or {\"joint\", \"source\", \"target\"}",
        )),
    }
}
