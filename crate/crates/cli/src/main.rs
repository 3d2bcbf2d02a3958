//! `hsblab`: build zoo matrices, compute hyperplane separation bounds,
//! apply transforms, verify certificates and run the reproduction suite.
//!
//! Exit codes: 0 success, 1 failure, 2 usage error (including a zero
//! matrix), 3 time limit reached, 4 invalid certificate.

mod input;
mod suite;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsblab::bounds::{real_rank, rectangle_cover_bound};
use hsblab::labeled::{matrix_to_json, scalar_to_json};
use hsblab::transforms::{
    add_redundant_row, apply_scaling, col_normalizer, row_normalizer, DiagonalScaling,
    RedundantRowPolicy,
};
use hsblab::zoo::{zonotope_decomposition, Generator};
use hsblab::{
    compute_hsb, dual_from_json, dual_to_json, rho_exact, verify_dual_certificate,
    verify_primal_certificate, Certificate, DynSlackMatrix, HsbError, HsbOptions, HsbStatus, Label,
    LabelData, LabeledSlackMatrix, Rational, Scalar, ScalarMode,
};
use serde_json::json;

use input::{build_cached, default_output_name, load, load_signed, read, write_atomic};

#[derive(Parser)]
#[command(
    name = "hsblab",
    version,
    about = "Hyperplane separation bounds of nonnegative matrices"
)]
struct Cli {
    /// Arithmetic. Defaults to rational for written matrix files and to
    /// float for computations.
    #[arg(long, global = true)]
    mode: Option<ScalarMode>,
    /// Absolute gap at which the engine stops.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a zoo matrix from a generator spec and write it as JSON.
    Zoo {
        spec: String,
        /// Output file; defaults to a name derived from the spec.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the explicit rectangle decomposition of a zonotope family.
        #[arg(long)]
        decomposition_out: Option<PathBuf>,
    },
    /// Compute hsb of a matrix file or generator spec.
    Hsb {
        input: String,
        #[command(flatten)]
        limit: TimeLimit,
        /// Write the primal and dual certificates here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
        /// Ignore the structural symmetries of generator input.
        #[arg(long)]
        no_symmetry: bool,
    },
    /// Largest rectangle sum of a matrix with entries of any sign.
    Rho {
        file: PathBuf,
        #[command(flatten)]
        limit: TimeLimit,
    },
    /// Apply scalings, normalizations and a redundant row, in that order.
    Transform(TransformArgs),
    /// Re-check a certificate file against a matrix.
    Verify {
        input: String,
        cert: PathBuf,
        #[command(flatten)]
        limit: TimeLimit,
    },
    /// Rectangle covering number and real rank.
    Bounds { input: String },
    /// Run the reproduction experiments and write one CSV per table.
    PaperSuite {
        #[arg(long, value_enum, default_value_t = suite::Sizes::Default)]
        sizes: suite::Sizes,
        #[arg(long, default_value = "suite-out")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct TimeLimit {
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl TimeLimit {
    fn duration(&self) -> Option<Duration> {
        self.time_limit.map(Duration::from_secs_f64)
    }
}

#[derive(Args)]
struct TransformArgs {
    input: String,
    /// Positive row factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    scale_rows: Option<Vec<String>>,
    /// Positive column factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    scale_cols: Option<Vec<String>>,
    /// Divide every nonzero row by its largest entry.
    #[arg(long)]
    normalize_rows: bool,
    /// Divide every nonzero column by its largest entry.
    #[arg(long)]
    normalize_cols: bool,
    /// Append the row wS for these nonnegative weights.
    #[arg(long, value_delimiter = ',')]
    add_row: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Policy::Reject)]
    redundant_policy: Policy,
    /// Write the transformed matrix here.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Compute hsb before and after and check the bracket.
    #[arg(long)]
    solve: bool,
    #[command(flatten)]
    limit: TimeLimit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Reject,
    Rescale,
    Allow,
}

impl From<Policy> for RedundantRowPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Reject => RedundantRowPolicy::Reject,
            Policy::Rescale => RedundantRowPolicy::Rescale,
            Policy::Allow => RedundantRowPolicy::Allow,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn certificate(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::failure(format!("{}: {e}", path.display()))
    }
}

impl From<HsbError> for CliError {
    fn from(e: HsbError) -> Self {
        let code = match e {
            HsbError::ZeroMatrix
            | HsbError::Parse(_)
            | HsbError::InvalidArgument(_)
            | HsbError::NegativeEntry { .. }
            | HsbError::EmptyMatrix
            | HsbError::NonPositiveScalar(_)
            | HsbError::RationalTooLarge { .. }
            | HsbError::TooLarge(_) => 2,
            HsbError::TimeLimit => 3,
            HsbError::CertificateInvalid { .. } => 4,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Routes output: text to stdout, or nothing but the JSON value with `--json`.
struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, text: impl Display, value: serde_json::Value) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("serializable")
            );
        } else {
            println!("{text}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hsblab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = Out { json: cli.json };
    let compute_mode = cli.mode.unwrap_or(ScalarMode::Float);
    let opts = HsbOptions::default().with_tol(cli.tol).with_seed(cli.seed);
    match &cli.command {
        Command::Zoo {
            spec,
            out: path,
            decomposition_out,
        } => cmd_zoo(
            &out,
            cli.mode.unwrap_or(ScalarMode::Rational),
            spec,
            path,
            decomposition_out,
        ),
        Command::Hsb {
            input,
            limit,
            cert_out,
            no_symmetry,
        } => {
            let loaded = load(input)?;
            let group = if *no_symmetry {
                None
            } else {
                loaded.symmetry()?
            };
            let mut opts = opts;
            opts.time_limit = limit.duration();
            opts.symmetry = group;
            match loaded.matrix.in_mode(compute_mode) {
                DynSlackMatrix::Rational(s) => cmd_hsb(&out, &s, &opts, cert_out.as_deref()),
                DynSlackMatrix::Float(s) => cmd_hsb(&out, &s, &opts, cert_out.as_deref()),
            }
        }
        Command::Rho { file, limit } => match compute_mode {
            ScalarMode::Rational => cmd_rho::<Rational>(&out, file, limit.duration()),
            ScalarMode::Float => cmd_rho::<f64>(&out, file, limit.duration()),
        },
        Command::Transform(args) => {
            let loaded = load(&args.input)?;
            let mut opts = opts;
            opts.time_limit = args.limit.duration();
            match loaded
                .matrix
                .in_mode(cli.mode.unwrap_or(ScalarMode::Rational))
            {
                DynSlackMatrix::Rational(s) => cmd_transform(&out, &s, args, &opts),
                DynSlackMatrix::Float(s) => cmd_transform(&out, &s, args, &opts),
            }
        }
        Command::Verify { input, cert, limit } => {
            let loaded = load(input)?;
            let text = read(cert)?;
            match loaded.matrix.in_mode(compute_mode) {
                DynSlackMatrix::Rational(s) => {
                    cmd_verify(&out, &s, &text, cli.tol, limit.duration())
                }
                DynSlackMatrix::Float(s) => cmd_verify(&out, &s, &text, cli.tol, limit.duration()),
            }
        }
        Command::Bounds { input } => match load(input)?.matrix.in_mode(compute_mode) {
            DynSlackMatrix::Rational(s) => cmd_bounds(&out, &s),
            DynSlackMatrix::Float(s) => cmd_bounds(&out, &s),
        },
        Command::PaperSuite { sizes, out_dir } => {
            let config = suite::Config {
                sizes: *sizes,
                seed: cli.seed,
                tol: cli.tol,
            };
            suite::run(&out, &config, out_dir)
        }
    }
}

fn cmd_zoo(
    out: &Out,
    mode: ScalarMode,
    spec: &str,
    path: &Option<PathBuf>,
    decomposition_out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let generator: Generator = spec
        .parse()
        .map_err(|e: HsbError| CliError::usage(e.to_string()))?;
    let built = build_cached(&generator)?;
    let path = path.clone().unwrap_or_else(|| default_output_name(spec));
    let matrix = DynSlackMatrix::from(built.clone()).in_mode(mode);
    write_atomic(&path, &matrix.to_json())?;
    let (m, n) = built.matrix.shape();
    let norm = built.matrix.max_abs_entry();
    let density = built.density();
    if let Some(dpath) = decomposition_out {
        let graph_text = match &generator {
            Generator::Zonotope { .. }
            | Generator::Permutahedron { .. }
            | Generator::CompletionTime { .. } => zonotope_graph(&generator)?,
            _ => {
                return Err(CliError::usage(format!(
                    "{} has no explicit decomposition",
                    generator.family()
                )))
            }
        };
        write_atomic(dpath, &dual_to_json(&zonotope_decomposition(&graph_text)?))?;
    }
    out.emit(
        format!(
            "{spec}: {m}x{n}, norm {norm}, density {density:.4}, written to {}",
            path.display()
        ),
        json!({
            "spec": spec,
            "path": path,
            "rows": m,
            "cols": n,
            "norm": scalar_to_json(&norm),
            "density": density,
            "mode": mode.to_string(),
        }),
    );
    Ok(())
}

fn zonotope_graph(generator: &Generator) -> Result<hsblab::zoo::WeightedGraph<Rational>, CliError> {
    use hsblab::zoo::{completion_time_matrix, load_weight_matrix, permutahedron_matrix};
    Ok(match generator {
        Generator::Zonotope { a } => load_weight_matrix(&read(a)?)?,
        Generator::Permutahedron { n } => permutahedron_matrix(*n)?,
        Generator::CompletionTime { p } => completion_time_matrix(p)?,
        _ => unreachable!("caller checks the family"),
    })
}

fn cmd_hsb<T: Scalar>(
    out: &Out,
    s: &LabeledSlackMatrix<T>,
    opts: &HsbOptions,
    cert_out: Option<&Path>,
) -> Result<(), CliError> {
    let r = compute_hsb(&s.matrix, opts)?;
    if let Some(path) = cert_out {
        write_atomic(path, &r.certificate().to_json())?;
    }
    let status = match r.status {
        HsbStatus::Optimal => "optimal",
        HsbStatus::TimeLimit => "time_limit",
    };
    out.emit(
        format!(
            "hsb = {} ({:.9})\ngap = {:.3e}\nupper = {:.9}\niterations = {}, oracle calls = {}, dual terms = {}\nstatus = {status}",
            r.value,
            r.value.as_f64(),
            r.gap.as_f64(),
            r.upper().as_f64(),
            r.iterations,
            r.oracle_calls,
            r.dual_weights.len()
        ),
        json!({
            "value": scalar_to_json(&r.value),
            "gap": scalar_to_json(&r.gap),
            "upper": scalar_to_json(&r.upper()),
            "iterations": r.iterations,
            "oracle_calls": r.oracle_calls,
            "lp_iterations": r.lp_iterations,
            "dual_terms": r.dual_weights.len(),
            "mode": r.mode.to_string(),
            "status": status,
        }),
    );
    if r.status == HsbStatus::TimeLimit {
        return Err(CliError {
            code: 3,
            message: format!(
                "time limit reached; hsb lies in [{:.9}, {:.9}]",
                r.value.as_f64(),
                r.upper().as_f64()
            ),
        });
    }
    Ok(())
}

fn cmd_rho<T: Scalar>(out: &Out, file: &Path, limit: Option<Duration>) -> Result<(), CliError> {
    let x = load_signed::<T>(file)?;
    let r = rho_exact(&x, limit);
    let rows = r.witness.rows_one_based();
    let cols = r.witness.cols_one_based();
    out.emit(
        format!(
            "rho = {}\nrows {rows:?}, cols {cols:?}\nexact = {}, nodes = {}",
            r.value, r.exact, r.nodes_explored
        ),
        json!({
            "value": scalar_to_json(&r.value),
            "rows": rows,
            "cols": cols,
            "exact": r.exact,
            "nodes": r.nodes_explored,
        }),
    );
    if r.exact {
        Ok(())
    } else {
        Err(CliError {
            code: 3,
            message: "time limit reached; value is a lower bound".into(),
        })
    }
}

fn parse_list<T: Scalar>(what: &str, items: &[String]) -> Result<Vec<T>, CliError> {
    items
        .iter()
        .map(|v| T::parse_text(v.trim()).map_err(|e| CliError::usage(format!("{what}: {e}"))))
        .collect()
}

fn cmd_transform<T: Scalar>(
    out: &Out,
    s: &LabeledSlackMatrix<T>,
    args: &TransformArgs,
    opts: &HsbOptions,
) -> Result<(), CliError> {
    let (m, n) = s.matrix.shape();
    let d1 = match &args.scale_rows {
        Some(v) => parse_list("--scale-rows", v)?,
        None => vec![T::one(); m],
    };
    let d2 = match &args.scale_cols {
        Some(v) => parse_list("--scale-cols", v)?,
        None => vec![T::one(); n],
    };
    let mut d = DiagonalScaling::new(d1, d2)?;
    let mut current = apply_scaling(&s.matrix, &d)?;
    if args.normalize_rows {
        let r = row_normalizer(&current);
        d = DiagonalScaling::new(
            d.d1.iter()
                .zip(&r.d1)
                .map(|(a, b)| a.clone() * b.clone())
                .collect(),
            d.d2.clone(),
        )?;
        current = apply_scaling(&current, &r)?;
    }
    if args.normalize_cols {
        let c = col_normalizer(&current);
        d = DiagonalScaling::new(
            d.d1.clone(),
            d.d2.iter()
                .zip(&c.d2)
                .map(|(a, b)| a.clone() * b.clone())
                .collect(),
        )?;
        current = apply_scaling(&current, &c)?;
    }
    if current.is_zero() {
        return Err(HsbError::ZeroMatrix.into());
    }
    let norm_s = s.matrix.max_abs_entry();
    let norm_scaled = current.max_abs_entry();
    let inv = d.inverse();
    let lower_factor = norm_s.clone() / (inv.norm_d1() * norm_scaled.clone() * inv.norm_d2());
    let mut upper_factor = Some(d.norm_d1() * norm_s * d.norm_d2() / norm_scaled);
    let mut labels = s.row_labels.clone();
    if let Some(w) = &args.add_row {
        let w: Vec<T> = parse_list("--add-row", w)?;
        let report = add_redundant_row(&current, &w, args.redundant_policy.into())?;
        upper_factor = match (upper_factor, report.upper_factor) {
            (Some(u), Some(f)) => Some(u * f),
            _ => None,
        };
        let combo = report
            .w
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_pos())
            .map(|(i, v)| (i + 1, v.to_text()));
        labels.push(Label::with(
            "redundant",
            LabelData::Combination(combo.collect()),
        ));
        current = report.matrix;
    }
    let transformed = LabeledSlackMatrix::new(current, labels, s.col_labels.clone())?;
    if let Some(path) = &args.out {
        write_atomic(path, &matrix_to_json(&transformed))?;
    }
    let upper_text = upper_factor
        .as_ref()
        .map_or("none".to_string(), |u| format!("{:.9}", u.as_f64()));
    let mut text = format!(
        "{}x{} -> {}x{}\nhsb(S') / hsb(S) in [{:.9}, {upper_text}]",
        m,
        n,
        transformed.matrix.rows(),
        n,
        lower_factor.as_f64()
    );
    let mut value = json!({
        "rows": transformed.matrix.rows(),
        "cols": n,
        "lower_factor": scalar_to_json(&lower_factor),
        "upper_factor": upper_factor.as_ref().map(scalar_to_json),
    });
    if args.solve {
        let before = compute_hsb(&s.matrix, opts)?;
        let after = compute_hsb(&transformed.matrix, opts)?;
        let eps = T::tol(opts.tol);
        let holds = lower_factor.clone() * before.value.clone() <= after.upper() + eps.clone()
            && upper_factor
                .as_ref()
                .is_none_or(|u| after.value <= u.clone() * before.upper() + eps.clone());
        text.push_str(&format!(
            "\nhsb(S) = {:.9}, hsb(S') = {:.9}, bracket {}",
            before.value.as_f64(),
            after.value.as_f64(),
            if holds { "holds" } else { "VIOLATED" }
        ));
        value["hsb_before"] = scalar_to_json(&before.value);
        value["hsb_after"] = scalar_to_json(&after.value);
        value["bracket_holds"] = json!(holds);
        out.emit(text, value);
        if !holds {
            return Err(CliError::failure("transform bracket violated"));
        }
        return Ok(());
    }
    out.emit(text, value);
    Ok(())
}

fn cmd_verify<T: Scalar>(
    out: &Out,
    s: &LabeledSlackMatrix<T>,
    text: &str,
    tol: f64,
    limit: Option<Duration>,
) -> Result<(), CliError> {
    let (m, n) = s.matrix.shape();
    let invalid = |e: HsbError| match e {
        HsbError::ZeroMatrix | HsbError::TimeLimit => CliError::from(e),
        other => CliError::certificate(other.to_string()),
    };
    let has_primal = serde_json::from_str::<serde_json::Value>(text)
        .map_err(|e| CliError::certificate(e.to_string()))?
        .get("primal_X")
        .is_some();
    if !has_primal {
        let dual = dual_from_json::<T>(text, m, n).map_err(invalid)?;
        let upper = verify_dual_certificate(&s.matrix, &dual).map_err(invalid)?;
        out.emit(
            format!(
                "PASS decomposition of {} rectangles, upper bound {upper} ({:.9})",
                dual.len(),
                upper.as_f64()
            ),
            json!({ "pass": true, "upper": scalar_to_json(&upper), "dual_terms": dual.len() }),
        );
        return Ok(());
    }
    let cert = Certificate::<T>::from_json(text).map_err(invalid)?;
    let upper = verify_dual_certificate(&s.matrix, &cert.dual).map_err(invalid)?;
    let lower = verify_primal_certificate(&s.matrix, &cert.primal_x, limit).map_err(invalid)?;
    let eps = T::tol(tol);
    if cert.value > lower.clone() + T::tol(1e-9) {
        return Err(CliError::certificate(format!(
            "claimed value {} exceeds the recomputed primal bound {lower}",
            cert.value
        )));
    }
    if lower > upper.clone() + T::tol(1e-9) {
        return Err(CliError::certificate(format!(
            "primal bound {lower} exceeds dual bound {upper}"
        )));
    }
    let gap = T::max_of(T::zero(), upper.clone() - lower.clone());
    let within = gap <= eps;
    out.emit(
        format!(
            "PASS {:.9} <= hsb <= {:.9}, gap {:.3e}{}",
            lower.as_f64(),
            upper.as_f64(),
            gap.as_f64(),
            if within { "" } else { " (above tolerance)" }
        ),
        json!({
            "pass": true,
            "lower": scalar_to_json(&lower),
            "upper": scalar_to_json(&upper),
            "gap": scalar_to_json(&gap),
            "within_tol": within,
        }),
    );
    Ok(())
}

fn cmd_bounds<T: Scalar>(out: &Out, s: &LabeledSlackMatrix<T>) -> Result<(), CliError> {
    let cover = rectangle_cover_bound(&s.matrix)?;
    let rank = real_rank(&s.matrix);
    out.emit(
        format!(
            "rectangle cover: {} ({}; best cover {})\nreal rank: {rank}",
            cover.lower,
            if cover.exact { "exact" } else { "lower bound" },
            cover.upper
        ),
        json!({
            "rc_lower": cover.lower,
            "rc_upper": cover.upper,
            "rc_exact": cover.exact,
            "real_rank": rank,
        }),
    );
    Ok(())
}
