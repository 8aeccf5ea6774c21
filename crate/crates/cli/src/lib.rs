//! Command-line front end: one run per invocation, writing grid data or
//! iterate listings plus a JSON manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use fracvim::expr::{parse, EquivalenceCheck, Expr, DEFAULT_EQUIVALENCE_SEED};
use fracvim::oracle::{
    compare, solve_fd_with, Boundary, ErrorReport, FdOptions, FdReport, GridField, GridSpec, Memory,
    OracleError, Substeps, DEFAULT_MAX_STEPS,
};
use fracvim::vimcore::{vim_solve_with_cap, FracPoly, ProblemSpec, VimError, DEFAULT_TERM_CAP};

/// Highest iterate index accepted.
pub const MAX_ITERS: usize = 6;
/// Environment variable that relocates relative output paths.
pub const OUTPUT_DIR_ENV: &str = "FRACVIM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Truncated series evaluated on the grid.
    Vim,
    /// Finite-difference reference field.
    Oracle,
    /// Series and reference field plus an error report.
    Compare,
    /// Symbolic terms of every iterate.
    Iterates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Dirichlet,
    Periodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Boundary {
        match b {
            BoundaryArg::Dirichlet => Boundary::Dirichlet,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryArg {
    Auto,
    Exact,
    Soe,
}

/// Solve `cD_t^α u = u_xx + A u^p u_x` by variational iteration or by the
/// finite-difference reference.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "fracvim", version, about)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value = "vim")]
    pub mode: Mode,
    /// Fractional order, 0 < alpha <= 2.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Coefficient of the nonlinear term.
    #[arg(long = "A", default_value_t = -1.0, allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: f64,
    /// Power of u in the nonlinear term (integer for the symbolic modes).
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Initial profile u(x, 0).
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    /// Initial velocity u_t(x, 0), required when alpha > 1.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Last iterate index; the series has iters + 1 terms.
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    /// Largest number of monomials allowed in an iterate.
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    pub term_cap: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 51)]
    pub nx: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 51)]
    pub nt: usize,
    #[arg(long, value_enum, default_value = "dirichlet")]
    pub boundary: BoundaryArg,
    /// Output file; relative paths are placed under $FRACVIM_OUTPUT_DIR
    /// when it is set. Defaults to fracvim-<mode>.<format>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for randomized expression equivalence checks.
    #[arg(long, default_value_t = DEFAULT_EQUIVALENCE_SEED)]
    pub seed: u64,
    /// Compare only up to this time (defaults to t-max).
    #[arg(long)]
    pub t_cut: Option<f64>,
    /// Max-norm tolerance recorded in the compare report.
    #[arg(long, default_value_t = 5e-3)]
    pub tolerance: f64,
    /// Oracle time step as a fraction of the largest stable step.
    #[arg(long, default_value_t = 0.5)]
    pub stability_fraction: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub memory: MemoryArg,
    /// Largest number of oracle time steps.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    /// `error code=<n> kind=<kind> message=<json string>` on one line.
    pub fn to_line(&self) -> String {
        format!(
            "error code={} kind={} message={}",
            self.exit_code(),
            self.kind(),
            serde_json::to_string(&self.to_string()).expect("string serializes")
        )
    }
}

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn from_vim(e: VimError) -> CliError {
    match e {
        VimError::InvalidSpec(msg) => CliError::Config(msg),
        VimError::Iterate { index, source } if matches!(*source, VimError::InvalidSpec(_)) => {
            CliError::Config(format!("iterate u_{index}: {source}"))
        }
        VimError::Iterate { index, source } if matches!(*source, VimError::TermCap { .. }) => {
            CliError::Solver(format!("iterate u_{index}: {source}; raise --term-cap or lower --iters"))
        }
        other => solver(other),
    }
}

fn from_oracle(e: OracleError) -> CliError {
    match e {
        OracleError::InvalidGrid { .. } | OracleError::Unsupported { .. } => CliError::Config(e.to_string()),
        OracleError::TooManySteps { .. } => {
            CliError::Solver(format!("{e}; coarsen the grid, shorten t-max or raise --max-steps"))
        }
        other => solver(other),
    }
}

/// Files written by a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    #[serde(skip)]
    pub report: Option<ErrorReport>,
}

/// Rectangular samples ready for output, `u[t][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

impl Surface {
    pub fn from_field(field: &GridField) -> Surface {
        let grid = field.grid();
        Surface { x: grid.xs(), t: grid.ts(), u: (0..grid.nt).map(|j| field.row(j).to_vec()).collect() }
    }
}

/// `%.12g`, with negative zero printed as `0`.
pub fn format_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `x,t,u` rows in t-major order, or `{"x", "t", "u"}` JSON.
pub fn emit_surface<W: Write>(surface: &Surface, format: Format, mut w: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "x,t,u")?;
            for (j, t) in surface.t.iter().enumerate() {
                for (i, x) in surface.x.iter().enumerate() {
                    writeln!(w, "{},{},{}", format_g12(*x), format_g12(*t), format_g12(surface.u[j][i]))?;
                }
            }
        }
        Format::Json => {
            let nums = |v: &[f64]| v.iter().map(|x| format_g12(*x)).collect::<Vec<_>>().join(",");
            write!(w, "{{\"x\":[{}],\"t\":[{}],\"u\":[", nums(&surface.x), nums(&surface.t))?;
            for (j, row) in surface.u.iter().enumerate() {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "[{}]", nums(row))?;
            }
            writeln!(w, "]}}")?;
        }
    }
    Ok(())
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

#[derive(Debug, Clone, Serialize)]
struct IterateTerm {
    i: u32,
    j: u32,
    exponent: f64,
    coefficient: String,
}

#[derive(Debug, Clone, Serialize)]
struct IterateListing {
    k: usize,
    terms: Vec<IterateTerm>,
}

fn listing(iterates: &[FracPoly], alpha: f64) -> Result<Vec<IterateListing>, CliError> {
    iterates
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let terms = u
                .terms()
                .map_err(from_vim)?
                .into_iter()
                .map(|(e, c)| IterateTerm {
                    i: e.i,
                    j: e.j,
                    exponent: e.value(alpha),
                    coefficient: c.to_string(),
                })
                .collect();
            Ok(IterateListing { k, terms })
        })
        .collect()
}

fn emit_iterates<W: Write>(listings: &[IterateListing], format: Format, mut w: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "k,i,j,exponent,coefficient")?;
            for l in listings {
                for t in &l.terms {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        l.k,
                        t.i,
                        t.j,
                        format_g12(t.exponent),
                        csv_quote(&t.coefficient)
                    )?;
                }
            }
        }
        Format::Json => {
            serde_json::to_writer(&mut w, listings)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Resolves `--out` against the output directory override.
pub fn output_path(config: &RunConfig, env_dir: Option<&Path>) -> PathBuf {
    let name = config.out.clone().unwrap_or_else(|| {
        let mode = match config.mode {
            Mode::Vim => "vim",
            Mode::Oracle => "oracle",
            Mode::Compare => "compare",
            Mode::Iterates => "iterates",
        };
        PathBuf::from(format!("fracvim-{mode}.{}", config.format.extension()))
    });
    match env_dir {
        Some(dir) if name.is_relative() => dir.join(name),
        _ => name,
    }
}

/// `dir/name.ext` -> `dir/name.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

fn parse_expr(name: &str, src: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| CliError::Config(format!("--{name}: {e}")))
}

/// Checks the configuration and builds the problem and grid.
pub fn validate(config: &RunConfig) -> Result<(ProblemSpec, GridSpec), CliError> {
    let g = parse_expr("g", &config.g)?;
    let h = config.h.as_deref().map(|s| parse_expr("h", s)).transpose()?;
    let spec = ProblemSpec::new(config.alpha, config.a, config.p, g, h).map_err(from_vim)?;
    if config.iters > MAX_ITERS {
        return Err(CliError::Config(format!("--iters {} exceeds the limit {MAX_ITERS}", config.iters)));
    }
    let symbolic = config.mode != Mode::Oracle;
    if symbolic {
        spec.integer_p().map_err(from_vim)?;
    }
    let grid =
        GridSpec::new(config.x_min, config.x_max, config.nx, config.t_max, config.nt, config.boundary.into())
            .map_err(from_oracle)?;
    if matches!(config.mode, Mode::Oracle | Mode::Compare) && config.alpha > 1.0 {
        return Err(CliError::Config(format!(
            "mode {:?} needs alpha <= 1, got {}",
            config.mode, config.alpha
        )));
    }
    if let Some(t_cut) = config.t_cut {
        if !(t_cut >= 0.0 && t_cut <= config.t_max) {
            return Err(CliError::Config(format!("--t-cut {t_cut} outside [0, t-max]")));
        }
    }
    if !(config.stability_fraction > 0.0 && config.stability_fraction <= 1.0) {
        return Err(CliError::Config(format!(
            "--stability-fraction {} outside (0, 1]",
            config.stability_fraction
        )));
    }
    Ok((spec, grid))
}

fn fd_options(config: &RunConfig) -> FdOptions {
    FdOptions {
        substeps: Substeps::StabilityFraction { fraction: config.stability_fraction },
        memory: match config.memory {
            MemoryArg::Auto => Memory::Auto,
            MemoryArg::Exact => Memory::Exact,
            MemoryArg::Soe => Memory::SumOfExponentials { tol: 1e-10 },
        },
        max_steps: config.max_steps,
    }
}

/// Re-parses every printed coefficient and checks it against the stored one.
fn check_printed(iterates: &[FracPoly], seed: u64) -> Result<serde_json::Value, CliError> {
    let check = EquivalenceCheck { seed, ..EquivalenceCheck::default() };
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for u in iterates {
        for (_, c) in u.terms().map_err(from_vim)? {
            let printed = parse(&c.to_string()).map_err(solver)?;
            let report = check.check(&c, &printed).map_err(solver)?;
            if !report.equal {
                return Err(CliError::Solver(format!("printed coefficient {c} does not re-parse to itself")));
            }
            worst = worst.max(report.max_deviation);
            checked += 1;
        }
    }
    Ok(json!({ "coefficients": checked, "max_deviation": worst, "samples": check.samples, "tol": check.tol }))
}

/// Executes one run and writes its files.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    run_in(config, env_dir.as_deref())
}

/// As [`run`], with the output directory override given explicitly.
pub fn run_in(config: &RunConfig, env_dir: Option<&Path>) -> Result<RunOutcome, CliError> {
    let (spec, grid) = validate(config)?;
    let out = output_path(config, env_dir);
    let mut outputs = vec![];
    let mut choices = serde_json::Map::new();
    choices.insert(
        "lagrange_multiplier".into(),
        json!("real branch: -(t - tau)^(alpha - 1) / Gamma(alpha); exactly -1 at alpha = 1 and tau - t at alpha = 2"),
    );
    choices.insert("correction_factor".into(), json!(spec.correction_factor().to_string()));
    choices.insert("boundary".into(), json!(Boundary::from(config.boundary)));
    choices.insert("term_cap".into(), json!(config.term_cap));
    choices.insert("iterate_cap".into(), json!(MAX_ITERS));
    choices.insert("float_format".into(), json!("12 significant digits"));
    choices.insert(
        "grid_defaults".into(),
        json!({ "x_min": 0.0, "x_max": 1.0, "nx": 51, "t_max": 1.0, "nt": 51 }),
    );

    let iterates = if config.mode != Mode::Oracle {
        Some(vim_solve_with_cap(&spec, config.iters, config.term_cap).map_err(from_vim)?)
    } else {
        None
    };
    let series = iterates.as_ref().map(|its| its.last().expect("u_0 always present"));
    let mut report = None;
    let mut fd_report: Option<FdReport> = None;

    match config.mode {
        Mode::Vim => {
            let field = GridField::from_series(grid.clone(), series.unwrap()).map_err(from_oracle)?;
            write_file(&out, |w| emit_surface(&Surface::from_field(&field), config.format, w))?;
            outputs.push(out.clone());
        }
        Mode::Iterates => {
            let its = iterates.as_ref().unwrap();
            let listings = listing(its, spec.alpha())?;
            write_file(&out, |w| emit_iterates(&listings, config.format, w))?;
            outputs.push(out.clone());
            choices.insert("printed_coefficient_check".into(), check_printed(its, config.seed)?);
        }
        Mode::Oracle | Mode::Compare => {
            let sol = solve_fd_with(&spec, &grid, &fd_options(config)).map_err(from_oracle)?;
            let fd_path = if config.mode == Mode::Oracle {
                out.clone()
            } else {
                sibling(&out, &format!("fd.{}", config.format.extension()))
            };
            if let Some(series) = series {
                let field = GridField::from_series(grid.clone(), series).map_err(from_oracle)?;
                write_file(&out, |w| emit_surface(&Surface::from_field(&field), config.format, w))?;
                outputs.push(out.clone());
                let t_cut = config.t_cut.unwrap_or(config.t_max);
                let r = compare(series, &sol.field, t_cut).map_err(from_oracle)?;
                let report_path = sibling(&out, "report.json");
                let body = json!({
                    "error": r,
                    "tolerance": config.tolerance,
                    "within_tolerance": r.max_abs <= config.tolerance,
                    "series_terms": config.iters + 1,
                    "oracle": sol.report,
                });
                write_file(&report_path, |w| {
                    serde_json::to_writer_pretty(&mut *w, &body)?;
                    writeln!(w)
                })?;
                outputs.push(report_path);
                report = Some(r);
            }
            write_file(&fd_path, |w| emit_surface(&Surface::from_field(&sol.field), config.format, w))?;
            outputs.push(fd_path);
            choices.insert("stability_fraction".into(), json!(config.stability_fraction));
            fd_report = Some(sol.report);
        }
    }
    if let Some(r) = &fd_report {
        choices.insert("oracle".into(), json!(r));
    }

    let manifest = sibling(&out, "manifest.json");
    let names: Vec<String> = outputs
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let body = json!({
        "tool": "fracvim",
        "version": fracvim::VERSION,
        "config": config,
        "seed": config.seed,
        "choices": choices,
        "outputs": names,
    });
    write_file(&manifest, |w| {
        serde_json::to_writer_pretty(&mut *w, &body)?;
        writeln!(w)
    })?;
    Ok(RunOutcome { outputs, manifest, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(format_g12(0.0), "0");
        assert_eq!(format_g12(-0.0), "0");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(0.02), "0.02");
        assert_eq!(format_g12(-1.5), "-1.5");
        assert_eq!(format_g12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_g12(1e-5), "1e-05");
        assert_eq!(format_g12(123456789012.0), "123456789012");
        assert_eq!(format_g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_g12(0.0001), "0.0001");
        assert_eq!(format_g12(1.2246467991473532e-16), "1.22464679915e-16");
        assert_eq!(format_g12(0.99999999999999), "1");
    }

    #[test]
    fn zero_surface_csv() {
        let s = Surface { x: vec![0.0, 1.0], t: vec![0.0, 1.0], u: vec![vec![0.0, -0.0], vec![0.0, 0.0]] };
        let mut buf = Vec::new();
        emit_surface(&s, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,t,u\n0,0,0\n1,0,0\n0,1,0\n1,1,0\n");
    }

    #[test]
    fn json_surface_is_t_major() {
        let s = Surface {
            x: vec![0.0, 0.5],
            t: vec![0.0, 1.0, 2.0],
            u: vec![vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]],
        };
        let mut buf = Vec::new();
        emit_surface(&s, Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["u"].as_array().unwrap().len(), 3);
        assert_eq!(v["u"][2][1], 1);
    }

    #[test]
    fn siblings_and_env_dir() {
        assert_eq!(
            sibling(Path::new("a/b/run.csv"), "manifest.json"),
            PathBuf::from("a/b/run.manifest.json")
        );
        let config = RunConfig::parse_from(["fracvim", "--alpha", "0.5", "--g", "x", "--out", "s.json"]);
        assert_eq!(output_path(&config, Some(Path::new("/tmp/o"))), PathBuf::from("/tmp/o/s.json"));
        let config = RunConfig::parse_from(["fracvim", "--alpha", "0.5", "--g", "x", "--format", "json"]);
        assert_eq!(output_path(&config, None), PathBuf::from("fracvim-vim.json"));
    }

    #[test]
    fn negative_arguments_parse() {
        let config =
            RunConfig::parse_from(["fracvim", "--alpha", "0.2", "--A", "-1", "--g", "-x", "--x-min", "-2"]);
        assert_eq!((config.a, config.g.as_str(), config.x_min), (-1.0, "-x", -2.0));
    }

    #[test]
    fn validation_errors_are_config_errors() {
        let bad = [
            vec!["--alpha", "0", "--g", "x"],
            vec!["--alpha", "1.5", "--g", "x"],
            vec!["--alpha", "0.5", "--g", "x +"],
            vec!["--alpha", "0.5", "--g", "x", "--iters", "7"],
            vec!["--alpha", "0.5", "--g", "x", "--p", "1.5"],
            vec!["--alpha", "0.5", "--g", "x", "--nx", "2"],
            vec!["--alpha", "1.5", "--g", "x", "--h", "0", "--mode", "oracle"],
        ];
        for args in bad {
            let config = RunConfig::parse_from(std::iter::once("fracvim").chain(args.iter().copied()));
            let err = validate(&config).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
            assert!(!err.to_line().contains('\n'));
        }
        let config = RunConfig::parse_from([
            "fracvim", "--alpha", "0.5", "--g", "x", "--p", "1.5", "--mode", "oracle",
        ]);
        assert!(validate(&config).is_ok());
    }
}
