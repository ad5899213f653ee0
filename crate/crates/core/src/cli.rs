//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 counting
//! budget exceeded.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arith::{format_rational, ord_p, Rational};
use crate::density::{
    density_infty, density_na1_odd, density_na1_two, density_report, DensityMethod, DensityReport, Place,
};
use crate::eisenstein::{q_expansion, ExpansionOptions, Pipeline};
use crate::error::{Error, Result};
use crate::lattice::{load_lattice_file, preset, Lattice};
use crate::qexp::{Coefficient, QExpansion};
use crate::validation::{run_formula_vs_oracle_suite, run_modularity_suite, GridConfig, ModularityConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_BUDGET_EXCEEDED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jacobi-eisenstein", version, about = "Fourier coefficients of Jacobi-Eisenstein series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, determinant, level, discriminant group and dual Gram matrix.
    LatticeInfo {
        #[command(flatten)]
        lattice: LatticeSource,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Compute a truncated q-expansion of E_{k,m}.
    Eisenstein(EisensteinArgs),
    /// A local density delta_p(t, L), or delta_infinity with `--p inf`.
    Density {
        #[command(flatten)]
        lattice: LatticeSource,
        /// A prime, or `inf`.
        #[arg(long)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        t: i64,
        /// For N A_1: an integer vector; the density is then the one of the
        /// shifted count with Delta = 4t - sum lambda_i^2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<i64>>,
    },
    /// Run the oracle suite and the transformation-law checks.
    Verify {
        #[arg(long, value_enum, default_value_t = Grid::Default)]
        grid: Grid,
        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n_max: u64,
        /// Norm bound for the theta sums.
        #[arg(long, default_value_t = 8.0)]
        q_trunc: f64,
        /// Perturb one closed-form value (for testing the report contract).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct LatticeSource {
    /// A preset: E8, D4, or <n>A1.
    #[arg(long)]
    pub lattice: Option<String>,
    /// A JSON file `{"name": ..., "gram": [[...]]}`.
    #[arg(long)]
    pub lattice_file: Option<PathBuf>,
}

impl LatticeSource {
    pub fn load(&self) -> Result<Lattice> {
        match (&self.lattice, &self.lattice_file) {
            (Some(name), _) => preset(name),
            (None, Some(path)) => load_lattice_file(path),
            (None, None) => Err(Error::InvalidInput("no lattice given".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct EisensteinArgs {
    #[command(flatten)]
    pub lattice: LatticeSource,
    #[arg(long)]
    pub k: i64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long, default_value_t = 3)]
    pub n_max: u64,
    #[arg(long, value_enum, default_value_t = PipelineArg::Auto)]
    pub pipeline: PipelineArg,
    #[arg(long, default_value_t = 50)]
    pub a_max: u64,
    #[arg(long, default_value_t = 40)]
    pub c_max: u64,
    /// Write the expansion JSON here; without it the JSON goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// List every lambda instead of grouping entries with equal coefficients.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PipelineArg {
    Auto,
    Unimodular,
    Na1,
    General,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::Auto => Pipeline::Auto,
            PipelineArg::Unimodular => Pipeline::Unimodular,
            PipelineArg::Na1 => Pipeline::Na1,
            PipelineArg::General => Pipeline::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Default,
    Extended,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET_EXCEEDED,
        Error::StabilizationFailure { .. } => EXIT_VERIFICATION_FAILED,
        _ => EXIT_INPUT_ERROR,
    }
}

/// Runs a parsed command, writing to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::LatticeInfo { lattice, json } => lattice_info(&lattice.load()?, json, out),
        Command::Eisenstein(args) => eisenstein(&args, out),
        Command::Density { lattice, p, t, lambda } => density(&lattice.load()?, &p, t, lambda.as_deref(), out),
        Command::Verify {
            grid,
            out: path,
            n_max,
            q_trunc,
            inject_fault,
        } => verify(grid, path, n_max, q_trunc, inject_fault, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn lattice_info(l: &Lattice, json: bool, out: &mut dyn Write) -> Result<i32> {
    let dual: Vec<Vec<String>> = l
        .dual_gram()
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect();
    if json {
        let v = serde_json::json!({
            "name": l.name(),
            "rank": l.rank(),
            "det": l.det().to_string(),
            "level": l.level(),
            "discriminant_order": l.discriminant_order().to_string(),
            "dual_gram": dual,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?).map_err(io)?;
    } else {
        writeln!(out, "lattice: {}", l.name()).map_err(io)?;
        writeln!(out, "rank: {}", l.rank()).map_err(io)?;
        writeln!(out, "det: {}", l.det()).map_err(io)?;
        writeln!(out, "level: {}", l.level()).map_err(io)?;
        writeln!(out, "discriminant group order: {}", l.discriminant_order()).map_err(io)?;
        writeln!(out, "dual gram:").map_err(io)?;
        for row in dual {
            writeln!(out, "  [{}]", row.join(", ")).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn coefficient_text(c: &Coefficient) -> String {
    match c {
        Coefficient::Exact(r) => format_rational(r),
        Coefficient::Float { value, error_bound } => format!("{value:.10e} +- {error_bound:.1e}"),
    }
}

fn print_table(e: &QExpansion, raw: bool, out: &mut dyn Write) -> Result<()> {
    if raw {
        writeln!(out, "{:>4}  {:>10}  {:<30}  coefficient", "n", "Delta", "lambda").map_err(io)?;
        for ((n, lam), entry) in &e.entries {
            writeln!(
                out,
                "{n:>4}  {:>10}  {:<30}  {}",
                format_rational(&entry.delta),
                lam.to_string(),
                coefficient_text(&entry.coeff)
            )
            .map_err(io)?;
        }
        return Ok(());
    }
    let mut groups: BTreeMap<(u64, Rational, String), usize> = BTreeMap::new();
    for ((n, _), entry) in &e.entries {
        *groups
            .entry((*n, entry.delta.clone(), coefficient_text(&entry.coeff)))
            .or_default() += 1;
    }
    writeln!(out, "{:>4}  {:>10}  {:>8}  coefficient", "n", "Delta", "#lambda").map_err(io)?;
    for ((n, delta, coeff), count) in groups {
        writeln!(out, "{n:>4}  {:>10}  {count:>8}  {coeff}", format_rational(&delta)).map_err(io)?;
    }
    Ok(())
}

fn eisenstein(args: &EisensteinArgs, out: &mut dyn Write) -> Result<i32> {
    let lattice = args.lattice.load()?;
    if args.k % 2 != 0 || args.k <= 2 + lattice.rank() as i64 {
        return Err(Error::WeightTooSmall {
            k: args.k,
            rank: lattice.rank(),
        });
    }
    let options = ExpansionOptions {
        pipeline: args.pipeline.into(),
        a_max: args.a_max,
        c_max: args.c_max,
    };
    let e = q_expansion(&lattice, args.k, args.m, args.n_max, options)?;
    let json = serde_json::to_string_pretty(&e.to_json())?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            print_table(&e, args.raw, out)?;
        }
        None => writeln!(out, "{json}").map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn method_name(m: DensityMethod) -> &'static str {
    match m {
        DensityMethod::Counting => "counting",
        DensityMethod::GoodPrime => "good_prime",
        DensityMethod::UnimodularLemma => "unimodular_lemma",
        DensityMethod::Na1Odd => "na1_odd",
        DensityMethod::Na1Two => "na1_two",
        DensityMethod::Infinity => "infinity",
    }
}

fn shifted_na1_density(l: &Lattice, p: u64, t: i64, lam: &[i64]) -> Result<DensityReport> {
    if !l.is_na1() {
        return Err(Error::UnsupportedLattice(format!("--lambda needs an N A_1 lattice, got {}", l.name())));
    }
    let n = l.rank();
    if lam.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lam.len(),
        });
    }
    let delta = 4 * t - lam.iter().map(|v| v * v).sum::<i64>();
    let level = match ord_p(delta, p) {
        Some(o) => 2 * o + 3,
        None => 2,
    };
    let (value, method) = if p == 2 {
        (density_na1_two(n, lam, level, delta)?, DensityMethod::Na1Two)
    } else {
        (density_na1_odd(n, p, level, delta)?, DensityMethod::Na1Odd)
    };
    Ok(DensityReport::closed(value, p, method))
}

fn density(l: &Lattice, p: &str, t: i64, lam: Option<&[i64]>, out: &mut dyn Write) -> Result<i32> {
    let report = if p.eq_ignore_ascii_case("inf") || p.eq_ignore_ascii_case("infinity") {
        DensityReport {
            value: density_infty(l, t)?,
            place: Place::Infinity,
            method: DensityMethod::Infinity,
            stabilization_exponent: None,
        }
    } else {
        let p: u64 = p
            .parse()
            .map_err(|_| Error::InvalidInput(format!("--p must be a prime or 'inf', got {p}")))?;
        match lam {
            Some(lam) => shifted_na1_density(l, p, t, lam)?,
            None => density_report(l, p, t)?,
        }
    };
    let place = match report.place {
        Place::Prime(p) => p.to_string(),
        Place::Infinity => "inf".into(),
    };
    writeln!(out, "lattice: {}", l.name()).map_err(io)?;
    writeln!(out, "place: {place}").map_err(io)?;
    writeln!(out, "t: {t}").map_err(io)?;
    writeln!(out, "value: {}", report.value).map_err(io)?;
    writeln!(out, "approx: {:.12e}", report.value.to_f64()).map_err(io)?;
    writeln!(out, "method: {}", method_name(report.method)).map_err(io)?;
    match report.stabilization_exponent {
        Some(a) => writeln!(out, "stabilization exponent: {a}").map_err(io)?,
        None => writeln!(out, "stabilization exponent: n/a").map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn verify(grid: Grid, path: Option<PathBuf>, n_max: u64, q_trunc: f64, inject_fault: bool, out: &mut dyn Write) -> Result<i32> {
    let mut config = match grid {
        Grid::Default => GridConfig::default_grid(),
        Grid::Extended => GridConfig::extended(),
    };
    config.inject_fault = inject_fault;
    let mut report = run_formula_vs_oracle_suite(&config)?;
    report.extend(run_modularity_suite(&ModularityConfig { n_max, q_trunc })?);
    writeln!(out, "{:<28} {:>8} {:>8}", "check", "passed", "total").map_err(io)?;
    for (name, passed, total) in report.summary() {
        writeln!(out, "{name:<28} {passed:>8} {total:>8}").map_err(io)?;
    }
    for c in report.checks.iter().filter(|c| c.name == "slash_invariance" || c.name == "theta_transformation") {
        writeln!(
            out,
            "  {} rel_error={:.2e} tolerance={:.0e}",
            c.grid_point,
            c.rel_error.unwrap_or(f64::NAN),
            c.tolerance.unwrap_or(f64::NAN)
        )
        .map_err(io)?;
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        writeln!(out, "FAILED {} at {}: {} vs {}", c.name, c.grid_point, c.lhs, c.rhs).map_err(io)?;
    }
    writeln!(out, "{} of {} checks passed", report.passed(), report.checks.len()).map_err(io)?;
    if let Some(path) = path {
        std::fs::write(path, serde_json::to_string_pretty(&report.to_json())? + "\n")?;
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFICATION_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<i32>, String) {
        let cli = Cli::try_parse_from(std::iter::once("jacobi-eisenstein").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = run(cli, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn lattice_info_text() {
        let (code, text) = run_args(&["lattice-info", "--lattice", "4A1"]);
        assert_eq!(code.unwrap(), 0);
        assert!(text.contains("det: 16"));
        assert!(text.contains("level: 4"));
        assert!(text.contains("discriminant group order: 16"));
    }

    #[test]
    fn density_examples() {
        let (_, text) = run_args(&["density", "--lattice", "E8", "--p", "3", "--t", "1"]);
        assert!(text.contains("value: 80/81") && text.contains("method: good_prime"), "{text}");
        let (_, text) = run_args(&["density", "--lattice", "E8", "--p", "inf", "--t", "1"]);
        assert!(text.contains("value: (8/3)*pi^4"), "{text}");
        let (_, text) = run_args(&["density", "--lattice", "4A1", "--p", "2", "--t", "1", "--lambda", "1,0,1,0"]);
        assert!(text.contains("value: 1/1\n") && text.contains("method: na1_two"), "{text}");
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::BudgetExceeded { needed: 1, ceiling: 0 }), 3);
        assert_eq!(exit_code(&Error::NotSymmetric { row: 0, col: 1 }), 2);
        let (code, _) = run_args(&["eisenstein", "--lattice", "E8", "--k", "13"]);
        assert!(matches!(code, Err(Error::WeightTooSmall { .. })));
        assert!(Cli::try_parse_from(["x", "eisenstein", "--lattice", "E8", "--lattice-file", "f", "--k", "12"]).is_err());
    }
}
