//! `cartan`: analyze and compare contact 2-distributions on R³.
//!
//! Exit codes: 0 success, 1 input or computation error, 2 holonomic or
//! mixed-type input.

mod input;
mod report;

use std::process::ExitCode;

use cartan_core::corpus::{default_grid, BUILTINS};
use cartan_core::reduction::{classify, compare_reports, ClassKind, ReductionError};
use cartan_core::{reduce, Point, Tolerances};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use input::{InputError, InputSpec};
use report::{Analysis, CorpusRow, Summary};

#[derive(Debug, Parser)]
#[command(
    name = "cartan",
    version,
    about = "Cartan reduction of sub-Riemannian contact distributions on R^3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Sample points overriding the input, "x,y,z;x,y,z;...".
    #[arg(long, global = true, conflicts_with = "grid")]
    points: Option<String>,
    /// Sample grid overriding the input, "lo,hi,n;lo,hi,n;lo,hi,n" for x, y, z.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Absolute tolerance for identities that are exact in exact arithmetic.
    #[arg(long, global = true)]
    tol_identity: Option<f64>,
    /// Relative tolerance for regressions against closed forms.
    #[arg(long, global = true)]
    tol_regression: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce one distribution and report M at every sample point.
    Analyze {
        /// Spec file (cartan-contact/1 JSON) or builtin:<name>.
        input: String,
    },
    /// Screen two distributions by the sampled range of M.
    Compare { a: String, b: String },
    /// Run every builtin against its closed-form invariant.
    Corpus {
        /// List the builtins and exit.
        #[arg(long)]
        corpus_list: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    /// Holonomic or mixed-type input.
    #[error(transparent)]
    Rejected(ReductionError),
    #[error(transparent)]
    Reduction(ReductionError),
    #[error("residual {what} = {value:e} at {point} exceeds the identity tolerance {tol:e}")]
    Identity {
        what: &'static str,
        value: f64,
        point: Point,
        tol: f64,
    },
    #[error("corpus regression failed: name={name} point={point} expected={expected} got={got}")]
    Corpus {
        name: String,
        point: String,
        expected: String,
        got: String,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Rejected(_) => 2,
            _ => 1,
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Holonomic { .. } | ReductionError::MixedType { .. } => CliError::Rejected(e),
            other => CliError::Reduction(other),
        }
    }
}

struct Overrides {
    points: Option<Vec<Point>>,
    identity: Option<f64>,
    regression: Option<f64>,
}

impl Overrides {
    fn from_cli(cli: &Cli) -> Result<Self, InputError> {
        let points = match (&cli.points, &cli.grid) {
            (Some(p), _) => Some(input::parse_points_flag(p)?),
            (None, Some(g)) => Some(input::parse_grid_flag(g)?),
            (None, None) => None,
        };
        let positive = |flag: &'static str, v: Option<f64>| match v {
            Some(t) if !(t.is_finite() && t > 0.0) => Err(InputError::Flag {
                flag,
                what: format!("must be a positive number, got {t}"),
            }),
            _ => Ok(v),
        };
        Ok(Overrides {
            points,
            identity: positive("--tol-identity", cli.tol_identity)?,
            regression: positive("--tol-regression", cli.tol_regression)?,
        })
    }

    fn apply(&self, spec: &mut InputSpec) {
        if let Some(p) = &self.points {
            spec.points = p.clone();
        }
        self.apply_tol(&mut spec.tol);
    }

    fn apply_tol(&self, tol: &mut Tolerances) {
        if let Some(t) = self.identity {
            tol.identity = t;
        }
        if let Some(t) = self.regression {
            tol.regression = t;
        }
    }
}

fn emit(format: Format, json: impl FnOnce() -> String, table: impl FnOnce() -> String) {
    print!("{}", if format == Format::Json { json() } else { table() });
}

fn analyze(cli: &Cli, ov: &Overrides, arg: &str) -> Result<(), CliError> {
    let mut spec = input::load(arg)?;
    ov.apply(&mut spec);
    let d = &spec.distribution;
    let class = classify(d, &spec.points)?;
    if class.kind != ClassKind::Contact {
        let a = Analysis::from_rejected(&d.name, &class);
        emit(cli.format, || a.json(), || a.table());
        return Err(rejection(&d.name, class.kind).into());
    }
    let r = reduce(d, &spec.points)?;
    let a = Analysis::from_report(&r);
    emit(cli.format, || a.json(), || a.table());
    for s in r.ok_samples() {
        let res = s.residuals.expect("ok samples carry residuals");
        for (what, value) in [("dd_eta3", res.dd_eta3), ("q1_minus_p2", res.q1_minus_p2)] {
            if value.abs() > spec.tol.identity {
                return Err(CliError::Identity {
                    what,
                    value,
                    point: s.point,
                    tol: spec.tol.identity,
                });
            }
        }
    }
    Ok(())
}

fn rejection(name: &str, kind: ClassKind) -> ReductionError {
    let name = name.to_string();
    if kind == ClassKind::Holonomic {
        ReductionError::Holonomic { name }
    } else {
        ReductionError::MixedType { name }
    }
}

fn compare(cli: &Cli, ov: &Overrides, a: &str, b: &str) -> Result<(), CliError> {
    let mut sa = input::load(a)?;
    let sb = input::load(b)?;
    ov.apply(&mut sa);
    let points = sa.points.clone();
    let ra = reduce(&sa.distribution, &points)?;
    let rb = reduce(&sb.distribution, &points)?;
    let c = compare_reports(&ra, &rb, &sa.tol);
    let (xa, xb) = (Summary::of_report(&ra), Summary::of_report(&rb));
    let (pa, pb) = ((ra.name.as_str(), &xa), (rb.name.as_str(), &xb));
    emit(
        cli.format,
        || report::comparison_json(pa, pb, &c),
        || report::comparison_table(pa, pb, &c),
    );
    Ok(())
}

fn corpus(cli: &Cli, ov: &Overrides, list: bool) -> Result<(), CliError> {
    if list {
        for b in &BUILTINS {
            println!("{:<12} {}", b.name, b.description);
        }
        return Ok(());
    }
    let points = ov.points.clone().unwrap_or_else(default_grid);
    let mut tol = Tolerances::default();
    ov.apply_tol(&mut tol);
    let mut rows = Vec::new();
    let mut first_failure = None;
    for b in &BUILTINS {
        let d = b.distribution();
        let class = classify(&d, &points)?;
        let mut row = CorpusRow {
            name: b.name,
            classification: class.kind.as_str(),
            t312: None,
            m: None,
            pass: class.kind == b.expected_class,
        };
        if !row.pass {
            first_failure.get_or_insert(CliError::Corpus {
                name: b.name.into(),
                point: "-".into(),
                expected: b.expected_class.as_str().into(),
                got: class.kind.as_str().into(),
            });
        }
        if row.pass && class.kind == ClassKind::Contact {
            let r = reduce(&d, &points)?;
            let abs_t: Vec<f64> = r.ok_samples().filter_map(|s| s.t312).map(f64::abs).collect();
            row.t312 = abs_t.iter().fold(None, |acc: Option<(f64, f64)>, &t| match acc {
                None => Some((t, t)),
                Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
            });
            row.m = r.m_range();
            if let Some(want) = b.invariant_field() {
                for s in &r.samples {
                    let expected = want.evaluate(s.point).map_err(ReductionError::from)?;
                    let fail = match s.m {
                        Some(got) => !tol.regression_ok(got, expected),
                        None => true,
                    };
                    if fail {
                        row.pass = false;
                        first_failure.get_or_insert(CliError::Corpus {
                            name: b.name.into(),
                            point: s.point.to_string(),
                            expected: report::decimal(expected),
                            got: s.m.map_or_else(|| s.status.as_str().to_string(), report::decimal),
                        });
                        break;
                    }
                }
            }
        }
        rows.push(row);
    }
    emit(
        cli.format,
        || report::corpus_json(&rows),
        || report::corpus_table(&rows),
    );
    first_failure.map_or(Ok(()), Err)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ov = Overrides::from_cli(cli)?;
    match &cli.command {
        Command::Analyze { input } => analyze(cli, &ov, input),
        Command::Compare { a, b } => compare(cli, &ov, a, b),
        Command::Corpus { corpus_list } => corpus(cli, &ov, *corpus_list),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
