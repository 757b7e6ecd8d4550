//! The `subfit` command line.
//!
//! Exit codes: `0` success, `1` report verification mismatch, `2` input
//! error, `3` solver refusal (e.g. the exhaustive size limit), `64` usage
//! error.

mod dataset;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::approximation::{best_subspace, DataSet};
use crate::error::Error;
use crate::fiber::{best_invariant, CyclicAction};
use crate::lab::{
    lines_plane_scan, rank_closure_trace, separation_scan, weak_limit_trace, AttainmentScan,
    WeakConvergenceTrace, DEFAULT_TRUNCATION,
};
use crate::union::{
    exhaustive_union, k_subspaces, FitReport, Model, Partition, SolverConfig, UnionModel,
};

pub use dataset::{parse_dataset, parse_scalar, read_dataset};
pub use report::{rescore, GroupJson, ModelJson, ReportJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Tolerance for `report` re-scoring.
pub const RESCORE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: u64,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: cannot parse '{cell}' as a number")]
    Scalar { row: u64, col: usize, cell: String },
    #[error("data file contains no vectors")]
    EmptyData,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if e.is_refusal() => EXIT_REFUSED,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subfit", version, about = "Least-squares subspace model fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write plot-ready CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Omit the timestamp field so output is byte-reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best subspace of dimension at most --rank.
    FitSingle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rank: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best union of --count subspaces of dimension at most --rank.
    FitUnion {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol_improve: f64,
        /// Enumerate all partitions instead of running K-subspaces.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 12)]
        exhaustive_limit: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best subspace invariant under the cyclic block shift.
    FitInvariant {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        group_order: usize,
        #[arg(long)]
        block_size: usize,
        #[arg(long)]
        pidim: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Attainment scans and weak-convergence traces.
    Demo {
        #[arg(long, value_enum)]
        name: DemoName,
        /// Parameter grid: `start:stop:step` or a comma list.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Weights in [0, 1] for rank-closure, comma separated.
        #[arg(long)]
        t_values: Option<String>,
        /// Sequence indices: `start:stop` or a comma list.
        #[arg(long)]
        indices: Option<String>,
        /// Ambient dimension for msap-separation.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-score a saved report against data.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    LinesPlane,
    WeakLimit,
    RankClosure,
    MsapSeparation,
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or
/// `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Format(format!("invalid grid '{spec}'"));
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| start + i as f64 * step).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

/// Parses `start:stop` (inclusive) or `a,b,c` as indices.
pub fn parse_indices(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Format(format!("invalid index list '{spec}'"));
    if let Some((a, b)) = spec.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect()
    }
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn timestamp(output: &OutputArgs) -> Option<String> {
    (!output.no_timestamp).then(|| chrono::Utc::now().to_rfc3339())
}

fn emit_report(
    report: &FitReport,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let json = ReportJson::from_report(report, timestamp(output)).to_json();
    write_out(output.out.as_deref(), &json, stdout)?;
    if let Some(csv_path) = &output.csv {
        let mut w = csv_writer(csv_path)?;
        w.write_record(["iteration", "cost"])?;
        for (i, c) in report.trace.iter().enumerate() {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: csv_path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    Ok(csv::Writer::from_path(path)?)
}

#[derive(Serialize)]
#[serde(untagged)]
enum DemoOutput {
    Scan(AttainmentScan),
    Trace(WeakConvergenceTrace),
}

fn emit_demo(
    out: &DemoOutput,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Wrapped<'a> {
        #[serde(flatten)]
        body: &'a DemoOutput,
        #[serde(skip_serializing_if = "Option::is_none")]
        timestamp: Option<String>,
    }
    let mut json = serde_json::to_string_pretty(&Wrapped {
        body: out,
        timestamp: timestamp(output),
    })?;
    json.push('\n');
    write_out(output.out.as_deref(), &json, stdout)?;
    if let Some(csv_path) = &output.csv {
        let mut w = csv_writer(csv_path)?;
        match out {
            DemoOutput::Scan(s) => {
                w.write_record(["parameter", "cost"])?;
                for (g, c) in s.grid.iter().zip(&s.costs) {
                    w.write_record([g.to_string(), c.to_string()])?;
                }
            }
            DemoOutput::Trace(t) => {
                w.write_record(["index", "residual"])?;
                for (n, r) in t.indices.iter().zip(&t.residuals) {
                    w.write_record([n.to_string(), r.to_string()])?;
                }
            }
        }
        w.flush().map_err(|source| CliError::Io {
            path: csv_path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn single_report(data: &DataSet, rank: usize) -> Result<FitReport, CliError> {
    let (v, cost) = best_subspace(data, rank)?;
    Ok(FitReport {
        cost,
        model: Model::Union(UnionModel::new(vec![v], rank)?),
        partition: Partition::new(vec![0; data.len()]),
        iterations: 1,
        restarts_used: 0,
        seed: 0,
        converged: true,
        trace: vec![cost],
        warnings: Vec::new(),
    })
}

fn run_demo(
    name: DemoName,
    grid: Option<&str>,
    truncation: usize,
    k: Option<usize>,
    t_values: Option<&str>,
    indices: Option<&str>,
    dim: usize,
    seed: u64,
) -> Result<DemoOutput, CliError> {
    Ok(match name {
        DemoName::LinesPlane => {
            let grid = parse_grid(grid.unwrap_or("0:10:0.5"))?;
            DemoOutput::Scan(lines_plane_scan(&grid)?)
        }
        DemoName::WeakLimit => {
            let idx = match indices {
                Some(s) => parse_indices(s)?,
                None => (3..=30.min(truncation.saturating_sub(1)).max(3)).collect(),
            };
            DemoOutput::Trace(weak_limit_trace(truncation, &idx)?)
        }
        DemoName::RankClosure => {
            let t = match (t_values, k) {
                (Some(s), k) => {
                    let t = parse_grid(s)?;
                    if let Some(k) = k {
                        if k != t.len() {
                            return Err(CliError::Format(format!(
                                "--k {k} does not match {} weights",
                                t.len()
                            )));
                        }
                    }
                    t
                }
                (None, Some(k)) => vec![0.5; k],
                (None, None) => vec![0.6, 0.8],
            };
            let idx = match indices {
                Some(s) => parse_indices(s)?,
                None => {
                    let max_n = (truncation / (2 * t.len().max(1) + 1)).clamp(1, 10);
                    (1..=max_n).collect()
                }
            };
            DemoOutput::Trace(rank_closure_trace(&t, truncation, &idx)?)
        }
        DemoName::MsapSeparation => {
            let grid = parse_grid(grid.unwrap_or("1,0.1,0.01,0.001,0.0001"))?;
            DemoOutput::Scan(separation_scan(k.unwrap_or(2), dim, &grid, seed)?)
        }
    })
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::FitSingle {
            input,
            rank,
            output,
        } => {
            let data = parse_dataset(&input)?;
            emit_report(&single_report(&data, rank)?, &output, stdout)?;
        }
        Command::FitUnion {
            input,
            rank,
            count,
            restarts,
            seed,
            max_iters,
            tol_improve,
            exhaustive,
            exhaustive_limit,
            output,
        } => {
            let data = parse_dataset(&input)?;
            let cfg = SolverConfig {
                restarts,
                max_iters,
                seed,
                tol_improve,
                exhaustive_limit,
            };
            cfg.validate()?;
            let report = if exhaustive {
                exhaustive_union(&data, count, rank, exhaustive_limit)?
            } else {
                k_subspaces(&data, count, rank, &cfg)?
            };
            emit_report(&report, &output, stdout)?;
        }
        Command::FitInvariant {
            input,
            group_order,
            block_size,
            pidim,
            output,
        } => {
            let data = parse_dataset(&input)?;
            let action = CyclicAction::new(group_order, block_size)?;
            let (_, report) = best_invariant(&data, action, pidim)?;
            emit_report(&report, &output, stdout)?;
        }
        Command::Demo {
            name,
            grid,
            truncation,
            k,
            t_values,
            indices,
            dim,
            seed,
            output,
        } => {
            let out = run_demo(
                name,
                grid.as_deref(),
                truncation,
                k,
                t_values.as_deref(),
                indices.as_deref(),
                dim,
                seed,
            )?;
            emit_demo(&out, &output, stdout)?;
        }
        Command::Report { input, report } => {
            let data = parse_dataset(&input)?;
            let text = std::fs::read_to_string(&report).map_err(|source| CliError::Io {
                path: report.display().to_string(),
                source,
            })?;
            let stored = ReportJson::parse(&text)?;
            let (reported, recomputed) = rescore(&stored, &data)?;
            let diff = (reported - recomputed).abs();
            let consistent = diff <= RESCORE_TOL;
            let summary = serde_json::json!({
                "reported_cost": reported,
                "rescored_cost": recomputed,
                "abs_diff": diff,
                "consistent": consistent,
            });
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            write_out(None, &text, stdout)?;
            if !consistent {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command, writing
/// JSON to `stdout` and diagnostics to stderr. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("subfit: {e}");
            e.exit_code()
        }
    }
}
