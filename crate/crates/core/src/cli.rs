//! Command-line driver and result writers.
//!
//! ```text
//! qkd-rwa --policy spff,mqo,qtd --loads 10:100:10 --runs 100 --seed 1 --out results/
//! ```
//!
//! writes `runs.csv` (one row per run), `aggregate.csv` (means per policy and
//! load) and `plot.dat` (whitespace tables for plotting tools).
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for configuration and
//! file errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::rwa::{Policy, RwaConfig};
use crate::sim::{
    aggregate, run_sweep, LoadSummary, ReasonCounts, RunResult, ScenarioConfig, SimError,
    SnrAverage,
};
use crate::snr::{db_to_snr, snr_to_db, Attenuation, SnrParams};
use crate::topology::{Topology, TopologyError};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const RUNS_HEADER: [&str; 11] = [
    "policy",
    "load",
    "run",
    "blocked",
    "total",
    "blocking_ratio",
    "avg_snr_db",
    "reason_no_q",
    "reason_no_c",
    "reason_new_snr",
    "reason_degrade_snr",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnrAverageArg {
    /// Channels alive at the end of the run.
    End,
    /// Each channel's SNR when it was admitted.
    Accept,
}

/// Blocking ratio and SNR sweeps for QKD-aware routing and wavelength assignment.
#[derive(Debug, Parser)]
#[command(name = "qkd-rwa", version)]
pub struct Args {
    /// Comma-separated classical-channel policies: spff, mqo, qtd.
    #[arg(long, value_delimiter = ',', default_value = "spff,mqo,qtd")]
    pub policy: Vec<Policy>,
    /// Load levels as start:stop:step (stop inclusive).
    #[arg(long, default_value = "10:100:10", value_parser = parse_loads)]
    pub loads: Loads,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Topology description file; the built-in six-node network otherwise.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// k-shortest-paths depth.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Candidate route cap for MQO and QTD.
    #[arg(long, default_value_t = 64)]
    pub cap: usize,
    /// Admission threshold in dB. Without it the linear threshold 31.5 is used.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold_db: Option<f64>,
    #[arg(long, default_value_t = 0.32)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.45e-10)]
    pub n_fiber: f64,
    #[arg(long, default_value_t = 2.18e-9)]
    pub n_shared: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ptx: f64,
    /// Treat --alpha as dB/km and convert it before exponentiating.
    #[arg(long)]
    pub physical_attenuation: bool,
    /// Let QTD try every disjoint route instead of only the shortest.
    #[arg(long)]
    pub qtd_try_all_disjoint: bool,
    /// Add a data channel from destination to source as well.
    #[arg(long)]
    pub tdch_bidirectional: bool,
    /// Fraction of requests that are standalone classical demands.
    #[arg(long, default_value_t = 0.0)]
    pub classical_fraction: f64,
    #[arg(long, value_enum, default_value = "end")]
    pub snr_average: SnrAverageArg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loads(pub Vec<usize>);

pub fn parse_loads(text: &str) -> Result<Loads, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got {text:?}"));
    };
    let number = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("{s:?} is not a non-negative integer"))
    };
    let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
    if step == 0 {
        return Err("step must be positive".into());
    }
    if start > stop {
        return Err(format!("start {start} exceeds stop {stop}"));
    }
    Ok(Loads((start..=stop).step_by(step).collect()))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read topology file {path}: {source}")]
    TopologyRead { path: PathBuf, source: io::Error },
    #[error("topology file {path}: {source}")]
    TopologyParse {
        path: PathBuf,
        source: TopologyError,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("malformed results: {0}")]
    Malformed(String),
}

impl Args {
    pub fn snr_params(&self) -> SnrParams {
        SnrParams {
            alpha: self.alpha,
            p_tx: self.ptx,
            n_fiber: self.n_fiber,
            n_shared: self.n_shared,
            threshold_linear: self
                .threshold_db
                .map(db_to_snr)
                .unwrap_or(SnrParams::default().threshold_linear),
            attenuation: if self.physical_attenuation {
                Attenuation::DecibelPerKm
            } else {
                Attenuation::Literal
            },
        }
    }

    /// One scenario per requested policy, sharing everything else.
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>, CliError> {
        let topology = match &self.topology {
            None => Topology::default_topology(),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::TopologyRead {
                    path: path.clone(),
                    source,
                })?;
                Topology::from_description(&text).map_err(|source| CliError::TopologyParse {
                    path: path.clone(),
                    source,
                })?
            }
        };
        if self.policy.is_empty() {
            return Err(CliError::Config("no policy given".into()));
        }
        let mut policies = self.policy.clone();
        policies.sort();
        policies.dedup();
        let scenarios: Vec<ScenarioConfig> = policies
            .into_iter()
            .map(|policy| ScenarioConfig {
                topology: topology.clone(),
                policy,
                loads: self.loads.0.clone(),
                runs_per_load: self.runs,
                base_seed: self.seed,
                rwa: RwaConfig {
                    k: self.k,
                    cap: self.cap,
                    qtd_try_all_disjoint: self.qtd_try_all_disjoint,
                    tdch_bidirectional: self.tdch_bidirectional,
                    snr: self.snr_params(),
                },
                classical_fraction: self.classical_fraction,
                snr_average: match self.snr_average {
                    SnrAverageArg::End => SnrAverage::EndOfRun,
                    SnrAverageArg::Accept => SnrAverage::AtAcceptance,
                },
            })
            .collect();
        for s in &scenarios {
            s.validate()?;
        }
        Ok(scenarios)
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per run, in the order given.
pub fn write_runs_csv<W: Write>(results: &[RunResult], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in results {
        w.write_record([
            r.policy.name().to_string(),
            r.load.to_string(),
            r.run.to_string(),
            r.blocked.to_string(),
            r.total.to_string(),
            r.blocking_ratio.to_string(),
            fmt_opt(r.avg_snr_linear.map(snr_to_db)),
            r.reasons.no_quantum.to_string(),
            r.reasons.no_classical.to_string(),
            r.reasons.new_snr.to_string(),
            r.reasons.degrade_snr.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file produced by [`write_runs_csv`].
pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunResult>, CliError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    if header.iter().ne(RUNS_HEADER) {
        return Err(CliError::Malformed(format!("unexpected header {header:?}")));
    }
    let mut results = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Malformed(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let int = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|_| CliError::Malformed(format!("bad {} {:?}", RUNS_HEADER[i], field(i))))
        };
        let real = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| CliError::Malformed(format!("bad {} {:?}", RUNS_HEADER[i], field(i))))
        };
        results.push(RunResult {
            policy: field(0).parse().map_err(CliError::Malformed)?,
            load: int(1)?,
            run: int(2)?,
            blocked: int(3)?,
            total: int(4)?,
            blocking_ratio: real(5)?,
            avg_snr_linear: if field(6).is_empty() {
                None
            } else {
                Some(db_to_snr(real(6)?))
            },
            reasons: ReasonCounts {
                no_quantum: int(7)?,
                no_classical: int(8)?,
                new_snr: int(9)?,
                degrade_snr: int(10)?,
            },
        });
    }
    Ok(results)
}

pub fn write_aggregate_csv<W: Write>(summaries: &[LoadSummary], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "policy",
        "load",
        "runs",
        "mean_blocking_ratio",
        "mean_snr_linear",
        "mean_snr_db",
        "snr_defined_runs",
        "snr_undefined_runs",
    ])?;
    for s in summaries {
        w.write_record([
            s.policy.name().to_string(),
            s.load.to_string(),
            s.runs.to_string(),
            s.mean_blocking_ratio.to_string(),
            fmt_opt(s.mean_snr_linear),
            fmt_opt(s.mean_snr_db()),
            s.snr_defined_runs.to_string(),
            s.snr_undefined_runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

type Column = fn(&LoadSummary) -> Option<f64>;

/// Renders two whitespace tables (mean blocking ratio, then mean SNR in dB),
/// one row per load and one column per policy, separated by two blank lines.
pub fn render_plot_data(summaries: &[LoadSummary]) -> Result<String, CliError> {
    if summaries.is_empty() {
        return Err(CliError::Sim(SimError::EmptyResults));
    }
    let mut policies: Vec<Policy> = summaries.iter().map(|s| s.policy).collect();
    policies.sort();
    policies.dedup();
    let mut loads: Vec<usize> = summaries.iter().map(|s| s.load).collect();
    loads.sort();
    loads.dedup();
    let cell = |policy: Policy, load: usize, pick: Column| {
        summaries
            .iter()
            .find(|s| s.policy == policy && s.load == load)
            .and_then(pick)
            .map(|v| v.to_string())
            .unwrap_or_else(|| "NaN".to_string())
    };
    let header = std::iter::once("load")
        .chain(policies.iter().map(|p| p.name()))
        .collect::<Vec<_>>()
        .join(" ");
    let mut out = String::new();
    let tables: [(&str, Column); 2] = [
        ("mean blocking ratio", |s| Some(s.mean_blocking_ratio)),
        ("mean SNR (dB)", |s| s.mean_snr_db()),
    ];
    for (i, &(title, pick)) in tables.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {title}\n# {header}\n"));
        for &load in &loads {
            let row: Vec<String> = std::iter::once(load.to_string())
                .chain(policies.iter().map(|&p| cell(p, load, pick)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_plot_data(summaries: &[LoadSummary], path: &FsPath) -> Result<(), CliError> {
    let text = render_plot_data(summaries)?;
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(
    path: &FsPath,
    write: impl FnOnce(fs::File) -> csv::Result<()>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    write(file).map_err(|e| CliError::Write {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    })
}

/// Runs every scenario and writes the three output files.
pub fn execute(args: &Args) -> Result<Vec<RunResult>, CliError> {
    let scenarios = args.scenarios()?;
    let mut results = Vec::new();
    for scenario in &scenarios {
        results.extend(run_sweep(scenario)?);
    }
    let summaries = aggregate(&results)?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Write {
        path: args.out.clone(),
        source,
    })?;
    write_file(&args.out.join("runs.csv"), |f| write_runs_csv(&results, f))?;
    write_file(&args.out.join("aggregate.csv"), |f| {
        write_aggregate_csv(&summaries, f)
    })?;
    write_plot_data(&summaries, &args.out.join("plot.dat"))?;
    Ok(results)
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&args) {
        Ok(results) => {
            eprintln!("wrote {} runs to {}", results.len(), args.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
