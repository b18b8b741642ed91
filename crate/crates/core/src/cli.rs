//! The `hetpath` command line.
//!
//! Exit status is 0 on success, 1 for invalid input (bad scenario values,
//! inconsistent ranges, guard violations) and 2 for I/O failures.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::eval::{self, AccuracyOptions, Axis, EvalError, LinesSpec, SurfaceSpec, SweepGrid};
use crate::model::{run_model, ModelError};
use crate::reorder_prob::{self, BRUTE_FORCE_MAX_BATCH};
use crate::scenario::{units, DatasetError, DelayDataset, LoadError, ModelConfig, Scenario};
use crate::sim::{run_sim, SimError, SimOptions};
use crate::svg;

/// Closed forms must match enumeration this closely.
pub const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "hetpath",
    version,
    about = "TCP throughput over round-robin striped heterogeneous links: model, simulator, experiments"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "HETPATH_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Reserved; every command is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for compare and sweep (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analytical model on a scenario file.
    Model(ModelArgs),
    /// Run the packet-level simulator on a scenario file.
    Sim(SimArgs),
    /// Model-versus-simulator accuracy over delay combinations from a dataset.
    Compare(CompareArgs),
    /// Model throughput over an asymmetry grid.
    Sweep(SweepArgs),
    /// Check the arrival-order closed forms against enumeration.
    ValidateProb(ValidateProbArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub fast_retransmit: bool,
    /// Also write arrivals.csv.
    #[arg(long)]
    pub log_arrivals: bool,
    /// One-way ACK path delay in ms.
    #[arg(long, default_value_t = 0.0)]
    pub ack_delay_ms: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// CSV with header `link,delay_ms`.
    pub dataset: PathBuf,
    /// Link counts: `2..8`, `2-8`, `3` or `2,4,6`.
    #[arg(long, default_value = "2..8")]
    pub links: String,
    /// Combinations per link count.
    #[arg(long, default_value_t = eval::DEFAULT_COMBINATION_COUNT)]
    pub count: usize,
    /// Largest combination set ranked before per-link thinning.
    #[arg(long, default_value_t = eval::DEFAULT_COMBINATION_CAP)]
    pub cap: u64,
    /// Per-link bandwidths in Mbps, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bandwidths_mbps: Option<Vec<f64>>,
    #[arg(long, default_value_t = ModelConfig::DEFAULT_TRANSFER_BYTES)]
    pub transfer_bytes: u64,
    #[arg(long)]
    pub fast_retransmit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Surface,
    Lines,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepMode::Lines)]
    pub mode: SweepMode,
    /// Link counts, as for `compare`.
    #[arg(long, default_value = "1..4")]
    pub links: String,
    /// Minimum delays in ms, comma separated. Surface mode takes one.
    #[arg(long, value_delimiter = ',')]
    pub d_min_ms: Option<Vec<f64>>,
    /// Delay asymmetry range `lo:hi` in ms.
    #[arg(long)]
    pub delay_asym_ms: Option<String>,
    #[arg(long)]
    pub delay_steps: Option<usize>,
    /// Bandwidth asymmetry range `lo:hi` in kbps (surface mode).
    #[arg(long)]
    pub bw_asym_kbps: Option<String>,
    #[arg(long)]
    pub bw_steps: Option<usize>,
    /// Per-link bandwidth (lines) or minimum bandwidth (surface), kbps.
    #[arg(long, default_value_t = 100.0)]
    pub bandwidth_kbps: f64,
    #[arg(long, default_value_t = ModelConfig::DEFAULT_TRANSFER_BYTES)]
    pub transfer_bytes: u64,
    /// Also render an SVG chart.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ValidateProbArgs {
    #[arg(long, default_value_t = 8)]
    pub max_c: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => CliError::Io(e.to_string()),
            LoadError::Parse(p) => CliError::Invalid(p.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match &e {
            ModelError::Invalid(v) => CliError::Invalid(format!("{}: {e}", v.field())),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::Invalid(v) => CliError::Invalid(format!("{}: {e}", v.field())),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `path` by filling a sibling temporary file and renaming it.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut w = io::BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

/// Parses `a..b`, `a-b`, `a..=b`, a single count or a comma list.
pub fn parse_link_counts(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Invalid(format!("cannot parse link counts {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let t = text.trim();
    let range = t
        .split_once("..=")
        .or_else(|| t.split_once(".."))
        .or_else(|| t.split_once('-'));
    let counts: Vec<usize> = if let Some((a, b)) = range {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(CliError::Invalid(format!("empty link range {text:?}")));
        }
        (a..=b).collect()
    } else {
        t.split(',').map(num).collect::<Result<_, _>>()?
    };
    if counts.is_empty() || counts.contains(&0) {
        return Err(CliError::Invalid("link counts must be at least 1".into()));
    }
    Ok(counts)
}

/// Parses `lo:hi` (or a single value) scaled by `unit`.
fn parse_range(text: &str, unit: f64) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Invalid(format!("cannot parse range {text:?}; expected lo:hi"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match text.split_once(':') {
        Some((a, b)) => Ok((num(a)? * unit, num(b)? * unit)),
        None => {
            let v = num(text)? * unit;
            Ok((v, v))
        }
    }
}

fn axis_from(
    range: Option<&str>,
    steps: Option<usize>,
    default: Axis,
    unit: f64,
) -> Result<Axis, CliError> {
    let (lo, hi) = match range {
        Some(r) => parse_range(r, unit)?,
        None => (default.lo, default.hi),
    };
    let steps = steps.unwrap_or(if lo == hi { 1 } else { default.steps });
    Ok(Axis::new(lo, hi, steps))
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Invalid("--jobs must be at least 1".into()));
        }
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            log::debug!("thread pool already initialised; --jobs ignored");
        }
    }
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} accepted; no command uses randomness");
    }
    let dir = cli.out.as_path();
    match &cli.command {
        Command::Model(a) => cmd_model(a, dir, out),
        Command::Sim(a) => cmd_sim(a, dir, out),
        Command::Compare(a) => cmd_compare(a, dir, out),
        Command::Sweep(a) => cmd_sweep(a, dir, out),
        Command::ValidateProb(a) => cmd_validate_prob(a, out),
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io(format!("stdout: {e}"))
}

pub fn cmd_model<W: Write>(a: &ModelArgs, dir: &Path, out: &mut W) -> Result<(), CliError> {
    let scenario = Scenario::load(&a.scenario)?;
    let report = run_model(&scenario)?;
    let path = dir.join("model_rounds.csv");
    write_atomic(&path, |w| report.write_csv(w))?;
    writeln!(out, "rounds={}", report.rounds.len()).map_err(stdout_err)?;
    writeln!(out, "total_time_s={}", report.total_time_s).map_err(stdout_err)?;
    writeln!(out, "throughput_bps={}", report.throughput_bps()).map_err(stdout_err)?;
    Ok(())
}

pub fn cmd_sim<W: Write>(a: &SimArgs, dir: &Path, out: &mut W) -> Result<(), CliError> {
    let scenario = Scenario::load(&a.scenario)?;
    let opts = SimOptions {
        fast_retransmit: a.fast_retransmit,
        ack_path_delay_s: units::ms_to_s(a.ack_delay_ms),
        log_arrivals: a.log_arrivals,
    };
    let report = run_sim(&scenario, opts)?;
    write_atomic(&dir.join("sim_summary.csv"), |w| {
        report.write_summary_csv(w)
    })?;
    if a.log_arrivals {
        write_atomic(&dir.join("arrivals.csv"), |w| report.write_arrivals_csv(w))?;
    }
    writeln!(out, "finish_time_s={}", report.finish_time_s).map_err(stdout_err)?;
    writeln!(
        out,
        "out_of_order_arrivals={}",
        report.out_of_order_arrivals
    )
    .map_err(stdout_err)?;
    writeln!(
        out,
        "spurious_retransmissions={}",
        report.spurious_retransmissions
    )
    .map_err(stdout_err)?;
    writeln!(out, "throughput_bps={}", report.throughput_bps).map_err(stdout_err)?;
    Ok(())
}

pub fn cmd_compare<W: Write>(a: &CompareArgs, dir: &Path, out: &mut W) -> Result<(), CliError> {
    let links = parse_link_counts(&a.links)?;
    let dataset = DelayDataset::load(&a.dataset)?;
    let bandwidths: Vec<f64> = match &a.bandwidths_mbps {
        Some(v) => v.iter().map(|&b| units::mbps_to_bps(b)).collect(),
        None => eval::default_bandwidths_bps(),
    };
    let config = ModelConfig::default().with_transfer_bytes(a.transfer_bytes);
    config
        .validate()
        .map_err(|e| CliError::Invalid(format!("{}: {e}", e.field())))?;
    let opts = AccuracyOptions {
        count: a.count,
        cap: a.cap,
        sim: SimOptions {
            fast_retransmit: a.fast_retransmit,
            ..SimOptions::default()
        },
    };
    let table = eval::accuracy_experiment(&dataset, &bandwidths, &links, &config, &opts)?;
    if table.is_empty() {
        return Err(CliError::Invalid(
            "no delay combinations were evaluated".into(),
        ));
    }
    write_atomic(&dir.join("accuracy_table.csv"), |w| table.write_csv(w))?;
    let w = |out: &mut W, s: String| writeln!(out, "{s}").map_err(stdout_err);
    for row in &table.rows {
        let mean = row
            .mean_accuracy()
            .map_or("n/a".to_string(), |m| m.to_string());
        let reference = eval::ns3_reference(row.m).map_or("n/a".to_string(), |r| r.to_string());
        w(
            out,
            format!(
                "m={} cells={} failed={} mean_accuracy={} ns3_reference={}",
                row.m,
                row.cells.len(),
                row.failures.len(),
                mean,
                reference
            ),
        )?;
    }
    let grand = table.grand_mean().expect("table is not empty");
    w(out, format!("grand_mean_accuracy={grand}"))?;
    w(
        out,
        format!("ns3_reference_mean={}", eval::NS3_REFERENCE_MEAN),
    )?;
    Ok(())
}

pub fn cmd_sweep<W: Write>(a: &SweepArgs, dir: &Path, out: &mut W) -> Result<(), CliError> {
    let link_counts = parse_link_counts(&a.links)?;
    let config = ModelConfig::default().with_transfer_bytes(a.transfer_bytes);
    config
        .validate()
        .map_err(|e| CliError::Invalid(format!("{}: {e}", e.field())))?;
    let bandwidth = units::kbps_to_bps(a.bandwidth_kbps);
    let d_mins: Option<Vec<f64>> = a
        .d_min_ms
        .as_ref()
        .map(|v| v.iter().map(|&d| units::ms_to_s(d)).collect());
    let w = |out: &mut W, s: String| writeln!(out, "{s}").map_err(stdout_err);

    match a.mode {
        SweepMode::Surface => {
            let def = SurfaceSpec::default();
            let d_min_s = match d_mins.as_deref() {
                None => def.d_min_s,
                Some([d]) => *d,
                Some(_) => {
                    return Err(CliError::Invalid(
                        "surface mode takes exactly one --d-min-ms value".into(),
                    ))
                }
            };
            let spec = SurfaceSpec {
                link_counts,
                d_min_s,
                b_min_bps: bandwidth,
                delay_asym_s: axis_from(
                    a.delay_asym_ms.as_deref(),
                    a.delay_steps,
                    def.delay_asym_s,
                    1e-3,
                )?,
                bw_asym_bps: axis_from(
                    a.bw_asym_kbps.as_deref(),
                    a.bw_steps,
                    def.bw_asym_bps,
                    1e3,
                )?,
                config,
            };
            let grid = eval::sweep_surface(&spec)?;
            write_atomic(&dir.join("surface.csv"), |f| grid.write_surface_csv(f))?;
            if a.svg {
                for (mi, &m) in grid.link_counts.iter().enumerate() {
                    let values: Vec<Vec<f64>> = (0..grid.delay_asyms_s.len())
                        .map(|ai| {
                            (0..grid.bw_asyms_bps.len())
                                .map(|bi| grid.at(mi, 0, ai, bi))
                                .collect()
                        })
                        .collect();
                    let doc = svg::heat_map(
                        &format!("{m} link(s): throughput, bits/s"),
                        "average delay asymmetry, s",
                        "average bandwidth asymmetry, bits/s",
                        &grid.delay_asyms_s,
                        &grid.bw_asyms_bps,
                        &values,
                    );
                    write_atomic(&dir.join(format!("surface_m{m}.svg")), |f| {
                        f.write_all(doc.as_bytes())
                    })?;
                }
            }
            w(out, format!("cells={}", grid.len()))?;
            report_surface_drops(&grid, out)?;
        }
        SweepMode::Lines => {
            let def = LinesSpec::default();
            let spec = LinesSpec {
                link_counts,
                d_mins_s: d_mins.unwrap_or(def.d_mins_s),
                delay_asym_s: axis_from(
                    a.delay_asym_ms.as_deref(),
                    a.delay_steps,
                    def.delay_asym_s,
                    1e-3,
                )?,
                bandwidth_bps: bandwidth,
                config,
            };
            let grid = eval::sweep_lines(&spec)?;
            write_atomic(&dir.join("lines.csv"), |f| grid.write_lines_csv(f))?;
            if a.svg {
                let series = grid
                    .link_counts
                    .iter()
                    .flat_map(|&m| grid.d_mins_s.iter().map(move |&d| (m, d)))
                    .map(|(m, d)| svg::Series {
                        label: format!("{m} link(s), d_min {} ms", units::s_to_ms(d)),
                        points: grid
                            .delay_asyms_s
                            .iter()
                            .copied()
                            .zip(grid.line(m, d, 0).unwrap_or_default())
                            .collect(),
                    })
                    .collect::<Vec<_>>();
                let doc = svg::line_chart(
                    "model throughput",
                    "average delay asymmetry, s",
                    "throughput, bits/s",
                    &series,
                );
                write_atomic(&dir.join("lines.svg"), |f| f.write_all(doc.as_bytes()))?;
            }
            w(out, format!("cells={}", grid.len()))?;
            if grid.link_counts.contains(&1) {
                for &d in &grid.d_mins_s {
                    for &m in grid.link_counts.iter().filter(|&&m| m > 1) {
                        let c = grid.crossover(m, 1, d).expect("axes present");
                        let text = c.value().map_or("none".to_string(), |x| x.to_string());
                        w(
                            out,
                            format!("crossover m={m} d_min_s={d} threshold_s={text}"),
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn report_surface_drops<W: Write>(grid: &SweepGrid, out: &mut W) -> Result<(), CliError> {
    let (na, nb) = (grid.delay_asyms_s.len(), grid.bw_asyms_bps.len());
    for (mi, &m) in grid.link_counts.iter().enumerate() {
        if m < 2 || na < 2 || nb < 2 {
            continue;
        }
        let corner = grid.at(mi, 0, na - 1, nb - 1);
        let delay_drop = grid.at(mi, 0, 0, nb - 1) / corner;
        let bw_drop = grid.at(mi, 0, na - 1, 0) / corner;
        writeln!(
            out,
            "m={m} delay_axis_factor={delay_drop} bandwidth_axis_factor={bw_drop}"
        )
        .map_err(stdout_err)?;
    }
    Ok(())
}

/// One line of the `validate-prob` report.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbCheck {
    pub c: usize,
    pub m_max_err: f64,
    pub q_max_err: f64,
    pub literal_total: f64,
    pub literal_deficit: f64,
    pub p_q_c_minus_1: f64,
}

impl ProbCheck {
    pub fn ok(&self) -> bool {
        self.m_max_err <= PROB_TOLERANCE && self.q_max_err <= PROB_TOLERANCE
    }
}

pub fn prob_checks(max_c: usize) -> Result<Vec<ProbCheck>, CliError> {
    if !(2..=BRUTE_FORCE_MAX_BATCH).contains(&max_c) {
        return Err(CliError::Invalid(format!(
            "--max-c must be between 2 and {BRUTE_FORCE_MAX_BATCH} (got {max_c})"
        )));
    }
    let e = |x: reorder_prob::ProbError| CliError::Invalid(x.to_string());
    (2..=max_c)
        .map(|c| {
            let mut m_err = 0.0f64;
            for m_ack in 1..=4 {
                let closed = reorder_prob::m_distribution(c, m_ack).map_err(e)?;
                let brute = reorder_prob::brute_force_m_distribution(c, m_ack).map_err(e)?;
                m_err = m_err.max(closed.max_abs_diff(&brute));
            }
            let q = reorder_prob::q_distribution(c).map_err(e)?;
            let qb = reorder_prob::brute_force_q_distribution(c).map_err(e)?;
            let literal: f64 = reorder_prob::q_table_literal(c).map_err(e)?.iter().sum();
            Ok(ProbCheck {
                c,
                m_max_err: m_err,
                q_max_err: q.max_abs_diff(&qb),
                literal_total: literal,
                literal_deficit: 1.0 - literal,
                p_q_c_minus_1: qb.p(c - 1),
            })
        })
        .collect()
}

pub fn cmd_validate_prob<W: Write>(a: &ValidateProbArgs, out: &mut W) -> Result<(), CliError> {
    let checks = prob_checks(a.max_c)?;
    let mut w = |s: String| writeln!(out, "{s}").map_err(stdout_err);
    w("C m_max_err q_max_err status".into())?;
    for c in &checks {
        w(format!(
            "{} {:.3e} {:.3e} {}",
            c.c,
            c.m_max_err,
            c.q_max_err,
            if c.ok() { "OK" } else { "FAIL" }
        ))?;
    }
    w("literal q table: C total deficit p(q=C-1)".into())?;
    for c in &checks {
        w(format!(
            "{} {} {} {}",
            c.c, c.literal_total, c.literal_deficit, c.p_q_c_minus_1
        ))?;
    }
    if checks.iter().all(ProbCheck::ok) {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "closed forms differ from enumeration by more than {PROB_TOLERANCE}"
        )))
    }
}
