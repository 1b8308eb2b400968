//! `qmac`: capacity-region bounds for two-sender quantum multiple-access channels.
//!
//! Results go to stdout as JSON (or CSV with `--format csv`); diagnostics go to stderr.
//! Exit status is 0 on success, 2 on a usage error and 1 when a computation fails.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qmac::builtin;
use qmac::channel::{self, KrausChannel};
use qmac::entropic::entropy;
use qmac::optimize::{self, AdditivityConfig, Characterization, OptimizerConfig};
use qmac::region::{emit_region, round_sig, to_rounded_json, BlockedMac, Format};
use qmac::state::LabeledState;

#[derive(Parser, Debug)]
#[command(name = "qmac", version, about = "Capacity-region inner bounds for two-sender quantum MACs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Von Neumann entropy of a subsystem of a state file.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated factor labels.
        #[arg(long, value_delimiter = ',', required = true)]
        subsystem: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Corner points and regions of the collective qubit-flip channel.
    ExampleQubitFlip {
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "qq-corners")]
        what: FlipReport,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        k: u8,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// The erasure channel's rate pairs over a grid of erasure probabilities (CSV by default).
    ExampleErasureMac {
        /// `start:stop:step`, endpoints included.
        #[arg(long, default_value = "0:0.5:0.05")]
        p_grid: String,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Frontier sweep of a built-in or file-loaded channel.
    Region {
        /// Channel file; alternative to `--example`.
        #[arg(long, conflicts_with = "example")]
        channel: Option<PathBuf>,
        #[arg(long, value_enum)]
        example: Option<ExampleChannel>,
        /// Noise parameter of the built-in channel.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value = "qq-pent")]
        characterization: Sweep,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        k: u8,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Single- versus two-copy rectangle and pentagon regions of the collective qubit flip.
    Additivity {
        #[arg(long, default_value = "0.05:0.45:0.05")]
        p_grid: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Loads a channel file and reports its completeness residual.
    ValidateChannel {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 33)]
    directions: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 4000)]
    max_iters: usize,
}

impl SearchArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FlipReport {
    QqCorners,
    CqCorners,
    PentRegion,
    RectRegion,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ExampleChannel {
    QubitFlip,
    Erasure,
    Noiseless,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Sweep {
    QqRect,
    QqPent,
    CqRect,
    CqPent,
}

impl From<Sweep> for Characterization {
    fn from(s: Sweep) -> Self {
        match s {
            Sweep::QqRect => Characterization::QqRect,
            Sweep::QqPent => Characterization::QqPent,
            Sweep::CqRect => Characterization::CqRect,
            Sweep::CqPent => Characterization::CqPent,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<qmac::Error> for Failure {
    fn from(e: qmac::Error) -> Self {
        Failure::Compute(e.into())
    }
}

type Outcome = Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_probability(p: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(usage(format!("--p must lie in [0, 1], got {p}")))
    }
}

fn check_search(s: &SearchArgs) -> Result<(), Failure> {
    if s.restarts == 0 || s.directions == 0 || s.max_iters == 0 {
        return Err(usage("--restarts, --directions and --max-iters must be positive"));
    }
    Ok(())
}

/// Parses `start:stop:step`; `stop` is included when within 1e-12 of a grid point.
fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(usage(format!("grid `{text}` is not start:stop:step")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("`{s}` in grid `{text}` is not a number")));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
        return Err(usage(format!("grid `{text}` needs start <= stop and step > 0")));
    }
    let n = ((stop - start) / step + 1e-12).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - stop).abs() <= 1e-12 {
            *last = stop;
        }
    }
    Ok(grid)
}

fn json<T: serde::Serialize>(value: &T) -> Outcome {
    Ok(to_rounded_json(value)?)
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| round_sig(*v).to_string()).collect::<Vec<_>>().join(",")
}

fn builtin_channel(example: ExampleChannel, p: Option<f64>) -> Result<(KrausChannel, String), Failure> {
    match example {
        ExampleChannel::QubitFlip => {
            let p = p.ok_or_else(|| usage("--example qubit-flip needs --p"))?;
            check_probability(p)?;
            Ok((channel::collective_qubit_flip(p)?, format!("qubit-flip(p={p})")))
        }
        ExampleChannel::Erasure => Ok((channel::erasure_mac()?, "erasure".to_string())),
        ExampleChannel::Noiseless => Ok((channel::noiseless_two_qubit()?, "noiseless".to_string())),
    }
}

fn sweep(
    channel: &KrausChannel,
    name: &str,
    characterization: Characterization,
    k: u8,
    search: &SearchArgs,
    format: Format,
) -> Outcome {
    let mac = BlockedMac::new(channel, k as usize)?.with_description(name);
    let result = optimize::sweep_frontier(&mac, characterization, search.directions, &search.config())?;
    Ok(emit_region(&result.cloud, format)?)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Entropy { state, subsystem, format } => {
            let rho = LabeledState::load(&state).with_context(|| format!("reading {}", state.display()))?;
            let labels: Vec<&str> = subsystem.iter().map(String::as_str).collect();
            let bits = entropy(&rho, &labels)?;
            match format.unwrap_or(OutFormat::Json) {
                OutFormat::Json => json(&serde_json::json!({ "subsystem": subsystem, "entropy": bits })),
                OutFormat::Csv => Ok(format!("subsystem,entropy\n{},{}\n", subsystem.join(" "), round_sig(bits.0))),
            }
        }
        Command::ExampleQubitFlip { p, what, search, k, format } => {
            check_probability(p)?;
            check_search(&search)?;
            let format = format.unwrap_or(OutFormat::Json);
            match what {
                FlipReport::QqCorners => {
                    let c = builtin::flip_qq_corners(p)?;
                    match format {
                        OutFormat::Json => json(&c),
                        OutFormat::Csv => {
                            let mut out = String::from("qa,qb\n");
                            for v in &c.vertices {
                                writeln!(out, "{}", csv_row(v)).unwrap();
                            }
                            Ok(out)
                        }
                    }
                }
                FlipReport::CqCorners => {
                    let c = builtin::flip_cq_corners(p)?;
                    match format {
                        OutFormat::Json => json(&c),
                        OutFormat::Csv => Ok(format!(
                            "input,ra,qb\nomega1,{}\nomega2,{}\nomega2-pentagon,{}\n",
                            csv_row(&[c.omega1.r_max.0, c.omega1.q_max.0]),
                            csv_row(&[c.omega2.r_max.0, c.omega2.q_max.0]),
                            csv_row(&c.omega2_corner),
                        )),
                    }
                }
                FlipReport::PentRegion | FlipReport::RectRegion => {
                    let ch = channel::collective_qubit_flip(p)?;
                    let c = match what {
                        FlipReport::PentRegion => Characterization::QqPent,
                        _ => Characterization::QqRect,
                    };
                    sweep(&ch, &format!("qubit-flip(p={p})"), c, k, &search, format.into())
                }
            }
        }
        Command::ExampleErasureMac { p_grid, format } => {
            let grid = parse_grid(&p_grid)?;
            if let Some(p) = grid.iter().find(|p| !(0.0..=0.5).contains(*p)) {
                return Err(usage(format!("erasure probabilities lie in [0, 0.5], grid has {p}")));
            }
            let rows = grid
                .iter()
                .map(|&p| Ok((p, builtin::erasure_rectangle(p)?)))
                .collect::<qmac::Result<Vec<_>>>()?;
            match format.unwrap_or(OutFormat::Csv) {
                OutFormat::Csv => {
                    let mut out = String::from("p,ra,qb\n");
                    for (p, r) in &rows {
                        writeln!(out, "{}", csv_row(&[*p, r.r_max.0, r.q_max.0])).unwrap();
                    }
                    Ok(out)
                }
                OutFormat::Json => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(p, r)| serde_json::json!({ "p": p, "ra": r.r_max, "qb": r.q_max }))
                        .collect();
                    json(&items)
                }
            }
        }
        Command::Region { channel, example, p, characterization, k, search, format } => {
            check_search(&search)?;
            let (ch, name) = match (channel, example) {
                (Some(path), None) => {
                    if p.is_some() {
                        return Err(usage("--p applies to built-in channels only"));
                    }
                    let ch = KrausChannel::load(&path).with_context(|| format!("reading {}", path.display()))?;
                    (ch, path.display().to_string())
                }
                (None, Some(example)) => builtin_channel(example, p)?,
                _ => return Err(usage("give exactly one of --channel and --example")),
            };
            sweep(&ch, &name, characterization.into(), k, &search, format.unwrap_or(OutFormat::Json).into())
        }
        Command::Additivity { p_grid, search, format } => {
            check_search(&search)?;
            let grid = parse_grid(&p_grid)?;
            for &p in &grid {
                check_probability(p)?;
            }
            let cfg = AdditivityConfig { optimizer: search.config(), directions: search.directions };
            let reports = optimize::additivity_experiment("qubit-flip", channel::collective_qubit_flip, &grid, &cfg)?;
            match format.unwrap_or(OutFormat::Json) {
                OutFormat::Json => json(&reports),
                OutFormat::Csv => {
                    let mut out = String::from("p,rect_gap,pent_gap,rect_distinguishable,pent_distinguishable\n");
                    for r in &reports {
                        writeln!(
                            out,
                            "{},{},{}",
                            csv_row(&[r.p, r.rect_gap, r.pent_gap]),
                            r.rect_distinguishable,
                            r.pent_distinguishable
                        )
                        .unwrap();
                    }
                    Ok(out)
                }
            }
        }
        Command::ValidateChannel { channel, format } => {
            let ch = KrausChannel::load(&channel).with_context(|| format!("invalid channel {}", channel.display()))?;
            let report = serde_json::json!({
                "valid": true,
                "in_factors": ch.in_layout().factors(),
                "out_factors": ch.out_layout().factors(),
                "kraus_count": ch.kraus().len(),
                "completeness_residual": ch.completeness_residual(),
            });
            match format.unwrap_or(OutFormat::Json) {
                OutFormat::Json => json(&report),
                OutFormat::Csv => Ok(format!(
                    "valid,kraus_count,completeness_residual\ntrue,{},{:e}\n",
                    ch.kraus().len(),
                    ch.completeness_residual()
                )),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
