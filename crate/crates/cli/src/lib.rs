//! Argument model and command implementations behind the `chsh` binary.

pub mod config;
pub mod record;

use std::path::PathBuf;
use std::time::Instant;

use chsh_core::channels::{ChannelFamily, ChannelParam};
use chsh_core::protocols::{
    activation_search, activation_search_full, bidirectional_parts, check_breaking,
    is_swap_symmetric, robustness_sweep, superactivation_state, superactivation_value,
    superactivation_verify, table_rows, ProtocolDescriptor, ProtocolKind,
};
use chsh_core::seesaw::SeesawConfig;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use record::{RunRecord, RunResult, SuperactivationReport, SweepGrid, TableEntry, VERSION};

/// Tolerance on `σ̃` exchange symmetry.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Allowed gap between the simulated scheme value and `(2v + 4) / 4`.
pub const SCHEME_TOL: f64 = 1e-6;
/// A reproduced table value may fall this far below the published one.
pub const TABLE_TOL: f64 = 5e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] chsh_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for usage and parse errors, 3 for numerical-integrity failures.
    pub fn exit_code(&self) -> u8 {
        use chsh_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Parse(_) | E::Parameter(_)) => 2,
            CliError::Core(E::NumericalIntegrity(_)) => 3,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "chsh",
    version,
    about = "CHSH-breaking checks, activation searches and robustness sweeps for qubit channels",
    after_help = config::defaults_help()
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed [default: $CHSH_SEED, else the config file, else 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config file of key=value lines (keys listed below)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// See-saw restarts per search [default: 20]
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Print the JSON run record (activate and superactivate always do)
    #[arg(long, global = true)]
    pub json: bool,
    /// Record wall-clock seconds in the run record (otherwise null)
    #[arg(long, global = true)]
    pub timing: bool,
    /// Write the output here instead of stdout (the CSV grid for sweep)
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic CHSH-breaking verdict with a numerical single-channel cross-check
    CheckBreaking {
        /// Channels as family:p, family one of dep, ad, loss, er
        #[arg(required = true)]
        channels: Vec<ChannelParam>,
    },
    /// Activation search for one protocol, printed as a JSON run record
    Activate {
        /// single, unidirectional or bidirectional
        #[arg(value_parser = parse_protocol)]
        protocol: ProtocolKind,
        channel1: ChannelParam,
        channel2: Option<ChannelParam>,
        /// Bidirectional only: constrain the second input to the swap of the first
        #[arg(long)]
        symmetric: bool,
    },
    /// Activation search over a p1 x p2 grid, written as CSV
    Sweep {
        #[arg(value_parser = parse_protocol)]
        protocol: ProtocolKind,
        #[arg(value_parser = parse_family)]
        family1: ChannelFamily,
        #[arg(value_parser = parse_family)]
        family2: ChannelFamily,
        /// Range of p1 as lo:hi
        #[arg(long, default_value = "0.4:0.5", value_parser = parse_range)]
        p1: (f64, f64),
        /// Range of p2 as lo:hi
        #[arg(long, default_value = "0.4:0.5", value_parser = parse_range)]
        p2: (f64, f64),
        /// Grid spacing in both directions
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Rerun the six published activation values and compare
    ReproduceTable,
    /// Super-activation scheme built on an optimal bidirectional strategy
    Superactivate {
        channel1: ChannelParam,
        /// Defaults to channel1, which imposes the symmetric-input constraint
        channel2: Option<ChannelParam>,
    },
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    ProtocolKind::parse(s).map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> Result<ChannelFamily, String> {
    ChannelFamily::from_tag(s).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form lo:hi"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(format!("range {lo}:{hi} must satisfy 0 <= lo <= hi <= 1"));
    }
    Ok((lo, hi))
}

/// Texts to emit, each to a file or (when `None`) to stdout.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<(Option<PathBuf>, String)>,
    /// Set when the run completed but did not meet its target.
    pub failure: Option<String>,
}

impl Report {
    fn single(dest: Option<PathBuf>, text: String) -> Self {
        Self { outputs: vec![(dest, text)], failure: None }
    }
}

pub fn run(cli: &Cli, env_seed: Option<&str>) -> Result<Report, CliError> {
    let started = Instant::now();
    let c = &cli.common;
    let cfg = config::resolve(c.config.as_deref(), env_seed, c.seed, c.restarts)?;
    let record = |command: &str, descriptor, result| RunRecord {
        command: command.into(),
        config: cfg.clone(),
        descriptor,
        result,
        seed: cfg.seed,
        wall_time: c.timing.then(|| started.elapsed().as_secs_f64()),
        version: VERSION.into(),
    };
    let out = c.out.clone();
    match &cli.command {
        Command::CheckBreaking { channels } => {
            let checks = channels
                .iter()
                .map(|ch| check_breaking(ch, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            if c.json {
                let desc = (channels.len() == 1).then(|| ProtocolDescriptor::single(channels[0]));
                let rec = record("check-breaking", desc, RunResult::Breaking(checks));
                return Ok(Report::single(out, rec.to_json()));
            }
            let text: String = checks
                .iter()
                .map(|b| {
                    format!(
                        "{}  breaking={}  threshold={:.10}  numerical={:.8}  consistent={}\n",
                        b.channel, b.breaking, b.threshold, b.numerical_value, b.consistent
                    )
                })
                .collect();
            Ok(Report::single(out, text))
        }
        Command::Activate { protocol, channel1, channel2, symmetric } => {
            let desc = activate_descriptor(*protocol, *channel1, *channel2, *symmetric)?;
            let result = activation_search(&desc, &cfg)?;
            let rec = record("activate", Some(desc), RunResult::Activation(result));
            Ok(Report::single(out, rec.to_json()))
        }
        Command::Sweep { protocol, family1, family2, p1, p2, step } => {
            let points = robustness_sweep(*protocol, *family1, *family2, *p1, *p2, *step, &cfg)?;
            let csv = record::sweep_csv(&points);
            let grid = SweepGrid {
                kind: *protocol,
                family1: *family1,
                family2: *family2,
                p1_range: *p1,
                p2_range: *p2,
                step: *step,
                points,
            };
            let mut report = Report::default();
            if c.json {
                if out.is_some() {
                    report.outputs.push((out, csv));
                }
                let rec = record("sweep", None, RunResult::Sweep(grid));
                report.outputs.push((None, rec.to_json()));
            } else {
                report.outputs.push((out, csv));
            }
            Ok(report)
        }
        Command::ReproduceTable => reproduce_table(&cfg, c.json, out, |entries| {
            record("reproduce-table", None, RunResult::Table(entries))
        }),
        Command::Superactivate { channel1, channel2 } => {
            let (desc, report) = superactivate(*channel1, *channel2, &cfg)?;
            let rec = record("superactivate", Some(desc), RunResult::Superactivation(report));
            Ok(Report::single(out, rec.to_json()))
        }
    }
}

fn activate_descriptor(
    kind: ProtocolKind,
    ch1: ChannelParam,
    ch2: Option<ChannelParam>,
    symmetric: bool,
) -> Result<ProtocolDescriptor, CliError> {
    if !symmetric {
        return Ok(ProtocolDescriptor::new(kind, ch1, ch2)?);
    }
    if kind != ProtocolKind::Bidirectional {
        return Err(CliError::Usage("--symmetric needs the bidirectional protocol".into()));
    }
    if ch2.is_some_and(|c| c != ch1) {
        return Err(CliError::Usage("--symmetric needs identical channels".into()));
    }
    Ok(ProtocolDescriptor::symmetric_bidirectional(ch1))
}

fn reproduce_table(
    cfg: &SeesawConfig,
    json: bool,
    out: Option<PathBuf>,
    record: impl Fn(Vec<TableEntry>) -> RunRecord,
) -> Result<Report, CliError> {
    let mut entries = Vec::new();
    let mut text = format!(
        "{:<15} {:<10}   {:<24} {:>10} {:>10}  status\n",
        "protocol", "channel1", "channel2", "published", "achieved"
    );
    for row in table_rows() {
        let desc = row.descriptor();
        let r = activation_search(&desc, cfg)?;
        let pass = r.activated && r.best_value >= row.published - TABLE_TOL;
        text.push_str(&format!(
            "{:<15} {:<10} x {:<24} {:>10.5} {:>10.6}  {}\n",
            row.kind.name(),
            row.channel1.to_string(),
            row.channel2.to_string(),
            row.published,
            r.best_value,
            if pass { "PASS" } else { "FAIL" }
        ));
        entries.push(TableEntry { descriptor: desc, published: row.published, achieved: r.best_value, pass });
    }
    let failed = entries.iter().filter(|e| !e.pass).count();
    let failure = (failed > 0).then(|| format!("{failed} of 6 rows below published - {TABLE_TOL}"));
    let body = if json { record(entries).to_json() } else { text };
    Ok(Report { outputs: vec![(out, body)], failure })
}

fn superactivate(
    ch1: ChannelParam,
    ch2: Option<ChannelParam>,
    cfg: &SeesawConfig,
) -> Result<(ProtocolDescriptor, SuperactivationReport), CliError> {
    let desc = match ch2 {
        Some(c2) if c2.family.output_dim() != ch1.family.output_dim() => {
            return Err(CliError::Usage(format!(
                "super-activation needs equal output dimensions, {} and {} differ",
                ch1, c2
            )));
        }
        Some(c2) if c2 != ch1 => ProtocolDescriptor::bidirectional(ch1, c2),
        _ => ProtocolDescriptor::symmetric_bidirectional(ch1),
    };
    let (activation, seesaw) = activation_search_full(&desc, cfg)?;
    let (s1, s2, m, n) = bidirectional_parts(&desc, &seesaw)?;
    let symmetric = is_swap_symmetric(&superactivation_state(&s1, &s2)?, SYMMETRY_TOL)?;
    let scheme_value = superactivation_verify(&s1, &s2, &m, &n)?;
    let v = activation.best_value;
    let predicted = superactivation_value(v);
    if (scheme_value - predicted).abs() > SCHEME_TOL {
        return Err(chsh_core::Error::NumericalIntegrity(format!(
            "scheme value {scheme_value} differs from (2v+4)/4 = {predicted}"
        ))
        .into());
    }
    let report = SuperactivationReport {
        v,
        symmetric_constraint: desc.symmetric,
        symmetric,
        scheme_value,
        predicted_scheme_value: predicted,
        activation,
    };
    Ok((desc, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chsh_core::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(E::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(E::Parameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(E::NumericalIntegrity("x".into())).exit_code(), 3);
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.48:0.5").unwrap(), (0.48, 0.5));
        assert!(parse_range("0.5:0.4").is_err());
        assert!(parse_range("0.5").is_err());
        assert!(parse_range("0:1.5").is_err());
    }

    #[test]
    fn flags_parse_anywhere() {
        let cli = Cli::try_parse_from([
            "chsh", "--seed", "3", "activate", "bi", "ad:0.5", "ad:0.5", "--restarts", "2", "--json",
        ])
        .unwrap();
        assert_eq!(cli.common.seed, Some(3));
        assert_eq!(cli.common.restarts, Some(2));
        assert!(cli.common.json);
        let Command::Activate { protocol, channel1, channel2, symmetric } = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(protocol, ProtocolKind::Bidirectional);
        assert_eq!(channel1.to_string(), "ad:0.5");
        assert_eq!(channel2.map(|c| c.to_string()).as_deref(), Some("ad:0.5"));
        assert!(!symmetric);
    }

    #[test]
    fn symmetric_descriptor_rules() {
        let ad: ChannelParam = "ad:0.5".parse().unwrap();
        let er: ChannelParam = "er:0.5".parse().unwrap();
        assert!(activate_descriptor(ProtocolKind::Bidirectional, ad, None, true).unwrap().symmetric);
        assert!(activate_descriptor(ProtocolKind::Bidirectional, ad, Some(er), true).is_err());
        assert!(activate_descriptor(ProtocolKind::Unidirectional, ad, Some(ad), true).is_err());
        assert!(activate_descriptor(ProtocolKind::SingleChannel, ad, Some(ad), false).is_err());
    }

    #[test]
    fn bad_arguments_are_rejected() {
        for args in [
            vec!["chsh", "check-breaking", "xx:0.5"],
            vec!["chsh", "check-breaking", "ad:1.5"],
            vec!["chsh", "activate", "sideways", "ad:0.5"],
            vec!["chsh", "sweep", "bi", "ad", "ad", "--p1", "0.6:0.4"],
            vec!["chsh", "check-breaking"],
            vec!["chsh", "--seed", "-1", "reproduce-table"],
        ] {
            assert!(Cli::try_parse_from(&args).is_err(), "{args:?}");
        }
    }

    #[test]
    fn help_prints_defaults() {
        let err = Cli::try_parse_from(["chsh", "--help"]).unwrap_err();
        let help = err.to_string();
        for key in ["epsilon = 0.1", "restarts = 20", "max_iterations = 2000", "CHSH_SEED"] {
            assert!(help.contains(key), "{key}");
        }
        let err = Cli::try_parse_from(["chsh", "sweep", "--help"]).unwrap_err();
        assert!(err.to_string().contains("[default: 0.01]"));
    }
}
