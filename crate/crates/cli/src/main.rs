mod child;
mod codec_dump;
mod demo;
mod exit;
mod report;
mod results;
mod run;
mod spoof;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use trailerlink::metrics::{preflight_output_dir, ReportError};
use trailerlink::pairing::SecondFactor;
use trailerlink::scenario::Scenario;
use trailerlink::streams::{Protocol, StreamLabel};

#[derive(Parser)]
#[command(name = "trailerlink", version, about = "NDN and pub/sub benchmark over a tractor-trailer link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the three streams over one protocol, or all three in turn.
    Run(RunArgs),
    /// Render the comparison report from finished run directories.
    Report {
        /// Run directories, or parents holding them.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check trailer GPS fixes against the tractor's.
    SpoofCheck {
        /// CSV with columns t,tractor_x,tractor_y,trailer_x,trailer_y.
        csv: PathBuf,
        /// Expected tractor-trailer distance in metres.
        #[arg(long, default_value_t = 1.5)]
        d: f64,
        /// Tractor GPS error bound in metres.
        #[arg(long = "e-t", default_value_t = 0.5)]
        e_t: f64,
        /// Trailer GPS error bound in metres.
        #[arg(long = "e-r", default_value_t = 0.5)]
        e_r: f64,
        /// Per-axis offset "dx,dy" instead of a scalar distance.
        #[arg(long, value_parser = parse_pair)]
        per_axis: Option<(f64, f64)>,
    },
    /// Simulate the pairing of a trailer with a tractor.
    PairingDemo(DemoCli),
    /// Build or decode packets as hex.
    CodecDump {
        #[command(subcommand)]
        action: DumpAction,
    },
    #[command(name = "__child", hide = true)]
    Child {
        #[command(subcommand)]
        role: ChildRole,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file of key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// ndn-tcp, ndn-udp, pubsub or all.
    #[arg(long)]
    protocol: Option<String>,
    /// Seconds per protocol.
    #[arg(long)]
    duration: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Stop each stream after this many samples.
    #[arg(long)]
    max_samples: Option<String>,
    /// relative or absolute.
    #[arg(long)]
    pacing: Option<String>,
    /// consumer or producer.
    #[arg(long)]
    placement: Option<String>,
    /// Output directory.
    #[arg(long, env = "TRAILERLINK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoCli {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// geo, otp or both.
    #[arg(long, default_value = "both")]
    factor: SecondFactor,
    /// The trailer answers the challenge with the wrong secret.
    #[arg(long)]
    fail_auth: bool,
    /// The driver echoes a wrong one-time password.
    #[arg(long)]
    wrong_otp: bool,
    /// Offset the trailer's GPS by this many metres (default ten budgets).
    #[arg(long, num_args = 0..=1)]
    spoofed_gps: Option<Option<f64>>,
    /// Seconds before the driver echoes the one-time password.
    #[arg(long, default_value_t = 2.0)]
    otp_delay: f64,
    /// Also write the JSON-lines trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DumpAction {
    /// Print a packet of a default stream.
    Build {
        kind: codec_dump::BuildKind,
        #[arg(long, default_value = "cam")]
        stream: StreamLabel,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Datagram limit for pub/sub fragments.
        #[arg(long)]
        mtu: Option<usize>,
        #[arg(long, value_enum, default_value = "hex")]
        format: codec_dump::Format,
    },
    /// Decode hex packets, one per line, from a file or stdin.
    Decode {
        #[arg(long, value_enum, default_value = "ndn")]
        kind: codec_dump::DecodeKind,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChildRole {
    Transmitter {
        #[arg(long)]
        run_dir: PathBuf,
        /// Receiver of one stream, as label=addr.
        #[arg(long = "peer", value_parser = parse_peer)]
        peers: Vec<(StreamLabel, SocketAddr)>,
    },
    Receiver {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        stream: StreamLabel,
        #[arg(long)]
        peer: Option<SocketAddr>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected dx,dy")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_peer(s: &str) -> Result<(StreamLabel, SocketAddr), String> {
    let (label, addr) = s.split_once('=').ok_or("expected label=addr")?;
    Ok((label.parse().map_err(|e| format!("{e}"))?, addr.parse().map_err(|e| format!("{addr}: {e}"))?))
}

/// The scenario from file, overrides and flags, plus the protocols to run.
fn build_scenario(a: &RunArgs) -> Result<(Scenario, Vec<Protocol>)> {
    let mut s = match &a.config {
        Some(p) => Scenario::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("{}", p.display()))?,
        None => Scenario::default(),
    };
    for kv in &a.overrides {
        s.apply_override(kv)?;
    }
    let mut protocols = None;
    if let Some(p) = &a.protocol {
        if p == "all" {
            protocols = Some(Protocol::ALL.to_vec());
        } else {
            s.set("protocol", p)?;
        }
    }
    for (key, v) in [
        ("duration_s", &a.duration),
        ("seed", &a.seed),
        ("max_samples", &a.max_samples),
        ("pacing", &a.pacing),
        ("placement", &a.placement),
    ] {
        if let Some(v) = v {
            s.set(key, v)?;
        }
    }
    if let Some(out) = &a.out {
        s.output_dir = out.clone();
    }
    s.validate()?;
    Ok((s.clone(), protocols.unwrap_or_else(|| vec![s.protocol])))
}

fn run_cmd(a: &RunArgs) -> Result<u8> {
    let (scenario, protocols) = match build_scenario(a) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(exit::CONFIG_ERROR);
        }
    };
    if let Err(e) = preflight_output_dir(&scenario.output_dir) {
        eprintln!("error: {e}");
        return Ok(exit::CONFIG_ERROR);
    }
    let exe = std::env::current_exe()?;
    let interrupted = run::interrupt_flag();
    let mut summaries = Vec::new();
    let mut code = exit::SUCCESS;
    for protocol in protocols {
        if interrupted.load(Ordering::Relaxed) {
            code = exit::RUNTIME_ABORT;
            break;
        }
        let mut s = scenario.clone();
        s.protocol = protocol;
        let dir = run::run_dir_for(&scenario.output_dir, protocol);
        eprintln!("running {protocol} for {:.1} s into {}", s.duration.as_secs_f64(), dir.display());
        let r = match run::run_protocol(&exe, &s, &dir, &interrupted) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {protocol}: {e:#}");
                code = exit::RUNTIME_ABORT;
                continue;
            }
        };
        let m = &r.manifest;
        for (label, f) in &m.streams {
            eprintln!("  {label}: {} samples, {} sent, {} timeouts", f.samples, f.samples_sent, f.timeouts);
        }
        for v in &m.violations {
            eprintln!("  violation: {v}");
        }
        if r.aborted() {
            eprintln!("  aborted: {}", m.abort_reason.as_deref().unwrap_or(""));
            code = exit::RUNTIME_ABORT;
        } else if !m.violations.is_empty() && code == exit::SUCCESS {
            code = exit::INVARIANT_VIOLATION;
        }
        summaries.push(r.summary);
    }
    if !summaries.is_empty() {
        match report::write_report(&summaries, Some(&scenario.output_dir.join(report::REPORT_FILE))) {
            Ok(text) => println!("{text}"),
            Err(e) => eprintln!("no report: {e:#}"),
        }
    }
    if interrupted.load(Ordering::Relaxed) {
        code = exit::RUNTIME_ABORT;
    }
    Ok(code)
}

fn report_cmd(dirs: &[PathBuf], out: Option<&std::path::Path>) -> Result<u8> {
    let found = report::discover_runs(dirs)?;
    let runs = found.iter().map(|d| report::load_run(d)).collect::<Result<Vec<_>>>()?;
    match report::write_report(&runs, out) {
        Ok(text) => {
            println!("{text}");
            Ok(exit::SUCCESS)
        }
        Err(e) if e.downcast_ref::<ReportError>().is_some() => {
            eprintln!("error: {e}");
            Ok(exit::CONFIG_ERROR)
        }
        Err(e) => Err(e),
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run(a) => run_cmd(&a),
        Command::Report { dirs, out } => report_cmd(&dirs, out.as_deref()),
        Command::SpoofCheck { csv, d, e_t, e_r, per_axis } => {
            spoof::spoof_check_cmd(&spoof::SpoofArgs { csv: &csv, d, e_t, e_r, per_axis })
        }
        Command::PairingDemo(a) => demo::pairing_demo_cmd(&demo::DemoArgs {
            seed: a.seed,
            factor: a.factor,
            fail_auth: a.fail_auth,
            wrong_otp: a.wrong_otp,
            spoofed_gps: a.spoofed_gps,
            otp_delay_s: a.otp_delay,
            trace: a.trace.as_deref(),
        }),
        Command::CodecDump { action } => {
            match action {
                DumpAction::Build { kind, stream, seed, mtu, format } => {
                    codec_dump::build_cmd(kind, stream, seed, mtu, format)?
                }
                DumpAction::Decode { kind, input } => codec_dump::decode_cmd(input.as_deref(), kind)?,
            }
            Ok(exit::SUCCESS)
        }
        Command::Child { role } => {
            match role {
                ChildRole::Transmitter { run_dir, peers } => child::transmitter(&run_dir, &peers)?,
                ChildRole::Receiver { run_dir, stream, peer } => child::receiver(&run_dir, stream, peer)?,
            }
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().any(|c| c.is::<trailerlink::scenario::ScenarioError>());
            ExitCode::from(if config { exit::CONFIG_ERROR } else { exit::RUNTIME_ABORT })
        }
    }
}
