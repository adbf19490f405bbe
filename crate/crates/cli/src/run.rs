//! The `run` orchestrator: one transmitter and three receiver processes per
//! protocol, resource sampling from outside, then aggregation, invariant
//! checks and artifacts.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use trailerlink::metrics::{
    line_plot, list_threads, mean_usage, read_samples, spawn_sampler, summarize, write_resource_samples, write_summary,
    write_usage, ResourceSampler, ResourceTarget, RunSummary,
};
use trailerlink::pubsub::fragment_count;
use trailerlink::scenario::Scenario;
use trailerlink::streams::{Protocol, StreamLabel};

use crate::child::{parse_ready, read_ready, rx_result_file, samples_file, SCENARIO_FILE, TX_RESULT};
use crate::results::{read_json, ReceiverResult, TransmitterResult, WireCounters};

const READY_TIMEOUT: Duration = Duration::from_secs(15);
const EXIT_GRACE: Duration = Duration::from_secs(15);

pub const SUMMARY_FILE: &str = "summary.csv";
pub const USAGE_FILE: &str = "usage.csv";
pub const RESOURCES_FILE: &str = "resources.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

struct ChildProc {
    label: String,
    child: Child,
    stdin: Option<ChildStdin>,
}

impl ChildProc {
    fn spawn(exe: &Path, label: &str, args: &[String]) -> Result<(Self, Option<SocketAddr>)> {
        let mut child = Command::new(exe)
            .arg("__child")
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .with_context(|| format!("spawning {label}"))?;
        let stdin = child.stdin.take();
        let lines = read_ready(child.stdout.take().expect("piped stdout"));
        let mut proc = ChildProc { label: label.to_string(), child, stdin };
        let deadline = Instant::now() + READY_TIMEOUT;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match lines.recv_timeout(left) {
                Ok(line) => {
                    if let Some(addr) = parse_ready(&line) {
                        return Ok((proc, addr));
                    }
                }
                Err(_) => {
                    proc.kill();
                    let status = proc.child.try_wait().ok().flatten();
                    return Err(anyhow!("{label} did not become ready (exit status {status:?})"));
                }
            }
        }
    }

    fn pid(&self) -> i32 {
        self.child.id() as i32
    }

    fn close_stdin(&mut self) {
        self.stdin.take();
    }

    fn kill(&mut self) {
        self.close_stdin();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// Waits for exit after stdin is closed, killing the child on timeout.
    fn finish(&mut self, grace: Duration) -> Result<(), String> {
        self.close_stdin();
        let deadline = Instant::now() + grace;
        loop {
            match self.child.try_wait() {
                Ok(Some(st)) if st.success() => return Ok(()),
                Ok(Some(st)) => return Err(format!("{} exited with {st}", self.label)),
                Ok(None) if Instant::now() >= deadline => {
                    self.kill();
                    return Err(format!("{} did not exit and was killed", self.label));
                }
                Ok(None) => thread::sleep(Duration::from_millis(20)),
                Err(e) => return Err(format!("{}: {e}", self.label)),
            }
        }
    }
}

impl Drop for ChildProc {
    fn drop(&mut self) {
        if matches!(self.child.try_wait(), Ok(None)) {
            self.kill();
        }
    }
}

fn resource_targets(procs: &[&ChildProc]) -> Vec<ResourceTarget> {
    let mut targets = Vec::new();
    for p in procs {
        let pid = p.pid();
        targets.push(ResourceTarget::process(p.label.clone(), pid));
        let mut groups: BTreeMap<String, Vec<i32>> = BTreeMap::new();
        for (tid, name) in list_threads(pid) {
            let group = if name.starts_with("nfd") {
                "nfd".to_string()
            } else if ["-prod", "-pub", "-cons", "-sub"].iter().any(|s| name.ends_with(s)) {
                name
            } else {
                continue;
            };
            groups.entry(group).or_default().push(tid);
        }
        for (group, tids) in groups {
            targets.push(ResourceTarget::threads(format!("{}/{group}", p.label), pid, tids));
        }
    }
    targets
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StreamFacts {
    pub samples: u64,
    pub samples_sent: u64,
    pub payload_digest: String,
    /// Network packets that carried one sample towards the receiver.
    pub packets_per_sample: Option<f64>,
    pub timeouts: u64,
    pub length_mismatches: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub protocol: String,
    pub status: String,
    pub seed: u64,
    pub pacing: String,
    pub placement: String,
    pub duration_s: f64,
    pub max_samples: Option<u64>,
    pub wire_bytes: u64,
    pub wire_packets: u64,
    pub streams: BTreeMap<String, StreamFacts>,
    pub violations: Vec<String>,
    pub abort_reason: Option<String>,
    pub artifacts: Vec<ArtifactEntry>,
}

pub struct ProtocolRun {
    pub summary: RunSummary,
    pub manifest: Manifest,
}

impl ProtocolRun {
    pub fn aborted(&self) -> bool {
        self.manifest.abort_reason.is_some()
    }
}

/// Runs one protocol end to end in `run_dir`.
pub fn run_protocol(
    exe: &Path,
    scenario: &Scenario,
    run_dir: &Path,
    interrupted: &Arc<AtomicBool>,
) -> Result<ProtocolRun> {
    std::fs::create_dir_all(run_dir).with_context(|| format!("creating {}", run_dir.display()))?;
    std::fs::write(run_dir.join(SCENARIO_FILE), scenario.to_config())?;
    let dir_arg = run_dir.display().to_string();
    let protocol = scenario.protocol;

    let mut abort: Option<String> = None;
    let mut receivers: Vec<ChildProc> = Vec::new();
    let mut transmitter: Option<ChildProc> = None;

    let start_rx = |peer: Option<SocketAddr>,
                    receivers: &mut Vec<ChildProc>,
                    out: &mut Vec<(StreamLabel, SocketAddr)>|
     -> Result<()> {
        for label in StreamLabel::ALL {
            let mut args =
                vec!["receiver".to_string(), "--run-dir".into(), dir_arg.clone(), "--stream".into(), label.to_string()];
            if let Some(p) = peer {
                args.extend(["--peer".into(), p.to_string()]);
            }
            let (proc, addr) = ChildProc::spawn(exe, &format!("rx-{label}"), &args)?;
            if let Some(a) = addr {
                out.push((label, a));
            }
            receivers.push(proc);
        }
        Ok(())
    };

    let started: Result<()> = (|| {
        if protocol.is_ndn() {
            let (tx, addr) = ChildProc::spawn(exe, "tx", &["transmitter".into(), "--run-dir".into(), dir_arg.clone()])?;
            transmitter = Some(tx);
            let peer = addr.ok_or_else(|| anyhow!("transmitter reported no address"))?;
            start_rx(Some(peer), &mut receivers, &mut Vec::new())?;
        } else {
            let mut subs = Vec::new();
            start_rx(None, &mut receivers, &mut subs)?;
            let mut args = vec!["transmitter".to_string(), "--run-dir".into(), dir_arg.clone()];
            for (label, a) in subs {
                args.extend(["--peer".into(), format!("{label}={a}")]);
            }
            transmitter = Some(ChildProc::spawn(exe, "tx", &args)?.0);
        }
        Ok(())
    })();
    if let Err(e) = started {
        abort = Some(format!("startup failed: {e:#}"));
    }

    let mut all: Vec<&ChildProc> = transmitter.iter().collect();
    all.extend(receivers.iter());
    let targets = resource_targets(&all);
    let sampler_stop = Arc::new(AtomicBool::new(false));
    let sampler = spawn_sampler(ResourceSampler::new(targets)?, scenario.sample_interval, sampler_stop.clone())?;

    if abort.is_none() {
        let deadline = Instant::now() + scenario.duration + scenario.timeout + EXIT_GRACE;
        let mut asked_to_stop = false;
        loop {
            let mut running = 0;
            for r in receivers.iter_mut() {
                match r.child.try_wait() {
                    Ok(None) => running += 1,
                    Ok(Some(st)) if !st.success() => {
                        abort.get_or_insert_with(|| format!("{} exited with {st}", r.label));
                    }
                    _ => {}
                }
            }
            if let Some(tx) = transmitter.as_mut() {
                if let Ok(Some(st)) = tx.child.try_wait() {
                    abort.get_or_insert_with(|| format!("transmitter exited early with {st}"));
                }
            }
            if running == 0 || abort.is_some() {
                break;
            }
            if !asked_to_stop && (interrupted.load(Ordering::Relaxed) || Instant::now() > deadline) {
                if interrupted.load(Ordering::Relaxed) {
                    abort = Some("interrupted".into());
                }
                receivers.iter_mut().for_each(ChildProc::close_stdin);
                asked_to_stop = true;
            }
            thread::sleep(Duration::from_millis(50));
        }
    }
    for r in receivers.iter_mut() {
        if let Err(e) = r.finish(EXIT_GRACE) {
            abort.get_or_insert(e);
        }
    }
    if let Some(tx) = transmitter.as_mut() {
        if let Err(e) = tx.finish(EXIT_GRACE) {
            abort.get_or_insert(e);
        }
    }
    sampler_stop.store(true, Ordering::Relaxed);
    let resource_samples = sampler.join().map_err(|_| anyhow!("sampler thread panicked"))?;

    aggregate(scenario, run_dir, resource_samples, abort)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn check_wire(label: &str, w: &WireCounters, violations: &mut Vec<String>) {
    if w.accounted_bytes != w.bytes {
        violations.push(format!("{label}: accounted {} bytes but sockets sent {}", w.accounted_bytes, w.bytes));
    }
}

fn aggregate(
    scenario: &Scenario,
    run_dir: &Path,
    resource_samples: Vec<trailerlink::metrics::ResourceSample>,
    mut abort: Option<String>,
) -> Result<ProtocolRun> {
    let protocol = scenario.protocol;
    let mut summary = RunSummary::new(protocol);
    let mut violations = Vec::new();
    let mut streams = BTreeMap::new();
    let mut artifacts = vec![SCENARIO_FILE.to_string()];

    let tx: Option<TransmitterResult> = read_json(&run_dir.join(TX_RESULT)).ok();
    if tx.is_some() {
        artifacts.push(TX_RESULT.into());
    } else {
        abort.get_or_insert_with(|| "transmitter result missing".into());
    }
    let mut wire = WireCounters::default();
    let mut add_wire = |w: &WireCounters| {
        wire.packets += w.packets;
        wire.wire_bytes += w.wire_bytes;
    };
    if let Some(tx) = &tx {
        if let Some(f) = &tx.forwarder {
            let out = f.network_out();
            check_wire("transmitter forwarder", &out, &mut violations);
            add_wire(&out);
            if f.decode_errors > 0 {
                violations.push(format!("transmitter forwarder saw {} malformed packets", f.decode_errors));
            }
        }
        for p in &tx.producers {
            if let Some(w) = &p.endpoint_out {
                check_wire(&format!("{} publisher", p.stream), w, &mut violations);
                add_wire(w);
            }
        }
    }

    let mut series = Vec::new();
    for label in StreamLabel::ALL {
        let profile = scenario.profile(label);
        let rx: Option<ReceiverResult> = read_json(&run_dir.join(rx_result_file(label))).ok();
        let samples = read_samples(&run_dir.join(samples_file(label))).unwrap_or_default();
        let Some(rx) = rx else {
            abort.get_or_insert_with(|| format!("receiver result for {label} missing"));
            continue;
        };
        artifacts.push(rx_result_file(label));
        artifacts.push(samples_file(label));
        if let Some(f) = &rx.forwarder {
            let out = f.network_out();
            check_wire(&format!("{label} receiver forwarder"), &out, &mut violations);
            add_wire(&out);
        }
        if let Some(w) = &rx.endpoint_out {
            check_wire(&format!("{label} subscriber"), w, &mut violations);
            add_wire(w);
        }

        let producer = tx.as_ref().and_then(|t| t.producers.iter().find(|p| p.stream == label.as_str()));
        let samples_sent = producer.map_or(0, |p| p.samples_sent);
        let packets_per_sample = if protocol.is_ndn() {
            (rx.samples > 0).then(|| rx.packets_in as f64 / rx.samples as f64)
        } else {
            producer
                .and_then(|p| p.endpoint_out.as_ref())
                .filter(|_| samples_sent > 0)
                .map(|w| w.packets as f64 / samples_sent as f64)
        };
        let expected_packets = if protocol.is_ndn() { 1 } else { fragment_count(profile.payload_bytes, scenario.mtu) };
        if let Some(pps) = packets_per_sample {
            let exact = if protocol.is_ndn() { rx.timeouts == 0 } else { true };
            if exact && pps != expected_packets as f64 {
                violations.push(format!("{label}: {pps} packets per sample, expected {expected_packets}"));
            }
        }
        if rx.length_mismatches > 0 {
            violations.push(format!("{label}: {} payload length mismatches", rx.length_mismatches));
        }
        if protocol.is_ndn() && rx.samples != rx.requests - rx.timeouts {
            violations.push(format!(
                "{label}: {} samples but {} requests and {} timeouts",
                rx.samples, rx.requests, rx.timeouts
            ));
        }
        match summarize(&samples) {
            Ok(s) => {
                if !(s.min_ms <= s.mean_ms && s.mean_ms <= s.max_ms) {
                    violations
                        .push(format!("{label}: min {} mean {} max {} out of order", s.min_ms, s.mean_ms, s.max_ms));
                }
                if s.mean_ms < ms(profile.period) {
                    violations.push(format!(
                        "{label}: mean inter-arrival {:.4} ms below period {} ms",
                        s.mean_ms,
                        ms(profile.period)
                    ));
                }
                if s.packets_count != rx.samples {
                    violations.push(format!("{label}: {} samples recorded, {} reported", s.packets_count, rx.samples));
                }
                summary.streams.push(s);
            }
            Err(e) => violations.push(format!("{label}: {e}")),
        }
        let plot = format!("latency-{label}.svg");
        let values: Vec<f64> = samples.iter().filter_map(|s| s.inter_arrival_ms).collect();
        std::fs::write(
            run_dir.join(&plot),
            line_plot(&format!("{label} inter-arrival (ms), {protocol}"), &values, Some(ms(profile.period))),
        )?;
        artifacts.push(plot);
        series.push(label);
        streams.insert(
            label.to_string(),
            StreamFacts {
                samples: rx.samples,
                samples_sent,
                payload_digest: rx.payload_digest.clone(),
                packets_per_sample,
                timeouts: rx.timeouts,
                length_mismatches: rx.length_mismatches,
            },
        );
    }
    summary.wire_bytes = wire.wire_bytes;
    summary.wire_packets = wire.packets;
    summary.resources = mean_usage(&resource_samples);

    write_summary(&run_dir.join(SUMMARY_FILE), &summary.streams.iter().map(|s| (protocol, *s)).collect::<Vec<_>>())?;
    write_usage(
        &run_dir.join(USAGE_FILE),
        &summary.resources.iter().map(|u| (protocol, u.clone())).collect::<Vec<_>>(),
    )?;
    write_resource_samples(&run_dir.join(RESOURCES_FILE), &resource_samples)?;
    artifacts.extend([SUMMARY_FILE.to_string(), USAGE_FILE.into(), RESOURCES_FILE.into()]);

    let status = if abort.is_some() {
        "aborted"
    } else if !violations.is_empty() {
        "violations"
    } else {
        "ok"
    };
    let artifacts = artifacts
        .into_iter()
        .map(|path| {
            let bytes = std::fs::metadata(run_dir.join(&path)).map_or(0, |m| m.len());
            ArtifactEntry { path, bytes }
        })
        .collect();
    let manifest = Manifest {
        protocol: protocol.to_string(),
        status: status.into(),
        seed: scenario.seed,
        pacing: scenario.pacing.as_str().into(),
        placement: scenario.effective_placement().as_str().into(),
        duration_s: scenario.duration.as_secs_f64(),
        max_samples: scenario.max_samples,
        wire_bytes: summary.wire_bytes,
        wire_packets: summary.wire_packets,
        streams,
        violations,
        abort_reason: abort,
        artifacts,
    };
    crate::results::write_json(&run_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(ProtocolRun { summary, manifest })
}

pub fn run_dir_for(out: &Path, protocol: Protocol) -> PathBuf {
    out.join(protocol.as_str())
}

/// Receives the SIGINT/SIGTERM flag; installs the handler once.
pub fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = flag.clone();
    let _ = ctrlc::set_handler(move || f.store(true, Ordering::Relaxed));
    flag
}
