//! Transmitter and receiver roles, each run as its own process. A child
//! prints one `READY <addr>` line once its endpoints are bound, and stops
//! when its stdin closes or it receives SIGINT/SIGTERM.

use std::io::{BufRead, Read, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use trailerlink::codec::{hmac_tag, SigningKey};
use trailerlink::forwarder::{FaceTransport, ForwarderHandle, RuntimeConfig};
use trailerlink::metrics::{write_samples, LatencyRecorder};
use trailerlink::scenario::{Scenario, Signing};
use trailerlink::streams::{
    spawn_ndn_consumer, spawn_ndn_producer, spawn_publisher, spawn_subscriber, AppOptions, Protocol, RunLimits,
    SeededPayloads, StreamLabel,
};

use crate::results::{write_json, ForwarderReport, ProducerResult, ReceiverResult, TransmitterResult};

pub const SCENARIO_FILE: &str = "scenario.conf";
pub const TX_RESULT: &str = "tx.json";

pub fn rx_result_file(stream: StreamLabel) -> String {
    format!("rx-{stream}.json")
}

pub fn samples_file(stream: StreamLabel) -> String {
    format!("samples-{stream}.csv")
}

/// Set on stdin EOF or a termination signal.
fn stop_flag() -> Arc<AtomicBool> {
    let stop = Arc::new(AtomicBool::new(false));
    let s = stop.clone();
    thread::Builder::new()
        .name("stdin-watch".into())
        .spawn(move || {
            let mut sink = [0u8; 64];
            let mut stdin = std::io::stdin();
            while matches!(stdin.read(&mut sink), Ok(n) if n > 0) {}
            s.store(true, Ordering::Relaxed);
        })
        .expect("spawn stdin watcher");
    let s = stop.clone();
    let _ = ctrlc::set_handler(move || s.store(true, Ordering::Relaxed));
    stop
}

fn announce(addr: Option<SocketAddr>) {
    let mut out = std::io::stdout().lock();
    let _ = match addr {
        Some(a) => writeln!(out, "READY {a}"),
        None => writeln!(out, "READY -"),
    };
    let _ = out.flush();
}

pub fn load_scenario(run_dir: &Path) -> Result<Scenario> {
    let path = run_dir.join(SCENARIO_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run_key(seed: u64) -> SigningKey {
    SigningKey::new(hmac_tag(b"trailerlink-run-key", &seed.to_be_bytes()).to_vec())
}

fn app_options(s: &Scenario) -> AppOptions {
    AppOptions {
        pacing: s.pacing,
        placement: s.effective_placement(),
        timeout: s.timeout,
        mtu: s.mtu,
        signing_key: (s.signing == Signing::Hmac).then(|| run_key(s.seed)),
        seed: s.seed,
        ..AppOptions::for_protocol(s.protocol)
    }
}

fn runtime_config(udp_bind: SocketAddr, tcp_listen: Option<SocketAddr>) -> RuntimeConfig {
    RuntimeConfig { udp_bind, tcp_listen, cs_capacity: 0, ..RuntimeConfig::default() }
}

fn wait_for(stop: &AtomicBool) {
    while !stop.load(Ordering::Relaxed) {
        thread::sleep(Duration::from_millis(20));
    }
}

fn with_port(addr: SocketAddr, offset: u16) -> SocketAddr {
    if addr.port() == 0 {
        addr
    } else {
        SocketAddr::new(addr.ip(), addr.port() + offset)
    }
}

pub fn transmitter(run_dir: &Path, peers: &[(StreamLabel, SocketAddr)]) -> Result<()> {
    let s = load_scenario(run_dir)?;
    let stop = stop_flag();
    let opts = app_options(&s);
    let result = if s.protocol.is_ndn() {
        let tcp = s.protocol == Protocol::NdnTcp;
        let udp_bind = if tcp { SocketAddr::new(s.tx_addr.ip(), 0) } else { s.tx_addr };
        let fw =
            ForwarderHandle::spawn(runtime_config(udp_bind, tcp.then_some(s.tx_addr))).context("starting forwarder")?;
        let mut producers = Vec::new();
        for p in &s.profiles {
            let source = Box::new(SeededPayloads::new(s.seed, p.label));
            producers.push((p.label, spawn_ndn_producer(&fw, p.clone(), source, opts.clone())?));
        }
        announce(Some(if tcp { fw.tcp_addr().expect("listening") } else { fw.udp_addr() }));
        wait_for(&stop);
        let producers = producers.into_iter().map(|(l, h)| ProducerResult::new(l.as_str(), &h.stop())).collect();
        let stats = fw.shutdown();
        TransmitterResult {
            protocol: s.protocol.to_string(),
            producers,
            forwarder: Some(ForwarderReport::from_stats(&stats)),
        }
    } else {
        let limits = RunLimits { duration: s.duration + Duration::from_secs(3600), max_samples: s.max_samples };
        let mut publishers = Vec::new();
        for (i, p) in s.profiles.iter().enumerate() {
            let dest = peers
                .iter()
                .find(|(l, _)| *l == p.label)
                .map(|(_, a)| *a)
                .with_context(|| format!("no subscriber address for {}", p.label))?;
            let source = Box::new(SeededPayloads::new(s.seed, p.label));
            let local = with_port(s.tx_addr, i as u16);
            publishers.push((p.label, spawn_publisher(p.clone(), local, dest, source, limits, opts.clone())?));
        }
        announce(None);
        wait_for(&stop);
        let producers = publishers.into_iter().map(|(l, h)| ProducerResult::new(l.as_str(), &h.stop())).collect();
        TransmitterResult { protocol: s.protocol.to_string(), producers, forwarder: None }
    };
    write_json(&run_dir.join(TX_RESULT), &result)
}

pub fn receiver(run_dir: &Path, stream: StreamLabel, peer: Option<SocketAddr>) -> Result<()> {
    let s = load_scenario(run_dir)?;
    let stop = stop_flag();
    let opts = app_options(&s);
    let profile = s.profile(stream).clone();
    let limits = RunLimits { duration: s.duration, max_samples: s.max_samples };
    let (sink, samples) = mpsc::channel();
    let mut recorder = LatencyRecorder::new();

    let mut fw = None;
    let mut uplink = None;
    let handle = if s.protocol.is_ndn() {
        let Some(peer) = peer else { bail!("named-data receiver needs the transmitter address") };
        let tcp = s.protocol == Protocol::NdnTcp;
        let rx_addr = s.rx_addr(stream);
        let udp_bind = if tcp { SocketAddr::new(rx_addr.ip(), 0) } else { rx_addr };
        let f = ForwarderHandle::spawn(runtime_config(udp_bind, None)).context("starting forwarder")?;
        let face = if tcp { f.connect_tcp(peer) } else { f.connect_udp(peer) }
            .with_context(|| format!("connecting to transmitter at {peer}"))?;
        f.register_prefix(profile.ndn_name.clone(), face)?;
        uplink = Some(face);
        let h = spawn_ndn_consumer(&f, profile, s.protocol, limits, sink, opts)?;
        fw = Some(f);
        announce(None);
        h
    } else {
        let (h, addr) = spawn_subscriber(profile, s.rx_addr(stream), limits, sink, opts)?;
        announce(Some(addr));
        h
    };

    let hard_stop = Instant::now() + s.duration + Duration::from_secs(3600);
    while !handle.is_finished() {
        if stop.load(Ordering::Relaxed) || Instant::now() > hard_stop {
            handle.stop_flag().store(true, Ordering::Relaxed);
        }
        recorder.drain(&samples);
        thread::sleep(Duration::from_millis(20));
    }
    let report = handle.join();
    recorder.drain(&samples);

    let mut result = ReceiverResult::new(s.protocol.as_str(), stream.as_str(), &report);
    if let Some(f) = fw {
        let stats = f.shutdown();
        let fr = ForwarderReport::from_stats(&stats);
        let uplink_face =
            stats.faces.iter().find(|(face, _)| Some(face.id) == uplink && face.transport != FaceTransport::Internal);
        result.packets_in = uplink_face.map_or(0, |(_, st)| st.packets_in);
        result.endpoint_out = None;
        result.forwarder = Some(fr);
    }
    write_samples(&run_dir.join(samples_file(stream)), recorder.samples(stream))?;
    write_json(&run_dir.join(rx_result_file(stream)), &result)
}

/// Parses the `READY` line a child prints.
pub fn parse_ready(line: &str) -> Option<Option<SocketAddr>> {
    let rest = line.trim().strip_prefix("READY ")?;
    if rest == "-" {
        Some(None)
    } else {
        rest.parse().ok().map(Some)
    }
}

pub fn read_ready(out: impl Read + Send + 'static) -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in std::io::BufReader::new(out).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    rx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ready_lines() {
        assert_eq!(parse_ready("READY -"), Some(None));
        assert_eq!(parse_ready("READY 127.0.0.1:9\n"), Some(Some("127.0.0.1:9".parse().unwrap())));
        assert_eq!(parse_ready("hello"), None);
    }
}
