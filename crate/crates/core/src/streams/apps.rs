//! Producer and consumer loops for both transports. Each runs on its own
//! thread and reports through an mpsc channel of received samples.

use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Sender;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pacing::{Pacer, PacingMode};
use super::payload::{PayloadDigest, PayloadSource};
use super::profile::{Protocol, StreamLabel, StreamProfile};
use crate::clock::monotonic_ns;
use crate::codec::{sign_data, AckFrame, DataPacket, InterestPacket, Nonce, Packet, SigningKey};
use crate::forwarder::{AppFace, ForwarderError, ForwarderHandle};
use crate::pubsub::{EndpointStats, Publisher, Subscriber};

const POLL: Duration = Duration::from_millis(50);

/// Where the per-stream delay sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayPlacement {
    /// The requesting side sleeps between requests (named-data default).
    /// For publish-subscribe the publisher waits for each acknowledgement
    /// and the subscriber sleeps after every sample.
    Consumer,
    /// The sending side paces itself (publish-subscribe default). For
    /// named data the producer holds each answer until a period has
    /// passed since the previous one.
    Producer,
}

impl DelayPlacement {
    pub fn default_for(protocol: Protocol) -> Self {
        if protocol.is_ndn() {
            DelayPlacement::Consumer
        } else {
            DelayPlacement::Producer
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DelayPlacement::Consumer => "consumer",
            DelayPlacement::Producer => "producer",
        }
    }
}

impl std::str::FromStr for DelayPlacement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "consumer" => Ok(DelayPlacement::Consumer),
            "producer" => Ok(DelayPlacement::Producer),
            other => Err(format!("unknown delay placement '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppOptions {
    pub pacing: PacingMode,
    pub placement: DelayPlacement,
    /// How long a consumer waits for Data, or a publisher for an ACK.
    pub timeout: Duration,
    pub mtu: usize,
    pub fragment_timeout: Duration,
    pub signing_key: Option<SigningKey>,
    /// Seed for interest nonces.
    pub seed: u64,
}

impl AppOptions {
    pub fn for_protocol(protocol: Protocol) -> Self {
        Self {
            pacing: PacingMode::Relative,
            placement: DelayPlacement::default_for(protocol),
            timeout: Duration::from_secs(1),
            mtu: crate::pubsub::ETHERNET_UDP_MTU,
            fragment_timeout: crate::pubsub::DEFAULT_FRAGMENT_TIMEOUT,
            signing_key: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunLimits {
    pub duration: Duration,
    pub max_samples: Option<u64>,
}

impl RunLimits {
    pub fn for_duration(duration: Duration) -> Self {
        Self { duration, max_samples: None }
    }

    fn reached(&self, start: Instant, samples: u64) -> bool {
        start.elapsed() >= self.duration || self.max_samples.is_some_and(|m| samples >= m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReceivedSample {
    pub label: StreamLabel,
    pub seq: u64,
    pub receipt_ns: u64,
    pub payload_len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsumerReport {
    pub samples: u64,
    /// Interests sent (named data) or zero (publish-subscribe).
    pub requests: u64,
    pub timeouts: u64,
    pub length_mismatches: u64,
    pub acks_sent: u64,
    /// Samples dropped after a fragment timeout.
    pub lost: u64,
    pub payload_digest: String,
    pub endpoint: Option<EndpointStats>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProducerReport {
    pub requests: u64,
    pub samples_sent: u64,
    pub acks_received: u64,
    pub ack_timeouts: u64,
    pub endpoint: Option<EndpointStats>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartError {
    #[error("endpoint setup failed: {0}")]
    Io(#[from] io::Error),
    #[error("prefix registration failed: {0}")]
    Register(#[from] ForwarderError),
}

/// A running producer or consumer thread.
pub struct RunHandle<R> {
    stop: Arc<AtomicBool>,
    thread: JoinHandle<R>,
}

impl<R> RunHandle<R> {
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }

    pub fn is_finished(&self) -> bool {
        self.thread.is_finished()
    }

    /// Signals the loop to stop and waits for its report.
    pub fn stop(self) -> R {
        self.stop.store(true, Ordering::Relaxed);
        self.join()
    }

    pub fn join(self) -> R {
        self.thread.join().expect("stream thread panicked")
    }
}

/// Returns once the thread runs under its name, so it is visible to
/// samplers as soon as this returns.
fn spawn_named<R: Send + 'static>(
    name: String,
    stop: Arc<AtomicBool>,
    f: impl FnOnce(&AtomicBool) -> R + Send + 'static,
) -> io::Result<RunHandle<R>> {
    let flag = stop.clone();
    let (started_tx, started) = std::sync::mpsc::channel();
    let thread = thread::Builder::new().name(name).spawn(move || {
        let _ = started_tx.send(());
        f(&flag)
    })?;
    let _ = started.recv();
    Ok(RunHandle { stop, thread })
}

/// Registers the profile's name on a new internal face and answers every
/// matching Interest with a fresh payload.
pub fn spawn_ndn_producer(
    fw: &ForwarderHandle,
    profile: StreamProfile,
    mut source: Box<dyn PayloadSource>,
    opts: AppOptions,
) -> Result<RunHandle<ProducerReport>, StartError> {
    let face = fw.attach_app(&format!("{}-producer", profile.label));
    fw.register_prefix(profile.ndn_name.clone(), face.id())?;
    let name = format!("{}-prod", profile.label);
    Ok(spawn_named(name, Arc::new(AtomicBool::new(false)), move |stop| {
        ndn_producer_loop(&face, &profile, source.as_mut(), &opts, stop)
    })?)
}

fn ndn_producer_loop(
    face: &AppFace,
    profile: &StreamProfile,
    source: &mut dyn PayloadSource,
    opts: &AppOptions,
    stop: &AtomicBool,
) -> ProducerReport {
    let mut report = ProducerReport::default();
    let mut last_answer: Option<Instant> = None;
    while !stop.load(Ordering::Relaxed) {
        let Some(bytes) = face.recv_timeout(POLL) else { continue };
        let interest = match Packet::decode(&bytes) {
            Ok((Packet::Interest(i), _)) => i,
            Ok((Packet::Ack(_), _)) => {
                report.acks_received += 1;
                continue;
            }
            _ => continue,
        };
        if !profile.ndn_name.is_prefix_of(&interest.name) {
            continue;
        }
        report.requests += 1;
        if opts.placement == DelayPlacement::Producer {
            if let Some(t) = last_answer {
                let due = t + profile.period;
                let now = Instant::now();
                if due > now {
                    thread::sleep(due - now);
                }
            }
        }
        let mut data = DataPacket::unsigned(interest.name, source.next_payload(profile.payload_bytes));
        if let Some(key) = &opts.signing_key {
            data = sign_data(data, key);
        }
        let Ok(encoded) = data.encode() else { break };
        if !face.send(encoded) {
            break;
        }
        report.samples_sent += 1;
        last_answer = Some(Instant::now());
    }
    report
}

/// The request loop: Interest, wait for Data, acknowledge (stream faces
/// only), pause, repeat.
pub fn spawn_ndn_consumer(
    fw: &ForwarderHandle,
    profile: StreamProfile,
    protocol: Protocol,
    limits: RunLimits,
    sink: Sender<ReceivedSample>,
    opts: AppOptions,
) -> Result<RunHandle<ConsumerReport>, StartError> {
    let face = fw.attach_app(&format!("{}-consumer", profile.label));
    let name = format!("{}-cons", profile.label);
    Ok(spawn_named(name, Arc::new(AtomicBool::new(false)), move |stop| {
        ndn_consumer_loop(&face, &profile, protocol == Protocol::NdnTcp, limits, &sink, &opts, stop)
    })?)
}

fn ndn_consumer_loop(
    face: &AppFace,
    profile: &StreamProfile,
    send_ack: bool,
    limits: RunLimits,
    sink: &Sender<ReceivedSample>,
    opts: &AppOptions,
    stop: &AtomicBool,
) -> ConsumerReport {
    let mut report = ConsumerReport::default();
    let mut digest = PayloadDigest::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ profile.label.tag() as u64);
    let mut pacer = Pacer::new(opts.pacing, profile.period);
    let start = Instant::now();
    while !stop.load(Ordering::Relaxed) && !limits.reached(start, report.samples) {
        let interest = InterestPacket::new(profile.ndn_name.clone(), Nonce(rng.gen()))
            .with_must_be_fresh(true)
            .with_lifetime_ms(opts.timeout.as_millis() as u64);
        if !face.send(interest.encode()) {
            break;
        }
        report.requests += 1;

        let deadline = Instant::now() + opts.timeout;
        let mut answer = None;
        while answer.is_none() && !stop.load(Ordering::Relaxed) {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            let Some(bytes) = face.recv_timeout((deadline - now).min(POLL)) else { continue };
            let receipt_ns = monotonic_ns();
            if let Ok((Packet::Data(d), _)) = Packet::decode(&bytes) {
                if d.name == interest.name {
                    answer = Some((d, receipt_ns));
                }
            }
        }
        let Some((data, receipt_ns)) = answer else {
            if stop.load(Ordering::Relaxed) {
                // the run ended mid-wait; not a timeout
                report.requests -= 1;
                break;
            }
            report.timeouts += 1;
            continue;
        };

        let seq = report.samples;
        report.samples += 1;
        if data.content.len() != profile.payload_bytes {
            report.length_mismatches += 1;
        }
        digest.update(&data.content);
        let _ = sink.send(ReceivedSample { label: profile.label, seq, receipt_ns, payload_len: data.content.len() });
        if send_ack {
            let ack = AckFrame { sequence: seq as u32, stream: profile.label.tag() };
            if face.send(ack.encode().to_vec()) {
                report.acks_sent += 1;
            }
        }
        if opts.placement == DelayPlacement::Consumer {
            pacer.wait();
        }
    }
    report.payload_digest = digest.hex();
    report
}

/// Publishes a fresh payload every period until stopped.
pub fn spawn_publisher(
    profile: StreamProfile,
    local: SocketAddr,
    dest: SocketAddr,
    mut source: Box<dyn PayloadSource>,
    limits: RunLimits,
    opts: AppOptions,
) -> Result<RunHandle<ProducerReport>, StartError> {
    let mut publisher = Publisher::bind(local, dest, profile.topic.clone(), opts.mtu)?;
    let name = format!("{}-pub", profile.label);
    Ok(spawn_named(name, Arc::new(AtomicBool::new(false)), move |stop| {
        let mut report = ProducerReport::default();
        let mut pacer = Pacer::new(opts.pacing, profile.period);
        let start = Instant::now();
        while !stop.load(Ordering::Relaxed) && !limits.reached(start, report.samples_sent) {
            let payload = source.next_payload(profile.payload_bytes);
            if publisher.publish(&payload).is_err() {
                break;
            }
            report.samples_sent += 1;
            match opts.placement {
                DelayPlacement::Producer => pacer.wait(),
                DelayPlacement::Consumer => {
                    let deadline = Instant::now() + opts.timeout;
                    let before = publisher.stats().acks;
                    while publisher.stats().acks == before && Instant::now() < deadline && !stop.load(Ordering::Relaxed)
                    {
                        if publisher.poll_acks() == 0 {
                            thread::sleep(Duration::from_micros(50));
                        }
                    }
                    if publisher.stats().acks == before {
                        report.ack_timeouts += 1;
                    }
                }
            }
        }
        // collect acknowledgements still in flight
        let settle = Instant::now() + Duration::from_millis(50);
        while Instant::now() < settle {
            publisher.poll_acks();
            thread::sleep(Duration::from_millis(5));
        }
        let stats = publisher.stats();
        report.acks_received = stats.acks;
        report.endpoint = Some(stats);
        report
    })?)
}

/// Passive subscriber: every completed sample is timestamped and forwarded.
pub fn spawn_subscriber(
    profile: StreamProfile,
    local: SocketAddr,
    limits: RunLimits,
    sink: Sender<ReceivedSample>,
    opts: AppOptions,
) -> Result<(RunHandle<ConsumerReport>, SocketAddr), StartError> {
    let mut subscriber = Subscriber::bind(local, profile.topic.clone(), opts.fragment_timeout)?;
    let bound = subscriber.local_addr()?;
    let name = format!("{}-sub", profile.label);
    let handle = spawn_named(name, Arc::new(AtomicBool::new(false)), move |stop| {
        let mut report = ConsumerReport::default();
        let mut digest = PayloadDigest::new();
        let start = Instant::now();
        while !stop.load(Ordering::Relaxed) && !limits.reached(start, report.samples) {
            let delivery = match subscriber.recv(POLL) {
                Ok(Some(d)) => d,
                Ok(None) => continue,
                Err(_) => break,
            };
            let seq = report.samples;
            report.samples += 1;
            let payload = &delivery.sample.payload;
            if payload.len() != profile.payload_bytes {
                report.length_mismatches += 1;
            }
            digest.update(payload);
            let _ = sink.send(ReceivedSample {
                label: profile.label,
                seq,
                receipt_ns: delivery.receipt_ns,
                payload_len: payload.len(),
            });
            if opts.placement == DelayPlacement::Consumer {
                thread::sleep(profile.period);
            }
        }
        let stats = subscriber.stats();
        report.acks_sent = stats.acks;
        report.lost = subscriber.lost();
        report.payload_digest = digest.hex();
        report.endpoint = Some(stats);
        report
    })?;
    Ok((handle, bound))
}
