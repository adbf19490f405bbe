//! Builds and decodes packets as hex, for inspection and the golden corpus.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use trailerlink::codec::{AckFrame, DataPacket, InterestPacket, Nonce, Packet};
use trailerlink::pubsub::{fragment, AckMessage, PubSubMessage, ETHERNET_UDP_MTU};
use trailerlink::streams::can::{decapsulate, encapsulate, sample_signal_set};
use trailerlink::streams::{PayloadSource, SeededPayloads, StreamLabel, StreamProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BuildKind {
    Interest,
    Data,
    Ack,
    Pubsub,
    PubsubAck,
    Can,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DecodeKind {
    Ndn,
    Pubsub,
    Can,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One packet per line as plain lowercase hex.
    Hex,
    /// Offset, hex and ASCII columns.
    Dump,
}

/// The packets of `kind` for `stream`, deterministic in `seed`.
pub fn build(kind: BuildKind, stream: StreamLabel, seed: u64, mtu: usize) -> Result<Vec<Vec<u8>>> {
    let profile = StreamProfile::default_for(stream);
    let payload = || SeededPayloads::new(seed, stream).next_payload(profile.payload_bytes);
    Ok(match kind {
        BuildKind::Interest => {
            let nonce = Nonce((seed as u32).to_be_bytes());
            vec![InterestPacket::new(profile.ndn_name.clone(), nonce).with_must_be_fresh(true).encode()]
        }
        BuildKind::Data => vec![DataPacket::unsigned(profile.ndn_name.clone(), payload()).encode()?],
        BuildKind::Ack => vec![AckFrame { sequence: seed as u32, stream: stream.tag() }.encode().to_vec()],
        BuildKind::Pubsub => {
            fragment(profile.topic.id, seed, 0, &payload(), mtu)?.iter().map(PubSubMessage::encode).collect()
        }
        BuildKind::PubsubAck => {
            vec![AckMessage { topic_id: profile.topic.id, sequence: seed, timestamp_ns: 0 }.encode().to_vec()]
        }
        BuildKind::Can => vec![encapsulate(&sample_signal_set(seed as u8))?],
    })
}

pub fn format_packet(bytes: &[u8], format: Format) -> String {
    match format {
        Format::Hex => hex::encode(bytes),
        Format::Dump => {
            let mut out = String::new();
            for (i, chunk) in bytes.chunks(16).enumerate() {
                let hex: Vec<String> = chunk.iter().map(|b| format!("{b:02x}")).collect();
                let ascii: String = chunk.iter().map(|&b| if b.is_ascii_graphic() { b as char } else { '.' }).collect();
                let _ = writeln!(out, "{:08x}  {:<47}  {ascii}", i * 16, hex.join(" "));
            }
            out.trim_end().to_string()
        }
    }
}

pub fn build_cmd(kind: BuildKind, stream: StreamLabel, seed: u64, mtu: Option<usize>, format: Format) -> Result<()> {
    let packets = build(kind, stream, seed, mtu.unwrap_or(ETHERNET_UDP_MTU))?;
    for p in &packets {
        if format == Format::Dump {
            eprintln!("# {} bytes", p.len());
        }
        println!("{}", format_packet(p, format));
    }
    Ok(())
}

/// Reads hex (whitespace ignored) from a file or stdin, one packet per line.
fn read_hex_packets(input: Option<&Path>) -> Result<Vec<Vec<u8>>> {
    let mut text = String::new();
    match input {
        Some(p) => text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let compact: String = l.chars().filter(|c| !c.is_whitespace()).collect();
            hex::decode(&compact).with_context(|| format!("line {}: invalid hex", i + 1))
        })
        .collect()
}

pub fn describe(bytes: &[u8], kind: DecodeKind) -> Result<String> {
    Ok(match kind {
        DecodeKind::Ndn => {
            let (p, used) = Packet::decode(bytes)?;
            if used != bytes.len() {
                bail!("{} trailing bytes after packet", bytes.len() - used);
            }
            match p {
                Packet::Interest(i) => format!(
                    "Interest name={} nonce={} lifetime_ms={} must_be_fresh={} size={}",
                    i.name,
                    hex::encode(i.nonce.0),
                    i.lifetime_ms,
                    i.must_be_fresh,
                    used
                ),
                Packet::Data(d) => format!(
                    "Data name={} content={}B signature={:?}/{}B size={}",
                    d.name,
                    d.content.len(),
                    d.signature_kind,
                    d.signature_value.len(),
                    used
                ),
                Packet::Ack(a) => format!("Ack sequence={} stream={} size={}", a.sequence, a.stream, used),
            }
        }
        DecodeKind::Pubsub => {
            let m = PubSubMessage::decode(bytes)?;
            let h = m.header;
            if h.is_ack() {
                format!("PubSubAck topic={} sequence={}", h.topic_id, h.sequence)
            } else {
                format!(
                    "PubSub topic={} sequence={} fragment={}/{} offset={} payload={}B sample={}B",
                    h.topic_id,
                    h.sequence,
                    h.fragment_index,
                    h.fragment_count,
                    h.fragment_offset,
                    h.payload_len,
                    h.sample_len
                )
            }
        }
        DecodeKind::Can => {
            let frames = decapsulate(bytes)?;
            let parts: Vec<String> = frames
                .iter()
                .map(|f| format!("{:#010x}{}[{}]", f.can_id, if f.fd { " fd" } else { "" }, f.data.len()))
                .collect();
            format!("CAN {} frames: {}", frames.len(), parts.join(", "))
        }
    })
}

pub fn decode_cmd(input: Option<&Path>, kind: DecodeKind) -> Result<()> {
    let packets = read_hex_packets(input)?;
    if packets.is_empty() {
        bail!("no packets in input");
    }
    for (i, p) in packets.iter().enumerate() {
        let d = describe(p, kind).with_context(|| format!("packet {}", i + 1))?;
        println!("{d}");
    }
    Ok(())
}
