//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use trailerlink::codec::{
    data_wire_accounting, interest_wire_accounting, DataPacket, InterestPacket, Name, Nonce, SignatureKind,
    StreamFramer, Transport,
};
use trailerlink::forwarder::{Action, FaceId, FaceTransport, Fib, Forwarder};
use trailerlink::metrics::{reference, samples_from_receipts, summarize};
use trailerlink::pairing::{
    spoof_check, step, Effect, FailReason, GpsFix, PairingEvent, PairingSession, PairingState, PairingWorld,
    SecondFactor, SpoofCheckParams, Verdict,
};
use trailerlink::pubsub::{
    ack_wire_accounting, fragment, sample_wire_accounting, PubSubMessage, Reassembler, ETHERNET_UDP_MTU,
};
use trailerlink::streams::{PayloadDigest, PayloadSource, Protocol, SeededPayloads, StreamLabel, StreamProfile};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

/// TLV element written from first principles: 1-byte length below 253,
/// otherwise 0xFD and a big-endian u16.
fn tlv(typ: u8, value: &[u8]) -> Vec<u8> {
    let mut out = vec![typ];
    if value.len() < 253 {
        out.push(value.len() as u8);
    } else {
        out.push(0xFD);
        out.extend_from_slice(&(value.len() as u16).to_be_bytes());
    }
    out.extend_from_slice(value);
    out
}

fn oracle_nonneg(v: u64) -> Vec<u8> {
    let b = v.to_be_bytes();
    let keep = if v < 1 << 8 {
        1
    } else if v < 1 << 16 {
        2
    } else if v < 1 << 32 {
        4
    } else {
        8
    };
    b[8 - keep..].to_vec()
}

fn oracle_name(components: &[Vec<u8>]) -> Vec<u8> {
    let inner: Vec<u8> = components.iter().flat_map(|c| tlv(0x08, c)).collect();
    tlv(0x07, &inner)
}

fn oracle_interest(components: &[Vec<u8>], nonce: [u8; 4], lifetime: u64, fresh: bool) -> Vec<u8> {
    let mut v = oracle_name(components);
    if fresh {
        v.extend(tlv(0x12, &[]));
    }
    v.extend(tlv(0x0A, &nonce));
    v.extend(tlv(0x0C, &oracle_nonneg(lifetime)));
    tlv(0x05, &v)
}

fn oracle_data(components: &[Vec<u8>], content: &[u8], kind: u8, sig: &[u8]) -> Vec<u8> {
    let mut v = oracle_name(components);
    v.extend(tlv(0x15, content));
    v.extend(tlv(0x16, &[kind]));
    v.extend(tlv(0x17, sig));
    tlv(0x06, &v)
}

fn random_components(rng: &mut impl Rng) -> Vec<Vec<u8>> {
    let n = rng.gen_range(1..=6);
    (0..n)
        .map(|_| {
            let len = if rng.gen_ratio(1, 20) { rng.gen_range(253..400) } else { rng.gen_range(1..24) };
            (0..len).map(|_| rng.gen()).collect()
        })
        .collect()
}

// ------------------------------------------------------------ criterion 1

fn codec_properties() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut stream = Vec::new();
    let mut expected = Vec::new();
    for i in 0..10_000 {
        let comps = random_components(&mut rng);
        let name = Name::from_components(comps.clone()).map_err(|e| e.to_string())?;
        let bytes = if i % 2 == 0 {
            let nonce: [u8; 4] = rng.gen();
            let lifetime = match rng.gen_range(0..4) {
                0 => rng.gen_range(0..256),
                1 => rng.gen_range(256..65_536),
                2 => rng.gen_range(65_536..1 << 32),
                _ => rng.gen(),
            };
            let fresh = rng.gen();
            let p = InterestPacket::new(name, Nonce(nonce)).with_lifetime_ms(lifetime).with_must_be_fresh(fresh);
            let bytes = p.encode();
            ensure(bytes == oracle_interest(&comps, nonce, lifetime, fresh), || {
                format!("interest {i}: encoding differs from the oracle")
            })?;
            let (back, used) = InterestPacket::decode(&bytes).map_err(|e| format!("interest {i}: {e}"))?;
            ensure(back == p && used == bytes.len(), || format!("interest {i}: roundtrip differs"))?;
            ensure(back.encode() == bytes, || format!("interest {i}: re-encoding differs"))?;
            bytes
        } else {
            let len = if rng.gen_ratio(1, 10) { rng.gen_range(0..=8800) } else { rng.gen_range(0..300) };
            let content: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let kind: u8 = rng.gen();
            let sig: Vec<u8> = (0..rng.gen_range(0..=64)).map(|_| rng.gen()).collect();
            let p = DataPacket {
                name,
                content: content.clone(),
                signature_kind: SignatureKind::from_code(kind),
                signature_value: sig.clone(),
            };
            let bytes = p.encode().map_err(|e| format!("data {i}: {e}"))?;
            ensure(bytes == oracle_data(&comps, &content, kind, &sig), || {
                format!("data {i}: encoding differs from the oracle")
            })?;
            let (back, used) = DataPacket::decode(&bytes).map_err(|e| format!("data {i}: {e}"))?;
            ensure(back == p && used == bytes.len(), || format!("data {i}: roundtrip differs"))?;
            ensure(back.encode().unwrap() == bytes, || format!("data {i}: re-encoding differs"))?;
            bytes
        };
        stream.extend_from_slice(&bytes);
        expected.push(bytes);
    }

    // the concatenation, cut at random chunk sizes, yields the same packets
    for round in 0..5 {
        let mut framer = StreamFramer::new();
        let mut got = Vec::new();
        let mut pos = 0;
        while pos < stream.len() {
            let max = [1, 7, 64, 1500, 65_536][round];
            let n = rng.gen_range(1..=max).min(stream.len() - pos);
            framer.push(&stream[pos..pos + n]);
            pos += n;
            while let Some(frame) = framer.next_frame().map_err(|e| format!("framer: {e}"))? {
                got.push(frame);
            }
        }
        ensure(got.len() == expected.len(), || {
            format!("round {round}: {} frames, expected {}", got.len(), expected.len())
        })?;
        ensure(got == expected, || format!("round {round}: frames differ"))?;
        ensure(framer.buffered() == 0, || format!("round {round}: bytes left over"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:.1?}"))?;
    Ok(format!("10000 roundtrips bit-exact, 5 chunked parses of {} packets, {elapsed:.1?}", expected.len()))
}

// ------------------------------------------------------------ criterion 2

fn byte_accounting() -> Outcome {
    let can = StreamProfile::default_for(StreamLabel::Can);
    let interest = InterestPacket::new(can.ndn_name.clone(), Nonce([1, 2, 3, 4])).with_must_be_fresh(true);
    // Name 2+(2+7)+(2+3), MustBeFresh 2, Nonce 6, Lifetime 4, outer 2;
    // then UDP 8, IPv4 20, Ethernet 14.
    let interest_oracle = (2 + 9 + 5) + 2 + 6 + 4 + 2 + 8 + 20 + 14;
    let interest_wire = interest_wire_accounting(&interest, Transport::Udp).total_on_wire;
    ensure(interest_wire == 72 && interest_oracle == 72, || {
        format!("interest {interest_wire} bytes, oracle {interest_oracle}")
    })?;
    // Header 64, then UDP 8, IPv4 20, Ethernet 14.
    let ack_oracle = 64 + 8 + 20 + 14;
    let ack_wire = ack_wire_accounting().total_on_wire;
    ensure(ack_wire == 106 && ack_oracle == 106, || format!("ack {ack_wire} bytes, oracle {ack_oracle}"))?;

    let mut lines = vec![format!("interest {interest_wire} [72], ack {ack_wire} [106]")];
    for label in StreamLabel::ALL {
        let p = StreamProfile::default_for(label);
        let data = DataPacket::unsigned(p.ndn_name.clone(), vec![0; p.payload_bytes]);
        let ndn = data_wire_accounting(&data, Transport::Udp);
        let ps = sample_wire_accounting(p.payload_bytes, ETHERNET_UDP_MTU);
        let (pub_ndn, pub_ps) = reference::wire_bytes(label);
        ensure(ndn.protocol_overhead_bytes < ps.protocol_overhead_bytes, || {
            format!(
                "{label}: ndn overhead {} not below pub/sub {}",
                ndn.protocol_overhead_bytes, ps.protocol_overhead_bytes
            )
        })?;
        lines.push(format!(
            "{label} ndn {} [{pub_ndn}] ovh {} / pubsub {} [{pub_ps}] ovh {}",
            ndn.total_on_wire, ndn.protocol_overhead_bytes, ps.total_on_wire, ps.protocol_overhead_bytes
        ));
    }
    Ok(lines.join("; "))
}

// ------------------------------------------------------------ criterion 3

/// Brute-force model of the forwarder: a list of pending requests and a
/// list of routes, searched linearly.
#[derive(Default)]
struct ForwarderModel {
    routes: Vec<(Vec<Vec<u8>>, FaceId)>,
    pending: Vec<ModelEntry>,
    no_route: u64,
    duplicate: u64,
    unsolicited: u64,
}

#[derive(Clone)]
struct ModelEntry {
    name: Vec<Vec<u8>>,
    /// requesting face and when its request lapses
    downstream: BTreeMap<FaceId, u64>,
    nonces: Vec<[u8; 4]>,
    expiry: u64,
}

fn is_prefix(p: &[Vec<u8>], n: &[Vec<u8>]) -> bool {
    p.len() <= n.len() && p.iter().zip(n).all(|(a, b)| a == b)
}

impl ForwarderModel {
    fn hops(&self, name: &[Vec<u8>], arrival: FaceId) -> BTreeSet<FaceId> {
        let best = self.routes.iter().filter(|(p, _)| is_prefix(p, name)).map(|(p, _)| p.len()).max();
        self.routes
            .iter()
            .filter(|(p, f)| Some(p.len()) == best && is_prefix(p, name) && *f != arrival)
            .map(|(_, f)| *f)
            .collect()
    }

    fn find(&self, name: &[Vec<u8>]) -> Option<usize> {
        self.pending.iter().position(|e| e.name == name)
    }

    fn interest(
        &mut self,
        face: FaceId,
        name: &[Vec<u8>],
        nonce: [u8; 4],
        lifetime: u64,
        now: u64,
    ) -> BTreeSet<FaceId> {
        if let Some(i) = self.find(name) {
            if self.pending[i].expiry <= now {
                self.pending.remove(i);
            }
        }
        match self.find(name) {
            Some(i) if self.pending[i].nonces.contains(&nonce) => {
                self.duplicate += 1;
                BTreeSet::new()
            }
            Some(i) => {
                let e = &mut self.pending[i];
                let again = e.downstream.contains_key(&face);
                e.downstream.insert(face, now + lifetime);
                e.nonces.push(nonce);
                e.expiry = *e.downstream.values().max().unwrap();
                if !again {
                    return BTreeSet::new();
                }
                let hops = self.hops(name, face);
                if hops.is_empty() {
                    self.no_route += 1;
                }
                hops
            }
            None => {
                let hops = self.hops(name, face);
                if hops.is_empty() {
                    self.no_route += 1;
                } else {
                    self.pending.push(ModelEntry {
                        name: name.to_vec(),
                        downstream: BTreeMap::from([(face, now + lifetime)]),
                        nonces: vec![nonce],
                        expiry: now + lifetime,
                    });
                }
                hops
            }
        }
    }

    fn data(&mut self, face: FaceId, name: &[Vec<u8>], now: u64) -> BTreeSet<FaceId> {
        match self.find(name) {
            Some(i) => {
                let e = self.pending.remove(i);
                if e.expiry <= now {
                    self.unsolicited += 1;
                    return BTreeSet::new();
                }
                e.downstream.into_iter().filter(|&(f, exp)| f != face && exp > now).map(|(f, _)| f).collect()
            }
            None => {
                self.unsolicited += 1;
                BTreeSet::new()
            }
        }
    }

    fn expire(&mut self, now: u64) -> usize {
        let before = self.pending.len();
        self.pending.retain(|e| e.expiry > now);
        before - self.pending.len()
    }
}

fn random_name(rng: &mut impl Rng, max_len: usize) -> Vec<Vec<u8>> {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| vec![b"abc"[rng.gen_range(0..3)]]).collect()
}

fn faces_of(actions: &[Action]) -> BTreeSet<FaceId> {
    actions.iter().map(Action::face).collect()
}

/// A name a face asked for, with the request's expiry in ms.
type Request = (Vec<Vec<u8>>, u64);

fn forwarder_trace(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fw = Forwarder::default();
    let faces: Vec<FaceId> = (0..5).map(|i| fw.add_face(FaceTransport::Internal, "", format!("app://{i}"))).collect();
    let mut model = ForwarderModel::default();
    for _ in 0..rng.gen_range(1..6) {
        let prefix = random_name(&mut rng, 3);
        let face = *faces.choose(&mut rng).unwrap();
        fw.register_prefix(Name::from_components(prefix.clone()).unwrap(), face).map_err(|e| e.to_string())?;
        if !model.routes.contains(&(prefix.clone(), face)) {
            model.routes.push((prefix, face));
        }
    }
    // what each face has asked for and not yet received: (name, expiry)
    let mut asked: BTreeMap<FaceId, Vec<Request>> = BTreeMap::new();
    let mut now = 0u64;
    for step_no in 0..200 {
        now += rng.gen_range(0..1500);
        let at = Duration::from_millis(now);
        let face = *faces.choose(&mut rng).unwrap();
        let name = random_name(&mut rng, 4);
        let wire_name = Name::from_components(name.clone()).unwrap();
        let ctx = |what: &str| format!("seed {seed} step {step_no}: {what}");
        match rng.gen_range(0..10) {
            0..=4 => {
                let nonce = [0, 0, 0, rng.gen_range(0..16)];
                let lifetime = [100, 1000, 4000][rng.gen_range(0..3)];
                let i =
                    InterestPacket::new(wire_name, Nonce(nonce)).with_lifetime_ms(lifetime).with_must_be_fresh(true);
                let got = fw.on_interest(face, i, at);
                ensure(got.iter().all(|a| matches!(a, Action::SendInterest { .. })), || {
                    ctx("interest produced non-interest")
                })?;
                let want = model.interest(face, &name, nonce, lifetime, now);
                ensure(faces_of(&got) == want && got.len() == want.len(), || {
                    ctx(&format!("interest out {:?} vs oracle {want:?}", faces_of(&got)))
                })?;
                if model.find(&name).is_some_and(|e| model.pending[e].downstream.contains_key(&face)) {
                    asked.entry(face).or_default().push((name.clone(), now + lifetime));
                }
            }
            5..=8 => {
                let got = fw.on_data(face, DataPacket::unsigned(wire_name, vec![1]), at);
                let want = model.data(face, &name, now);
                ensure(faces_of(&got) == want && got.len() == want.len(), || {
                    ctx(&format!("data out {:?} vs oracle {want:?}", faces_of(&got)))
                })?;
                for f in &want {
                    let list = asked.entry(*f).or_default();
                    ensure(list.iter().any(|(n, exp)| *n == name && *exp > now), || {
                        ctx(&format!("data to face {f} that never asked"))
                    })?;
                    list.retain(|(n, _)| *n != name);
                }
            }
            _ => {
                let got = fw.expire_pit(at);
                let want = model.expire(now);
                ensure(got == want, || ctx(&format!("expired {got} vs oracle {want}")))?;
            }
        }
        let c = fw.counters();
        ensure(
            (c.no_route, c.duplicate_nonce, c.unsolicited) == (model.no_route, model.duplicate, model.unsolicited),
            || ctx("drop counters differ"),
        )?;
        ensure(fw.pit().len() == model.pending.len(), || ctx("pit sizes differ"))?;
        for e in &model.pending {
            let entry = fw.pit().get(&Name::from_components(e.name.clone()).unwrap());
            let same = entry.is_some_and(|p| {
                p.downstream.len() == e.downstream.len()
                    && p.downstream
                        .iter()
                        .zip(&e.downstream)
                        .all(|((f, x), (g, y))| f == g && *x == Duration::from_millis(*y))
            });
            ensure(same, || ctx("aggregation sets differ"))?;
        }
    }
    Ok(())
}

fn longest_prefix_fibs() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for fib_no in 0..100 {
        let mut fib = Fib::new();
        let mut entries: Vec<Vec<Vec<u8>>> = Vec::new();
        for _ in 0..rng.gen_range(1..=100) {
            let p = random_name(&mut rng, 6);
            fib.insert(Name::from_components(p.clone()).unwrap(), rng.gen_range(1..10));
            if !entries.contains(&p) {
                entries.push(p);
            }
        }
        for _ in 0..200 {
            let n = random_name(&mut rng, 6);
            let want = entries.iter().filter(|p| is_prefix(p, &n)).max_by_key(|p| p.len());
            let got = fib.lookup(&Name::from_components(n.clone()).unwrap()).map(|e| e.prefix.components().to_vec());
            ensure(got.as_ref() == want, || format!("fib {fib_no}: lookup {got:?} vs scan {want:?}"))?;
        }
    }
    Ok(())
}

fn forwarder_correctness() -> Outcome {
    for seed in 0..500 {
        forwarder_trace(seed)?;
    }
    longest_prefix_fibs()?;
    Ok("500 traces of 200 events match the model; 100 FIBs x 200 lookups match the scan".into())
}

// ------------------------------------------------------------ criterion 4

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_trailerlink")
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// A row of summary.csv: (stream, count, mean, min, max).
type SummaryRow = (String, u64, f64, f64, f64);

fn read_summary_rows(path: &Path) -> Result<Vec<SummaryRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or(format!("bad row '{line}'"));
        rows.push((f[1].to_string(), num(2)? as u64, num(3)?, num(4)?, num(5)?));
    }
    Ok(rows)
}

fn run_all(out: &Path, extra: &[&str]) -> Result<(), String> {
    let mut cmd = Command::new(bin());
    cmd.args(["run", "--protocol", "all", "--out"]).arg(out).args(extra);
    let o = cmd.output().map_err(|e| e.to_string())?;
    ensure(o.status.success(), || {
        format!("run exited with {}: {}", o.status, String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or(""))
    })
}

fn desk_benchmark() -> Outcome {
    let secs: String = std::env::var("TRAILERLINK_ACCEPTANCE_SECONDS").unwrap_or_else(|_| "30".into());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all(dir.path(), &["--duration", &secs])?;
    let periods = BTreeMap::from([("lidar", 1.0), ("can", 8.0), ("cam", 20.0)]);
    let cam_fragments = 8000usize.div_ceil(ETHERNET_UDP_MTU - 64);
    ensure(cam_fragments == 6, || format!("{cam_fragments} fragments"))?;
    let mut notes = Vec::new();
    for protocol in Protocol::ALL {
        let run = dir.path().join(protocol.as_str());
        let rows = read_summary_rows(&run.join("summary.csv"))?;
        ensure(rows.len() == 3, || format!("{protocol}: {} summary rows", rows.len()))?;
        for (stream, count, mean, min, max) in &rows {
            let period = periods[stream.as_str()];
            ensure(*mean >= period, || format!("(a) {protocol}/{stream}: mean {mean} ms below {period} ms"))?;
            ensure(min <= mean && mean <= max, || format!("(b) {protocol}/{stream}: {min} / {mean} / {max}"))?;
            let label: StreamLabel = stream.parse().unwrap();
            let published = reference::latency(protocol, label);
            notes.push(format!("{protocol}/{stream} n={count} mean {mean:.3} [{}]", published.mean_ms));
        }
        let manifest = read_json(&run.join("manifest.json"))?;
        let streams = &manifest["streams"];
        let pps = streams["cam"]["packets_per_sample"].as_f64();
        let want = if protocol.is_ndn() { 1.0 } else { cam_fragments as f64 };
        ensure(pps == Some(want), || format!("(c) {protocol}: cam used {pps:?} packets per sample, expected {want}"))?;
        for s in ["lidar", "can", "cam"] {
            let m = streams[s]["length_mismatches"].as_u64();
            ensure(m == Some(0), || format!("(d) {protocol}/{s}: {m:?} length mismatches"))?;
        }
    }
    Ok(format!("{secs} s per protocol; {}", notes.join(", ")))
}

// ------------------------------------------------------------ criterion 5

fn fragmentation_inverse() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base: Vec<u8> = (0..65_536u32).map(|i| (i.wrapping_mul(2_654_435_761) >> 13) as u8).collect();
    let mut checked = 0u64;
    for mtu in [576usize, 1472, 9000] {
        let mut reassembler = Reassembler::new(Duration::from_secs(3600));
        for len in 1..=base.len() {
            let payload = &base[..len];
            let seq = len as u64;
            let mut frags = fragment(7, seq, 0, payload, mtu).map_err(|e| format!("mtu {mtu} len {len}: {e}"))?;
            let want = len.div_ceil(mtu - 64);
            ensure(frags.len() == want, || format!("mtu {mtu} len {len}: {} fragments, expected {want}", frags.len()))?;
            frags.shuffle(&mut rng);
            let dup = frags[rng.gen_range(0..frags.len())].clone();
            let at = rng.gen_range(0..=frags.len());
            frags.insert(at, dup);
            let mut done = None;
            for f in &frags {
                let wire = f.encode();
                ensure(wire.len() <= mtu, || format!("mtu {mtu} len {len}: datagram of {} bytes", wire.len()))?;
                let back = PubSubMessage::decode(&wire).map_err(|e| format!("mtu {mtu} len {len}: {e}"))?;
                if let Some(s) =
                    reassembler.insert(&back, Duration::ZERO).map_err(|e| format!("mtu {mtu} len {len}: {e}"))?
                {
                    ensure(done.is_none(), || format!("mtu {mtu} len {len}: sample completed twice"))?;
                    done = Some(s);
                }
            }
            let s = done.ok_or_else(|| format!("mtu {mtu} len {len}: never completed"))?;
            ensure(s.payload == payload && s.sequence == seq, || format!("mtu {mtu} len {len}: payload differs"))?;
            checked += 1;
        }
        ensure(reassembler.pending() == 0, || format!("mtu {mtu}: partial samples left"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{checked} samples, permuted with one duplicate each, {elapsed:.1?}"))
}

// ------------------------------------------------------------ criterion 6

fn stats_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for set in 0..10_000 {
        let n = rng.gen_range(2..200);
        let mut t = rng.gen_range(0..1u64 << 40);
        let mut receipts = vec![t];
        for _ in 1..n {
            t += match rng.gen_range(0..4) {
                0 => 0,
                1 => rng.gen_range(0..1_000),
                _ => rng.gen_range(0..50_000_000),
            };
            receipts.push(t);
        }
        let deltas: Vec<u64> = receipts.windows(2).map(|w| w[1] - w[0]).collect();
        let min = *deltas.iter().min().unwrap() as f64 / 1e6;
        let max = *deltas.iter().max().unwrap() as f64 / 1e6;
        let total: u128 = deltas.iter().map(|&d| d as u128).sum();
        let mean = total as f64 / 1e6 / deltas.len() as f64;

        let s =
            summarize(&samples_from_receipts(StreamLabel::Lidar, &receipts)).map_err(|e| format!("set {set}: {e}"))?;
        ensure(s.packets_count == n as u64, || format!("set {set}: count {} vs {n}", s.packets_count))?;
        ensure(s.min_ms == min && s.max_ms == max, || {
            format!("set {set}: min/max {}/{} vs {min}/{max}", s.min_ms, s.max_ms)
        })?;
        let rel = if mean == 0.0 { s.mean_ms.abs() } else { ((s.mean_ms - mean) / mean).abs() };
        ensure(rel <= 1e-9, || format!("set {set}: mean {} vs {mean}", s.mean_ms))?;
    }
    Ok("10000 sets agree".into())
}

// ------------------------------------------------------------ criterion 7

fn fixes(points: &[(f64, f64)]) -> Vec<GpsFix> {
    points.iter().enumerate().map(|(i, &(x, y))| GpsFix::new(i as u64, x, y)).collect()
}

fn gps_detector() -> Outcome {
    let track = fixes(&[(0.0, 0.0), (3.5, -2.0), (100.25, 7.0)]);
    let zero =
        spoof_check(&track, &track, &SpoofCheckParams::new(0.0, 0.0, 0.0).unwrap()).map_err(|e| e.to_string())?;
    ensure(zero.iter().all(|v| *v == Verdict::Consistent), || "zero case".into())?;
    let p = SpoofCheckParams::new(1.0, 0.25, 0.25).unwrap();
    let ok = spoof_check(&fixes(&[(10.0, 5.0)]), &fixes(&[(9.0, 4.0)]), &p).map_err(|e| e.to_string())?;
    ensure(ok == [Verdict::Consistent], || "offset case".into())?;
    let bad = spoof_check(&fixes(&[(10.0, 5.0)]), &fixes(&[(20.0, 4.0)]), &p).map_err(|e| e.to_string())?;
    ensure(bad == [Verdict::SpoofOrMalfunction], || "spoofed case".into())?;

    // residual exactly equal to the budget is consistent; one ulp more is not
    let edge = spoof_check(&fixes(&[(10.0, 5.0)]), &fixes(&[(8.5, 4.5)]), &p).map_err(|e| e.to_string())?;
    ensure(edge == [Verdict::Consistent], || "boundary residual == budget".into())?;
    let over =
        spoof_check(&fixes(&[(10.0, 5.0)]), &fixes(&[(8.5f64.next_down(), 4.5)]), &p).map_err(|e| e.to_string())?;
    ensure(over == [Verdict::SpoofOrMalfunction], || "just past the boundary".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut consistent, mut spoofed) = (0, 0);
    for i in 0..1000 {
        let d: f64 = rng.gen_range(0.0..5.0);
        let (e_t, e_r) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let budget = e_t + e_r;
        let (xt, yt): (f64, f64) = (rng.gen_range(-1000.0..1000.0), rng.gen_range(-1000.0..1000.0));
        let spread = 3.0 * budget + 0.1;
        let (xr, yr) = (xt - d + rng.gen_range(-spread..spread), yt - d + rng.gen_range(-spread..spread));
        let want = (xt - (xr + d)).abs() <= budget && (yt - (yr + d)).abs() <= budget;
        let p = SpoofCheckParams::new(d, e_t, e_r).unwrap();
        let got = spoof_check(&fixes(&[(xt, yt)]), &fixes(&[(xr, yr)]), &p).map_err(|e| e.to_string())?;
        ensure(got == [if want { Verdict::Consistent } else { Verdict::SpoofOrMalfunction }], || {
            format!("point {i} disagrees")
        })?;
        let swapped =
            spoof_check(&fixes(&[(xt, yt)]), &fixes(&[(xr, yr)]), &SpoofCheckParams::new(d, e_r, e_t).unwrap())
                .unwrap();
        ensure(swapped == got, || format!("point {i}: not symmetric in the error bounds"))?;
        if want {
            consistent += 1;
        } else {
            spoofed += 1;
        }
    }
    Ok(format!("3 worked examples, boundary, 1000 random points ({consistent} consistent, {spoofed} spoofed)"))
}

// ------------------------------------------------------------ criterion 8

fn contains_in_order(seq: &[PairingEvent], wanted: &[PairingEvent]) -> bool {
    let mut it = seq.iter();
    wanted.iter().all(|w| it.any(|e| e == w))
}

fn fsm_safety() -> Outcome {
    let started = Instant::now();
    // Failed states must be absorbing for pruning to be sound.
    for r in [FailReason::Auth, FailReason::Factor, FailReason::ProtocolViolation] {
        for e in PairingEvent::ALL {
            ensure(step(PairingState::Failed(r), e) == PairingState::Failed(r), || {
                format!("Failed({r:?}) left on {e}")
            })?;
        }
    }

    // Full brute force up to length 9.
    fn brute(state: PairingState, seq: &mut Vec<PairingEvent>, depth: usize, count: &mut u64) -> Result<(), String> {
        *count += 1;
        if state == PairingState::Paired {
            ensure(contains_in_order(seq, &PairingEvent::HAPPY_PATH), || format!("Paired via {seq:?}"))?;
        }
        if depth == 0 {
            return Ok(());
        }
        for e in PairingEvent::ALL {
            seq.push(e);
            brute(step(state, e), seq, depth - 1, count)?;
            seq.pop();
        }
        Ok(())
    }
    let mut brute_count = 0;
    brute(PairingState::Idle, &mut Vec::new(), 9, &mut brute_count)?;

    // Up to length 10, with side effects, pruning subtrees under a failed
    // state: nothing further can happen there.
    fn world_for(seq: &[PairingEvent]) -> PairingWorld {
        let mut w = PairingWorld::new(PairingSession::new(1, "tractor", "trailer", SecondFactor::Both), 9);
        for (i, e) in seq.iter().enumerate() {
            w.apply(*e, i as u64);
        }
        w
    }
    fn check_effects(w: &PairingWorld, seq: &[PairingEvent]) -> Result<(), String> {
        let mut acl_updated = BTreeSet::new();
        for eff in w.effects() {
            match eff {
                Effect::AclUpdated { credential_id } => {
                    acl_updated.insert(*credential_id);
                }
                Effect::ClientProvisioned { credential_id, server_had_token } => {
                    ensure(*server_had_token && acl_updated.contains(credential_id), || {
                        format!("client got a credential first via {seq:?}")
                    })?;
                }
                _ => {}
            }
        }
        Ok(())
    }
    fn explore(seq: &mut Vec<PairingEvent>, max: usize, covered: &mut u128, visited: &mut u64) -> Result<(), String> {
        *visited += 1;
        let w = world_for(seq);
        check_effects(&w, seq)?;
        let state = w.state();
        if state == PairingState::Paired {
            ensure(contains_in_order(seq, &PairingEvent::HAPPY_PATH), || format!("Paired via {seq:?}"))?;
        }
        if matches!(state, PairingState::Failed(_)) {
            // this sequence and all its extensions up to `max`
            *covered += (0..=(max - seq.len()) as u32).map(|k| 9u128.pow(k)).sum::<u128>();
            return Ok(());
        }
        *covered += 1;
        if seq.len() == max {
            return Ok(());
        }
        for e in PairingEvent::ALL {
            seq.push(e);
            explore(seq, max, covered, visited)?;
            seq.pop();
        }
        Ok(())
    }
    let (mut covered, mut visited) = (0u128, 0u64);
    explore(&mut Vec::new(), 10, &mut covered, &mut visited)?;
    let total: u128 = (0..=10u32).map(|k| 9u128.pow(k)).sum();
    ensure(covered == total, || format!("covered {covered} of {total} sequences"))?;

    // The happy path pairs and the client is admitted.
    let w = world_for(&PairingEvent::HAPPY_PATH);
    ensure(w.state() == PairingState::Paired, || "happy path did not pair".into())?;
    ensure(w.effects().last() == Some(&Effect::Confirmed { admitted: true }), || "client not admitted".into())?;

    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{total} sequences up to length 10 ({visited} explored with effects), {brute_count} brute-forced to length 9, {elapsed:.1?}"))
}

// ------------------------------------------------------------ criterion 9

fn determinism() -> Outcome {
    let max = 100u64;
    let seed = 7u64;
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = ["--duration", "60", "--max-samples", "100", "--seed", "7"];
    run_all(a.path(), &args)?;
    run_all(b.path(), &args)?;
    for protocol in Protocol::ALL {
        let ma = read_json(&a.path().join(protocol.as_str()).join("manifest.json"))?;
        let mb = read_json(&b.path().join(protocol.as_str()).join("manifest.json"))?;
        ensure(ma["wire_packets"] == mb["wire_packets"], || {
            format!("{protocol}: packet totals {} vs {}", ma["wire_packets"], mb["wire_packets"])
        })?;
        for label in StreamLabel::ALL {
            let (sa, sb) = (&ma["streams"][label.as_str()], &mb["streams"][label.as_str()]);
            for key in ["samples", "samples_sent", "payload_digest", "packets_per_sample"] {
                ensure(sa[key] == sb[key], || format!("{protocol}/{label}: {key} {} vs {}", sa[key], sb[key]))?;
            }
            ensure(sa["samples"].as_u64() == Some(max), || format!("{protocol}/{label}: {} samples", sa["samples"]))?;
            let profile = StreamProfile::default_for(label);
            let mut src = SeededPayloads::new(seed, label);
            let mut digest = PayloadDigest::new();
            for _ in 0..max {
                digest.update(&src.next_payload(profile.payload_bytes));
            }
            ensure(sa["payload_digest"].as_str() == Some(digest.hex().as_str()), || {
                format!("{protocol}/{label}: digest differs from the seeded stream")
            })?;
        }
    }
    Ok(format!("two seeded runs of {max} samples per stream agree for all protocols"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("codec properties", codec_properties),
        ("byte accounting", byte_accounting),
        ("forwarder correctness", forwarder_correctness),
        ("desk-scale benchmark", desk_benchmark),
        ("fragmentation inverse", fragmentation_inverse),
        ("stats oracle", stats_oracle),
        ("gps spoof detector", gps_detector),
        ("pairing fsm safety", fsm_safety),
        ("determinism", determinism),
    ];
    let only: Option<Vec<usize>> = std::env::var("TRAILERLINK_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|n| n.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{:.1?}]", started.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why} [{:.1?}]", started.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
