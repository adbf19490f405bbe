use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use super::fragment::{fragment, PublishError, Reassembler, ReassemblyError, Sample};
use super::message::{AckMessage, PubSubMessage, HEADER_LEN};
use crate::codec::{Transport, WireAccounting};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topic {
    pub name: String,
    pub id: u32,
}

impl Topic {
    pub fn new(name: impl Into<String>, id: u32) -> Self {
        Self { name: name.into(), id }
    }

    pub fn lidar() -> Self {
        Self::new("Lidar", 1)
    }

    pub fn can() -> Self {
        Self::new("CAN", 2)
    }

    pub fn cam() -> Self {
        Self::new("Cam", 3)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    #[error(transparent)]
    Publish(#[from] PublishError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EndpointStats {
    pub samples: u64,
    pub datagrams_out: u64,
    pub bytes_out: u64,
    pub wire_out: WireAccounting,
    pub datagrams_in: u64,
    pub bytes_in: u64,
    pub acks: u64,
    pub malformed: u64,
    pub foreign_topic: u64,
}

fn account(stats: &mut EndpointStats, datagram_len: usize, sent: usize) {
    stats.datagrams_out += 1;
    stats.bytes_out += sent as u64;
    stats.wire_out = stats.wire_out + WireAccounting::new(datagram_len - HEADER_LEN, HEADER_LEN, Transport::Udp);
}

/// Sends one topic's samples to a fixed subscriber address.
pub struct Publisher {
    socket: UdpSocket,
    topic: Topic,
    dest: SocketAddr,
    mtu: usize,
    next_sequence: u64,
    epoch: Instant,
    stats: EndpointStats,
}

impl Publisher {
    pub fn bind(local: SocketAddr, dest: SocketAddr, topic: Topic, mtu: usize) -> io::Result<Self> {
        let socket = UdpSocket::bind(local)?;
        socket.set_nonblocking(true)?;
        Ok(Self { socket, topic, dest, mtu, next_sequence: 0, epoch: Instant::now(), stats: Default::default() })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn topic(&self) -> &Topic {
        &self.topic
    }

    /// Fragments and sends one sample; returns the datagram count.
    pub fn publish(&mut self, payload: &[u8]) -> Result<usize, EndpointError> {
        let ts = self.epoch.elapsed().as_nanos() as u64;
        let frags = fragment(self.topic.id, self.next_sequence, ts, payload, self.mtu)?;
        self.next_sequence += 1;
        for f in &frags {
            let bytes = f.encode();
            let sent = loop {
                match self.socket.send_to(&bytes, self.dest) {
                    Ok(n) => break n,
                    Err(e) if e.kind() == io::ErrorKind::WouldBlock => std::thread::yield_now(),
                    Err(e) => return Err(e.into()),
                }
            };
            account(&mut self.stats, bytes.len(), sent);
        }
        self.stats.samples += 1;
        self.poll_acks();
        Ok(frags.len())
    }

    /// Drains pending acknowledgements without blocking.
    pub fn poll_acks(&mut self) -> usize {
        let mut buf = [0u8; 2048];
        let mut n = 0;
        while let Ok((len, _)) = self.socket.recv_from(&mut buf) {
            self.stats.datagrams_in += 1;
            self.stats.bytes_in += len as u64;
            match PubSubMessage::decode(&buf[..len]).ok().as_ref().and_then(AckMessage::from_message) {
                Some(ack) if ack.topic_id == self.topic.id => n += 1,
                Some(_) => self.stats.foreign_topic += 1,
                None => self.stats.malformed += 1,
            }
        }
        self.stats.acks += n as u64;
        n
    }

    pub fn stats(&self) -> EndpointStats {
        self.stats
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub sample: Sample,
    /// Monotonic receipt time of the datagram that completed the sample.
    pub receipt_ns: u64,
}

/// Receives one topic, reassembles samples and acknowledges each one.
pub struct Subscriber {
    socket: UdpSocket,
    topic: Topic,
    reassembler: Reassembler,
    epoch: Instant,
    stats: EndpointStats,
    buf: Vec<u8>,
}

impl Subscriber {
    pub fn bind(local: SocketAddr, topic: Topic, fragment_timeout: Duration) -> io::Result<Self> {
        let socket = UdpSocket::bind(local)?;
        Ok(Self {
            socket,
            topic,
            reassembler: Reassembler::new(fragment_timeout),
            epoch: Instant::now(),
            stats: Default::default(),
            buf: vec![0u8; 65536],
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn topic(&self) -> &Topic {
        &self.topic
    }

    pub fn lost(&self) -> u64 {
        self.reassembler.lost()
    }

    pub fn corrupt(&self) -> u64 {
        self.reassembler.corrupt()
    }

    pub fn stats(&self) -> EndpointStats {
        self.stats
    }

    /// Waits up to `timeout` for the next complete sample.
    pub fn recv(&mut self, timeout: Duration) -> io::Result<Option<Delivery>> {
        let deadline = Instant::now() + timeout;
        loop {
            let now = Instant::now();
            self.reassembler.expire(now - self.epoch);
            if now >= deadline {
                return Ok(None);
            }
            self.socket.set_read_timeout(Some((deadline - now).max(Duration::from_micros(100))))?;
            let (len, from) = match self.socket.recv_from(&mut self.buf) {
                Ok(r) => r,
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
                Err(e) => return Err(e),
            };
            let receipt = Instant::now();
            let receipt_ns = crate::clock::monotonic_ns();
            self.stats.datagrams_in += 1;
            self.stats.bytes_in += len as u64;
            let msg = match PubSubMessage::decode(&self.buf[..len]) {
                Ok(m) if !m.header.is_ack() => m,
                _ => {
                    self.stats.malformed += 1;
                    continue;
                }
            };
            if msg.header.topic_id != self.topic.id {
                self.stats.foreign_topic += 1;
                continue;
            }
            match self.reassembler.insert(&msg, receipt - self.epoch) {
                Ok(Some(sample)) => {
                    let ack = AckMessage {
                        topic_id: sample.topic_id,
                        sequence: sample.sequence,
                        timestamp_ns: sample.timestamp_ns,
                    }
                    .encode();
                    if let Ok(sent) = self.socket.send_to(&ack, from) {
                        account(&mut self.stats, ack.len(), sent);
                        self.stats.acks += 1;
                    }
                    self.stats.samples += 1;
                    return Ok(Some(Delivery { sample, receipt_ns }));
                }
                Ok(None) => {}
                Err(ReassemblyError::CorruptSample { .. }) => {}
            }
        }
    }
}
