//! Socket-backed forwarder. Face I/O happens on reader threads that hand
//! raw frames to a single event-loop thread owning the [`Forwarder`].

use std::collections::HashMap;
use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::cs::ContentStore;
use super::engine::{Action, Forwarder, ForwarderCounters, ForwarderError};
use super::face::{Face, FaceId, FaceTransport};
use crate::codec::{wire_size, Name, Packet, StreamFramer, Transport, WireAccounting};

const READ_POLL: Duration = Duration::from_millis(200);
const UDP_BUFFER: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    /// Address of the UDP channel; port 0 picks an ephemeral port.
    pub udp_bind: SocketAddr,
    /// Accept TCP faces on this address when set.
    pub tcp_listen: Option<SocketAddr>,
    pub cs_capacity: usize,
    pub cs_freshness: Duration,
    /// Period of the PIT expiry sweep.
    pub tick: Duration,
    pub thread_name: String,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            udp_bind: "127.0.0.1:0".parse().unwrap(),
            tcp_listen: None,
            cs_capacity: 0,
            cs_freshness: Duration::ZERO,
            tick: Duration::from_millis(50),
            thread_name: "nfd".into(),
        }
    }
}

/// Traffic seen on one face.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaceStats {
    pub packets_in: u64,
    pub bytes_in: u64,
    pub packets_out: u64,
    /// Sum of successful socket write sizes.
    pub bytes_out: u64,
    /// Link-level accounting of everything sent; empty for internal faces.
    pub wire_out: WireAccounting,
}

#[derive(Debug, Clone, Default)]
pub struct ForwarderStats {
    pub counters: ForwarderCounters,
    pub pit_size: usize,
    pub decode_errors: u64,
    /// Open faces, then closed ones with their final counters.
    pub faces: Vec<(Face, FaceStats)>,
}

enum Sink {
    Internal(Sender<Vec<u8>>),
    Udp(Arc<UdpSocket>, SocketAddr),
    Tcp(TcpStream),
}

enum Event {
    Inbound(FaceId, Vec<u8>),
    UdpInbound(SocketAddr, Vec<u8>),
    AddFace { transport: FaceTransport, local: String, remote: String, sink: Sink, reply: Sender<FaceId> },
    MapUdp { remote: SocketAddr, reply: Sender<FaceId> },
    Closed(FaceId),
    Register { prefix: Name, face: FaceId, reply: Sender<Result<(), ForwarderError>> },
    Stats(Sender<ForwarderStats>),
    Shutdown,
}

/// An in-process application attached through an internal face.
pub struct AppFace {
    id: FaceId,
    events: Sender<Event>,
    inbox: Receiver<Vec<u8>>,
}

impl AppFace {
    pub fn id(&self) -> FaceId {
        self.id
    }

    pub fn send(&self, bytes: Vec<u8>) -> bool {
        self.events.send(Event::Inbound(self.id, bytes)).is_ok()
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Option<Vec<u8>> {
        self.inbox.recv_timeout(timeout).ok()
    }
}

pub struct ForwarderHandle {
    events: Sender<Event>,
    stop: Arc<AtomicBool>,
    udp_addr: SocketAddr,
    tcp_addr: Option<SocketAddr>,
    loop_thread: Option<JoinHandle<()>>,
    thread_name: String,
}

fn set_recv_buffer(sock: &UdpSocket) {
    use std::os::fd::AsRawFd;
    let size = UDP_BUFFER as libc::c_int;
    // best effort; the kernel clamps to its configured maximum
    unsafe {
        libc::setsockopt(
            sock.as_raw_fd(),
            libc::SOL_SOCKET,
            libc::SO_RCVBUF,
            &size as *const libc::c_int as *const libc::c_void,
            std::mem::size_of::<libc::c_int>() as libc::socklen_t,
        );
    }
}

impl ForwarderHandle {
    pub fn spawn(config: RuntimeConfig) -> io::Result<Self> {
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));

        let udp = Arc::new(UdpSocket::bind(config.udp_bind)?);
        udp.set_read_timeout(Some(READ_POLL))?;
        set_recv_buffer(&udp);
        let udp_addr = udp.local_addr()?;
        {
            let udp = udp.clone();
            let tx = tx.clone();
            let stop = stop.clone();
            thread::Builder::new().name(format!("{}-udp", config.thread_name)).spawn(move || {
                let mut buf = vec![0u8; 65536];
                while !stop.load(Ordering::Relaxed) {
                    match udp.recv_from(&mut buf) {
                        Ok((n, from)) => {
                            if tx.send(Event::UdpInbound(from, buf[..n].to_vec())).is_err() {
                                break;
                            }
                        }
                        Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
                        Err(_) => {}
                    }
                }
            })?;
        }

        let tcp_addr = match config.tcp_listen {
            Some(addr) => {
                let listener = TcpListener::bind(addr)?;
                listener.set_nonblocking(true)?;
                let local = listener.local_addr()?;
                let tx = tx.clone();
                let stop = stop.clone();
                let prefix = config.thread_name.clone();
                thread::Builder::new().name(format!("{}-accept", config.thread_name)).spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        match listener.accept() {
                            Ok((stream, peer)) => {
                                let _ = stream.set_nonblocking(false);
                                let _ = attach_tcp(&tx, &stop, &prefix, stream, local, peer);
                            }
                            Err(_) => thread::sleep(Duration::from_millis(20)),
                        }
                    }
                })?;
                Some(local)
            }
            None => None,
        };

        let fw = Forwarder::new(ContentStore::new(config.cs_capacity, config.cs_freshness));
        let event_loop = EventLoop {
            fw,
            sinks: HashMap::new(),
            stats: HashMap::new(),
            closed: Vec::new(),
            udp_faces: HashMap::new(),
            udp: udp.clone(),
            udp_addr,
            decode_errors: 0,
            start: Instant::now(),
        };
        let tick = config.tick;
        let loop_thread =
            thread::Builder::new().name(config.thread_name.clone()).spawn(move || event_loop.run(rx, tick))?;

        Ok(Self {
            events: tx,
            stop,
            udp_addr,
            tcp_addr,
            loop_thread: Some(loop_thread),
            thread_name: config.thread_name,
        })
    }

    pub fn udp_addr(&self) -> SocketAddr {
        self.udp_addr
    }

    pub fn tcp_addr(&self) -> Option<SocketAddr> {
        self.tcp_addr
    }

    fn request<T>(&self, make: impl FnOnce(Sender<T>) -> Event) -> Option<T> {
        let (reply, rx) = mpsc::channel();
        self.events.send(make(reply)).ok()?;
        rx.recv().ok()
    }

    pub fn attach_app(&self, label: &str) -> AppFace {
        let (inbox_tx, inbox) = mpsc::channel();
        let id = self
            .request(|reply| Event::AddFace {
                transport: FaceTransport::Internal,
                local: "internal://".into(),
                remote: format!("app://{label}"),
                sink: Sink::Internal(inbox_tx),
                reply,
            })
            .expect("forwarder loop running");
        AppFace { id, events: self.events.clone(), inbox }
    }

    /// Creates a UDP face towards `remote` on the forwarder's UDP channel.
    pub fn connect_udp(&self, remote: SocketAddr) -> io::Result<FaceId> {
        self.request(|reply| Event::MapUdp { remote, reply }).ok_or_else(loop_gone)
    }

    pub fn connect_tcp(&self, remote: SocketAddr) -> io::Result<FaceId> {
        let stream = TcpStream::connect(remote)?;
        let local = stream.local_addr()?;
        attach_tcp(&self.events, &self.stop, &self.thread_name, stream, local, remote)
    }

    pub fn register_prefix(&self, prefix: Name, face: FaceId) -> Result<(), ForwarderError> {
        self.request(|reply| Event::Register { prefix, face, reply }).unwrap_or(Err(ForwarderError::UnknownFace(face)))
    }

    pub fn stats(&self) -> ForwarderStats {
        self.request(Event::Stats).unwrap_or_default()
    }

    pub fn shutdown(mut self) -> ForwarderStats {
        self.stop_loop()
    }

    fn stop_loop(&mut self) -> ForwarderStats {
        let stats = self.stats();
        self.stop.store(true, Ordering::Relaxed);
        let _ = self.events.send(Event::Shutdown);
        if let Some(t) = self.loop_thread.take() {
            let _ = t.join();
        }
        stats
    }
}

impl Drop for ForwarderHandle {
    fn drop(&mut self) {
        if self.loop_thread.is_some() {
            self.stop_loop();
        }
    }
}

fn loop_gone() -> io::Error {
    io::Error::new(io::ErrorKind::BrokenPipe, "forwarder loop stopped")
}

fn attach_tcp(
    events: &Sender<Event>,
    stop: &Arc<AtomicBool>,
    thread_prefix: &str,
    stream: TcpStream,
    local: SocketAddr,
    peer: SocketAddr,
) -> io::Result<FaceId> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(READ_POLL))?;
    let writer = stream.try_clone()?;
    let (reply, rx) = mpsc::channel();
    events
        .send(Event::AddFace {
            transport: FaceTransport::Tcp,
            local: format!("tcp://{local}"),
            remote: format!("tcp://{peer}"),
            sink: Sink::Tcp(writer),
            reply,
        })
        .map_err(|_| loop_gone())?;
    let id = rx.recv().map_err(|_| loop_gone())?;
    let events = events.clone();
    let stop = stop.clone();
    thread::Builder::new()
        .name(format!("{thread_prefix}-tcp{id}"))
        .spawn(move || tcp_reader(id, stream, events, stop))?;
    Ok(id)
}

fn tcp_reader(id: FaceId, mut stream: TcpStream, events: Sender<Event>, stop: Arc<AtomicBool>) {
    let mut framer = StreamFramer::new();
    let mut buf = vec![0u8; 64 * 1024];
    'outer: while !stop.load(Ordering::Relaxed) {
        match stream.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                framer.push(&buf[..n]);
                loop {
                    match framer.next_frame() {
                        Ok(Some(frame)) => {
                            if events.send(Event::Inbound(id, frame)).is_err() {
                                break 'outer;
                            }
                        }
                        Ok(None) => break,
                        Err(_) => break 'outer,
                    }
                }
            }
            Err(e)
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut | io::ErrorKind::Interrupted
                ) => {}
            Err(_) => break,
        }
    }
    let _ = events.send(Event::Closed(id));
}

struct EventLoop {
    fw: Forwarder,
    sinks: HashMap<FaceId, Sink>,
    stats: HashMap<FaceId, FaceStats>,
    closed: Vec<(Face, FaceStats)>,
    udp_faces: HashMap<SocketAddr, FaceId>,
    udp: Arc<UdpSocket>,
    udp_addr: SocketAddr,
    decode_errors: u64,
    start: Instant,
}

impl EventLoop {
    fn run(mut self, rx: Receiver<Event>, tick: Duration) {
        let mut last_sweep = Instant::now();
        loop {
            match rx.recv_timeout(tick) {
                Ok(Event::Shutdown) | Err(RecvTimeoutError::Disconnected) => break,
                Ok(ev) => self.handle(ev),
                Err(RecvTimeoutError::Timeout) => {}
            }
            if last_sweep.elapsed() >= tick {
                self.fw.expire_pit(self.start.elapsed());
                last_sweep = Instant::now();
            }
        }
        for sink in self.sinks.values() {
            if let Sink::Tcp(s) = sink {
                let _ = s.shutdown(Shutdown::Both);
            }
        }
    }

    fn add_face(&mut self, transport: FaceTransport, local: String, remote: String, sink: Sink) -> FaceId {
        let id = self.fw.add_face(transport, local, remote);
        self.sinks.insert(id, sink);
        self.stats.insert(id, FaceStats::default());
        id
    }

    fn udp_face(&mut self, remote: SocketAddr) -> FaceId {
        if let Some(&id) = self.udp_faces.get(&remote) {
            return id;
        }
        let id = self.add_face(
            FaceTransport::Udp,
            format!("udp://{}", self.udp_addr),
            format!("udp://{remote}"),
            Sink::Udp(self.udp.clone(), remote),
        );
        self.udp_faces.insert(remote, id);
        id
    }

    fn handle(&mut self, ev: Event) {
        match ev {
            Event::Inbound(face, bytes) => self.inbound(face, bytes),
            Event::UdpInbound(from, bytes) => {
                let face = self.udp_face(from);
                self.inbound(face, bytes);
            }
            Event::AddFace { transport, local, remote, sink, reply } => {
                let id = self.add_face(transport, local, remote, sink);
                let _ = reply.send(id);
            }
            Event::MapUdp { remote, reply } => {
                let id = self.udp_face(remote);
                let _ = reply.send(id);
            }
            Event::Closed(face) => self.close(face),
            Event::Register { prefix, face, reply } => {
                let _ = reply.send(self.fw.register_prefix(prefix, face));
            }
            Event::Stats(reply) => {
                let faces = self
                    .fw
                    .faces()
                    .iter()
                    .map(|f| (f.clone(), self.stats.get(&f.id).copied().unwrap_or_default()))
                    .chain(self.closed.iter().cloned())
                    .collect();
                let _ = reply.send(ForwarderStats {
                    counters: self.fw.counters(),
                    pit_size: self.fw.pit().len(),
                    decode_errors: self.decode_errors,
                    faces,
                });
            }
            Event::Shutdown => {}
        }
    }

    fn close(&mut self, face: FaceId) {
        self.sinks.remove(&face);
        self.udp_faces.retain(|_, f| *f != face);
        if let Some(f) = self.fw.faces().iter().find(|f| f.id == face) {
            self.closed.push((f.clone(), self.stats.remove(&face).unwrap_or_default()));
        }
        let _ = self.fw.remove_face(face);
    }

    fn inbound(&mut self, face: FaceId, bytes: Vec<u8>) {
        if !self.sinks.contains_key(&face) {
            return;
        }
        if let Some(s) = self.stats.get_mut(&face) {
            s.packets_in += 1;
            s.bytes_in += bytes.len() as u64;
        }
        let packet = match Packet::decode(&bytes) {
            Ok((p, used)) if used == bytes.len() => p,
            _ => {
                self.decode_errors += 1;
                return;
            }
        };
        let now = self.start.elapsed();
        let actions = match packet {
            Packet::Interest(i) => self.fw.on_interest(face, i, now),
            Packet::Data(d) => self.fw.on_data(face, d, now),
            Packet::Ack(a) => self.fw.on_ack(face, a),
        };
        for action in actions {
            self.execute(action);
        }
    }

    fn execute(&mut self, action: Action) {
        let face = action.face();
        let bytes = match action {
            Action::SendInterest { interest, .. } => interest.encode(),
            Action::SendData { data, .. } => match data.encode() {
                Ok(b) => b,
                Err(_) => return,
            },
            Action::SendAck { ack, .. } => ack.encode().to_vec(),
        };
        let Some(sink) = self.sinks.get_mut(&face) else {
            return;
        };
        let (sent, transport) = match sink {
            Sink::Internal(tx) => (tx.send(bytes.clone()).ok().map(|_| bytes.len()), None),
            Sink::Udp(sock, remote) => (sock.send_to(&bytes, *remote).ok(), Some(Transport::Udp)),
            Sink::Tcp(stream) => (stream.write_all(&bytes).ok().map(|_| bytes.len()), Some(Transport::Tcp)),
        };
        match sent {
            Some(n) => {
                let s = self.stats.entry(face).or_default();
                s.packets_out += 1;
                s.bytes_out += n as u64;
                if let Some(t) = transport {
                    s.wire_out = s.wire_out + wire_size(n, t);
                }
            }
            None => {
                if !matches!(self.sinks.get(&face), Some(Sink::Udp(..))) {
                    self.close(face);
                }
            }
        }
    }
}
