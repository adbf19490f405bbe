//! Per-process and per-thread CPU and memory sampling from procfs.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::clock::monotonic_ns;

pub const DEFAULT_SAMPLE_INTERVAL: Duration = Duration::from_millis(500);

/// Something to sample: a whole process, or a group of its threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceTarget {
    pub label: String,
    pub pid: i32,
    /// Empty for the whole process.
    pub tids: Vec<i32>,
}

impl ResourceTarget {
    pub fn process(label: impl Into<String>, pid: i32) -> Self {
        Self { label: label.into(), pid, tids: Vec::new() }
    }

    pub fn threads(label: impl Into<String>, pid: i32, tids: Vec<i32>) -> Self {
        Self { label: label.into(), pid, tids }
    }

    fn stat_paths(&self) -> Vec<PathBuf> {
        if self.tids.is_empty() {
            vec![format!("/proc/{}/stat", self.pid).into()]
        } else {
            self.tids.iter().map(|tid| format!("/proc/{}/task/{}/stat", self.pid, tid).into()).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSample {
    pub label: String,
    pub pid: i32,
    pub t_ns: u64,
    /// CPU time over wall time, in percent of one core.
    pub cpu_percent: f64,
    /// Resident memory of the owning process over total memory.
    pub mem_percent: f64,
    /// Last sample taken after the target went away.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceUsage {
    pub label: String,
    pub cpu_percent: f64,
    pub mem_percent: f64,
    pub samples: usize,
    /// The mean exceeds a single core.
    pub multi_core: bool,
}

struct Counters {
    cpu_ticks: u64,
    rss_pages: u64,
}

fn read_counters(t: &ResourceTarget) -> io::Result<Counters> {
    let mut cpu_ticks = 0;
    let mut live = 0;
    for path in t.stat_paths() {
        let Ok(stat) = fs::read_to_string(path) else { continue };
        cpu_ticks +=
            parse_cpu_ticks(&stat).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "malformed stat"))?;
        live += 1;
    }
    if live == 0 {
        return Err(io::Error::new(io::ErrorKind::NotFound, "target gone"));
    }
    let statm = fs::read_to_string(format!("/proc/{}/statm", t.pid))?;
    let rss_pages = statm.split_whitespace().nth(1).and_then(|v| v.parse().ok()).unwrap_or(0);
    Ok(Counters { cpu_ticks, rss_pages })
}

/// utime + stime from a stat line. The command name may hold spaces and
/// parentheses, so fields are counted from the last ')'.
pub(crate) fn parse_cpu_ticks(stat: &str) -> Option<u64> {
    let rest = &stat[stat.rfind(')')? + 1..];
    let fields: Vec<&str> = rest.split_whitespace().collect();
    // fields[0] is the state (field 3); utime and stime are fields 14 and 15
    let utime: u64 = fields.get(11)?.parse().ok()?;
    let stime: u64 = fields.get(12)?.parse().ok()?;
    Some(utime + stime)
}

fn mem_total_bytes() -> io::Result<u64> {
    let info = fs::read_to_string("/proc/meminfo")?;
    info.lines()
        .find_map(|l| l.strip_prefix("MemTotal:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        .map(|kb| kb * 1024)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "MemTotal missing"))
}

/// Thread ids and names of `pid`.
pub fn list_threads(pid: i32) -> Vec<(i32, String)> {
    let Ok(dir) = fs::read_dir(format!("/proc/{pid}/task")) else { return Vec::new() };
    let mut out: Vec<(i32, String)> = dir
        .flatten()
        .filter_map(|e| {
            let tid: i32 = e.file_name().to_str()?.parse().ok()?;
            let comm = fs::read_to_string(e.path().join("comm")).ok()?;
            Some((tid, comm.trim_end().to_string()))
        })
        .collect();
    out.sort();
    out
}

/// Finds a thread of `pid` by its name.
pub fn find_thread(pid: i32, name: &str) -> Option<i32> {
    list_threads(pid).into_iter().find_map(|(tid, n)| (n == name).then_some(tid))
}

struct Tracked {
    target: ResourceTarget,
    last: Option<(u64, u64, u64)>, // (t_ns, cpu_ticks, rss_pages)
    ended: bool,
}

pub struct ResourceSampler {
    tracked: Vec<Tracked>,
    ticks_per_sec: f64,
    page_size: f64,
    mem_total: f64,
}

impl ResourceSampler {
    pub fn new(targets: Vec<ResourceTarget>) -> io::Result<Self> {
        // SAFETY: sysconf has no preconditions
        let ticks = unsafe { libc::sysconf(libc::_SC_CLK_TCK) };
        let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
        let mut sampler = Self {
            tracked: Vec::new(),
            ticks_per_sec: if ticks > 0 { ticks as f64 } else { 100.0 },
            page_size: if page > 0 { page as f64 } else { 4096.0 },
            mem_total: mem_total_bytes()? as f64,
        };
        for t in targets {
            sampler.add(t);
        }
        Ok(sampler)
    }

    pub fn add(&mut self, target: ResourceTarget) {
        let mut tracked = Tracked { target, last: None, ended: false };
        if let Ok(c) = read_counters(&tracked.target) {
            tracked.last = Some((monotonic_ns(), c.cpu_ticks, c.rss_pages));
        }
        self.tracked.push(tracked);
    }

    pub fn active(&self) -> usize {
        self.tracked.iter().filter(|t| !t.ended).count()
    }

    /// One reading per live target, as a rate since the previous call.
    pub fn sample(&mut self) -> Vec<ResourceSample> {
        let now = monotonic_ns();
        let mut out = Vec::new();
        for tr in self.tracked.iter_mut().filter(|t| !t.ended) {
            match read_counters(&tr.target) {
                Ok(c) => {
                    if let Some((t0, cpu0, _)) = tr.last {
                        let wall = now.saturating_sub(t0) as f64 / 1e9;
                        if wall > 0.0 {
                            let cpu = c.cpu_ticks.saturating_sub(cpu0) as f64 / self.ticks_per_sec;
                            out.push(ResourceSample {
                                label: tr.target.label.clone(),
                                pid: tr.target.pid,
                                t_ns: now,
                                cpu_percent: 100.0 * cpu / wall,
                                mem_percent: 100.0 * c.rss_pages as f64 * self.page_size / self.mem_total,
                                partial: false,
                            });
                        }
                    }
                    tr.last = Some((now, c.cpu_ticks, c.rss_pages));
                }
                Err(_) => {
                    tr.ended = true;
                    if let Some((_, _, rss)) = tr.last {
                        out.push(ResourceSample {
                            label: tr.target.label.clone(),
                            pid: tr.target.pid,
                            t_ns: now,
                            cpu_percent: 0.0,
                            mem_percent: 100.0 * rss as f64 * self.page_size / self.mem_total,
                            partial: true,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Samples in the background until the flag is set or every target ends.
pub fn spawn_sampler(
    mut sampler: ResourceSampler,
    interval: Duration,
    stop: Arc<AtomicBool>,
) -> io::Result<JoinHandle<Vec<ResourceSample>>> {
    thread::Builder::new().name("sampler".into()).spawn(move || {
        let mut all = Vec::new();
        while !stop.load(Ordering::Relaxed) && sampler.active() > 0 {
            let mut slept = Duration::ZERO;
            while slept < interval && !stop.load(Ordering::Relaxed) {
                let step = (interval - slept).min(Duration::from_millis(20));
                thread::sleep(step);
                slept += step;
            }
            all.extend(sampler.sample());
        }
        all
    })
}

/// Mean CPU and memory per label, in first-seen order. Partial samples
/// carry no CPU reading and only count towards memory.
pub fn mean_usage(samples: &[ResourceSample]) -> Vec<ResourceUsage> {
    let mut order = Vec::new();
    let mut acc: BTreeMap<&str, (f64, usize, f64, usize)> = BTreeMap::new();
    for s in samples {
        let e = acc.entry(&s.label).or_insert_with(|| {
            order.push(s.label.as_str());
            (0.0, 0, 0.0, 0)
        });
        if !s.partial {
            e.0 += s.cpu_percent;
            e.1 += 1;
        }
        e.2 += s.mem_percent;
        e.3 += 1;
    }
    order
        .into_iter()
        .map(|label| {
            let (cpu, n_cpu, mem, n_mem) = acc[label];
            let cpu_percent = if n_cpu > 0 { cpu / n_cpu as f64 } else { 0.0 };
            ResourceUsage {
                label: label.to_string(),
                cpu_percent,
                mem_percent: if n_mem > 0 { mem / n_mem as f64 } else { 0.0 },
                samples: n_cpu,
                multi_core: cpu_percent > 100.0,
            }
        })
        .collect()
}
