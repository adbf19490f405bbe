//! Checks the sampler against processes with known load. Runs in its own
//! binary so no other test competes for the CPU.

use std::process::{Child, Command};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use trailerlink::metrics::{mean_usage, spawn_sampler, ResourceSampler, ResourceTarget};

struct Reaped(Child);

impl Drop for Reaped {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn mean_cpu(child: &Reaped, label: &str) -> f64 {
    let sampler = ResourceSampler::new(vec![ResourceTarget::process(label, child.0.id() as i32)]).unwrap();
    let stop = Arc::new(AtomicBool::new(false));
    let handle = spawn_sampler(sampler, Duration::from_millis(250), stop.clone()).unwrap();
    std::thread::sleep(Duration::from_secs(3));
    stop.store(true, std::sync::atomic::Ordering::Relaxed);
    let samples = handle.join().unwrap();
    assert!(samples.len() >= 8, "{} samples", samples.len());
    mean_usage(&samples)[0].cpu_percent
}

#[test]
fn busy_and_idle_processes() {
    let busy = Reaped(Command::new("sh").args(["-c", "while :; do :; done"]).spawn().unwrap());
    std::thread::sleep(Duration::from_millis(200));
    let cpu = mean_cpu(&busy, "busy");
    assert!((90.0..=110.0).contains(&cpu), "busy loop at {cpu:.1}%");
    drop(busy);

    let idle = Reaped(Command::new("sleep").arg("30").spawn().unwrap());
    let cpu = mean_cpu(&idle, "idle");
    assert!(cpu < 2.0, "sleeping process at {cpu:.1}%");
}
