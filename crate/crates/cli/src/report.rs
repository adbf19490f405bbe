//! Loads finished run directories and renders the comparison report.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use trailerlink::metrics::{read_summary, read_usage, render_report, RunSummary};

use crate::results::read_json;
use crate::run::{Manifest, MANIFEST_FILE, SUMMARY_FILE, USAGE_FILE};

pub const REPORT_FILE: &str = "report.txt";

/// Reads one run directory written by `run`.
pub fn load_run(dir: &Path) -> Result<RunSummary> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
    let protocol =
        manifest.protocol.parse().map_err(anyhow::Error::new).with_context(|| format!("{}", dir.display()))?;
    let mut run = RunSummary::new(protocol);
    run.streams = read_summary(&dir.join(SUMMARY_FILE))?.into_iter().map(|(_, s)| s).collect();
    run.resources = read_usage(&dir.join(USAGE_FILE))?.into_iter().map(|(_, u)| u).collect();
    run.wire_bytes = manifest.wire_bytes;
    run.wire_packets = manifest.wire_packets;
    Ok(run)
}

/// Run directories named on the command line, or every subdirectory of
/// `root` holding a manifest.
pub fn discover_runs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for p in paths {
        if p.join(MANIFEST_FILE).is_file() {
            dirs.push(p.clone());
            continue;
        }
        let mut found: Vec<PathBuf> = std::fs::read_dir(p)
            .with_context(|| format!("reading {}", p.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|d| d.join(MANIFEST_FILE).is_file())
            .collect();
        found.sort();
        dirs.extend(found);
    }
    Ok(dirs)
}

/// Renders the report for `runs`, writes it to `out` when given and
/// returns the text.
pub fn write_report(runs: &[RunSummary], out: Option<&Path>) -> Result<String> {
    let text = render_report(runs)?;
    if let Some(path) = out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(text)
}
