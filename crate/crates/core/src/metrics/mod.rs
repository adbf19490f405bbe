//! Latency, resource and byte measurement, summary statistics and the
//! report artifacts.

mod accounting;
mod csvio;
mod latency;
pub mod reference;
mod report;
mod resources;
mod run;
mod svg;

pub use accounting::{default_byte_accounting, stream_bytes, ByteAccounting, StreamBytes};
pub use csvio::{
    preflight_output_dir, read_resource_samples, read_samples, read_summary, read_usage, write_resource_samples,
    write_samples, write_summary, write_usage, CsvError,
};
pub use latency::{samples_from_receipts, summarize, LatencyRecorder, LatencySample, StreamSummary, SummaryError};
pub use report::{is_full_comparison, render_report, ReportError};
pub use resources::{
    find_thread, list_threads, mean_usage, spawn_sampler, ResourceSample, ResourceSampler, ResourceTarget,
    ResourceUsage, DEFAULT_SAMPLE_INTERVAL,
};
pub use run::RunSummary;
pub use svg::line_plot;
