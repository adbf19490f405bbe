//! Plain-text comparison report: protocols side by side, each cell showing
//! the measured value with the published testbed value in brackets.

use std::fmt::Write;

use super::accounting::default_byte_accounting;
use super::reference;
use super::run::RunSummary;
use crate::streams::{Protocol, StreamLabel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let cols = header.len();
    let mut width = vec![0; cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |out: &mut String, row: &[String]| {
        let cells: Vec<String> = row.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "  {}", cells.join(" | ").trim_end());
    };
    let _ = writeln!(out, "{title}");
    line(out, header);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "  {}", rule.join("-+-"));
    for r in rows {
        line(out, r);
    }
    out.push('\n');
}

fn stream_title(s: StreamLabel) -> &'static str {
    match s {
        StreamLabel::Lidar => "Lidar data",
        StreamLabel::Can => "CAN data",
        StreamLabel::Cam => "Cam data",
    }
}

pub fn render_report(runs: &[RunSummary]) -> Result<String, ReportError> {
    if runs.is_empty() {
        return Err(ReportError::InsufficientData("no runs".into()));
    }
    if let Some(r) = runs.iter().find(|r| r.streams.is_empty()) {
        return Err(ReportError::InsufficientData(format!("run {} has no latency rows", r.protocol)));
    }
    let mut out = String::new();
    let _ = writeln!(out, "Inter-arrival latency in ms (measured [published])\n");
    let mut header = vec![String::new()];
    header.extend(runs.iter().map(|r| r.protocol.as_str().to_string()));

    for stream in StreamLabel::ALL {
        let cell = |r: &RunSummary, f: &dyn Fn(&super::StreamSummary, &reference::ReferenceLatency) -> String| {
            let reference = reference::latency(r.protocol, stream);
            r.stream(stream).map(|s| f(s, &reference)).unwrap_or_else(|| "-".into())
        };
        let rows = vec![
            std::iter::once("Packets Count".to_string())
                .chain(runs.iter().map(|r| cell(r, &|s, p| format!("{} [{}]", s.packets_count, p.packets_count))))
                .collect(),
            std::iter::once("Mean".to_string())
                .chain(runs.iter().map(|r| cell(r, &|s, p| format!("{:.3} [{}]", s.mean_ms, p.mean_ms))))
                .collect(),
            std::iter::once("Min".to_string())
                .chain(runs.iter().map(|r| cell(r, &|s, p| format!("{:.3} [{}]", s.min_ms, p.min_ms))))
                .collect(),
            std::iter::once("Max".to_string())
                .chain(runs.iter().map(|r| cell(r, &|s, p| format!("{:.3} [{}]", s.max_ms, p.max_ms))))
                .collect(),
        ];
        table(&mut out, stream_title(stream), &header, &rows);
    }

    let mut labels: Vec<&str> = Vec::new();
    for r in runs {
        for u in &r.resources {
            if !labels.contains(&u.label.as_str()) {
                labels.push(&u.label);
            }
        }
    }
    if !labels.is_empty() {
        let rows: Vec<Vec<String>> = labels
            .iter()
            .map(|label| {
                std::iter::once(label.to_string())
                    .chain(runs.iter().map(|r| {
                        r.resources
                            .iter()
                            .find(|u| u.label == *label)
                            .map(|u| {
                                let flag = if u.multi_core { " (multi-core)" } else { "" };
                                format!("{:.2}% / {:.2}%{flag}", u.cpu_percent, u.mem_percent)
                            })
                            .unwrap_or_else(|| "-".into())
                    }))
                    .collect()
            })
            .collect();
        table(&mut out, "Mean core CPU / memory per process and thread", &header, &rows);
    }

    let mut rows: Vec<Vec<String>> = StreamLabel::ALL
        .iter()
        .map(|s| {
            std::iter::once(format!("{s} producer"))
                .chain(runs.iter().map(|r| format!("{}%", reference::producer_cpu_percent(r.protocol, *s))))
                .collect()
        })
        .collect();
    rows.push(
        std::iter::once("forwarder".to_string())
            .chain(
                runs.iter()
                    .map(|r| reference::forwarder_cpu_percent(r.protocol).map_or("-".into(), |v| format!("{v}%"))),
            )
            .collect(),
    );
    table(&mut out, "Published transmitter CPU per script", &header, &rows);

    let acc = default_byte_accounting();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for s in &acc.streams {
        let (ref_ndn, ref_dds) = s.reference;
        rows.push(vec![
            s.stream.to_string(),
            s.payload_bytes.to_string(),
            format!("{} [{}]", s.ndn.total_on_wire, ref_ndn),
            s.ndn.protocol_overhead_bytes.to_string(),
            format!("{} [{}]", s.pubsub.total_on_wire, ref_dds),
            s.pubsub.protocol_overhead_bytes.to_string(),
            s.pubsub_packets.to_string(),
        ]);
    }
    rows.push(vec![
        "interest".into(),
        "0".into(),
        format!("{} [{}]", acc.interest.total_on_wire, reference::INTEREST_WIRE_BYTES),
        acc.interest.protocol_overhead_bytes.to_string(),
        "-".into(),
        "-".into(),
        "1".into(),
    ]);
    rows.push(vec![
        "ack".into(),
        "0".into(),
        "-".into(),
        "-".into(),
        format!("{} [{}]", acc.ack.total_on_wire, reference::ACK_WIRE_BYTES),
        acc.ack.protocol_overhead_bytes.to_string(),
        "1".into(),
    ]);
    let header_bytes: Vec<String> =
        ["item", "payload", "ndn/udp wire", "ndn overhead", "pubsub wire", "pubsub overhead", "pubsub datagrams"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    table(&mut out, "Bytes on the wire per sample (measured [published])", &header_bytes, &rows);

    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| vec![r.protocol.to_string(), r.wire_packets.to_string(), r.wire_bytes.to_string()])
        .collect();
    table(
        &mut out,
        "Total sent during run",
        &["protocol".to_string(), "packets".into(), "bytes on wire".into()],
        &rows,
    );
    Ok(out)
}

/// Whether the protocol list covers every protocol once.
pub fn is_full_comparison(runs: &[RunSummary]) -> bool {
    Protocol::ALL.iter().all(|p| runs.iter().filter(|r| r.protocol == *p).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{samples_from_receipts, summarize};

    fn run(p: Protocol) -> RunSummary {
        let mut r = RunSummary::new(p);
        for s in StreamLabel::ALL {
            r.streams.push(summarize(&samples_from_receipts(s, &[0, 1_000_000, 3_000_000])).unwrap());
        }
        r
    }

    #[test]
    fn three_tables_by_three_protocols() {
        let runs: Vec<_> = Protocol::ALL.iter().map(|p| run(*p)).collect();
        assert!(is_full_comparison(&runs));
        let text = render_report(&runs).unwrap();
        for t in ["Lidar data", "CAN data", "Cam data"] {
            let block = text.split(t).nth(1).unwrap();
            let header = block.lines().nth(1).unwrap();
            assert!(header.contains("ndn-tcp") && header.contains("ndn-udp") && header.contains("pubsub"));
        }
        assert!(text.contains("1.500 [2.51]"));
        assert!(text.contains("72 [72]"));
        assert!(text.contains("106 [106]"));
    }

    #[test]
    fn empty_input_refused() {
        assert!(matches!(render_report(&[]), Err(ReportError::InsufficientData(_))));
        assert!(render_report(&[RunSummary::new(Protocol::PubSub)]).is_err());
    }
}
