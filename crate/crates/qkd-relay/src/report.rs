//! Line-oriented text formats for run artifacts.
//!
//! Three documents are produced per run:
//!
//! **Records** (`records.txt`) — one slot-record per line, whitespace
//! separated:
//!
//! ```text
//! run timeslot node detected recv_basis recv_bit emitted emit_basis emit_bit origin resend_of withheld
//! ```
//!
//! Absent fields are `-`. `withheld` is `1` when the bit columns were
//! stripped for a public copy; such files parse as announcements but not as
//! records. With `withheld = 0` the file round-trips losslessly, so the
//! post-processing stage can be exercised on fixture files without the
//! simulator.
//!
//! **Announcements** (`announcements.txt`) — the public transcript, one per
//! line:
//!
//! ```text
//! run timeslot node recv_basis emit_basis padded resend_of
//! ```
//!
//! There are no bit columns in this format at all.
//!
//! **Summary** (`summary.txt`) — flat `key = value` lines with stable names
//! and fixed six-decimal formatting, so identical runs are byte-identical
//! and diffs are meaningful.
//!
//! The optional per-slot trace is a CSV table
//! (`timeslot,node,basis,origin,detected,resend_of`) for eyeballing runs.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analytics::RunSummary;
use crate::bb84::{Basis, Bit};
use crate::config::{mode_tag, RunConfig};
use crate::nodes::{Emission, Measurement, Origin, SlotRecord};
use crate::sift::Announcement;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: bad {field}: {value:?}")]
    BadField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: bits are withheld; a records file must carry them")]
    BitsWithheld { line: usize },
}

fn basis_str(b: Option<Basis>) -> String {
    b.map_or_else(|| "-".to_string(), |b| b.to_string())
}

fn bit_str(b: Option<Bit>) -> String {
    b.map_or_else(|| "-".to_string(), |b| b.to_string())
}

fn origin_str(o: Option<Origin>) -> &'static str {
    match o {
        None => "-",
        Some(Origin::Source) => "source",
        Some(Origin::Received) => "received",
        Some(Origin::Padded) => "padded",
    }
}

fn slot_str(s: Option<u64>) -> String {
    s.map_or_else(|| "-".to_string(), |s| s.to_string())
}

/// Render private slot records. With `withhold_bits` the bit columns are
/// replaced by `-` and the withheld flag is set, producing a public copy.
pub fn render_records(run_id: &str, records: &[SlotRecord], withhold_bits: bool) -> String {
    let mut out = String::new();
    out.push_str(
        "# qkd-relay records v1: run timeslot node detected recv_basis recv_bit \
         emitted emit_basis emit_bit origin resend_of withheld\n",
    );
    for r in records {
        let (recv_bit, emit_bit) = if withhold_bits {
            (None, None)
        } else {
            (r.detection.map(|m| m.bit), r.emission.map(|e| e.bit))
        };
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {}",
            run_id,
            r.timeslot,
            r.node,
            u8::from(r.detected()),
            basis_str(r.detection.map(|m| m.basis)),
            bit_str(recv_bit),
            u8::from(r.emitted()),
            basis_str(r.emission.map(|e| e.basis)),
            bit_str(emit_bit),
            origin_str(r.emission.map(|e| e.origin)),
            slot_str(r.emission.and_then(|e| e.resend_of)),
            u8::from(withhold_bits),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn parse_basis(line: usize, field: &'static str, s: &str) -> Result<Option<Basis>, ParseError> {
    match s {
        "-" => Ok(None),
        "X" => Ok(Some(Basis::X)),
        "Y" => Ok(Some(Basis::Y)),
        _ => Err(ParseError::BadField {
            line,
            field,
            value: s.to_string(),
        }),
    }
}

fn parse_bit(line: usize, field: &'static str, s: &str) -> Result<Option<Bit>, ParseError> {
    match s {
        "-" => Ok(None),
        "0" => Ok(Some(Bit::ZERO)),
        "1" => Ok(Some(Bit::ONE)),
        _ => Err(ParseError::BadField {
            line,
            field,
            value: s.to_string(),
        }),
    }
}

fn parse_num<T: std::str::FromStr>(
    line: usize,
    field: &'static str,
    s: &str,
) -> Result<T, ParseError> {
    s.parse().map_err(|_| ParseError::BadField {
        line,
        field,
        value: s.to_string(),
    })
}

fn parse_flag(line: usize, field: &'static str, s: &str) -> Result<bool, ParseError> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(ParseError::BadField {
            line,
            field,
            value: s.to_string(),
        }),
    }
}

/// Parse a records document produced by [`render_records`] with bits
/// present. Returns the run id and the records.
pub fn parse_records(input: &str) -> Result<(String, Vec<SlotRecord>), ParseError> {
    let mut run_id = String::new();
    let mut records = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 12 {
            return Err(ParseError::FieldCount {
                line,
                expected: 12,
                found: fields.len(),
            });
        }
        if parse_flag(line, "withheld", fields[11])? {
            return Err(ParseError::BitsWithheld { line });
        }
        run_id = fields[0].to_string();
        let timeslot: u64 = parse_num(line, "timeslot", fields[1])?;
        let node: usize = parse_num(line, "node", fields[2])?;
        let detected = parse_flag(line, "detected", fields[3])?;
        let recv_basis = parse_basis(line, "recv_basis", fields[4])?;
        let recv_bit = parse_bit(line, "recv_bit", fields[5])?;
        let emitted = parse_flag(line, "emitted", fields[6])?;
        let emit_basis = parse_basis(line, "emit_basis", fields[7])?;
        let emit_bit = parse_bit(line, "emit_bit", fields[8])?;
        let origin = match fields[9] {
            "-" => None,
            "source" => Some(Origin::Source),
            "received" => Some(Origin::Received),
            "padded" => Some(Origin::Padded),
            other => {
                return Err(ParseError::BadField {
                    line,
                    field: "origin",
                    value: other.to_string(),
                })
            }
        };
        let resend_of = match fields[10] {
            "-" => None,
            s => Some(parse_num(line, "resend_of", s)?),
        };

        let detection = if detected {
            let basis = recv_basis.ok_or(ParseError::BadField {
                line,
                field: "recv_basis",
                value: "-".to_string(),
            })?;
            let bit = recv_bit.ok_or(ParseError::BitsWithheld { line })?;
            Some(Measurement { basis, bit })
        } else {
            None
        };
        let emission = if emitted {
            let basis = emit_basis.ok_or(ParseError::BadField {
                line,
                field: "emit_basis",
                value: "-".to_string(),
            })?;
            let bit = emit_bit.ok_or(ParseError::BitsWithheld { line })?;
            let origin = origin.ok_or(ParseError::BadField {
                line,
                field: "origin",
                value: "-".to_string(),
            })?;
            Some(Emission {
                basis,
                bit,
                origin,
                resend_of,
            })
        } else {
            None
        };
        records.push(SlotRecord {
            timeslot,
            node,
            detection,
            emission,
        });
    }
    Ok((run_id, records))
}

/// Render the public announcement transcript. The format has no bit fields.
pub fn render_announcements(run_id: &str, announcements: &[Announcement]) -> String {
    let mut out = String::new();
    out.push_str(
        "# qkd-relay announcements v1: run timeslot node recv_basis emit_basis padded resend_of\n",
    );
    for a in announcements {
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            run_id,
            a.timeslot,
            a.node,
            basis_str(a.received),
            basis_str(a.emitted),
            u8::from(a.padded),
            slot_str(a.resend_of),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Parse an announcements document produced by [`render_announcements`].
pub fn parse_announcements(input: &str) -> Result<(String, Vec<Announcement>), ParseError> {
    let mut run_id = String::new();
    let mut announcements = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(ParseError::FieldCount {
                line,
                expected: 7,
                found: fields.len(),
            });
        }
        run_id = fields[0].to_string();
        announcements.push(Announcement {
            timeslot: parse_num(line, "timeslot", fields[1])?,
            node: parse_num(line, "node", fields[2])?,
            received: parse_basis(line, "recv_basis", fields[3])?,
            emitted: parse_basis(line, "emit_basis", fields[4])?,
            padded: parse_flag(line, "padded", fields[5])?,
            resend_of: match fields[6] {
                "-" => None,
                s => Some(parse_num(line, "resend_of", s)?),
            },
        });
    }
    Ok((run_id, announcements))
}

fn fraction_str(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |v| format!("{v:.6}"))
}

/// Render the flat key-value summary document. The config echo up front
/// makes every summary self-describing and regression-diffable.
pub fn render_summary(run_id: &str, config: &RunConfig, summary: &RunSummary) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        writeln!(out, "{key} = {value}").expect("writing to a String cannot fail");
    };
    kv("schema", "qkd-relay-summary/1".to_string());
    kv("run", run_id.to_string());
    kv("n_nodes", summary.n_nodes.to_string());
    kv("slots", summary.slots.to_string());
    kv("seed", config.seed.to_string());
    kv("mode", mode_tag(config.mode));
    for (i, xi) in config.transmittance.iter().enumerate() {
        kv(&format!("transmittance.{i}"), format!("{xi:.6}"));
    }
    kv("threshold", format!("{:.6}", config.threshold));
    kv(
        "eve_link",
        config
            .eve_link
            .map_or_else(|| "none".to_string(), |l| l.to_string()),
    );
    for (i, rate) in summary.link_detection_rate.iter().enumerate() {
        kv(&format!("link.{i}.detection_rate"), fraction_str(*rate));
    }
    for (i, tokens) in summary.link_tokens.iter().enumerate() {
        kv(&format!("link.{i}.tokens"), tokens.to_string());
    }
    for (i, viable) in summary.link_viable.iter().enumerate() {
        let value = viable.map_or_else(|| "absent".to_string(), |v| v.to_string());
        kv(&format!("link.{i}.viable"), value);
    }
    kv("naive_fraction", fraction_str(summary.naive_fraction));
    kv("bridged_fraction", fraction_str(summary.bridged_fraction));
    kv("origin_fraction", fraction_str(summary.origin_fraction));
    kv(
        "origin_fraction_expected",
        format!("{:.6}", summary.origin_fraction_expected),
    );
    kv("qber", fraction_str(summary.qber));
    out
}

/// Render the optional per-slot trace as CSV. The basis column shows the
/// emission basis when the node emitted, otherwise the detection basis.
pub fn render_trace(records: &[SlotRecord]) -> String {
    let mut out = String::from("timeslot,node,basis,origin,detected,resend_of\n");
    for r in records {
        let basis = r.emission.map(|e| e.basis).or(r.detection.map(|m| m.basis));
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.timeslot,
            r.node,
            basis_str(basis),
            origin_str(r.emission.map(|e| e.origin)),
            u8::from(r.detected()),
            slot_str(r.emission.and_then(|e| e.resend_of)),
        )
        .expect("writing to a String cannot fail");
    }
    out
}
