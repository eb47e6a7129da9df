//! CSV formats.
//!
//! | file | header |
//! |------|--------|
//! | annotations | `item_id,annotator_id,label` |
//! | roster | `annotator_id,is_spam` |
//! | scores | `method,annotator_id,score` |
//! | sweep | `method,k,frac_removed,accuracy,stddev,mean_entropy,mae,kl` |
//! | scatter | `method,annotator_id,is_spam,annotator_entropy,score` |
//!
//! Output is UTF-8 with LF line endings, rows in a fixed order, and reals
//! printed with six decimals. A missing score is an empty field.

use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use log::warn;

use crate::annotation::{AnnotationMatrix, AnnotationRecord, AnnotatorRoster, LabelScale};
use crate::error::{Error, Result};
use crate::sweep::{ScoreTable, ScatterRow, SweepReport};

pub const ANNOTATIONS_HEADER: [&str; 3] = ["item_id", "annotator_id", "label"];
pub const ROSTER_HEADER: [&str; 2] = ["annotator_id", "is_spam"];
pub const SCORES_HEADER: [&str; 3] = ["method", "annotator_id", "score"];
pub const SWEEP_HEADER: [&str; 8] = [
    "method",
    "k",
    "frac_removed",
    "accuracy",
    "stddev",
    "mean_entropy",
    "mae",
    "kl",
];
pub const SCATTER_HEADER: [&str; 5] = ["method", "annotator_id", "is_spam", "annotator_entropy", "score"];

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    ReaderBuilder::new().has_headers(true).from_reader(input)
}

fn writer<W: Write>(output: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(output)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_error)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Parse {
            line: pos.line(),
            message: e.to_string(),
        },
        None => Error::Csv(e),
    }
}

fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn fmt_real(x: f64) -> String {
    let s = format!("{x:.6}");
    // Tiny negative values would otherwise print as "-0.000000".
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Reads long-format annotations. Without a declared scale, the scale is
/// inferred as `min label..max label` and a warning is logged.
pub fn parse_annotations<R: Read>(input: R, scale: Option<LabelScale>) -> Result<AnnotationMatrix> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &ANNOTATIONS_HEADER)?;
    let mut records = Vec::new();
    for result in rdr.records() {
        let rec = result.map_err(csv_error)?;
        let line = line_of(&rec);
        let label = rec[2].trim().parse::<i64>().map_err(|_| Error::Parse {
            line,
            message: format!("label `{}` is not an integer", &rec[2]),
        })?;
        if let Some(s) = &scale {
            if !s.contains(label) {
                return Err(Error::LabelOutOfScale {
                    label,
                    scale: s.to_string(),
                });
            }
        }
        records.push(AnnotationRecord::new(&rec[0], &rec[1], label));
    }
    let scale = match scale {
        Some(s) => s,
        None => {
            let lo = records.iter().map(|r| r.label).min().ok_or(Error::EmptyMatrix)?;
            let hi = records.iter().map(|r| r.label).max().ok_or(Error::EmptyMatrix)?;
            let s = LabelScale::range(lo, hi)?;
            warn!("no label scale declared; inferred {s} from the data");
            s
        }
    };
    AnnotationMatrix::from_records(scale, records)
}

pub fn parse_roster<R: Read>(input: R) -> Result<AnnotatorRoster> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &ROSTER_HEADER)?;
    let mut entries = Vec::new();
    for result in rdr.records() {
        let rec = result.map_err(csv_error)?;
        let spam = match rec[1].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    line: line_of(&rec),
                    message: format!("is_spam must be 0 or 1, got `{other}`"),
                })
            }
        };
        entries.push((rec[0].to_string(), spam));
    }
    if entries.is_empty() {
        return Err(Error::EmptyRoster);
    }
    AnnotatorRoster::from_entries(entries)
}

/// Writes annotations in canonical (item, annotator) order.
pub fn write_annotations<W: Write>(matrix: &AnnotationMatrix, output: W) -> Result<()> {
    let mut w = writer(output);
    w.write_record(ANNOTATIONS_HEADER)?;
    for rec in matrix.records() {
        w.write_record([rec.item_id.as_str(), rec.annotator_id.as_str(), &rec.label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_roster<W: Write>(roster: &AnnotatorRoster, output: W) -> Result<()> {
    let mut w = writer(output);
    w.write_record(ROSTER_HEADER)?;
    for (a, spam) in roster.iter() {
        w.write_record([a, if spam { "1" } else { "0" }])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes score tables sorted by method, then annotator id.
pub fn write_scores<W: Write>(tables: &[ScoreTable], output: W) -> Result<()> {
    let mut sorted: Vec<&ScoreTable> = tables.iter().collect();
    sorted.sort_by_key(|t| t.method());
    let mut w = writer(output);
    w.write_record(SCORES_HEADER)?;
    for t in sorted {
        for (a, s) in t.scores() {
            w.write_record([t.method().name(), a, &s.map(fmt_real).unwrap_or_default()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes sweep rows sorted by method, then k.
pub fn write_sweep<W: Write>(report: &SweepReport, output: W) -> Result<()> {
    let mut rows: Vec<_> = report.rows.iter().collect();
    rows.sort_by_key(|r| (r.method, r.k));
    let mut w = writer(output);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.method.name().to_string(),
            r.k.to_string(),
            fmt_real(r.frac_removed),
            fmt_real(m.accuracy),
            fmt_real(m.stddev),
            fmt_real(m.mean_entropy),
            fmt_real(m.mae),
            fmt_real(m.kl),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes scatter rows sorted by method, then annotator id.
pub fn write_scatter<W: Write>(rows: &[ScatterRow], output: W) -> Result<()> {
    let mut sorted: Vec<&ScatterRow> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.method, &a.annotator_id).cmp(&(b.method, &b.annotator_id)));
    let mut w = writer(output);
    w.write_record(SCATTER_HEADER)?;
    for r in sorted {
        w.write_record([
            r.method.name().to_string(),
            r.annotator_id.clone(),
            if r.is_spam { "1" } else { "0" }.to_string(),
            fmt_real(r.annotator_entropy),
            r.score.map(fmt_real).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
