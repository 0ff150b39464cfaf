//! Report rendering: aligned text table, long-format CSV, JSON.
//!
//! The CSV has one record per fact, so it parses back into exactly the
//! report it came from:
//!
//! ```text
//! record,dataset,configuration,sample_id,chosen,threshold_pct,value
//! meta,eval,,,,,2
//! mean,eval,trained,,,,0.75
//! correct,eval,trained,,,50,2
//! sample,eval,trained,s1,way/12,,1
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EvalReport, EvalRow, SampleDetail, ThresholdCount, THRESHOLDS_PCT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format {s:?} (text, csv or json)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportParseError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("record {line}: {message}")]
    Record { line: usize, message: String },
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    }
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

fn render_text(report: &EvalReport) -> String {
    let n = report.sample_count;
    let label_w = report
        .rows
        .iter()
        .map(|r| r.label.chars().count())
        .chain(std::iter::once("Approach".len()))
        .max()
        .unwrap_or(8);
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Approach".to_string(), "Mean R".to_string()];
    header.extend(THRESHOLDS_PCT.iter().map(|t| {
        if *t == 100 {
            "R=100%".to_string()
        } else {
            format!("R>={t}%")
        }
    }));
    cells.push(header);
    for row in &report.rows {
        let mut line = vec![row.label.clone(), format!("{:.1}%", row.mean_pct())];
        for t in THRESHOLDS_PCT {
            let c = row.count_at(t).unwrap_or(0);
            line.push(format!("{c} ({:.1}%)", pct(c, n)));
        }
        cells.push(line);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|i| {
            if i == 0 {
                label_w
            } else {
                cells.iter().map(|l| l[i].chars().count()).max().unwrap_or(0)
            }
        })
        .collect();
    let mut out = format!("dataset {} ({n} samples)\n", report.dataset);
    for (k, line) in cells.iter().enumerate() {
        for (i, cell) in line.iter().enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = widths[i]);
            }
        }
        out.push('\n');
        if k == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    record: String,
    dataset: String,
    configuration: String,
    sample_id: String,
    chosen: String,
    threshold_pct: Option<u32>,
    value: f64,
}

fn render_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rec = |record: &str, configuration: &str, sample_id: &str, chosen: &str, t: Option<u32>, value: f64| CsvRecord {
        record: record.into(),
        dataset: report.dataset.clone(),
        configuration: configuration.into(),
        sample_id: sample_id.into(),
        chosen: chosen.into(),
        threshold_pct: t,
        value,
    };
    let mut all = vec![rec("meta", "", "", "", None, report.sample_count as f64)];
    for row in &report.rows {
        all.push(rec("mean", &row.label, "", "", None, row.mean_ratio));
        for t in &row.correct {
            all.push(rec("correct", &row.label, "", "", Some(t.threshold_pct), t.count as f64));
        }
    }
    for d in &report.details {
        all.push(rec(
            "sample",
            &d.configuration,
            &d.sample_id,
            d.chosen.as_deref().unwrap_or(""),
            None,
            d.ratio,
        ));
    }
    for r in all {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

fn as_count(v: f64, line: usize) -> Result<usize, ReportParseError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(ReportParseError::Record {
            line,
            message: format!("{v} is not a count"),
        })
    }
}

/// Rebuild a report from [`ReportFormat::Csv`] output.
pub fn parse_csv_report(text: &str) -> Result<EvalReport, ReportParseError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut report = EvalReport {
        dataset: String::new(),
        sample_count: 0,
        rows: Vec::new(),
        details: Vec::new(),
    };
    for (i, rec) in reader.deserialize::<CsvRecord>().enumerate() {
        let line = i + 2;
        let r = rec?;
        let err = |message: &str| ReportParseError::Record {
            line,
            message: message.to_string(),
        };
        match r.record.as_str() {
            "meta" => {
                report.dataset = r.dataset;
                report.sample_count = as_count(r.value, line)?;
            }
            "mean" => report.rows.push(EvalRow {
                label: r.configuration,
                mean_ratio: r.value,
                correct: Vec::new(),
            }),
            "correct" => {
                let row = report
                    .rows
                    .iter_mut()
                    .rev()
                    .find(|row| row.label == r.configuration)
                    .ok_or_else(|| err("count before its mean record"))?;
                row.correct.push(ThresholdCount {
                    threshold_pct: r.threshold_pct.ok_or_else(|| err("missing threshold"))?,
                    count: as_count(r.value, line)?,
                });
            }
            "sample" => report.details.push(SampleDetail {
                configuration: r.configuration,
                sample_id: r.sample_id,
                chosen: (!r.chosen.is_empty()).then_some(r.chosen),
                ratio: r.value,
            }),
            other => return Err(err(&format!("unknown record type {other:?}"))),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::summarize;

    fn report(rows: usize) -> EvalReport {
        let vals = [0.1 + 0.2, 1.0 / 3.0, 1.0, 0.0];
        EvalReport {
            dataset: "eval, \"quoted\"".into(),
            sample_count: vals.len(),
            rows: (0..rows).map(|i| summarize(&format!("cfg {i}"), &vals)).collect(),
            details: (0..rows)
                .flat_map(|i| {
                    vals.iter().enumerate().map(move |(k, &v)| SampleDetail {
                        configuration: format!("cfg {i}"),
                        sample_id: format!("s{k}"),
                        chosen: (k != 3).then(|| format!("way/{k}")),
                        ratio: v,
                    })
                })
                .collect(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = render_report(&report(0), ReportFormat::Text);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("Approach"));
    }

    #[test]
    fn two_configs_two_rows() {
        let text = render_report(&report(2), ReportFormat::Text);
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("40.8%"), "{text}");
        assert!(text.contains("1 (25.0%)"));
    }

    #[test]
    fn csv_round_trips_to_identical_json() {
        for n in [0, 1, 3] {
            let r = report(n);
            let back = parse_csv_report(&render_report(&r, ReportFormat::Csv)).unwrap();
            assert_eq!(back, r);
            assert_eq!(
                render_report(&back, ReportFormat::Json),
                render_report(&r, ReportFormat::Json)
            );
        }
    }

    #[test]
    fn json_round_trips() {
        let r = report(2);
        let back: EvalReport = serde_json::from_str(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rejects_garbage_csv() {
        let bad = "record,dataset,configuration,sample_id,chosen,threshold_pct,value\nbogus,d,,,,,1\n";
        assert!(parse_csv_report(bad).is_err());
    }
}
