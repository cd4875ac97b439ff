//! Multi-model metric reports and their renderers.
//!
//! Human-facing formats (`table`, `markdown`) show rates as percentages with
//! two decimals. Machine formats (`csv`, `jsonlines`) carry full precision.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::metrics::{DatasetMetrics, Lambda, MetricConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub metrics: DatasetMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lambdas: Vec<Lambda>,
    pub lowercase: bool,
    pub trim_whitespace: bool,
    pub empty_values: Vec<String>,
    pub ontology_pairs: Option<usize>,
}

impl From<&MetricConfig> for ConfigEcho {
    fn from(config: &MetricConfig) -> Self {
        ConfigEcho {
            lambdas: config.lambdas.clone(),
            lowercase: config.policy.lowercase,
            trim_whitespace: config.policy.trim_whitespace,
            empty_values: config.policy.empty_values.iter().cloned().collect(),
            ontology_pairs: config.ontology.as_ref().map(|o| o.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<InputDigest>,
    pub config: ConfigEcho,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
}

impl MetricReport {
    pub fn new(rows: Vec<ReportRow>, inputs: Vec<InputDigest>, config: &MetricConfig) -> Self {
        MetricReport {
            rows,
            provenance: Provenance {
                inputs,
                config: config.into(),
                tool_version: TOOL_VERSION.to_string(),
            },
        }
    }

    fn lambdas(&self) -> &[Lambda] {
        &self.provenance.config.lambdas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    JsonLines,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "jsonlines" | "jsonl" => Ok(ReportFormat::JsonLines),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!(
                "unknown format {other:?} (expected table, csv, jsonlines or markdown)"
            )),
        }
    }
}

pub fn render_report(report: &MetricReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Table => render_table(report).into_bytes(),
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::JsonLines => render_jsonlines(report).into_bytes(),
    }
}

pub fn percent(value: f64) -> String {
    format!("{:.2}%", value * 100.0)
}

fn percent_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), percent)
}

fn header(lambdas: &[Lambda]) -> Vec<String> {
    let mut h: Vec<String> = ["Model", "#Turns", "M1", "M2", "JGA", "SA", "AGA", "AGA-J"]
        .into_iter()
        .map(String::from)
        .collect();
    h.extend(lambdas.iter().map(|l| format!("FGA_{l}")));
    h.push("Ignored".to_string());
    h
}

fn display_cells(row: &ReportRow, lambdas: &[Lambda]) -> Vec<String> {
    let m = &row.metrics;
    let mut cells = vec![
        row.model.clone(),
        m.n_turns.to_string(),
        m.m1.to_string(),
        m.m2.to_string(),
        percent(m.jga),
        percent_opt(m.sa),
        percent_opt(m.aga),
        percent_opt(m.aga_jaccard),
    ];
    cells.extend(lambdas.iter().map(|l| percent_opt(m.fga_at(*l))));
    cells.push(m.ignored_turns.to_string());
    cells
}

fn render_table(report: &MetricReport) -> String {
    let head = header(report.lambdas());
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| display_cells(r, report.lambdas()))
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|i| {
            std::iter::once(&head[i])
                .chain(body.iter().map(|r| &r[i]))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| -> String {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
        out
    };
    let mut out = line(&head);
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in &body {
        out.push_str(&line(row));
    }
    out
}

fn render_markdown(report: &MetricReport) -> String {
    let head = header(report.lambdas());
    let mut out = format!("| {} |\n", head.join(" | "));
    let align: Vec<&str> = (0..head.len())
        .map(|i| if i == 0 { "---" } else { "---:" })
        .collect();
    let _ = writeln!(out, "| {} |", align.join(" | "));
    for row in &report.rows {
        let _ = writeln!(
            out,
            "| {} |",
            display_cells(row, report.lambdas()).join(" | ")
        );
    }
    out
}

fn full(value: Option<f64>) -> String {
    value.map_or_else(String::new, |v| v.to_string())
}

fn render_csv(report: &MetricReport) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<String> = [
        "model",
        "n_turns",
        "m1",
        "m2",
        "jga",
        "sa",
        "aga",
        "aga_jaccard",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    head.extend(report.lambdas().iter().map(|l| format!("fga_{l}")));
    head.push("ignored_turns".to_string());
    writer.write_record(&head).expect("writing to memory");
    for row in &report.rows {
        let m = &row.metrics;
        let mut record = vec![
            row.model.clone(),
            m.n_turns.to_string(),
            m.m1.to_string(),
            m.m2.to_string(),
            m.jga.to_string(),
            full(m.sa),
            full(m.aga),
            full(m.aga_jaccard),
        ];
        record.extend(report.lambdas().iter().map(|l| full(m.fga_at(*l))));
        record.push(m.ignored_turns.to_string());
        writer.write_record(&record).expect("writing to memory");
    }
    writer.into_inner().expect("flushing to memory")
}

/// FGA values keyed by λ in configuration order.
struct FgaMap<'a>(&'a [(Lambda, f64)]);

impl Serialize for FgaMap<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (lam, value) in self.0 {
            map.serialize_entry(&lam.to_string(), value)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: &'a str,
    n_turns: usize,
    m1: usize,
    m2: usize,
    jga: f64,
    sa: Option<f64>,
    aga: Option<f64>,
    aga_jaccard: Option<f64>,
    fga: FgaMap<'a>,
    ignored_turns: usize,
}

fn render_jsonlines(report: &MetricReport) -> String {
    let mut out = String::new();
    for row in &report.rows {
        let m = &row.metrics;
        let json = JsonRow {
            model: &row.model,
            n_turns: m.n_turns,
            m1: m.m1,
            m2: m.m2,
            jga: m.jga,
            sa: m.sa,
            aga: m.aga,
            aga_jaccard: m.aga_jaccard,
            fga: FgaMap(&m.fga),
            ignored_turns: m.ignored_turns,
        };
        out.push_str(&serde_json::to_string(&json).expect("serializable row"));
        out.push('\n');
    }
    let provenance = serde_json::json!({ "provenance": report.provenance });
    out.push_str(&provenance.to_string());
    out.push('\n');
    out
}
