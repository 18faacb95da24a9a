//! Report documents produced by the command line, each with a text form and
//! a JSON form carrying the same content.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use iradic_core::etree::SequenceCutSets;
use iradic_core::{
    render_percent, render_probability, BahamasResult, ComparisonReport, ComparisonRow, CutSetList,
    EtResult, Finding, HazardReport, ImportanceResult, Method, Origin, ValidationReport,
};
use serde::Serialize;

/// A report that can be printed as text or serialized as JSON.
pub trait Report: Serialize {
    fn to_text(&self) -> String;

    fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

/// E-notation for display. Non-finite values never reach reports, but are
/// shown rather than hidden if they do.
pub fn prob(v: f64) -> String {
    render_probability(v).unwrap_or_else(|_| format!("{v}"))
}

fn optional_count(c: Option<usize>) -> String {
    c.map_or_else(|| "-".to_string(), |c| c.to_string())
}

/// Left-aligned first column, right-aligned others, two spaces apart.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let mut text = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(text, "{cell:<w$}");
            } else {
                let _ = write!(text, "  {cell:>w$}");
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    line(&header, &mut out);
    for row in rows {
        line(row, &mut out);
    }
    out
}

#[derive(Debug, Serialize)]
pub struct FindingDoc {
    pub severity: &'static str,
    pub location: String,
    pub message: String,
}

impl From<&Finding> for FindingDoc {
    fn from(f: &Finding) -> Self {
        Self {
            severity: f.severity.as_str(),
            location: f.location.clone(),
            message: f.message.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ValidationDoc {
    pub findings: Vec<FindingDoc>,
    pub errors: usize,
}

impl ValidationDoc {
    pub fn new(report: &ValidationReport) -> Self {
        Self {
            findings: report.findings.iter().map(FindingDoc::from).collect(),
            errors: report.findings.iter().filter(|f| f.is_error()).count(),
        }
    }
}

impl Report for ValidationDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(out, "{}\t{}\t{}", f.severity, f.location, f.message);
        }
        let n = self.findings.len();
        let _ = writeln!(out, "{n} finding{}", if n == 1 { "" } else { "s" });
        out
    }
}

#[derive(Debug, Serialize)]
pub struct CutSetRow {
    pub order: usize,
    pub probability: f64,
    pub events: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CutSetDoc {
    pub top: String,
    pub method: &'static str,
    pub truncation: f64,
    pub max_order: Option<usize>,
    pub top_probability: f64,
    pub truncated_count: usize,
    /// Sets removed by delete-term (sequence cut sets only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deleted_by_success: Option<usize>,
    pub cutsets: Vec<CutSetRow>,
}

impl CutSetDoc {
    pub fn new(list: &CutSetList, method: Method, top_probability: f64) -> Self {
        Self {
            top: list.source_top.clone(),
            method: method.as_str(),
            truncation: list.truncation_probability,
            max_order: list.max_order,
            top_probability,
            truncated_count: list.truncated_count,
            deleted_by_success: None,
            cutsets: list
                .cutsets
                .iter()
                .map(|c| CutSetRow {
                    order: c.order(),
                    probability: c.probability,
                    events: c.events.clone(),
                })
                .collect(),
        }
    }

    pub fn for_sequence(seq: &SequenceCutSets, method: Method, top_probability: f64) -> Self {
        Self {
            deleted_by_success: Some(seq.deleted_by_success),
            ..Self::new(&seq.cutsets, method, top_probability)
        }
    }
}

impl Report for CutSetDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# top: {}", self.top);
        let _ = writeln!(out, "# method: {}", self.method);
        let _ = writeln!(out, "# truncation: {}", prob(self.truncation));
        let order = self
            .max_order
            .map_or_else(|| "unlimited".to_string(), |o| o.to_string());
        let _ = writeln!(out, "# max order: {order}");
        let _ = writeln!(out, "# probability: {}", prob(self.top_probability));
        let _ = writeln!(
            out,
            "# cut sets: {} (truncated {})",
            self.cutsets.len(),
            self.truncated_count
        );
        if let Some(d) = self.deleted_by_success {
            let _ = writeln!(out, "# deleted by success branches: {d}");
        }
        for c in &self.cutsets {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                c.order,
                prob(c.probability),
                c.events.join(",")
            );
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct QuantifyDoc {
    pub top: String,
    pub results: Vec<MethodResult>,
}

#[derive(Debug, Serialize)]
pub struct MethodResult {
    pub method: &'static str,
    /// `None` when the method could not run, see `note`.
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report for QuantifyDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# top: {}", self.top);
        for r in &self.results {
            let value = r.probability.map_or_else(|| "n/a".to_string(), prob);
            match &r.note {
                Some(note) => {
                    let _ = writeln!(out, "{}\t{}\t{}", r.method, value, note);
                }
                None => {
                    let _ = writeln!(out, "{}\t{}", r.method, value);
                }
            }
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct SpofDoc {
    pub top: String,
    pub spofs: Vec<String>,
}

impl Report for SpofDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# top: {}", self.top);
        let _ = writeln!(out, "# single points of failure: {}", self.spofs.len());
        for s in &self.spofs {
            let _ = writeln!(out, "{s}");
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct ImportanceDoc {
    pub top: String,
    pub importance: Vec<ImportanceRow>,
}

#[derive(Debug, Serialize)]
pub struct ImportanceRow {
    pub event: String,
    pub fussell_vesely: f64,
}

impl ImportanceDoc {
    pub fn new(top: &str, rows: &[ImportanceResult]) -> Self {
        Self {
            top: top.to_string(),
            importance: rows
                .iter()
                .map(|r| ImportanceRow {
                    event: r.event.clone(),
                    fussell_vesely: r.fussell_vesely,
                })
                .collect(),
        }
    }
}

impl Report for ImportanceDoc {
    fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .importance
            .iter()
            .map(|r| {
                vec![
                    r.event.clone(),
                    prob(r.fussell_vesely),
                    render_percent(r.fussell_vesely),
                ]
            })
            .collect();
        format!(
            "# top: {}\n{}",
            self.top,
            table(&["Event", "FV", "FV%"], &rows)
        )
    }
}

fn origin_text(o: &Origin) -> String {
    match o {
        Origin::HardwareOriginal => "hardware".to_string(),
        Origin::SoftwareUca(u) => format!("software-uca:{u}"),
        Origin::SoftwareCcf(g) => format!("software-ccf:{g}"),
        Origin::HardwareCcf(g) => format!("hardware-ccf:{g}"),
    }
}

#[derive(Debug, Serialize)]
pub struct HazardDoc {
    pub top: String,
    pub method: &'static str,
    pub top_probability: f64,
    pub software_events: Vec<String>,
    pub cutset_count: usize,
    pub truncated_count: usize,
    pub spofs: Vec<SpofEntry>,
    pub cutset_histogram: BTreeMap<usize, usize>,
    pub low_order_threshold: usize,
    /// Cause class → software events in low-order cut sets.
    pub by_cause_class: BTreeMap<&'static str, Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct SpofEntry {
    pub event: String,
    pub origin: String,
}

impl HazardDoc {
    pub fn new(
        report: &HazardReport,
        software_events: Vec<String>,
        method: Method,
        top_probability: f64,
    ) -> Self {
        Self {
            top: report.cutsets.source_top.clone(),
            method: method.as_str(),
            top_probability,
            software_events,
            cutset_count: report.cutsets.len(),
            truncated_count: report.cutsets.truncated_count,
            spofs: report
                .spofs
                .iter()
                .map(|(id, o)| SpofEntry {
                    event: id.clone(),
                    origin: origin_text(o),
                })
                .collect(),
            cutset_histogram: report.cutset_histogram.clone(),
            low_order_threshold: report.low_order_threshold,
            by_cause_class: report
                .by_cause_class
                .iter()
                .map(|(k, v)| (k.as_str(), v.clone()))
                .collect(),
        }
    }
}

impl Report for HazardDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# top: {}", self.top);
        let _ = writeln!(out, "# method: {}", self.method);
        let _ = writeln!(out, "# probability: {}", prob(self.top_probability));
        let _ = writeln!(out, "# software events: {}", self.software_events.len());
        let _ = writeln!(
            out,
            "# cut sets: {} (truncated {})",
            self.cutset_count, self.truncated_count
        );
        out.push_str("\ncut sets by order\n");
        for (order, count) in &self.cutset_histogram {
            let _ = writeln!(out, "{order}\t{count}");
        }
        let _ = writeln!(out, "\nsingle points of failure: {}", self.spofs.len());
        for s in &self.spofs {
            let _ = writeln!(out, "{}\t{}", s.event, s.origin);
        }
        let _ = writeln!(
            out,
            "\nsoftware events in cut sets of order <= {}",
            self.low_order_threshold
        );
        for (class, events) in &self.by_cause_class {
            let _ = writeln!(out, "{class}\t{}", events.join(","));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct MarginalDoc {
    pub bbn: String,
    pub query: String,
    pub evidence: BTreeMap<String, &'static str>,
    pub probability: f64,
}

impl Report for MarginalDoc {
    fn to_text(&self) -> String {
        let evidence: Vec<String> = self
            .evidence
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let given = if evidence.is_empty() {
            String::new()
        } else {
            format!(" | {}", evidence.join(","))
        };
        format!(
            "P({}/{} = fail{given}) = {}\n",
            self.bbn,
            self.query,
            prob(self.probability)
        )
    }
}

#[derive(Debug, Serialize)]
pub struct BahamasDoc {
    pub bbn: String,
    pub query: String,
    pub generic: f64,
    pub specific: f64,
    pub individual: f64,
    pub ccf: Vec<LevelShare>,
    pub warnings: Vec<FindingDoc>,
}

#[derive(Debug, Serialize)]
pub struct LevelShare {
    pub level: String,
    pub probability: f64,
}

impl BahamasDoc {
    pub fn new(bbn: &str, query: &str, r: &BahamasResult) -> Self {
        Self {
            bbn: bbn.to_string(),
            query: query.to_string(),
            generic: r.generic_failure_probability,
            specific: r.specific_failure_probability,
            individual: r.individual_probability,
            ccf: r
                .ccf_probabilities
                .iter()
                .map(|(level, p)| LevelShare {
                    level: level.clone(),
                    probability: *p,
                })
                .collect(),
            warnings: r.findings.iter().map(FindingDoc::from).collect(),
        }
    }
}

impl Report for BahamasDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# bbn: {} query: {}", self.bbn, self.query);
        let _ = writeln!(out, "generic\t{}", prob(self.generic));
        let _ = writeln!(out, "specific\t{}", prob(self.specific));
        let _ = writeln!(out, "individual\t{}", prob(self.individual));
        for l in &self.ccf {
            let _ = writeln!(out, "ccf:{}\t{}", l.level, prob(l.probability));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "{}\t{}\t{}", w.severity, w.location, w.message);
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct EtDoc {
    pub event_tree: String,
    pub end_state: Option<String>,
    pub sequences: Vec<EtRow>,
    pub total: f64,
}

#[derive(Debug, Serialize)]
pub struct EtRow {
    pub sequence: String,
    pub end_state: String,
    pub frequency: f64,
    pub cutset_count: Option<usize>,
    pub below_truncation: bool,
}

impl EtDoc {
    /// Rows for included sequences; zero-frequency rows only when `all`.
    pub fn new(r: &EtResult, all: bool) -> Self {
        Self {
            event_tree: r.event_tree.clone(),
            end_state: r.end_state.clone(),
            sequences: r
                .sequences
                .iter()
                .filter(|s| s.included && (all || s.probability > 0.0))
                .map(|s| EtRow {
                    sequence: format!("{}:{}", r.event_tree, s.id),
                    end_state: s.end_state.clone(),
                    frequency: s.probability,
                    cutset_count: s.cutset_count,
                    below_truncation: s.below_truncation,
                })
                .collect(),
            total: r.total,
        }
    }
}

impl Report for EtDoc {
    fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .sequences
            .iter()
            .map(|s| {
                let mut f = prob(s.frequency);
                if s.below_truncation {
                    f.push('*');
                }
                vec![
                    s.sequence.clone(),
                    s.end_state.clone(),
                    f,
                    optional_count(s.cutset_count),
                ]
            })
            .collect();
        let count_total = self
            .sequences
            .iter()
            .map(|s| s.cutset_count)
            .sum::<Option<usize>>();
        rows.push(vec![
            "Total".into(),
            self.end_state.clone().unwrap_or_else(|| "all".into()),
            prob(self.total),
            optional_count(count_total),
        ]);
        let mut out = table(&["Sequence", "End state", "Frequency", "#CutSets"], &rows);
        if self.sequences.iter().any(|s| s.below_truncation) {
            out.push_str("* below truncation\n");
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct CompareDoc {
    pub event_tree: String,
    pub rows: Vec<CompareRow>,
    pub total: CompareRow,
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub sequence: String,
    pub original: f64,
    pub improved: f64,
    pub delta_fraction: Option<f64>,
    pub original_count: Option<usize>,
    pub improved_count: Option<usize>,
    pub contribution: Option<f64>,
}

impl CompareRow {
    fn new(et: &str, r: &ComparisonRow, qualify: bool) -> Self {
        Self {
            sequence: if qualify {
                format!("{et}:{}", r.sequence)
            } else {
                r.sequence.clone()
            },
            original: r.original,
            improved: r.improved,
            delta_fraction: r.delta_fraction,
            original_count: r.original_count,
            improved_count: r.improved_count,
            contribution: r.contribution,
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.sequence.clone(),
            prob(self.original),
            prob(self.improved),
            self.delta_fraction
                .map_or_else(|| "n/a".to_string(), render_percent),
            optional_count(self.original_count),
            optional_count(self.improved_count),
            self.contribution
                .map_or_else(|| "n/a".to_string(), render_percent),
        ]
    }
}

impl CompareDoc {
    /// Unchanged zero rows are dropped unless `all`.
    pub fn new(r: &ComparisonReport, all: bool) -> Self {
        Self {
            event_tree: r.event_tree.clone(),
            rows: r
                .rows
                .iter()
                .filter(|row| all || row.original > 0.0 || row.improved > 0.0)
                .map(|row| CompareRow::new(&r.event_tree, row, true))
                .collect(),
            total: CompareRow::new(&r.event_tree, &r.total, false),
        }
    }
}

impl Report for CompareDoc {
    fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = self.rows.iter().map(CompareRow::cells).collect();
        rows.push(self.total.cells());
        table(
            &[
                "Sequence",
                "CDF-A",
                "CDF-B",
                "Δ%",
                "#CutSets-A",
                "#CutSets-B",
                "Contribution-B",
            ],
            &rows,
        )
    }
}

#[derive(Debug, Serialize)]
pub struct ExpansionDoc {
    pub groups: Vec<String>,
    pub ccf_events: Vec<String>,
    pub written_to: Option<String>,
}

impl Report for ExpansionDoc {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# expanded groups: {}", self.groups.join(","));
        let _ = writeln!(out, "# ccf events: {}", self.ccf_events.len());
        for e in &self.ccf_events {
            let _ = writeln!(out, "{e}");
        }
        if let Some(p) = &self.written_to {
            let _ = writeln!(out, "# written to {p}");
        }
        out
    }
}
