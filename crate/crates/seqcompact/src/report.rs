//! Machine-readable outputs: JSON-lines records and the sweep CSV.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;
use seqcompact_core::classifier::ReportFlag;
use seqcompact_core::rational::to_f64;
use seqcompact_core::{Decision, EvalReport, Rational, SimilarityReport, SweepRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub length: usize,
    pub match_sum: u64,
    pub mean_match_all_positions: f64,
    pub unknown_symbols: usize,
}

/// One scored test, as emitted by `score`, `filter`, and `sort`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(rename = "L_Y")]
    pub l_y: f64,
    #[serde(rename = "L_X_given_Y")]
    pub l_x_given_y: Option<f64>,
    #[serde(rename = "L_max")]
    pub l_max: usize,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub decision: &'static str,
    pub matched_positions: usize,
    pub profile_summary: ProfileSummary,
    /// Exact values of `L_Y`, `L_X_given_Y`, `D`, `T` as reduced fractions.
    pub exact: ExactValues,
    pub flags: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactValues {
    #[serde(rename = "L_Y")]
    pub l_y: String,
    #[serde(rename = "L_X_given_Y")]
    pub l_x_given_y: Option<String>,
    #[serde(rename = "D")]
    pub d: Option<String>,
    #[serde(rename = "T")]
    pub t: String,
}

pub fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Acceptable => "acceptable",
        Decision::NotAcceptable => "not-acceptable",
    }
}

impl TestRecord {
    pub fn new(name: &str, report: &SimilarityReport, unknown: usize, rank: Option<usize>) -> Self {
        let mut flags = Vec::new();
        if report.flag == Some(ReportFlag::NoMatches) {
            flags.push("no_matches");
        }
        if unknown > 0 {
            flags.push("alphabet_mismatch");
        }
        let all_mean = if report.length == 0 { 0.0 } else { report.match_sum as f64 / report.length as f64 };
        TestRecord {
            name: name.to_string(),
            rank,
            l_y: to_f64(&report.l_y),
            l_x_given_y: report.l_x_given_y.as_ref().map(to_f64),
            l_max: report.l_max,
            d: report.d.as_ref().map(to_f64),
            t: to_f64(&report.t),
            decision: decision_str(report.decision),
            matched_positions: report.matched_positions,
            profile_summary: ProfileSummary {
                length: report.length,
                match_sum: report.match_sum,
                mean_match_all_positions: all_mean,
                unknown_symbols: unknown,
            },
            exact: ExactValues {
                l_y: report.l_y.to_string(),
                l_x_given_y: report.l_x_given_y.map(|r| r.to_string()),
                d: report.d.map(|r| r.to_string()),
                t: report.t.to_string(),
            },
            flags,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipRecord {
    pub start: usize,
    pub d_ref: String,
    pub d_cand: Option<String>,
    pub differing_positions: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalRecord {
    pub mode: &'static str,
    pub epsilon: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub f: u64,
    #[serde(rename = "T")]
    pub t: String,
    pub windows: u64,
    pub accepted_ref: u64,
    pub rejected_by_cand: u64,
    pub q: f64,
    pub p_delta: f64,
    pub bound: Option<f64>,
    pub exact_q: String,
    pub exact_p_delta: String,
    pub exact_bound: Option<String>,
    pub pass: bool,
    pub vacuous: bool,
    pub cand_undefined: bool,
    pub leaf_count: u64,
    pub leaf_bound: u64,
    pub min_count: u64,
    pub pruned_mass: Option<f64>,
    pub seed: Option<u64>,
}

pub struct EvalContext {
    pub mode: &'static str,
    pub n: u64,
    pub f: u64,
    pub t: Rational,
    pub leaf_count: u64,
    pub leaf_bound: u64,
    pub min_count: u64,
    pub pruned_mass: Option<Rational>,
    pub seed: Option<u64>,
}

impl EvalRecord {
    pub fn new(r: &EvalReport, ctx: &EvalContext) -> Self {
        EvalRecord {
            mode: ctx.mode,
            epsilon: r.epsilon.to_string(),
            n: ctx.n,
            f: ctx.f,
            t: ctx.t.to_string(),
            windows: r.windows,
            accepted_ref: r.accepted_ref,
            rejected_by_cand: r.rejected_by_cand,
            q: to_f64(&r.q),
            p_delta: to_f64(&r.p_delta),
            bound: r.bound.as_ref().map(to_f64),
            exact_q: r.q.to_string(),
            exact_p_delta: r.p_delta.to_string(),
            exact_bound: r.bound.map(|b| b.to_string()),
            pass: r.pass,
            vacuous: r.vacuous,
            cand_undefined: r.cand_undefined,
            leaf_count: ctx.leaf_count,
            leaf_bound: ctx.leaf_bound,
            min_count: ctx.min_count,
            pruned_mass: ctx.pruned_mass.as_ref().map(to_f64),
            seed: ctx.seed,
        }
    }
}

pub fn flip_records(r: &EvalReport) -> Vec<FlipRecord> {
    r.flips
        .iter()
        .map(|f| FlipRecord {
            start: f.start,
            d_ref: f.d_ref.to_string(),
            d_cand: f.d_cand.map(|d| d.to_string()),
            differing_positions: f.differing_positions,
        })
        .collect()
}

pub fn write_json_line<W: Write + ?Sized>(w: &mut W, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

/// The header line every JSON-lines output starts with.
pub fn config_line(config: &Value) -> Value {
    serde_json::json!({ "config": config })
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "epsilon",
    "f",
    "N",
    "T",
    "leaf_count",
    "q",
    "p_delta",
    "bound",
    "pass",
    "leaf_bound",
    "min_count",
    "pruned_mass",
    "seed",
    "error",
];

/// Sweep table: a `# config` comment line, a header row, then one row per cell.
pub fn write_sweep_csv<W: Write + ?Sized>(w: &mut W, config: &Value, rows: &[SweepRow], seed: Option<u64>) -> io::Result<()> {
    writeln!(w, "# config {config}")?;
    let mut csv = csv::Writer::from_writer(&mut *w);
    csv.write_record(SWEEP_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        let seed = seed.map(|s| s.to_string()).unwrap_or_default();
        let mut rec = vec![
            to_f64(&row.epsilon).to_string(),
            row.f.to_string(),
            row.n.to_string(),
            to_f64(&row.t).to_string(),
            row.leaf_count.to_string(),
        ];
        match &row.result {
            Ok(r) => rec.extend([
                to_f64(&r.q).to_string(),
                to_f64(&r.p_delta).to_string(),
                opt(r.bound.as_ref().map(to_f64)),
                r.pass.to_string(),
            ]),
            Err(_) => rec.extend([String::new(), String::new(), String::new(), String::new()]),
        }
        rec.extend([
            row.leaf_bound.to_string(),
            row.min_count.to_string(),
            opt(row.pruned_mass.as_ref().map(to_f64)),
            seed,
            row.result.as_ref().err().map(|e| e.to_string()).unwrap_or_default(),
        ]);
        csv.write_record(&rec)?;
    }
    csv.flush()
}
