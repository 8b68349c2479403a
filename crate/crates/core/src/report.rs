//! Deterministic JSON and CSV emission for scan and oracle-suite reports.
//!
//! Numbers are printed with 17 significant digits so every double survives a
//! text round trip; field order is fixed by construction, which makes
//! repeated runs byte-identical.

use crate::ad::{ScanReport, SweepRow, SCAN_SCHEMA};
use crate::herglotz::{DivergenceReason, EnergyClass};
use crate::oracle::{OracleCase, ORACLE_SCHEMA};

/// 17-significant-digit representation, valid as a JSON number.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        // reports never contain non-finite values; null keeps the JSON valid
        return "null".to_string();
    }
    format!("{:.16e}", x)
}

/// Optional provenance block; omitted under `--no-meta` so reruns compare
/// byte-for-byte.
#[derive(Debug, Clone)]
pub struct Meta {
    pub unix_time: u64,
    pub tool: String,
}

fn meta_json(meta: Option<&Meta>) -> String {
    match meta {
        None => String::new(),
        Some(m) => format!(
            ",\"meta\":{{\"unix_time\":{},\"tool\":\"{}\"}}",
            m.unix_time, m.tool
        ),
    }
}

fn class_json(class: &EnergyClass, out: &mut String) {
    match class {
        EnergyClass::Convergent { moment, witness } => {
            out.push_str("{\"tag\":\"convergent\",\"moment\":");
            out.push_str(&fmt_f64(*moment));
            out.push_str(",\"witness\":");
            witness_json(witness, out);
            out.push('}');
        }
        EnergyClass::Divergent { reason, witness } => {
            out.push_str("{\"tag\":\"divergent\",\"reason\":\"");
            out.push_str(reason_label(*reason));
            out.push_str("\",\"witness\":");
            witness_json(witness, out);
            out.push('}');
        }
    }
}

fn witness_json(w: &crate::herglotz::GnWitness, out: &mut String) {
    out.push_str("{\"samples\":");
    out.push_str(&w.samples.to_string());
    out.push_str(",\"last\":");
    out.push_str(&fmt_f64(w.last));
    out.push_str(",\"growth\":");
    out.push_str(&fmt_f64(w.growth));
    out.push('}');
}

/// Standalone JSON rendering of an energy classification.
pub fn energy_class_json(class: &EnergyClass) -> String {
    let mut out = String::new();
    class_json(class, &mut out);
    out
}

pub fn reason_label(reason: DivergenceReason) -> &'static str {
    match reason {
        DivergenceReason::AtomHit => "atom-hit",
        DivergenceReason::DensityCover => "density-cover",
        DivergenceReason::CapExceeded => "cap-exceeded",
        DivergenceReason::NoStabilization => "no-stabilization",
    }
}

fn sweep_row_json(row: &SweepRow, out: &mut String) {
    out.push_str("{\"theta\":");
    out.push_str(&fmt_f64(row.theta));
    out.push_str(",\"alpha\":");
    match (row.alpha, row.alpha_infinite) {
        (Some(a), _) => out.push_str(&fmt_f64(a)),
        (None, true) => out.push_str("\"inf\""),
        (None, false) => out.push_str("null"),
    }
    out.push_str(",\"same_extension\":");
    out.push_str(if row.same_extension { "true" } else { "false" });
    out.push_str(",\"eigenvalues\":[");
    for (i, h) in row.eigenvalues.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"y\":");
        out.push_str(&fmt_f64(h.y));
        out.push_str(",\"near_atom\":");
        out.push_str(if h.near_atom { "true" } else { "false" });
        out.push_str(",\"convergent\":");
        out.push_str(if h.convergent { "true" } else { "false" });
        out.push('}');
    }
    out.push_str("]}");
}

pub fn scan_report_json(r: &ScanReport, meta: Option<&Meta>) -> String {
    let mut out = String::with_capacity(64 * (r.grid.len() + r.eigen_hits.len()) + 256);
    out.push_str("{\"schema\":\"");
    out.push_str(SCAN_SCHEMA);
    out.push('"');
    out.push_str(&meta_json(meta));
    out.push_str(",\"window\":{\"lo\":");
    out.push_str(&fmt_f64(r.window.lo));
    out.push_str(",\"hi\":");
    out.push_str(&fmt_f64(r.window.hi));
    out.push_str("},\"theta0\":");
    out.push_str(&fmt_f64(r.theta0));
    out.push_str(",\"forbidden_fraction\":");
    out.push_str(&fmt_f64(r.forbidden_fraction));
    out.push_str(",\"grid\":[");
    for (i, g) in r.grid.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"y\":");
        out.push_str(&fmt_f64(g.y));
        out.push_str(",\"class\":");
        class_json(&g.class, &mut out);
        out.push('}');
    }
    out.push_str("],\"eigen_hits\":[");
    for (i, row) in r.eigen_hits.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        sweep_row_json(row, &mut out);
    }
    out.push_str("]}");
    out
}

/// CSV layout: a grid section (`y,class,I_or_cap`), one row per grid point;
/// then an eigenvalue section (`theta,alpha,same_extension,y,near_atom,
/// convergent`), one row per detected eigenvalue; then the forbidden
/// fraction.
pub fn scan_report_csv(r: &ScanReport) -> String {
    let mut out = String::new();
    out.push_str("y,class,I_or_cap\n");
    for g in &r.grid {
        let (label, value) = match &g.class {
            EnergyClass::Convergent { moment, .. } => ("convergent", *moment),
            EnergyClass::Divergent { witness, .. } => ("divergent", witness.last),
        };
        out.push_str(&fmt_f64(g.y));
        out.push(',');
        out.push_str(label);
        out.push(',');
        out.push_str(&fmt_f64(value));
        out.push('\n');
    }
    out.push_str("theta,alpha,same_extension,y,near_atom,convergent\n");
    for row in &r.eigen_hits {
        let alpha = match (row.alpha, row.alpha_infinite) {
            (Some(a), _) => fmt_f64(a),
            (None, true) => "inf".to_string(),
            (None, false) => String::new(),
        };
        if row.eigenvalues.is_empty() {
            out.push_str(&format!(
                "{},{},{},,,\n",
                fmt_f64(row.theta),
                alpha,
                row.same_extension
            ));
            continue;
        }
        for h in &row.eigenvalues {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(row.theta),
                alpha,
                row.same_extension,
                fmt_f64(h.y),
                h.near_atom,
                h.convergent
            ));
        }
    }
    out.push_str("forbidden_fraction\n");
    out.push_str(&fmt_f64(r.forbidden_fraction));
    out.push('\n');
    out
}

pub fn oracle_suite_json(cases: &[OracleCase], meta: Option<&Meta>) -> String {
    let mut out = String::with_capacity(96 * cases.len() + 128);
    out.push_str("{\"schema\":\"");
    out.push_str(ORACLE_SCHEMA);
    out.push('"');
    out.push_str(&meta_json(meta));
    out.push_str(",\"cases\":[");
    for (i, c) in cases.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"seed\":");
        out.push_str(&c.seed.to_string());
        out.push_str(",\"n\":");
        out.push_str(&c.n.to_string());
        out.push_str(",\"alpha\":");
        out.push_str(&fmt_f64(c.alpha));
        out.push_str(",\"deviation\":");
        out.push_str(&fmt_f64(c.deviation));
        out.push_str(",\"flags\":[");
        for (j, f) in c.flags.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push('"');
            out.push_str(f);
            out.push('"');
        }
        out.push_str("]}");
    }
    out.push_str("],\"max_deviation\":");
    let max = cases.iter().map(|c| c.deviation).fold(0.0f64, f64::max);
    out.push_str(&fmt_f64(max));
    out.push('}');
    out
}

pub fn oracle_suite_csv(cases: &[OracleCase]) -> String {
    let mut out = String::from("seed,n,alpha,deviation,flags\n");
    for c in cases {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.seed,
            c.n,
            fmt_f64(c.alpha),
            fmt_f64(c.deviation),
            c.flags.join(";")
        ));
    }
    out
}
