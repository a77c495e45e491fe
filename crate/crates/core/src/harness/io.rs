//! Flat-file trace and stream formats.
//!
//! Trace CSV columns, in order:
//! `t,loss,cum_regret_best_u,r_t,sigma_t,lambda_t,corr,cost_dual_norm`
//! with floats printed to 17 significant digits so re-runs are
//! byte-comparable and round-trips are bit-stable.
//!
//! Stream files carry one round per line: `h_1 ... h_d | c_1 ... c_d` in
//! plain decimal.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::trace::{RoundStats, Trace};
use crate::spaces::{best_comparator, dot, CostVector, Point};

pub const TRACE_CSV_HEADER: &str =
    "t,loss,cum_regret_best_u,r_t,sigma_t,lambda_t,corr,cost_dual_norm";

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the summary CSV of a trace. `cum_regret_best_u` is the running
/// regret against the full-run best comparator.
pub fn trace_csv(trace: &Trace) -> String {
    let (best, _) = best_comparator(&trace.cum_cost(), &trace.spec);
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    let mut cum = 0.0;
    for rec in &trace.rounds {
        cum += rec.loss - dot(&rec.cost, &best);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rec.t,
            fmt_float(rec.loss),
            fmt_float(cum),
            fmt_float(rec.r),
            fmt_float(rec.sigma),
            fmt_float(rec.lambda),
            fmt_float(rec.corr()),
            fmt_float(trace.spec.dual_norm(&rec.cost)),
        );
    }
    out
}

pub fn write_trace_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, trace_csv(trace))?;
    Ok(())
}

/// One parsed row of the summary CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceCsvRow {
    pub t: usize,
    pub loss: f64,
    pub cum_regret_best_u: f64,
    pub r: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub corr: f64,
    pub cost_dual_norm: f64,
}

impl TraceCsvRow {
    pub fn stats(&self) -> RoundStats {
        RoundStats {
            corr: self.corr,
            cost_dual_norm: self.cost_dual_norm,
            r: self.r,
            sigma: self.sigma,
            lambda: self.lambda,
            loss: self.loss,
        }
    }
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceCsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_CSV_HEADER => {}
        other => {
            return Err(Error::Trace(format!(
                "missing or unexpected CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Trace(format!(
                "line {}: expected 8 columns, got {}",
                n + 2,
                fields.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i].trim().parse().map_err(|e| {
                Error::Trace(format!("line {}: bad float {:?}: {e}", n + 2, fields[i]))
            })
        };
        rows.push(TraceCsvRow {
            t: fields[0]
                .trim()
                .parse()
                .map_err(|e| Error::Trace(format!("line {}: bad index: {e}", n + 2)))?,
            loss: f(1)?,
            cum_regret_best_u: f(2)?,
            r: f(3)?,
            sigma: f(4)?,
            lambda: f(5)?,
            corr: f(6)?,
            cost_dual_norm: f(7)?,
        });
    }
    Ok(rows)
}

/// Renders a (hint, cost) stream, one round per line.
pub fn render_stream(rounds: impl IntoIterator<Item = (Point, CostVector)>) -> String {
    let mut out = String::new();
    for (h, c) in rounds {
        let hs: Vec<String> = h.0.iter().map(|x| format!("{x}")).collect();
        let cs: Vec<String> = c.0.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{} | {}", hs.join(" "), cs.join(" "));
    }
    out
}

pub fn write_stream_file(
    rounds: impl IntoIterator<Item = (Point, CostVector)>,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, render_stream(rounds))?;
    Ok(())
}

pub fn parse_stream(text: &str) -> Result<Vec<(Point, CostVector)>> {
    let mut rounds = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (hs, cs) = line
            .split_once('|')
            .ok_or_else(|| Error::Trace(format!("line {}: missing '|' separator", n + 1)))?;
        let parse_side = |side: &str| -> Result<Vec<f64>> {
            side.split_whitespace()
                .map(|tok| {
                    tok.parse().map_err(|e| {
                        Error::Trace(format!("line {}: bad number {tok:?}: {e}", n + 1))
                    })
                })
                .collect()
        };
        let h = parse_side(hs)?;
        let c = parse_side(cs)?;
        if h.len() != c.len() {
            return Err(Error::Trace(format!(
                "line {}: hint/cost dimension mismatch",
                n + 1
            )));
        }
        rounds.push((Point(h), CostVector(c)));
    }
    Ok(rounds)
}
