//! Good/bad-set audits and per-alpha bound reports.

use serde::{Deserialize, Serialize};

use crate::adaptive_ftrl::Variant;
use crate::error::{Error, Result};
use crate::harness::bounds::{
    bound_main_sums, bound_optimistic_sums, bound_q_sums, optimistic_z, s_integral,
};
use crate::harness::trace::{RoundStats, Trace, TraceKind};
use crate::unconstrained::relaxed_bad_set_margins;

/// Which correlation threshold defines the good set: `alpha ||c||^2` in the
/// strongly convex setting, `alpha ||c||^p` in the general-q setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetConvention {
    SquaredDual,
    DualPowerP,
}

impl SetConvention {
    pub fn for_kind(kind: TraceKind) -> Self {
        match kind {
            TraceKind::Hinted {
                variant: Variant::GeneralQ,
                ..
            } => SetConvention::DualPowerP,
            _ => SetConvention::SquaredDual,
        }
    }

    fn threshold(&self, alpha: f64, cost_dual_norm: f64, p: f64) -> f64 {
        match self {
            SetConvention::SquaredDual => alpha * cost_dual_norm * cost_dual_norm,
            SetConvention::DualPowerP => alpha * cost_dual_norm.powf(p),
        }
    }
}

/// Partitions round indices (0-based) into `(G_{T,alpha}, B_{T,alpha}, B_T)`.
/// Rounds with `c_t = 0` land in the good set (the inequality holds with
/// equality).
pub fn audit_sets_stats(
    stats: &[RoundStats],
    alpha: f64,
    convention: SetConvention,
    p: f64,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut good = Vec::new();
    let mut bad_alpha = Vec::new();
    let mut bad = Vec::new();
    for (i, s) in stats.iter().enumerate() {
        if s.corr >= convention.threshold(alpha, s.cost_dual_norm, p) {
            good.push(i);
        } else {
            bad_alpha.push(i);
        }
        if s.corr < 0.0 {
            bad.push(i);
        }
    }
    (good, bad_alpha, bad)
}

/// [`audit_sets_stats`] with the convention selected by the trace's variant.
pub fn audit_sets(trace: &Trace, alpha: f64) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let stats = trace.round_stats();
    Ok(audit_sets_stats(
        &stats,
        alpha,
        SetConvention::for_kind(trace.kind),
        trace.spec.p,
    ))
}

/// Set sizes and every applicable theorem right-hand side at one alpha.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    /// `|G_{T,alpha}|`.
    pub good_count: usize,
    /// `|B_{T,alpha}|`.
    pub bad_alpha_count: usize,
    /// `|B_T|`.
    pub bad_count: usize,
    /// `|B*_{T,alpha}|` (squared-dual-norm margins).
    pub relaxed_bad_count: usize,
    /// `sqrt(1 + sum_{B_T} |<c,h>|)` (general-q: the eta-scaled p-th root).
    pub r_t: f64,
    /// Bad-set cost mass `Q_alpha` in the convention's power.
    pub q_alpha: f64,
    pub bound_main: Option<f64>,
    pub bound_q: Option<f64>,
    pub bound_optimistic: Option<f64>,
    /// Optimistic mass `Z` (Hilbert traces only).
    pub z: Option<f64>,
    /// The integral `S` (general-q traces only).
    pub s: Option<f64>,
}

/// Builds the per-alpha report for a recorded run, evaluating exactly the
/// bounds whose hypotheses the trace satisfies.
pub fn bound_report(trace: &Trace, alpha: f64) -> Result<BoundReport> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let stats = trace.round_stats();
    let spec = &trace.spec;
    let convention = SetConvention::for_kind(trace.kind);
    let (good, bad_alpha, bad) = audit_sets_stats(&stats, alpha, convention, spec.p);

    let mass = |idx: &[usize]| -> f64 {
        idx.iter()
            .map(|&i| match convention {
                SetConvention::SquaredDual => stats[i].cost_dual_norm * stats[i].cost_dual_norm,
                SetConvention::DualPowerP => stats[i].cost_dual_norm.powf(spec.p),
            })
            .sum()
    };
    let q_alpha = mass(&bad_alpha);
    let good_mass = mass(&good);
    let bad_corr_sum: f64 = bad.iter().map(|&i| stats[i].corr.abs()).sum();

    let margins: Vec<f64> = stats
        .iter()
        .map(|s| s.corr - alpha * s.cost_dual_norm * s.cost_dual_norm)
        .collect();
    let relaxed_bad_count = relaxed_bad_set_margins(&margins).len();

    let (r_t, bound_main, bound_q, bound_optimistic, z, s) = match trace.kind {
        TraceKind::Hinted {
            variant: Variant::MainQ2,
            ..
        } => {
            let r_t = (1.0 + bad_corr_sum).sqrt();
            let main = bound_main_sums(spec.mu, alpha, q_alpha, good_mass, bad_corr_sum);
            let (opt, z) = if spec.is_euclidean() {
                let z = optimistic_z(&stats);
                (Some(bound_optimistic_sums(trace.len(), z)), Some(z))
            } else {
                (None, None)
            };
            (r_t, Some(main), None, opt, z, None)
        }
        TraceKind::Hinted {
            variant: Variant::GeneralQ,
            eta,
        } => {
            let r_t = (1.0 + bad_corr_sum / eta.powf(spec.p)).powf(1.0 / spec.p);
            let s_val = s_integral(good_mass, spec.q);
            let bq = bound_q_sums(
                spec.q,
                spec.mu,
                alpha,
                eta,
                good_mass,
                q_alpha,
                bad_corr_sum,
            )?;
            (r_t, None, Some(bq), None, None, Some(s_val))
        }
        TraceKind::Unconstrained { .. } => {
            let r_t = (1.0 + bad_corr_sum).sqrt();
            (r_t, None, None, None, None, None)
        }
    };

    Ok(BoundReport {
        alpha,
        good_count: good.len(),
        bad_alpha_count: bad_alpha.len(),
        bad_count: bad.len(),
        relaxed_bad_count,
        r_t,
        q_alpha,
        bound_main,
        bound_q,
        bound_optimistic,
        z,
        s,
    })
}
