//! Per-round trace records, regret reports, and derived statistics.

use serde::{Deserialize, Serialize};

use crate::adaptive_ftrl::Variant;
use crate::adversaries::AdversaryConfig;
use crate::error::{Error, Result};
use crate::harness::experiment::LearnerSection;
use crate::spaces::{best_comparator, dot, CostVector, Point, SpaceSpec, FEAS_TOL};

/// One protocol round as recorded by a learner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub hint: Point,
    pub cost: CostVector,
    /// Inner prediction before the hint shift.
    pub xbar: Point,
    /// Played point.
    pub x: Point,
    /// Confidence scale in force when `x` was played.
    pub r: f64,
    /// Strong-convexity increment `|<c,h>| mu / r`.
    pub sigma: f64,
    /// Adaptive regularization weight solved this round.
    pub lambda: f64,
    /// Subgradient of the surrogate at `xbar` (used by the FTRL bound).
    pub subgrad: CostVector,
    /// Linear loss `<c, x>`.
    pub loss: f64,
}

impl RoundRecord {
    /// `<c_t, h_t>`.
    pub fn corr(&self) -> f64 {
        dot(&self.cost, &self.hint)
    }
}

/// Which learner produced a trace; drives audit conventions and decides
/// which bound evaluators apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TraceKind {
    /// The q = 2 learner (squared-dual-norm good-set convention).
    Hinted { variant: Variant, eta: f64 },
    /// The parameter-free combiner (no r/sigma/lambda bookkeeping).
    Unconstrained { epsilon: f64 },
}

/// A recorded run: per-round records plus the configuration that made it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub kind: TraceKind,
    pub spec: SpaceSpec,
    pub rounds: Vec<RoundRecord>,
    pub learner_config: Option<LearnerSection>,
    pub adversary_config: Option<AdversaryConfig>,
    pub seed: u64,
}

impl Trace {
    pub fn new(kind: TraceKind, spec: SpaceSpec) -> Self {
        Trace {
            kind,
            spec,
            rounds: Vec::new(),
            learner_config: None,
            adversary_config: None,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The learner variant, when this trace came from the hinted learner.
    pub fn variant(&self) -> Option<Variant> {
        match self.kind {
            TraceKind::Hinted { variant, .. } => Some(variant),
            TraceKind::Unconstrained { .. } => None,
        }
    }

    /// `C_T = sum_t ||c_t||_p^2`.
    pub fn cost_sq_sum(&self) -> f64 {
        self.rounds
            .iter()
            .map(|r| {
                let n = self.spec.dual_norm(&r.cost);
                n * n
            })
            .sum()
    }

    /// `z = sum_t c_t`.
    pub fn cum_cost(&self) -> CostVector {
        let mut z = vec![0.0; self.spec.dim];
        for r in &self.rounds {
            for (zi, ci) in z.iter_mut().zip(&r.cost.0) {
                *zi += ci;
            }
        }
        CostVector(z)
    }

    /// Total linear loss `sum_t <c_t, x_t>`.
    pub fn total_loss(&self) -> f64 {
        self.rounds.iter().map(|r| r.loss).sum()
    }

    /// `sum_t <c_t, x_t - u>`.
    pub fn empirical_regret(&self, u: &Point) -> f64 {
        self.total_loss() - dot(&self.cum_cost(), u)
    }

    /// Regret report against `u` (best comparator in hindsight when `None`).
    pub fn regret_report(&self, u: Option<Point>) -> RegretReport {
        let z = self.cum_cost();
        let (best, _) = best_comparator(&z, &self.spec);
        let best_regret = self.total_loss() - dot(&z, &best);
        let comparator = u.unwrap_or_else(|| best.clone());
        let regret = self.total_loss() - dot(&z, &comparator);
        RegretReport {
            comparator,
            regret,
            best_in_hindsight_regret: best_regret,
        }
    }

    /// Scalar per-round statistics for audits and bound evaluation.
    pub fn round_stats(&self) -> Vec<RoundStats> {
        self.rounds
            .iter()
            .map(|r| RoundStats {
                corr: r.corr(),
                cost_dual_norm: self.spec.dual_norm(&r.cost),
                r: r.r,
                sigma: r.sigma,
                lambda: r.lambda,
                loss: r.loss,
            })
            .collect()
    }

    /// Consistency checks: indices, feasibility (constrained learners
    /// only), recorded losses.
    pub fn validate(&self) -> Result<()> {
        let constrained = matches!(self.kind, TraceKind::Hinted { .. });
        for (i, rec) in self.rounds.iter().enumerate() {
            if rec.t != i + 1 {
                return Err(Error::Invariant(format!(
                    "round index {} at position {}",
                    rec.t, i
                )));
            }
            if rec.hint.dim() != self.spec.dim
                || rec.cost.dim() != self.spec.dim
                || rec.x.dim() != self.spec.dim
            {
                return Err(Error::Invariant(format!(
                    "round {}: dimension mismatch",
                    rec.t
                )));
            }
            if constrained && !self.spec.is_feasible(&rec.x) {
                return Err(Error::Invariant(format!(
                    "round {}: played point has ||x||_q = {}",
                    rec.t,
                    self.spec.primal_norm(&rec.x)
                )));
            }
            let expect = dot(&rec.cost, &rec.x);
            if (rec.loss - expect).abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "round {}: recorded loss {} != <c,x> = {}",
                    rec.t, rec.loss, expect
                )));
            }
            let cn = self.spec.dual_norm(&rec.cost);
            if cn > 1.0 + FEAS_TOL {
                return Err(Error::Invariant(format!("round {}: ||c||_p = {cn}", rec.t)));
            }
        }
        Ok(())
    }
}

/// Empirical regret against a fixed comparator plus the hindsight optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegretReport {
    pub comparator: Point,
    /// `sum_t <c_t, x_t - comparator>`.
    pub regret: f64,
    /// Regret against `best_comparator(c_{1:T})`.
    pub best_in_hindsight_regret: f64,
}

/// Scalar view of one round, derivable from either a full trace or the
/// summary CSV; everything the audits and bound evaluators need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub corr: f64,
    pub cost_dual_norm: f64,
    pub r: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub loss: f64,
}
