//! The outer constrained learner: hint shifting, confidence bookkeeping,
//! and the inner adaptive FTRL.
//!
//! A round is a strict predict/update pair: the hint arrives first, the
//! learner commits to a point, and only then is the cost revealed. The
//! pending-hint latch turns protocol misuse into an error instead of silent
//! state corruption.

use serde::{Deserialize, Serialize};

use crate::adaptive_ftrl::{solve_lambda, FtrlState, Variant};
use crate::error::{Error, Result};
use crate::harness::trace::{RoundRecord, Trace, TraceKind};
use crate::spaces::{dot, CostVector, Point, SpaceSpec, FEAS_TOL};
use crate::surrogate::{hint_shift, SurrogateLoss};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Pending {
    hint: Point,
    xbar: Point,
    x: Point,
}

/// State of the constrained hinted learner (either pseudocode variant).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HintedLearner {
    spec: SpaceSpec,
    variant: Variant,
    eta: f64,
    /// Confidence scale `r_t`; nondecreasing, starts at 1.
    r: f64,
    ftrl: FtrlState,
    pending: Option<Pending>,
}

impl HintedLearner {
    pub fn new(spec: SpaceSpec, variant: Variant) -> Result<Self> {
        Self::with_eta(spec, variant, 1.0)
    }

    /// General-q constructor with the confidence-growth scale `eta >= 1`.
    /// The q = 2 variant has no `eta`; anything but 1 is rejected there.
    pub fn with_eta(spec: SpaceSpec, variant: Variant, eta: f64) -> Result<Self> {
        if eta < 1.0 {
            return Err(Error::Config(format!("eta must be >= 1, got {eta}")));
        }
        if variant == Variant::MainQ2 && eta != 1.0 {
            return Err(Error::Config("the q=2 variant has no eta parameter".into()));
        }
        if variant == Variant::MainQ2 && spec.q != 2.0 {
            return Err(Error::Config(format!(
                "variant main_q2 requires q = 2, got q = {}",
                spec.q
            )));
        }
        Ok(HintedLearner {
            spec,
            variant,
            eta,
            r: 1.0,
            ftrl: FtrlState::new(spec, variant),
            pending: None,
        })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn ftrl(&self) -> &FtrlState {
        &self.ftrl
    }

    fn trace_kind(&self) -> TraceKind {
        TraceKind::Hinted {
            variant: self.variant,
            eta: self.eta,
        }
    }

    /// Receives the round's hint and commits to the shifted point
    /// `x_t = xbar_t - delta_{r_t}(xbar_t) h_t`.
    pub fn predict(&mut self, hint: Point) -> Result<Point> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "predict called with a hint already pending".into(),
            ));
        }
        if hint.dim() != self.spec.dim {
            return Err(Error::Domain(format!(
                "hint dimension {} != space dimension {}",
                hint.dim(),
                self.spec.dim
            )));
        }
        let xbar = self.ftrl.prediction();
        let x = hint_shift(&xbar, &hint, self.r, &self.spec)?;
        self.pending = Some(Pending {
            hint,
            xbar,
            x: x.clone(),
        });
        Ok(x)
    }

    /// Receives the cost, folds the surrogate into the inner FTRL, grows the
    /// confidence scale on negative correlation, and returns the round's
    /// record. `sigma_t` and the surrogate use the `r_t` that was in force
    /// when `x_t` was played.
    pub fn update(&mut self, cost: CostVector) -> Result<RoundRecord> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("update called with no hint pending".into()))?;
        if cost.dim() != self.spec.dim {
            self.pending = Some(pending);
            return Err(Error::Domain(format!(
                "cost dimension {} != space dimension {}",
                cost.dim(),
                self.spec.dim
            )));
        }
        if self.spec.dual_norm(&cost) > 1.0 + FEAS_TOL {
            self.pending = Some(pending);
            return Err(Error::Domain("cost outside the unit dual ball".into()));
        }
        let r_t = self.r;
        let loss = SurrogateLoss::new(pending.hint.clone(), cost.clone(), r_t, self.spec)?;
        let corr = loss.corr();
        let sigma_t = loss.sigma();
        let lambda_t = solve_lambda(
            self.spec.dual_norm(&cost),
            self.ftrl.sigma_sum + sigma_t,
            self.ftrl.lambda_sum,
            &self.spec,
            self.variant,
        );
        let subgrad = loss.subgradient(&pending.xbar);
        let played_loss = dot(&cost, &pending.x);
        self.ftrl.step(&loss, lambda_t);

        if corr < 0.0 {
            self.r = match self.variant {
                Variant::MainQ2 => (r_t * r_t + corr.abs()).sqrt(),
                Variant::GeneralQ => {
                    let p = self.spec.p;
                    (r_t.powf(p) + corr.abs() / self.eta.powf(p)).powf(1.0 / p)
                }
            };
        }

        Ok(RoundRecord {
            t: self.ftrl.round,
            hint: pending.hint,
            cost,
            xbar: pending.xbar,
            x: pending.x,
            r: r_t,
            sigma: sigma_t,
            lambda: lambda_t,
            subgrad,
            loss: played_loss,
        })
    }

    /// Drives a full stream of (hint, cost) rounds and records the trace.
    pub fn run(&mut self, rounds: impl IntoIterator<Item = (Point, CostVector)>) -> Result<Trace> {
        let mut trace = Trace::new(self.trace_kind(), self.spec);
        for (hint, cost) in rounds {
            self.predict(hint)?;
            trace.rounds.push(self.update(cost)?);
        }
        Ok(trace)
    }
}
