//! Experiment configuration and the replica runner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive_ftrl::Variant;
use crate::adversaries::{AdversaryConfig, AdversaryKind};
use crate::error::{Error, Result};
use crate::harness::audit::{bound_report, BoundReport};
use crate::harness::trace::{RegretReport, RoundRecord, Trace, TraceKind};
use crate::hinted_learner::HintedLearner;
use crate::spaces::SpaceSpec;
use crate::unconstrained::CombinerState;

/// Default post-hoc alpha sweep (the learners themselves are
/// alpha-oblivious).
pub const DEFAULT_ALPHA_GRID: [f64; 9] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerVariant {
    MainQ2,
    GeneralQ,
    Unconstrained,
}

fn default_q() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

fn default_replicas() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.5
}

fn default_grid() -> Vec<f64> {
    DEFAULT_ALPHA_GRID.to_vec()
}

/// `learner` section of the experiment config. `mu` defaults to the
/// canonical modulus for `q` when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub variant: LearnerVariant,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_one")]
    pub eta: f64,
    #[serde(default = "default_one")]
    pub epsilon: f64,
}

impl LearnerSection {
    pub fn new(variant: LearnerVariant) -> Self {
        LearnerSection {
            variant,
            q: 2.0,
            mu: None,
            eta: 1.0,
            epsilon: 1.0,
        }
    }

    pub fn space(&self, dim: usize) -> Result<SpaceSpec> {
        match self.mu {
            Some(mu) => SpaceSpec::new(self.q, mu, dim),
            None => SpaceSpec::lq(self.q, dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == LearnerVariant::MainQ2 && self.q != 2.0 {
            return Err(Error::Config(format!(
                "learner variant main_q2 requires q = 2, got {}",
                self.q
            )));
        }
        if !self.q.is_finite() || self.q < 2.0 {
            return Err(Error::Config(format!(
                "learner q must be >= 2, got {}",
                self.q
            )));
        }
        if let Some(mu) = self.mu {
            if mu.is_nan() || mu <= 0.0 {
                return Err(Error::Config(format!(
                    "learner mu must be positive, got {mu}"
                )));
            }
        }
        if self.eta < 1.0 {
            return Err(Error::Config(format!(
                "learner eta must be >= 1, got {}",
                self.eta
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "learner epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `adversary` section; the stream seed comes from the `run` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySection {
    pub kind: AdversaryKind,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "B", default)]
    pub b: usize,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub bad_fraction: f64,
}

impl AdversarySection {
    pub fn config(&self, seed: u64) -> AdversaryConfig {
        AdversaryConfig {
            kind: self.kind,
            t: self.t,
            b: self.b,
            q: self.q,
            alpha: self.alpha,
            bad_fraction: self.bad_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_grid")]
    pub alpha_grid: Vec<f64>,
}

/// Top-level JSON config: `{learner, adversary, run}`; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub learner: LearnerSection,
    pub adversary: AdversarySection,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        self.adversary.config(self.run.seed).validate()?;
        if self.run.replicas == 0 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if self.run.alpha_grid.is_empty()
            || self.run.alpha_grid.iter().any(|a| a.is_nan() || *a <= 0.0)
        {
            return Err(Error::Config("alpha_grid entries must be positive".into()));
        }
        Ok(())
    }
}

/// One replica's trace plus its reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicaOutput {
    pub trace: Trace,
    pub regret: RegretReport,
    pub bounds: Vec<BoundReport>,
}

fn unconstrained_trace(epsilon: f64, spec: SpaceSpec, adv: &AdversaryConfig) -> Result<Trace> {
    let mut combiner = CombinerState::new(epsilon, spec.dim)?;
    let mut trace = Trace::new(TraceKind::Unconstrained { epsilon }, spec);
    for (t, (hint, cost)) in adv.stream()?.enumerate() {
        combiner.predict(hint.clone())?;
        let round = combiner.update(&cost)?;
        trace.rounds.push(RoundRecord {
            t: t + 1,
            hint,
            subgrad: cost.clone(),
            cost,
            xbar: round.x,
            x: round.z,
            r: 1.0,
            sigma: 0.0,
            lambda: 0.0,
            loss: round.loss,
        });
    }
    Ok(trace)
}

fn run_replica(
    learner: &LearnerSection,
    adversary: &AdversaryConfig,
    alpha_grid: &[f64],
) -> Result<ReplicaOutput> {
    let spec = learner.space(adversary.dim())?;
    let mut trace = match learner.variant {
        LearnerVariant::MainQ2 => {
            HintedLearner::with_eta(spec, Variant::MainQ2, 1.0)?.run(adversary.stream()?)?
        }
        LearnerVariant::GeneralQ => HintedLearner::with_eta(spec, Variant::GeneralQ, learner.eta)?
            .run(adversary.stream()?)?,
        LearnerVariant::Unconstrained => unconstrained_trace(learner.epsilon, spec, adversary)?,
    };
    trace.learner_config = Some(learner.clone());
    trace.adversary_config = Some(*adversary);
    trace.seed = adversary.seed;
    trace.validate()?;
    let regret = trace.regret_report(None);
    let bounds = alpha_grid
        .iter()
        .map(|&a| bound_report(&trace, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicaOutput {
        trace,
        regret,
        bounds,
    })
}

/// Runs `replicas` independent replicas in parallel; replica `i` streams
/// with seed `seed + i`. Outputs are deterministic per (config, seed) and
/// returned in replica order.
pub fn run_experiment(
    learner: &LearnerSection,
    adversary: &AdversarySection,
    t: usize,
    seed: u64,
    replicas: usize,
    alpha_grid: &[f64],
) -> Result<Vec<ReplicaOutput>> {
    learner.validate()?;
    if replicas == 0 {
        return Err(Error::Config("replicas must be >= 1".into()));
    }
    let mut section = adversary.clone();
    section.t = t;
    section.config(seed).validate()?;
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            run_replica(
                learner,
                &section.config(seed.wrapping_add(i as u64)),
                alpha_grid,
            )
        })
        .collect()
}

/// Convenience wrapper driving [`run_experiment`] straight from a parsed
/// config.
pub fn run_from_config(cfg: &ExperimentConfig) -> Result<Vec<ReplicaOutput>> {
    cfg.validate()?;
    run_experiment(
        &cfg.learner,
        &cfg.adversary,
        cfg.adversary.t,
        cfg.run.seed,
        cfg.run.replicas,
        &cfg.run.alpha_grid,
    )
}
