//! Online linear optimization with imperfect directional hints.
//!
//! A workbench around a constrained learner that shifts an inner FTRL
//! prediction along the round's hint, discounting hints as negative
//! correlations accumulate. The crate provides:
//!
//! - [`spaces`]: `l_q` norm geometry and exact ball minimization,
//! - [`surrogate`]: the hint-shifted strongly convex surrogate loss,
//! - [`adaptive_ftrl`]: FTRL with the self-referential adaptive rate,
//! - [`hinted_learner`]: the outer constrained learner (q = 2 and general q),
//! - [`unconstrained`]: the parameter-free base learner and hint combiner,
//! - [`adversaries`]: seeded lower-bound stream generators and comparator
//!   certificates,
//! - [`harness`]: experiment runner, audits, explicit-constant bound
//!   evaluators, lemma checkers, and flat-file formats.

pub mod adaptive_ftrl;
pub mod adversaries;
pub mod error;
pub mod harness;
pub mod hinted_learner;
pub mod spaces;
pub mod surrogate;
pub mod unconstrained;

pub use adaptive_ftrl::{ftrl_bound, solve_lambda, FtrlState, Variant};
pub use adversaries::{
    lq_comparator_certificate, lq_planar_certificate, AdversaryConfig, AdversaryKind,
};
pub use error::{Error, Result};
pub use harness::{
    audit_sets, bound_main, bound_optimistic, bound_q, bound_report, check_math_lemmas,
    run_experiment, run_from_config, BoundReport, ExperimentConfig, RegretReport, RoundRecord,
    Trace, TraceKind,
};
pub use hinted_learner::HintedLearner;
pub use spaces::{ball_argmin, best_comparator, dot, norm, CostVector, Point, SpaceSpec};
pub use surrogate::{delta, hint_shift, SurrogateLoss};
pub use unconstrained::{f_bound, relaxed_bad_set, CombinerState, ParamFreeState};
