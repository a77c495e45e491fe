//! Experiment runner, regret accounting, set audits, bound evaluators,
//! math-lemma checkers, and flat-file trace formats.

pub mod audit;
pub mod bounds;
pub mod experiment;
pub mod io;
pub mod lemmas;
pub mod trace;

pub use audit::{audit_sets, audit_sets_stats, bound_report, BoundReport, SetConvention};
pub use bounds::{
    bound_main, bound_main_sums, bound_optimistic, bound_optimistic_sums, bound_q, bound_q_sums,
    optimistic_z, s_integral,
};
pub use experiment::{
    run_experiment, run_from_config, AdversarySection, ExperimentConfig, LearnerSection,
    LearnerVariant, ReplicaOutput, RunSection, DEFAULT_ALPHA_GRID,
};
pub use io::{
    parse_stream, parse_trace_csv, render_stream, trace_csv, write_stream_file, write_trace_csv,
    TraceCsvRow, TRACE_CSV_HEADER,
};
pub use lemmas::{check_math_lemmas, LemmaFuzzReport};
pub use trace::{RegretReport, RoundRecord, RoundStats, Trace, TraceKind};
