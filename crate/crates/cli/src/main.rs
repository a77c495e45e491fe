//! `hintbench` — run hinted-learner experiments, audit recorded traces,
//! evaluate theorem right-hand sides, emit adversarial streams, and fuzz the
//! technical lemmas.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when an invariant
//! violation is detected during a run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hintbench::adversaries::AdversaryKind;
use hintbench::error::Error;
use hintbench::harness::{
    bound_main_sums, bound_optimistic_sums, bound_q_sums, check_math_lemmas, run_from_config,
    write_stream_file, write_trace_csv, ExperimentConfig,
};
use hintbench::unconstrained::f_bound;

mod audit;

#[derive(Parser)]
#[command(
    name = "hintbench",
    version,
    about = "Online linear optimization with imperfect hints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config file and write per-replica
    /// trace CSVs.
    Run {
        /// JSON config with {learner, adversary, run} sections.
        #[arg(long)]
        config: PathBuf,
        /// Directory for `trace_r<i>.csv` outputs (created if missing).
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Recompute set sizes and bounds from a trace CSV.
    Audit(audit::AuditArgs),
    /// Evaluate a theorem right-hand side from explicit scalars.
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Emit an adversarial (hint, cost) stream to a file.
    Adversary {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        b: usize,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        bad_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuzz the summation lemmas and report the worst violation.
    CheckLemmas {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    FrontLoaded,
    Bernoulli,
    LqOrthogonal,
    LqPlanar,
    Synthetic,
}

impl From<KindArg> for AdversaryKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::FrontLoaded => AdversaryKind::FrontLoaded,
            KindArg::Bernoulli => AdversaryKind::Bernoulli,
            KindArg::LqOrthogonal => AdversaryKind::LqOrthogonal,
            KindArg::LqPlanar => AdversaryKind::LqPlanar,
            KindArg::Synthetic => AdversaryKind::Synthetic,
        }
    }
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Main q = 2 regret bound from its sums.
    Main(MainArgs),
    /// Optimistic (additive-hint) bound from T and Z.
    Optimistic {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        z: f64,
    },
    /// General-q regret bound from its sums.
    GeneralQ(GeneralQArgs),
    /// Parameter-free regret bound f(||u||, C_T, epsilon).
    F {
        #[arg(long)]
        u_norm: f64,
        #[arg(long)]
        c_t: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
}

#[derive(Args)]
struct MainArgs {
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long)]
    alpha: f64,
    /// sum of ||c||^2 over B_{T,alpha}
    #[arg(long)]
    bad_alpha_sq_sum: f64,
    /// sum of ||c||^2 over G_{T,alpha}
    #[arg(long)]
    good_alpha_sq_sum: f64,
    /// sum of |<c,h>| over B_T
    #[arg(long)]
    bad_corr_sum: f64,
}

#[derive(Args)]
struct GeneralQArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// sum of ||c||^p over G_{T,alpha}
    #[arg(long)]
    good_p_sum: f64,
    /// sum of ||c||^p over B_{T,alpha}
    #[arg(long)]
    bad_alpha_p_sum: f64,
    /// sum of |<c,h>| over B_T
    #[arg(long)]
    bad_corr_sum: f64,
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Invariant(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> hintbench::Result<()> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::from_json(&text)?;
            for warning in cfg.adversary.config(cfg.run.seed).hypothesis_warnings() {
                eprintln!("warning: {warning}");
            }
            std::fs::create_dir_all(&out_dir)?;
            let outputs = run_from_config(&cfg)?;
            for (i, out) in outputs.iter().enumerate() {
                let path = out_dir.join(format!("trace_r{i}.csv"));
                write_trace_csv(&out.trace, &path)?;
                println!(
                    "replica {i}: T={} seed={} loss={:.6} best-in-hindsight regret={:.6} -> {}",
                    out.trace.len(),
                    out.trace.seed,
                    out.trace.total_loss(),
                    out.regret.best_in_hindsight_regret,
                    path.display()
                );
                for b in &out.bounds {
                    let mut line = format!(
                        "  alpha={:<5} |G|={} |B_a|={} |B0|={} |B*|={} r_T={:.6}",
                        b.alpha,
                        b.good_count,
                        b.bad_alpha_count,
                        b.bad_count,
                        b.relaxed_bad_count,
                        b.r_t
                    );
                    if let Some(v) = b.bound_main {
                        line.push_str(&format!(" bound_main={v:.6}"));
                    }
                    if let Some(v) = b.bound_q {
                        line.push_str(&format!(" bound_q={v:.6}"));
                    }
                    if let Some(v) = b.bound_optimistic {
                        line.push_str(&format!(" bound_opt={v:.6}"));
                    }
                    println!("{line}");
                }
            }
            Ok(())
        }
        Command::Audit(args) => audit::run_audit(args),
        Command::Bounds { which } => {
            let value = match which {
                BoundsCommand::Main(a) => bound_main_sums(
                    a.mu,
                    a.alpha,
                    a.bad_alpha_sq_sum,
                    a.good_alpha_sq_sum,
                    a.bad_corr_sum,
                ),
                BoundsCommand::Optimistic { t, z } => bound_optimistic_sums(t, z),
                BoundsCommand::GeneralQ(a) => bound_q_sums(
                    a.q,
                    a.mu,
                    a.alpha,
                    a.eta,
                    a.good_p_sum,
                    a.bad_alpha_p_sum,
                    a.bad_corr_sum,
                )?,
                BoundsCommand::F {
                    u_norm,
                    c_t,
                    epsilon,
                    mu,
                } => f_bound(u_norm, c_t, epsilon, mu)?,
            };
            println!("{value:.12}");
            Ok(())
        }
        Command::Adversary {
            kind,
            t,
            b,
            q,
            alpha,
            bad_fraction,
            seed,
            out,
        } => {
            let mut cfg = hintbench::AdversaryConfig::new(kind.into(), t);
            cfg.b = b;
            cfg.q = q;
            cfg.alpha = alpha;
            cfg.bad_fraction = bad_fraction;
            cfg.seed = seed;
            for warning in cfg.hypothesis_warnings() {
                eprintln!("warning: {warning}");
            }
            write_stream_file(cfg.stream()?, &out)?;
            println!("wrote {} rounds to {}", t, out.display());
            Ok(())
        }
        Command::CheckLemmas { samples, seed } => {
            let report = check_math_lemmas(samples, seed)?;
            println!(
                "samples={} violations={} max_violation={:.3e} (sum_formula={:.3e} poly_sum={:.3e} opt_lambda={:.3e})",
                report.samples,
                report.violations,
                report.max_violation(),
                report.max_violation_sum_formula,
                report.max_violation_poly_sum,
                report.max_violation_opt_lambda,
            );
            if report.violations > 0 {
                return Err(Error::Invariant(format!(
                    "{} lemma violations",
                    report.violations
                )));
            }
            Ok(())
        }
    }
}

// die quietly when the reader of a pipe goes away (e.g. `hintbench run | head`)
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
