//! The `audit` subcommand: set sizes and bound evaluation from a trace CSV.
//!
//! The summary CSV does not embed the geometry or learner variant, so they
//! arrive as flags and must match the run that produced the file.

use std::path::PathBuf;

use clap::Args;

use hintbench::error::{Error, Result};
use hintbench::harness::audit::{audit_sets_stats, SetConvention};
use hintbench::harness::{
    bound_main_sums, bound_optimistic_sums, bound_q_sums, optimistic_z, parse_trace_csv,
    DEFAULT_ALPHA_GRID,
};
use hintbench::unconstrained::relaxed_bad_set_margins;

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum VariantArg {
    MainQ2,
    GeneralQ,
}

#[derive(Args)]
pub struct AuditArgs {
    /// Trace CSV produced by `run`.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value = "main-q2")]
    variant: VariantArg,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Comma-separated alpha grid; defaults to the standard sweep.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
}

pub fn run_audit(args: AuditArgs) -> Result<()> {
    if args.q < 2.0 {
        return Err(Error::Config(format!("q must be >= 2, got {}", args.q)));
    }
    let text = std::fs::read_to_string(&args.trace)?;
    let rows = parse_trace_csv(&text)?;
    let stats: Vec<_> = rows.iter().map(|r| r.stats()).collect();
    let p = args.q / (args.q - 1.0);
    let (convention, power) = match args.variant {
        VariantArg::MainQ2 => (SetConvention::SquaredDual, 2.0),
        VariantArg::GeneralQ => (SetConvention::DualPowerP, p),
    };
    let alphas = if args.alphas.is_empty() {
        DEFAULT_ALPHA_GRID.to_vec()
    } else {
        args.alphas.clone()
    };

    let bad_corr_sum: f64 = stats
        .iter()
        .filter(|s| s.corr < 0.0)
        .map(|s| s.corr.abs())
        .sum();
    let final_regret = rows.last().map(|r| r.cum_regret_best_u).unwrap_or(0.0);
    println!(
        "rounds={} final cum_regret_best_u={:.6} bad_corr_sum={:.6}",
        rows.len(),
        final_regret,
        bad_corr_sum
    );

    for &alpha in &alphas {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let (good, bad_alpha, bad) = audit_sets_stats(&stats, alpha, convention, p);
        let mass = |idx: &[usize]| -> f64 {
            idx.iter()
                .map(|&i| stats[i].cost_dual_norm.powf(power))
                .sum()
        };
        let margins: Vec<f64> = stats
            .iter()
            .map(|s| s.corr - alpha * s.cost_dual_norm * s.cost_dual_norm)
            .collect();
        let relaxed = relaxed_bad_set_margins(&margins).len();
        let mut line = format!(
            "alpha={:<6} |G|={} |B_a|={} |B0|={} |B*|={}",
            alpha,
            good.len(),
            bad_alpha.len(),
            bad.len(),
            relaxed
        );
        match args.variant {
            VariantArg::MainQ2 => {
                let b =
                    bound_main_sums(args.mu, alpha, mass(&bad_alpha), mass(&good), bad_corr_sum);
                line.push_str(&format!(" bound_main={b:.6}"));
                if args.q == 2.0 && args.mu == 1.0 {
                    let z = optimistic_z(&stats);
                    line.push_str(&format!(
                        " Z={z:.6} bound_opt={:.6}",
                        bound_optimistic_sums(rows.len(), z)
                    ));
                }
            }
            VariantArg::GeneralQ => {
                let b = bound_q_sums(
                    args.q,
                    args.mu,
                    alpha,
                    args.eta,
                    mass(&good),
                    mass(&bad_alpha),
                    bad_corr_sum,
                )?;
                line.push_str(&format!(" bound_q={b:.6}"));
            }
        }
        println!("{line}");
    }
    Ok(())
}
