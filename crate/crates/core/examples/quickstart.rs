//! Run the hinted learner against the synthetic adversary and audit the
//! recorded trace against the explicit regret bounds.

use hintbench::harness::{bound_main, bound_optimistic, DEFAULT_ALPHA_GRID};
use hintbench::{AdversaryConfig, AdversaryKind, HintedLearner, SpaceSpec, Variant};

fn main() -> hintbench::Result<()> {
    let mut adversary = AdversaryConfig::new(AdversaryKind::Synthetic, 2000);
    adversary.bad_fraction = 0.1;
    adversary.seed = 42;

    let spec = SpaceSpec::euclidean(adversary.dim());
    let mut learner = HintedLearner::new(spec, Variant::MainQ2)?;
    let trace = learner.run(adversary.stream()?)?;

    let report = trace.regret_report(None);
    println!(
        "T = {}, loss = {:.4}, best-in-hindsight regret = {:.4}",
        trace.len(),
        trace.total_loss(),
        report.best_in_hindsight_regret
    );

    for &alpha in DEFAULT_ALPHA_GRID.iter() {
        let bound = bound_main(&trace, alpha)?;
        assert!(report.best_in_hindsight_regret <= bound);
        println!("alpha = {alpha:<5} bound_main = {bound:.3}");
    }
    let (bound, z) = bound_optimistic(&trace)?;
    println!("optimistic: Z = {z:.3}, bound = {bound:.3}");
    Ok(())
}
