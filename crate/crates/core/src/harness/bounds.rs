//! Explicit-constant right-hand sides of the regret theorems, evaluated
//! either from raw scalar sums (the `bounds` CLI) or from recorded traces.

use crate::adaptive_ftrl::Variant;
use crate::error::{Error, Result};
use crate::harness::trace::{RoundStats, Trace};

/// Main q = 2 bound:
///
/// ```text
/// 1/(2 mu) + 4 ( sqrt(Q_alpha)/mu + (r_T/(alpha mu)) log(1 + mu G_alpha) )
///   + 2 sqrt(sum_{B_T} |<c,h>|)
/// ```
///
/// with `Q_alpha = sum_{B_{T,alpha}} ||c||^2`, `G_alpha` the same sum over
/// the good set, and `r_T = sqrt(1 + sum_{B_T} |<c,h>|)`.
pub fn bound_main_sums(
    mu: f64,
    alpha: f64,
    bad_alpha_sq_sum: f64,
    good_alpha_sq_sum: f64,
    bad_corr_sum: f64,
) -> f64 {
    let r_t = (1.0 + bad_corr_sum).sqrt();
    0.5 / mu
        + 4.0
            * (bad_alpha_sq_sum.sqrt() / mu
                + r_t / (alpha * mu) * (1.0 + mu * good_alpha_sq_sum).ln())
        + 2.0 * bad_corr_sum.sqrt()
}

/// Optimistic bound for Hilbert traces:
/// `1/2 + (8 + 16 log(1 + T)) sqrt(Z)`.
pub fn bound_optimistic_sums(t: usize, z: f64) -> f64 {
    0.5 + (8.0 + 16.0 * (1.0 + t as f64).ln()) * z.sqrt()
}

/// `Z = 1 + sum_t max(||c_t - h_t||^2 - ||h_t||^2, 0)`, computed through the
/// Hilbert identity `||c-h||^2 - ||h||^2 = ||c||^2 - 2 <c, h>`.
pub fn optimistic_z(stats: &[RoundStats]) -> f64 {
    1.0 + stats
        .iter()
        .map(|s| (s.cost_dual_norm * s.cost_dual_norm - 2.0 * s.corr).max(0.0))
        .sum::<f64>()
}

/// `S = integral_1^{1+G} z^(-p/q) dz` in closed form: `log(1+G)` at q = 2,
/// `((q-1)/(q-2)) ((1+G)^((q-2)/(q-1)) - 1)` for q > 2.
pub fn s_integral(good_p_sum: f64, q: f64) -> f64 {
    if q == 2.0 {
        (1.0 + good_p_sum).ln()
    } else {
        let e = (q - 2.0) / (q - 1.0);
        (q - 1.0) / (q - 2.0) * ((1.0 + good_p_sum).powf(e) - 1.0)
    }
}

/// General-q bound:
///
/// ```text
/// 2/(mu p)^(1/p) + (2^(p+1)/(p (alpha mu)^(p/q))) S + 2
///   + (8/p^(1/p)) (sum_{B_{T,alpha}} ||c||^p)^(1/p)
///   + 2 (eta + 2^p S/(p (eta alpha mu)^(p/q))) (sum_{B_T} |<c,h>|)^(1/q)
/// ```
pub fn bound_q_sums(
    q: f64,
    mu: f64,
    alpha: f64,
    eta: f64,
    good_p_sum: f64,
    bad_alpha_p_sum: f64,
    bad_corr_sum: f64,
) -> Result<f64> {
    if eta < 1.0 {
        return Err(Error::Domain(format!(
            "the general-q bound requires eta >= 1, got {eta}"
        )));
    }
    let p = q / (q - 1.0);
    let a = p / q;
    let s = s_integral(good_p_sum, q);
    let two_p = (2.0f64).powf(p);
    Ok(2.0 / (mu * p).powf(1.0 / p)
        + 2.0 * two_p / (p * (alpha * mu).powf(a)) * s
        + 2.0
        + 8.0 / p.powf(1.0 / p) * bad_alpha_p_sum.powf(1.0 / p)
        + 2.0 * (eta + two_p * s / (p * (eta * alpha * mu).powf(a))) * bad_corr_sum.powf(1.0 / q))
}

fn hinted_sums(trace: &Trace, alpha: f64, power: f64) -> (f64, f64, f64) {
    let stats = trace.round_stats();
    let mut bad_alpha_sum = 0.0;
    let mut good_sum = 0.0;
    let mut bad_corr = 0.0;
    for s in &stats {
        let m = s.cost_dual_norm.powf(power);
        if s.corr >= alpha * m {
            good_sum += m;
        } else {
            bad_alpha_sum += m;
        }
        if s.corr < 0.0 {
            bad_corr += s.corr.abs();
        }
    }
    (bad_alpha_sum, good_sum, bad_corr)
}

/// Main-theorem bound of a recorded q = 2 run.
pub fn bound_main(trace: &Trace, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    match trace.variant() {
        Some(Variant::MainQ2) => {}
        _ => {
            return Err(Error::Trace(
                "bound_main applies to main_q2 traces only".into(),
            ))
        }
    }
    let (bad_alpha, good, bad_corr) = hinted_sums(trace, alpha, 2.0);
    Ok(bound_main_sums(
        trace.spec.mu,
        alpha,
        bad_alpha,
        good,
        bad_corr,
    ))
}

/// Optimistic bound of a recorded Hilbert run; returns `(bound, Z)`.
pub fn bound_optimistic(trace: &Trace) -> Result<(f64, f64)> {
    if !trace.spec.is_euclidean() {
        return Err(Error::Trace(
            "the optimistic bound needs a Hilbert trace (q = 2, mu = 1)".into(),
        ));
    }
    let z = optimistic_z(&trace.round_stats());
    Ok((bound_optimistic_sums(trace.len(), z), z))
}

/// General-q theorem bound of a recorded run.
pub fn bound_q(trace: &Trace, alpha: f64, eta: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    match trace.variant() {
        Some(Variant::GeneralQ) => {}
        _ => {
            return Err(Error::Trace(
                "bound_q applies to general_q traces only".into(),
            ))
        }
    }
    let (bad_alpha, good, bad_corr) = hinted_sums(trace, alpha, trace.spec.p);
    bound_q_sums(
        trace.spec.q,
        trace.spec.mu,
        alpha,
        eta,
        good,
        bad_alpha,
        bad_corr,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive_ftrl::Variant;
    use crate::harness::trace::TraceKind;
    use crate::hinted_learner::HintedLearner;
    use crate::spaces::{CostVector, Point, SpaceSpec};

    #[test]
    fn bound_main_examples() {
        // all-zero costs, mu = 1 -> 1/2
        assert_eq!(bound_main_sums(1.0, 0.5, 0.0, 0.0, 0.0), 0.5);
        // single round, c = h = e1, alpha = 1 -> 0.5 + 4 log 2
        let v = bound_main_sums(1.0, 1.0, 0.0, 1.0, 0.0);
        assert!((v - (0.5 + 4.0 * (2.0f64).ln())).abs() < 1e-12);
        assert!((v - 3.2726).abs() < 1e-4);
    }

    #[test]
    fn bound_main_trace_wrapper() {
        let spec = SpaceSpec::euclidean(2);
        let mut learner = HintedLearner::new(spec, Variant::MainQ2).unwrap();
        let trace = learner
            .run(vec![(
                Point::basis(2, 0, 1.0),
                CostVector::basis(2, 0, 1.0),
            )])
            .unwrap();
        let v = bound_main(&trace, 1.0).unwrap();
        assert!((v - (0.5 + 4.0 * (2.0f64).ln())).abs() < 1e-12);
        assert!(bound_main(&trace, 0.0).is_err());

        let empty = Trace::new(
            TraceKind::Hinted {
                variant: Variant::GeneralQ,
                eta: 1.0,
            },
            spec,
        );
        assert!(bound_main(&empty, 0.5).is_err());
    }

    #[test]
    fn bound_optimistic_examples() {
        // T = 0: Z = 1, bound = 8.5
        assert_eq!(bound_optimistic_sums(0, 1.0), 8.5);

        // perfect hints: Z stays 1
        let stats: Vec<RoundStats> = (0..5)
            .map(|_| RoundStats {
                corr: 1.0,
                cost_dual_norm: 1.0,
                r: 1.0,
                sigma: 1.0,
                lambda: 0.0,
                loss: 0.0,
            })
            .collect();
        assert_eq!(optimistic_z(&stats), 1.0);

        // zero hints: Z = 1 + C_T
        let stats: Vec<RoundStats> = (0..5)
            .map(|_| RoundStats {
                corr: 0.0,
                cost_dual_norm: 0.8,
                r: 1.0,
                sigma: 0.0,
                lambda: 0.0,
                loss: 0.0,
            })
            .collect();
        assert!((optimistic_z(&stats) - (1.0 + 5.0 * 0.64)).abs() < 1e-12);

        let spec = SpaceSpec::new(2.0, 0.5, 2).unwrap();
        let trace = Trace::new(
            TraceKind::Hinted {
                variant: Variant::MainQ2,
                eta: 1.0,
            },
            spec,
        );
        assert!(bound_optimistic(&trace).is_err());
    }

    #[test]
    fn s_integral_examples() {
        assert_eq!(s_integral(0.0, 3.0), 0.0);
        assert!((s_integral(std::f64::consts::E - 1.0, 2.0) - 1.0).abs() < 1e-12);
        let s = s_integral(15.0, 4.0);
        assert!((s - 8.024406311809196).abs() < 1e-10);
        // quadrature cross-check of the closed form
        for (q, g) in [(2.0, 3.0), (2.5, 7.0), (4.0, 15.0), (6.0, 100.0)] {
            let p = q / (q - 1.0);
            let n = 400_000;
            let a = 1.0;
            let b = 1.0 + g;
            let h = (b - a) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let z0 = a + i as f64 * h;
                let z1 = z0 + h;
                acc += 0.5 * h * (z0.powf(-p / q) + z1.powf(-p / q));
            }
            assert!((acc - s_integral(g, q)).abs() < 1e-6, "q={q}");
        }
    }

    #[test]
    fn bound_q_validation() {
        assert!(bound_q_sums(3.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(bound_q_sums(3.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0).is_ok());
    }
}
